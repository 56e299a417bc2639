//! Arithmetic in `GF(2^n)` with a fixed primitive modulus per degree.

use crate::error::{domain, Result};

/// Primitive modulus polynomials, bit `k` holding the coefficient of `x^k`.
pub const MODULI: [u32; 8] = [0b11, 0b111, 0b1011, 0b10011, 0b100101, 0b1000011, 0b1000_0011, 0x11D];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GF2nField {
    n: u32,
    modulus: u32,
    /// `exp[k] = g^k` for `k < 2(q-1)`.
    exp: Vec<u32>,
    log: Vec<u32>,
}

/// Carry-less product reduced modulo `modulus` of degree `n`.
pub fn poly_mul_mod(a: u32, b: u32, modulus: u32, n: u32) -> u32 {
    let mut prod: u64 = 0;
    for k in 0..32 {
        if (b >> k) & 1 == 1 {
            prod ^= (a as u64) << k;
        }
    }
    for k in (n as usize..64).rev() {
        if (prod >> k) & 1 == 1 {
            prod ^= (modulus as u64) << (k - n as usize);
        }
    }
    prod as u32
}

impl GF2nField {
    pub fn new(n: u32) -> Result<Self> {
        if !(1..=8).contains(&n) {
            return Err(domain(format!("GF(2^n) supported for 1 <= n <= 8, got {n}")));
        }
        let modulus = MODULI[n as usize - 1];
        let q = 1u32 << n;
        let g = if n == 1 { 1 } else { 2 };
        let mut exp = vec![0u32; 2 * (q as usize - 1)];
        let mut log = vec![0u32; q as usize];
        let mut v = 1u32;
        for k in 0..q - 1 {
            exp[k as usize] = v;
            log[v as usize] = k;
            v = poly_mul_mod(v, g, modulus, n);
        }
        if v != 1 {
            return Err(domain("modulus is not primitive"));
        }
        for k in q - 1..2 * (q - 1) {
            exp[k as usize] = exp[(k - (q - 1)) as usize];
        }
        Ok(Self { n, modulus, exp, log })
    }

    pub fn degree(&self) -> u32 {
        self.n
    }

    pub fn order(&self) -> u32 {
        1 << self.n
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        a ^ b
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[(self.log[a as usize] + self.log[b as usize]) as usize]
    }

    /// Absolute trace `sum_k a^(2^k)`, an element of `{0, 1}`.
    pub fn trace(&self, a: u32) -> u32 {
        let mut acc = 0;
        let mut p = a;
        for _ in 0..self.n {
            acc ^= p;
            p = self.mul(p, p);
        }
        acc
    }
}
