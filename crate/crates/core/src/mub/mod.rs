//! Complete families of mutually unbiased bases in prime and `2^n`
//! dimensions, and the conditional-basis measurement built from them.

mod field;

pub use field::{poly_mul_mod, GF2nField, MODULI};

use std::f64::consts::PI;

use crate::error::{domain, Result};
use crate::linalg::{ComplexMatrix, C64};
use crate::qcore::Povm;

/// `d + 1` unitaries whose columns are the basis vectors `|e^a_x>`; basis 0
/// is the computational basis.
#[derive(Clone, Debug, PartialEq)]
pub struct MubFamily {
    d: usize,
    bases: Vec<ComplexMatrix>,
}

impl MubFamily {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }

    pub fn bases(&self) -> &[ComplexMatrix] {
        &self.bases
    }

    /// `U_a` with `U_a |x> = |e^a_x>`.
    pub fn basis(&self, a: usize) -> &ComplexMatrix {
        &self.bases[a]
    }

    /// `|e^a_x>`.
    pub fn vector(&self, a: usize, x: usize) -> Vec<C64> {
        self.bases[a].column(x)
    }

    /// `max |U_a† U_a - I|` over all bases.
    pub fn unitarity_deviation(&self) -> f64 {
        let id = ComplexMatrix::identity(self.d);
        self.bases.iter().map(|u| (&u.adjoint() * u).max_abs_diff(&id)).fold(0.0, f64::max)
    }

    /// `max | |<e^a_x|e^b_y>|^2 - 1/d |` over all `a != b` and all `x, y`.
    pub fn overlap_deviation(&self) -> f64 {
        let target = 1.0 / self.d as f64;
        let mut worst: f64 = 0.0;
        for a in 0..self.bases.len() {
            for b in a + 1..self.bases.len() {
                let g = &self.bases[a].adjoint() * &self.bases[b];
                worst = g.data().iter().map(|z| (z.norm_sqr() - target).abs()).fold(worst, f64::max);
            }
        }
        worst
    }
}

fn is_prime(p: usize) -> bool {
    p >= 2 && (2..).take_while(|k| k * k <= p).all(|k| !p.is_multiple_of(k))
}

/// Rotates each column so its first nonzero entry is real and positive.
fn fix_phases(m: &mut ComplexMatrix) {
    let d = m.rows();
    for c in 0..m.cols() {
        if let Some(r) = (0..d).find(|&r| m[(r, c)].norm() > 1e-12) {
            let ph = m[(r, c)].conj() / m[(r, c)].norm();
            for rr in 0..d {
                m[(rr, c)] *= ph;
            }
            m[(r, c)] = C64::new(m[(r, c)].re, 0.0);
        }
    }
}

fn finish(d: usize, mut bases: Vec<ComplexMatrix>) -> MubFamily {
    bases.iter_mut().for_each(fix_phases);
    MubFamily { d, bases }
}

/// Complete family for a prime `p <= 97`: the computational basis and
/// `|e^a_x>_j = ω^(a j^2 + x j) / sqrt p` for odd `p`; `Z, X, Y` for `p = 2`.
pub fn mub_prime(p: usize) -> Result<MubFamily> {
    if !is_prime(p) || p > 97 {
        return Err(domain(format!("{p} is not a prime <= 97")));
    }
    if p == 2 {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let (one, i) = (C64::new(r, 0.0), C64::new(0.0, r));
        let x = ComplexMatrix::from_vec(2, 2, vec![one, one, one, -one])?;
        let y = ComplexMatrix::from_vec(2, 2, vec![one, one, i, -i])?;
        return Ok(finish(2, vec![ComplexMatrix::identity(2), x, y]));
    }
    let amp = 1.0 / (p as f64).sqrt();
    let mut bases = vec![ComplexMatrix::identity(p)];
    for a in 0..p {
        bases.push(ComplexMatrix::from_fn(p, p, |j, x| {
            let e = (a * j * j + x * j) % p;
            C64::from_polar(amp, 2.0 * PI * e as f64 / p as f64)
        }));
    }
    Ok(finish(p, bases))
}

/// Complete family for `d = 2^n`, `1 <= n <= 6`: the computational basis and,
/// for each field element `a`, `|e^a_x>_j = i^(j^T M_a j mod 4) (-1)^(x·j) / sqrt d`
/// with `M_a[k][l] = tr(a x^k x^l)` over `GF(2^n)` and `j`, `x` read as bit
/// vectors.
pub fn mub_gf2n(n: usize) -> Result<MubFamily> {
    if !(1..=6).contains(&n) {
        return Err(domain(format!("GF(2^n) families supported for 1 <= n <= 6, got {n}")));
    }
    let f = GF2nField::new(n as u32)?;
    let d = 1usize << n;
    let amp = 1.0 / (d as f64).sqrt();
    let phases = [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(-1.0, 0.0), C64::new(0.0, -1.0)];
    let mut bases = vec![ComplexMatrix::identity(d)];
    for a in 0..d as u32 {
        let m: Vec<Vec<u32>> =
            (0..n).map(|k| (0..n).map(|l| f.trace(f.mul(a, f.mul(1 << k, 1 << l)))).collect()).collect();
        let q: Vec<usize> = (0..d)
            .map(|j| {
                let mut s = 0u32;
                for k in 0..n {
                    for l in 0..n {
                        s += m[k][l] * ((j >> k) & 1) as u32 * ((j >> l) & 1) as u32;
                    }
                }
                (s % 4) as usize
            })
            .collect();
        bases.push(ComplexMatrix::from_fn(d, d, |j, x| {
            let sign = if (x & j).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            phases[q[j]] * (amp * sign)
        }));
    }
    Ok(finish(d, bases))
}

/// Complete family for a prime or a power of two up to 64.
pub fn mub_for_dim(d: usize) -> Result<MubFamily> {
    if d.is_power_of_two() && d >= 4 {
        mub_gf2n(d.trailing_zeros() as usize)
    } else {
        mub_prime(d)
    }
}

/// Conditional-basis measurement on `C^count ⊗ C^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct MubMeasurement {
    /// `U_AB = sum_a |a><a| ⊗ U_a†`.
    pub unitary: ComplexMatrix,
    /// `O_x = (I ⊗ |x><x|) U_AB`.
    pub operators: Vec<ComplexMatrix>,
    /// Elements `O_x† O_x = sum_a |a><a| ⊗ |e^a_x><e^a_x|`.
    pub povm: Povm,
}

/// Measurement that reads `a` and measures `B` in basis `a`, using the first
/// `count` bases of `fam`.
pub fn povm_from_mub(fam: &MubFamily, count: usize) -> Result<MubMeasurement> {
    if count == 0 || count > fam.len() {
        return Err(domain(format!("{count} bases requested from a family of {}", fam.len())));
    }
    let d = fam.d();
    let n = count * d;
    let mut unitary = ComplexMatrix::zeros(n, n);
    for a in 0..count {
        let ua = fam.basis(a).adjoint();
        for r in 0..d {
            for c in 0..d {
                unitary[(a * d + r, a * d + c)] = ua[(r, c)];
            }
        }
    }
    let mut operators = Vec::with_capacity(d);
    let mut elements = Vec::with_capacity(d);
    for x in 0..d {
        let o = ComplexMatrix::from_fn(n, n, |r, c| if r % d == x { unitary[(r, c)] } else { C64::new(0.0, 0.0) });
        elements.push((&o.adjoint() * &o).hermitian_part().with_dims(vec![count, d])?);
        operators.push(o);
    }
    let labels = (0..d).map(|x| x.to_string()).collect();
    let povm = Povm::new(elements, labels)?;
    let unitary = unitary.with_dims(vec![count, d])?;
    Ok(MubMeasurement { unitary, operators, povm })
}
