use crate::linalg::{kron_all, ComplexMatrix, C64};

/// Single-qubit Pauli `sigma_k`, k in {0,1,2,3} = {I, X, Y, Z}.
pub fn pauli(k: u8) -> ComplexMatrix {
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let m = match k {
        0 => [one, z, z, one],
        1 => [z, one, one, z],
        2 => [z, -i, i, z],
        3 => [one, z, z, -one],
        _ => panic!("Pauli index {k} out of range"),
    };
    ComplexMatrix::from_vec(2, 2, m.to_vec()).expect("2x2")
}

/// `sigma_{k_1} ⊗ ... ⊗ sigma_{k_n}`.
pub fn pauli_string(k: &[u8]) -> ComplexMatrix {
    let factors: Vec<ComplexMatrix> = k.iter().map(|&q| pauli(q)).collect();
    kron_all(&factors).expect("Pauli strings within size limit")
}

/// Base-4 digits of `index`, most significant first.
pub fn pauli_digits(index: usize, n: usize) -> Vec<u8> {
    (0..n).map(|j| ((index >> (2 * (n - 1 - j))) & 3) as u8).collect()
}

/// Inverse of [`pauli_digits`].
pub fn pauli_index(digits: &[u8]) -> usize {
    digits.iter().fold(0, |acc, &d| acc * 4 + d as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn identity_string() {
        assert_eq!(pauli_string(&[0, 0]).clear_dims(), ComplexMatrix::identity(4));
    }

    #[test]
    fn x_flips_zero() {
        let v = pauli_string(&[1]).apply(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        assert_eq!(v, vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
    }

    #[test]
    fn random_strings_are_involutions() {
        let mut rng = RngStream::seeded(2);
        for _ in 0..50 {
            let k: Vec<u8> = (0..4).map(|_| rng.below(4) as u8).collect();
            let s = pauli_string(&k);
            assert!((&s * &s).clear_dims().max_abs_diff(&ComplexMatrix::identity(16)) < 1e-15);
            assert!(s.is_hermitian(0.0));
        }
    }

    #[test]
    fn digits_round_trip() {
        for idx in 0..64 {
            assert_eq!(pauli_index(&pauli_digits(idx, 3)), idx);
        }
        assert_eq!(pauli_digits(6, 2), vec![1, 2]);
    }

    #[test]
    fn xy_equals_iz() {
        let xy = &pauli(1) * &pauli(2);
        assert!(xy.max_abs_diff(&pauli(3).scale(C64::new(0.0, 1.0))) < 1e-15);
    }
}
