//! Standard targets on `A_1..A_n B_1..B_n`, acting pairwise on `(A_k, B_k)`.

use crate::linalg::{kron_all, permute_subsystems, ComplexMatrix, C64};
use crate::qcore::{bell_state, Povm};

/// Moves operators on `(A_1 B_1)(A_2 B_2)...` to `A_1..A_n B_1..B_n`.
fn from_pairwise(m: &ComplexMatrix, n: usize) -> ComplexMatrix {
    let dims = vec![2; 2 * n];
    let perm: Vec<usize> = (0..n).map(|k| 2 * k).chain((0..n).map(|k| 2 * k + 1)).collect();
    permute_subsystems(m, &dims, &perm).expect("qubit register").clear_dims()
}

/// Bell measurement on every pair; labels are the base-4 digit strings.
pub fn bell_povm(n: usize) -> Povm {
    let pair: Vec<ComplexMatrix> = (0..4).map(|k| ComplexMatrix::projector(&bell_state(k))).collect();
    let count = 1usize << (2 * n);
    let mut elements = Vec::with_capacity(count);
    let mut labels = Vec::with_capacity(count);
    for idx in 0..count {
        let digits = crate::qcore::pauli_digits(idx, n);
        let factors: Vec<ComplexMatrix> = digits.iter().map(|&k| pair[k as usize].clone()).collect();
        elements.push(from_pairwise(&kron_all(&factors).expect("small"), n));
        labels.push(digits.iter().map(|k| k.to_string()).collect());
    }
    Povm::new(elements, labels).expect("Bell projectors")
}

/// Computational basis on `2n` qubits; labels are bit strings.
pub fn comp_povm(n: usize) -> Povm {
    let d = 1usize << (2 * n);
    let p = Povm::computational(d);
    let labels = (0..d).map(|k| format!("{k:0w$b}", w = 2 * n)).collect();
    Povm::from_elements_unchecked(p.into_elements(), labels).expect("shape")
}

/// CNOT from `A_k` to `B_k` on every pair.
pub fn cnot(n: usize) -> ComplexMatrix {
    let one = C64::new(1.0, 0.0);
    let mut c = ComplexMatrix::zeros(4, 4);
    for (r, s) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
        c[(r, s)] = one;
    }
    from_pairwise(&kron_all(&vec![c; n]).expect("small"), n)
}

/// Exchanges the `A` and `B` registers.
pub fn swap(n: usize) -> ComplexMatrix {
    let h = 1usize << n;
    let mut s = ComplexMatrix::zeros(h * h, h * h);
    for a in 0..h {
        for b in 0..h {
            s[(b * h + a, a * h + b)] = C64::new(1.0, 0.0);
        }
    }
    s
}
