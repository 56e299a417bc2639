//! Random matrices, states, POVMs and channels for tests and experiments.

use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{mat_func, ComplexMatrix, SpectralFn, C64};
use crate::qcore::{DensityOperator, Povm, PureState, QuantumChannel};
use crate::rng::RngStream;

/// Standard complex Gaussian, `E|z|^2 = 1`.
pub fn complex_gaussian(rng: &mut RngStream) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn gaussian_vec(n: usize, rng: &mut RngStream) -> Vec<C64> {
    (0..n).map(|_| complex_gaussian(rng)).collect()
}

/// Haar-random unitary: Gram-Schmidt on Gaussian columns.
pub fn random_unitary(d: usize, rng: &mut RngStream) -> ComplexMatrix {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(d);
    while cols.len() < d {
        let mut v = gaussian_vec(d, rng);
        for _ in 0..2 {
            for c in &cols {
                let ip: C64 = c.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                v.iter_mut().zip(c).for_each(|(x, y)| *x -= ip * y);
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            v.iter_mut().for_each(|z| *z /= norm);
            cols.push(v);
        }
    }
    ComplexMatrix::from_fn(d, d, |i, j| cols[j][i])
}

/// Haar-random pure state.
pub fn haar_state(dims: Vec<usize>, rng: &mut RngStream) -> PureState {
    let n = dims.iter().product();
    PureState::normalized(gaussian_vec(n, rng), dims).expect("Gaussian vector is nonzero")
}

pub fn random_hermitian(d: usize, rng: &mut RngStream) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(d, d, |_, _| complex_gaussian(rng));
    (&g + &g.adjoint()).scale_real(0.5)
}

/// Wishart matrix `G G^dagger` with `G` of size `d x rank`.
pub fn random_psd(d: usize, rank: usize, rng: &mut RngStream) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(d, rank, |_, _| complex_gaussian(rng));
    (&g * &g.adjoint()).hermitian_part()
}

/// Random density operator of rank at most `rank`.
pub fn random_density(d: usize, rank: usize, rng: &mut RngStream) -> DensityOperator {
    let w = random_psd(d, rank, rng);
    let tr = w.trace().re;
    DensityOperator::from_matrix_unchecked(w.scale_real(1.0 / tr))
}

/// Random POVM: `S^{-1/2} G_k S^{-1/2}` for Wishart `G_k`, `S = sum_k G_k`.
pub fn random_povm(d: usize, outcomes: usize, rng: &mut RngStream) -> Povm {
    let gs: Vec<ComplexMatrix> = (0..outcomes).map(|_| random_psd(d, d, rng)).collect();
    let mut s = ComplexMatrix::zeros(d, d);
    gs.iter().for_each(|g| s += g);
    let inv = mat_func(&s, SpectralFn::InvSqrt).expect("Wishart sum is invertible");
    let elements = gs.iter().map(|g| (&(&inv * g) * &inv).hermitian_part()).collect();
    let labels = (0..outcomes).map(|k| k.to_string()).collect();
    Povm::new(elements, labels).expect("normalized Wishart POVM")
}

/// Random channel `d_in -> d_out` with `kraus` Kraus operators, from a
/// Haar-random isometry into `C^{d_out} ⊗ C^{kraus}`.
pub fn random_channel(d_in: usize, d_out: usize, kraus: usize, rng: &mut RngStream) -> QuantumChannel {
    let big = d_out * kraus;
    assert!(big >= d_in, "isometry needs d_out * kraus >= d_in");
    let u = random_unitary(big, rng);
    // V[(b,e),a] = U[(b,e),a]; J[(b,a),(b',a')] = sum_e V[(b,e),a] conj V[(b',e),a'] / d_in
    let scale = 1.0 / d_in as f64;
    let choi = ComplexMatrix::from_fn(d_out * d_in, d_out * d_in, |r, s| {
        let (b, a, bp, ap) = (r / d_in, r % d_in, s / d_in, s % d_in);
        (0..kraus).map(|e| u[(b * kraus + e, a)] * u[(bp * kraus + e, ap)].conj()).sum::<C64>() * scale
    });
    QuantumChannel::from_choi_unchecked(choi.hermitian_part(), d_in, d_out).expect("shape by construction")
}
