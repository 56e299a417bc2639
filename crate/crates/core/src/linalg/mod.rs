//! Dense complex linear algebra.
//!
//! Everything in the toolkit is carried by [`ComplexMatrix`]: states, POVM
//! elements, unitaries and Choi matrices. Storage is dense and row-major.
//! Spectral routines (Hermitian eigendecomposition, singular values and
//! products of large matrices) are delegated to `faer`; index-heavy
//! operations on tensor-product spaces live in [`subsystems`].

mod matrix;
mod spectral;
mod subsystems;

pub use matrix::{matmul, ComplexMatrix, C64};
pub use spectral::{
    herm_eig, herm_eig_with, herm_eigenvalues, is_psd, mat_func, mat_func_with, numerical_rank, op_norm,
    singular_values, trace_norm, SpectralFn, Spectrum,
};
pub use subsystems::{
    kron, kron_all, kron_with_limit, partial_trace, permute_state, permute_subsystems, subsystem_permutation,
};

/// Maximum row/column count of any matrix built by the toolkit.
pub const DEFAULT_MAX_DIM: usize = 8192;

/// All numerical tolerances used across the crate, in one place.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ToleranceConfig {
    /// Relative Hermiticity tolerance (times `maxabs`).
    pub hermitian: f64,
    /// Relative rank cutoff for pseudo-inverses and numerical ranks.
    pub rank_cutoff: f64,
    /// Eigenvalues below `-negative_eig * lambda_max` are a domain error.
    pub negative_eig: f64,
    /// PSD tolerance for states, POVM elements and Choi matrices.
    pub psd: f64,
    /// Trace tolerance for density operators.
    pub trace: f64,
    /// Operator-norm tolerance for POVM completeness.
    pub povm_sum: f64,
    /// Trace-preservation tolerance for stored channels.
    pub trace_preservation: f64,
    /// Trace-preservation tolerance accepted by `choi_of`.
    pub choi_validation: f64,
    /// Outcome probabilities below this are treated as impossible.
    pub probability_floor: f64,
    /// Negative probabilities below `-negative_probability` are an error.
    pub negative_probability: f64,
    pub max_matrix_dim: usize,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            hermitian: 1e-12,
            rank_cutoff: 1e-10,
            negative_eig: 1e-9,
            psd: 1e-9,
            trace: 1e-10,
            povm_sum: 1e-8,
            trace_preservation: 1e-8,
            choi_validation: 1e-6,
            probability_floor: 1e-12,
            negative_probability: 1e-9,
            max_matrix_dim: DEFAULT_MAX_DIM,
        }
    }
}
