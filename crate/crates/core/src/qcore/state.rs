use crate::error::{shape, Error, Result};
use crate::linalg::{herm_eigenvalues, kron, ComplexMatrix, ToleranceConfig, C64};

/// Normalized state vector with subsystem dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: Vec<C64>,
    dims: Vec<usize>,
}

const NORM_TOL: f64 = 1e-10;

impl PureState {
    /// Wraps amplitudes that must already have unit norm.
    pub fn new(amplitudes: Vec<C64>, dims: Vec<usize>) -> Result<Self> {
        check_dims(amplitudes.len(), &dims)?;
        let norm_sqr: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(Error::Validation(format!("state has squared norm {norm_sqr}")));
        }
        Ok(Self { amplitudes, dims })
    }

    /// Rescales a nonzero vector to unit norm.
    pub fn normalized(mut amplitudes: Vec<C64>, dims: Vec<usize>) -> Result<Self> {
        check_dims(amplitudes.len(), &dims)?;
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(Error::Validation("cannot normalize the zero vector".into()));
        }
        amplitudes.iter_mut().for_each(|z| *z /= norm);
        Ok(Self { amplitudes, dims })
    }

    /// Computational basis state `|index>`.
    pub fn basis(dims: Vec<usize>, index: usize) -> Result<Self> {
        let len: usize = dims.iter().product();
        if index >= len {
            return Err(shape(format!("basis index {index} out of range {len}")));
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); len];
        amplitudes[index] = C64::new(1.0, 0.0);
        Ok(Self { amplitudes, dims })
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// `|self> ⊗ |other>`.
    pub fn tensor(&self, other: &PureState) -> PureState {
        let amplitudes = self.amplitudes.iter().flat_map(|a| other.amplitudes.iter().map(move |b| a * b)).collect();
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        PureState { amplitudes, dims }
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &PureState) -> C64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &PureState) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Applies an operator of matching dimension and keeps the dims.
    pub fn evolve(&self, u: &ComplexMatrix) -> Result<PureState> {
        if u.cols() != self.dim() || u.rows() != self.dim() {
            return Err(shape(format!("{}x{} operator on a state of dimension {}", u.rows(), u.cols(), self.dim())));
        }
        PureState::normalized(u.apply(&self.amplitudes), self.dims.clone())
    }

    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::projector(&self.amplitudes).with_dims(self.dims.clone()).expect("dims validated at construction")
    }

    pub fn density(&self) -> DensityOperator {
        DensityOperator::from_matrix_unchecked(self.projector())
    }
}

fn check_dims(len: usize, dims: &[usize]) -> Result<()> {
    if dims.iter().product::<usize>() != len {
        return Err(shape(format!("dims {dims:?} do not match {len} amplitudes")));
    }
    Ok(())
}

/// `(1/sqrt d) sum_i |i>|i>` on `C^d ⊗ C^d`.
pub fn max_entangled(d: usize) -> PureState {
    let mut amplitudes = vec![C64::new(0.0, 0.0); d * d];
    let a = 1.0 / (d as f64).sqrt();
    for i in 0..d {
        amplitudes[i * d + i] = C64::new(a, 0.0);
    }
    PureState { amplitudes, dims: vec![d, d] }
}

/// Unit-trace positive semidefinite operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
}

impl DensityOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::new_with(matrix, &ToleranceConfig::default())
    }

    pub fn new_with(matrix: ComplexMatrix, cfg: &ToleranceConfig) -> Result<Self> {
        if !matrix.is_square() {
            return Err(shape(format!("density operator must be square, got {}x{}", matrix.rows(), matrix.cols())));
        }
        if !matrix.is_hermitian(cfg.hermitian) {
            return Err(Error::Validation("density operator is not Hermitian".into()));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > cfg.trace || tr.im.abs() > cfg.trace {
            return Err(Error::Validation(format!("density operator has trace {tr}")));
        }
        let vals = herm_eigenvalues(&matrix)?;
        let lmin = vals.last().copied().unwrap_or(0.0);
        if lmin < -cfg.psd * vals[0].max(0.0) {
            return Err(Error::Validation(format!("density operator has eigenvalue {lmin:.3e}")));
        }
        Ok(Self::from_matrix_unchecked(matrix))
    }

    /// Skips the spectral check; for operators valid by construction.
    pub fn from_matrix_unchecked(matrix: ComplexMatrix) -> Self {
        let matrix = if matrix.dims().is_some() {
            matrix
        } else {
            let n = matrix.rows();
            matrix.with_dims(vec![n]).expect("flat dims always match")
        };
        Self { matrix }
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self::from_matrix_unchecked(ComplexMatrix::identity(d).scale_real(1.0 / d as f64))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn dims(&self) -> &[usize] {
        self.matrix.dims().expect("density operators always carry dims")
    }

    /// `tr rho^2`.
    pub fn purity(&self) -> f64 {
        self.matrix.trace_product(&self.matrix).re
    }

    /// `<psi|rho|psi>`.
    pub fn expectation(&self, psi: &[C64]) -> f64 {
        self.matrix.sandwich(psi, psi).re
    }

    pub fn tensor(&self, other: &DensityOperator) -> Result<DensityOperator> {
        Ok(Self::from_matrix_unchecked(kron(&self.matrix, &other.matrix)?))
    }
}
