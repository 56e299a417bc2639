use faer::Side;

use super::matrix::{matmul, ComplexMatrix, C64};
use super::ToleranceConfig;
use crate::error::{domain, Error, Result};

/// Eigendecomposition of a Hermitian matrix, eigenvalues in descending order.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Unitary whose columns are the eigenvectors, in eigenvalue order.
    pub eigenvectors: ComplexMatrix,
}

impl Spectrum {
    /// `V diag(f(lambda)) V^dagger`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let vals: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        weighted_outer(&self.eigenvectors, &vals)
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_with(|l| l)
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// Eigenvector `k` as a plain vector.
    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.eigenvectors.column(k)
    }
}

/// `sum_k w_k |v_k><v_k|` over columns of `v`, skipping zero weights.
fn weighted_outer(v: &ComplexMatrix, weights: &[f64]) -> ComplexMatrix {
    let n = v.rows();
    let support: Vec<usize> = (0..weights.len()).filter(|&k| weights[k] != 0.0).collect();
    if support.is_empty() {
        return ComplexMatrix::zeros(n, n);
    }
    if support.iter().all(|&k| weights[k] > 0.0) {
        // B B^dagger with B = V_s diag(sqrt w) keeps the result exactly Hermitian-structured.
        let b = ComplexMatrix::from_fn(n, support.len(), |i, c| v[(i, support[c])] * weights[support[c]].sqrt());
        return matmul(&b, &b.adjoint());
    }
    let left = ComplexMatrix::from_fn(n, support.len(), |i, c| v[(i, support[c])] * weights[support[c]]);
    let right = ComplexMatrix::from_fn(support.len(), n, |c, j| v[(j, support[c])].conj());
    matmul(&left, &right)
}

fn check_hermitian(m: &ComplexMatrix, tol: f64) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Shape(format!("{}x{} matrix is not square", m.rows(), m.cols())));
    }
    let dev = m.hermitian_deviation();
    if dev > tol * m.max_abs() {
        return Err(domain(format!("matrix is not Hermitian (deviation {dev:.3e})")));
    }
    Ok(())
}

pub fn herm_eig(m: &ComplexMatrix) -> Result<Spectrum> {
    herm_eig_with(m, &ToleranceConfig::default())
}

/// Hermitian eigendecomposition; rejects inputs that are not Hermitian
/// within `cfg.hermitian * maxabs`.
pub fn herm_eig_with(m: &ComplexMatrix, cfg: &ToleranceConfig) -> Result<Spectrum> {
    check_hermitian(m, cfg.hermitian)?;
    let n = m.rows();
    if n == 0 {
        return Ok(Spectrum { eigenvalues: vec![], eigenvectors: ComplexMatrix::zeros(0, 0) });
    }
    let (mut vals, vecs) = if m.is_real() {
        let evd = m
            .to_faer_real()
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Numerical(format!("eigendecomposition failed: {e:?}")))?;
        let vals: Vec<f64> = (0..n).map(|k| evd.S()[k]).collect();
        (vals, ComplexMatrix::from_faer_real(evd.U()))
    } else {
        let evd = m
            .to_faer()
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Numerical(format!("eigendecomposition failed: {e:?}")))?;
        let vals: Vec<f64> = (0..n).map(|k| evd.S()[k].re).collect();
        (vals, ComplexMatrix::from_faer(evd.U()))
    };
    // faer sorts ascending
    vals.reverse();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, j| vecs[(i, n - 1 - j)]);
    Ok(Spectrum { eigenvalues: vals, eigenvectors })
}

/// Eigenvalues only, descending.
pub fn herm_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    check_hermitian(m, ToleranceConfig::default().hermitian)?;
    let mut vals = if m.is_real() {
        m.to_faer_real().self_adjoint_eigenvalues(Side::Lower)
    } else {
        m.to_faer().self_adjoint_eigenvalues(Side::Lower).map(|v| v.into_iter().collect::<Vec<f64>>())
    }
    .map_err(|e| Error::Numerical(format!("eigenvalue computation failed: {e:?}")))?;
    vals.reverse();
    Ok(vals)
}

/// Spectral functions supported by [`mat_func`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectralFn {
    Sqrt,
    InvSqrt,
    /// `lambda^{-1/2}` on the support, 0 below the rank cutoff.
    PseudoInvSqrt,
}

pub fn mat_func(m: &ComplexMatrix, f: SpectralFn) -> Result<ComplexMatrix> {
    mat_func_with(m, f, &ToleranceConfig::default())
}

/// Applies `f` to the eigenvalues of a PSD matrix.
pub fn mat_func_with(m: &ComplexMatrix, f: SpectralFn, cfg: &ToleranceConfig) -> Result<ComplexMatrix> {
    let eig = herm_eig_with(m, cfg)?;
    let lmax = eig.lambda_max().max(0.0);
    let lmin = eig.lambda_min();
    if lmin < -cfg.negative_eig * lmax || (lmax == 0.0 && lmin < 0.0) {
        return Err(domain(format!("matrix is not positive semidefinite (min eigenvalue {lmin:.3e}, max {lmax:.3e})")));
    }
    let cutoff = cfg.rank_cutoff * lmax;
    let mut out = match f {
        SpectralFn::Sqrt => eig.reconstruct_with(|l| l.max(0.0).sqrt()),
        SpectralFn::InvSqrt => {
            if lmax == 0.0 || lmin <= cutoff {
                return Err(domain(format!("inverse square root of a singular matrix (min eigenvalue {lmin:.3e})")));
            }
            eig.reconstruct_with(|l| 1.0 / l.sqrt())
        }
        SpectralFn::PseudoInvSqrt => {
            eig.reconstruct_with(|l| if lmax > 0.0 && l > cutoff { 1.0 / l.sqrt() } else { 0.0 })
        }
    };
    if let Some(d) = m.dims() {
        out = out.with_dims(d.to_vec())?;
    }
    Ok(out)
}

/// Singular values, nonincreasing.
pub fn singular_values(m: &ComplexMatrix) -> Result<Vec<f64>> {
    if m.rows() == 0 || m.cols() == 0 {
        return Ok(vec![]);
    }
    m.to_faer().singular_values().map_err(|e| Error::Numerical(format!("singular value decomposition failed: {e:?}")))
}

/// `tr sqrt(M^dagger M)`; Hermitian inputs use the eigenvalue route.
pub fn trace_norm(m: &ComplexMatrix) -> f64 {
    let tol = ToleranceConfig::default().hermitian;
    if m.is_hermitian(tol) {
        if let Ok(vals) = herm_eigenvalues(m) {
            return vals.iter().map(|l| l.abs()).sum();
        }
    }
    singular_values(m).map(|s| s.iter().sum()).unwrap_or(f64::NAN)
}

/// Largest singular value.
pub fn op_norm(m: &ComplexMatrix) -> f64 {
    let tol = ToleranceConfig::default().hermitian;
    if m.is_hermitian(tol) {
        if let Ok(vals) = herm_eigenvalues(m) {
            return vals.iter().map(|l| l.abs()).fold(0.0, f64::max);
        }
    }
    singular_values(m).map(|s| s.first().copied().unwrap_or(0.0)).unwrap_or(f64::NAN)
}

/// True iff `m` is Hermitian within `tol` and its smallest eigenvalue is at
/// least `-tol * lambda_max`.
pub fn is_psd(m: &ComplexMatrix, tol: f64) -> bool {
    if !m.is_hermitian(tol.max(ToleranceConfig::default().hermitian)) {
        return false;
    }
    match herm_eigenvalues(m) {
        Ok(vals) if vals.is_empty() => true,
        Ok(vals) => {
            let lmax = vals[0].max(0.0);
            let lmin = vals[vals.len() - 1];
            lmin >= -tol * lmax.max(f64::MIN_POSITIVE)
        }
        Err(_) => false,
    }
}

/// Number of eigenvalues above `cutoff * lambda_max` of a Hermitian matrix.
pub fn numerical_rank(m: &ComplexMatrix, cutoff: f64) -> Result<usize> {
    let vals = herm_eigenvalues(m)?;
    let lmax = vals.first().copied().unwrap_or(0.0);
    if lmax <= 0.0 {
        return Ok(0);
    }
    Ok(vals.iter().filter(|&&l| l > cutoff * lmax).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density, random_hermitian, random_psd, random_unitary};
    use crate::rng::RngStream;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn eig_of_diagonal_is_sorted_descending() {
        let s = herm_eig(&ComplexMatrix::real_diag(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(s.eigenvalues, vec![3.0, 2.0, 1.0]);
    }

    #[test]
    fn eig_of_pauli_x() {
        let x = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let s = herm_eig(&x).unwrap();
        assert!((s.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert!((s.eigenvalues[1] + 1.0).abs() < 1e-14);
        let v = s.vector(0);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        // (|0> + |1>)/sqrt2 up to phase
        let overlap = (v[0] * r + v[1] * r).norm();
        assert!((overlap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(herm_eig(&m), Err(Error::Domain(_))));
    }

    #[test]
    fn eig_reconstructs_random_hermitian() {
        let mut rng = RngStream::seeded(11);
        let h = random_hermitian(6, &mut rng);
        let s = herm_eig(&h).unwrap();
        let scale = h.max_abs();
        assert!(s.reconstruct().max_abs_diff(&h) <= 1e-10 * scale);
        let vdv = &s.eigenvectors.adjoint() * &s.eigenvectors;
        assert!(vdv.max_abs_diff(&ComplexMatrix::identity(6)) <= 1e-10);
    }

    #[test]
    fn sqrt_of_diagonal() {
        let r = mat_func(&ComplexMatrix::real_diag(&[4.0, 9.0]), SpectralFn::Sqrt).unwrap();
        assert!(r.max_abs_diff(&ComplexMatrix::real_diag(&[2.0, 3.0])) < 1e-14);
    }

    #[test]
    fn pseudo_inverse_sqrt_of_projector() {
        let p = ComplexMatrix::real_diag(&[1.0, 0.0]);
        let r = mat_func(&p, SpectralFn::PseudoInvSqrt).unwrap();
        assert!(r.max_abs_diff(&p) < 1e-14);
        assert!(matches!(mat_func(&p, SpectralFn::InvSqrt), Err(Error::Domain(_))));
    }

    #[test]
    fn negative_eigenvalue_is_domain_error() {
        let m = ComplexMatrix::real_diag(&[1.0, -0.5]);
        assert!(matches!(mat_func(&m, SpectralFn::Sqrt), Err(Error::Domain(_))));
    }

    #[test]
    fn sqrt_squares_back() {
        let mut rng = RngStream::seeded(3);
        let x = random_psd(5, 5, &mut rng);
        let s = mat_func(&x, SpectralFn::Sqrt).unwrap();
        assert!((&s * &s).max_abs_diff(&x) < 1e-9);
        let inv = mat_func(&x, SpectralFn::InvSqrt).unwrap();
        let id = &(&inv * &x) * &inv;
        assert!(id.max_abs_diff(&ComplexMatrix::identity(5)) < 1e-8);
    }

    #[test]
    fn trace_norm_examples() {
        assert!((trace_norm(&ComplexMatrix::real_diag(&[1.0, -2.0])) - 3.0).abs() < 1e-14);
        let mut rng = RngStream::seeded(5);
        let rho = random_density(3, 3, &mut rng);
        assert!(trace_norm(&(rho.matrix() - rho.matrix())).abs() < 1e-14);
        // |0><0| - |+><+| has eigenvalues +-1/sqrt2
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let plus = [c(r, 0.0), c(r, 0.0)];
        let d = &ComplexMatrix::real_diag(&[1.0, 0.0]) - &ComplexMatrix::projector(&plus);
        // 2x2 oracle: eigenvalues of [[a,b],[b,c]] are (a+c)/2 +- sqrt(((a-c)/2)^2 + b^2)
        let (a, b, cc) = (d[(0, 0)].re, d[(0, 1)].re, d[(1, 1)].re);
        let disc = (((a - cc) / 2.0).powi(2) + b * b).sqrt();
        let oracle = ((a + cc) / 2.0 + disc).abs() + ((a + cc) / 2.0 - disc).abs();
        assert!((oracle - 2f64.sqrt()).abs() < 1e-14);
        assert!((trace_norm(&d) - oracle).abs() < 1e-12);
    }

    #[test]
    fn trace_norm_of_non_hermitian_uses_singular_values() {
        let m = ComplexMatrix::from_real(2, 2, &[0.0, 3.0, 0.0, 0.0]).unwrap();
        assert!((trace_norm(&m) - 3.0).abs() < 1e-12);
        assert!((op_norm(&m) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn op_norm_examples() {
        assert!((op_norm(&ComplexMatrix::identity(7)) - 1.0).abs() < 1e-14);
        assert!((op_norm(&ComplexMatrix::real_diag(&[2.0, -5.0])) - 5.0).abs() < 1e-14);
    }

    #[test]
    fn op_norm_matches_power_iteration() {
        let mut rng = RngStream::seeded(21);
        let m = ComplexMatrix::from_fn(5, 5, |_, _| crate::random::complex_gaussian(&mut rng));
        // power iteration on M^dagger M
        let mtm = &m.adjoint() * &m;
        let mut v = vec![c(1.0, 0.0); 5];
        let mut lambda = 0.0;
        for _ in 0..5000 {
            let w = mtm.apply(&v);
            let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            lambda = norm;
            v = w.into_iter().map(|z| z / norm).collect();
        }
        assert!((op_norm(&m) - lambda.sqrt()).abs() < 1e-8);
    }

    #[test]
    fn psd_examples() {
        assert!(is_psd(&ComplexMatrix::identity(3), 1e-9));
        assert!(!is_psd(&ComplexMatrix::real_diag(&[1.0, -1.0]), 1e-9));
        let mut rng = RngStream::seeded(8);
        let a = ComplexMatrix::from_fn(4, 6, |_, _| crate::random::complex_gaussian(&mut rng));
        assert!(is_psd(&(&a.adjoint() * &a), 1e-9));
    }

    #[test]
    fn unitary_invariance_of_trace_norm() {
        let mut rng = RngStream::seeded(17);
        let m = ComplexMatrix::from_fn(4, 4, |_, _| crate::random::complex_gaussian(&mut rng));
        let u = random_unitary(4, &mut rng);
        let v = random_unitary(4, &mut rng);
        let umv = &(&u * &m) * &v;
        assert!((trace_norm(&umv) - trace_norm(&m)).abs() < 1e-9);
    }

    #[test]
    fn rank_of_projector() {
        let p = ComplexMatrix::real_diag(&[1.0, 1.0, 0.0, 1e-14]);
        assert_eq!(numerical_rank(&p, 1e-10).unwrap(), 2);
    }
}
