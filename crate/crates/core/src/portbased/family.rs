use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::linalg::{
    herm_eigenvalues, mat_func, matmul, numerical_rank, ComplexMatrix, SpectralFn, ToleranceConfig, C64,
};
use crate::qcore::{DensityOperator, Povm};

/// The states `eta^i = |Φ><Φ|_{A'_i B} ⊗ (I/d)^{⊗(N-1)}` on `A'_1 ... A'_N B`.
///
/// Each `eta^i` has only `d^(N+1)` nonzero entries, so the family is kept in
/// index form and dense matrices are built on demand.
#[derive(Debug)]
pub struct PortFamily {
    d: usize,
    ports: usize,
    sum: OnceLock<ComplexMatrix>,
    sum_inv_sqrt: OnceLock<ComplexMatrix>,
}

impl Clone for PortFamily {
    fn clone(&self) -> Self {
        Self { d: self.d, ports: self.ports, sum: self.sum.clone(), sum_inv_sqrt: self.sum_inv_sqrt.clone() }
    }
}

/// Builds the family, checking `d^(N+1)` against the size limit.
pub fn eta_family(d: usize, ports: usize) -> Result<PortFamily> {
    eta_family_with_limit(d, ports, ToleranceConfig::default().max_matrix_dim)
}

pub fn eta_family_with_limit(d: usize, ports: usize, limit: usize) -> Result<PortFamily> {
    if d < 2 || ports < 1 {
        return Err(Error::Domain(format!("port family needs d >= 2 and N >= 1, got d={d}, N={ports}")));
    }
    let dim = d.checked_pow(ports as u32 + 1).ok_or(Error::SizeLimit { dim: usize::MAX, limit })?;
    if dim > limit {
        return Err(Error::SizeLimit { dim, limit });
    }
    Ok(PortFamily { d, ports, sum: OnceLock::new(), sum_inv_sqrt: OnceLock::new() })
}

impl PortFamily {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn ports(&self) -> usize {
        self.ports
    }

    /// Total dimension `d^(N+1)`.
    pub fn dim(&self) -> usize {
        self.d.pow(self.ports as u32 + 1)
    }

    /// Subsystem dimensions in the order `A'_1 ... A'_N B`.
    pub fn dims(&self) -> Vec<usize> {
        vec![self.d; self.ports + 1]
    }

    fn stride(&self, k: usize) -> usize {
        self.d.pow((self.ports - k) as u32)
    }

    /// Flat offsets of every assignment of the subsystems other than
    /// `A'_i` and `B`.
    fn rest_offsets(&self, i: usize) -> Vec<usize> {
        let mut out = vec![0usize];
        for k in 0..self.ports {
            if k == i {
                continue;
            }
            let s = self.stride(k);
            out = out.iter().flat_map(|&o| (0..self.d).map(move |v| o + v * s)).collect();
        }
        out
    }

    /// Step between the `|aa>` components of `|Φ>_{A'_i B}`.
    fn pair_step(&self, i: usize) -> usize {
        self.stride(i) + 1
    }

    /// Nonzero entries `(row, col, value)` of `eta^i` (0-based `i`).
    pub fn eta_entries(&self, i: usize) -> Vec<(usize, usize, f64)> {
        assert!(i < self.ports, "port {i} out of range");
        let v = 1.0 / (self.d as f64).powi(self.ports as i32);
        let step = self.pair_step(i);
        let mut out = Vec::with_capacity(self.dim() * self.d);
        for r in self.rest_offsets(i) {
            for a in 0..self.d {
                for b in 0..self.d {
                    out.push((r + a * step, r + b * step, v));
                }
            }
        }
        out
    }

    /// Dense `eta^i` (0-based `i`).
    pub fn eta(&self, i: usize) -> DensityOperator {
        let n = self.dim();
        let mut m = ComplexMatrix::zeros(n, n);
        for (x, y, v) in self.eta_entries(i) {
            m[(x, y)] = C64::new(v, 0.0);
        }
        DensityOperator::from_matrix_unchecked(m.with_dims(self.dims()).expect("dims match"))
    }

    /// All `N` states as dense matrices.
    pub fn etas(&self) -> Vec<DensityOperator> {
        (0..self.ports).map(|i| self.eta(i)).collect()
    }

    /// `tr(eta^i eta^j)` from the sparse entries.
    pub fn overlap(&self, i: usize, j: usize) -> f64 {
        let ej = self.eta_entries(j);
        let lookup: std::collections::HashMap<(usize, usize), f64> =
            ej.into_iter().map(|(x, y, v)| ((x, y), v)).collect();
        self.eta_entries(i).iter().map(|&(x, y, v)| v * lookup.get(&(y, x)).copied().unwrap_or(0.0)).sum()
    }

    /// `S = sum_i eta^i`, cached.
    pub fn sum(&self) -> &ComplexMatrix {
        self.sum.get_or_init(|| {
            let n = self.dim();
            let mut m = ComplexMatrix::zeros(n, n);
            for i in 0..self.ports {
                for (x, y, v) in self.eta_entries(i) {
                    m[(x, y)] += v;
                }
            }
            m.with_dims(self.dims()).expect("dims match")
        })
    }

    /// Pseudo-inverse square root of `S`, cached.
    pub fn sum_inv_sqrt(&self) -> Result<&ComplexMatrix> {
        if let Some(m) = self.sum_inv_sqrt.get() {
            return Ok(m);
        }
        let t = mat_func(self.sum(), SpectralFn::PseudoInvSqrt)?;
        Ok(self.sum_inv_sqrt.get_or_init(|| t))
    }

    /// `E^i = S^{-1/2} eta^i S^{-1/2}` on `A'_1 ... A'_N B`, with the
    /// completion `I - sum_i E^i` merged into `E^1`. Uses
    /// `eta^i = W_i W_i^T / d^(N-1)` with sparse orthonormal columns `W_i`.
    pub fn pgm(&self) -> Result<Povm> {
        let t = self.sum_inv_sqrt()?;
        let n = self.dim();
        let d = self.d;
        let amp = 1.0 / (d as f64).sqrt();
        let norm = 1.0 / (d as f64).powi(self.ports as i32 - 1);
        let mut elements = Vec::with_capacity(self.ports);
        let mut total = ComplexMatrix::zeros(n, n);
        for i in 0..self.ports {
            let rest = self.rest_offsets(i);
            let step = self.pair_step(i);
            // M = T W_i
            let m = ComplexMatrix::from_fn(n, rest.len(), |row, c| {
                let base = rest[c];
                (0..d).map(|a| t[(row, base + a * step)]).sum::<C64>() * amp
            });
            let e = matmul(&m, &m.transpose()).scale_real(norm).hermitian_part();
            total += &e;
            elements.push(e.with_dims(self.dims())?);
        }
        let completion = &ComplexMatrix::identity(n) - &total;
        let first = &elements[0] + &completion;
        elements[0] = first.with_dims(self.dims())?;
        let labels = (1..=self.ports).map(|i| i.to_string()).collect();
        Povm::from_elements_unchecked(elements, labels)
    }

    /// `(1/N) sum_i tr(E^i eta^i)` for a POVM on `A'_1 ... A'_N B`.
    pub fn success_probability(&self, povm: &Povm) -> Result<f64> {
        if povm.len() != self.ports || povm.dim() != self.dim() {
            return Err(Error::Shape("POVM does not match the port family".into()));
        }
        let mut acc = 0.0;
        for i in 0..self.ports {
            let e = povm.element(i);
            acc += self.eta_entries(i).iter().map(|&(x, y, v)| v * e[(y, x)].re).sum::<f64>();
        }
        Ok(acc / self.ports as f64)
    }

    /// Generic PGM bound `1 / (N r̄ tr η̄^2)` evaluated with the cached sum and
    /// numerical ranks of the Gram matrices `W_i^T W_i / d^(N-1)`.
    pub fn generic_bound(&self) -> Result<f64> {
        let n = self.ports as f64;
        let s = self.sum();
        let tr_bar_sq = s.trace_product(s).re / (n * n);
        let cutoff = ToleranceConfig::default().rank_cutoff;
        let mut rank_total = 0usize;
        for i in 0..self.ports {
            rank_total += numerical_rank(&self.gram(i), cutoff)?;
        }
        let r_bar = rank_total as f64 / n;
        Ok(1.0 / (n * r_bar * tr_bar_sq))
    }

    /// `W_i^T W_i / d^(N-1)`, which has the same nonzero spectrum as `eta^i`.
    fn gram(&self, i: usize) -> ComplexMatrix {
        let rest = self.rest_offsets(i);
        let step = self.pair_step(i);
        let cols: Vec<Vec<usize>> = rest.iter().map(|&r| (0..self.d).map(|a| r + a * step).collect()).collect();
        let norm = 1.0 / (self.d as f64).powi(self.ports as i32 - 1);
        ComplexMatrix::from_fn(rest.len(), rest.len(), |p, q| {
            let shared = cols[p].iter().filter(|x| cols[q].contains(x)).count();
            C64::new(shared as f64 / self.d as f64 * norm, 0.0)
        })
    }

    /// Eigenvalues of `S`, descending.
    pub fn sum_spectrum(&self) -> Result<Vec<f64>> {
        herm_eigenvalues(self.sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kron_all, permute_subsystems};
    use crate::qcore::max_entangled;

    /// eta^i from its definition: |Φ><Φ| ⊗ I/d^(N-1), then A'_i moved into place.
    fn eta_oracle(d: usize, ports: usize, i: usize) -> ComplexMatrix {
        let mut factors = vec![max_entangled(d).projector()];
        for _ in 1..ports {
            factors.push(ComplexMatrix::identity(d).scale_real(1.0 / d as f64));
        }
        // current order: A'_i, B, others...
        let m = kron_all(&factors).unwrap();
        let mut current = vec![i, ports];
        current.extend((0..ports).filter(|&k| k != i));
        // perm[k] = position in `current` of target subsystem k
        let perm: Vec<usize> = (0..=ports).map(|k| current.iter().position(|&c| c == k).unwrap()).collect();
        permute_subsystems(&m, &vec![d; ports + 1], &perm).unwrap()
    }

    #[test]
    fn single_port_is_max_entangled() {
        let fam = eta_family(2, 1).unwrap();
        assert!(fam.eta(0).matrix().max_abs_diff(&max_entangled(2).projector()) < 1e-15);
    }

    #[test]
    fn entries_match_definition() {
        for (d, n) in [(2, 1), (2, 3), (3, 2), (2, 4)] {
            let fam = eta_family(d, n).unwrap();
            for i in 0..n {
                let got = fam.eta(i).into_matrix();
                assert!(got.max_abs_diff(&eta_oracle(d, n, i)) < 1e-15, "d={d} N={n} i={i}");
            }
        }
    }

    #[test]
    fn overlaps() {
        let fam = eta_family(2, 2).unwrap();
        assert!((fam.overlap(0, 1) - 1.0 / 8.0).abs() < 1e-15);
        let fam = eta_family(3, 2).unwrap();
        assert!((fam.overlap(0, 0) - 1.0 / 3.0).abs() < 1e-15);
        let dense = fam.eta(0).matrix().trace_product(fam.eta(1).matrix()).re;
        assert!((fam.overlap(0, 1) - dense).abs() < 1e-15);
    }

    #[test]
    fn size_limit() {
        assert!(matches!(eta_family(2, 13), Err(Error::SizeLimit { dim: 16384, limit: 8192 })));
        assert!(eta_family(1, 3).is_err());
        assert!(eta_family(2, 0).is_err());
    }

    #[test]
    fn structured_pgm_matches_generic() {
        for (d, n) in [(2, 1), (2, 2), (2, 3), (3, 2)] {
            let fam = eta_family(d, n).unwrap();
            let fast = fam.pgm().unwrap();
            let slow = super::super::pgm_build(&fam.etas()).unwrap();
            for i in 0..n {
                assert!(fast.element(i).max_abs_diff(slow.element(i)) < 1e-10, "d={d} N={n}");
            }
            let p1 = fam.success_probability(&fast).unwrap();
            let p2 = super::super::pgm_success(&fam.etas(), &slow).unwrap();
            assert!((p1 - p2).abs() < 1e-12);
        }
    }

    #[test]
    fn structured_bound_matches_generic() {
        for (d, n) in [(2, 2), (2, 3), (3, 2)] {
            let fam = eta_family(d, n).unwrap();
            let generic = super::super::pgm_generic_bound(&fam.etas()).unwrap();
            assert!((fam.generic_bound().unwrap() - generic).abs() < 1e-12);
        }
    }
}
