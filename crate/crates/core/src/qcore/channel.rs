use super::state::{max_entangled, DensityOperator};
use crate::error::{shape, Error, Result};
use crate::linalg::{
    herm_eig, herm_eigenvalues, matmul, op_norm, partial_trace, trace_norm, ComplexMatrix, ToleranceConfig, C64,
};

/// CPTP map stored as its trace-one Choi matrix on `out ⊗ in`:
/// `J[(b,a),(b',a')] = Ω(|a><a'|)[b,b'] / d_in`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumChannel {
    choi: ComplexMatrix,
    dim_in: usize,
    dim_out: usize,
}

impl QuantumChannel {
    /// Validated channel (Choi PSD, trace preserving).
    pub fn from_choi(choi: ComplexMatrix, dim_in: usize, dim_out: usize) -> Result<Self> {
        Self::from_choi_with(
            choi,
            dim_in,
            dim_out,
            &ToleranceConfig::default(),
            ToleranceConfig::default().trace_preservation,
        )
    }

    fn from_choi_with(
        choi: ComplexMatrix,
        dim_in: usize,
        dim_out: usize,
        cfg: &ToleranceConfig,
        tp_tol: f64,
    ) -> Result<Self> {
        let ch = Self::from_choi_unchecked(choi, dim_in, dim_out)?;
        let tp = ch.trace_preservation_deviation();
        if tp > tp_tol {
            return Err(Error::Validation(format!("map is not trace preserving (deviation {tp:.3e})")));
        }
        if !ch.choi.is_hermitian(cfg.hermitian.max(1e-10)) {
            return Err(Error::Validation("Choi matrix is not Hermitian".into()));
        }
        let vals = herm_eigenvalues(&ch.choi)?;
        let lmin = vals.last().copied().unwrap_or(0.0);
        if lmin < -cfg.psd * vals[0].max(0.0) {
            return Err(Error::Validation(format!("map is not completely positive (eigenvalue {lmin:.3e})")));
        }
        Ok(ch)
    }

    /// Checks shapes only.
    pub fn from_choi_unchecked(choi: ComplexMatrix, dim_in: usize, dim_out: usize) -> Result<Self> {
        let n = dim_in * dim_out;
        if choi.rows() != n || choi.cols() != n {
            return Err(shape(format!(
                "Choi matrix {}x{} does not match {dim_out}x{dim_in} channel",
                choi.rows(),
                choi.cols()
            )));
        }
        let choi = choi.with_dims(vec![dim_out, dim_in])?;
        Ok(Self { choi, dim_in, dim_out })
    }

    pub fn identity(d: usize) -> Self {
        Self { choi: max_entangled(d).projector(), dim_in: d, dim_out: d }
    }

    /// `rho -> U rho U^dagger`.
    pub fn unitary(u: &ComplexMatrix) -> Result<Self> {
        if !u.is_square() {
            return Err(shape("unitary channel needs a square matrix"));
        }
        let d = u.rows();
        let phi = max_entangled(d);
        let mut v = vec![C64::new(0.0, 0.0); d * d];
        let amp = phi.amplitudes();
        for b in 0..d {
            for a in 0..d {
                v[b * d + a] = (0..d).map(|k| u[(b, k)] * amp[k * d + a]).sum();
            }
        }
        Self::from_choi_unchecked(ComplexMatrix::projector(&v), d, d)
    }

    /// `rho -> tr(rho) I / d_out`.
    pub fn completely_depolarizing(dim_in: usize, dim_out: usize) -> Self {
        let n = dim_in * dim_out;
        let choi = ComplexMatrix::identity(n).scale_real(1.0 / n as f64);
        Self::from_choi_unchecked(choi, dim_in, dim_out).expect("shape by construction")
    }

    pub fn choi(&self) -> &ComplexMatrix {
        &self.choi
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    /// `|| tr_out J - I/d_in ||_op`.
    pub fn trace_preservation_deviation(&self) -> f64 {
        let marg = partial_trace(&self.choi, &[self.dim_out, self.dim_in], &[1]).expect("dims set").clear_dims();
        let target = ComplexMatrix::identity(self.dim_in).scale_real(1.0 / self.dim_in as f64);
        op_norm(&(&marg - &target))
    }

    /// `Ω(X)[b,b'] = d_in sum_{a,a'} J[(b,a),(b',a')] X[a,a']` for any operator `X`.
    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        let (di, dout) = (self.dim_in, self.dim_out);
        if x.rows() != di || x.cols() != di {
            return Err(shape(format!("channel on dimension {di} applied to {}x{}", x.rows(), x.cols())));
        }
        let n = di * dout;
        let scale = di as f64;
        let j = self.choi.data();
        Ok(ComplexMatrix::from_fn(dout, dout, |b, bp| {
            let mut acc = C64::new(0.0, 0.0);
            for a in 0..di {
                let row = &j[(b * di + a) * n + bp * di..][..di];
                for (ap, &jv) in row.iter().enumerate() {
                    acc += jv * x[(a, ap)];
                }
            }
            acc * scale
        }))
    }

    /// Heisenberg-picture map: `tr(Y Ω(X)) = tr(Ω†(Y) X)`.
    pub fn adjoint_apply(&self, y: &ComplexMatrix) -> Result<ComplexMatrix> {
        let (di, dout) = (self.dim_in, self.dim_out);
        if y.rows() != dout || y.cols() != dout {
            return Err(shape(format!("adjoint channel on dimension {dout} applied to {}x{}", y.rows(), y.cols())));
        }
        let scale = di as f64;
        let j = &self.choi;
        Ok(ComplexMatrix::from_fn(di, di, |ap, a| {
            let mut acc = C64::new(0.0, 0.0);
            for b in 0..dout {
                for bp in 0..dout {
                    acc += y[(bp, b)] * j[(b * di + a, bp * di + ap)];
                }
            }
            acc * scale
        }))
    }

    /// `self ∘ first`.
    pub fn compose(&self, first: &QuantumChannel) -> Result<QuantumChannel> {
        if first.dim_out != self.dim_in {
            return Err(shape(format!("cannot compose: {} outputs into {} inputs", first.dim_out, self.dim_in)));
        }
        let (da, dm, dc) = (first.dim_in, first.dim_out, self.dim_out);
        // G[(c,c'),(b,b')] = J_self[(c,b),(c',b')], F[(b,b'),(a,a')] = J_first[(b,a),(b',a')]
        let g = ComplexMatrix::from_fn(dc * dc, dm * dm, |r, s| {
            let (c, cp, b, bp) = (r / dc, r % dc, s / dm, s % dm);
            self.choi[(c * dm + b, cp * dm + bp)]
        });
        let f = ComplexMatrix::from_fn(dm * dm, da * da, |r, s| {
            let (b, bp, a, ap) = (r / dm, r % dm, s / da, s % da);
            first.choi[(b * da + a, bp * da + ap)]
        });
        let gf = matmul(&g, &f);
        let choi = ComplexMatrix::from_fn(dc * da, dc * da, |r, s| {
            let (c, a, cp, ap) = (r / da, r % da, s / da, s % da);
            gf[(c * dc + cp, a * da + ap)] * dm as f64
        });
        Self::from_choi_unchecked(choi, da, dc)
    }

    /// Kraus operators from the Choi spectrum (diagnostic only).
    pub fn kraus_operators(&self) -> Result<Vec<ComplexMatrix>> {
        let eig = herm_eig(&self.choi)?;
        let cutoff = ToleranceConfig::default().rank_cutoff * eig.lambda_max();
        let (di, dout) = (self.dim_in, self.dim_out);
        Ok(eig
            .eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &l)| l > cutoff)
            .map(|(k, &l)| {
                let s = (di as f64 * l).sqrt();
                ComplexMatrix::from_fn(dout, di, |b, a| eig.eigenvectors[(b * di + a, k)] * s)
            })
            .collect())
    }
}

/// Choi matrix of a linear map given operationally, checked to be CPTP.
pub fn choi_of(map: impl Fn(&ComplexMatrix) -> ComplexMatrix, dim_in: usize) -> Result<QuantumChannel> {
    let mut blocks = Vec::with_capacity(dim_in * dim_in);
    for a in 0..dim_in {
        for ap in 0..dim_in {
            let mut e = ComplexMatrix::zeros(dim_in, dim_in);
            e[(a, ap)] = C64::new(1.0, 0.0);
            blocks.push(map(&e));
        }
    }
    let dout = blocks[0].rows();
    if blocks.iter().any(|b| b.rows() != dout || b.cols() != dout) {
        return Err(shape("map outputs must be square of a fixed size"));
    }
    let scale = 1.0 / dim_in as f64;
    let choi = ComplexMatrix::from_fn(dout * dim_in, dout * dim_in, |r, s| {
        let (b, a, bp, ap) = (r / dim_in, r % dim_in, s / dim_in, s % dim_in);
        blocks[a * dim_in + ap][(b, bp)] * scale
    });
    let cfg = ToleranceConfig::default();
    QuantumChannel::from_choi_with(choi, dim_in, dout, &cfg, cfg.choi_validation)
}

/// `<Φ| J |Φ>`.
pub fn ent_fidelity(ch: &QuantumChannel) -> Result<f64> {
    if ch.dim_in != ch.dim_out {
        return Err(shape(format!(
            "entanglement fidelity needs equal dimensions, got {} -> {}",
            ch.dim_in, ch.dim_out
        )));
    }
    let d = ch.dim_in;
    let mut acc = 0.0;
    for a in 0..d {
        for b in 0..d {
            acc += ch.choi[(a * d + a, b * d + b)].re;
        }
    }
    Ok((acc / d as f64).clamp(0.0, 1.0))
}

pub fn apply_channel(ch: &QuantumChannel, rho: &DensityOperator) -> Result<DensityOperator> {
    let out = ch.apply(rho.matrix())?.hermitian_part();
    let tr = out.trace().re;
    if (tr - 1.0).abs() > 1e-9 {
        return Err(Error::Numerical(format!("channel output has trace {tr}")));
    }
    Ok(DensityOperator::from_matrix_unchecked(out))
}

/// Choi-matrix distance between two channels.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct ChoiDistance {
    /// `½ ||J(a) - J(b)||_1`.
    pub half_trace_distance: f64,
    /// `2 d_in ||J(a) - J(b)||_1`, an upper bound on the diamond distance.
    pub diamond_upper: f64,
}

pub fn choi_trace_distance(a: &QuantumChannel, b: &QuantumChannel) -> Result<ChoiDistance> {
    if a.dim_in != b.dim_in || a.dim_out != b.dim_out {
        return Err(shape("channels have different dimensions"));
    }
    let t = trace_norm(&(&a.choi - &b.choi));
    Ok(ChoiDistance { half_trace_distance: 0.5 * t, diamond_upper: 2.0 * a.dim_in as f64 * t })
}
