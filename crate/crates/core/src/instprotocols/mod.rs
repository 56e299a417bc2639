//! Instantaneous non-local measurement and computation built on port-based
//! teleportation.
//!
//! Registers: the input `|Ψ>` lives on `A_1..A_n B_1..B_n`. Bob teleports `B`
//! to Alice through `n` EPR pairs `A'_k:B'_k` (outcome `t`), so Alice holds
//! `(I ⊗ sigma_t)|Ψ>` on `A A'`, a register of dimension `D = 4^n`. Alice
//! port-teleports it through `N` maximally entangled pairs `A''_j:B''_j` of
//! dimension `D` with the pretty-good measurement (outcome `i`). Bob undoes
//! `sigma_t` on every port and then measures `O` (measurement mode) or applies
//! `U` and teleports the `A`-part back through `n` more EPR pairs
//! (unitary mode).

mod effective;
mod simulate;
pub mod targets;

pub use effective::{effective_channel, effective_povm, povm_choi_distance, protocol_channel, protocol_povm};
pub use simulate::{
    simulate_measurement_run, simulate_unitary_run, MeasurementSimulator, RunTranscript, StepOrder, UnitarySimulator,
};

use serde::Serialize;

use crate::error::{domain, shape, Error, Result};
use crate::linalg::{ComplexMatrix, ToleranceConfig};
use crate::portbased::{eta_family_with_limit, pbt_channel, to_sender_ordering};
use crate::qcore::{pauli_digits, pauli_string, Povm, QuantumChannel};

/// Amplitude budget of the full statevector `4^n 4^n 16^(nN)`.
pub const STATEVECTOR_BUDGET: usize = 1 << 24;

/// What the protocol implements.
#[derive(Clone, Debug, PartialEq)]
pub enum Target {
    Measurement(Povm),
    Unitary(ComplexMatrix),
}

#[derive(Clone, Debug, PartialEq)]
pub struct InstConfig {
    /// Qubits per side.
    pub n: usize,
    /// Number of ports `N`.
    pub ports: usize,
    pub target: Target,
    pub seed: u64,
    /// Largest dense matrix dimension allowed.
    pub max_dim: usize,
}

impl InstConfig {
    pub fn new(n: usize, ports: usize, target: Target, seed: u64) -> Result<Self> {
        if n == 0 || ports == 0 {
            return Err(domain("need n >= 1 and N >= 1"));
        }
        let d = local_dim(n)?;
        let tol = ToleranceConfig::default();
        match &target {
            Target::Measurement(p) => {
                if p.dim() != d {
                    return Err(shape(format!("POVM on dimension {} but 2n qubits need {d}", p.dim())));
                }
            }
            Target::Unitary(u) => {
                if u.rows() != d || u.cols() != d {
                    return Err(shape(format!("unitary is {}x{} but 2n qubits need {d}", u.rows(), u.cols())));
                }
                let dev = (&u.adjoint() * u).clear_dims().max_abs_diff(&ComplexMatrix::identity(d));
                if dev > 1e-10 {
                    return Err(Error::Validation(format!("target is not unitary (deviation {dev:.3e})")));
                }
            }
        }
        Ok(Self { n, ports, target, seed, max_dim: tol.max_matrix_dim })
    }

    pub fn with_max_dim(mut self, max_dim: usize) -> Self {
        self.max_dim = max_dim;
        self
    }

    /// `D = 4^n`.
    pub fn local_dim(&self) -> usize {
        1 << (2 * self.n)
    }

    pub fn povm(&self) -> Result<&Povm> {
        match &self.target {
            Target::Measurement(p) => Ok(p),
            Target::Unitary(_) => Err(domain("configuration targets a unitary, not a POVM")),
        }
    }

    pub fn unitary(&self) -> Result<&ComplexMatrix> {
        match &self.target {
            Target::Unitary(u) => Ok(u),
            Target::Measurement(_) => Err(domain("configuration targets a POVM, not a unitary")),
        }
    }

    /// Dimension `D^(N+1)` of Alice's port measurement.
    pub fn port_measurement_dim(&self) -> Result<usize> {
        checked_pow(self.local_dim(), self.ports + 1)
    }

    /// Checks `D^(N+1) <= max_dim`.
    pub fn check_effective_size(&self) -> Result<()> {
        let dim = self.port_measurement_dim()?;
        if dim > self.max_dim {
            return Err(Error::SizeLimit { dim, limit: self.max_dim });
        }
        Ok(())
    }

    /// Checks the statevector budget and the port measurement size.
    pub fn check_statevector_size(&self) -> Result<()> {
        let amps = statevector_amplitudes(self.n, self.ports)?;
        if amps > STATEVECTOR_BUDGET {
            return Err(Error::SizeLimit { dim: amps, limit: STATEVECTOR_BUDGET });
        }
        self.check_effective_size()
    }
}

fn local_dim(n: usize) -> Result<usize> {
    checked_pow(4, n)
}

fn checked_pow(base: usize, exp: usize) -> Result<usize> {
    u32::try_from(exp)
        .ok()
        .and_then(|e| base.checked_pow(e))
        .ok_or(Error::SizeLimit { dim: usize::MAX, limit: usize::MAX })
}

/// `4^n 4^n 16^(nN)`.
pub fn statevector_amplitudes(n: usize, ports: usize) -> Result<usize> {
    let d = local_dim(n)?;
    let pairs = checked_pow(d * d, ports)?;
    (d * d).checked_mul(pairs).ok_or(Error::SizeLimit { dim: usize::MAX, limit: STATEVECTOR_BUDGET })
}

/// `I ⊗ sigma_t` on `A B`, for `t = 0..4^n`.
pub fn bob_paulis(n: usize) -> Vec<ComplexMatrix> {
    let id = ComplexMatrix::identity(1 << n);
    (0..1usize << (2 * n))
        .map(|t| crate::linalg::kron(&id, &pauli_string(&pauli_digits(t, n))).expect("small").clear_dims())
        .collect()
}

/// Port-teleportation pieces for local dimension `d`: the PGM on
/// `A A'_1..A'_N` and its channel.
pub(crate) struct PortSetup {
    pub povm: Povm,
    pub channel: QuantumChannel,
}

pub(crate) fn port_setup(d: usize, ports: usize, limit: usize) -> Result<PortSetup> {
    let fam = eta_family_with_limit(d, ports, limit)?;
    let povm = to_sender_ordering(fam.pgm()?, d, ports)?;
    let channel = pbt_channel(&fam, &povm)?;
    Ok(PortSetup { povm, channel })
}

/// Ebits used by the measurement protocol: `n(1 + 2N)`.
pub fn ebits_measurement(n: usize, ports: usize) -> usize {
    n * (1 + 2 * ports)
}

/// Ebits used by the unitary protocol: `n(1 + 3N)`.
pub fn ebits_unitary(n: usize, ports: usize) -> usize {
    n * (1 + 3 * ports)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResourceReport {
    pub n: usize,
    pub eps: f64,
    /// `2^(8n+4) / eps^2`.
    #[serde(rename = "N")]
    pub ports: f64,
    /// `n(1 + 2N)`.
    pub ebits_measurement: f64,
    /// `n(1 + 3N)`.
    pub ebits_unitary: f64,
    /// `ln(1/eps) 2^(4n)`.
    pub vaidman_rounds: f64,
    /// `log2` of the ebits of the recursive scheme run for `ceil(R)` rounds:
    /// `3n` in round one and `4n 4^n 16^(n(r-2))` in round `r >= 2`.
    pub vaidman_log2_ebits: f64,
}

pub fn resource_report(n: usize, eps: f64) -> Result<ResourceReport> {
    if n == 0 || !(eps > 0.0 && eps <= 2.0) {
        return Err(domain(format!("need n >= 1 and 0 < eps <= 2, got n = {n}, eps = {eps}")));
    }
    let nf = n as f64;
    let ports = 2f64.powf(8.0 * nf + 4.0) / (eps * eps);
    let rounds = (1.0 / eps).ln() * 2f64.powf(4.0 * nf);
    let r = rounds.ceil().max(1.0) as u64;
    let mut logs = vec![(3.0 * nf).log2()];
    for k in 2..=r {
        logs.push((4.0 * nf).log2() + 2.0 * nf + 4.0 * nf * (k - 2) as f64);
    }
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log2_ebits = top + logs.iter().map(|l| (l - top).exp2()).sum::<f64>().log2();
    Ok(ResourceReport {
        n,
        eps,
        ports,
        ebits_measurement: nf * (1.0 + 2.0 * ports),
        ebits_unitary: nf * (1.0 + 3.0 * ports),
        vaidman_rounds: rounds,
        vaidman_log2_ebits: log2_ebits,
    })
}
