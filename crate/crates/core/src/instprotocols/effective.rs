//! Exact POVM and channel realized by the protocols.
//!
//! Bob's teleportation outcome `t` is uniform and his correction is exact, so
//! both protocols reduce to the port channel `E` twirled by `P_t = I ⊗ sigma_t`:
//! `M_γ = 4^-n sum_t P_t E†(P_t O_γ P_t) P_t` and
//! `E_U = Ad_U ∘ 4^-n sum_t Ad_{P_t} ∘ E ∘ Ad_{P_t}`.

use super::{bob_paulis, port_setup, InstConfig};
use crate::error::{shape, Result};
use crate::linalg::{trace_norm, ComplexMatrix};
use crate::qcore::{Povm, QuantumChannel};

/// POVM realized by the measurement protocol on top of a given port channel.
pub fn protocol_povm(port_channel: &QuantumChannel, n: usize, target: &Povm) -> Result<Povm> {
    let paulis = bob_paulis(n);
    let d = paulis[0].rows();
    if port_channel.dim_in() != d || port_channel.dim_out() != d || target.dim() != d {
        return Err(shape(format!("protocol on {n} qubits per side needs dimension {d}")));
    }
    let w = 1.0 / paulis.len() as f64;
    let mut elements = Vec::with_capacity(target.len());
    for o in target.elements() {
        let o = o.clone().clear_dims();
        let mut m = ComplexMatrix::zeros(d, d);
        for p in &paulis {
            let pulled = port_channel.adjoint_apply(&(&(p * &o) * p))?;
            m += &(&(p * &pulled) * p);
        }
        elements.push(m.scale_real(w).hermitian_part());
    }
    Povm::new(elements, target.labels().to_vec())
}

/// Channel realized by the unitary protocol on top of a given port channel.
pub fn protocol_channel(port_channel: &QuantumChannel, n: usize, u: &ComplexMatrix) -> Result<QuantumChannel> {
    let paulis = bob_paulis(n);
    let d = paulis[0].rows();
    if port_channel.dim_in() != d || port_channel.dim_out() != d || u.rows() != d {
        return Err(shape(format!("protocol on {n} qubits per side needs dimension {d}")));
    }
    let mut choi = ComplexMatrix::zeros(d * d, d * d);
    for p in &paulis {
        let ad = QuantumChannel::unitary(p)?;
        let term = ad.compose(&port_channel.compose(&ad)?)?;
        choi += &term.choi().clone().clear_dims();
    }
    let twirled =
        QuantumChannel::from_choi_unchecked(choi.scale_real(1.0 / paulis.len() as f64).hermitian_part(), d, d)?;
    QuantumChannel::unitary(u)?.compose(&twirled)
}

/// Exact POVM of the measurement protocol with the PGM port measurement.
pub fn effective_povm(cfg: &InstConfig) -> Result<Povm> {
    let target = cfg.povm()?;
    cfg.check_effective_size()?;
    let setup = port_setup(cfg.local_dim(), cfg.ports, cfg.max_dim)?;
    protocol_povm(&setup.channel, cfg.n, target)
}

/// Exact channel of the unitary protocol with the PGM port measurement.
pub fn effective_channel(cfg: &InstConfig) -> Result<QuantumChannel> {
    let u = cfg.unitary()?;
    cfg.check_effective_size()?;
    let setup = port_setup(cfg.local_dim(), cfg.ports, cfg.max_dim)?;
    protocol_channel(&setup.channel, cfg.n, u)
}

/// `½ ||J(a) - J(b)||_1` for the measure-and-record channels
/// `rho -> sum_γ tr(a_γ rho) |γ><γ|`, i.e. `(1/2d) sum_γ ||a_γ - b_γ||_1`.
pub fn povm_choi_distance(a: &Povm, b: &Povm) -> Result<f64> {
    if a.len() != b.len() || a.dim() != b.dim() {
        return Err(shape("POVMs differ in outcome count or dimension"));
    }
    let total: f64 = a
        .elements()
        .iter()
        .zip(b.elements())
        .map(|(x, y)| trace_norm(&(&x.clone().clear_dims() - &y.clone().clear_dims())))
        .sum();
    Ok(total / (2.0 * a.dim() as f64))
}
