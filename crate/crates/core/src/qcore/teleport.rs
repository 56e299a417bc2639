use super::pauli::{pauli, pauli_digits};
use super::povm::{sample_index, MeasurementRecord, PostState};
use super::state::PureState;
use crate::error::{shape, Result};
use crate::linalg::{permute_state, ToleranceConfig, C64};
use crate::rng::RngStream;

/// Bell vector `(sigma_k ⊗ I)|Φ>` on (data, EPR half), entries `sigma_k[a][b] / sqrt 2`.
pub fn bell_state(k: u8) -> [C64; 4] {
    let s = pauli(k);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    [s[(0, 0)] * r, s[(0, 1)] * r, s[(1, 0)] * r, s[(1, 1)] * r]
}

/// All branches of a teleportation measurement: for each outcome index `k`
/// (base-4 digits `k_1..k_n`), its probability and the unnormalized residual
/// on the unmeasured subsystems, which keep their relative order.
pub fn teleport_branches(
    state: &PureState,
    qubit_indices: &[usize],
    epr_indices: &[usize],
) -> Result<(Vec<Vec<C64>>, Vec<usize>)> {
    let dims = state.dims();
    let n = qubit_indices.len();
    if epr_indices.len() != n {
        return Err(shape(format!("{n} data qubits but {} EPR halves", epr_indices.len())));
    }
    let mut measured = Vec::with_capacity(2 * n);
    for (&q, &e) in qubit_indices.iter().zip(epr_indices) {
        measured.push(q);
        measured.push(e);
    }
    for (pos, &m) in measured.iter().enumerate() {
        if m >= dims.len() {
            return Err(shape(format!("subsystem {m} out of range")));
        }
        if dims[m] != 2 {
            return Err(shape(format!("subsystem {m} has dimension {}, not a qubit", dims[m])));
        }
        if measured[..pos].contains(&m) {
            return Err(shape(format!("subsystem {m} addressed twice")));
        }
    }
    let rest: Vec<usize> = (0..dims.len()).filter(|k| !measured.contains(k)).collect();
    let mut perm = measured.clone();
    perm.extend_from_slice(&rest);
    let v = permute_state(state.amplitudes(), dims, &perm)?;
    let m = 1usize << (2 * n);
    let r = v.len() / m;
    let bells: Vec<[C64; 4]> = (0..4).map(bell_state).collect();
    let mut branches = Vec::with_capacity(m);
    for k in 0..m {
        let digits = pauli_digits(k, n);
        // conj of ⊗_j beta_{k_j}, in the (q1 e1 q2 e2 ...) ordering
        let mut bra = vec![C64::new(1.0, 0.0)];
        for &dgt in &digits {
            bra = bra.iter().flat_map(|a| bells[dgt as usize].iter().map(move |b| a * b.conj())).collect();
        }
        let mut out = vec![C64::new(0.0, 0.0); r];
        for (s, &w) in bra.iter().enumerate() {
            if w == C64::new(0.0, 0.0) {
                continue;
            }
            for (o, &x) in out.iter_mut().zip(&v[s * r..(s + 1) * r]) {
                *o += w * x;
            }
        }
        branches.push(out);
    }
    let rest_dims = rest.iter().map(|&k| dims[k]).collect();
    Ok((branches, rest_dims))
}

/// Bell-basis measurement of each (data qubit, EPR half) pair. Outcome
/// index encodes `k` in base 4 (first pair most significant); the residual
/// state is renormalized. For `|Ψ> ⊗ |Φ>^n` every `k` has probability
/// `4^-n` and the receiver holds `sigma_k |Ψ>`.
pub fn teleport_measure(
    state: &PureState,
    qubit_indices: &[usize],
    epr_indices: &[usize],
    rng: &mut RngStream,
) -> Result<MeasurementRecord> {
    let (branches, rest_dims) = teleport_branches(state, qubit_indices, epr_indices)?;
    let probs: Vec<f64> = branches.iter().map(|b| b.iter().map(|z| z.norm_sqr()).sum()).collect();
    let k = sample_index(&probs, ToleranceConfig::default().probability_floor, rng)?;
    let n = qubit_indices.len();
    let label = pauli_digits(k, n).iter().map(|d| d.to_string()).collect::<String>();
    let post = PureState::normalized(branches[k].clone(), rest_dims)?;
    Ok(MeasurementRecord { outcome: k, label, probability: probs[k], post_state: Some(PostState::Pure(post)) })
}
