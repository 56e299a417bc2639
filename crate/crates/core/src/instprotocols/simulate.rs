//! Monte-Carlo runs of both protocols.
//!
//! The joint operators `rho^{t,i}` on Bob's ports (trace `p(t, i)`) are
//! computed once per configuration; each run then samples the outcomes in the
//! chosen order from a precomputed tree of conditional probabilities.

use rayon::prelude::*;
use serde::Serialize;

use super::{bob_paulis, ebits_measurement, ebits_unitary, port_setup, InstConfig};
use crate::error::{shape, Error, Result};
use crate::linalg::{herm_eig, matmul, partial_trace, permute_state, ComplexMatrix, C64};
use crate::qcore::{
    bell_state, max_entangled, pauli_digits, pauli_string, teleport_branches, teleport_measure, DensityOperator,
    PostState, Povm, PureState,
};
use crate::rng::RngStream;

/// Largest number of leaves over all sampling trees.
const TREE_LEAF_LIMIT: usize = 1 << 22;

/// Order in which the parties' local steps are executed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum StepOrder {
    /// Bob teleports, Alice measures the ports, Bob measures each port.
    Protocol,
    /// Alice measures the ports on the full statevector before Bob acts.
    AliceFirst,
    /// Bob teleports and measures every port before Alice measures.
    BobFirst,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunTranscript {
    /// Base-4 digits of Bob's teleportation outcome `t`.
    pub bob_teleport_outcome: Vec<u8>,
    /// Port chosen by Alice, `1..=N`.
    pub alice_port_index: usize,
    /// Outcome index on every port: `γ_j` or the teleportation outcome `v_j`.
    pub port_outcomes: Vec<usize>,
    /// `γ_i`, the outcome reported for the chosen port.
    pub charlie_output: Option<usize>,
    pub charlie_label: Option<String>,
    /// Output state on `A''' B` in unitary mode.
    #[serde(skip)]
    pub final_state: Option<DensityOperator>,
    /// `<UΨ| rho_out |UΨ>` in unitary mode.
    pub fidelity: Option<f64>,
    pub ebits_consumed: usize,
}

/// `psi ⊗ |Φ>^n` with pairs `(A'_k, B'_k)`, all subsystems qubits.
fn with_bob_pairs(psi: &PureState, n: usize) -> Result<PureState> {
    if psi.dim() != 1 << (2 * n) {
        return Err(shape(format!("input has dimension {} but 2n qubits need {}", psi.dim(), 1 << (2 * n))));
    }
    let mut s = PureState::new(psi.amplitudes().to_vec(), vec![2; 2 * n])?;
    for _ in 0..n {
        s = s.tensor(&max_entangled(2));
    }
    Ok(s)
}

/// Data qubits `B_k` and EPR halves `B'_k` of [`with_bob_pairs`].
fn bob_teleport_indices(n: usize) -> (Vec<usize>, Vec<usize>) {
    ((n..2 * n).collect(), (0..n).map(|k| 2 * n + 2 * k + 1).collect())
}

/// `rho^{t,i}[β,β'] = D^-N sum_{a,a'} φ[a] conj φ[a'] E^i[(a',β'),(a,β)]` for
/// Alice's register `A A'` in the unnormalized state `φ` and the ports in
/// `|Φ_D>^N`.
fn branch_from_residual(phi: &[C64], e: &ComplexMatrix, d: usize, block: usize) -> ComplexMatrix {
    let scale = 1.0 / block as f64;
    let w: Vec<C64> = (0..d * d).map(|k| phi[k / d] * phi[k % d].conj()).collect();
    ComplexMatrix::from_fn(block, block, |b, bp| {
        let mut acc = C64::new(0.0, 0.0);
        for a in 0..d {
            for ap in 0..d {
                acc += w[a * d + ap] * e[(ap * block + bp, a * block + b)];
            }
        }
        acc * scale
    })
    .hermitian_part()
}

/// Joint operators `[t][i]` after Bob's teleportation and Alice's port
/// measurement, via the teleportation branches of `psi ⊗ |Φ>^n`.
fn branches_protocol(psi: &PureState, n: usize, ports: usize, povm: &Povm) -> Result<Vec<Vec<ComplexMatrix>>> {
    let d = 1usize << (2 * n);
    let block = d.pow(ports as u32);
    let (data, epr) = bob_teleport_indices(n);
    let (residuals, _) = teleport_branches(&with_bob_pairs(psi, n)?, &data, &epr)?;
    Ok(residuals
        .iter()
        .map(|phi| povm.elements().iter().map(|e| branch_from_residual(phi, e, d, block)).collect())
        .collect())
}

/// Same operators from the full statevector on
/// `(A A' A''_1..A''_N) x (B B' B''_1..B''_N)`, with Alice's port
/// measurement applied first and Bob's Bell projections after.
fn branches_alice_first(psi: &PureState, n: usize, ports: usize, povm: &Povm) -> Result<Vec<Vec<ComplexMatrix>>> {
    let d = 1usize << (2 * n);
    let mut s = with_bob_pairs(psi, n)?;
    for _ in 0..ports {
        s = s.tensor(&max_entangled(d));
    }
    // A: 0..n, B: n..2n, A'_k: 2n+2k, B'_k: 2n+2k+1, A''_j: 4n+2j, B''_j: 4n+2j+1
    let mut perm: Vec<usize> = (0..n).collect();
    perm.extend((0..n).map(|k| 2 * n + 2 * k));
    perm.extend((0..ports).map(|j| 4 * n + 2 * j));
    perm.extend(n..2 * n);
    perm.extend((0..n).map(|k| 2 * n + 2 * k + 1));
    perm.extend((0..ports).map(|j| 4 * n + 2 * j + 1));
    let v = permute_state(s.amplitudes(), s.dims(), &perm)?;
    let side = d.pow(ports as u32 + 1);
    let x = ComplexMatrix::from_vec(side, side, v)?;
    let xt = x.transpose();
    let xbar = x.conj();
    let block = side / d;
    let h = 1usize << n;
    let mut out = vec![Vec::with_capacity(ports); d];
    for e in povm.elements() {
        // R[β,β'] = sum_{α,α'} E[α',α] X[α,β] conj X[α',β']
        let r = matmul(&xt, &matmul(&e.transpose(), &xbar));
        for (t, slot) in out.iter_mut().enumerate() {
            let digits = pauli_digits(t, n);
            // Bell vector on (B, B') with pairs (B_k, B'_k)
            let bell: Vec<C64> = (0..d)
                .map(|s| {
                    let (hb, hp) = (s / h, s % h);
                    (0..n).fold(C64::new(1.0, 0.0), |acc, k| {
                        let shift = n - 1 - k;
                        let idx = 2 * ((hb >> shift) & 1) + ((hp >> shift) & 1);
                        acc * bell_state(digits[k])[idx]
                    })
                })
                .collect();
            let rho = ComplexMatrix::from_fn(block, block, |b, bp| {
                let mut acc = C64::new(0.0, 0.0);
                for (s, bs) in bell.iter().enumerate() {
                    for (sp, bsp) in bell.iter().enumerate() {
                        acc += bs.conj() * r[(s * block + b, sp * block + bp)] * bsp;
                    }
                }
                acc
            });
            slot.push(rho.hermitian_part());
        }
    }
    Ok(out)
}

/// `tr_1[(O ⊗ I) rho]` for `rho` on `C^d ⊗ C^r`.
fn measure_first(rho: &ComplexMatrix, o: &ComplexMatrix, d: usize) -> ComplexMatrix {
    let r = rho.rows() / d;
    ComplexMatrix::from_fn(r, r, |x, y| {
        let mut acc = C64::new(0.0, 0.0);
        for a in 0..d {
            for ap in 0..d {
                acc += o[(ap, a)] * rho[(a * r + x, ap * r + y)];
            }
        }
        acc
    })
}

/// Conditional probabilities of the next port outcome; leaves carry the
/// weights of the still undetermined Alice outcomes.
#[derive(Clone, Debug)]
struct PortTree {
    probs: Vec<f64>,
    children: Vec<PortTree>,
    alice: Vec<f64>,
}

impl PortTree {
    fn build(ops: Vec<ComplexMatrix>, obs: &[ComplexMatrix], d: usize) -> PortTree {
        if ops[0].rows() == 1 {
            let alice = ops.iter().map(|o| o[(0, 0)].re.max(0.0)).collect();
            return PortTree { probs: Vec::new(), children: Vec::new(), alice };
        }
        let total: f64 = ops.iter().map(|o| o.trace().re).sum();
        let mut probs = Vec::with_capacity(obs.len());
        let mut children = Vec::with_capacity(obs.len());
        for o in obs {
            let next: Vec<ComplexMatrix> = ops.iter().map(|r| measure_first(r, o, d)).collect();
            let w: f64 = next.iter().map(|r| r.trace().re).sum();
            if w > 1e-14 * total {
                probs.push(w);
                children.push(PortTree::build(next, obs, d));
            } else {
                probs.push(0.0);
                children.push(PortTree { probs: Vec::new(), children: Vec::new(), alice: Vec::new() });
            }
        }
        let s: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= s);
        PortTree { probs, children, alice: Vec::new() }
    }

    /// Samples all port outcomes; returns them with the leaf.
    fn walk(&self, rng: &mut RngStream) -> (Vec<usize>, &PortTree) {
        let mut node = self;
        let mut out = Vec::new();
        while !node.children.is_empty() {
            let g = rng.weighted_index(&node.probs, 1.0);
            out.push(g);
            node = &node.children[g];
        }
        (out, node)
    }
}

fn sample(weights: &[f64], rng: &mut RngStream) -> usize {
    let total: f64 = weights.iter().sum();
    rng.weighted_index(weights, total)
}

/// Precomputed sampler for the measurement protocol.
pub struct MeasurementSimulator {
    n: usize,
    ports: usize,
    order: StepOrder,
    labels: Vec<String>,
    /// `p(t, i)` at index `t * N + i`.
    joint: Vec<f64>,
    /// Per `(t, i)` for `Protocol` and `AliceFirst`, per `t` for `BobFirst`.
    trees: Vec<PortTree>,
}

impl MeasurementSimulator {
    pub fn new(cfg: &InstConfig, psi: &PureState, order: StepOrder) -> Result<Self> {
        let target = cfg.povm()?;
        cfg.check_statevector_size()?;
        let (n, ports, d) = (cfg.n, cfg.ports, cfg.local_dim());
        let leaves = (target.len() as f64).powi(ports as i32) * d as f64 * ports as f64;
        if leaves > TREE_LEAF_LIMIT as f64 {
            return Err(Error::SizeLimit { dim: leaves.min(usize::MAX as f64) as usize, limit: TREE_LEAF_LIMIT });
        }
        let setup = port_setup(d, ports, cfg.max_dim)?;
        let branches = match order {
            StepOrder::AliceFirst => branches_alice_first(psi, n, ports, &setup.povm)?,
            _ => branches_protocol(psi, n, ports, &setup.povm)?,
        };
        let joint: Vec<f64> = branches.iter().flatten().map(|r| r.trace().re.max(0.0)).collect();
        let paulis = bob_paulis(n);
        let obs_for = |t: usize| -> Vec<ComplexMatrix> {
            let p = &paulis[t];
            target.elements().iter().map(|o| (&(p * &o.clone().clear_dims()) * p).hermitian_part()).collect()
        };
        let trees = match order {
            StepOrder::BobFirst => {
                branches.into_par_iter().enumerate().map(|(t, ops)| PortTree::build(ops, &obs_for(t), d)).collect()
            }
            _ => branches
                .into_par_iter()
                .enumerate()
                .flat_map_iter(|(t, ops)| {
                    let obs = obs_for(t);
                    ops.into_iter().map(move |r| PortTree::build(vec![r], &obs, d))
                })
                .collect(),
        };
        Ok(Self { n, ports, order, labels: target.labels().to_vec(), joint, trees })
    }

    pub fn order(&self) -> StepOrder {
        self.order
    }

    /// Exact `p(t, i)`.
    pub fn joint_probabilities(&self) -> &[f64] {
        &self.joint
    }

    pub fn run(&self, rng: &mut RngStream) -> RunTranscript {
        let np = self.ports;
        let (t, i, outcomes) = match self.order {
            StepOrder::Protocol => {
                let k = sample(&self.joint, rng);
                let (g, _) = self.trees[k].walk(rng);
                (k / np, k % np, g)
            }
            StepOrder::AliceFirst => {
                let p_i: Vec<f64> = (0..np).map(|i| self.joint.iter().skip(i).step_by(np).sum()).collect();
                let i = sample(&p_i, rng);
                let p_t: Vec<f64> = self.joint.iter().skip(i).step_by(np).copied().collect();
                let t = sample(&p_t, rng);
                let (g, _) = self.trees[t * np + i].walk(rng);
                (t, i, g)
            }
            StepOrder::BobFirst => {
                let p_t: Vec<f64> = self.joint.chunks(np).map(|c| c.iter().sum()).collect();
                let t = sample(&p_t, rng);
                let (g, leaf) = self.trees[t].walk(rng);
                (t, sample(&leaf.alice, rng), g)
            }
        };
        let out = outcomes[i];
        RunTranscript {
            bob_teleport_outcome: pauli_digits(t, self.n),
            alice_port_index: i + 1,
            port_outcomes: outcomes,
            charlie_output: Some(out),
            charlie_label: Some(self.labels[out].clone()),
            final_state: None,
            fidelity: None,
            ebits_consumed: ebits_measurement(self.n, self.ports),
        }
    }

    /// Independent runs on per-trial child streams of `rng`.
    pub fn run_many(&self, trials: usize, rng: &RngStream) -> Vec<RunTranscript> {
        (0..trials).into_par_iter().map(|k| self.run(&mut rng.split(k as u64))).collect()
    }
}

/// One run of the measurement protocol in protocol order.
pub fn simulate_measurement_run(cfg: &InstConfig, psi: &PureState, rng: &mut RngStream) -> Result<RunTranscript> {
    Ok(MeasurementSimulator::new(cfg, psi, StepOrder::Protocol)?.run(rng))
}

/// Precomputed sampler for the unitary protocol.
pub struct UnitarySimulator {
    n: usize,
    ports: usize,
    joint: Vec<f64>,
    /// Purification on `(port, R)` of `U P_t rho_i P_t U†` for each `(t, i)`.
    purified: Vec<Option<PureState>>,
    target: PureState,
}

impl UnitarySimulator {
    pub fn new(cfg: &InstConfig, psi: &PureState) -> Result<Self> {
        let u = cfg.unitary()?;
        cfg.check_statevector_size()?;
        let (n, ports, d) = (cfg.n, cfg.ports, cfg.local_dim());
        let setup = port_setup(d, ports, cfg.max_dim)?;
        let branches = branches_protocol(psi, n, ports, &setup.povm)?;
        let paulis = bob_paulis(n);
        let dims = vec![d; ports];
        let mut joint = Vec::with_capacity(d * ports);
        let mut purified = Vec::with_capacity(d * ports);
        for (t, ops) in branches.iter().enumerate() {
            let up = u * &paulis[t];
            for (i, r) in ops.iter().enumerate() {
                let w = r.trace().re.max(0.0);
                joint.push(w);
                if w <= 1e-14 {
                    purified.push(None);
                    continue;
                }
                let port = partial_trace(r, &dims, &[i])?.clear_dims();
                let rho = (&(&up * &port) * &up.adjoint()).scale_real(1.0 / w).hermitian_part();
                purified.push(Some(purify(&rho, n)?));
            }
        }
        let target = PureState::new(psi.amplitudes().to_vec(), vec![d])?.evolve(u)?;
        Ok(Self { n, ports, joint, purified, target })
    }

    pub fn run(&self, rng: &mut RngStream) -> Result<RunTranscript> {
        let n = self.n;
        let d = 1usize << (2 * n);
        let k = sample(&self.joint, rng);
        let (t, i) = (k / self.ports, k % self.ports);
        let chi = self.purified[k].as_ref().ok_or_else(|| Error::Numerical("sampled a null branch".into()))?;
        // (A-part, B-part, R) ⊗ |Φ>^n on pairs (B'''_k, A'''_k)
        let mut s = chi.clone();
        for _ in 0..n {
            s = s.tensor(&max_entangled(2));
        }
        let data: Vec<usize> = (0..n).collect();
        let epr: Vec<usize> = (0..n).map(|k| 2 * n + 1 + 2 * k).collect();
        let rec = teleport_measure(&s, &data, &epr, rng)?;
        let Some(PostState::Pure(rest)) = rec.post_state else {
            return Err(Error::Numerical("teleportation left no residual".into()));
        };
        // rest: B-part (n qubits), R, A'''_1..A'''_n
        let mut perm: Vec<usize> = (n + 1..2 * n + 1).collect();
        perm.extend(0..n);
        perm.push(n);
        let v = permute_state(rest.amplitudes(), rest.dims(), &perm)?;
        let fix = crate::linalg::kron(&pauli_string(&pauli_digits(rec.outcome, n)), &ComplexMatrix::identity(1 << n))?
            .clear_dims();
        let r = v.len() / d;
        // rho[x,y] = sum_e v[x,e] conj v[y,e], then Alice's correction
        let m = ComplexMatrix::from_vec(d, r, v)?;
        let rho = matmul(&m, &m.adjoint());
        let rho = (&(&fix * &rho) * &fix).hermitian_part();
        let fidelity = rho.sandwich(self.target.amplitudes(), self.target.amplitudes()).re;
        let mut port_outcomes: Vec<usize> = (0..self.ports).map(|_| rng.below(1 << (2 * n))).collect();
        port_outcomes[i] = rec.outcome;
        Ok(RunTranscript {
            bob_teleport_outcome: pauli_digits(t, n),
            alice_port_index: i + 1,
            port_outcomes,
            charlie_output: None,
            charlie_label: None,
            final_state: Some(DensityOperator::from_matrix_unchecked(rho.with_dims(vec![1 << n, 1 << n])?)),
            fidelity: Some(fidelity),
            ebits_consumed: ebits_unitary(n, self.ports),
        })
    }

    pub fn run_many(&self, trials: usize, rng: &RngStream) -> Result<Vec<RunTranscript>> {
        (0..trials).into_par_iter().map(|k| self.run(&mut rng.split(k as u64))).collect()
    }
}

/// `sum_k sqrt(λ_k) |v_k> |k>` on `(2n qubits, R)`.
fn purify(rho: &ComplexMatrix, n: usize) -> Result<PureState> {
    let eig = herm_eig(rho)?;
    let d = rho.rows();
    let mut amps = vec![C64::new(0.0, 0.0); d * d];
    for (k, &l) in eig.eigenvalues.iter().enumerate() {
        if l <= 0.0 {
            continue;
        }
        let s = l.sqrt();
        for x in 0..d {
            amps[x * d + k] = eig.eigenvectors[(x, k)] * s;
        }
    }
    let mut dims = vec![2; 2 * n];
    dims.push(d);
    PureState::normalized(amps, dims)
}

/// One run of the unitary protocol.
pub fn simulate_unitary_run(cfg: &InstConfig, psi: &PureState, rng: &mut RngStream) -> Result<RunTranscript> {
    UnitarySimulator::new(cfg, psi)?.run(rng)
}
