//! Alternating optimization of guessing strategies. Each step maximizes the
//! success probability exactly over one component with the others fixed, so
//! the value never decreases.

use rayon::prelude::*;

use super::{attack_success, contract_second, AttackResult, AttackStrategy, Evaluator, GuessingInstance};
use crate::error::{domain, Error, Result};
use crate::linalg::{herm_eig, ComplexMatrix, C64};
use crate::qcore::{DensityOperator, Povm, PureState};
use crate::random::{haar_state, random_povm};
use crate::rng::RngStream;

#[derive(Clone, Debug)]
pub struct SeesawRun {
    pub strategy: AttackStrategy,
    pub result: AttackResult,
    /// Success probability after each full sweep, starting with the initial point.
    pub history: Vec<f64>,
}

/// Best split of `G = E_1 + E_2` for scores `S_1, S_2`:
/// `E_1 = G^{1/2} P_+ G^{1/2}` with `P_+` the positive part of `G^{1/2}(S_1 - S_2)G^{1/2}`.
fn split_pair(g: &ComplexMatrix, s1: &ComplexMatrix, s2: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    if g.rows() == 1 {
        let zero = ComplexMatrix::zeros(1, 1);
        return Ok(if s1[(0, 0)].re > s2[(0, 0)].re { (g.clone(), zero) } else { (zero, g.clone()) });
    }
    // clamps rounding-level negative eigenvalues of G
    let root = herm_eig(&g.hermitian_part())?.reconstruct_with(|l| l.max(0.0).sqrt());
    let diff = (&(&root * &(s1 - s2)) * &root).hermitian_part();
    let eig = herm_eig(&diff)?;
    let n = g.rows();
    let mut p = ComplexMatrix::zeros(n, n);
    for (k, &l) in eig.eigenvalues.iter().enumerate() {
        if l > 0.0 {
            let v = eig.vector(k);
            p += &ComplexMatrix::projector(&v);
        }
    }
    let e1 = (&(&root * &p) * &root).hermitian_part();
    let e2 = (g - &e1).hermitian_part();
    Ok((e1, e2))
}

/// Pairwise improvement of a POVM for linear objective `sum_k tr(E_k S_k)`.
fn improve_povm(povm: &Povm, scores: &[ComplexMatrix]) -> Result<Povm> {
    let mut els: Vec<ComplexMatrix> = povm.elements().iter().map(|e| e.clone().clear_dims()).collect();
    for i in 0..els.len() {
        for j in i + 1..els.len() {
            let g = &els[i] + &els[j];
            let (a, b) = split_pair(&g, &scores[i], &scores[j])?;
            els[i] = a;
            els[j] = b;
        }
    }
    Povm::from_elements_unchecked(els, povm.labels().to_vec())
}

fn rank_one(v: &[C64]) -> DensityOperator {
    DensityOperator::from_matrix_unchecked(ComplexMatrix::projector(v))
}

fn random_start(inst: &GuessingInstance, da: usize, db: usize, rng: &mut RngStream) -> AttackStrategy {
    let d = inst.d();
    let eta = haar_state(vec![da * db], rng);
    let alice = (0..inst.bases_used()).map(|_| random_povm(da, d, rng)).collect();
    let bob = random_povm(d * db, d, rng);
    AttackStrategy { dim_a: da, dim_b: db, eta: rank_one(eta.amplitudes()), alice, bob, g: vec![vec![0; d]; d] }
}

fn best_g(ev: &Evaluator, strat: &mut AttackStrategy) {
    let d = ev.inst.d();
    for alpha in 0..strat.alice_outcomes() {
        for beta in 0..strat.bob_outcomes() {
            let mut best = (f64::NEG_INFINITY, 0);
            for x in 0..d {
                let v: f64 =
                    (0..ev.inst.bases_used()).map(|a| ev.zs[a][x][beta].trace_product(&ev.taus[a][alpha]).re).sum();
                if v > best.0 + 1e-15 {
                    best = (v, x);
                }
            }
            strat.g[alpha][beta] = best.1;
        }
    }
}

/// `Z^{a,α} = sum_β zs[a][g(α,β)][β]`.
fn alice_effect(ev: &Evaluator, strat: &AttackStrategy, a: usize, alpha: usize) -> ComplexMatrix {
    let db = strat.dim_b;
    let mut z = ComplexMatrix::zeros(db, db);
    for (beta, &x) in strat.g[alpha].iter().enumerate() {
        z += &ev.zs[a][x][beta];
    }
    z
}

fn sweep(ev: &mut Evaluator, strat: &mut AttackStrategy) -> Result<()> {
    let (d, k, da, db) = (ev.inst.d(), ev.inst.bases_used(), strat.dim_a, strat.dim_b);
    best_g(ev, strat);
    // Alice, one POVM per a
    let eta = strat.eta.matrix().clone().clear_dims();
    for a in 0..k {
        let scores: Vec<ComplexMatrix> = (0..strat.alice_outcomes())
            .map(|alpha| contract_second(&eta, &alice_effect(ev, strat, a, alpha), da))
            .collect();
        strat.alice[a] = improve_povm(&strat.alice[a], &scores)?;
    }
    ev.update_taus(strat);
    // Bob: T^β = sum_{a,α} |e^a_{g(α,β)}><.| ⊗ tau^{a,α}
    let scores: Vec<ComplexMatrix> = (0..strat.bob_outcomes())
        .map(|beta| {
            let mut t = ComplexMatrix::zeros(d * db, d * db);
            for a in 0..k {
                for alpha in 0..strat.alice_outcomes() {
                    let e = ev.inst.vector(a, strat.g[alpha][beta]);
                    let tau = &ev.taus[a][alpha];
                    for j in 0..d {
                        for jp in 0..d {
                            let w = e[j] * e[jp].conj();
                            for b in 0..db {
                                for bp in 0..db {
                                    t[(j * db + b, jp * db + bp)] += w * tau[(b, bp)];
                                }
                            }
                        }
                    }
                }
            }
            t
        })
        .collect();
    strat.bob = improve_povm(&strat.bob, &scores)?;
    ev.update_zs(strat);
    // shared state: top eigenvector of H = sum_{a,α} E^{a,α} ⊗ Z^{a,α}
    let mut h = ComplexMatrix::zeros(da * db, da * db);
    for a in 0..k {
        for alpha in 0..strat.alice_outcomes() {
            let e = strat.alice[a].element(alpha);
            let z = alice_effect(ev, strat, a, alpha);
            h += &crate::linalg::kron(e, &z)?.clear_dims();
        }
    }
    let eig = herm_eig(&h.hermitian_part())?;
    strat.eta = rank_one(&PureState::normalized(eig.vector(0), vec![da * db])?.into_amplitudes());
    ev.update_taus(strat);
    Ok(())
}

/// One see-saw run from a random start; stops after `iters` sweeps or when a
/// sweep gains less than `1e-12`.
pub fn seesaw_optimize(
    inst: &GuessingInstance,
    dim_a: usize,
    dim_b: usize,
    iters: usize,
    rng: &mut RngStream,
) -> Result<SeesawRun> {
    if iters == 0 || dim_a == 0 || dim_b == 0 {
        return Err(domain("see-saw needs iters >= 1 and nonzero register dimensions"));
    }
    let mut strat = random_start(inst, dim_a, dim_b, rng);
    let mut ev = Evaluator::new(inst, &strat);
    best_g(&ev, &mut strat);
    let mut history = vec![ev.success(&strat)];
    let mut done = 0;
    for _ in 0..iters {
        sweep(&mut ev, &mut strat)?;
        let p = ev.success(&strat);
        let prev = *history.last().expect("nonempty");
        if p < prev - 1e-9 {
            return Err(Error::Numerical(format!("see-saw sweep decreased success from {prev} to {p}")));
        }
        history.push(p);
        done += 1;
        if p - prev < 1e-12 {
            break;
        }
    }
    let mut result = attack_success(inst, &strat)?;
    result.iterations = Some(done);
    Ok(SeesawRun { strategy: strat, result, history })
}

/// Best of `restarts` independent runs on child streams of `rng`.
pub fn seesaw_best(
    inst: &GuessingInstance,
    dim_a: usize,
    dim_b: usize,
    iters: usize,
    restarts: usize,
    rng: &RngStream,
) -> Result<SeesawRun> {
    let runs: Vec<SeesawRun> = (0..restarts.max(1))
        .into_par_iter()
        .map(|r| seesaw_optimize(inst, dim_a, dim_b, iters, &mut rng.split_named("restart", r as u64)))
        .collect::<Result<_>>()?;
    Ok(runs.into_iter().max_by(|a, b| a.result.p_succ.total_cmp(&b.result.p_succ)).expect("at least one run"))
}
