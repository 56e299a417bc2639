//! Guessing game for the conditional-basis measurement: exact evaluation of
//! instantaneous strategies with shared entanglement, the `2 dim B'/sqrt d`
//! ceiling, a see-saw search for good attacks and the induced diamond-norm
//! separation.

mod seesaw;

pub use seesaw::{seesaw_best, seesaw_optimize, SeesawRun};

use serde::Serialize;

use crate::error::{domain, shape, Result};
use crate::linalg::{ComplexMatrix, C64};
use crate::mub::MubFamily;
use crate::qcore::{DensityOperator, Povm};

/// States `rho^x = (1/K) sum_{a<K} |a><a| ⊗ |e^a_x><e^a_x|` with uniform prior.
#[derive(Clone, Debug)]
pub struct GuessingInstance {
    d: usize,
    bases_used: usize,
    /// `vectors[a][x] = |e^a_x>`.
    vectors: Vec<Vec<Vec<C64>>>,
    ensemble: Vec<DensityOperator>,
}

pub fn build_ensemble(fam: &MubFamily, bases_used: usize) -> Result<GuessingInstance> {
    if bases_used == 0 || bases_used > fam.len() {
        return Err(domain(format!("{bases_used} bases requested from a family of {}", fam.len())));
    }
    let d = fam.d();
    let vectors: Vec<Vec<Vec<C64>>> = (0..bases_used).map(|a| (0..d).map(|x| fam.vector(a, x)).collect()).collect();
    let w = 1.0 / bases_used as f64;
    let n = bases_used * d;
    let ensemble = (0..d)
        .map(|x| {
            let mut m = ComplexMatrix::zeros(n, n);
            for (a, vs) in vectors.iter().enumerate() {
                let v = &vs[x];
                for r in 0..d {
                    for c in 0..d {
                        m[(a * d + r, a * d + c)] = v[r] * v[c].conj() * w;
                    }
                }
            }
            DensityOperator::from_matrix_unchecked(m.with_dims(vec![bases_used, d]).expect("dims"))
        })
        .collect();
    Ok(GuessingInstance { d, bases_used, vectors, ensemble })
}

impl GuessingInstance {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn bases_used(&self) -> usize {
        self.bases_used
    }

    pub fn ensemble(&self) -> &[DensityOperator] {
        &self.ensemble
    }

    pub fn vector(&self, a: usize, x: usize) -> &[C64] {
        &self.vectors[a][x]
    }

    /// `(1/d) sum_x rho^x`.
    pub fn average_state(&self) -> ComplexMatrix {
        let n = self.d * self.bases_used;
        let mut avg = ComplexMatrix::zeros(n, n);
        for r in &self.ensemble {
            avg += &r.matrix().clone().clear_dims();
        }
        avg.scale_real(1.0 / self.d as f64)
    }
}

/// Alice measures `A'` with a POVM chosen by her classical input `a`; Bob
/// measures `B B'`; the referee outputs `g(α, β)`.
#[derive(Clone, Debug)]
pub struct AttackStrategy {
    pub dim_a: usize,
    pub dim_b: usize,
    /// Shared state on `A' B'`.
    pub eta: DensityOperator,
    /// One POVM on `A'` per value of `a`, all with the same outcome count.
    pub alice: Vec<Povm>,
    /// POVM on `B B'`.
    pub bob: Povm,
    /// `g[α][β]`.
    pub g: Vec<Vec<usize>>,
}

fn trivial_eta() -> DensityOperator {
    DensityOperator::from_matrix_unchecked(ComplexMatrix::identity(1))
}

impl AttackStrategy {
    /// No entanglement; the referee always answers `x`.
    pub fn constant_guess(inst: &GuessingInstance, x: usize) -> Self {
        Self {
            dim_a: 1,
            dim_b: 1,
            eta: trivial_eta(),
            alice: vec![Povm::trivial(1); inst.bases_used],
            bob: Povm::trivial(inst.d),
            g: vec![vec![x]],
        }
    }

    /// No entanglement; Bob measures in basis `basis` and his outcome is the answer.
    pub fn bob_measures_basis(inst: &GuessingInstance, basis: usize) -> Result<Self> {
        let elements = (0..inst.d).map(|x| ComplexMatrix::projector(&inst.vectors[basis][x])).collect();
        Ok(Self {
            dim_a: 1,
            dim_b: 1,
            eta: trivial_eta(),
            alice: vec![Povm::trivial(1); inst.bases_used],
            bob: Povm::with_index_labels(elements)?,
            g: vec![(0..inst.d).collect()],
        })
    }

    pub fn alice_outcomes(&self) -> usize {
        self.alice[0].len()
    }

    pub fn bob_outcomes(&self) -> usize {
        self.bob.len()
    }

    pub fn check(&self, inst: &GuessingInstance) -> Result<()> {
        let (da, db) = (self.dim_a, self.dim_b);
        if self.eta.dim() != da * db {
            return Err(shape(format!("shared state has dimension {}, expected {}", self.eta.dim(), da * db)));
        }
        if self.alice.len() != inst.bases_used {
            return Err(shape(format!("{} Alice POVMs for {} inputs", self.alice.len(), inst.bases_used)));
        }
        let na = self.alice_outcomes();
        if self.alice.iter().any(|p| p.dim() != da || p.len() != na) {
            return Err(shape("Alice POVMs must act on A' and share one outcome count"));
        }
        if self.bob.dim() != inst.d * db {
            return Err(shape(format!("Bob's POVM acts on {}, expected {}", self.bob.dim(), inst.d * db)));
        }
        if self.g.len() != na || self.g.iter().any(|row| row.len() != self.bob_outcomes()) {
            return Err(shape("g must be defined on every outcome pair"));
        }
        if self.g.iter().flatten().any(|&x| x >= inst.d) {
            return Err(shape("g outputs must lie in 0..d"));
        }
        Ok(())
    }
}

/// `tr_1[(E ⊗ I) rho]` for `rho` on `C^d ⊗ C^r`.
pub(crate) fn contract_first(rho: &ComplexMatrix, e: &ComplexMatrix, d: usize) -> ComplexMatrix {
    let r = rho.rows() / d;
    ComplexMatrix::from_fn(r, r, |b, bp| {
        let mut acc = C64::new(0.0, 0.0);
        for x in 0..d {
            for xp in 0..d {
                acc += e[(xp, x)] * rho[(x * r + b, xp * r + bp)];
            }
        }
        acc
    })
}

/// `S[x,x'] = sum_{b,b'} eta[(x,b),(x',b')] Z[b',b]`, so `tr((E ⊗ Z) eta) = tr(E S)`.
pub(crate) fn contract_second(eta: &ComplexMatrix, z: &ComplexMatrix, da: usize) -> ComplexMatrix {
    let db = z.rows();
    ComplexMatrix::from_fn(da, da, |x, xp| {
        let mut acc = C64::new(0.0, 0.0);
        for b in 0..db {
            for bp in 0..db {
                acc += eta[(x * db + b, xp * db + bp)] * z[(bp, b)];
            }
        }
        acc
    })
}

/// Quantities shared by evaluation and optimization.
pub(crate) struct Evaluator<'a> {
    pub inst: &'a GuessingInstance,
    /// `taus[a][α] = tr_A'((E^{a,α} ⊗ I) eta)`.
    pub taus: Vec<Vec<ComplexMatrix>>,
    /// `zs[a][x][β] = (<e^a_x| ⊗ I) F^β (|e^a_x> ⊗ I)` on `B'`.
    pub zs: Vec<Vec<Vec<ComplexMatrix>>>,
}

impl<'a> Evaluator<'a> {
    pub fn new(inst: &'a GuessingInstance, strat: &AttackStrategy) -> Self {
        let mut ev = Evaluator { inst, taus: Vec::new(), zs: Vec::new() };
        ev.update_taus(strat);
        ev.update_zs(strat);
        ev
    }

    pub fn update_taus(&mut self, strat: &AttackStrategy) {
        let eta = strat.eta.matrix();
        self.taus = strat
            .alice
            .iter()
            .map(|p| p.elements().iter().map(|e| contract_first(eta, e, strat.dim_a)).collect())
            .collect();
    }

    pub fn update_zs(&mut self, strat: &AttackStrategy) {
        let (d, db) = (self.inst.d, strat.dim_b);
        self.zs = self
            .inst
            .vectors
            .iter()
            .map(|vs| {
                vs.iter()
                    .map(|e| {
                        strat
                            .bob
                            .elements()
                            .iter()
                            .map(|f| {
                                ComplexMatrix::from_fn(db, db, |b, bp| {
                                    let mut acc = C64::new(0.0, 0.0);
                                    for j in 0..d {
                                        for jp in 0..d {
                                            acc += e[j].conj() * f[(j * db + b, jp * db + bp)] * e[jp];
                                        }
                                    }
                                    acc
                                })
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
    }

    /// `P[x][y]`: probability of answering `y` on input `x`.
    pub fn conditional(&self, strat: &AttackStrategy) -> Vec<Vec<f64>> {
        let (d, k) = (self.inst.d, self.inst.bases_used);
        let mut p = vec![vec![0.0; d]; d];
        for (a, taus) in self.taus.iter().enumerate() {
            for (alpha, tau) in taus.iter().enumerate() {
                for (beta, &y) in strat.g[alpha].iter().enumerate() {
                    for (x, row) in p.iter_mut().enumerate() {
                        row[y] += self.zs[a][x][beta].trace_product(tau).re / k as f64;
                    }
                }
            }
        }
        p
    }

    pub fn success(&self, strat: &AttackStrategy) -> f64 {
        let p = self.conditional(strat);
        (0..self.inst.d).map(|x| p[x][x]).sum::<f64>() / self.inst.d as f64
    }
}

/// `2 dim B' / sqrt d`, vacuous when at least 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundValue {
    pub value: f64,
    pub vacuous: bool,
}

pub fn theoretical_bound(d: usize, dim_b: usize) -> BoundValue {
    let value = 2.0 * dim_b as f64 / (d as f64).sqrt();
    BoundValue { value, vacuous: value >= 1.0 }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AttackResult {
    pub p_succ: f64,
    pub bound: f64,
    /// `bound - p_succ`.
    pub margin: f64,
    pub vacuous: bool,
    pub iterations: Option<usize>,
}

/// Exact success probability of a strategy.
pub fn attack_success(inst: &GuessingInstance, strat: &AttackStrategy) -> Result<AttackResult> {
    strat.check(inst)?;
    let p = Evaluator::new(inst, strat).success(strat).clamp(0.0, 1.0);
    let b = theoretical_bound(inst.d, strat.dim_b);
    Ok(AttackResult { p_succ: p, bound: b.value, margin: b.value - p, vacuous: b.vacuous, iterations: None })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DiamondGap {
    /// `|| (I ⊗ M)(rho_XAB) - (I ⊗ O)(rho_XAB) ||_1`, a lower bound on `||M - O||_◊`.
    pub gap: f64,
    pub p_succ: f64,
    /// `2(1 - 2ε)` with `ε = dim B'/sqrt d`, when `2ε < 1`.
    pub corollary_bound: Option<f64>,
}

/// Distance between the strategy's and the target's outputs on the
/// classically flagged ensemble `(1/d) sum_x |x><x| ⊗ rho^x`.
pub fn diamond_gap(inst: &GuessingInstance, strat: &AttackStrategy, target: &Povm) -> Result<DiamondGap> {
    strat.check(inst)?;
    if target.len() != inst.d || target.dim() != inst.d * inst.bases_used {
        return Err(shape("target POVM does not match the instance"));
    }
    let ev = Evaluator::new(inst, strat);
    let p = ev.conditional(strat);
    let mut gap = 0.0;
    for (x, rho) in inst.ensemble.iter().enumerate() {
        let q = target.probabilities(rho)?;
        gap += p[x].iter().zip(&q).map(|(a, b)| (a - b).abs()).sum::<f64>();
    }
    gap /= inst.d as f64;
    let p_succ = (0..inst.d).map(|x| p[x][x]).sum::<f64>() / inst.d as f64;
    let eps = strat.dim_b as f64 / (inst.d as f64).sqrt();
    let corollary_bound = (2.0 * eps < 1.0).then_some(2.0 * (1.0 - 2.0 * eps));
    Ok(DiamondGap { gap, p_succ, corollary_bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kron, permute_subsystems};
    use crate::mub::{mub_for_dim, povm_from_mub};
    use crate::random::{haar_state, random_povm};
    use crate::rng::RngStream;

    fn instance(d: usize, k: usize) -> GuessingInstance {
        build_ensemble(&mub_for_dim(d).unwrap(), k).unwrap()
    }

    #[test]
    fn ensemble_shapes() {
        let inst = instance(2, 3);
        let rho = inst.ensemble()[0].matrix();
        assert!((rho.trace().re - 1.0).abs() < 1e-15);
        assert_eq!(crate::linalg::numerical_rank(rho, 1e-10).unwrap(), 3);
        // marginal on A is uniform
        let avg = inst.average_state();
        let a = crate::linalg::partial_trace(&avg, &[3, 2], &[0]).unwrap();
        assert!(a.clear_dims().max_abs_diff(&ComplexMatrix::identity(3).scale_real(1.0 / 3.0)) < 1e-15);
    }

    #[test]
    fn target_povm_is_perfect() {
        let fam = mub_for_dim(4).unwrap();
        let inst = build_ensemble(&fam, 5).unwrap();
        let o = povm_from_mub(&fam, 5).unwrap().povm;
        for (x, rho) in inst.ensemble().iter().enumerate() {
            assert!((o.probabilities(rho).unwrap()[x] - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn constant_guess() {
        let inst = instance(4, 5);
        let r = attack_success(&inst, &AttackStrategy::constant_guess(&inst, 2)).unwrap();
        assert!((r.p_succ - 0.25).abs() < 1e-14);
        assert!(r.vacuous);
    }

    #[test]
    fn bob_basis_closed_form() {
        let inst = instance(2, 3);
        let r = attack_success(&inst, &AttackStrategy::bob_measures_basis(&inst, 0).unwrap()).unwrap();
        // basis 0 right for a = 0, a coin flip for the two unbiased bases
        let want = (1.0 + 0.5 + 0.5) / 3.0;
        assert!((r.p_succ - want).abs() < 1e-14);
    }

    /// `(1/(dK)) sum tr((E ⊗ F)(|e><e|_B ⊗ eta_A'B'))` on `A' B B'` via full tensors.
    fn brute_force(inst: &GuessingInstance, s: &AttackStrategy) -> f64 {
        let (d, k, da, db) = (inst.d(), inst.bases_used(), s.dim_a, s.dim_b);
        let mut acc = 0.0;
        for a in 0..k {
            for x in 0..d {
                let e = ComplexMatrix::projector(inst.vector(a, x));
                // |e><e|_B ⊗ eta_{A'B'} reordered to A' B B'
                let st = permute_subsystems(
                    &kron(&e, &s.eta.matrix().clone().clear_dims()).unwrap(),
                    &[d, da, db],
                    &[1, 0, 2],
                )
                .unwrap();
                for (alpha, ea) in s.alice[a].elements().iter().enumerate() {
                    for (beta, fb) in s.bob.elements().iter().enumerate() {
                        if s.g[alpha][beta] == x {
                            acc += kron(ea, fb).unwrap().clear_dims().trace_product(&st.clone().clear_dims()).re;
                        }
                    }
                }
            }
        }
        acc / (d * k) as f64
    }

    #[test]
    fn matches_brute_force_oracle() {
        let mut rng = RngStream::seeded(3);
        let inst = instance(2, 3);
        for _ in 0..5 {
            let (da, db) = (2, 2);
            let eta = haar_state(vec![da, db], &mut rng).density();
            let alice = (0..3).map(|_| random_povm(da, 2, &mut rng)).collect();
            let bob = random_povm(2 * db, 3, &mut rng);
            let g = (0..2).map(|_| (0..3).map(|_| rng.below(2)).collect()).collect();
            let s = AttackStrategy { dim_a: da, dim_b: db, eta, alice, bob, g };
            let r = attack_success(&inst, &s).unwrap();
            assert!((r.p_succ - brute_force(&inst, &s)).abs() < 1e-10);
        }
    }

    #[test]
    fn bounds() {
        assert_eq!(theoretical_bound(16, 1).value, 0.5);
        assert_eq!(theoretical_bound(64, 2).value, 0.5);
        let b = theoretical_bound(4, 1);
        assert_eq!(b.value, 1.0);
        assert!(b.vacuous);
        assert!(!theoretical_bound(16, 1).vacuous);
    }

    #[test]
    fn gap_identity() {
        let fam = mub_for_dim(16).unwrap();
        let inst = build_ensemble(&fam, 17).unwrap();
        let o = povm_from_mub(&fam, 17).unwrap().povm;
        let g = diamond_gap(&inst, &AttackStrategy::constant_guess(&inst, 0), &o).unwrap();
        assert!((g.gap - 1.875).abs() < 1e-12);
        assert_eq!(g.corollary_bound, Some(1.0));
        let s = AttackStrategy::bob_measures_basis(&inst, 3).unwrap();
        let g = diamond_gap(&inst, &s, &o).unwrap();
        assert!((g.gap - 2.0 * (1.0 - g.p_succ)).abs() < 1e-12);
    }

    #[test]
    fn perfect_strategy_has_zero_gap() {
        // with a single basis Bob can measure it and win
        let fam = mub_for_dim(4).unwrap();
        let inst = build_ensemble(&fam, 1).unwrap();
        let o = povm_from_mub(&fam, 1).unwrap().povm;
        let g = diamond_gap(&inst, &AttackStrategy::bob_measures_basis(&inst, 0).unwrap(), &o).unwrap();
        assert!(g.gap.abs() < 1e-12);
        assert!((g.p_succ - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mismatched_strategy_is_rejected() {
        let inst = instance(2, 3);
        let mut s = AttackStrategy::constant_guess(&inst, 0);
        s.g = vec![vec![5]];
        assert!(attack_success(&inst, &s).is_err());
    }
}
