//! Port-based teleportation with the pretty-good measurement.
//!
//! Alice holds `A A'_1 ... A'_N`, Bob holds `B'_1 ... B'_N`. The states to
//! discriminate, `eta^i`, live on `A'_1 ... A'_N B`; a POVM found for them is
//! used on `A A'_1 ... A'_N` by reading `B` as `A` and moving it to the front.

mod family;

pub use family::{eta_family, eta_family_with_limit, PortFamily};

use serde::Serialize;

use crate::error::{domain, shape, Error, Result};
use crate::linalg::{mat_func, numerical_rank, permute_subsystems, ComplexMatrix, SpectralFn, ToleranceConfig, C64};
use crate::qcore::{choi_trace_distance, ent_fidelity, DensityOperator, Povm, QuantumChannel};

/// Pretty-good measurement `E^i = S^{-1/2} rho_i S^{-1/2}`, `S = sum_j rho_j`,
/// using the pseudo-inverse on the support of `S`. The completion
/// `I - sum_i E^i` is added to the first element.
pub fn pgm_build(states: &[DensityOperator]) -> Result<Povm> {
    let first = states.first().ok_or_else(|| shape("PGM of an empty ensemble"))?;
    let n = first.dim();
    if states.iter().any(|s| s.dim() != n) {
        return Err(shape("PGM states must share one dimension"));
    }
    let mut sum = ComplexMatrix::zeros(n, n);
    for s in states {
        sum += &s.matrix().clone().clear_dims();
    }
    let t = mat_func(&sum, SpectralFn::PseudoInvSqrt)?;
    let mut elements: Vec<ComplexMatrix> =
        states.iter().map(|s| (&(&t * &s.matrix().clone().clear_dims()) * &t).hermitian_part()).collect();
    let mut completion = ComplexMatrix::identity(n);
    for e in &elements {
        completion -= e;
    }
    elements[0] += &completion;
    let dims = first.dims().to_vec();
    let elements = elements.into_iter().map(|e| e.with_dims(dims.clone())).collect::<Result<Vec<_>>>()?;
    let labels = (1..=states.len()).map(|i| i.to_string()).collect();
    Povm::from_elements_unchecked(elements, labels)
}

/// Average success probability `(1/N) sum_i tr(E^i rho_i)`.
pub fn pgm_success(states: &[DensityOperator], povm: &Povm) -> Result<f64> {
    if states.len() != povm.len() {
        return Err(shape(format!("{} states but {} POVM elements", states.len(), povm.len())));
    }
    let mut acc = 0.0;
    for (s, e) in states.iter().zip(povm.elements()) {
        if s.dim() != e.rows() {
            return Err(shape("state and POVM element dimensions differ"));
        }
        acc += e.trace_product(s.matrix()).re;
    }
    Ok(acc / states.len() as f64)
}

/// `1 / (N r̄ tr η̄^2)`: lower bound on PGM success for a uniform ensemble,
/// with `r̄` the mean numerical rank and `η̄` the average state.
pub fn pgm_generic_bound(states: &[DensityOperator]) -> Result<f64> {
    let n = states.len();
    if n == 0 {
        return Err(shape("empty ensemble"));
    }
    let d = states[0].dim();
    let mut avg = ComplexMatrix::zeros(d, d);
    let cutoff = ToleranceConfig::default().rank_cutoff;
    let mut rank_total = 0usize;
    for s in states {
        avg += &s.matrix().clone().clear_dims();
        rank_total += numerical_rank(s.matrix(), cutoff)?;
    }
    let avg = avg.scale_real(1.0 / n as f64);
    let r_bar = rank_total as f64 / n as f64;
    Ok(1.0 / (n as f64 * r_bar * avg.trace_product(&avg).re))
}

/// Moves the last of `ports + 1` subsystems of dimension `d` to the front,
/// turning a POVM on `A'_1 ... A'_N B` into one on `A A'_1 ... A'_N`.
pub fn to_sender_ordering(povm: Povm, d: usize, ports: usize) -> Result<Povm> {
    let dims = vec![d; ports + 1];
    let mut perm = vec![ports];
    perm.extend(0..ports);
    let labels = povm.labels().to_vec();
    let elements =
        povm.into_elements().into_iter().map(|e| permute_subsystems(&e, &dims, &perm)).collect::<Result<Vec<_>>>()?;
    Povm::from_elements_unchecked(elements, labels)
}

/// Channel realized by port-based teleportation with the POVM `{E^i}` on
/// `A A'_1 ... A'_N` and `N` maximally entangled pairs. Element `i` of the
/// POVM selects port `i`.
///
/// `Ω(|a><a'|)[b,b'] = d^-N sum_i sum_{k,k'} E^i[(a',k'),(a,k)]` over port
/// strings with `k_i = b`, `k'_i = b'` and `k_j = k'_j` elsewhere.
pub fn pbt_channel(fam: &PortFamily, povm: &Povm) -> Result<QuantumChannel> {
    let (d, ports) = (fam.d(), fam.ports());
    if povm.len() != ports || povm.dim() != fam.dim() {
        return Err(shape(format!(
            "POVM with {} elements on dimension {} does not fit {ports} ports of dimension {d}",
            povm.len(),
            povm.dim()
        )));
    }
    let block = d.pow(ports as u32);
    let scale = 1.0 / block as f64;
    let stride = |k: usize| d.pow((ports - 1 - k) as u32);
    let mut choi = ComplexMatrix::zeros(d * d, d * d);
    for i in 0..ports {
        let e = povm.element(i);
        // offsets of all port strings with k_i = 0
        let mut rest = vec![0usize];
        for k in 0..ports {
            if k != i {
                rest = rest.iter().flat_map(|&o| (0..d).map(move |v| o + v * stride(k))).collect();
            }
        }
        let si = stride(i);
        for a in 0..d {
            for ap in 0..d {
                for b in 0..d {
                    for bp in 0..d {
                        let mut acc = C64::new(0.0, 0.0);
                        for &r in &rest {
                            let row = ap * block + r + bp * si;
                            let col = a * block + r + b * si;
                            acc += e[(row, col)];
                        }
                        // J[(b,a),(b',a')] = Ω(|a><a'|)[b,b'] / d
                        choi[(b * d + a, bp * d + ap)] += acc * (scale / d as f64);
                    }
                }
            }
        }
    }
    let ch = QuantumChannel::from_choi_unchecked(choi.hermitian_part(), d, d)?;
    let dev = ch.trace_preservation_deviation();
    if dev > ToleranceConfig::default().trace_preservation {
        return Err(Error::Validation(format!("port-based channel is not trace preserving ({dev:.3e})")));
    }
    Ok(ch)
}

/// Fidelities, bounds and channel distances for one `(d, N)` cell.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PbtReport {
    pub d: usize,
    #[serde(rename = "N")]
    pub ports: usize,
    pub p_succ: f64,
    pub fidelity: f64,
    /// `1 - (d^2 - 1)/N`.
    pub thm1_bound: f64,
    /// `(d^2/N)(1 - (d^2 - 1)/N)`, a lower bound on `p_succ`.
    pub appendix_bound: f64,
    /// `1 / (N r̄ tr η̄^2)`, the generic PGM lower bound on `p_succ`.
    pub generic_bound: f64,
    /// `½ ||J(E) - J(I)||_1`.
    pub choi_halfdist: f64,
    /// `sqrt(1 - F)`.
    pub choi_fid_bound: f64,
    /// `2 d ||J(E) - J(I)||_1`.
    pub diamond_upper: f64,
    /// `4 d^2 / sqrt N`.
    pub corollary1_bound: f64,
}

impl PbtReport {
    /// `F - (N/d^2) p_succ`.
    pub fn equivalence_residual(&self) -> f64 {
        self.fidelity - self.ports as f64 / (self.d * self.d) as f64 * self.p_succ
    }
}

/// PGM channel and report for one cell.
pub fn pbt_report(d: usize, ports: usize) -> Result<PbtReport> {
    pbt_report_with_limit(d, ports, ToleranceConfig::default().max_matrix_dim)
}

pub fn pbt_report_with_limit(d: usize, ports: usize, limit: usize) -> Result<PbtReport> {
    let fam = eta_family_with_limit(d, ports, limit)?;
    let pgm = fam.pgm()?;
    let p_succ = fam.success_probability(&pgm)?;
    let generic_bound = fam.generic_bound()?;
    let povm = to_sender_ordering(pgm, d, ports)?;
    let channel = pbt_channel(&fam, &povm)?;
    drop(povm);
    let fidelity = ent_fidelity(&channel)?;
    let dist = choi_trace_distance(&channel, &QuantumChannel::identity(d))?;
    let (dd, n) = ((d * d) as f64, ports as f64);
    Ok(PbtReport {
        d,
        ports,
        p_succ,
        fidelity,
        thm1_bound: 1.0 - (dd - 1.0) / n,
        appendix_bound: dd / n * (1.0 - (dd - 1.0) / n),
        generic_bound,
        choi_halfdist: dist.half_trace_distance,
        choi_fid_bound: (1.0 - fidelity).max(0.0).sqrt(),
        diamond_upper: dist.diamond_upper,
        corollary1_bound: 4.0 * dd / n.sqrt(),
    })
}

/// Result of checking `tr X^2 >= (tr Y)^3 / (rank X tr Y^2)` after rescaling
/// `Y` so that `tr X = tr sqrt(Y)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OperatorBoundCheck {
    pub holds: bool,
    /// `lhs - rhs`.
    pub slack: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// Factor applied to `Y`.
    pub y_scale: f64,
    pub rank_x: usize,
}

pub fn operator_bound_check(x: &ComplexMatrix, y: &ComplexMatrix) -> Result<OperatorBoundCheck> {
    let tr_x = x.trace().re;
    let sqrt_y = mat_func(y, SpectralFn::Sqrt)?;
    let tr_sqrt_y = sqrt_y.trace().re;
    if !(tr_x > 0.0) || !(tr_sqrt_y > 0.0) {
        return Err(domain("operator bound needs nonzero X and Y"));
    }
    // tr sqrt(cY) = sqrt(c) tr sqrt(Y)
    let c = (tr_x / tr_sqrt_y).powi(2);
    let rank_x = numerical_rank(x, ToleranceConfig::default().rank_cutoff)?;
    let tr_y = c * y.trace().re;
    let tr_y2 = c * c * y.trace_product(y).re;
    let lhs = x.trace_product(x).re;
    let rhs = tr_y.powi(3) / (rank_x as f64 * tr_y2);
    let slack = lhs - rhs;
    Ok(OperatorBoundCheck { holds: slack >= -1e-9, slack, lhs, rhs, y_scale: c, rank_x })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kron_all, partial_trace};
    use crate::qcore::{max_entangled, PureState};
    use crate::random::{random_density, random_psd};
    use crate::rng::RngStream;

    #[test]
    fn single_state_pgm_is_identity() {
        let mut rng = RngStream::seeded(0);
        let rho = random_density(3, 1, &mut rng);
        let p = pgm_build(&[rho]).unwrap();
        assert!(p.element(0).clone().clear_dims().max_abs_diff(&ComplexMatrix::identity(3)) < 1e-9);
    }

    #[test]
    fn orthogonal_states_give_projectors() {
        let s0 = PureState::basis(vec![2], 0).unwrap().density();
        let s1 = PureState::basis(vec![2], 1).unwrap().density();
        let p = pgm_build(&[s0.clone(), s1.clone()]).unwrap();
        assert!(p.element(0).max_abs_diff(s0.matrix()) < 1e-12);
        assert!(p.element(1).max_abs_diff(s1.matrix()) < 1e-12);
        assert!((pgm_success(&[s0, s1], &p).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identical_states_success_is_one_over_n() {
        let mut rng = RngStream::seeded(1);
        let rho = random_density(3, 2, &mut rng);
        let states = vec![rho; 4];
        let p = pgm_build(&states).unwrap();
        assert!((pgm_success(&states, &p).unwrap() - 0.25).abs() < 1e-10);
    }

    #[test]
    fn eta_pgm_is_valid_povm() {
        let fam = eta_family(2, 2).unwrap();
        let p = pgm_build(&fam.etas()).unwrap();
        assert_eq!(p.len(), 2);
        let mut sum = ComplexMatrix::zeros(8, 8);
        p.elements().iter().for_each(|e| sum += &e.clone().clear_dims());
        assert!(sum.max_abs_diff(&ComplexMatrix::identity(8)) < 1e-9);
        assert!(Povm::new(p.elements().to_vec(), p.labels().to_vec()).is_ok());
    }

    #[test]
    fn pgm_success_fixture_d2_n2() {
        let fam = eta_family(2, 2).unwrap();
        let p = fam.pgm().unwrap();
        let got = fam.success_probability(&p).unwrap();
        // dense oracle: tr(S^{-1/2} eta^i S^{-1/2} eta^i) from an independent
        // eigendecomposition of S
        let s = fam.sum();
        let eig = crate::linalg::herm_eig(s).unwrap();
        let lmax = eig.lambda_max();
        let t = eig.reconstruct_with(|l| if l > 1e-10 * lmax { 1.0 / l.sqrt() } else { 0.0 });
        let oracle: f64 = fam
            .etas()
            .iter()
            .map(|e| {
                let m = &(&t * e.matrix()) * &t;
                m.trace_product(e.matrix()).re
            })
            .sum::<f64>()
            / 2.0;
        assert!((got - oracle).abs() < 1e-12);
        assert!((got - PGM_SUCCESS_D2_N2).abs() < 1e-12, "p_succ = {got:.15}");
    }

    // (2 + sqrt 3)/4, from an independent numpy evaluation
    const PGM_SUCCESS_D2_N2: f64 = 0.933_012_701_892_219_6;

    /// Literal channel: builds the full input state, measures and traces.
    fn literal_channel_apply(d: usize, ports: usize, povm: &Povm, rho: &ComplexMatrix) -> ComplexMatrix {
        // subsystems: A, A'_1..A'_N, B'_1..B'_N
        let mut factors = vec![rho.clone()];
        let phi = max_entangled(d).projector();
        for _ in 0..ports {
            factors.push(phi.clone());
        }
        // currently A, (A'_1 B'_1), (A'_2 B'_2), ...
        let joint = kron_all(&factors).unwrap();
        let dims = vec![d; 2 * ports + 1];
        let mut current = vec![0];
        for k in 0..ports {
            current.push(1 + k);
            current.push(1 + ports + k);
        }
        let perm: Vec<usize> = (0..dims.len()).map(|k| current.iter().position(|&c| c == k).unwrap()).collect();
        let joint = permute_subsystems(&joint, &dims, &perm).unwrap();
        let mut out = ComplexMatrix::zeros(d, d);
        let bob = ComplexMatrix::identity(d.pow(ports as u32));
        for i in 0..ports {
            let op = crate::linalg::kron(&povm.element(i).clone().clear_dims(), &bob).unwrap();
            let m = &op * &joint;
            out += &partial_trace(&m, &dims, &[1 + ports + i]).unwrap().clear_dims();
        }
        out
    }

    #[test]
    fn index_formula_matches_literal_channel() {
        let mut rng = RngStream::seeded(3);
        for (d, n) in [(2, 1), (2, 2), (3, 1), (2, 3)] {
            let fam = eta_family(d, n).unwrap();
            let povm = to_sender_ordering(fam.pgm().unwrap(), d, n).unwrap();
            let ch = pbt_channel(&fam, &povm).unwrap();
            let rho = crate::random::random_density(d, d, &mut rng);
            let lit = literal_channel_apply(d, n, &povm, &rho.matrix().clone().clear_dims());
            assert!(ch.apply(&rho.matrix().clone().clear_dims()).unwrap().max_abs_diff(&lit) < 1e-12, "d={d} N={n}");
        }
    }

    #[test]
    fn equivalence_identity_small_grid() {
        for (d, n) in [(2, 1), (2, 2), (2, 3), (2, 4), (3, 1), (3, 2)] {
            let r = pbt_report(d, n).unwrap();
            assert!(r.equivalence_residual().abs() < 1e-9, "d={d} N={n}: {r:?}");
            assert!(r.fidelity >= r.thm1_bound - 1e-9);
            assert!(r.choi_halfdist <= r.choi_fid_bound + 1e-9);
            assert!(r.p_succ >= r.generic_bound - 1e-9);
        }
    }

    #[test]
    fn single_port_is_depolarizing() {
        let r = pbt_report(2, 1).unwrap();
        assert!((r.p_succ - 1.0).abs() < 1e-12);
        assert!((r.fidelity - 0.25).abs() < 1e-12);
    }

    #[test]
    fn report_arithmetic() {
        let r = pbt_report(2, 4).unwrap();
        assert!((r.thm1_bound - 0.25).abs() < 1e-15);
        let r = pbt_report(3, 2).unwrap();
        assert!((r.appendix_bound - 4.5 * (1.0 - 4.0)).abs() < 1e-12);
        assert!(r.appendix_bound < 0.0);
    }

    #[test]
    fn generic_bound_examples() {
        let states: Vec<DensityOperator> = (0..3).map(|k| PureState::basis(vec![3], k).unwrap().density()).collect();
        assert!((pgm_generic_bound(&states).unwrap() - 1.0).abs() < 1e-12);
        // N = 2 ports, d = 2: r̄ = 2, tr η̄^2 = (1/2)(1/2) + (1/2)(1/8) = 5/16
        let fam = eta_family(2, 2).unwrap();
        let expected = 1.0 / (2.0 * 2.0 * (0.25 + 1.0 / 16.0));
        assert!((pgm_generic_bound(&fam.etas()).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn generic_bound_on_random_qubit_ensembles() {
        let mut rng = RngStream::seeded(4);
        for _ in 0..20 {
            let states: Vec<DensityOperator> = (0..3).map(|_| random_density(2, 2, &mut rng)).collect();
            let p = pgm_build(&states).unwrap();
            assert!(pgm_success(&states, &p).unwrap() >= pgm_generic_bound(&states).unwrap() - 1e-9);
        }
    }

    #[test]
    fn operator_bound_equality_case() {
        for k in 1..5 {
            let x = ComplexMatrix::identity(k).scale_real(1.0 / k as f64);
            let y = &x * &x;
            let r = operator_bound_check(&x, &y).unwrap();
            assert!((r.y_scale - 1.0).abs() < 1e-12);
            assert!(r.slack.abs() < 1e-12 && r.holds);
        }
    }

    #[test]
    fn operator_bound_rank_one() {
        let mut rng = RngStream::seeded(5);
        let x = random_psd(4, 1, &mut rng);
        let y = random_psd(3, 3, &mut rng);
        let r = operator_bound_check(&x, &y).unwrap();
        assert_eq!(r.rank_x, 1);
        let c = r.y_scale;
        let expected = (c * y.trace().re).powi(3) / (c * c * y.trace_product(&y).re);
        assert!((r.rhs - expected).abs() < 1e-12 * expected.abs().max(1.0));
        assert!(r.holds);
    }

    #[test]
    fn operator_bound_rejects_zero() {
        let z = ComplexMatrix::zeros(2, 2);
        assert!(operator_bound_check(&z, &ComplexMatrix::identity(2)).is_err());
    }
}
