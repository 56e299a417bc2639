//! Cheating strategies of two adversaries placed on either side of `r_0`.

use rayon::prelude::*;
use serde::Serialize;

use super::{
    born, check_family, measure_in_basis, CommunicationClass, Ledger, Party, PayloadKind, SpacetimeConfig, Transcript,
};
use crate::error::{domain, shape, Result};
use crate::instprotocols::{ebits_measurement, effective_povm, InstConfig, MeasurementSimulator, StepOrder, Target};
use crate::linalg::{ComplexMatrix, C64};
use crate::mub::{mub_for_dim, povm_from_mub, MubFamily};
use crate::qcore::PureState;
use crate::rng::RngStream;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AcceptanceEstimate {
    pub trials: usize,
    pub accepted: usize,
    pub estimate: f64,
    /// Binomial standard error of `estimate`.
    pub stderr: f64,
    pub ebits_consumed: usize,
}

impl AcceptanceEstimate {
    fn from_counts(trials: usize, accepted: usize, ebits_consumed: usize) -> Self {
        let p = accepted as f64 / trials.max(1) as f64;
        let stderr = (p * (1.0 - p) / trials.max(1) as f64).sqrt();
        Self { trials, accepted, estimate: p, stderr, ebits_consumed }
    }
}

/// Runs `trials` transcripts on child streams and checks each one.
fn estimate_with<F>(trials: usize, rng: &RngStream, class: CommunicationClass, run: F) -> Result<AcceptanceEstimate>
where
    F: Fn(&mut RngStream) -> Result<Transcript> + Sync,
{
    if trials == 0 {
        return Err(domain("at least one trial is needed"));
    }
    let outcomes: Vec<(bool, usize)> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let t = run(&mut rng.split(k as u64))?;
            t.check_causality(class)?;
            Ok((t.accepted(), t.ebits_consumed))
        })
        .collect::<Result<_>>()?;
    let accepted = outcomes.iter().filter(|o| o.0).count();
    Ok(AcceptanceEstimate::from_counts(trials, accepted, outcomes[0].1))
}

/// Adversaries run the instantaneous measurement protocol for the
/// conditional-basis POVM on `|a> ⊗ U_a|x>`, exchanging one classical message
/// each way.
pub struct EntangledAttack {
    n: usize,
    cfg: SpacetimeConfig,
    fam: MubFamily,
    inst: InstConfig,
    /// Samplers for the inputs `(a, x)`, at index `a * d + x`.
    sims: Vec<MeasurementSimulator>,
}

impl EntangledAttack {
    pub fn new(n: usize, ports: usize, cfg: &SpacetimeConfig) -> Result<Self> {
        cfg.validate()?;
        if n == 0 || n > 3 {
            return Err(domain(format!("n = {n} must lie in 1..=3")));
        }
        let fam = mub_for_dim(1 << n)?;
        let d = check_family(n, &fam)?;
        let meas = povm_from_mub(&fam, d)?;
        let inst = InstConfig::new(n, ports, Target::Measurement(meas.povm), 0)?;
        inst.check_statevector_size()?;
        let mut sims = Vec::with_capacity(d * d);
        for a in 0..d {
            for x in 0..d {
                let mut amps = vec![C64::new(0.0, 0.0); d * d];
                amps[a * d..(a + 1) * d].copy_from_slice(&fam.vector(a, x));
                let psi = PureState::new(amps, vec![d, d])?;
                sims.push(MeasurementSimulator::new(&inst, &psi, StepOrder::Protocol)?);
            }
        }
        Ok(Self { n, cfg: *cfg, fam, inst, sims })
    }

    pub fn ports(&self) -> usize {
        self.inst.ports
    }

    pub fn ebits(&self) -> usize {
        ebits_measurement(self.n, self.inst.ports)
    }

    /// Exact acceptance probability from the effective POVM, averaged over
    /// uniform `(a, x)`.
    pub fn predicted_acceptance(&self) -> Result<f64> {
        let m = effective_povm(&self.inst)?;
        let d = 1usize << self.n;
        let mut total = 0.0;
        for a in 0..d {
            for x in 0..d {
                let el = m.element(x);
                let v = self.fam.vector(a, x);
                let mut s = C64::new(0.0, 0.0);
                for r in 0..d {
                    for c in 0..d {
                        s += v[r].conj() * el[(a * d + r, a * d + c)] * v[c];
                    }
                }
                total += s.re;
            }
        }
        Ok(total / (d * d) as f64)
    }

    pub fn run(&self, rng: &mut RngStream) -> Transcript {
        let d = 1usize << self.n;
        let (a, x) = (rng.below(d), rng.below(d));
        let r = self.sims[a * d + x].run(rng);
        let i = r.alice_port_index;
        let x_hat = r.charlie_output.expect("measurement run");
        let [p0, p1] = self.cfg.adversaries;
        let mut ledger = Ledger::new(&self.cfg, &[(Party::Adversary0, p0), (Party::Adversary1, p1)]);
        let (ea, eq) = ledger.challenges(Party::Adversary0, Party::Adversary1, a);
        let to1 = ledger.respond(
            Party::Adversary0,
            Party::Adversary1,
            PayloadKind::Classical,
            &format!("port={i}"),
            vec![ea],
        );
        let to0 = ledger.respond(
            Party::Adversary1,
            Party::Adversary0,
            PayloadKind::Classical,
            &format!("outcomes={:?}", r.port_outcomes),
            vec![eq],
        );
        let reply = format!("x={x_hat}");
        ledger.respond(Party::Adversary0, Party::V0, PayloadKind::Classical, &reply, vec![ea, to0]);
        ledger.respond(Party::Adversary1, Party::V1, PayloadKind::Classical, &reply, vec![eq, to1]);
        ledger.finish(a, x, [x_hat, x_hat], r.ebits_consumed)
    }

    pub fn estimate(&self, trials: usize, rng: &RngStream) -> Result<AcceptanceEstimate> {
        estimate_with(trials, rng, CommunicationClass::Classical, |r| Ok(self.run(r)))
    }
}

/// One sample transcript and an acceptance estimate over `trials` runs.
pub fn run_entangled_attack(
    n: usize,
    ports: usize,
    cfg: &SpacetimeConfig,
    trials: usize,
    rng: &RngStream,
) -> Result<(Transcript, AcceptanceEstimate)> {
    let attack = EntangledAttack::new(n, ports, cfg)?;
    let sample = attack.run(&mut rng.split_named("sample", 0));
    sample.check_causality(CommunicationClass::Classical)?;
    Ok((sample, attack.estimate(trials, &rng.split_named("trials", 0))?))
}

/// No shared entanglement: `Adversary1` measures the challenge state in a
/// fixed basis `{|w_y>}` and broadcasts `y`, `Adversary0` broadcasts `a`, and
/// both answer the most likely `x` given `(a, y)`. In the resending variant
/// `Adversary1` forwards `|w_y>` instead and `Adversary0` answers by measuring
/// it in basis `a`.
#[derive(Clone, Debug)]
pub struct InterceptAttack {
    basis: ComplexMatrix,
    resend: bool,
}

impl InterceptAttack {
    /// `basis` has the measurement vectors as columns.
    pub fn new(basis: ComplexMatrix) -> Result<Self> {
        let d = basis.rows();
        if basis.cols() != d || (&basis.adjoint() * &basis).max_abs_diff(&ComplexMatrix::identity(d)) > 1e-10 {
            return Err(domain("intercept basis must be a unitary matrix"));
        }
        Ok(Self { basis, resend: false })
    }

    pub fn fixed_basis(fam: &MubFamily, b: usize) -> Result<Self> {
        if b >= fam.len() {
            return Err(domain(format!("basis {b} not in a family of {}", fam.len())));
        }
        Self::new(fam.basis(b).clone())
    }

    /// Qubit basis halfway between the computational and Hadamard bases.
    pub fn breidbart() -> Self {
        let (c, s) = ((std::f64::consts::PI / 8.0).cos(), (std::f64::consts::PI / 8.0).sin());
        let basis = ComplexMatrix::from_fn(2, 2, |r, k| C64::new([[c, -s], [s, c]][r][k], 0.0));
        Self { basis, resend: false }
    }

    pub fn resending(mut self) -> Self {
        self.resend = true;
        self
    }

    pub fn communication(&self) -> CommunicationClass {
        if self.resend {
            CommunicationClass::Quantum
        } else {
            CommunicationClass::Classical
        }
    }

    fn guess(&self, fam: &MubFamily, a: usize, y: usize) -> usize {
        let w = self.basis.column(y);
        let mut best = (f64::NEG_INFINITY, 0);
        for x in 0..fam.d() {
            let p = born(&w, &fam.vector(a, x));
            if p > best.0 + 1e-12 {
                best = (p, x);
            }
        }
        best.1
    }

    /// One run; fails if the transcript needs more than `class` allows.
    pub fn run(
        &self,
        n: usize,
        cfg: &SpacetimeConfig,
        fam: &MubFamily,
        class: CommunicationClass,
        rng: &mut RngStream,
    ) -> Result<Transcript> {
        cfg.validate()?;
        let d = check_family(n, fam)?;
        if self.basis.rows() != d {
            return Err(shape(format!("intercept basis has dimension {}, challenge has {d}", self.basis.rows())));
        }
        let (a, x) = (rng.below(d), rng.below(d));
        let psi = fam.vector(a, x);
        let probs: Vec<f64> = (0..d).map(|y| born(&self.basis.column(y), &psi)).collect();
        let y = rng.weighted_index(&probs, probs.iter().sum());
        let guess = self.guess(fam, a, y);
        let [p0, p1] = cfg.adversaries;
        let mut ledger = Ledger::new(cfg, &[(Party::Adversary0, p0), (Party::Adversary1, p1)]);
        let (ea, eq) = ledger.challenges(Party::Adversary0, Party::Adversary1, a);
        let to1 =
            ledger.respond(Party::Adversary0, Party::Adversary1, PayloadKind::Classical, &format!("a={a}"), vec![ea]);
        let (x0, to0) = if self.resend {
            let e =
                ledger.respond(Party::Adversary1, Party::Adversary0, PayloadKind::Quantum, "register:resend", vec![eq]);
            (measure_in_basis(fam, a, &self.basis.column(y), rng), e)
        } else {
            (
                guess,
                ledger.respond(
                    Party::Adversary1,
                    Party::Adversary0,
                    PayloadKind::Classical,
                    &format!("y={y}"),
                    vec![eq],
                ),
            )
        };
        ledger.respond(Party::Adversary0, Party::V0, PayloadKind::Classical, &format!("x={x0}"), vec![ea, to0]);
        ledger.respond(Party::Adversary1, Party::V1, PayloadKind::Classical, &format!("x={guess}"), vec![eq, to1]);
        let t = ledger.finish(a, x, [x0, guess], 0);
        t.check_causality(class)?;
        Ok(t)
    }

    pub fn estimate(
        &self,
        n: usize,
        cfg: &SpacetimeConfig,
        fam: &MubFamily,
        class: CommunicationClass,
        trials: usize,
        rng: &RngStream,
    ) -> Result<AcceptanceEstimate> {
        estimate_with(trials, rng, class, |r| self.run(n, cfg, fam, class, r))
    }
}

/// One intercept run under the given communication class.
pub fn run_intercept_attack(
    n: usize,
    cfg: &SpacetimeConfig,
    fam: &MubFamily,
    attack: &InterceptAttack,
    class: CommunicationClass,
    rng: &mut RngStream,
) -> Result<Transcript> {
    attack.run(n, cfg, fam, class, rng)
}
