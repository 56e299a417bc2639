//! One-dimensional position verification with a single challenge round.
//!
//! Verifier `V0` sends the basis label `a`, verifier `V1` sends `U_a|x>`, and
//! both expect `x` back at the time an answer emitted from `r_0` would arrive.
//! Signals travel at unit speed and local computation is instantaneous.
//! Every run produces a [`Transcript`] of timed messages whose causal
//! structure is checked before a verdict is issued.

mod attacks;
mod bounds;

pub use attacks::{run_entangled_attack, run_intercept_attack, AcceptanceEstimate, EntangledAttack, InterceptAttack};
pub use bounds::{
    binary_entropy, composition_plan, inverse_binary_entropy, reduction_bound, single_round_bound, soundness_limited,
    CompositionPlan, SoundnessReport,
};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{domain, shape, Error, Result};
use crate::linalg::C64;
use crate::mub::MubFamily;
use crate::rng::RngStream;

/// Absolute tolerance on event times.
const TIME_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Party {
    V0,
    V1,
    Prover,
    /// Adversary between `V0` and `r_0`.
    Adversary0,
    /// Adversary between `r_0` and `V1`.
    Adversary1,
}

impl Party {
    fn is_adversary(self) -> bool {
        matches!(self, Party::Adversary0 | Party::Adversary1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PayloadKind {
    Classical,
    Quantum,
}

/// Communication allowed between adversaries once the challenge is out.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CommunicationClass {
    Classical,
    Quantum,
}

/// Verifier and adversary positions on the line; signal speed is 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpacetimeConfig {
    pub r_v0: f64,
    pub r0: f64,
    pub r_v1: f64,
    /// Spatial resolution `Δ`.
    pub delta: f64,
    /// Positions of `Adversary0` and `Adversary1`.
    pub adversaries: [f64; 2],
    /// Accepted deviation of a reply's arrival time from its deadline.
    pub slack: f64,
}

impl Default for SpacetimeConfig {
    fn default() -> Self {
        Self::new(-10.0, 0.0, 10.0, 1.0).expect("valid default geometry")
    }
}

impl SpacetimeConfig {
    /// Adversaries at `r_0 ∓ 2Δ`, zero slack.
    pub fn new(r_v0: f64, r0: f64, r_v1: f64, delta: f64) -> Result<Self> {
        let cfg = Self { r_v0, r0, r_v1, delta, adversaries: [r0 - 2.0 * delta, r0 + 2.0 * delta], slack: 0.0 };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_adversaries(mut self, p0: f64, p1: f64) -> Result<Self> {
        self.adversaries = [p0, p1];
        self.validate()?;
        Ok(self)
    }

    pub fn with_slack(mut self, slack: f64) -> Result<Self> {
        self.slack = slack;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.r_v0, self.r0, self.r_v1, self.delta, self.slack, self.adversaries[0], self.adversaries[1]];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(domain("positions, resolution and slack must be finite"));
        }
        if !(self.delta > 0.0) || self.slack < 0.0 {
            return Err(domain(format!("need delta > 0 and slack >= 0, got {} and {}", self.delta, self.slack)));
        }
        if !(self.r_v0 < self.r0 && self.r0 < self.r_v1) {
            return Err(domain(format!("need r_V0 < r_0 < r_V1, got {} {} {}", self.r_v0, self.r0, self.r_v1)));
        }
        let [p0, p1] = self.adversaries;
        if !(self.r_v0 < p0 && p0 < self.r0 - self.delta) {
            return Err(domain(format!("adversary 0 at {p0} must lie in ({}, {})", self.r_v0, self.r0 - self.delta)));
        }
        if !(self.r0 + self.delta < p1 && p1 < self.r_v1) {
            return Err(domain(format!("adversary 1 at {p1} must lie in ({}, {})", self.r0 + self.delta, self.r_v1)));
        }
        Ok(())
    }

    /// Time at which the reply to `verifier` is due. The challenges reach
    /// `r_0` at time 0.
    pub fn deadline(&self, verifier: Party) -> f64 {
        match verifier {
            Party::V0 => self.r0 - self.r_v0,
            _ => self.r_v1 - self.r0,
        }
    }

    fn challenge_emit_time(&self, verifier: Party) -> f64 {
        -self.deadline(verifier)
    }
}

/// One message. `depends_on` lists the earlier events whose content the
/// payload is computed from; each must have arrived at the sender by
/// `t_emit`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Event {
    pub from: Party,
    pub to: Party,
    pub kind: PayloadKind,
    pub t_emit: f64,
    pub t_arrive: f64,
    pub payload_digest: String,
    pub depends_on: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Accept,
    RejectTiming,
    RejectValue,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Transcript {
    pub positions: Vec<(Party, f64)>,
    pub events: Vec<Event>,
    pub a: usize,
    pub x: usize,
    /// Replies received by `V0` and `V1`.
    pub x_hat: [usize; 2],
    pub verdict: Verdict,
    /// Pre-shared entanglement used by the provers.
    pub ebits_consumed: usize,
}

fn digest(kind: PayloadKind, content: &str) -> String {
    let mut h = Sha256::new();
    h.update(match kind {
        PayloadKind::Classical => b"c:".as_slice(),
        PayloadKind::Quantum => b"q:".as_slice(),
    });
    h.update(content.as_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

impl Transcript {
    pub fn position(&self, party: Party) -> Option<f64> {
        self.positions.iter().find(|(p, _)| *p == party).map(|&(_, r)| r)
    }

    pub fn accepted(&self) -> bool {
        self.verdict == Verdict::Accept
    }

    /// Structural checks: arrival times match distances, every dependency
    /// arrived at the sender before emission, and under
    /// [`CommunicationClass::Classical`] no quantum message passes between
    /// adversaries.
    pub fn check_causality(&self, class: CommunicationClass) -> Result<()> {
        for (k, e) in self.events.iter().enumerate() {
            let (Some(rf), Some(rt)) = (self.position(e.from), self.position(e.to)) else {
                return Err(Error::Validation(format!("event {k} involves a party without a position")));
            };
            if (e.t_arrive - e.t_emit - (rt - rf).abs()).abs() > TIME_TOL {
                return Err(Error::Validation(format!("event {k} travels faster or slower than light")));
            }
            for &dep in &e.depends_on {
                let Some(d) = self.events.get(dep).filter(|_| dep < k) else {
                    return Err(Error::Validation(format!("event {k} depends on later or missing event {dep}")));
                };
                if d.to != e.from || d.t_arrive > e.t_emit + TIME_TOL {
                    return Err(Error::Validation(format!(
                        "event {k} uses event {dep} before it reached {:?}",
                        e.from
                    )));
                }
            }
            if class == CommunicationClass::Classical
                && e.kind == PayloadKind::Quantum
                && e.from.is_adversary()
                && e.to.is_adversary()
            {
                return Err(Error::Validation(format!("event {k} sends a quantum payload between adversaries")));
            }
        }
        Ok(())
    }
}

/// Builds a transcript event by event.
struct Ledger<'a> {
    cfg: &'a SpacetimeConfig,
    positions: Vec<(Party, f64)>,
    events: Vec<Event>,
}

impl<'a> Ledger<'a> {
    fn new(cfg: &'a SpacetimeConfig, provers: &[(Party, f64)]) -> Self {
        let mut positions = vec![(Party::V0, cfg.r_v0), (Party::V1, cfg.r_v1)];
        positions.extend_from_slice(provers);
        Self { cfg, positions, events: Vec::new() }
    }

    fn pos(&self, p: Party) -> f64 {
        self.positions.iter().find(|(q, _)| *q == p).expect("registered party").1
    }

    fn push(
        &mut self,
        from: Party,
        to: Party,
        kind: PayloadKind,
        t_emit: f64,
        content: &str,
        deps: Vec<usize>,
    ) -> usize {
        let t_arrive = t_emit + (self.pos(to) - self.pos(from)).abs();
        self.events.push(Event {
            from,
            to,
            kind,
            t_emit,
            t_arrive,
            payload_digest: digest(kind, content),
            depends_on: deps,
        });
        self.events.len() - 1
    }

    /// Challenges from both verifiers, aimed to meet at `r_0` at time 0.
    fn challenges(&mut self, to0: Party, to1: Party, a: usize) -> (usize, usize) {
        let e0 = self.push(
            Party::V0,
            to0,
            PayloadKind::Classical,
            self.cfg.challenge_emit_time(Party::V0),
            &format!("a={a}"),
            vec![],
        );
        let e1 = self.push(
            Party::V1,
            to1,
            PayloadKind::Quantum,
            self.cfg.challenge_emit_time(Party::V1),
            "register:challenge",
            vec![],
        );
        (e0, e1)
    }

    /// Sent as soon as every dependency has arrived.
    fn respond(&mut self, from: Party, to: Party, kind: PayloadKind, content: &str, deps: Vec<usize>) -> usize {
        let t = deps.iter().map(|&d| self.events[d].t_arrive).fold(f64::NEG_INFINITY, f64::max);
        self.push(from, to, kind, t, content, deps)
    }

    fn finish(self, a: usize, x: usize, x_hat: [usize; 2], ebits_consumed: usize) -> Transcript {
        let reply = |v: Party| self.events.iter().find(|e| e.to == v && e.from != v).map(|e| e.t_arrive);
        let on_time = [Party::V0, Party::V1]
            .iter()
            .all(|&v| reply(v).is_some_and(|t| (t - self.cfg.deadline(v)).abs() <= self.cfg.slack + TIME_TOL));
        let verdict = if !on_time {
            Verdict::RejectTiming
        } else if x_hat != [x, x] {
            Verdict::RejectValue
        } else {
            Verdict::Accept
        };
        Transcript { positions: self.positions, events: self.events, a, x, x_hat, verdict, ebits_consumed }
    }
}

fn check_family(n: usize, fam: &MubFamily) -> Result<usize> {
    if n == 0 || n > 16 {
        return Err(domain(format!("n = {n} must lie in 1..=16")));
    }
    let d = 1usize << n;
    if fam.d() != d || fam.len() < d {
        return Err(shape(format!(
            "need {d} bases of dimension {d}, family has {} of dimension {}",
            fam.len(),
            fam.d()
        )));
    }
    Ok(d)
}

fn born(basis_vec: &[C64], psi: &[C64]) -> f64 {
    basis_vec.iter().zip(psi).map(|(e, p)| e.conj() * p).sum::<C64>().norm_sqr()
}

/// Outcome of measuring `psi` in basis `a` of `fam`.
fn measure_in_basis(fam: &MubFamily, a: usize, psi: &[C64], rng: &mut RngStream) -> usize {
    let probs: Vec<f64> = (0..fam.d()).map(|y| born(&fam.vector(a, y), psi)).collect();
    let total = probs.iter().sum();
    rng.weighted_index(&probs, total)
}

/// Honest prover at `r_0` with bases `0..2^n` of `fam`.
pub fn run_honest(n: usize, cfg: &SpacetimeConfig, fam: &MubFamily, rng: &mut RngStream) -> Result<Transcript> {
    run_honest_at(n, cfg, fam, cfg.r0, rng)
}

/// Honest prover behavior executed at `position`.
pub fn run_honest_at(
    n: usize,
    cfg: &SpacetimeConfig,
    fam: &MubFamily,
    position: f64,
    rng: &mut RngStream,
) -> Result<Transcript> {
    cfg.validate()?;
    let d = check_family(n, fam)?;
    if !(cfg.r_v0 < position && position < cfg.r_v1) {
        return Err(domain(format!("prover at {position} is not between the verifiers")));
    }
    let (a, x) = (rng.below(d), rng.below(d));
    let psi = fam.vector(a, x);
    let mut ledger = Ledger::new(cfg, &[(Party::Prover, position)]);
    let (ea, eq) = ledger.challenges(Party::Prover, Party::Prover, a);
    let x_hat = measure_in_basis(fam, a, &psi, rng);
    let reply = format!("x={x_hat}");
    ledger.respond(Party::Prover, Party::V0, PayloadKind::Classical, &reply, vec![ea, eq]);
    ledger.respond(Party::Prover, Party::V1, PayloadKind::Classical, &reply, vec![ea, eq]);
    Ok(ledger.finish(a, x, [x_hat, x_hat], 0))
}
