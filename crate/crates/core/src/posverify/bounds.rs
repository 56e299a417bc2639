//! Soundness calculators for the single-round protocol and its sequential
//! composition.

use serde::Serialize;

use super::CommunicationClass;
use crate::error::{domain, Result};
use crate::lowerbound::BoundValue;

/// Soundness bound under stated assumptions, optionally with a simulated
/// acceptance rate for comparison.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SoundnessReport {
    pub protocol: String,
    /// Ebits shared by the adversaries.
    pub ebits: usize,
    pub communication: CommunicationClass,
    pub bound: f64,
    /// The bound is at least 1 and says nothing.
    pub vacuous: bool,
    pub estimate: Option<f64>,
    pub stderr: Option<f64>,
}

impl SoundnessReport {
    pub fn with_estimate(mut self, estimate: f64, stderr: f64) -> Self {
        self.estimate = Some(estimate);
        self.stderr = Some(stderr);
        self
    }
}

/// `2 · 2^(m - n/2)` for adversaries with `m` ebits and classical
/// communication; requires `n > 1`.
pub fn soundness_limited(n: usize, m: usize) -> Result<SoundnessReport> {
    if n <= 1 {
        return Err(domain(format!("the limited-entanglement bound needs n > 1, got {n}")));
    }
    let bound = 2.0 * (m as f64 - n as f64 / 2.0).exp2();
    Ok(SoundnessReport {
        protocol: format!("pi_{n}"),
        ebits: m,
        communication: CommunicationClass::Classical,
        bound,
        vacuous: bound >= 1.0,
        estimate: None,
        stderr: None,
    })
}

/// `dim A' · dim B' · eps0`: soundness with a shared state on `A'B'` given
/// soundness `eps0` without entanglement.
pub fn reduction_bound(eps0: f64, dim_a: usize, dim_b: usize) -> Result<BoundValue> {
    if !(0.0..=1.0).contains(&eps0) {
        return Err(domain(format!("eps0 = {eps0} must lie in [0, 1]")));
    }
    if dim_a == 0 || dim_b == 0 {
        return Err(domain("register dimensions must be positive"));
    }
    let value = dim_a as f64 * dim_b as f64 * eps0;
    Ok(BoundValue { value, vacuous: value >= 1.0 })
}

/// `h(p) = -p log2 p - (1-p) log2 (1-p)`.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |q: f64| if q <= 0.0 { 0.0 } else { -q * q.log2() };
    term(p) + term(1.0 - p)
}

/// Inverse of `h` on `[0, 1/2]` by bisection on `[1e-15, 1/2]`, 200 steps.
pub fn inverse_binary_entropy(y: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&y) {
        return Err(domain(format!("binary entropy takes values in [0, 1], got {y}")));
    }
    let (mut lo, mut hi) = (1e-15, 0.5);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if binary_entropy(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `1 - h^{-1}(1/2)`, the no-entanglement soundness of the one-qubit protocol.
pub fn single_round_bound() -> f64 {
    1.0 - inverse_binary_entropy(0.5).expect("1/2 is in range")
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CompositionPlan {
    /// Ebits per adversary.
    pub k: usize,
    pub eps: f64,
    pub delta: f64,
    /// Number of sequential rounds.
    pub rounds: usize,
    /// `delta^L`, the composed soundness without entanglement.
    pub sequential_bound: f64,
    /// `4^k delta^L`, the composed soundness with `k` ebits per side.
    pub entangled_bound: f64,
    /// `entangled_bound <= eps`.
    pub holds: bool,
}

/// Smallest `L >= (2k + log2(1/eps)) / log2(1/delta)` and the resulting bounds.
pub fn composition_plan(k: usize, eps: f64) -> Result<CompositionPlan> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(domain(format!("eps = {eps} must lie in (0, 1)")));
    }
    let delta = single_round_bound();
    let ratio = (2.0 * k as f64 + (1.0 / eps).log2()) / (1.0 / delta).log2();
    let rounds = ((ratio - 1e-12).ceil() as usize).max(1);
    let sequential_bound = delta.powi(rounds as i32);
    let entangled_bound = (2.0 * k as f64 + rounds as f64 * delta.log2()).exp2();
    Ok(CompositionPlan {
        k,
        eps,
        delta,
        rounds,
        sequential_bound,
        entangled_bound,
        holds: entangled_bound <= eps * (1.0 + 1e-12),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_endpoints() {
        assert_eq!(binary_entropy(0.0), 0.0);
        assert!((binary_entropy(0.5) - 1.0).abs() < 1e-15);
        assert!(inverse_binary_entropy(1.5).is_err());
    }

    #[test]
    fn composition_boundary() {
        let delta = single_round_bound();
        let plan = composition_plan(0, delta).unwrap();
        assert_eq!(plan.rounds, 1);
        assert!(plan.holds);
        assert!(composition_plan(1, 0.0).is_err());
    }
}
