//! Model primitives: monitoring structures, game parameters, and the belief
//! operators every other module builds on.
//!
//! Period order (binding for construction, verification and simulation): at
//! every period `t > 0` the voter first replaces the incumbent with the
//! probability attached to the incumbent's career history; the incumbent in
//! office (possibly just installed, at the empty history) then acts, and the
//! resulting signal is appended to his career history. Period 0 has no vote.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance for simplex sums.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// Ordered signal alphabet with the shirk (`f0`) and work (`f1`) distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitoringStructure {
    signals: Vec<String>,
    f0: Vec<f64>,
    f1: Vec<f64>,
}

impl MonitoringStructure {
    /// Raw constructor. Checks only that the three vectors line up; the
    /// probabilistic assumptions are enforced by [`Model::validate`].
    pub fn new(signals: Vec<String>, f0: Vec<f64>, f1: Vec<f64>) -> Result<Self, ModelError> {
        if signals.is_empty() {
            return Err(ModelError::Invalid(vec![Violation::EmptySignals]));
        }
        if f0.len() != signals.len() || f1.len() != signals.len() {
            return Err(ModelError::Invalid(vec![Violation::LengthMismatch {
                signals: signals.len(),
                f0: f0.len(),
                f1: f1.len(),
            }]));
        }
        Ok(Self { signals, f0, f1 })
    }

    /// Two signals `Fail`, `Pass` with `f_a(a) = p`: Pass is the signal
    /// matching the action, so `f1(Pass) = p` and `f0(Fail) = p`.
    pub fn binary(precision: f64) -> Self {
        Self {
            signals: vec!["Fail".to_string(), "Pass".to_string()],
            f0: vec![precision, 1.0 - precision],
            f1: vec![1.0 - precision, precision],
        }
    }

    pub fn len(&self) -> usize {
        self.signals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signals.is_empty()
    }

    pub fn signals(&self) -> &[String] {
        &self.signals
    }

    pub fn signal_index(&self, name: &str) -> Option<usize> {
        self.signals.iter().position(|s| s == name)
    }

    pub fn f0(&self) -> &[f64] {
        &self.f0
    }

    pub fn f1(&self) -> &[f64] {
        &self.f1
    }

    /// `f_a(s) = a f1(s) + (1 - a) f0(s)` for a work probability `a`.
    #[inline]
    pub fn prob(&self, a: f64, s: usize) -> f64 {
        a * self.f1[s] + (1.0 - a) * self.f0[s]
    }

    /// Likelihood ratio `f0(s) / f1(s)`; small values are good news.
    #[inline]
    pub fn likelihood_ratio(&self, s: usize) -> f64 {
        self.f0[s] / self.f1[s]
    }

    /// `λ = min_s f0(s) / f1(s)`.
    pub fn min_likelihood_ratio(&self) -> f64 {
        (0..self.len())
            .map(|s| self.likelihood_ratio(s))
            .fold(f64::INFINITY, f64::min)
    }

    fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (which, dist) in [(Distribution::Shirk, &self.f0), (Distribution::Work, &self.f1)] {
            let sum: f64 = dist.iter().sum();
            if (sum - 1.0).abs() > SIMPLEX_TOL || dist.iter().any(|p| !(*p >= 0.0)) {
                out.push(Violation::NonSimplex { which, sum });
            }
        }
        for (s, p) in self.f1.iter().enumerate() {
            if !(*p > 0.0) {
                out.push(Violation::MissingFullSupport {
                    signal: self.signals[s].clone(),
                });
            }
        }
        if self.f0 == self.f1 {
            out.push(Violation::UninformativeMonitoring);
        }
        for (i, name) in self.signals.iter().enumerate() {
            if self.signals[..i].contains(name) {
                out.push(Violation::DuplicateSignal { name: name.clone() });
            }
        }
        out
    }
}

/// `(κ, δ, π₀, c)`: effort cost, politician discount factor, prior on the
/// good type, replacement cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GameParams {
    pub kappa: f64,
    pub delta: f64,
    pub pi0: f64,
    pub c: f64,
}

impl GameParams {
    pub fn new(kappa: f64, delta: f64, pi0: f64, c: f64) -> Self {
        Self { kappa, delta, pi0, c }
    }

    fn violations(&self, level: ValidationLevel) -> Vec<Violation> {
        let mut out = Vec::new();
        let open_unit = |name: &'static str, value: f64, out: &mut Vec<Violation>| {
            if !(value > 0.0 && value < 1.0) {
                out.push(Violation::OutOfRange { name, value });
            }
        };
        open_unit("kappa", self.kappa, &mut out);
        open_unit("delta", self.delta, &mut out);
        open_unit("pi0", self.pi0, &mut out);
        if !(self.c >= 0.0) || !self.c.is_finite() {
            out.push(Violation::OutOfRange { name: "c", value: self.c });
        }
        if level == ValidationLevel::Strict {
            let limit = self.pi0.min(1.0 - self.pi0);
            if self.c >= limit {
                out.push(Violation::ReplacementCostTooLarge { c: self.c, limit });
            }
        }
        out
    }
}

/// How strictly [`Model::validate`] treats the replacement-cost bound
/// `c < min(π₀, 1 − π₀)`. The outside-option bounds do not need it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValidationLevel {
    Strict,
    Relaxed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Distribution {
    Shirk,
    Work,
}

/// A single failed model assumption.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Error)]
#[serde(tag = "kind")]
pub enum Violation {
    #[error("signal alphabet is empty")]
    EmptySignals,
    #[error("length mismatch: {signals} signals, {f0} f0 entries, {f1} f1 entries")]
    LengthMismatch { signals: usize, f0: usize, f1: usize },
    #[error("duplicate signal name {name:?}")]
    DuplicateSignal { name: String },
    #[error("{which:?} distribution is not a probability vector (sum {sum})")]
    NonSimplex { which: Distribution, sum: f64 },
    #[error("signal {signal:?} has zero probability under effort")]
    MissingFullSupport { signal: String },
    #[error("f0 equals f1: monitoring is uninformative")]
    UninformativeMonitoring,
    #[error("parameter {name} = {value} out of range")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("replacement cost c = {c} must be below min(pi0, 1 - pi0) = {limit}")]
    ReplacementCostTooLarge { c: f64, limit: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid model: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("belief {0} outside the operator domain (0, 1]")]
    BeliefDomain(f64),
    #[error("work probability {0} outside [0, 1]")]
    EffortDomain(f64),
    #[error("unknown signal index {0}")]
    UnknownSignal(usize),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

/// Probability in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Belief(f64);

impl Belief {
    pub fn new(value: f64) -> Option<Self> {
        (0.0..=1.0).contains(&value).then_some(Self(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// A validated, immutable (monitoring, parameters) pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Model {
    monitoring: MonitoringStructure,
    params: GameParams,
    level: ValidationLevel,
}

impl Model {
    pub fn validate(
        monitoring: MonitoringStructure,
        params: GameParams,
        level: ValidationLevel,
    ) -> Result<Self, ModelError> {
        let mut violations = monitoring.violations();
        violations.extend(params.violations(level));
        if violations.is_empty() {
            Ok(Self { monitoring, params, level })
        } else {
            Err(ModelError::Invalid(violations))
        }
    }

    pub fn monitoring(&self) -> &MonitoringStructure {
        &self.monitoring
    }

    pub fn params(&self) -> &GameParams {
        &self.params
    }

    pub fn level(&self) -> ValidationLevel {
        self.level
    }

    /// Same monitoring with different parameters, validated at `level`.
    pub fn with_params(&self, params: GameParams, level: ValidationLevel) -> Result<Self, ModelError> {
        Self::validate(self.monitoring.clone(), params, level)
    }

    /// Posterior `β_a(π | s)` without domain checks. `pi` must be in `(0, 1]`.
    #[inline]
    pub fn posterior(&self, pi: f64, a: f64, s: usize) -> f64 {
        let f1 = self.monitoring.f1[s];
        let f0 = self.monitoring.f0[s];
        pi * f1 / ((pi + (1.0 - pi) * a) * f1 + (1.0 - pi) * (1.0 - a) * f0)
    }

    /// Bayesian update of reputation `pi` after signal `s` when the
    /// opportunistic type works with probability `a`.
    pub fn bayes_update(&self, pi: Belief, a: f64, s: usize) -> Result<Belief, ModelError> {
        if !(pi.0 > 0.0) {
            return Err(ModelError::BeliefDomain(pi.0));
        }
        if !(0.0..=1.0).contains(&a) {
            return Err(ModelError::EffortDomain(a));
        }
        if s >= self.monitoring.len() {
            return Err(ModelError::UnknownSignal(s));
        }
        Ok(Belief(self.posterior(pi.0, a, s).min(1.0)))
    }

    /// Highest posterior reachable in one period when opportunists work with
    /// probability at least `eta`: `π / (π + (1 − π)[η + (1 − η)λ])`.
    pub fn max_update(&self, pi: Belief, eta: f64) -> Result<Belief, ModelError> {
        if !(pi.0 > 0.0) {
            return Err(ModelError::BeliefDomain(pi.0));
        }
        if !(0.0..=1.0).contains(&eta) {
            return Err(ModelError::EffortDomain(eta));
        }
        Ok(Belief(self.max_update_raw(pi.0, eta)))
    }

    #[inline]
    fn max_update_raw(&self, pi: f64, eta: f64) -> f64 {
        let lambda = self.monitoring.min_likelihood_ratio();
        pi / (pi + (1.0 - pi) * (eta + (1.0 - eta) * lambda))
    }

    /// `t`-fold composition of [`Model::max_update`].
    pub fn iterated_max_update(&self, pi: Belief, eta: f64, t: u32) -> Result<Belief, ModelError> {
        let mut b = pi;
        for _ in 0..t {
            b = self.max_update(b, eta)?;
        }
        Ok(b)
    }
}

/// Right-hand side of the belief growth bound:
/// `(π + (1 − π) η^{t+1}) / (π + (1 − π) η^t)`.
pub fn belief_growth_bound(pi: f64, eta: f64, t: u32) -> f64 {
    let et = eta.powi(t as i32);
    (pi + (1.0 - pi) * et * eta) / (pi + (1.0 - pi) * et)
}

/// Checks `B̄ᵗ(π) + [1 − B̄ᵗ(π)] η ≤ bound(π, η, t)` and that the bound is
/// increasing from `t` to `t + 1`. Holds for every monitoring structure
/// because `λ ≤ 1`.
pub fn belief_growth_bound_holds(model: &Model, pi: f64, eta: f64, t: u32) -> bool {
    let Some(b) = Belief::new(pi) else { return false };
    let Ok(bt) = model.iterated_max_update(b, eta, t) else {
        return false;
    };
    let lhs = bt.value() + (1.0 - bt.value()) * eta;
    let rhs = belief_growth_bound(pi, eta, t);
    let slack = 1e-12 * rhs.max(1.0);
    lhs <= rhs + slack && belief_growth_bound(pi, eta, t + 1) >= rhs - slack
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> Model {
        Model::validate(
            MonitoringStructure::binary(0.75),
            GameParams::new(0.2, 0.5, 0.3, 0.05),
            ValidationLevel::Strict,
        )
        .unwrap()
    }

    fn b(x: f64) -> Belief {
        Belief::new(x).unwrap()
    }

    #[test]
    fn reference_instance_is_valid() {
        let m = reference();
        assert_eq!(m.monitoring().signal_index("Pass"), Some(1));
        assert!((m.monitoring().min_likelihood_ratio() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn uninformative_monitoring_rejected() {
        let mon =
            MonitoringStructure::new(vec!["a".into(), "b".into()], vec![0.5, 0.5], vec![0.5, 0.5]).unwrap();
        let err = Model::validate(mon, GameParams::new(0.2, 0.5, 0.3, 0.05), ValidationLevel::Strict)
            .unwrap_err();
        assert_eq!(err, ModelError::Invalid(vec![Violation::UninformativeMonitoring]));
    }

    #[test]
    fn replacement_cost_only_checked_when_strict() {
        let params = GameParams::new(0.2, 0.5, 0.3, 0.4);
        let err = Model::validate(MonitoringStructure::binary(0.75), params, ValidationLevel::Strict)
            .unwrap_err();
        assert!(matches!(
            err,
            ModelError::Invalid(ref v) if matches!(v[..], [Violation::ReplacementCostTooLarge { .. }])
        ));
        assert!(Model::validate(MonitoringStructure::binary(0.75), params, ValidationLevel::Relaxed).is_ok());
    }

    #[test]
    fn collects_every_violation() {
        let mon = MonitoringStructure::new(
            vec!["x".into(), "x".into()],
            vec![0.7, 0.4],
            vec![1.0, 0.0],
        )
        .unwrap();
        let err = Model::validate(mon, GameParams::new(1.5, 0.5, 0.3, 0.0), ValidationLevel::Strict)
            .unwrap_err();
        let ModelError::Invalid(v) = err else { panic!() };
        assert!(v.iter().any(|x| matches!(x, Violation::NonSimplex { which: Distribution::Shirk, .. })));
        assert!(v.iter().any(|x| matches!(x, Violation::MissingFullSupport { .. })));
        assert!(v.iter().any(|x| matches!(x, Violation::DuplicateSignal { .. })));
        assert!(v.iter().any(|x| matches!(x, Violation::OutOfRange { name: "kappa", .. })));
    }

    #[test]
    fn zero_shirk_probability_is_allowed() {
        let mon = MonitoringStructure::new(
            vec!["bad".into(), "great".into()],
            vec![1.0, 0.0],
            vec![0.4, 0.6],
        )
        .unwrap();
        let m = Model::validate(mon, GameParams::new(0.2, 0.5, 0.3, 0.05), ValidationLevel::Strict).unwrap();
        assert_eq!(m.monitoring().min_likelihood_ratio(), 0.0);
        assert_eq!(m.max_update(b(0.3), 0.0).unwrap().value(), 1.0);
    }

    #[test]
    fn pooling_update_is_identity() {
        let m = reference();
        for pi in [0.01, 0.3, 0.9] {
            for s in 0..2 {
                assert!((m.bayes_update(b(pi), 1.0, s).unwrap().value() - pi).abs() < 1e-15);
            }
        }
        for a in [0.0, 0.4, 1.0] {
            assert_eq!(m.bayes_update(b(1.0), a, 0).unwrap().value(), 1.0);
        }
    }

    #[test]
    fn shirking_opportunist_pass_update() {
        // 0.5 * 0.75 / (0.5 * 0.75 + 0.5 * 0.25)
        let m = reference();
        assert!((m.bayes_update(b(0.5), 0.0, 1).unwrap().value() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn zero_belief_rejected() {
        let m = reference();
        assert_eq!(m.bayes_update(b(0.0), 0.5, 0), Err(ModelError::BeliefDomain(0.0)));
        assert!(m.max_update(b(0.0), 0.5).is_err());
    }

    #[test]
    fn max_update_examples() {
        let m = reference();
        assert!((m.max_update(b(0.42), 1.0).unwrap().value() - 0.42).abs() < 1e-15);
        assert!((m.max_update(b(0.5), 0.0).unwrap().value() - 0.75).abs() < 1e-15);
        // grid maximum over a in [0.5, 1], step 1e-4
        let mut best: f64 = 0.0;
        for i in 0..=5000 {
            let a = 0.5 + i as f64 * 1e-4;
            for s in 0..2 {
                best = best.max(m.posterior(0.3, a, s));
            }
        }
        assert!((m.max_update(b(0.3), 0.5).unwrap().value() - best).abs() < 1e-12);
    }

    #[test]
    fn iterated_max_update_composes() {
        let m = reference();
        assert_eq!(m.iterated_max_update(b(0.3), 0.5, 0).unwrap(), b(0.3));
        let once = m.max_update(b(0.3), 0.5).unwrap();
        assert_eq!(m.iterated_max_update(b(0.3), 0.5, 1).unwrap(), once);
        let twice = m.max_update(once, 0.5).unwrap();
        assert_eq!(m.iterated_max_update(b(0.3), 0.5, 2).unwrap(), twice);
    }

    #[test]
    fn growth_bound_examples() {
        assert!((belief_growth_bound(0.3, 0.5, 2) - 0.3875 / 0.475).abs() < 1e-15);
        assert!((belief_growth_bound(0.3, 0.5, 0) - (0.3 + 0.7 * 0.5)).abs() < 1e-15);
        assert!(belief_growth_bound_holds(&reference(), 0.3, 0.5, 2));
    }
}
