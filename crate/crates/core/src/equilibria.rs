//! The two explicit equilibria available when FEI holds: a full-effort
//! cutoff-test equilibrium and a three-regime equilibrium that never reaches
//! eventual full effort.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::automaton::{EquilibriumAutomaton, Regime, StateId};
use crate::config::ModelConfig;
use crate::fei::{check_fei, CutoffWitness};
use crate::model::Model;

/// Fail-step cap for the lazily generated first-regime tree.
pub const DEFAULT_FIRST_REGIME_DEPTH: usize = 200;

/// First-regime states are merged when their beliefs agree on this grid.
pub const BELIEF_MEMO_GRID: f64 = 1e-12;

/// Bracket width for the bisection on the smallest feasible `a₀`.
pub const A0_BISECTION_TOL: f64 = 1e-10;

/// Default automaton size budget for the non-EFE construction.
pub const DEFAULT_MAX_STATES: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConstructionError {
    #[error("condition FEI fails; no construction is available")]
    FeiFails,
    #[error("replacement cost {c} too large for this construction (limit {limit})")]
    ReplacementCostTooLargeForConstruction { c: f64, limit: f64 },
    #[error("no feasible initial effort a0 in ({lower}, 1)")]
    NoFeasibleA0 { lower: f64 },
    #[error("a0 override {a0} outside ({lower}, 1)")]
    A0OutOfRange { a0: f64, lower: f64 },
    #[error("indifference effort {effort} at belief {belief} is outside (0, 1)")]
    IndifferenceOutOfRange { belief: f64, effort: f64 },
}

/// Closed-form quantities of the three-regime construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonEfeParameters {
    pub lambda: f64,
    pub s_star: Vec<usize>,
    pub f1_star: f64,
    pub f0_star: f64,
    /// Second-regime continuation value.
    pub v_bar: f64,
    /// Value after a fail signal at which the opportunist is indifferent.
    pub v_tilde: f64,
    /// First-regime continuation value.
    pub v_hat: f64,
    /// First-regime replacement probability `1 − ṽ / v̂`.
    pub x: f64,
    pub a_min: f64,
    pub a0: f64,
    /// Voter target in the first regime: `π₀ + (1 − π₀) a₀ − c`.
    pub e_star: f64,
}

impl NonEfeParameters {
    pub fn from_witness(model: &Model, w: &CutoffWitness) -> Self {
        let p = model.params();
        let (d, k) = (p.delta, p.kappa);
        let v_bar = w.v_bar;
        let v_tilde = (v_bar - (1.0 - d) / d * k / (w.f1_star - w.f0_star)).max(0.0);
        let v_hat = (1.0 - d) * (1.0 - k) + d * (w.f1_star * v_bar + (1.0 - w.f1_star) * v_tilde);
        Self {
            lambda: w.lambda,
            s_star: w.s_star.clone(),
            f1_star: w.f1_star,
            f0_star: w.f0_star,
            v_bar,
            v_tilde,
            v_hat,
            x: 1.0 - v_tilde / v_hat,
            a_min: f64::NAN,
            a0: f64::NAN,
            e_star: f64::NAN,
        }
    }

    /// Residuals of the defining identities, in order: second-regime
    /// promise keeping, work-side and shirk-side first-regime values.
    pub fn identity_residuals(&self, model: &Model) -> [f64; 3] {
        let p = model.params();
        let (d, k) = (p.delta, p.kappa);
        let cont = (1.0 - self.x) * self.v_hat;
        [
            ((1.0 - d) * (1.0 - k) + d * self.f1_star * self.v_bar - self.v_bar).abs(),
            ((1.0 - d) * (1.0 - k) + d * (self.f1_star * self.v_bar + (1.0 - self.f1_star) * cont)
                - self.v_hat)
                .abs(),
            ((1.0 - d) + d * (self.f0_star * self.v_bar + (1.0 - self.f0_star) * cont) - self.v_hat).abs(),
        ]
    }

    /// Second-regime incentive slack `v̄ − [(1 − δ) + δ f0* v̄]`.
    pub fn second_regime_ic_slack(&self, model: &Model) -> f64 {
        let d = model.params().delta;
        self.v_bar - ((1.0 - d) + d * self.f0_star * self.v_bar)
    }
}

fn fei_witness(model: &Model) -> Result<CutoffWitness, ConstructionError> {
    check_fei(model).witness.ok_or(ConstructionError::FeiFails)
}

/// Pass/Dead automaton: retain and work after pass signals, replace for
/// sure after any other signal. After a fail signal the belief stays at
/// `π₀` (Bayes under full effort); later off-path beliefs are 0.
pub fn construct_full_effort(model: &Model) -> Result<EquilibriumAutomaton, ConstructionError> {
    let w = fei_witness(model)?;
    let p = model.params();
    if p.c > 1.0 - p.pi0 {
        return Err(ConstructionError::ReplacementCostTooLargeForConstruction { c: p.c, limit: 1.0 - p.pi0 });
    }
    let n = model.monitoring().len();
    let mut a = EquilibriumAutomaton::new(model.monitoring().signals().to_vec(), 0);
    let pass = a.add_state(Regime::Pass, 0.0, 1.0, p.pi0);
    let fired = a.add_state(Regime::Dead, 1.0, 0.0, p.pi0);
    let dead = a.add_state(Regime::Dead, 1.0, 0.0, 0.0);
    for s in 0..n {
        a.set_transition(pass, s, if w.passes(s) { pass } else { fired });
        a.set_transition(fired, s, dead);
        a.set_transition(dead, s, dead);
    }
    Ok(a.with_params_echo(ModelConfig::from_model(model)))
}

/// `max_s β_a(π₀ | s) ≤ π₀ + (1 − π₀) a − c`: third-regime voters prefer
/// replacement at every reachable reputation.
pub fn a0_feasible(model: &Model, a: f64) -> bool {
    let p = model.params();
    let lhs = (0..model.monitoring().len())
        .map(|s| model.posterior(p.pi0, a, s))
        .fold(f64::NEG_INFINITY, f64::max);
    lhs <= p.pi0 + (1.0 - p.pi0) * a - p.c
}

/// Smallest feasible `a₀` in `(c / (1 − π₀), 1)` by bisection.
pub fn smallest_feasible_a0(model: &Model) -> Result<f64, ConstructionError> {
    let p = model.params();
    let lower = p.c / (1.0 - p.pi0);
    if a0_feasible(model, lower) {
        return Ok(lower);
    }
    let mut hi = 1.0 - 1e-12;
    if !a0_feasible(model, hi) {
        return Err(ConstructionError::NoFeasibleA0 { lower });
    }
    let mut lo = lower;
    while hi - lo > A0_BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if a0_feasible(model, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonEfeOptions {
    pub a0_override: Option<f64>,
    /// Cap on consecutive fail steps in the first regime.
    pub depth: usize,
    /// Cap on automaton size; with several fail signals the first-regime
    /// tree grows polynomially in `depth`.
    pub max_states: usize,
}

impl Default for NonEfeOptions {
    fn default() -> Self {
        Self { a0_override: None, depth: DEFAULT_FIRST_REGIME_DEPTH, max_states: DEFAULT_MAX_STATES }
    }
}

fn memo_key(belief: f64) -> i64 {
    (belief / BELIEF_MEMO_GRID).round() as i64
}

struct NonEfeBuilder<'a> {
    model: &'a Model,
    params: &'a NonEfeParameters,
    automaton: EquilibriumAutomaton,
    first: HashMap<i64, StateId>,
    second: HashMap<i64, StateId>,
    third: HashMap<i64, StateId>,
    third_dead: Option<StateId>,
}

impl NonEfeBuilder<'_> {
    fn first_regime(&mut self, belief: f64, queue: &mut Vec<(StateId, usize)>, depth: usize) -> Result<StateId, ConstructionError> {
        let key = memo_key(belief);
        if let Some(&id) = self.first.get(&key) {
            return Ok(id);
        }
        let effort = (self.params.e_star - belief) / (1.0 - belief);
        if !(effort > 0.0 && effort < 1.0) {
            return Err(ConstructionError::IndifferenceOutOfRange { belief, effort });
        }
        let id = self.automaton.add_state(Regime::FirstRegime, self.params.x, effort, belief);
        self.first.insert(key, id);
        queue.push((id, depth));
        Ok(id)
    }

    fn third_dead(&mut self) -> StateId {
        if let Some(id) = self.third_dead {
            return id;
        }
        let id = self.automaton.add_state(Regime::ThirdRegime, 1.0, 0.0, 0.0);
        for s in 0..self.model.monitoring().len() {
            self.automaton.set_transition(id, s, id);
        }
        self.third_dead = Some(id);
        id
    }

    fn third_regime(&mut self, belief: f64) -> StateId {
        let key = memo_key(belief);
        if let Some(&id) = self.third.get(&key) {
            return id;
        }
        let id = self.automaton.add_state(Regime::ThirdRegime, 1.0, 0.0, belief);
        self.third.insert(key, id);
        let dead = self.third_dead();
        for s in 0..self.model.monitoring().len() {
            self.automaton.set_transition(id, s, dead);
        }
        id
    }

    fn second_regime(&mut self, belief: f64) -> StateId {
        let key = memo_key(belief);
        if let Some(&id) = self.second.get(&key) {
            return id;
        }
        let id = self.automaton.add_state(Regime::SecondRegime, 0.0, 1.0, belief);
        self.second.insert(key, id);
        // Bayes under full effort freezes the belief on both branches.
        let third = self.third_regime(belief);
        for s in 0..self.model.monitoring().len() {
            let to = if self.params.s_star.binary_search(&s).is_ok() { id } else { third };
            self.automaton.set_transition(id, s, to);
        }
        id
    }
}

/// Three-regime automaton: mixing before the first pass signal, full effort
/// and retention after it, certain replacement after a later fail.
pub fn construct_non_efe(
    model: &Model,
    options: NonEfeOptions,
) -> Result<(EquilibriumAutomaton, NonEfeParameters), ConstructionError> {
    let w = fei_witness(model)?;
    let p = *model.params();
    if p.c >= 1.0 - p.pi0 {
        return Err(ConstructionError::ReplacementCostTooLargeForConstruction { c: p.c, limit: 1.0 - p.pi0 });
    }
    let mut params = NonEfeParameters::from_witness(model, &w);
    let lower = p.c / (1.0 - p.pi0);
    params.a_min = smallest_feasible_a0(model)?;
    params.a0 = match options.a0_override {
        Some(a0) if a0 > lower && a0 < 1.0 => a0,
        Some(a0) => return Err(ConstructionError::A0OutOfRange { a0, lower }),
        None => 0.5 * (1.0 + params.a_min),
    };
    params.e_star = p.pi0 + (1.0 - p.pi0) * params.a0 - p.c;

    let n = model.monitoring().len();
    let mut builder = NonEfeBuilder {
        model,
        params: &params,
        automaton: EquilibriumAutomaton::new(model.monitoring().signals().to_vec(), 0),
        first: HashMap::new(),
        second: HashMap::new(),
        third: HashMap::new(),
        third_dead: None,
    };
    let initial = builder.automaton.add_state(Regime::Initial, 0.0, params.a0, p.pi0);
    let mut queue: Vec<(StateId, usize)> = vec![(initial, 0)];
    let mut head = 0;
    while head < queue.len() {
        let (q, depth) = queue[head];
        head += 1;
        let st = builder.automaton.state(q).clone();
        for s in 0..n {
            let next_belief = model.posterior(st.belief, st.effort_prob, s);
            let to = if params.s_star.binary_search(&s).is_ok() {
                Some(builder.second_regime(next_belief))
            } else if (depth < options.depth && builder.automaton.len() + 3 <= options.max_states)
                || builder.first.contains_key(&memo_key(next_belief))
            {
                Some(builder.first_regime(next_belief, &mut queue, depth + 1)?)
            } else {
                None
            };
            if let Some(to) = to {
                builder.automaton.set_transition(q, s, to);
            }
        }
    }
    let automaton = builder.automaton.with_params_echo(ModelConfig::from_model(model));
    Ok((automaton, params))
}
