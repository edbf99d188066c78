//! Opportunist continuation values on an automaton:
//! `V(q) = (1 − δ)(1 − κ σ_P(q)) + δ Σ_s f_{σ_P(q)}(s) [1 − σ_V(q')] V(q')`
//! with `q'` the successor of `q` on `s`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::automaton::{EquilibriumAutomaton, Regime};
use crate::equilibria::NonEfeParameters;
use crate::model::Model;

/// Default truncation depth for large or truncated automata.
pub const DEFAULT_VALUE_DEPTH: usize = 200;

/// Sweep cap for value iteration; the loop normally stops at a 1e-15 bound.
pub const MAX_SWEEPS: usize = 100_000;

/// Largest automaton solved by a dense linear system.
pub const DENSE_SOLVE_LIMIT: usize = 600;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueMethod {
    LinearSystem,
    Iteration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueTable {
    pub values: Vec<f64>,
    pub method: ValueMethod,
    pub iterations: usize,
    /// Upper bound on `|V − V*|` over all states.
    pub tail_bound: f64,
    /// Per-state bound on `|V(q) − V*(q)|`.
    pub errors: Vec<f64>,
}

impl ValueTable {
    pub fn get(&self, id: usize) -> f64 {
        self.values[id]
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValueError {
    #[error("discount factor {0} is not below 1")]
    NonContractive(f64),
    #[error("tail bound {tail} exceeds requested tolerance {tolerance} after {iterations} iterations")]
    DepthInsufficient { tail: f64, tolerance: f64, iterations: usize },
    #[error("automaton size {automaton} does not match model signals {model}")]
    SignalMismatch { automaton: usize, model: usize },
}

/// Exact solve when possible, otherwise value iteration until the error
/// bound drops below 1e-15 (at most `max(depth, MAX_SWEEPS)` sweeps).
/// Missing transitions are bracketed between continuation values 0 and 1.
pub fn compute_values(
    automaton: &EquilibriumAutomaton,
    model: &Model,
    depth: usize,
) -> Result<ValueTable, ValueError> {
    let delta = model.params().delta;
    if !(delta < 1.0) {
        return Err(ValueError::NonContractive(delta));
    }
    if automaton.signals().len() != model.monitoring().len() {
        return Err(ValueError::SignalMismatch {
            automaton: automaton.signals().len(),
            model: model.monitoring().len(),
        });
    }
    if !automaton.is_truncated() && automaton.len() <= DENSE_SOLVE_LIMIT {
        if let Some(values) = solve_dense(automaton, model) {
            let errors = vec![0.0; values.len()];
            return Ok(ValueTable { values, method: ValueMethod::LinearSystem, iterations: 0, tail_bound: 0.0, errors });
        }
    }
    let sweeps = depth.max(MAX_SWEEPS);
    let (lo, it_lo, r_lo) = iterate(automaton, model, sweeps, 0.0);
    if !automaton.is_truncated() {
        let errors = vec![r_lo; lo.len()];
        return Ok(ValueTable { values: lo, method: ValueMethod::Iteration, iterations: it_lo, tail_bound: r_lo, errors });
    }
    let (hi, it_hi, r_hi) = iterate(automaton, model, sweeps, 1.0);
    let r = r_lo.max(r_hi);
    let errors: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| 0.5 * (h - l).abs() + r).collect();
    let values = lo.iter().zip(&hi).map(|(l, h)| 0.5 * (l + h)).collect();
    Ok(ValueTable {
        values,
        method: ValueMethod::Iteration,
        iterations: it_lo.max(it_hi),
        tail_bound: errors.iter().copied().fold(0.0, f64::max),
        errors,
    })
}

/// Like [`compute_values`] but fails when the tail bound exceeds `tolerance`.
pub fn compute_values_within(
    automaton: &EquilibriumAutomaton,
    model: &Model,
    depth: usize,
    tolerance: f64,
) -> Result<ValueTable, ValueError> {
    let table = compute_values(automaton, model, depth)?;
    if table.tail_bound > tolerance {
        return Err(ValueError::DepthInsufficient {
            tail: table.tail_bound,
            tolerance,
            iterations: table.iterations,
        });
    }
    Ok(table)
}

fn flow(automaton: &EquilibriumAutomaton, model: &Model, q: usize) -> f64 {
    let p = model.params();
    (1.0 - p.delta) * (1.0 - p.kappa * automaton.state(q).effort_prob)
}

fn solve_dense(automaton: &EquilibriumAutomaton, model: &Model) -> Option<Vec<f64>> {
    let n = automaton.len();
    let delta = model.params().delta;
    let mut a = DMatrix::<f64>::identity(n, n);
    let mut b = DVector::<f64>::zeros(n);
    for q in 0..n {
        b[q] = flow(automaton, model, q);
        let sp = automaton.state(q).effort_prob;
        for s in 0..automaton.signals().len() {
            let to = automaton.next(q, s)?;
            let keep = 1.0 - automaton.state(to).replace_prob;
            a[(q, to)] -= delta * model.monitoring().prob(sp, s) * keep;
        }
    }
    a.lu().solve(&b).map(|x| x.iter().copied().collect())
}

/// Value iteration from `V ≡ 0` with missing successors fixed at `missing`.
/// Returns the values, iteration count, and the a-posteriori error bound.
fn iterate(automaton: &EquilibriumAutomaton, model: &Model, depth: usize, missing: f64) -> (Vec<f64>, usize, f64) {
    let n = automaton.len();
    let delta = model.params().delta;
    let mut v = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut bound = 1.0 / (1.0 - delta);
    let mut iterations = 0;
    while iterations < depth.max(1) {
        let mut diff: f64 = 0.0;
        for q in 0..n {
            let sp = automaton.state(q).effort_prob;
            let mut acc = 0.0;
            for s in 0..automaton.signals().len() {
                let prob = model.monitoring().prob(sp, s);
                acc += match automaton.next(q, s) {
                    Some(to) => prob * (1.0 - automaton.state(to).replace_prob) * v[to],
                    None => prob * missing,
                };
            }
            next[q] = flow(automaton, model, q) + delta * acc;
            diff = diff.max((next[q] - v[q]).abs());
        }
        std::mem::swap(&mut v, &mut next);
        iterations += 1;
        bound = delta / (1.0 - delta) * diff;
        if bound < 1e-15 {
            break;
        }
    }
    (v, iterations, bound)
}

/// Largest deviation of a non-EFE value table from its closed forms:
/// `v̂` on Initial/FirstRegime, `v̄` on SecondRegime, `1 − δ` on ThirdRegime.
pub fn non_efe_closed_form_gap(
    automaton: &EquilibriumAutomaton,
    model: &Model,
    params: &NonEfeParameters,
    table: &ValueTable,
) -> f64 {
    let delta = model.params().delta;
    automaton
        .states()
        .iter()
        .map(|st| {
            let target = match st.regime {
                Regime::Initial | Regime::FirstRegime => params.v_hat,
                Regime::SecondRegime => params.v_bar,
                _ => 1.0 - delta,
            };
            (table.get(st.id) - target).abs()
        })
        .fold(0.0, f64::max)
}
