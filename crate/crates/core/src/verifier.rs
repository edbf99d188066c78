//! Numerical certificate that an automaton is a personal symmetric weak PBE.
//!
//! Checks at every state, using one-shot deviations for the politician:
//!
//! * politician: work value minus shirk value (`gap`) is `0` when mixing,
//!   `≥ 0` when working for sure and `≤ 0` when shirking for sure;
//! * voter (not at the initial state): `margin = e(q) − (u₀ − c)` is `0` when
//!   mixing, `≥ 0` when retaining and `≤ 0` when replacing;
//! * Bayes: `|π(q') f_{e(q)}(s) − π(q) f1(s)|` on every edge out of the
//!   initial state or out of a state retained with positive probability.
//!
//! Violations are measured as nonnegative amounts and compared with
//! `tol` plus the value error that can reach the check. On truncated
//! automata, politician checks whose successor values are known no better
//! than `tol` are reported as unverified instead of failing.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::automaton::{AutomatonError, EquilibriumAutomaton, Regime, StateId};
use crate::model::Model;
use crate::values::{compute_values, ValueError, ValueMethod, ValueTable};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_DEPTH: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualCategory {
    PoliticianIc,
    VoterIc,
    Bayes,
    InitialBelief,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateResidual {
    pub state: StateId,
    pub regime: Regime,
    /// Work value minus shirk value.
    pub politician_gap: f64,
    pub politician_violation: f64,
    /// `e(q) − (u₀ − c)`; absent at the initial state.
    pub voter_margin: Option<f64>,
    pub voter_violation: f64,
    pub bayes_residual: f64,
    /// Bound on the error of `politician_gap` from value truncation.
    pub gap_error: f64,
    /// Politician check skipped because `gap_error > tol`.
    pub politician_unverified: bool,
    /// Reached only through certainly-replaced states; voter residuals
    /// here are informational.
    pub vacuous: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Offender {
    pub state: StateId,
    pub regime: Regime,
    pub category: ResidualCategory,
    pub violation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub tol: f64,
    /// Value error at the initial state.
    pub tail_bound: f64,
    /// Largest `tol + gap_error` applied to a politician check.
    pub effective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub passed: bool,
    pub outside_option: f64,
    pub max_politician_violation: f64,
    pub max_voter_violation: f64,
    pub max_bayes_residual: f64,
    pub initial_belief_error: f64,
    /// Politician checks skipped at the truncation frontier.
    pub unverified_states: usize,
    /// Failing residuals, largest first.
    pub worst_offenders: Vec<Offender>,
    /// Residuals above tolerance at vacuous states.
    pub informational: Vec<Offender>,
    pub tolerances: Tolerances,
    pub value_method: ValueMethod,
    pub states: Vec<StateResidual>,
}

impl VerificationReport {
    pub fn failing_categories(&self) -> Vec<ResidualCategory> {
        let mut out: Vec<ResidualCategory> = Vec::new();
        for o in &self.worst_offenders {
            if !out.contains(&o.category) {
                out.push(o.category);
            }
        }
        out
    }

    pub fn max_residual(&self) -> f64 {
        self.max_politician_violation
            .max(self.max_voter_violation)
            .max(self.max_bayes_residual)
            .max(self.initial_belief_error)
    }

    pub fn summary(&self) -> String {
        let mut s = format!(
            "{}: {} states ({} unverified at frontier), u0 = {}, max residuals: politician {:.3e}, voter {:.3e}, bayes {:.3e} (tol {:.1e} + tail {:.1e})",
            if self.passed { "PASSED" } else { "FAILED" },
            self.states.len(),
            self.unverified_states,
            self.outside_option,
            self.max_politician_violation,
            self.max_voter_violation,
            self.max_bayes_residual,
            self.tolerances.tol,
            self.tolerances.tail_bound,
        );
        for o in self.worst_offenders.iter().take(5) {
            s.push_str(&format!(
                "\n  {:?} at state {} ({}): {:.3e}",
                o.category, o.state, o.regime, o.violation
            ));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
    #[error("value tail bound {tail} exceeds tolerance {tol}; increase depth")]
    DepthInsufficient { tail: f64, tol: f64 },
    #[error(transparent)]
    Values(#[from] ValueError),
}

const MAX_OFFENDERS: usize = 20;

pub fn verify(
    automaton: &EquilibriumAutomaton,
    model: &Model,
    tol: f64,
    depth: usize,
) -> Result<VerificationReport, VerifyError> {
    automaton.check_well_formed()?;
    let table = compute_values(automaton, model, depth)?;
    let root = table.errors[automaton.initial()];
    if root > tol {
        return Err(VerifyError::DepthInsufficient { tail: root, tol });
    }
    Ok(verify_with_values(automaton, model, tol, &table))
}

/// Politician work-minus-shirk gap at `q` under `values`, with its error
/// bound. A missing successor's continuation is taken as `1/2 ± 1/2`.
pub fn politician_gap(automaton: &EquilibriumAutomaton, model: &Model, values: &ValueTable, q: StateId) -> (f64, f64) {
    let p = model.params();
    let mon = model.monitoring();
    let (mut diff, mut err) = (0.0, 0.0);
    for s in 0..mon.len() {
        let w = mon.f1()[s] - mon.f0()[s];
        let (cont, e) = match automaton.next(q, s) {
            Some(to) => {
                let keep = 1.0 - automaton.state(to).replace_prob;
                (keep * values.get(to), keep * values.errors[to])
            }
            None => (0.5, 0.5),
        };
        diff += w * cont;
        err += w.abs() * e;
    }
    (-(1.0 - p.delta) * p.kappa + p.delta * diff, p.delta * err)
}

fn verify_with_values(
    automaton: &EquilibriumAutomaton,
    model: &Model,
    tol: f64,
    table: &ValueTable,
) -> VerificationReport {
    let p = model.params();
    let mon = model.monitoring();
    let u0 = automaton.outside_option();
    let target = u0 - p.c;
    let init = automaton.initial();
    let preds = automaton.predecessors();
    let vacuous = |q: StateId| {
        q != init
            && preds[q]
                .iter()
                .all(|&from| from != init && automaton.state(from).replace_prob >= 1.0)
    };

    let mut effective = tol;
    let mut states = Vec::with_capacity(automaton.len());
    let mut offenders = Vec::new();
    let mut informational = Vec::new();
    for st in automaton.states() {
        let q = st.id;
        let (gap, gap_error) = politician_gap(automaton, model, table, q);
        let politician_unverified = gap_error > tol;
        let politician_violation = if st.effort_prob >= 1.0 {
            (-gap).max(0.0)
        } else if st.effort_prob <= 0.0 {
            gap.max(0.0)
        } else {
            gap.abs()
        };

        let (voter_margin, voter_violation) = if q == init {
            (None, 0.0)
        } else {
            let m = st.expected_effort() - target;
            let v = if st.replace_prob <= 0.0 {
                (-m).max(0.0)
            } else if st.replace_prob >= 1.0 {
                m.max(0.0)
            } else {
                m.abs()
            };
            (Some(m), v)
        };

        let mut bayes: f64 = 0.0;
        if q == init || st.replace_prob < 1.0 {
            let e = st.expected_effort();
            for s in 0..mon.len() {
                if let Some(to) = automaton.next(q, s) {
                    let r = (automaton.state(to).belief * mon.prob(e, s) - st.belief * mon.f1()[s]).abs();
                    bayes = bayes.max(r);
                }
            }
        }

        let is_vacuous = vacuous(q);
        if !politician_unverified {
            effective = effective.max(tol + gap_error);
        }
        for (category, violation, limit) in [
            (ResidualCategory::PoliticianIc, politician_violation, tol + gap_error),
            (ResidualCategory::VoterIc, voter_violation, tol),
            (ResidualCategory::Bayes, bayes, tol),
        ] {
            if category == ResidualCategory::PoliticianIc && politician_unverified {
                continue;
            }
            if violation > limit {
                let o = Offender { state: q, regime: st.regime, category, violation };
                if is_vacuous && category == ResidualCategory::VoterIc {
                    informational.push(o);
                } else {
                    offenders.push(o);
                }
            }
        }
        states.push(StateResidual {
            state: q,
            regime: st.regime,
            politician_gap: gap,
            politician_violation,
            voter_margin,
            voter_violation,
            bayes_residual: bayes,
            gap_error,
            politician_unverified,
            vacuous: is_vacuous,
        });
    }

    let initial_belief_error = (automaton.state(init).belief - p.pi0).abs();
    if initial_belief_error > tol {
        offenders.push(Offender {
            state: init,
            regime: automaton.state(init).regime,
            category: ResidualCategory::InitialBelief,
            violation: initial_belief_error,
        });
    }
    offenders.sort_by(|a, b| b.violation.total_cmp(&a.violation));
    let passed = offenders.is_empty();
    offenders.truncate(MAX_OFFENDERS);
    informational.truncate(MAX_OFFENDERS);

    let max_of = |f: fn(&StateResidual) -> f64, skip_vacuous: bool| {
        states
            .iter()
            .filter(|r| !(skip_vacuous && r.vacuous))
            .map(f)
            .fold(0.0, f64::max)
    };
    VerificationReport {
        passed,
        outside_option: u0,
        max_politician_violation: states
            .iter()
            .filter(|r| !r.politician_unverified)
            .map(|r| r.politician_violation)
            .fold(0.0, f64::max),
        max_voter_violation: max_of(|r| r.voter_violation, true),
        max_bayes_residual: max_of(|r| r.bayes_residual, false),
        initial_belief_error,
        unverified_states: states.iter().filter(|r| r.politician_unverified).count(),
        worst_offenders: offenders,
        informational,
        tolerances: Tolerances { tol, tail_bound: table.errors[init], effective },
        value_method: table.method,
        states,
    }
}

/// Deliberately broken variants of the non-EFE construction, each tagged
/// with the residual category expected to fail first.
pub mod mutations {
    use super::ResidualCategory;
    use crate::automaton::{EquilibriumAutomaton, Regime};
    use crate::equilibria::{construct_non_efe, ConstructionError, NonEfeOptions};
    use crate::model::Model;

    #[derive(Debug, Clone)]
    pub struct Mutation {
        pub name: &'static str,
        pub expected: ResidualCategory,
        pub automaton: EquilibriumAutomaton,
    }

    fn first_of(a: &EquilibriumAutomaton, regime: Regime) -> usize {
        a.states().iter().find(|s| s.regime == regime).map(|s| s.id).expect("regime present")
    }

    pub fn catalog(model: &Model) -> Result<Vec<Mutation>, ConstructionError> {
        let (base, params) = construct_non_efe(model, NonEfeOptions::default())?;
        let mut out = Vec::new();

        let mut a = base.clone();
        let init = a.initial();
        a.states_mut()[init].effort_prob += 0.05;
        out.push(Mutation { name: "initial effort +0.05", expected: ResidualCategory::VoterIc, automaton: a });

        let mut a = base.clone();
        let q = first_of(&a, Regime::SecondRegime);
        a.states_mut()[q].replace_prob = 0.1;
        out.push(Mutation { name: "second-regime replacement 0.1", expected: ResidualCategory::VoterIc, automaton: a });

        // effort is adjusted so expected effort, and so voter IC, is unchanged
        let mut a = base.clone();
        let q = first_of(&a, Regime::FirstRegime);
        let st = &mut a.states_mut()[q];
        st.belief += 0.02;
        st.effort_prob = (params.e_star - st.belief) / (1.0 - st.belief);
        out.push(Mutation { name: "first-regime belief +0.02", expected: ResidualCategory::Bayes, automaton: a });

        let mut a = base.clone();
        let q = first_of(&a, Regime::SecondRegime);
        for s in 0..a.signals().len() {
            if !params.s_star.contains(&s) {
                a.rewire(q, s, q);
            }
        }
        out.push(Mutation { name: "second-regime fail edge to self", expected: ResidualCategory::PoliticianIc, automaton: a });

        let mut a = base.clone();
        for st in a.states_mut().iter_mut().filter(|s| s.regime == Regime::FirstRegime) {
            st.replace_prob = (st.replace_prob + 0.05).min(1.0);
        }
        out.push(Mutation { name: "replacement x +0.05", expected: ResidualCategory::PoliticianIc, automaton: a });

        let (a, _) = construct_non_efe(model, NonEfeOptions { a0_override: Some(0.1), ..Default::default() })?;
        out.push(Mutation { name: "initial effort a0 = 0.1", expected: ResidualCategory::VoterIc, automaton: a });
        Ok(out)
    }
}
