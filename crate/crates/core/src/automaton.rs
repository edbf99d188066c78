//! Strategy automata: finite (or lazily truncated) state machines over career
//! histories carrying the voter's replacement probability, the opportunist's
//! effort probability and the reputation at each state.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::ModelConfig;

pub type StateId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    Initial,
    FirstRegime,
    SecondRegime,
    ThirdRegime,
    Pass,
    Dead,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// One automaton state. `replace_prob` is applied by the voter when the
/// incumbent arrives at this state (it is ignored at the initial state).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutomatonState {
    pub id: StateId,
    pub regime: Regime,
    pub replace_prob: f64,
    pub effort_prob: f64,
    pub belief: f64,
}

impl AutomatonState {
    /// `e = π + (1 − π) σ_P`.
    pub fn expected_effort(&self) -> f64 {
        self.belief + (1.0 - self.belief) * self.effort_prob
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AutomatonError {
    #[error("state {0} does not exist")]
    UnknownState(StateId),
    #[error("state ids must be 0..n in order; found {found} at position {position}")]
    NonContiguousIds { position: usize, found: StateId },
    #[error("transition from {from} names unknown signal {signal:?}")]
    UnknownSignal { from: StateId, signal: String },
    #[error("duplicate transition from {from} on {signal:?}")]
    DuplicateTransition { from: StateId, signal: String },
    #[error("state {state} has {field} = {value} outside [0, 1]")]
    ProbabilityOutOfRange { state: StateId, field: &'static str, value: f64 },
    #[error("automaton has no params_echo and no model was supplied")]
    MissingModel,
    #[error("failed to parse automaton: {0}")]
    Parse(String),
}

/// Transition on `(state, signal)`; `None` marks an unmaterialised branch
/// beyond the generation depth.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumAutomaton {
    signals: Vec<String>,
    states: Vec<AutomatonState>,
    transitions: Vec<Vec<Option<StateId>>>,
    initial: StateId,
    params_echo: Option<ModelConfig>,
}

impl EquilibriumAutomaton {
    pub fn new(signals: Vec<String>, initial: StateId) -> Self {
        Self { signals, states: Vec::new(), transitions: Vec::new(), initial, params_echo: None }
    }

    pub fn add_state(&mut self, regime: Regime, replace_prob: f64, effort_prob: f64, belief: f64) -> StateId {
        let id = self.states.len();
        self.states.push(AutomatonState { id, regime, replace_prob, effort_prob, belief });
        self.transitions.push(vec![None; self.signals.len()]);
        id
    }

    pub fn set_transition(&mut self, from: StateId, signal: usize, to: StateId) {
        self.transitions[from][signal] = Some(to);
    }

    pub fn with_params_echo(mut self, echo: ModelConfig) -> Self {
        self.params_echo = Some(echo);
        self
    }

    pub fn params_echo(&self) -> Option<&ModelConfig> {
        self.params_echo.as_ref()
    }

    pub fn signals(&self) -> &[String] {
        &self.signals
    }

    pub fn states(&self) -> &[AutomatonState] {
        &self.states
    }

    pub fn states_mut(&mut self) -> &mut [AutomatonState] {
        &mut self.states
    }

    pub fn state(&self, id: StateId) -> &AutomatonState {
        &self.states[id]
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn next(&self, from: StateId, signal: usize) -> Option<StateId> {
        self.transitions[from][signal]
    }

    /// True when every signal has a materialised successor at `id`.
    pub fn is_expanded(&self, id: StateId) -> bool {
        self.transitions[id].iter().all(Option::is_some)
    }

    /// True when some transition is missing anywhere.
    pub fn is_truncated(&self) -> bool {
        (0..self.len()).any(|id| !self.is_expanded(id))
    }

    /// Expected effort at a state; at the initial state this is the voters'
    /// outside option `u₀`.
    pub fn expected_effort(&self, id: StateId) -> Result<f64, AutomatonError> {
        self.states
            .get(id)
            .map(AutomatonState::expected_effort)
            .ok_or(AutomatonError::UnknownState(id))
    }

    pub fn outside_option(&self) -> f64 {
        self.states[self.initial].expected_effort()
    }

    /// States reachable from the initial state through materialised edges.
    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut stack = vec![self.initial];
        seen[self.initial] = true;
        while let Some(q) = stack.pop() {
            for t in self.transitions[q].iter().flatten() {
                if !seen[*t] {
                    seen[*t] = true;
                    stack.push(*t);
                }
            }
        }
        seen
    }

    /// Predecessor lists over materialised edges (with multiplicity dropped).
    pub fn predecessors(&self) -> Vec<Vec<StateId>> {
        let mut preds = vec![Vec::new(); self.len()];
        for (from, row) in self.transitions.iter().enumerate() {
            for to in row.iter().flatten() {
                if !preds[*to].contains(&from) {
                    preds[*to].push(from);
                }
            }
        }
        preds
    }

    /// Checks ids, ranges, and that the initial state exists.
    pub fn check_well_formed(&self) -> Result<(), AutomatonError> {
        if self.initial >= self.len() {
            return Err(AutomatonError::UnknownState(self.initial));
        }
        for (position, st) in self.states.iter().enumerate() {
            if st.id != position {
                return Err(AutomatonError::NonContiguousIds { position, found: st.id });
            }
            for (field, value) in [
                ("replace_prob", st.replace_prob),
                ("effort_prob", st.effort_prob),
                ("belief", st.belief),
            ] {
                if !(0.0..=1.0).contains(&value) {
                    return Err(AutomatonError::ProbabilityOutOfRange { state: st.id, field, value });
                }
            }
        }
        for row in &self.transitions {
            for to in row.iter().flatten() {
                if *to >= self.len() {
                    return Err(AutomatonError::UnknownState(*to));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_wire()).expect("automaton serialises")
    }

    pub fn from_json(text: &str) -> Result<Self, AutomatonError> {
        let wire: WireAutomaton =
            serde_json::from_str(text).map_err(|e| AutomatonError::Parse(e.to_string()))?;
        Self::from_wire(wire)
    }

    fn to_wire(&self) -> WireAutomaton {
        let mut transitions = Vec::new();
        for (from, row) in self.transitions.iter().enumerate() {
            for (s, to) in row.iter().enumerate() {
                if let Some(to) = to {
                    transitions.push(WireTransition { from, signal: self.signals[s].clone(), to: *to });
                }
            }
        }
        WireAutomaton {
            signals: Some(self.signals.clone()),
            states: self.states.clone(),
            transitions,
            initial: self.initial,
            params_echo: self.params_echo.clone(),
        }
    }

    fn from_wire(wire: WireAutomaton) -> Result<Self, AutomatonError> {
        let signals = match wire.signals {
            Some(s) => s,
            None => wire
                .params_echo
                .as_ref()
                .and_then(|e| e.signal_names())
                .ok_or(AutomatonError::MissingModel)?,
        };
        let n = wire.states.len();
        let mut transitions = vec![vec![None; signals.len()]; n];
        for t in wire.transitions {
            let s = signals
                .iter()
                .position(|x| *x == t.signal)
                .ok_or_else(|| AutomatonError::UnknownSignal { from: t.from, signal: t.signal.clone() })?;
            let row = transitions.get_mut(t.from).ok_or(AutomatonError::UnknownState(t.from))?;
            if row[s].is_some() {
                return Err(AutomatonError::DuplicateTransition { from: t.from, signal: t.signal });
            }
            row[s] = Some(t.to);
        }
        let a = Self {
            signals,
            states: wire.states,
            transitions,
            initial: wire.initial,
            params_echo: wire.params_echo,
        };
        a.check_well_formed()?;
        Ok(a)
    }

    /// Replaces the target of one transition; used to build mutants.
    pub fn rewire(&mut self, from: StateId, signal: usize, to: StateId) {
        self.transitions[from][signal] = Some(to);
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct WireTransition {
    from: StateId,
    signal: String,
    to: StateId,
}

#[derive(Debug, Serialize, Deserialize)]
struct WireAutomaton {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    signals: Option<Vec<String>>,
    states: Vec<AutomatonState>,
    transitions: Vec<WireTransition>,
    initial: StateId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    params_echo: Option<ModelConfig>,
}
