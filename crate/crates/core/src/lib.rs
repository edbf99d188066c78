//! Reputation and electoral accountability under imperfect monitoring:
//! Bayes operators, the full-effort-inducing monitoring test, equilibrium
//! constructions, a numerical equilibrium verifier, outside-option bounds
//! and a seeded Monte Carlo engine.

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod automaton;
pub mod bounds;
pub mod config;
pub mod equilibria;
pub mod fei;
pub mod lp;
pub mod model;
pub mod simulate;
pub mod values;
pub mod verifier;

pub use automaton::{AutomatonError, AutomatonState, EquilibriumAutomaton, Regime, StateId};
pub use config::{ConfigError, ModelConfig, SignalSpec};
pub use equilibria::{construct_full_effort, construct_non_efe, ConstructionError, NonEfeOptions, NonEfeParameters};
pub use fei::{check_fei, fei_oracle, uniform_failure_horizon, CutoffWitness, FeiCertificate, FeiError, UniformFailureHorizon};
pub use model::{Belief, GameParams, Model, ModelError, MonitoringStructure, ValidationLevel, Violation};
pub use values::{compute_values, ValueError, ValueMethod, ValueTable};
pub use verifier::{verify, ResidualCategory, VerificationReport, VerifyError};
pub use bounds::{bound_sweep, outside_option_bound, BoundError, BoundRow, BoundSweep, OutsideOptionBound};
pub use simulate::{analytic_long_run_effort, martingale_diagnostic, simulate, AnalyticEffort, AnalyticMethod, SimulationConfig, SimulationError, SimulationStats};
