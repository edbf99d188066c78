//! Seeded Monte Carlo careers under a strategy automaton, plus an analytic
//! long-run effort oracle on the acting-state chain.
//!
//! Period order: vote (skipped for a fresh incumbent), action, signal,
//! transition. Path `i` draws from ChaCha8 seeded by `master_seed` on
//! stream `i`, so results do not depend on scheduling.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::automaton::{EquilibriumAutomaton, Regime, StateId};
use crate::model::Model;

pub const CHUNK_PATHS: usize = 256;
pub const TENURE_THRESHOLDS: [usize; 4] = [10, 50, 100, 200];
pub const THREADS_ENV: &str = "REPLAB_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub horizon: usize,
    pub paths: usize,
    pub master_seed: u64,
    pub record_traces: bool,
}

impl SimulationConfig {
    pub fn new(horizon: usize, paths: usize, master_seed: u64) -> Self {
        Self { horizon, paths, master_seed, record_traces: false }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimulationError {
    #[error("horizon and paths must be at least 1")]
    InvalidConfig,
    #[error("automaton has {automaton} signals, model has {model}")]
    SignalMismatch { automaton: usize, model: usize },
    #[error("path {path} left the materialised automaton at state {state} in period {period}")]
    DepthInsufficient { path: usize, period: usize, state: StateId },
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LongRunEffort {
    pub estimate: f64,
    pub std_error: f64,
    pub burn_in: usize,
    /// `(burn_in, estimate)` at half and double the default burn-in.
    pub sensitivity: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MartingaleResidual {
    pub mean: f64,
    pub std_error: f64,
    pub z: f64,
    pub transitions: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TenureHistogram {
    /// `good[k]`: completed tenures of length `k` served by good types.
    pub good: Vec<u64>,
    pub opportunist: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TenureExceedance {
    pub threshold: usize,
    /// Share of paths whose final incumbent has served more than `threshold`.
    pub final_incumbent: f64,
    /// Share of paths on which some incumbent served more than `threshold`.
    pub any_incumbent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathTrace {
    pub states: Vec<StateId>,
    pub efforts: Vec<u8>,
    pub signals: Vec<usize>,
    pub replaced: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationStats {
    pub config: SimulationConfig,
    pub mean_effort: Vec<f64>,
    pub replace_rate: Vec<f64>,
    pub mean_belief: Vec<f64>,
    pub favorable_replacements: Vec<u64>,
    pub favorable_replacement_total: u64,
    /// Share of paths with at least one favorable-reputation replacement.
    pub favorable_replacement_paths: f64,
    pub long_run_effort: LongRunEffort,
    pub tenure_histogram: TenureHistogram,
    /// Share of paths whose first incumbent is still in office at period `t`.
    pub initial_survival: Vec<f64>,
    pub tenure_exceedance: Vec<TenureExceedance>,
    pub martingale: MartingaleResidual,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub traces: Option<Vec<PathTrace>>,
}

impl SimulationStats {
    /// Per-period CSV: `t,mean_effort,replace_rate,mean_belief,favorable_replacements`.
    pub fn per_period_csv(&self) -> String {
        let mut out = String::from("t,mean_effort,replace_rate,mean_belief,favorable_replacements\n");
        for t in 0..self.mean_effort.len() {
            out.push_str(&format!(
                "{},{:?},{:?},{:?},{}\n",
                t, self.mean_effort[t], self.replace_rate[t], self.mean_belief[t], self.favorable_replacements[t]
            ));
        }
        out
    }
}

/// Per-path outputs kept for path-level standard errors.
#[derive(Debug, Clone, Default)]
struct PathSummary {
    /// Effort counts after each burn-in candidate.
    effort_after: [u64; 3],
    martingale_sum: f64,
    martingale_count: u64,
    had_favorable: bool,
    max_tenure: usize,
    final_tenure: usize,
}

#[derive(Debug, Clone)]
struct ChunkAcc {
    effort: Vec<u64>,
    replaced: Vec<u64>,
    belief: Vec<f64>,
    favorable: Vec<u64>,
    survival: Vec<u64>,
    tenure_good: Vec<u64>,
    tenure_opp: Vec<u64>,
    paths: Vec<PathSummary>,
    traces: Vec<PathTrace>,
}

impl ChunkAcc {
    fn new(horizon: usize) -> Self {
        Self {
            effort: vec![0; horizon],
            replaced: vec![0; horizon],
            belief: vec![0.0; horizon],
            favorable: vec![0; horizon],
            survival: vec![0; horizon],
            tenure_good: vec![0; horizon + 1],
            tenure_opp: vec![0; horizon + 1],
            paths: Vec::new(),
            traces: Vec::new(),
        }
    }

    fn merge(&mut self, other: ChunkAcc) {
        fn add<T: Copy + std::ops::AddAssign>(a: &mut [T], b: &[T]) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += *y);
        }
        add(&mut self.effort, &other.effort);
        add(&mut self.replaced, &other.replaced);
        add(&mut self.belief, &other.belief);
        add(&mut self.favorable, &other.favorable);
        add(&mut self.survival, &other.survival);
        add(&mut self.tenure_good, &other.tenure_good);
        add(&mut self.tenure_opp, &other.tenure_opp);
        self.paths.extend(other.paths);
        self.traces.extend(other.traces);
    }
}

fn burn_ins(horizon: usize) -> [usize; 3] {
    let b = horizon / 5;
    [b, b / 2, (2 * b).min(horizon.saturating_sub(1))]
}

fn draw_signal(rng: &mut ChaCha8Rng, law: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (s, p) in law.iter().enumerate() {
        acc += p;
        if u < acc {
            return s;
        }
    }
    // rounding left `u` above the total mass: take the last signal with mass
    law.iter().rposition(|&p| p > 0.0).unwrap_or(law.len() - 1)
}

fn run_path(
    automaton: &EquilibriumAutomaton,
    model: &Model,
    config: &SimulationConfig,
    path: usize,
    acc: &mut ChunkAcc,
) -> Result<(), SimulationError> {
    let mon = model.monitoring();
    let pi0 = model.params().pi0;
    let mut rng = ChaCha8Rng::seed_from_u64(config.master_seed);
    rng.set_stream(path as u64);
    let burns = burn_ins(config.horizon);

    let init = automaton.initial();
    let mut q = init;
    let mut good = rng.random::<f64>() < pi0;
    let mut tenure = 0usize;
    let mut first_in_office = true;
    let mut summary = PathSummary::default();
    let mut trace = config.record_traces.then(|| PathTrace {
        states: Vec::with_capacity(config.horizon),
        efforts: Vec::with_capacity(config.horizon),
        signals: Vec::with_capacity(config.horizon),
        replaced: Vec::with_capacity(config.horizon),
    });

    for t in 0..config.horizon {
        let mut replaced = false;
        if tenure > 0 {
            let st = automaton.state(q);
            if rng.random::<f64>() < st.replace_prob {
                replaced = true;
                acc.replaced[t] += 1;
                if st.belief > pi0 {
                    acc.favorable[t] += 1;
                    summary.had_favorable = true;
                }
                if good {
                    acc.tenure_good[tenure] += 1;
                } else {
                    acc.tenure_opp[tenure] += 1;
                }
                first_in_office = false;
                q = init;
                good = rng.random::<f64>() < pi0;
                tenure = 0;
            }
        }
        if first_in_office {
            acc.survival[t] += 1;
        }
        let st = automaton.state(q);
        let work = good || rng.random::<f64>() < st.effort_prob;
        let a = if work { 1.0 } else { 0.0 };
        if work {
            acc.effort[t] += 1;
            for (k, &b) in burns.iter().enumerate() {
                if t >= b {
                    summary.effort_after[k] += 1;
                }
            }
        }
        acc.belief[t] += st.belief;
        let law: Vec<f64> = (0..mon.len()).map(|s| mon.prob(a, s)).collect();
        let s = draw_signal(&mut rng, &law);
        let next = automaton
            .next(q, s)
            .ok_or(SimulationError::DepthInsufficient { path, period: t, state: q })?;
        summary.martingale_sum += automaton.state(next).belief - st.belief;
        summary.martingale_count += 1;
        if let Some(tr) = trace.as_mut() {
            tr.states.push(q);
            tr.efforts.push(work as u8);
            tr.signals.push(s);
            tr.replaced.push(replaced);
        }
        q = next;
        tenure += 1;
        summary.max_tenure = summary.max_tenure.max(tenure);
    }
    summary.final_tenure = tenure;
    acc.paths.push(summary);
    if let Some(tr) = trace {
        acc.traces.push(tr);
    }
    Ok(())
}

fn run_chunks(
    automaton: &EquilibriumAutomaton,
    model: &Model,
    config: &SimulationConfig,
) -> Result<ChunkAcc, SimulationError> {
    let chunks: Vec<usize> = (0..config.paths.div_ceil(CHUNK_PATHS)).collect();
    let parts: Vec<Result<ChunkAcc, SimulationError>> = chunks
        .par_iter()
        .map(|&c| {
            let mut acc = ChunkAcc::new(config.horizon);
            let end = ((c + 1) * CHUNK_PATHS).min(config.paths);
            for path in c * CHUNK_PATHS..end {
                run_path(automaton, model, config, path, &mut acc)?;
            }
            Ok(acc)
        })
        .collect();
    let mut total = ChunkAcc::new(config.horizon);
    for part in parts {
        total.merge(part?);
    }
    Ok(total)
}

/// Worker count from `REPLAB_THREADS`, if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)
}

pub fn simulate(
    automaton: &EquilibriumAutomaton,
    model: &Model,
    config: &SimulationConfig,
) -> Result<SimulationStats, SimulationError> {
    if config.horizon == 0 || config.paths == 0 {
        return Err(SimulationError::InvalidConfig);
    }
    if automaton.signals().len() != model.monitoring().len() {
        return Err(SimulationError::SignalMismatch {
            automaton: automaton.signals().len(),
            model: model.monitoring().len(),
        });
    }
    let acc = match thread_cap() {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| SimulationError::ThreadPool(e.to_string()))?
            .install(|| run_chunks(automaton, model, config))?,
        None => run_chunks(automaton, model, config)?,
    };
    Ok(summarise(config, acc))
}

fn mean_and_se(values: impl Iterator<Item = f64> + Clone, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let mean = values.clone().sum::<f64>() / nf;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.map(|y| (y - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    (mean, (var / nf).sqrt())
}

fn summarise(config: &SimulationConfig, acc: ChunkAcc) -> SimulationStats {
    let n = config.paths as f64;
    let h = config.horizon;
    let burns = burn_ins(h);
    let per_path = |k: usize| {
        let len = (h - burns[k]) as f64;
        acc.paths.iter().map(move |p| p.effort_after[k] as f64 / len)
    };
    let (estimate, std_error) = mean_and_se(per_path(0), config.paths);
    let sensitivity = (1..3).map(|k| (burns[k], per_path(k).sum::<f64>() / n)).collect();

    let transitions: u64 = acc.paths.iter().map(|p| p.martingale_count).sum();
    let m_total: f64 = acc.paths.iter().map(|p| p.martingale_sum).sum();
    let m_mean = m_total / transitions as f64;
    // ratio estimator with path-level clustering
    let m_se = if config.paths > 1 {
        let ss: f64 = acc
            .paths
            .iter()
            .map(|p| (p.martingale_sum - m_mean * p.martingale_count as f64).powi(2))
            .sum();
        (n / (n - 1.0) * ss).sqrt() / transitions as f64
    } else {
        0.0
    };
    let z = z_score(m_mean, m_se);

    let tenure_exceedance = TENURE_THRESHOLDS
        .iter()
        .map(|&threshold| TenureExceedance {
            threshold,
            final_incumbent: acc.paths.iter().filter(|p| p.final_tenure > threshold).count() as f64 / n,
            any_incumbent: acc.paths.iter().filter(|p| p.max_tenure > threshold).count() as f64 / n,
        })
        .collect();

    SimulationStats {
        config: *config,
        mean_effort: acc.effort.iter().map(|&x| x as f64 / n).collect(),
        replace_rate: acc.replaced.iter().map(|&x| x as f64 / n).collect(),
        mean_belief: acc.belief.iter().map(|&x| x / n).collect(),
        favorable_replacement_total: acc.favorable.iter().sum(),
        favorable_replacements: acc.favorable,
        favorable_replacement_paths: acc.paths.iter().filter(|p| p.had_favorable).count() as f64 / n,
        long_run_effort: LongRunEffort { estimate, std_error, burn_in: burns[0], sensitivity },
        tenure_histogram: TenureHistogram { good: acc.tenure_good, opportunist: acc.tenure_opp },
        initial_survival: acc.survival.iter().map(|&x| x as f64 / n).collect(),
        tenure_exceedance,
        martingale: MartingaleResidual { mean: m_mean, std_error: m_se, z, transitions },
        traces: config.record_traces.then_some(acc.traces),
    }
}

fn z_score(mean: f64, se: f64) -> f64 {
    if se > 0.0 {
        mean / se
    } else if mean == 0.0 {
        0.0
    } else {
        mean.signum() * f64::INFINITY
    }
}

/// z-score of the mean one-step belief increment against zero.
pub fn martingale_diagnostic(stats: &SimulationStats) -> f64 {
    z_score(stats.martingale.mean, stats.martingale.std_error)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalyticMethod {
    /// Exact stationary solve on the chain lumped by regime.
    LumpedRegimes,
    /// Power iteration on the full acting-state chain.
    Truncation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticEffort {
    pub value: f64,
    pub method: AnalyticMethod,
    /// Set when lumping was refused; informational only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub downgrade: Option<String>,
    /// Lumped blocks and their stationary masses (lumped method only).
    pub blocks: Vec<(Regime, f64)>,
    /// Iteration residual plus probability mass lost at the frontier.
    pub residual: f64,
}

const LUMP_TOL: f64 = 1e-10;
const POWER_MAX_ITER: usize = 200_000;

/// Acting-state transition rows: from `q` the incumbent acts with expected
/// effort `e(q)`; the successor is kept with `1 − σ_V` and otherwise the
/// chain restarts at the initial state. Missing mass is returned separately.
fn acting_rows(automaton: &EquilibriumAutomaton, model: &Model) -> (Vec<StateId>, Vec<Vec<(usize, f64)>>, Vec<f64>) {
    let init = automaton.initial();
    let mut index = vec![usize::MAX; automaton.len()];
    let mut acting = vec![init];
    index[init] = 0;
    let mut head = 0;
    let mut rows = Vec::new();
    let mut lost = Vec::new();
    while head < acting.len() {
        let q = acting[head];
        head += 1;
        let e = automaton.state(q).expected_effort();
        let mut row: Vec<(usize, f64)> = Vec::new();
        let mut missing = 0.0;
        let push = |row: &mut Vec<(usize, f64)>, j: usize, w: f64| {
            if w <= 0.0 {
                return;
            }
            match row.iter_mut().find(|(k, _)| *k == j) {
                Some(entry) => entry.1 += w,
                None => row.push((j, w)),
            }
        };
        for s in 0..model.monitoring().len() {
            let ps = model.monitoring().prob(e, s);
            match automaton.next(q, s) {
                None => missing += ps,
                Some(to) => {
                    let r = automaton.state(to).replace_prob;
                    push(&mut row, 0, ps * r);
                    if r < 1.0 && to != init {
                        if index[to] == usize::MAX {
                            index[to] = acting.len();
                            acting.push(to);
                        }
                        push(&mut row, index[to], ps * (1.0 - r));
                    } else if r < 1.0 {
                        push(&mut row, 0, ps * (1.0 - r));
                    }
                }
            }
        }
        rows.push(row);
        lost.push(missing);
    }
    (acting, rows, lost)
}

fn stationary(p: &DMatrix<f64>) -> Option<DVector<f64>> {
    let k = p.nrows();
    // (Pᵀ − I) μ = 0 with the last equation replaced by Σμ = 1
    let mut a = p.transpose() - DMatrix::<f64>::identity(k, k);
    let mut b = DVector::<f64>::zeros(k);
    for j in 0..k {
        a[(k - 1, j)] = 1.0;
    }
    b[k - 1] = 1.0;
    a.lu().solve(&b)
}

fn try_lump(
    automaton: &EquilibriumAutomaton,
    acting: &[StateId],
    rows: &[Vec<(usize, f64)>],
    lost: &[f64],
) -> Result<AnalyticEffort, String> {
    if lost.iter().any(|&m| m > 0.0) {
        return Err("acting chain reaches unmaterialised transitions".into());
    }
    let mut blocks: Vec<Regime> = Vec::new();
    let block_of: Vec<usize> = acting
        .iter()
        .enumerate()
        .map(|(i, &q)| {
            // the initial state is always its own block
            let key = if i == 0 { Regime::Initial } else { automaton.state(q).regime };
            if i != 0 && key == Regime::Initial {
                return usize::MAX;
            }
            blocks.iter().position(|b| *b == key).unwrap_or_else(|| {
                blocks.push(key);
                blocks.len() - 1
            })
        })
        .collect();
    if block_of.contains(&usize::MAX) {
        return Err("a non-initial acting state is tagged Initial".into());
    }
    let k = blocks.len();
    let mut effort = vec![f64::NAN; k];
    let mut agg: Vec<Option<Vec<f64>>> = vec![None; k];
    for (i, row) in rows.iter().enumerate() {
        let b = block_of[i];
        let e = automaton.state(acting[i]).expected_effort();
        let mut to = vec![0.0; k];
        for &(j, w) in row {
            to[block_of[j]] += w;
        }
        if effort[b].is_nan() {
            effort[b] = e;
            agg[b] = Some(to);
        } else {
            if (effort[b] - e).abs() > LUMP_TOL {
                return Err(format!("expected effort differs within {}", blocks[b]));
            }
            let reference = agg[b].as_ref().expect("set with effort");
            if reference.iter().zip(&to).any(|(x, y)| (x - y).abs() > LUMP_TOL) {
                return Err(format!("block transition law differs within {}", blocks[b]));
            }
        }
    }
    let mut p = DMatrix::<f64>::zeros(k, k);
    for b in 0..k {
        for (j, w) in agg[b].as_ref().expect("every block has a state").iter().enumerate() {
            p[(b, j)] = *w;
        }
    }
    let mu = stationary(&p).ok_or_else(|| "singular lumped chain".to_string())?;
    let value = (0..k).map(|b| mu[b] * effort[b]).sum();
    let residual = (p.transpose() * &mu - &mu).amax();
    Ok(AnalyticEffort {
        value,
        method: AnalyticMethod::LumpedRegimes,
        downgrade: None,
        blocks: blocks.into_iter().zip(mu.iter().copied()).collect(),
        residual,
    })
}

/// Long-run average expected effort `Σ μ(q) e(q)` over the stationary law
/// of the acting-state chain.
pub fn analytic_long_run_effort(automaton: &EquilibriumAutomaton, model: &Model) -> AnalyticEffort {
    let (acting, rows, lost) = acting_rows(automaton, model);
    let downgrade = match try_lump(automaton, &acting, &rows, &lost) {
        Ok(a) => return a,
        Err(reason) => reason,
    };
    // lazy chain, missing mass sent back to the initial state
    let n = acting.len();
    let mut mu = vec![0.0; n];
    mu[0] = 1.0;
    let mut next = vec![0.0; n];
    let mut diff = f64::INFINITY;
    for _ in 0..POWER_MAX_ITER {
        next.iter_mut().zip(&mu).for_each(|(x, m)| *x = 0.5 * m);
        for (i, row) in rows.iter().enumerate() {
            for &(j, w) in row {
                next[j] += 0.5 * mu[i] * w;
            }
            next[0] += 0.5 * mu[i] * lost[i];
        }
        diff = next.iter().zip(&mu).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut mu, &mut next);
        if diff < 1e-14 {
            break;
        }
    }
    let lost_mass: f64 = mu.iter().zip(&lost).map(|(m, l)| m * l).sum();
    let value = acting.iter().zip(&mu).map(|(&q, m)| m * automaton.state(q).expected_effort()).sum();
    AnalyticEffort {
        value,
        method: AnalyticMethod::Truncation,
        downgrade: Some(downgrade),
        blocks: Vec::new(),
        residual: diff + lost_mass,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::{construct_full_effort, construct_non_efe, NonEfeOptions};
    use crate::model::{GameParams, MonitoringStructure, ValidationLevel};

    fn reference() -> Model {
        Model::validate(
            MonitoringStructure::binary(0.75),
            GameParams::new(0.2, 0.5, 0.3, 0.05),
            ValidationLevel::Strict,
        )
        .unwrap()
    }

    #[test]
    fn lumped_oracle_on_reference() {
        let m = reference();
        let (a, _) = construct_non_efe(&m, NonEfeOptions::default()).unwrap();
        let r = analytic_long_run_effort(&a, &m);
        assert_eq!(r.method, AnalyticMethod::LumpedRegimes, "{:?}", r.downgrade);
        assert!((r.value - 0.9263498920086393).abs() < 1e-9, "{}", r.value);
        let masses: Vec<f64> = r.blocks.iter().map(|b| b.1).collect();
        assert!((masses[0] - 0.2479).abs() < 1e-4 && (masses[2] - 0.7132).abs() < 1e-4, "{:?}", r.blocks);
    }

    #[test]
    fn trivial_oracles() {
        let m = reference();
        let fe = analytic_long_run_effort(&construct_full_effort(&m).unwrap(), &m);
        assert!((fe.value - 1.0).abs() < 1e-12);

        let mut a = EquilibriumAutomaton::new(m.monitoring().signals().to_vec(), 0);
        let q0 = a.add_state(Regime::Initial, 0.0, 0.0, 0.3);
        let q1 = a.add_state(Regime::Dead, 1.0, 0.0, 0.3);
        for s in 0..2 {
            a.set_transition(q0, s, q1);
            a.set_transition(q1, s, q1);
        }
        assert!((analytic_long_run_effort(&a, &m).value - 0.3).abs() < 1e-12);
    }

    #[test]
    fn truncation_fallback_is_close() {
        let m = reference();
        let (a, _) = construct_non_efe(&m, NonEfeOptions { depth: 40, ..Default::default() }).unwrap();
        let r = analytic_long_run_effort(&a, &m);
        assert_eq!(r.method, AnalyticMethod::Truncation);
        assert!(r.downgrade.is_some());
        assert!((r.value - 0.9263498920086393).abs() < 1e-6, "{}", r.value);
    }

    #[test]
    fn full_effort_simulation_is_pooled() {
        let m = reference();
        let a = construct_full_effort(&m).unwrap();
        let s = simulate(&a, &m, &SimulationConfig::new(100, 600, 3)).unwrap();
        assert!(s.mean_effort.iter().all(|&e| e == 1.0));
        assert_eq!(s.favorable_replacement_total, 0);
        assert_eq!(s.martingale.mean, 0.0);
        assert_eq!(martingale_diagnostic(&s), 0.0);
    }

    #[test]
    fn deterministic_and_chunk_independent() {
        let m = reference();
        let (a, _) = construct_non_efe(&m, NonEfeOptions::default()).unwrap();
        let cfg = SimulationConfig { record_traces: true, ..SimulationConfig::new(60, 700, 11) };
        let x = simulate(&a, &m, &cfg).unwrap();
        let y = simulate(&a, &m, &cfg).unwrap();
        assert_eq!(serde_json::to_string(&x).unwrap(), serde_json::to_string(&y).unwrap());
        // a prefix of paths reproduces its own traces exactly
        let z = simulate(&a, &m, &SimulationConfig { paths: 300, ..cfg }).unwrap();
        assert_eq!(x.traces.as_ref().unwrap()[..300], z.traces.unwrap()[..]);
    }

    #[test]
    fn frontier_walk_is_reported() {
        let m = reference();
        let (a, _) = construct_non_efe(&m, NonEfeOptions { depth: 2, ..Default::default() }).unwrap();
        let r = simulate(&a, &m, &SimulationConfig::new(200, 300, 1));
        assert!(matches!(r, Err(SimulationError::DepthInsufficient { .. })));
    }

    #[test]
    fn corrupted_beliefs_break_martingale() {
        let m = reference();
        let (mut a, _) = construct_non_efe(&m, NonEfeOptions::default()).unwrap();
        for st in a.states_mut().iter_mut().filter(|s| s.regime == Regime::SecondRegime) {
            st.belief = (st.belief + 0.1).min(1.0);
        }
        let s = simulate(&a, &m, &SimulationConfig::new(100, 2000, 5)).unwrap();
        assert!(martingale_diagnostic(&s).abs() > 5.0);
    }
}
