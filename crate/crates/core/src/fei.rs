//! Condition FEI (full-effort incentives): exact decision through the
//! likelihood-ratio cutoff family, an independent LP oracle, and the
//! uniform-failure horizon `T` used by the outside-option bound.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp::Polyhedron;
use crate::model::Model;

/// Retention test `S* = {s : f0(s)/f1(s) ≤ λ}` with promise keeping at
/// equality, `v̄ = (1 − δ)(1 − κ) / (1 − δ f1*)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutoffWitness {
    pub lambda: f64,
    /// Indices of the pass signals, ascending.
    pub s_star: Vec<usize>,
    /// Names of the pass signals, same order as `s_star`.
    pub s_star_names: Vec<String>,
    pub f1_star: f64,
    pub f0_star: f64,
    pub v_bar: f64,
    /// `(1 − κ)(1 − δ f0*) − (1 − δ f1*)`, nonnegative.
    pub slack: f64,
}

impl CutoffWitness {
    pub fn passes(&self, s: usize) -> bool {
        self.s_star.binary_search(&s).is_ok()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeiRefutation {
    /// Best cutoff slack, negative.
    pub best_slack: f64,
    pub horizon: UniformFailureHorizon,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeiCertificate {
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<CutoffWitness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refutation: Option<FeiRefutation>,
}

impl FeiCertificate {
    pub fn witness(&self) -> Option<&CutoffWitness> {
        self.witness.as_ref()
    }
}

/// `T` from the uniform failure of FEI together with the gaps it was
/// derived from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformFailureHorizon {
    /// LP value: min over IC-feasible `v ∈ [0,1]^S` of `max v − [(1−δ)(1−κ) + δ f1·v]`.
    /// `None` when no `v` in the box satisfies IC, so only the tail gap binds.
    pub lp_gap: Option<f64>,
    /// The argmin of the LP (empty when IC is infeasible).
    pub lp_argmin: Vec<f64>,
    /// `(1 − δ) κ`, the gap for vectors with `max v ≥ 1`.
    pub tail_gap: f64,
    pub min_gap: f64,
    pub horizon_t: u64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FeiError {
    #[error("condition FEI holds; no uniform-failure horizon exists")]
    FeiHoldsNoHorizon,
    #[error("precision {p} and kappa {kappa} give nonpositive denominator {denominator}")]
    ThresholdUndefined { p: f64, kappa: f64, denominator: f64 },
    #[error("oracle optimum {excess} is within resolution {resolution} of the FEI boundary")]
    ResolutionTooCoarse { excess: f64, resolution: f64 },
    #[error("oracle supports at most {max} signals, got {got}")]
    TooManySignals { max: usize, got: usize },
}

/// Distinct likelihood ratios in ascending order, with their signal groups.
fn ratio_classes(model: &Model) -> Vec<(f64, Vec<usize>)> {
    let mon = model.monitoring();
    let mut idx: Vec<usize> = (0..mon.len()).collect();
    idx.sort_by(|&a, &b| mon.likelihood_ratio(a).total_cmp(&mon.likelihood_ratio(b)));
    let mut classes: Vec<(f64, Vec<usize>)> = Vec::new();
    for s in idx {
        let r = mon.likelihood_ratio(s);
        match classes.last_mut() {
            Some((last, members)) if *last == r => members.push(s),
            _ => classes.push((r, vec![s])),
        }
    }
    classes
}

/// Every admissible cutoff: prefixes of the ascending ratio order that
/// contain all good-news signals (`f0 ≤ f1`) and leave at least one signal out.
pub fn cutoff_candidates(model: &Model) -> Vec<CutoffWitness> {
    let p = model.params();
    let mon = model.monitoring();
    let classes = ratio_classes(model);
    let mut out = Vec::new();
    let mut members: Vec<usize> = Vec::new();
    let (mut f1s, mut f0s) = (0.0, 0.0);
    for (k, (ratio, group)) in classes.iter().enumerate() {
        for &s in group {
            members.push(s);
            f1s += mon.f1()[s];
            f0s += mon.f0()[s];
        }
        if k + 1 == classes.len() {
            break;
        }
        if *ratio < 1.0 && classes[k + 1].0 <= 1.0 {
            continue;
        }
        let mut s_star = members.clone();
        s_star.sort_unstable();
        let slack = (1.0 - p.kappa) * (1.0 - p.delta * f0s) - (1.0 - p.delta * f1s);
        out.push(CutoffWitness {
            lambda: *ratio,
            s_star_names: s_star.iter().map(|&s| mon.signals()[s].clone()).collect(),
            s_star,
            f1_star: f1s,
            f0_star: f0s,
            v_bar: (1.0 - p.delta) * (1.0 - p.kappa) / (1.0 - p.delta * f1s),
            slack,
        });
    }
    out
}

/// Decides FEI. On success the witness maximises the incentive slack, ties
/// going to the smaller pass set; on failure the refutation carries `T`.
pub fn check_fei(model: &Model) -> FeiCertificate {
    let mut best: Option<CutoffWitness> = None;
    for cand in cutoff_candidates(model) {
        if best.as_ref().is_none_or(|b| cand.slack > b.slack) {
            best = Some(cand);
        }
    }
    let best = best.expect("an informative monitoring structure has a bad-news signal");
    if best.slack >= 0.0 {
        FeiCertificate { holds: true, witness: Some(best), refutation: None }
    } else {
        let horizon = failure_horizon(model);
        FeiCertificate {
            holds: false,
            witness: None,
            refutation: Some(FeiRefutation { best_slack: best.slack, horizon }),
        }
    }
}

/// Smallest `T` with `1/T < min(g₁, g₂)`; errors when FEI holds.
pub fn uniform_failure_horizon(model: &Model) -> Result<UniformFailureHorizon, FeiError> {
    match check_fei(model).refutation {
        Some(r) => Ok(r.horizon),
        None => Err(FeiError::FeiHoldsNoHorizon),
    }
}

fn failure_horizon(model: &Model) -> UniformFailureHorizon {
    let p = model.params();
    let mon = model.monitoring();
    let n = mon.len();
    let base = (1.0 - p.delta) * (1.0 - p.kappa);
    // variables (v_0..v_{n-1}, m)
    let mut poly = Polyhedron::new(n + 1);
    for s in 0..n {
        let mut e = vec![0.0; n + 1];
        e[s] = 1.0;
        poly.ge(e.clone(), 0.0);
        poly.le(e.clone(), 1.0);
        e[n] = -1.0;
        poly.le(e, 0.0);
    }
    let mut ic: Vec<f64> = (0..n).map(|s| p.delta * (mon.f1()[s] - mon.f0()[s])).collect();
    ic.push(0.0);
    poly.ge(ic, (1.0 - p.delta) * p.kappa);
    let mut obj: Vec<f64> = mon.f1().iter().map(|f| -p.delta * f).collect();
    obj.push(1.0);
    let vertex = poly.minimize(&obj);
    let lp_gap = vertex.as_ref().map(|v| v.objective - base);
    let tail_gap = (1.0 - p.delta) * p.kappa;
    let min_gap = lp_gap.map_or(tail_gap, |g| g.min(tail_gap));
    UniformFailureHorizon {
        lp_gap,
        lp_argmin: vertex.map(|v| v.point[..n].to_vec()).unwrap_or_default(),
        tail_gap,
        min_gap,
        horizon_t: horizon_for_gap(min_gap),
    }
}

/// Smallest positive integer `T` with `1/T < gap`.
pub fn horizon_for_gap(gap: f64) -> u64 {
    assert!(gap > 0.0, "gap must be positive");
    let mut t = (1.0 / gap).floor().max(1.0) as u64;
    while 1.0 / (t as f64) >= gap {
        t += 1;
    }
    while t > 1 && 1.0 / ((t - 1) as f64) < gap {
        t -= 1;
    }
    t
}

/// Largest signal alphabet [`fei_oracle`] accepts.
pub const ORACLE_MAX_SIGNALS: usize = 8;

/// Independent FEI check: maximises the incentive margin
/// `δ (f1 − f0)·v − (1 − δ) κ` over `v ∈ [0, 1]^S` subject to promise
/// keeping, by exact vertex enumeration. Optima within `resolution` of zero
/// are reported as ambiguous.
pub fn fei_oracle(model: &Model, resolution: f64) -> Result<bool, FeiError> {
    let p = model.params();
    let mon = model.monitoring();
    let n = mon.len();
    if n > ORACLE_MAX_SIGNALS {
        return Err(FeiError::TooManySignals { max: ORACLE_MAX_SIGNALS, got: n });
    }
    let base = (1.0 - p.delta) * (1.0 - p.kappa);
    let mut poly = Polyhedron::new(n);
    for s in 0..n {
        let mut e = vec![0.0; n];
        e[s] = 1.0;
        poly.ge(e.clone(), 0.0);
        poly.le(e, 1.0);
        // v(s) ≤ (1−δ)(1−κ) + δ f1·v
        let row: Vec<f64> = (0..n)
            .map(|j| if j == s { 1.0 } else { 0.0 } - p.delta * mon.f1()[j])
            .collect();
        poly.le(row, base);
    }
    let obj: Vec<f64> = (0..n).map(|s| p.delta * (mon.f1()[s] - mon.f0()[s])).collect();
    let best = poly.maximize(&obj).expect("v = 0 is feasible");
    let excess = best.objective - (1.0 - p.delta) * p.kappa;
    if excess.abs() < resolution {
        return Err(FeiError::ResolutionTooCoarse { excess, resolution });
    }
    Ok(excess > 0.0)
}

/// Critical discount factor `κ / (p − (1 − p)(1 − κ))` for binary signals
/// of precision `p`; FEI holds iff `δ` is at least this value.
pub fn binary_threshold(p: f64, kappa: f64) -> Result<f64, FeiError> {
    let denominator = p - (1.0 - p) * (1.0 - kappa);
    if !(denominator > 0.0) {
        return Err(FeiError::ThresholdUndefined { p, kappa, denominator });
    }
    Ok(kappa / denominator)
}
