//! Upper bound on the voters' outside option when full-effort incentives
//! fail: `u₀ ≤ c + inf_η g(η)` with
//! `g(η) = (π₀ + (1 − π₀) η^{T+1}) / (π₀ + (1 − π₀) η^T)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fei::{uniform_failure_horizon, FeiError};
use crate::model::{Model, ModelError, ValidationLevel};

pub const GRID_POINTS: usize = 1024;
pub const GRID_LO: f64 = 1e-12;
pub const GOLDEN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutsideOptionBound {
    pub horizon_t: u64,
    pub eta_star: f64,
    pub g_min: f64,
    pub bound_value: f64,
    /// `c̄`: every `c` below this keeps the bound under 1.
    pub c_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundError {
    #[error("full-effort incentives hold; no outside-option bound applies")]
    FeiHoldsNoBound,
    #[error(transparent)]
    Fei(FeiError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl From<FeiError> for BoundError {
    fn from(e: FeiError) -> Self {
        match e {
            FeiError::FeiHoldsNoHorizon => BoundError::FeiHoldsNoBound,
            other => BoundError::Fei(other),
        }
    }
}

pub fn g(pi0: f64, eta: f64, t: u64) -> f64 {
    let t = t.min(i32::MAX as u64) as i32;
    let et = eta.powi(t);
    (pi0 + (1.0 - pi0) * et * eta) / (pi0 + (1.0 - pi0) * et)
}

/// Log-uniform grid on `[1e-12, 1 − 1e-12]`.
pub fn eta_grid() -> Vec<f64> {
    let lo = GRID_LO.ln();
    let hi = (1.0 - GRID_LO).ln();
    (0..GRID_POINTS)
        .map(|i| (lo + (hi - lo) * i as f64 / (GRID_POINTS - 1) as f64).exp())
        .collect()
}

/// `(η*, g(η*))`: grid scan, then golden section on the bracketing cell.
pub fn minimize_g(pi0: f64, t: u64) -> (f64, f64) {
    let grid = eta_grid();
    let (best, _) = grid
        .iter()
        .enumerate()
        .map(|(i, &e)| (i, g(pi0, e, t)))
        .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
    let mut a = grid[best.saturating_sub(1)];
    let mut b = grid[(best + 1).min(GRID_POINTS - 1)];
    let f = |e: f64| g(pi0, e, t);
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > GOLDEN_TOL {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        }
    }
    let mut eta = 0.5 * (a + b);
    let mut val = f(eta);
    // never return something worse than the grid point we started from
    if grid[best] > 0.0 && f(grid[best]) < val {
        eta = grid[best];
        val = f(eta);
    }
    (eta, val)
}

pub fn bound_for(pi0: f64, c: f64, t: u64) -> OutsideOptionBound {
    let (eta_star, g_min) = minimize_g(pi0, t);
    OutsideOptionBound {
        horizon_t: t,
        eta_star,
        g_min,
        bound_value: c + g_min,
        c_threshold: pi0.min(1.0 - pi0).min(1.0 - g_min),
    }
}

pub fn outside_option_bound(model: &Model) -> Result<OutsideOptionBound, BoundError> {
    let h = uniform_failure_horizon(model)?;
    let p = model.params();
    Ok(bound_for(p.pi0, p.c, h.horizon_t))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub pi0: f64,
    pub c: f64,
    pub horizon_t: u64,
    pub eta_star: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundSweep {
    pub rows: Vec<BoundRow>,
    /// Bound never increases as `π₀` decreases (at each fixed `c`).
    pub monotone_in_pi0: bool,
    /// Bound never increases as `c` decreases (at each fixed `π₀`).
    pub monotone_in_c: bool,
    /// Every row with `c < c̄(π₀)` has bound `< 1`.
    pub below_one_under_threshold: bool,
}

impl BoundSweep {
    pub fn checks_pass(&self) -> bool {
        self.monotone_in_pi0 && self.monotone_in_c && self.below_one_under_threshold
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("pi0,c,T,eta_star,bound\n");
        for r in &self.rows {
            out.push_str(&format!("{:?},{:?},{},{:?},{:?}\n", r.pi0, r.c, r.horizon_t, r.eta_star, r.bound));
        }
        out
    }
}

/// Rows ordered by `pi0_grid` then `c_grid`. Each grid point is validated
/// against the template at the relaxed level.
pub fn bound_sweep(template: &Model, pi0_grid: &[f64], c_grid: &[f64]) -> Result<BoundSweep, BoundError> {
    let t = uniform_failure_horizon(template)?.horizon_t;
    for &pi0 in pi0_grid {
        for &c in c_grid {
            let mut p = *template.params();
            p.pi0 = pi0;
            p.c = c;
            template.with_params(p, ValidationLevel::Relaxed)?;
        }
    }
    let cells: Vec<(f64, f64)> = pi0_grid.iter().flat_map(|&p| c_grid.iter().map(move |&c| (p, c))).collect();
    let rows: Vec<(BoundRow, f64)> = cells
        .par_iter()
        .map(|&(pi0, c)| {
            let b = bound_for(pi0, c, t);
            (BoundRow { pi0, c, horizon_t: t, eta_star: b.eta_star, bound: b.bound_value }, b.c_threshold)
        })
        .collect();

    let nc = c_grid.len();
    let at = |i: usize, j: usize| rows[i * nc + j].0;
    let pairs_ok = |x: BoundRow, y: BoundRow, kx: f64, ky: f64| {
        // smaller key must not give a larger bound
        if kx < ky {
            x.bound <= y.bound
        } else if ky < kx {
            y.bound <= x.bound
        } else {
            true
        }
    };
    let mut monotone_in_pi0 = true;
    let mut monotone_in_c = true;
    for j in 0..nc {
        for i in 1..pi0_grid.len() {
            monotone_in_pi0 &= pairs_ok(at(i - 1, j), at(i, j), pi0_grid[i - 1], pi0_grid[i]);
        }
    }
    for i in 0..pi0_grid.len() {
        for j in 1..nc {
            monotone_in_c &= pairs_ok(at(i, j - 1), at(i, j), c_grid[j - 1], c_grid[j]);
        }
    }
    let below_one_under_threshold = rows.iter().all(|(r, thr)| !(r.c < *thr) || r.bound < 1.0);
    Ok(BoundSweep {
        rows: rows.into_iter().map(|(r, _)| r).collect(),
        monotone_in_pi0,
        monotone_in_c,
        below_one_under_threshold,
    })
}
