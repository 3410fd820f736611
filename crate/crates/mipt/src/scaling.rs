// Copyright 2026 The mipt developers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Finite-size scaling analysis of the purification transition.
//!
//! Late-time decay constants τ of ⟨S_Q(t)⟩ are extracted by linear least
//! squares on the log curve; the critical point is located from crossings of
//! τ/L^z vs p_x across system sizes, and the exponents are refined by a data
//! collapse against the scaling form τ = L^z · f[(p_x − p_xc) · L^(z/ν)].

use serde::{Deserialize, Serialize};

use crate::ensemble::{
    collect_purification_times, curve_from_times, EnsembleConfig, EnsembleCurve, TAG_BOOTSTRAP,
};
use crate::error::{Error, Result};
use crate::seed;
use rand::Rng;

/// Fit-window policy for [`fit_decay`]. The window starts where the mean
/// first falls below `upper` (clear of the early plateau) and ends where it
/// falls below `max(stderr_mult · stderr, floor)`.
#[derive(Debug, Clone, Copy)]
pub struct FitWindowPolicy {
    pub upper: f64,
    pub floor: f64,
    pub stderr_mult: f64,
    pub min_points: usize,
}

impl Default for FitWindowPolicy {
    fn default() -> Self {
        FitWindowPolicy {
            upper: 0.5,
            floor: 1e-3,
            stderr_mult: 3.0,
            min_points: 8,
        }
    }
}

/// Exponential decay constant extracted from one ensemble curve.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DecayFit {
    /// Decay constant in two-qubit-gate units.
    pub tau: f64,
    pub amplitude: f64,
    /// Coefficient of determination of the log-linear fit.
    pub r2: f64,
    /// Fitted index range [start, end).
    pub window: (usize, usize),
}

fn linear_least_squares(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    let mean_y = sy / n;
    let ss_tot: f64 = points.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let ss_res: f64 = points
        .iter()
        .map(|p| (p.1 - (intercept + slope * p.0)).powi(2))
        .sum();
    let r2 = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        1.0
    };
    (slope, intercept, r2)
}

/// Least-squares exponential decay rate of ⟨S_Q(t)⟩ over the policy window.
pub fn fit_decay(curve: &EnsembleCurve, policy: &FitWindowPolicy) -> Result<DecayFit> {
    let start = curve
        .mean
        .iter()
        .position(|&m| m < policy.upper)
        .ok_or_else(|| {
            Error::FitFailed(format!(
                "curve never falls below the window ceiling {}",
                policy.upper
            ))
        })?;
    let mut end = curve.mean.len();
    for t in start..curve.mean.len() {
        let floor = (policy.stderr_mult * curve.stderr[t]).max(policy.floor);
        if curve.mean[t] < floor {
            end = t;
            break;
        }
    }
    let points: Vec<(f64, f64)> = (start..end)
        .filter(|&t| curve.mean[t] > 0.0)
        .map(|t| (t as f64, curve.mean[t].ln()))
        .collect();
    if points.len() < policy.min_points {
        return Err(Error::FitFailed(format!(
            "only {} usable points in window [{start}, {end})",
            points.len()
        )));
    }
    let (slope, intercept, r2) = linear_least_squares(&points);
    if slope >= 0.0 {
        return Err(Error::FitFailed("no decay (non-negative slope)".into()));
    }
    Ok(DecayFit {
        tau: -1.0 / slope,
        amplitude: intercept.exp(),
        r2,
        window: (start, end),
    })
}

// ---------------------------------------------------------------- tau scan

/// One (L, p_x) cell of a decay-rate scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TauCell {
    pub l: usize,
    pub p_x: f64,
    pub tau: Option<f64>,
    pub tau_err: Option<f64>,
    pub r2: Option<f64>,
    pub window: Option<(usize, usize)>,
    pub n_circuits: usize,
    pub error: Option<String>,
}

/// τ(L, p_x) table with provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TauTable {
    pub p: f64,
    pub master_seed: u64,
    pub circuits_per_cell: usize,
    pub horizon_mult: usize,
    pub bootstrap_resamples: usize,
    pub cells: Vec<TauCell>,
}

impl TauTable {
    /// Sorted distinct sizes that hold at least one successful fit.
    pub fn sizes(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .cells
            .iter()
            .filter(|c| c.tau.is_some())
            .map(|c| c.l)
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn tau_at(&self, l: usize, p_x: f64) -> Option<f64> {
        self.cells
            .iter()
            .find(|c| c.l == l && c.p_x == p_x)
            .and_then(|c| c.tau)
    }

    fn points_for(&self, l: usize) -> Vec<(f64, f64, f64)> {
        let mut v: Vec<(f64, f64, f64)> = self
            .cells
            .iter()
            .filter(|c| c.l == l && c.tau.is_some())
            .map(|c| (c.p_x, c.tau.unwrap(), c.tau_err.unwrap_or(0.0)))
            .collect();
        v.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        v
    }
}

/// Configuration of a τ scan.
#[derive(Debug, Clone)]
pub struct TauScanConfig {
    pub p: f64,
    pub l_list: Vec<usize>,
    pub px_grid: Vec<f64>,
    pub circuits_per_cell: usize,
    pub horizon_mult: usize,
    pub master_seed: u64,
    pub bootstrap_resamples: usize,
    pub window: FitWindowPolicy,
}

/// Runs the ensembles for every (L, p_x) cell and fits a decay constant per
/// cell, with a bootstrap over circuits for the uncertainty. Fit failures
/// are recorded per cell and do not abort the scan.
pub fn tau_scan(cfg: &TauScanConfig) -> Result<TauTable> {
    let mut cells = Vec::new();
    for &l in &cfg.l_list {
        for &p_x in &cfg.px_grid {
            let ens = EnsembleConfig {
                l,
                p: cfg.p,
                p_x,
                n_circuits: cfg.circuits_per_cell,
                horizon_mult: cfg.horizon_mult,
                master_seed: cfg.master_seed,
            };
            let times = collect_purification_times(&ens)?;
            let curve = curve_from_times(&ens, &times)?;
            let cell = match fit_decay(&curve, &cfg.window) {
                Ok(fit) => {
                    let tau_err = bootstrap_tau_err(cfg, &ens, &times);
                    TauCell {
                        l,
                        p_x,
                        tau: Some(fit.tau),
                        tau_err,
                        r2: Some(fit.r2),
                        window: Some(fit.window),
                        n_circuits: cfg.circuits_per_cell,
                        error: None,
                    }
                }
                Err(e) => TauCell {
                    l,
                    p_x,
                    tau: None,
                    tau_err: None,
                    r2: None,
                    window: None,
                    n_circuits: cfg.circuits_per_cell,
                    error: Some(e.to_string()),
                },
            };
            cells.push(cell);
        }
    }
    Ok(TauTable {
        p: cfg.p,
        master_seed: cfg.master_seed,
        circuits_per_cell: cfg.circuits_per_cell,
        horizon_mult: cfg.horizon_mult,
        bootstrap_resamples: cfg.bootstrap_resamples,
        cells,
    })
}

fn bootstrap_tau_err(
    cfg: &TauScanConfig,
    ens: &EnsembleConfig,
    times: &[Option<u32>],
) -> Option<f64> {
    if cfg.bootstrap_resamples < 2 {
        return None;
    }
    let mut rng = seed::rng_for(
        cfg.master_seed,
        &[TAG_BOOTSTRAP, ens.l as u64, ens.p_x.to_bits()],
    );
    let mut taus = Vec::with_capacity(cfg.bootstrap_resamples);
    for _ in 0..cfg.bootstrap_resamples {
        let resample: Vec<Option<u32>> = (0..times.len())
            .map(|_| times[rng.gen_range(0..times.len())])
            .collect();
        let curve = curve_from_times(ens, &resample).ok()?;
        if let Ok(fit) = fit_decay(&curve, &cfg.window) {
            taus.push(fit.tau);
        }
    }
    if taus.len() < 2 {
        return None;
    }
    let mean = taus.iter().sum::<f64>() / taus.len() as f64;
    let var = taus.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (taus.len() - 1) as f64;
    Some(var.sqrt())
}

// ---------------------------------------------------------------- crossing

/// Crossing of τ/L^z curves across adjacent system sizes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrossingEstimate {
    pub p_xc: f64,
    /// Spread (max − min) of the per-pair estimates.
    pub spread: f64,
    pub z_used: f64,
    pub pairs: Vec<(usize, usize, f64)>,
}

/// Locates p_xc from sign changes of τ/L^z differences between adjacent
/// sizes, interpolating piecewise-linearly in p_x.
pub fn find_crossing(table: &TauTable, z: f64) -> Result<CrossingEstimate> {
    let sizes = table.sizes();
    if sizes.len() < 3 {
        return Err(Error::NoCrossing(format!(
            "need at least 3 sizes with fits, have {}",
            sizes.len()
        )));
    }
    let mut pairs = Vec::new();
    for w in sizes.windows(2) {
        let (l1, l2) = (w[0], w[1]);
        if l1 == l2 {
            return Err(Error::NoCrossing("degenerate size pair".into()));
        }
        let a = table.points_for(l1);
        let b = table.points_for(l2);
        // Common p_x grid.
        let mut common: Vec<(f64, f64, f64)> = Vec::new();
        for &(px, tau1, _) in &a {
            if let Some(&(_, tau2, _)) = b.iter().find(|&&(q, _, _)| q == px) {
                common.push((
                    px,
                    tau1 / (l1 as f64).powf(z),
                    tau2 / (l2 as f64).powf(z),
                ));
            }
        }
        if common.len() < 5 {
            continue;
        }
        let mut roots = Vec::new();
        for k in 0..common.len() - 1 {
            let d0 = common[k].2 - common[k].1;
            let d1 = common[k + 1].2 - common[k + 1].1;
            if d0 == 0.0 {
                roots.push(common[k].0);
            } else if d0 * d1 < 0.0 {
                let f = d0 / (d0 - d1);
                roots.push(common[k].0 + f * (common[k + 1].0 - common[k].0));
            }
        }
        if !roots.is_empty() {
            let est = roots.iter().sum::<f64>() / roots.len() as f64;
            pairs.push((l1, l2, est));
        }
    }
    if pairs.is_empty() {
        return Err(Error::NoCrossing(
            "no sign change between any adjacent size pair".into(),
        ));
    }
    let estimates: Vec<f64> = pairs.iter().map(|p| p.2).collect();
    let p_xc = estimates.iter().sum::<f64>() / estimates.len() as f64;
    let spread = estimates
        .iter()
        .fold(f64::NEG_INFINITY, |m, &v| m.max(v))
        - estimates.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    Ok(CrossingEstimate {
        p_xc,
        spread: spread.max(0.0),
        z_used: z,
        pairs,
    })
}

/// Solves a 3×3 linear system by Gaussian elimination.
fn solve3(mut m: [[f64; 4]; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&a, &b| {
            m[a][col].abs().partial_cmp(&m[b][col].abs()).unwrap()
        })?;
        if m[pivot][col].abs() < 1e-14 {
            return None;
        }
        m.swap(col, pivot);
        for row in 0..3 {
            if row != col {
                let f = m[row][col] / m[col][col];
                for k in col..4 {
                    m[row][k] -= f * m[col][k];
                }
            }
        }
    }
    Some([m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]])
}

/// Estimates (p_x at the inflection, z) from the family of log-log τ(L)
/// curves: the critical p_x is where the quadratic curvature in ln L changes
/// sign, and z is the linear slope there.
pub fn estimate_z_inflection(table: &TauTable) -> Result<(f64, f64)> {
    let sizes = table.sizes();
    if sizes.len() < 3 {
        return Err(Error::FitFailed(
            "inflection estimate needs at least 3 sizes".into(),
        ));
    }
    let mut px_list: Vec<f64> = table
        .cells
        .iter()
        .filter(|c| c.tau.is_some())
        .map(|c| c.p_x)
        .collect();
    px_list.sort_by(|a, b| a.partial_cmp(b).unwrap());
    px_list.dedup();

    // Quadratic fit ln τ = a + b·lnL + c·(lnL)² per p_x.
    let mut rows: Vec<(f64, f64, f64)> = Vec::new(); // (p_x, b, c)
    for &px in &px_list {
        let pts: Vec<(f64, f64)> = sizes
            .iter()
            .filter_map(|&l| table.tau_at(l, px).map(|t| ((l as f64).ln(), t.ln())))
            .collect();
        if pts.len() < 3 {
            continue;
        }
        let n = pts.len() as f64;
        let s = |f: &dyn Fn(&(f64, f64)) -> f64| pts.iter().map(f).sum::<f64>();
        let (su, su2, su3, su4) = (
            s(&|p| p.0),
            s(&|p| p.0.powi(2)),
            s(&|p| p.0.powi(3)),
            s(&|p| p.0.powi(4)),
        );
        let (sv, suv, su2v) = (s(&|p| p.1), s(&|p| p.0 * p.1), s(&|p| p.0 * p.0 * p.1));
        let sol = solve3([
            [n, su, su2, sv],
            [su, su2, su3, suv],
            [su2, su3, su4, su2v],
        ]);
        if let Some([_a, b, c]) = sol {
            rows.push((px, b, c));
        }
    }
    if rows.len() < 2 {
        return Err(Error::FitFailed(
            "inflection estimate needs at least 2 usable p_x points".into(),
        ));
    }
    // Mixed side curves bend up (c > 0), pure side down: find the sign
    // change of c; interpolate b there.
    for k in 0..rows.len() - 1 {
        let (px0, b0, c0) = rows[k];
        let (px1, b1, c1) = rows[k + 1];
        if c0 == 0.0 {
            return Ok((px0, b0));
        }
        if c0 * c1 < 0.0 {
            let f = c0 / (c0 - c1);
            return Ok((px0 + f * (px1 - px0), b0 + f * (b1 - b0)));
        }
    }
    // No sign change: fall back to the flattest curve.
    let best = rows
        .iter()
        .min_by(|a, b| a.2.abs().partial_cmp(&b.2.abs()).unwrap())
        .unwrap();
    Ok((best.0, best.1))
}

// ---------------------------------------------------------------- collapse

/// Critical parameters from the collapse optimization.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CriticalEstimate {
    pub p_xc: f64,
    pub z: f64,
    pub nu: f64,
    pub cost: f64,
}

/// Rescaled collapse points (x̃, ỹ, L).
pub fn collapse_points(table: &TauTable, p_xc: f64, z: f64, nu: f64) -> Vec<(f64, f64, usize)> {
    table
        .cells
        .iter()
        .filter_map(|c| {
            c.tau.map(|tau| {
                let lf = c.l as f64;
                (
                    (c.p_x - p_xc) * lf.powf(z / nu),
                    tau / lf.powf(z),
                    c.l,
                )
            })
        })
        .collect()
}

/// Collapse cost: variance-normalized mean squared deviation of each point
/// from the piecewise-linear interpolation through the other sizes' points.
pub fn collapse_cost(table: &TauTable, p_xc: f64, z: f64, nu: f64) -> Result<f64> {
    let sizes = table.sizes();
    if sizes.len() < 2 {
        return Err(Error::CollapseFailed(
            "collapse needs at least 2 sizes".into(),
        ));
    }
    let pts = collapse_points(table, p_xc, z, nu);
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
    let var_y = pts.iter().map(|p| (p.1 - mean_y).powi(2)).sum::<f64>() / pts.len() as f64;
    if var_y <= 0.0 {
        return Err(Error::CollapseFailed("degenerate collapse data".into()));
    }
    let mut sq_sum = 0.0;
    let mut count = 0usize;
    for &(x, y, l) in &pts {
        let mut others: Vec<(f64, f64)> = pts
            .iter()
            .filter(|p| p.2 != l)
            .map(|p| (p.0, p.1))
            .collect();
        others.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        if others.is_empty() || x < others[0].0 || x > others[others.len() - 1].0 {
            continue;
        }
        let j = others.partition_point(|p| p.0 <= x).min(others.len() - 1);
        let (x0, y0) = others[j.saturating_sub(1)];
        let (x1, y1) = others[j];
        let interp = if (x1 - x0).abs() < 1e-300 {
            0.5 * (y0 + y1)
        } else {
            y0 + (y1 - y0) * (x - x0) / (x1 - x0)
        };
        sq_sum += (y - interp).powi(2);
        count += 1;
    }
    // Require overlap for at least half the points, otherwise the
    // optimizer can shrink the evaluated set instead of collapsing.
    if count * 2 < pts.len() {
        return Err(Error::CollapseFailed(format!(
            "only {count}/{} points have an interpolation bracket",
            pts.len()
        )));
    }
    Ok(sq_sum / count as f64 / var_y)
}

/// Coordinate-descent refinement of (p_xc, z, ν) by grid scans with
/// shrinking brackets. Deterministic given the inputs.
pub fn optimize_collapse(
    table: &TauTable,
    init: (f64, f64, f64),
) -> Result<CriticalEstimate> {
    let sizes = table.sizes();
    if sizes.len() < 2 {
        return Err(Error::CollapseFailed(
            "collapse needs at least 2 sizes".into(),
        ));
    }
    let cost_of = |p: f64, z: f64, nu: f64| -> f64 {
        if !(0.0..=1.0).contains(&p) || z <= 0.005 || nu <= 0.02 {
            return f64::INFINITY;
        }
        collapse_cost(table, p, z, nu).unwrap_or(f64::INFINITY)
    };
    let mut best = (init.0, init.1.max(0.01), init.2.max(0.05));
    let mut best_cost = cost_of(best.0, best.1, best.2);
    let mut widths = (0.06, 0.12, 0.3);
    for _round in 0..30 {
        for param in 0..3 {
            let (center, width) = match param {
                0 => (best.0, widths.0),
                1 => (best.1, widths.1),
                _ => (best.2, widths.2),
            };
            const STEPS: usize = 17;
            for k in 0..STEPS {
                let v = center - width + 2.0 * width * k as f64 / (STEPS - 1) as f64;
                let cand = match param {
                    0 => (v, best.1, best.2),
                    1 => (best.0, v, best.2),
                    _ => (best.0, best.1, v),
                };
                let c = cost_of(cand.0, cand.1, cand.2);
                if c < best_cost {
                    best_cost = c;
                    best = cand;
                }
            }
        }
        widths = (widths.0 * 0.65, widths.1 * 0.65, widths.2 * 0.65);
    }
    if !best_cost.is_finite() {
        return Err(Error::CollapseFailed(
            "no parameter setting produced a valid collapse".into(),
        ));
    }
    Ok(CriticalEstimate {
        p_xc: best.0,
        z: best.1,
        nu: best.2,
        cost: best_cost,
    })
}

// ------------------------------------------------------------ phase diagram

/// One row of the phase-boundary table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhaseBoundaryRow {
    pub p: f64,
    pub p_xc: Option<f64>,
    pub spread: Option<f64>,
    pub z: Option<f64>,
    pub error: Option<String>,
}

/// τ-scan plus crossing analysis per measurement probability; failures are
/// recorded per row and the sweep continues.
pub fn phase_diagram_sweep(p_list: &[f64], base: &TauScanConfig) -> Vec<PhaseBoundaryRow> {
    p_list
        .iter()
        .map(|&p| {
            let cfg = TauScanConfig {
                p,
                ..base.clone()
            };
            let run = || -> Result<(f64, f64, f64)> {
                let table = tau_scan(&cfg)?;
                let (_pxi, z) = estimate_z_inflection(&table)?;
                let crossing = find_crossing(&table, z)?;
                Ok((crossing.p_xc, crossing.spread, z))
            };
            match run() {
                Ok((p_xc, spread, z)) => PhaseBoundaryRow {
                    p,
                    p_xc: Some(p_xc),
                    spread: Some(spread),
                    z: Some(z),
                    error: None,
                },
                Err(e) => PhaseBoundaryRow {
                    p,
                    p_xc: None,
                    spread: None,
                    z: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}
