use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::boundary_analysis::{
    blowup_fit, classify_points, count_jumps, crossing_time, endpoint_slopes, freezing_time,
    nondegeneracy_constant, oscillation_count, speed_formula_check, BlowupOptions, BlowupVerdict,
    ClassifyOptions, EndpointSlope, FreezingProfile, Nondegeneracy,
};
use crate::densities::Density;
use crate::error::AnalysisError;
use crate::frontier::JumpRecord;
use crate::grid_solver::{Field, WeightField};
use crate::potential::{bound_suite, compute_w, obstacle_residual, BoundReport, ObstacleReport, PotentialField};

use super::compare::{compare_paths, Comparison};
use super::config::{LevelParams, Method, ScenarioConfig};
use super::scenario::LevelRun;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileSummary {
    /// Interior range `[lo, hi]` the statistics below are taken over.
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    /// Interior points outside every jump interval.
    pub free_points: usize,
    pub labels: BTreeMap<String, usize>,
    pub unresolved_fraction: f64,
    pub max_adjacent_slope: f64,
    /// Largest `|s'(x_{i+1}) - s'(x_i)|`.
    pub max_slope_increment: f64,
    /// Pairs with `s` decreasing, over the whole profile.
    pub decreasing_pairs: usize,
    /// Flat pairs farther than `2 dx` from every jump and from `[0, lambda_0]`.
    pub flat_outside_jumps: usize,
    /// Non-flat pairs strictly inside a jump interval.
    pub sloped_inside_jumps: usize,
    pub speed_median: f64,
    pub speed_points: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BlowupSummary {
    pub probed: usize,
    pub vanishing: usize,
    pub critical: usize,
    pub inconclusive: usize,
    pub inside_jump: usize,
    pub failed: usize,
    /// Largest accepted residual among vanishing verdicts.
    pub max_vanishing_residual: f64,
}

impl BlowupSummary {
    /// Share of non-jump probes classified as vanishing.
    pub fn vanishing_fraction(&self) -> f64 {
        let n = self.probed - self.inside_jump;
        if n == 0 {
            0.0
        } else {
            self.vanishing as f64 / n as f64
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowCount {
    pub t0: f64,
    /// Jumps with `t0 <= t <= t_end`.
    pub jumps_closed: usize,
    /// Jumps with `t0 < t <= t_end`.
    pub jumps_open: usize,
    pub oscillations: usize,
}

/// Per-level numbers kept in `summary.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub params: LevelParams,
    pub primary: Method,
    pub lambda0: f64,
    pub lambda_end: f64,
    pub surviving_mass: f64,
    pub jumps: Vec<JumpRecord>,
    pub particle_jumps: Option<usize>,
    pub max_mass_residual: Option<f64>,
    pub nu_integral: f64,
    pub nu_max: f64,
    pub min_w: f64,
    pub obstacle: ObstacleReport,
    /// Points where `{w > eps_w}` and `{t < s(x)}` disagree away from the
    /// frontier; see [`support_band`].
    pub support_mismatch: usize,
    pub bounds: Option<BoundReport>,
    pub nondegeneracy: Option<Nondegeneracy>,
    /// `max u sqrt(t)` over the samples with `t > 0`.
    pub decay_constant: f64,
    /// `max (∫_0^T u(x, s) ds - 2x)` over the grid.
    pub time_integral_excess: f64,
    pub profile: ProfileSummary,
    pub blowup: BlowupSummary,
    pub endpoint_slopes: Vec<EndpointSlope>,
    pub windows: Vec<WindowCount>,
    pub comparison: Option<Comparison>,
}

/// Summary plus the large fields written next to it.
#[derive(Clone, Debug)]
pub struct LevelAnalysis {
    pub summary: LevelSummary,
    pub w: PotentialField,
    pub profile: FreezingProfile,
}

fn restrict(p: &FreezingProfile, lo: f64, hi: f64) -> FreezingProfile {
    let keep: Vec<usize> = (0..p.x_grid.len())
        .filter(|&i| p.x_grid[i] >= lo && p.x_grid[i] <= hi)
        .collect();
    let pick = |v: &[f64]| keep.iter().map(|&i| v[i]).collect::<Vec<_>>();
    FreezingProfile {
        x_grid: pick(&p.x_grid),
        s: pick(&p.s),
        s_prime: pick(&p.s_prime),
        labels: keep.iter().filter_map(|&i| p.labels.get(i).copied()).collect(),
        boundary_value: keep.iter().filter_map(|&i| p.boundary_value.get(i).copied()).collect(),
    }
}

fn near_jump(jumps: &[JumpRecord], x: f64, band: f64) -> bool {
    jumps
        .iter()
        .any(|j| x >= j.lambda_minus - band && x <= j.lambda_plus + band)
}

fn profile_summary(
    full: &FreezingProfile,
    field: &Field,
    jumps: &[JumpRecord],
    lambda0: f64,
    lo: f64,
    hi: f64,
    s_prime_min: f64,
) -> ProfileSummary {
    let dx = field.dx();
    let inner = restrict(full, lo, hi);
    let mut labels = BTreeMap::new();
    for l in &inner.labels {
        *labels.entry(l.to_string()).or_insert(0) += 1;
    }
    let max_slope_increment = inner
        .s_prime
        .windows(2)
        .filter(|w| w[0].is_finite() && w[1].is_finite())
        .map(|w| (w[1] - w[0]).abs())
        .fold(0.0, f64::max);
    let mut decreasing_pairs = 0;
    let mut flat_outside_jumps = 0;
    let mut sloped_inside_jumps = 0;
    for i in 0..full.x_grid.len().saturating_sub(1) {
        let (x0, x1) = (full.x_grid[i], full.x_grid[i + 1]);
        let (s0, s1) = (full.s[i], full.s[i + 1]);
        if s1 < s0 {
            decreasing_pairs += 1;
        }
        if !(s0.is_finite() && s1.is_finite()) {
            continue;
        }
        let inside = jumps.iter().any(|j| x0 > j.lambda_minus && x1 < j.lambda_plus);
        if inside && s1 != s0 {
            sloped_inside_jumps += 1;
        }
        let clear = x0 > lambda0 + 2.0 * dx && !near_jump(jumps, x0, 2.0 * dx) && !near_jump(jumps, x1, 2.0 * dx);
        if clear && s1 == s0 {
            flat_outside_jumps += 1;
        }
    }
    let speed = speed_formula_check(&inner, field, s_prime_min);
    ProfileSummary {
        lo,
        hi,
        points: inner.x_grid.len(),
        free_points: inner.x_grid.iter().filter(|&&x| !near_jump(jumps, x, 0.0)).count(),
        labels,
        unresolved_fraction: inner.unresolved_fraction(),
        max_adjacent_slope: inner.max_adjacent_slope(lo, hi),
        max_slope_increment,
        decreasing_pairs,
        flat_outside_jumps,
        sloped_inside_jumps,
        speed_median: speed.median,
        speed_points: speed.x.len(),
    }
}

fn blowup_summary(w: &PotentialField, path_jumps: &[JumpRecord], xs: &[f64], ts: &[f64], opts: &BlowupOptions) -> BlowupSummary {
    let mut b = BlowupSummary::default();
    for (&x0, &t0) in xs.iter().zip(ts) {
        b.probed += 1;
        match blowup_fit(w, x0, t0, path_jumps, opts) {
            Ok(fit) => match fit.verdict {
                BlowupVerdict::VanishingProfile => {
                    b.vanishing += 1;
                    b.max_vanishing_residual = b.max_vanishing_residual.max(fit.best_residual());
                }
                BlowupVerdict::CriticalProfile => b.critical += 1,
                BlowupVerdict::Inconclusive => b.inconclusive += 1,
            },
            Err(AnalysisError::InsideJump(_)) => b.inside_jump += 1,
            Err(_) => b.failed += 1,
        }
    }
    b
}

/// Width of the band around the frontier where `{w > eps_w}` may differ
/// from `{t < s(x)}`: `2 dx`, widened to where the vanishing profile
/// `(x - lambda)^2 / alpha` crosses `eps_w`.
pub fn support_band(dx: f64, alpha: f64, eps_w: f64) -> f64 {
    (2.0 * dx).max((alpha * eps_w).sqrt() + dx)
}

/// Points `{w > eps_w}` versus `{t < s(x)}` at nodes frozen by the last
/// sample, outside [`support_band`] and after `t_min`. Before `t_min` the
/// liquid far from the initial support is too thin for `w` to clear
/// `eps_w`.
pub fn support_mismatch(w: &PotentialField, nu: &WeightField, frontier: &[f64], eps_w: f64, t_min: f64) -> usize {
    let dx = w.dx();
    let band = support_band(dx, w.alpha, eps_w);
    let t_end = w.t_grid.last().copied().unwrap_or(0.0);
    let mut count = 0;
    for (k, &t) in w.t_grid.iter().enumerate() {
        if t < t_min {
            continue;
        }
        let lambda = frontier[k];
        for (j, &x) in w.x_grid.iter().enumerate() {
            let s = nu.freeze_time[j];
            if !(s <= t_end) || (x - lambda).abs() <= band {
                continue;
            }
            if (w.w[k][j] > eps_w) != (t < s) {
                count += 1;
            }
        }
    }
    count
}

/// Runs every post-processing pass on the primary method of one level.
/// A potential read back from disk can be supplied instead of recomputing.
pub fn analyze_level(cfg: &ScenarioConfig, d: &Density, run: &LevelRun, w: Option<PotentialField>) -> LevelAnalysis {
    let field = run.field();
    let path = run.path();
    let weight = run.weight();
    let dx = run.params.dx;
    let alpha = cfg.alpha;
    let jumps = &path.jumps;
    let w = w.unwrap_or_else(|| compute_w(field));
    let lambda0 = path.lambda0();
    let lambda_end = path.lambda.last().copied().unwrap_or(lambda0);

    let xs: Vec<f64> = field.x_grid.iter().copied().filter(|&x| x <= alpha).collect();
    let opts = ClassifyOptions {
        eps_u: cfg.eps_u(),
        ..ClassifyOptions::new(alpha, dx)
    };
    let profile = classify_points(&freezing_time(path, &xs), field, jumps, &opts);
    let m = cfg.analysis.profile_margin;
    let (lo, hi) = (lambda0 + m, lambda_end - m);
    let profile_stats = profile_summary(&profile, field, jumps, lambda0, lo, hi, cfg.analysis.s_prime_min);

    let k = cfg.analysis.blowup_points;
    let probe_x: Vec<f64> = if hi > lo {
        (0..k).map(|i| lo + (hi - lo) * (i + 1) as f64 / (k + 1) as f64).collect()
    } else {
        Vec::new()
    };
    let probe_t: Vec<f64> = probe_x.iter().map(|&x| crossing_time(path, x)).collect();
    let dt_sample = if field.t_grid.len() > 1 {
        field.t_grid[1] - field.t_grid[0]
    } else {
        cfg.t_end
    };
    let blowup = blowup_summary(&w, jumps, &probe_x, &probe_t, &BlowupOptions::for_grid(dx, dt_sample));

    let eps_w = cfg.eps_w(dx);
    let obstacle = obstacle_residual(&w, weight, cfg.analysis.margin, eps_w);
    let window = cfg.window(d);
    let bounds = bound_suite(field, &w, window).ok();
    let nondegeneracy = nondegeneracy_constant(field, window.t_min, window.t_max, cfg.analysis.nondeg_radius).ok();

    let decay_constant = field
        .t_grid
        .iter()
        .zip(&field.values)
        .filter(|(&t, _)| t > 0.0)
        .map(|(&t, row)| row.iter().cloned().fold(0.0, f64::max) * t.sqrt())
        .fold(0.0, f64::max);
    let time_integral_excess = w
        .w
        .first()
        .map(|row| {
            row.iter()
                .zip(&w.x_grid)
                .map(|(&v, &x)| v - 2.0 * x)
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .unwrap_or(0.0);
    let min_w = w.w.iter().flatten().cloned().fold(f64::INFINITY, f64::min);

    let t_end = path.t_end();
    let windows = cfg
        .analysis
        .jump_windows
        .iter()
        .map(|&t0| WindowCount {
            t0,
            jumps_closed: count_jumps(jumps, t0, t_end, true),
            jumps_open: count_jumps(jumps, t0, t_end, false),
            oscillations: oscillation_count(field, field.nearest_time(t0), cfg.eps_slope(dx)),
        })
        .collect();

    let comparison = match (&run.grid, &run.particle) {
        (Some(g), Some(p)) => {
            let t_tol = run.params.grid_dt.max(run.params.particle_dt);
            let lambda_tol = alpha / p.n as f64 + dx;
            compare_paths(&g.path, &p.path, t_tol, lambda_tol).ok()
        }
        _ => None,
    };

    let summary = LevelSummary {
        params: run.params,
        primary: run.primary(),
        lambda0,
        lambda_end,
        surviving_mass: run.surviving_mass(),
        jumps: jumps.clone(),
        particle_jumps: run.particle.as_ref().map(|p| p.path.jumps.len()),
        max_mass_residual: run.grid.as_ref().map(|g| g.max_mass_residual),
        nu_integral: weight.integral(),
        nu_max: weight.max(),
        min_w,
        support_mismatch: support_mismatch(&w, weight, &field.frontier, eps_w, cfg.analysis.margin.time),
        obstacle,
        bounds,
        nondegeneracy,
        decay_constant,
        time_integral_excess,
        profile: profile_stats,
        blowup,
        endpoint_slopes: endpoint_slopes(path, dx),
        windows,
        comparison,
    };
    LevelAnalysis { summary, w, profile }
}
