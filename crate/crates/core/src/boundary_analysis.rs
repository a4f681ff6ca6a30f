//! Freezing time, point classification and local profiles of the free
//! boundary.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::AnalysisError;
use crate::frontier::{FrontierPath, JumpRecord};
use crate::grid_solver::Field;
use crate::potential::PotentialField;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointLabel {
    RegularInJump,
    RegularVanishing,
    SingularEndpoint,
    SingularCritical,
    Unresolved,
    /// The frontier never passed the point within the horizon.
    Unfrozen,
}

impl fmt::Display for PointLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PointLabel::RegularInJump => "regular_in_jump",
            PointLabel::RegularVanishing => "regular_vanishing",
            PointLabel::SingularEndpoint => "singular_endpoint",
            PointLabel::SingularCritical => "singular_critical",
            PointLabel::Unresolved => "unresolved",
            PointLabel::Unfrozen => "unfrozen",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FreezingProfile {
    pub x_grid: Vec<f64>,
    /// `+inf` where the frontier never passed.
    pub s: Vec<f64>,
    pub s_prime: Vec<f64>,
    /// Empty until [`classify_points`] runs.
    pub labels: Vec<PointLabel>,
    pub boundary_value: Vec<f64>,
}

impl FreezingProfile {
    pub fn count(&self, label: PointLabel) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    /// Unresolved share among frozen points outside jump intervals.
    pub fn unresolved_fraction(&self) -> f64 {
        let considered = self
            .labels
            .iter()
            .filter(|l| {
                matches!(
                    l,
                    PointLabel::RegularVanishing | PointLabel::SingularCritical | PointLabel::Unresolved
                )
            })
            .count();
        if considered == 0 {
            0.0
        } else {
            self.count(PointLabel::Unresolved) as f64 / considered as f64
        }
    }

    /// Largest `|s(x_{i+1}) - s(x_i)| / (x_{i+1} - x_i)` with both points in
    /// `[lo, hi]` and frozen.
    pub fn max_adjacent_slope(&self, lo: f64, hi: f64) -> f64 {
        self.x_grid
            .windows(2)
            .zip(self.s.windows(2))
            .filter(|(x, s)| x[0] >= lo && x[1] <= hi && s[0].is_finite() && s[1].is_finite())
            .map(|(x, s)| (s[1] - s[0]).abs() / (x[1] - x[0]))
            .fold(0.0, f64::max)
    }

    /// `x,s,s_prime,label,boundary_value`
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,s,s_prime,label,boundary_value\n");
        for i in 0..self.x_grid.len() {
            let label = self.labels.get(i).map_or(String::new(), |l| l.to_string());
            let bv = self.boundary_value.get(i).copied().unwrap_or(f64::NAN);
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                self.x_grid[i], self.s[i], self.s_prime[i], label, bv
            ));
        }
        out
    }
}

fn jump_containing(jumps: &[JumpRecord], x: f64) -> Option<&JumpRecord> {
    jumps.iter().find(|j| x >= j.lambda_minus && x < j.lambda_plus)
}

/// Left inverse of the frontier, `s(x) = inf{t : lambda_t > x}`.
///
/// Between samples the crossing time is interpolated linearly, except for
/// points covered by a registered jump, which take the jump time.
pub fn freezing_time(path: &FrontierPath, x_grid: &[f64]) -> FreezingProfile {
    let s: Vec<f64> = x_grid.iter().map(|&x| crossing_time(path, x)).collect();
    let s_prime = centered_slopes(x_grid, &s);
    FreezingProfile {
        x_grid: x_grid.to_vec(),
        s,
        s_prime,
        labels: Vec::new(),
        boundary_value: Vec::new(),
    }
}

/// Crossing time of one point; see [`freezing_time`].
pub fn crossing_time(path: &FrontierPath, x: f64) -> f64 {
    if path.is_empty() {
        return f64::INFINITY;
    }
    if x < path.lambda0() {
        return 0.0;
    }
    if let Some(j) = jump_containing(&path.jumps, x) {
        return j.t;
    }
    let k = path.lambda.partition_point(|&l| l <= x);
    if k >= path.len() {
        return f64::INFINITY;
    }
    if k == 0 {
        return path.times[0];
    }
    let (l0, l1) = (path.lambda[k - 1], path.lambda[k]);
    let (t0, t1) = (path.times[k - 1], path.times[k]);
    t0 + (x - l0) / (l1 - l0) * (t1 - t0)
}

fn centered_slopes(x: &[f64], s: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|i| {
            let ok = |k: usize| s[k].is_finite();
            if !ok(i) {
                return f64::NAN;
            }
            let lo = if i > 0 && ok(i - 1) { i - 1 } else { i };
            let hi = if i + 1 < n && ok(i + 1) { i + 1 } else { i };
            if lo == hi {
                f64::NAN
            } else {
                (s[hi] - s[lo]) / (x[hi] - x[lo])
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    pub eps_u: f64,
    /// Distance from a jump endpoint inside which points count as the
    /// endpoint itself.
    pub endpoint_band: f64,
    /// Number of pre-freeze samples used for the extrapolation.
    pub samples: usize,
}

impl ClassifyOptions {
    pub fn new(alpha: f64, dx: f64) -> Self {
        ClassifyOptions {
            eps_u: 0.1 / alpha,
            endpoint_band: 2.0 * dx,
            samples: 3,
        }
    }
}

/// Labels every point of `profile` and estimates `u(x, s(x)-)`.
pub fn classify_points(
    profile: &FreezingProfile,
    field: &Field,
    jumps: &[JumpRecord],
    opts: &ClassifyOptions,
) -> FreezingProfile {
    let alpha = field.alpha;
    let mut out = profile.clone();
    out.labels.clear();
    out.boundary_value.clear();
    for (i, &x) in profile.x_grid.iter().enumerate() {
        let s = profile.s[i];
        let bv = boundary_value(field, x, s, opts.samples);
        out.boundary_value.push(bv);
        let near_end = jumps.iter().any(|j| {
            (x - j.lambda_minus).abs() <= opts.endpoint_band || (x - j.lambda_plus).abs() <= opts.endpoint_band
        });
        let label = if !s.is_finite() {
            PointLabel::Unfrozen
        } else if near_end {
            PointLabel::SingularEndpoint
        } else if jumps.iter().any(|j| j.contains(x)) {
            PointLabel::RegularInJump
        } else if !bv.is_finite() {
            PointLabel::Unresolved
        } else if bv < opts.eps_u {
            PointLabel::RegularVanishing
        } else if alpha > 0.0 && (bv - 1.0 / alpha).abs() < opts.eps_u {
            PointLabel::SingularCritical
        } else {
            PointLabel::Unresolved
        };
        out.labels.push(label);
    }
    out
}

/// `u(x, s-)` by a least-squares line through the last `samples` liquid
/// samples at the node nearest `x` before time `s`.
fn boundary_value(field: &Field, x: f64, s: f64, samples: usize) -> f64 {
    if !s.is_finite() || field.t_grid.is_empty() {
        return f64::NAN;
    }
    let j = field.nearest_node(x);
    let mut pts = Vec::with_capacity(samples);
    let k_end = field.t_grid.partition_point(|&t| t < s);
    for k in (0..k_end).rev() {
        if j < field.frontier_index[k] {
            continue;
        }
        pts.push((field.t_grid[k], field.values[k][j]));
        if pts.len() == samples.max(1) {
            break;
        }
    }
    match pts.len() {
        0 => f64::NAN,
        1 => pts[0].1,
        m => {
            let mf = m as f64;
            let tm = pts.iter().map(|p| p.0).sum::<f64>() / mf;
            let um = pts.iter().map(|p| p.1).sum::<f64>() / mf;
            let sxx: f64 = pts.iter().map(|p| (p.0 - tm).powi(2)).sum();
            let sxy: f64 = pts.iter().map(|p| (p.0 - tm) * (p.1 - um)).sum();
            let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
            um + slope * (s - tm)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlowupVerdict {
    VanishingProfile,
    CriticalProfile,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlowupFit {
    pub x0: f64,
    pub t0: f64,
    pub radii: Vec<f64>,
    /// Relative RMS misfit against `(x+)^2 / alpha`, per radius.
    pub residual_vanishing: Vec<f64>,
    /// Relative RMS misfit against `-t / alpha`, per radius.
    pub residual_critical: Vec<f64>,
    /// Radius the verdict was taken at.
    pub radius: f64,
    pub verdict: BlowupVerdict,
}

impl BlowupFit {
    /// Smaller of the two residuals at the verdict radius.
    pub fn best_residual(&self) -> f64 {
        let i = self.radii.iter().position(|&r| r == self.radius).unwrap_or(0);
        self.residual_vanishing[i].min(self.residual_critical[i])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlowupOptions {
    pub radii: Vec<f64>,
    /// Radii below this are not resolved in space.
    pub min_radius: f64,
    /// `r^2` must cover at least this much time.
    pub min_time_span: f64,
    /// Relative residual below which a profile is accepted.
    pub tolerance: f64,
}

impl BlowupOptions {
    /// Geometric radii from `4 dx` up. `w` is interpolated linearly in
    /// time, which is accurate for both limit profiles, so the backward
    /// cylinder only has to cover a quarter of a sample interval.
    pub fn for_grid(dx: f64, dt_sample: f64) -> Self {
        let min_radius = 4.0 * dx;
        BlowupOptions {
            radii: (0..6).map(|i| min_radius * 1.5f64.powi(i)).collect(),
            min_radius,
            min_time_span: 0.25 * dt_sample,
            tolerance: 0.1,
        }
    }
}

const BLOWUP_NX: usize = 21;
const BLOWUP_NT: usize = 11;

/// Parabolic rescalings `w_r(x, t) = w(x0 + x r, t0 + t r^2) / r^2` on
/// `[-1, 1] x [-1, 0]` compared with the two admissible limits.
pub fn blowup_fit(
    w: &PotentialField,
    x0: f64,
    t0: f64,
    jumps: &[JumpRecord],
    opts: &BlowupOptions,
) -> Result<BlowupFit, AnalysisError> {
    if jumps.iter().any(|j| x0 >= j.lambda_minus && x0 <= j.lambda_plus) {
        return Err(AnalysisError::InsideJump(x0));
    }
    let alpha = w.alpha;
    let gap = jumps
        .iter()
        .map(|j| (x0 - j.lambda_plus).abs().min((x0 - j.lambda_minus).abs()))
        .fold(f64::INFINITY, f64::min);
    let mut fit = BlowupFit {
        x0,
        t0,
        radii: Vec::new(),
        residual_vanishing: Vec::new(),
        residual_critical: Vec::new(),
        radius: f64::NAN,
        verdict: BlowupVerdict::Inconclusive,
    };
    for &r in &opts.radii {
        if r < opts.min_radius || r * r < opts.min_time_span || r > gap {
            continue;
        }
        let (mut ev, mut ec, mut nv, mut nc) = (0.0, 0.0, 0.0, 0.0);
        let mut complete = true;
        for a in 0..BLOWUP_NX {
            let xi = -1.0 + 2.0 * a as f64 / (BLOWUP_NX - 1) as f64;
            for b in 0..BLOWUP_NT {
                let tau = -(b as f64) / (BLOWUP_NT - 1) as f64;
                let Some(v) = w.sample(x0 + xi * r, t0 + tau * r * r) else {
                    complete = false;
                    continue;
                };
                let wr = v / (r * r);
                let pv = xi.max(0.0).powi(2) / alpha;
                let pc = -tau / alpha;
                ev += (wr - pv).powi(2);
                ec += (wr - pc).powi(2);
                nv += pv * pv;
                nc += pc * pc;
            }
        }
        if !complete {
            continue;
        }
        fit.radii.push(r);
        fit.residual_vanishing.push((ev / nv).sqrt());
        fit.residual_critical.push((ec / nc).sqrt());
    }
    if fit.radii.is_empty() {
        return Err(AnalysisError::NoRadius(opts.min_radius));
    }
    fit.radius = fit.radii[0];
    let (rv, rc) = (fit.residual_vanishing[0], fit.residual_critical[0]);
    fit.verdict = if rv.min(rc) >= opts.tolerance {
        BlowupVerdict::Inconclusive
    } else if rv <= rc {
        BlowupVerdict::VanishingProfile
    } else {
        BlowupVerdict::CriticalProfile
    };
    Ok(fit)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SpeedReport {
    pub x: Vec<f64>,
    pub relative_error: Vec<f64>,
    pub median: f64,
}

/// Compares `1 / s'(x)` with `alpha u_x(lambda+, s(x)) / 2` at points
/// labelled regular_vanishing with `s' > s_prime_min`.
pub fn speed_formula_check(profile: &FreezingProfile, field: &Field, s_prime_min: f64) -> SpeedReport {
    let dx = field.dx();
    let mut rep = SpeedReport::default();
    for i in 0..profile.x_grid.len() {
        if profile.labels.get(i) != Some(&PointLabel::RegularVanishing) {
            continue;
        }
        let sp = profile.s_prime[i];
        if !(sp > s_prime_min) || !sp.is_finite() {
            continue;
        }
        let k = field.nearest_time(profile.s[i]);
        let f = field.frontier_index[k];
        let u = &field.values[k];
        if f + 1 >= u.len() {
            continue;
        }
        let ux = (u[f + 1] - u[f]) / dx;
        let speed = 1.0 / sp;
        rep.x.push(profile.x_grid[i]);
        rep.relative_error.push((speed - 0.5 * field.alpha * ux).abs() / speed);
    }
    rep.median = median(&rep.relative_error);
    rep
}

pub fn median(v: &[f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// Merges runs of consecutive sample increments above `threshold`.
pub fn detect_jumps(path: &FrontierPath, threshold: f64) -> Vec<JumpRecord> {
    let alpha = path.alpha;
    let mass = |a: f64, b: f64| if alpha > 0.0 { (b - a) / alpha } else { 0.0 };
    let mut out: Vec<JumpRecord> = Vec::new();
    let mut open: Option<JumpRecord> = None;
    for k in 1..path.len() {
        let (a, b) = (path.lambda[k - 1], path.lambda[k]);
        if b - a > threshold {
            match open.as_mut() {
                Some(j) => {
                    j.lambda_plus = b;
                    j.mass = mass(j.lambda_minus, b);
                }
                None => {
                    open = Some(JumpRecord {
                        t: path.times[k],
                        lambda_minus: a,
                        lambda_plus: b,
                        mass: mass(a, b),
                    })
                }
            }
        } else if let Some(j) = open.take() {
            out.push(j);
        }
    }
    out.extend(open);
    // the initial jump lives in the first sample
    if let Some(&l0) = path.lambda.first() {
        if let Some(j0) = path.jumps.iter().find(|j| j.t == 0.0 && j.lambda_plus == l0) {
            out.insert(0, *j0);
        }
    }
    out
}

/// Jumps with `t_lo < t <= t_hi`, or `t_lo <= t` when `closed` is set.
pub fn count_jumps(jumps: &[JumpRecord], t_lo: f64, t_hi: f64, closed: bool) -> usize {
    jumps
        .iter()
        .filter(|j| (j.t > t_lo || (closed && j.t >= t_lo)) && j.t <= t_hi)
        .count()
}

/// Sign changes of `u_x(., t)` above the frontier, skipping slopes smaller
/// than `eps_slope` in magnitude.
pub fn oscillation_count(field: &Field, row: usize, eps_slope: f64) -> usize {
    let u = &field.values[row];
    let dx = field.dx();
    let f = field.frontier_index[row];
    let mut last = 0i8;
    let mut changes = 0;
    for j in f..u.len().saturating_sub(1) {
        let d = (u[j + 1] - u[j]) / dx;
        if d.abs() < eps_slope {
            continue;
        }
        let sign = if d > 0.0 { 1 } else { -1 };
        if last != 0 && sign != last {
            changes += 1;
        }
        last = sign;
    }
    changes
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Nondegeneracy {
    pub c: f64,
    pub x: f64,
    pub t: f64,
}

/// `min u(x, t) / (x - lambda_t)` over samples with `t` in
/// `[t_lo, t_hi]` and `x - lambda_t` in `[2 dx, r]`.
pub fn nondegeneracy_constant(field: &Field, t_lo: f64, t_hi: f64, r: f64) -> Result<Nondegeneracy, AnalysisError> {
    if !(t_lo > 0.0) || t_hi < t_lo {
        return Err(AnalysisError::Window(format!(
            "time window [{t_lo}, {t_hi}] must lie in t > 0"
        )));
    }
    let dx = field.dx();
    let mut best: Option<Nondegeneracy> = None;
    for (k, &t) in field.t_grid.iter().enumerate() {
        if t < t_lo || t > t_hi {
            continue;
        }
        let lambda = field.frontier[k];
        for (j, &x) in field.x_grid.iter().enumerate().skip(field.frontier_index[k]) {
            let d = x - lambda;
            if d < 2.0 * dx {
                continue;
            }
            if d > r {
                break;
            }
            let c = field.values[k][j] / d;
            if best.is_none_or(|b| c < b.c) {
                best = Some(Nondegeneracy { c, x, t });
            }
        }
    }
    best.ok_or_else(|| AnalysisError::Empty("no samples at distance [2dx, r] from the frontier".into()))
}

/// One-sided slopes of `s` just outside a jump, `(s(a) - s(a - h)) / h` at
/// the lower end and `(s(b + h) - s(b)) / h` at the upper end.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EndpointSlope {
    pub t: f64,
    pub lower: f64,
    pub upper: f64,
}

pub fn endpoint_slopes(path: &FrontierPath, h: f64) -> Vec<EndpointSlope> {
    path.jumps
        .iter()
        .map(|j| {
            let lower = if j.lambda_minus - h > path.lambda0() {
                (j.t - crossing_time(path, j.lambda_minus - h)) / h
            } else {
                f64::NAN
            };
            let above = crossing_time(path, j.lambda_plus + h);
            let upper = (above - j.t) / h;
            EndpointSlope { t: j.t, lower, upper }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic;

    fn path(times: Vec<f64>, lambda: Vec<f64>, jumps: Vec<JumpRecord>) -> FrontierPath {
        FrontierPath {
            dt: times[1] - times[0],
            times,
            lambda,
            jumps,
            alpha: 1.0,
        }
    }

    #[test]
    fn single_jump_gives_flat_freezing_time() {
        let times: Vec<f64> = (0..=20).map(|k| k as f64 * 0.1).collect();
        let lambda: Vec<f64> = times.iter().map(|&t| if t < 1.0 - 1e-9 { 0.3 * t } else { 0.5 + 0.1 * (t - 1.0) }).collect();
        let jump = JumpRecord {
            t: 1.0,
            lambda_minus: lambda[9],
            lambda_plus: 0.5,
            mass: 0.5 - lambda[9],
        };
        let p = path(times, lambda, vec![jump]);
        for x in [0.3, 0.35, 0.4, 0.49] {
            assert_eq!(crossing_time(&p, x), 1.0);
        }
        assert!(crossing_time(&p, 0.55) > 1.0);
    }

    #[test]
    fn never_reached_is_infinite() {
        let p = path(vec![0.0, 1.0, 2.0], vec![0.0, 0.2, 0.4], vec![]);
        let prof = freezing_time(&p, &[0.1, 0.3, 1.0, 1.5]);
        assert!(prof.s[2].is_infinite() && prof.s[3].is_infinite());
        assert!(prof.s_prime[1].is_finite());
    }

    #[test]
    fn increasing_frontier_gives_increasing_s() {
        let times: Vec<f64> = (0..=100).map(|k| k as f64 * 0.01).collect();
        let lambda: Vec<f64> = times.iter().map(|&t| (t + 0.01f64).sqrt()).collect();
        let p = path(times, lambda, vec![]);
        let xs: Vec<f64> = (1..50).map(|i| 0.2 + i as f64 * 0.01).collect();
        let prof = freezing_time(&p, &xs);
        assert!(prof.s.windows(2).all(|w| w[1] > w[0]));
        assert!(prof.s_prime.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn smooth_frontier_has_no_jumps_and_initial_jump_is_kept() {
        let times: Vec<f64> = (0..=10).map(|k| k as f64 * 0.1).collect();
        let lambda: Vec<f64> = times.iter().map(|&t| 0.6 + 0.05 * t).collect();
        let j0 = JumpRecord {
            t: 0.0,
            lambda_minus: 0.0,
            lambda_plus: 0.6,
            mass: 0.6,
        };
        let p = path(times.clone(), lambda.clone(), vec![j0]);
        assert_eq!(detect_jumps(&p, 0.05), vec![j0]);
        let q = path(times, lambda.iter().map(|l| l - 0.6).collect(), vec![]);
        assert!(detect_jumps(&q, 0.05).is_empty());
    }

    #[test]
    fn oscillation_counts() {
        let x: Vec<f64> = (0..101).map(|i| i as f64 * 0.01).collect();
        let mk = |f: &dyn Fn(f64) -> f64| Field {
            x_grid: x.clone(),
            t_grid: vec![1.0],
            values: vec![x.iter().map(|&y| f(y)).collect()],
            frontier: vec![0.0],
            frontier_index: vec![1],
            alpha: 1.0,
            cumulative: Vec::new(),
        };
        assert_eq!(oscillation_count(&mk(&|y| (-y).exp()), 0, 0.05), 0);
        assert_eq!(oscillation_count(&mk(&|y| y * (1.0 - y)), 0, 0.05), 1);
        assert_eq!(oscillation_count(&mk(&|y| (6.0 * y).sin() + 2.0), 0, 0.05), 2);
    }

    #[test]
    fn travelling_wave_nondegeneracy_and_speed() {
        let (alpha, v) = (1.0, 0.5);
        let (field, p) = synthetic::travelling_wave(alpha, v, 0.005, 3.0, 0.01, 1.0);
        let r = 0.05;
        let nd = nondegeneracy_constant(&field, 0.2, 1.0, r).unwrap();
        let slope = 2.0 * v / alpha;
        assert!((nd.c - slope).abs() / slope < 0.05, "{}", nd.c);
        assert!(nondegeneracy_constant(&field, 0.0, 1.0, r).is_err());

        let xs: Vec<f64> = (10..90).map(|i| i as f64 * 0.005).collect();
        let prof = freezing_time(&p, &xs);
        for (&x, &s) in xs.iter().zip(&prof.s) {
            assert!((s - x / v).abs() < 1e-9);
        }
        let prof = classify_points(&prof, &field, &[], &ClassifyOptions::new(alpha, 0.005));
        assert_eq!(prof.count(PointLabel::RegularVanishing), xs.len());
        let rep = speed_formula_check(&prof, &field, 1e-6);
        assert!(rep.median < 0.02, "{}", rep.median);
    }

    #[test]
    fn synthetic_blowups_have_zero_residual() {
        let alpha = 2.0;
        let opts = BlowupOptions {
            radii: vec![0.05, 0.1, 0.2],
            min_radius: 0.04,
            min_time_span: 0.0,
            tolerance: 0.1,
        };
        let w = synthetic::potential(alpha, 0.0025, 0.0025, 2.0, 1.0, |x, _| (x - 1.0).max(0.0).powi(2) / alpha);
        let fit = blowup_fit(&w, 1.0, 0.5, &[], &opts).unwrap();
        assert_eq!(fit.verdict, BlowupVerdict::VanishingProfile);
        assert!(fit.best_residual() < 1e-9);

        let w = synthetic::potential(alpha, 0.0025, 0.0025, 2.0, 1.0, |_, t| (0.5 - t).max(0.0) / alpha);
        let fit = blowup_fit(&w, 1.0, 0.5, &[], &opts).unwrap();
        assert_eq!(fit.verdict, BlowupVerdict::CriticalProfile);
        assert!(fit.best_residual() < 1e-9);

        let tiny = BlowupOptions {
            radii: vec![0.001],
            min_radius: 0.01,
            ..opts.clone()
        };
        assert!(matches!(blowup_fit(&w, 1.0, 0.5, &[], &tiny), Err(AnalysisError::NoRadius(_))));
        let j = JumpRecord {
            t: 0.1,
            lambda_minus: 0.9,
            lambda_plus: 1.1,
            mass: 0.1,
        };
        assert!(matches!(blowup_fit(&w, 1.0, 0.5, &[j], &opts), Err(AnalysisError::InsideJump(_))));
    }

    #[test]
    fn labels_follow_jump_geometry() {
        let alpha = 1.0;
        let (field, _) = synthetic::travelling_wave(alpha, 0.5, 0.01, 3.0, 0.01, 1.0);
        let j = JumpRecord {
            t: 0.5,
            lambda_minus: 0.1,
            lambda_plus: 0.3,
            mass: 0.2,
        };
        let prof = FreezingProfile {
            x_grid: vec![0.1, 0.2, 0.3, 2.9],
            s: vec![0.5, 0.5, 0.6, f64::INFINITY],
            s_prime: vec![0.0, 0.0, 1.0, f64::NAN],
            ..Default::default()
        };
        let out = classify_points(&prof, &field, &[j], &ClassifyOptions::new(alpha, 0.01));
        assert_eq!(
            out.labels,
            vec![
                PointLabel::SingularEndpoint,
                PointLabel::RegularInJump,
                PointLabel::SingularEndpoint,
                PointLabel::Unfrozen
            ]
        );
    }
}
