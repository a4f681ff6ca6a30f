//! Time-tail potential `w(x, t) = ∫_t^T u(x, s) ds` of a sampled field,
//! the weighted obstacle problem it solves, and one-sided bounds on `u`.

use serde::{Deserialize, Serialize};

use crate::error::AnalysisError;
use crate::grid_solver::{matrix_csv, parse_matrix_csv, Field, WeightField};

/// Surviving mass below which the horizon is treated as long enough for
/// the truncated integral to stand in for the full one.
pub const HORIZON_MASS: f64 = 1e-3;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PotentialField {
    pub x_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub w: Vec<Vec<f64>>,
    /// Liquid mass left at the last sample; the neglected tail of the
    /// integral is not computable, this is reported in its place.
    pub tail_bound: f64,
    pub alpha: f64,
}

impl PotentialField {
    pub fn dx(&self) -> f64 {
        self.x_grid[1] - self.x_grid[0]
    }

    /// Whether the run went on long enough for potential checks.
    pub fn horizon_ok(&self) -> bool {
        self.tail_bound < HORIZON_MASS
    }

    pub fn to_csv(&self) -> String {
        matrix_csv(&self.x_grid, &self.t_grid, &self.w)
    }

    pub fn from_csv(text: &str, alpha: f64, tail_bound: f64) -> Result<Self, String> {
        let (x_grid, t_grid, w) = parse_matrix_csv(text)?;
        Ok(PotentialField {
            x_grid,
            t_grid,
            w,
            tail_bound,
            alpha,
        })
    }

    /// Bilinear interpolation; `None` outside the sampled box.
    pub fn sample(&self, x: f64, t: f64) -> Option<f64> {
        let (nx, nt) = (self.x_grid.len(), self.t_grid.len());
        if nx < 2 || nt < 2 {
            return None;
        }
        let (x0, x1) = (self.x_grid[0], self.x_grid[nx - 1]);
        let (t0, t1) = (self.t_grid[0], self.t_grid[nt - 1]);
        if !(x0..=x1).contains(&x) || !(t0..=t1).contains(&t) {
            return None;
        }
        let dx = self.dx();
        let jf = ((x - x0) / dx).floor() as usize;
        let j = jf.min(nx - 2);
        let a = ((x - self.x_grid[j]) / dx).clamp(0.0, 1.0);
        let k = self.t_grid.partition_point(|&s| s <= t).clamp(1, nt - 1) - 1;
        let b = ((t - self.t_grid[k]) / (self.t_grid[k + 1] - self.t_grid[k])).clamp(0.0, 1.0);
        let row = |k: usize| (1.0 - a) * self.w[k][j] + a * self.w[k][j + 1];
        Some((1.0 - b) * row(k) + b * row(k + 1))
    }
}

/// Backward trapezoid integration of the field in time. When the field
/// carries its running integral the trapezoid sums are taken at solver
/// resolution; otherwise over the sample times.
pub fn compute_w(field: &Field) -> PotentialField {
    let nt = field.t_grid.len();
    let nx = field.x_grid.len();
    let mut w = vec![vec![0.0; nx]; nt];
    if field.cumulative.len() == nt && nt > 0 {
        let total = &field.cumulative[nt - 1];
        for (row, cum) in w.iter_mut().zip(&field.cumulative) {
            for ((v, &a), &b) in row.iter_mut().zip(total).zip(cum) {
                *v = a - b;
            }
        }
    } else {
        for k in (0..nt.saturating_sub(1)).rev() {
            let h = field.t_grid[k + 1] - field.t_grid[k];
            for j in 0..nx {
                w[k][j] = w[k + 1][j] + 0.5 * h * (field.values[k][j] + field.values[k + 1][j]);
            }
        }
    }
    PotentialField {
        x_grid: field.x_grid.clone(),
        t_grid: field.t_grid.clone(),
        w,
        tail_bound: if nt > 0 { field.mass(nt - 1) } else { 0.0 },
        alpha: field.alpha,
    }
}

/// Bands excluded from the residual: `space` around the frontier and
/// `time` at both ends of the horizon.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Margin {
    pub space: f64,
    pub time: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ObstacleReport {
    /// Space-time integral of `|w_t - w_xx / 2 + nu chi|` over the interior.
    pub l1: f64,
    pub max: f64,
    pub points: usize,
    pub eps_w: f64,
    pub negative_w: usize,
    pub positive_w_t: usize,
    pub positive_but_frozen: usize,
    /// Largest `|min(w, w_t - w_xx / 2 + nu)|` over the interior.
    pub complementarity: f64,
}

/// Default positivity threshold for `w`.
pub fn default_eps_w(dx: f64, alpha: f64) -> f64 {
    10.0 * dx * dx / alpha
}

/// Whether node `j` is on the frozen side of the frontier at time `t`.
fn frozen_before(nu: &WeightField, j: usize, t: f64) -> bool {
    nu.freeze_time[j] <= t
}

/// Discrete residual of the weighted obstacle problem.
///
/// With a finite horizon the identity only holds at points that froze
/// before the last sample, so the interior region is restricted to them.
pub fn obstacle_residual(w: &PotentialField, nu: &WeightField, margin: Margin, eps_w: f64) -> ObstacleReport {
    let nt = w.t_grid.len();
    let nx = w.x_grid.len();
    let dx = w.dx();
    let mut rep = ObstacleReport {
        eps_w,
        ..Default::default()
    };
    if nt < 3 || nx < 3 {
        return rep;
    }
    let t_end = w.t_grid[nt - 1];
    let cells = (margin.space / dx).ceil() as usize;
    for k in 0..nt {
        let t = w.t_grid[k];
        for j in 0..nx {
            let v = w.w[k][j];
            if v < -eps_w {
                rep.negative_w += 1;
            }
            if v > eps_w && frozen_before(nu, j, t) {
                rep.positive_but_frozen += 1;
            }
            if k + 1 < nt {
                let wt = (w.w[k + 1][j] - v) / (w.t_grid[k + 1] - t);
                if wt > eps_w {
                    rep.positive_w_t += 1;
                }
            }
        }
    }
    for k in 1..nt - 1 {
        let t = w.t_grid[k];
        if t < margin.time || t > t_end - margin.time {
            continue;
        }
        let (tm, tp) = (w.t_grid[k - 1], w.t_grid[k + 1]);
        let ht = 0.5 * (tp - tm);
        for j in 1..nx - 1 {
            if !nu.freeze_time[j].is_finite() || nu.freeze_time[j] > t_end - margin.time {
                continue;
            }
            // keep the stencil and a band of `margin.space` on one side of
            // the frontier for the whole time stencil
            let lo = j.saturating_sub(cells + 1);
            let hi = (j + cells + 1).min(nx - 1);
            let side = |s: f64| frozen_before(nu, j, s);
            let same = (lo..=hi).all(|i| {
                frozen_before(nu, i, tm) == side(tm) && frozen_before(nu, i, tp) == side(tp)
            });
            if !same || side(tm) != side(tp) {
                continue;
            }
            let w_t = (w.w[k + 1][j] - w.w[k - 1][j]) / (tp - tm);
            let w_xx = (w.w[k][j + 1] - 2.0 * w.w[k][j] + w.w[k][j - 1]) / (dx * dx);
            let chi = if w.w[k][j] > eps_w { 1.0 } else { 0.0 };
            let r = (w_t - 0.5 * w_xx + nu.nu[j] * chi).abs();
            rep.l1 += r * dx * ht;
            rep.max = rep.max.max(r);
            let lw = w_t - 0.5 * w_xx + nu.nu[j];
            rep.complementarity = rep.complementarity.max(w.w[k][j].min(lw).abs());
            rep.points += 1;
        }
    }
    rep
}

/// Compact space-time box for bound checks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub t_min: f64,
    pub t_max: f64,
    pub x_min: f64,
    pub x_max: f64,
}

impl Window {
    fn contains(&self, x: f64, t: f64) -> bool {
        (self.t_min..=self.t_max).contains(&t) && (self.x_min..=self.x_max).contains(&x)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub max_w_t: f64,
    pub max_abs_w_xx: f64,
    /// Forward difference in time on nodes liquid at both samples.
    pub max_u_t: f64,
    /// Centered second difference with all three nodes liquid.
    pub max_u_xx: f64,
    pub min_u_x: f64,
    /// Unsigned second difference on the few nodes around the frontier,
    /// kink included.
    pub max_abs_u_xx_front: f64,
}

/// Nodes on each side of the frontier included in the unsigned check.
const FRONT_BAND: usize = 2;

pub fn bound_suite(field: &Field, w: &PotentialField, window: Window) -> Result<BoundReport, AnalysisError> {
    if !(window.t_min > 0.0) || window.t_max < window.t_min || window.x_max < window.x_min {
        return Err(AnalysisError::Window(format!("{window:?} must be a box with t_min > 0")));
    }
    let dx = field.dx();
    let nx = field.x_grid.len();
    let nt = field.t_grid.len();
    let mut rep = BoundReport {
        max_w_t: f64::NEG_INFINITY,
        max_abs_w_xx: 0.0,
        max_u_t: f64::NEG_INFINITY,
        max_u_xx: f64::NEG_INFINITY,
        min_u_x: f64::INFINITY,
        max_abs_u_xx_front: 0.0,
    };
    let mut seen = false;
    for k in 0..nt {
        let t = field.t_grid[k];
        if !(window.t_min..=window.t_max).contains(&t) {
            continue;
        }
        let u = &field.values[k];
        let f = field.frontier_index[k];
        for j in 1..nx - 1 {
            let x = field.x_grid[j];
            if !window.contains(x, t) {
                continue;
            }
            seen = true;
            let w_xx = (w.w[k][j + 1] - 2.0 * w.w[k][j] + w.w[k][j - 1]) / (dx * dx);
            rep.max_abs_w_xx = rep.max_abs_w_xx.max(w_xx.abs());
            let u_xx = (u[j + 1] - 2.0 * u[j] + u[j - 1]) / (dx * dx);
            if j + FRONT_BAND >= f && j <= f + FRONT_BAND {
                rep.max_abs_u_xx_front = rep.max_abs_u_xx_front.max(u_xx.abs());
            }
            if j > f {
                rep.max_u_xx = rep.max_u_xx.max(u_xx);
            }
            if j >= f {
                rep.min_u_x = rep.min_u_x.min((u[j + 1] - u[j]) / dx);
            }
            if k + 1 < nt {
                let h = field.t_grid[k + 1] - t;
                rep.max_w_t = rep.max_w_t.max((w.w[k + 1][j] - w.w[k][j]) / h);
                if j >= f.max(field.frontier_index[k + 1]) {
                    rep.max_u_t = rep.max_u_t.max((field.values[k + 1][j] - u[j]) / h);
                }
            }
        }
    }
    if !seen {
        return Err(AnalysisError::Empty("no grid nodes inside the window".into()));
    }
    Ok(rep)
}
