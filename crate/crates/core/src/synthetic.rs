//! Closed-form fields used as oracles for the analysis routines.

use crate::frontier::FrontierPath;
use crate::grid_solver::Field;
use crate::potential::PotentialField;

/// Planar front `lambda_t = v t` with `u = (1 - exp(-2 v (x - v t))) / alpha`
/// above it. This solves the heat equation and the speed condition
/// `lambda' = alpha u_x / 2` exactly, for any `v > 0`.
pub fn travelling_wave(alpha: f64, v: f64, dx: f64, x_max: f64, dt_sample: f64, t_end: f64) -> (Field, FrontierPath) {
    let nx = (x_max / dx).round() as usize + 1;
    let nt = (t_end / dt_sample).round() as usize + 1;
    let x_grid: Vec<f64> = (0..nx).map(|j| j as f64 * dx).collect();
    let t_grid: Vec<f64> = (0..nt).map(|k| k as f64 * dt_sample).collect();
    let frontier: Vec<f64> = t_grid.iter().map(|&t| v * t).collect();
    let values = frontier
        .iter()
        .map(|&l| {
            x_grid
                .iter()
                .map(|&x| if x > l { (1.0 - (-2.0 * v * (x - l)).exp()) / alpha } else { 0.0 })
                .collect()
        })
        .collect();
    let frontier_index = frontier.iter().map(|&l| x_grid.partition_point(|&x| x <= l)).collect();
    let path = FrontierPath {
        times: t_grid.clone(),
        lambda: frontier.clone(),
        jumps: Vec::new(),
        dt: dt_sample,
        alpha,
    };
    let field = Field {
        x_grid,
        t_grid,
        values,
        frontier,
        frontier_index,
        alpha,
        cumulative: Vec::new(),
    };
    (field, path)
}

/// Samples `w(x, t)` on `[0, x_max] x [0, t_end]`.
pub fn potential(alpha: f64, dx: f64, dt: f64, x_max: f64, t_end: f64, w: impl Fn(f64, f64) -> f64) -> PotentialField {
    let nx = (x_max / dx).round() as usize + 1;
    let nt = (t_end / dt).round() as usize + 1;
    let x_grid: Vec<f64> = (0..nx).map(|j| j as f64 * dx).collect();
    let t_grid: Vec<f64> = (0..nt).map(|k| k as f64 * dt).collect();
    let values = t_grid.iter().map(|&t| x_grid.iter().map(|&x| w(x, t)).collect()).collect();
    PotentialField {
        x_grid,
        t_grid,
        w: values,
        tail_bound: 0.0,
        alpha,
    }
}
