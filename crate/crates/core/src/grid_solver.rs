//! Finite-difference solver on a uniform grid.
//!
//! Each step diffuses the surviving temperature with one backward-Euler
//! step (Dirichlet zero at the frozen node, reflecting at `x_max`), moves
//! the frontier by the mass that left through the boundary, and then
//! freezes every node whose cell the frontier has entered. Freezing a node
//! removes its mass and pushes the frontier further; this node cascade is
//! the jump rule applied to the step CDF of the cell masses, so smooth
//! motion and jumps are handled by the same update and
//! `lambda / alpha + mass = 1` holds to rounding.

use serde::{Deserialize, Serialize};

use crate::densities::Density;
use crate::error::SimError;
use crate::frontier::{FrontierPath, PathRecorder};
use crate::jump_rule::{continuum_jump, weighted_cascade, JumpResult, ScanSpec};

/// Space-time samples of the temperature.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Field {
    pub x_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    /// One row per entry of `t_grid`.
    pub values: Vec<Vec<f64>>,
    /// Frontier position at each sample time.
    pub frontier: Vec<f64>,
    /// Index of the first node strictly above the frontier at each sample
    /// time; values vanish below it.
    pub frontier_index: Vec<usize>,
    pub alpha: f64,
    /// Running time integral `∫_0^t u ds` at each sample, accumulated at
    /// solver resolution; empty when the field comes from elsewhere.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cumulative: Vec<Vec<f64>>,
}

impl Field {
    pub fn dx(&self) -> f64 {
        self.x_grid[1] - self.x_grid[0]
    }

    pub fn n_times(&self) -> usize {
        self.t_grid.len()
    }

    /// Trapezoid-weighted mass of one row.
    pub fn mass(&self, row: usize) -> f64 {
        let v = &self.values[row];
        let n = v.len();
        let dx = self.dx();
        dx * (v.iter().sum::<f64>() - 0.5 * v[n - 1])
    }

    /// Index of the sample time closest to `t`.
    pub fn nearest_time(&self, t: f64) -> usize {
        let k = self.t_grid.partition_point(|&s| s < t);
        if k == 0 {
            0
        } else if k >= self.t_grid.len() {
            self.t_grid.len() - 1
        } else if (self.t_grid[k] - t).abs() < (t - self.t_grid[k - 1]).abs() {
            k
        } else {
            k - 1
        }
    }

    /// Index of the grid node closest to `x`.
    pub fn nearest_node(&self, x: f64) -> usize {
        let j = ((x - self.x_grid[0]) / self.dx()).round();
        (j.max(0.0) as usize).min(self.x_grid.len() - 1)
    }

    /// CSV matrix: the first row holds `x_grid`, the first column `t_grid`.
    pub fn to_csv(&self) -> String {
        matrix_csv(&self.x_grid, &self.t_grid, &self.values)
    }

    /// Reads the CSV matrix back; frontier data is taken from `path`.
    pub fn from_csv(text: &str, path: &FrontierPath, alpha: f64) -> Result<Self, String> {
        let (x_grid, t_grid, values) = parse_matrix_csv(text)?;
        let dx = x_grid[1] - x_grid[0];
        let frontier: Vec<f64> = t_grid.iter().map(|&t| path.value_at(t)).collect();
        let frontier_index = frontier
            .iter()
            .map(|&l| x_grid.partition_point(|&x| x - 0.5 * dx < l))
            .collect();
        Ok(Field {
            x_grid,
            t_grid,
            values,
            frontier,
            frontier_index,
            alpha,
            cumulative: Vec::new(),
        })
    }
}

pub(crate) fn matrix_csv(x_grid: &[f64], t_grid: &[f64], rows: &[Vec<f64>]) -> String {
    let mut out = String::from("t/x");
    for x in x_grid {
        out.push_str(&format!(",{x}"));
    }
    out.push('\n');
    for (t, row) in t_grid.iter().zip(rows) {
        out.push_str(&format!("{t}"));
        for v in row {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    out
}

type Matrix = (Vec<f64>, Vec<f64>, Vec<Vec<f64>>);

pub(crate) fn parse_matrix_csv(text: &str) -> Result<Matrix, String> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(text.as_bytes());
    let mut rows = rdr.records();
    let head = rows.next().ok_or("empty matrix")?.map_err(|e| e.to_string())?;
    let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| format!("{e}: {s:?}"));
    let x_grid = head.iter().skip(1).map(parse).collect::<Result<Vec<_>, _>>()?;
    if x_grid.len() < 2 {
        return Err("matrix needs at least two columns".into());
    }
    let mut t_grid = Vec::new();
    let mut values = Vec::new();
    for rec in rows {
        let rec = rec.map_err(|e| e.to_string())?;
        let mut it = rec.iter();
        t_grid.push(parse(it.next().ok_or("missing t")?)?);
        let row = it.map(parse).collect::<Result<Vec<_>, _>>()?;
        if row.len() != x_grid.len() {
            return Err(format!("row has {} values, expected {}", row.len(), x_grid.len()));
        }
        values.push(row);
    }
    Ok((x_grid, t_grid, values))
}

/// Stopped-mass weight recorded at freeze time.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct WeightField {
    pub x_grid: Vec<f64>,
    pub nu: Vec<f64>,
    /// Freeze time per node, `+inf` if the node never froze.
    pub freeze_time: Vec<f64>,
}

impl WeightField {
    pub fn frozen(&self, j: usize) -> bool {
        self.freeze_time[j].is_finite()
    }

    /// Riemann sum of the weight over frozen nodes.
    pub fn integral(&self) -> f64 {
        let dx = self.x_grid[1] - self.x_grid[0];
        self.nu.iter().sum::<f64>() * dx
    }

    pub fn max(&self) -> f64 {
        self.nu.iter().cloned().fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,nu\n");
        for (x, v) in self.x_grid.iter().zip(&self.nu) {
            out.push_str(&format!("{x},{v}\n"));
        }
        out
    }

    /// Reads `x,nu`; freeze times are recovered from the frontier path.
    pub fn from_csv(text: &str, path: &FrontierPath) -> Result<Self, String> {
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let mut w = WeightField::default();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| e.to_string())?;
            let x: f64 = rec.get(0).ok_or("missing x")?.trim().parse().map_err(|e| format!("{e}"))?;
            let v: f64 = rec.get(1).ok_or("missing nu")?.trim().parse().map_err(|e| format!("{e}"))?;
            w.x_grid.push(x);
            w.nu.push(v);
        }
        if w.x_grid.len() < 2 {
            return Err("weight field needs at least two nodes".into());
        }
        let dx = w.x_grid[1] - w.x_grid[0];
        w.freeze_time = w
            .x_grid
            .iter()
            .map(|&x| {
                let k = path.lambda.iter().position(|&l| x - 0.5 * dx < l);
                k.map_or(f64::INFINITY, |k| path.times[k])
            })
            .collect();
        Ok(w)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub alpha: f64,
    pub t_end: f64,
    pub dt: f64,
    pub dx: f64,
    pub x_max: f64,
    /// Field sampling stride in steps. The frontier path keeps every step.
    pub sample_every: usize,
    /// Configured registry threshold; the effective one is `max(5 dx, this)`.
    pub jump_threshold: f64,
}

impl GridConfig {
    pub fn effective_jump_threshold(&self) -> f64 {
        (5.0 * self.dx).max(self.jump_threshold)
    }

    fn validate(&self) -> Result<(), SimError> {
        let positive = [
            ("dt", self.dt),
            ("dx", self.dx),
            ("t_end", self.t_end),
            ("x_max", self.x_max),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(SimError::Parameter(format!("{name} = {v} must be positive")));
            }
        }
        if !(self.alpha >= 0.0) {
            return Err(SimError::Parameter(format!("alpha = {} must be >= 0", self.alpha)));
        }
        if self.x_max < 4.0 * self.dx {
            return Err(SimError::Parameter("x_max must span several cells".into()));
        }
        Ok(())
    }
}

/// Mutable solver state.
#[derive(Clone, Debug, PartialEq)]
pub struct GridState {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    /// First node strictly above the frontier; `u` vanishes below it.
    pub first_liquid: usize,
    pub lambda: f64,
    pub t: f64,
    pub dx: f64,
    pub alpha: f64,
    pub nu: Vec<f64>,
    pub freeze_time: Vec<f64>,
    /// Registry threshold deciding whether a step's freezing counts as a jump.
    pub jump_threshold: f64,
    /// Frontier after the flux update of the current step, before freezing.
    pub lambda_after_flux: f64,
    scratch: Vec<f64>,
}

/// Surviving mass allowed in the last cell before the run aborts.
pub const TRUNCATION_MASS: f64 = 1e-6;

impl GridState {
    /// Discretizes `d` by cell averages and applies the initial jump.
    /// Returns the state and the exact continuum jump that was applied.
    pub fn new(d: &Density, alpha: f64, dx: f64, x_max: f64, jump_threshold: f64) -> Result<(Self, JumpResult), SimError> {
        let n = (x_max / dx).round() as usize;
        let x: Vec<f64> = (0..=n).map(|j| j as f64 * dx).collect();
        let h = 0.5 * dx;
        let mut u: Vec<f64> = x.iter().map(|&xj| (d.cdf(xj + h) - d.cdf(xj - h)) / dx).collect();
        u[n] = (d.cdf(x[n]) - d.cdf(x[n] - h)) / h;
        let initial = if alpha > 0.0 {
            continuum_jump(|y| d.cdf(y), 0.0, alpha, &ScanSpec::new(0.25 * dx, alpha, true))?
        } else {
            JumpResult::default()
        };
        let mut state = GridState {
            nu: vec![0.0; n + 1],
            freeze_time: vec![f64::INFINITY; n + 1],
            x,
            u,
            first_liquid: 0,
            lambda: 0.0,
            t: 0.0,
            dx,
            alpha,
            jump_threshold,
            lambda_after_flux: 0.0,
            scratch: Vec::new(),
        };
        // nodes whose cells the exact jump covers freeze with their initial values
        let target = initial.new_frontier;
        let mut frozen_mass = 0.0;
        while state.first_liquid <= n && state.x[state.first_liquid] - h < target.max(0.0) + f64::MIN_POSITIVE {
            let j = state.first_liquid;
            frozen_mass += state.cell_mass(j);
            state.nu[j] = state.u[j];
            state.freeze_time[j] = 0.0;
            state.u[j] = 0.0;
            state.first_liquid += 1;
        }
        state.lambda = alpha * frozen_mass;
        // the cell masses may carry the frontier a little further
        state.freeze_cascade(true);
        if state.lambda > x_max {
            return Err(SimError::FrontierEscaped {
                frontier: state.lambda,
                x_max,
            });
        }
        Ok((state, initial))
    }

    fn weight(&self, j: usize) -> f64 {
        if j + 1 == self.u.len() {
            0.5
        } else {
            1.0
        }
    }

    fn cell_mass(&self, j: usize) -> f64 {
        self.u[j] * self.dx * self.weight(j)
    }

    pub fn mass(&self) -> f64 {
        let n = self.u.len() - 1;
        self.dx * (self.u[self.first_liquid.min(n + 1)..].iter().sum::<f64>() - 0.5 * self.u[n])
    }

    /// `lambda / alpha + mass - 1`; zero up to rounding when `alpha > 0`.
    pub fn mass_balance_residual(&self) -> f64 {
        if self.alpha > 0.0 {
            self.lambda / self.alpha + self.mass() - 1.0
        } else {
            0.0
        }
    }

    /// One backward-Euler step of `u_t = u_xx / 2` on the liquid nodes.
    pub fn diffuse_step(&mut self, dt: f64) {
        let n = self.u.len() - 1;
        let lo = self.first_liquid;
        self.t += dt;
        if lo > n {
            return;
        }
        let r = dt / (2.0 * self.dx * self.dx);
        let m = n - lo + 1;
        // Thomas algorithm; sub-diagonal -r (-2r on the reflecting row),
        // diagonal 1 + 2r, super-diagonal -r
        let c_prime = &mut self.scratch;
        c_prime.clear();
        c_prime.resize(m, 0.0);
        let diag = 1.0 + 2.0 * r;
        let mut prev_c = 0.0;
        let mut prev_d = 0.0;
        for i in 0..m {
            let sub = if i == 0 {
                0.0
            } else if i == m - 1 {
                -2.0 * r
            } else {
                -r
            };
            let sup = if i == m - 1 { 0.0 } else { -r };
            let denom = diag - sub * prev_c;
            assert!(denom.abs() > 0.0, "singular tridiagonal system");
            let c = sup / denom;
            let dval = (self.u[lo + i] - sub * prev_d) / denom;
            c_prime[i] = c;
            self.u[lo + i] = dval;
            prev_c = c;
            prev_d = dval;
        }
        for i in (0..m - 1).rev() {
            let next = self.u[lo + i + 1];
            self.u[lo + i] -= c_prime[i] * next;
        }
        if m == 1 {
            // single liquid node next to the Dirichlet node: the reflecting
            // ghost equals the frozen neighbour
            debug_assert!(self.u[lo].is_finite());
        }
    }

    /// Moves the frontier by the mass lost in the last diffusion step, then
    /// freezes nodes by the cascade rule.
    pub fn advance_front(&mut self, mass_before: f64) -> Result<(), SimError> {
        let mass_after = self.mass();
        let flux = (mass_before - mass_after).max(0.0);
        self.lambda += self.alpha * flux;
        self.lambda_after_flux = self.lambda;
        self.freeze_cascade(false);
        let x_max = *self.x.last().unwrap();
        if self.lambda > x_max {
            return Err(SimError::FrontierEscaped {
                frontier: self.lambda,
                x_max,
            });
        }
        let n = self.u.len() - 1;
        let edge = self.u[n] * self.dx;
        if edge > TRUNCATION_MASS {
            return Err(SimError::Truncation { mass: edge, t: self.t });
        }
        Ok(())
    }

    fn freeze_cascade(&mut self, initial: bool) {
        let n = self.u.len() - 1;
        let lo = self.first_liquid;
        if lo > n || self.alpha <= 0.0 {
            return;
        }
        let h = 0.5 * self.dx;
        // only nodes the frontier could possibly reach are considered
        let reach = self.lambda + self.alpha * self.mass();
        let hi = self.x.partition_point(|&x| x - h < reach).min(n + 1).max(lo);
        let thresholds: Vec<f64> = self.x[lo..hi].iter().map(|&x| x - h).collect();
        let masses: Vec<f64> = (lo..hi).map(|j| self.cell_mass(j)).collect();
        let (k, lambda) = weighted_cascade(&thresholds, &masses, self.lambda, self.alpha);
        // only the cascade counts: flux-driven motion is smooth even when a
        // fast start-up front covers several cells in one step
        let jump = initial || lambda - self.lambda > self.jump_threshold;
        for j in lo..lo + k {
            self.nu[j] = if jump { self.u[j] } else { 1.0 / self.alpha };
            self.freeze_time[j] = self.t;
            self.u[j] = 0.0;
        }
        self.first_liquid = lo + k;
        self.lambda = lambda;
    }

    pub fn weight_field(&self) -> WeightField {
        WeightField {
            x_grid: self.x.clone(),
            nu: self.nu.clone(),
            freeze_time: self.freeze_time.clone(),
        }
    }
}

/// Output of [`run_grid`].
#[derive(Clone, Debug)]
pub struct GridRun {
    pub path: FrontierPath,
    pub field: Field,
    pub weight: WeightField,
    /// The exact continuum jump applied at `t = 0`.
    pub initial_jump: JumpResult,
    /// Largest `|lambda / alpha + mass - 1|` over all steps.
    pub max_mass_residual: f64,
    /// Mass still liquid at `t_end`.
    pub surviving_mass: f64,
    pub config: GridConfig,
}

pub fn run_grid(d: &Density, cfg: &GridConfig) -> Result<GridRun, SimError> {
    cfg.validate()?;
    let (lo, hi) = d.support();
    if hi > cfg.x_max || lo < 0.0 {
        return Err(SimError::Parameter(format!(
            "density support [{lo}, {hi}] must lie inside [0, x_max = {}]",
            cfg.x_max
        )));
    }
    let threshold = cfg.effective_jump_threshold();
    let (mut state, initial_jump) = GridState::new(d, cfg.alpha, cfg.dx, cfg.x_max, threshold)?;
    // the path is cheap, so it keeps every step; only the field is thinned
    let mut rec = PathRecorder::new(cfg.alpha, cfg.dt, threshold, 1);
    rec.start(0.0, state.lambda);
    let mut field = Field {
        x_grid: state.x.clone(),
        alpha: cfg.alpha,
        ..Default::default()
    };
    let mut integral = vec![0.0; state.u.len()];
    let push_row = |field: &mut Field, s: &GridState, integral: &[f64], t: f64| {
        field.t_grid.push(t);
        field.values.push(s.u.clone());
        field.frontier.push(s.lambda);
        field.frontier_index.push(s.first_liquid);
        field.cumulative.push(integral.to_vec());
    };
    push_row(&mut field, &state, &integral, 0.0);
    let mut previous = state.u.clone();
    let mut max_res = state.mass_balance_residual().abs();
    let n_steps = (cfg.t_end / cfg.dt).round() as usize;
    let every = cfg.sample_every.max(1);
    for k in 1..=n_steps {
        let mass_before = state.mass();
        state.diffuse_step(cfg.dt);
        state.t = k as f64 * cfg.dt;
        state.advance_front(mass_before)?;
        rec.step(state.t, state.lambda_after_flux, state.lambda);
        max_res = max_res.max(state.mass_balance_residual().abs());
        for ((acc, p), &v) in integral.iter_mut().zip(previous.iter_mut()).zip(&state.u) {
            *acc += 0.5 * cfg.dt * (*p + v);
            *p = v;
        }
        if k % every == 0 {
            push_row(&mut field, &state, &integral, state.t);
        }
    }
    Ok(GridRun {
        path: rec.finish(),
        field,
        weight: state.weight_field(),
        initial_jump,
        max_mass_residual: max_res,
        surviving_mass: state.mass(),
        config: *cfg,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state_with(u: Vec<f64>, dx: f64, alpha: f64) -> GridState {
        let n = u.len() - 1;
        GridState {
            x: (0..=n).map(|j| j as f64 * dx).collect(),
            nu: vec![0.0; n + 1],
            freeze_time: vec![f64::INFINITY; n + 1],
            u,
            first_liquid: 1,
            lambda: 0.0,
            t: 0.0,
            dx,
            alpha,
            jump_threshold: 5.0 * dx,
            lambda_after_flux: 0.0,
            scratch: Vec::new(),
        }
    }

    #[test]
    fn gaussian_bump_conserves_mass_and_decays() {
        let dx = 0.01;
        let u: Vec<f64> = (0..=400)
            .map(|j| {
                let x = j as f64 * dx;
                (-(x - 2.0f64).powi(2) / 0.02).exp()
            })
            .collect();
        let mut s = state_with(u, dx, 1.0);
        let (m0, max0) = (s.mass(), s.u.iter().cloned().fold(0.0, f64::max));
        s.diffuse_step(1e-3);
        assert!((s.mass() - m0).abs() < 1e-10);
        assert!(s.u.iter().cloned().fold(0.0, f64::max) < max0);
    }

    #[test]
    fn zero_stays_zero() {
        let mut s = state_with(vec![0.0; 50], 0.02, 1.0);
        s.diffuse_step(0.01);
        assert!(s.u.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn sine_mode_decays_at_discrete_rate() {
        // nodes 1..=n liquid, Dirichlet at node 0, reflecting at node n:
        // sin((k + 1/2) pi x / L) is an exact eigenvector
        let n = 100;
        let dx = 0.01;
        let len = n as f64 * dx;
        let kx = 0.5 * std::f64::consts::PI / len;
        let u: Vec<f64> = (0..=n).map(|j| (kx * j as f64 * dx).sin()).collect();
        let mut s = state_with(u.clone(), dx, 1.0);
        let dt = 1e-3;
        s.diffuse_step(dt);
        let lam = 4.0 / (dx * dx) * (0.5 * kx * dx).sin().powi(2);
        let factor = 1.0 / (1.0 + 0.5 * lam * dt);
        for j in 1..=n {
            assert!((s.u[j] - factor * u[j]).abs() < 1e-8, "node {j}");
        }
    }

    #[test]
    fn no_flux_no_motion() {
        let dx = 0.01;
        let u: Vec<f64> = (0..=300)
            .map(|j| {
                let x = j as f64 * dx;
                if (1.0..2.0).contains(&x) {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        let mut s = state_with(u, dx, 1.0);
        let m = s.mass();
        s.diffuse_step(1e-6);
        s.advance_front(m).unwrap();
        assert!(s.lambda < 1e-12);
        assert_eq!(s.first_liquid, 1);
    }

    #[test]
    fn supercritical_layer_jumps() {
        let dx = 0.005;
        // 1.5 > 1/alpha on (0, 0.4]
        let u: Vec<f64> = (0..=600)
            .map(|j| {
                let x = j as f64 * dx;
                if x > 0.0 && x <= 0.4 {
                    1.5
                } else if x > 0.4 && x < 1.0 {
                    0.3
                } else {
                    0.0
                }
            })
            .collect();
        let mut s = state_with(u, dx, 1.0);
        let m = s.mass();
        s.diffuse_step(1e-4);
        s.advance_front(m).unwrap();
        assert!(s.lambda >= 0.4, "{}", s.lambda);
        assert!(s.nu[10] > 1.0);
        assert!((s.lambda + s.mass() - m).abs() < 1e-12);
    }

    #[test]
    fn zero_alpha_never_moves() {
        let d = Density::piecewise_constant(vec![0.0, 0.3, 1.0, 1.5], vec![2.0, 0.0, 0.8]).unwrap();
        let cfg = GridConfig {
            alpha: 0.0,
            t_end: 0.2,
            dt: 0.01,
            dx: 0.02,
            x_max: 4.0,
            sample_every: 1,
            jump_threshold: 0.0,
        };
        let run = run_grid(&d, &cfg).unwrap();
        assert!(run.path.lambda.iter().all(|&l| l == 0.0));
    }

    #[test]
    fn initial_jump_and_weight_on_three_step_profile() {
        let d = Density::piecewise_constant(vec![0.0, 0.3, 1.0, 1.5], vec![2.0, 0.0, 0.8]).unwrap();
        let dx = 0.01;
        let (s, jump) = GridState::new(&d, 1.0, dx, 3.0, 5.0 * dx).unwrap();
        assert!((jump.delta - 0.6).abs() < 1e-6);
        assert!((s.lambda - 0.6).abs() <= dx);
        for (j, &x) in s.x.iter().enumerate() {
            if x > 0.0 + dx && x < 0.3 - dx {
                assert!((s.nu[j] - 2.0).abs() < 1e-12);
            }
            if x > 0.3 + dx && x < 0.6 - dx {
                assert_eq!(s.nu[j], 0.0);
            }
        }
        assert!(s.mass_balance_residual().abs() < 1e-12);
    }

    #[test]
    fn uniform_run_keeps_mass_balance() {
        let d = Density::piecewise_constant(vec![0.0, 2.0], vec![0.5]).unwrap();
        let cfg = GridConfig {
            alpha: 1.0,
            t_end: 0.5,
            dt: 0.005,
            dx: 0.01,
            x_max: 6.0,
            sample_every: 10,
            jump_threshold: 0.0,
        };
        let run = run_grid(&d, &cfg).unwrap();
        assert!(run.max_mass_residual < 1e-8);
        assert!(run.path.is_non_decreasing());
        assert!(run.path.jumps.is_empty());
        assert_eq!(run.field.n_times(), 11);
        assert_eq!(run.path.len(), 101);
        for (k, row) in run.field.values.iter().enumerate() {
            assert!(row.iter().all(|&v| v >= 0.0));
            assert!(row[..run.field.frontier_index[k]].iter().all(|&v| v == 0.0));
            assert!(run.field.mass(k) <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn truncated_domain_aborts() {
        let d = Density::piecewise_constant(vec![0.0, 1.0], vec![1.0]).unwrap();
        let cfg = GridConfig {
            alpha: 0.5,
            t_end: 2.0,
            dt: 0.01,
            dx: 0.01,
            x_max: 1.0,
            sample_every: 1,
            jump_threshold: 0.0,
        };
        assert!(matches!(run_grid(&d, &cfg), Err(SimError::Truncation { .. })));
    }

    #[test]
    fn field_csv_round_trip() {
        let d = Density::piecewise_constant(vec![0.0, 2.0], vec![0.5]).unwrap();
        let cfg = GridConfig {
            alpha: 1.0,
            t_end: 0.1,
            dt: 0.01,
            dx: 0.05,
            x_max: 4.0,
            sample_every: 5,
            jump_threshold: 0.0,
        };
        let run = run_grid(&d, &cfg).unwrap();
        let back = Field::from_csv(&run.field.to_csv(), &run.path, 1.0).unwrap();
        assert_eq!(back.t_grid, run.field.t_grid);
        assert_eq!(back.values, run.field.values);
        let w = WeightField::from_csv(&run.weight.to_csv(), &run.path).unwrap();
        assert_eq!(w.nu, run.weight.nu);
    }
}
