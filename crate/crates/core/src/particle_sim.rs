//! Interacting particle approximation.
//!
//! `N` Brownian particles start from the initial density. A particle is
//! absorbed the first time it is found at or below the frontier, and every
//! absorption raises the frontier by exactly `alpha / N`, so the frontier is
//! always `alpha` times the absorbed fraction. Absorptions are resolved by
//! the cascade of [`crate::jump_rule::cascade_jump`] at the end of each step.

use serde::{Deserialize, Serialize};

use crate::densities::Density;
use crate::error::SimError;
use crate::frontier::{FrontierPath, PathRecorder};
use crate::grid_solver::Field;
use crate::jump_rule::{cascade_jump, JumpResult};
use crate::rng;

/// Initial sampling scheme.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// Inverse CDF at the midpoints `(i + 1/2) / N`.
    #[default]
    Stratified,
    /// Inverse CDF of i.i.d. uniforms drawn from the seed.
    Uniform,
}

/// Registry threshold used for particle runs: `max(5 alpha / N, configured)`.
pub fn particle_jump_threshold(alpha: f64, n: usize, configured: f64) -> f64 {
    (5.0 * alpha / n as f64).max(configured)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble {
    pub positions: Vec<f64>,
    pub alive: Vec<bool>,
    pub absorption_time: Vec<f64>,
    pub n_total: usize,
    pub alpha: f64,
    pub seed: u64,
    pub t: f64,
    step_index: u64,
    n_dead: usize,
}

/// Outcome of one time step.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StepOutcome {
    /// Particles found at or below the frontier after diffusion.
    pub k0: usize,
    /// Frontier increment over the step.
    pub delta: f64,
    /// Particles absorbed by the cascade.
    pub cascade: usize,
}

/// Alive particles at one sample time.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub lambda: f64,
    pub alive_positions: Vec<f64>,
    pub n_total: usize,
}

pub fn init_ensemble(d: &Density, n: usize, seed: u64, sampling: Sampling) -> Result<Ensemble, SimError> {
    if n == 0 {
        return Err(SimError::Parameter("ensemble size must be >= 1".into()));
    }
    let positions: Vec<f64> = (0..n)
        .map(|i| {
            let p = match sampling {
                Sampling::Stratified => (i as f64 + 0.5) / n as f64,
                Sampling::Uniform => rng::uniform(seed, i as u64, u64::MAX),
            };
            d.quantile(p)
        })
        .collect();
    Ok(Ensemble {
        positions,
        alive: vec![true; n],
        absorption_time: vec![f64::INFINITY; n],
        n_total: n,
        alpha: 0.0,
        seed,
        t: 0.0,
        step_index: 0,
        n_dead: 0,
    })
}

impl Ensemble {
    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn frontier(&self) -> f64 {
        self.alpha * self.n_dead as f64 / self.n_total as f64
    }

    pub fn n_dead(&self) -> usize {
        self.n_dead
    }

    pub fn alive_fraction(&self) -> f64 {
        (self.n_total - self.n_dead) as f64 / self.n_total as f64
    }

    pub fn alive_positions(&self) -> Vec<f64> {
        self.positions
            .iter()
            .zip(&self.alive)
            .filter(|(_, &a)| a)
            .map(|(&x, _)| x)
            .collect()
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            t: self.t,
            lambda: self.frontier(),
            alive_positions: self.alive_positions(),
            n_total: self.n_total,
        }
    }

    fn kill(&mut self, i: usize, t: f64) {
        debug_assert!(self.alive[i]);
        self.alive[i] = false;
        self.absorption_time[i] = t;
        self.n_dead += 1;
    }

    /// Resolves the cascade started by `k0` fresh absorptions, given
    /// candidate `(position, index)` pairs of alive particles lying at or
    /// below `lambda + width`.
    fn resolve_cascade(
        &mut self,
        k0: usize,
        mut candidates: Vec<(f64, usize)>,
        mut width: f64,
    ) -> Result<JumpResult, SimError> {
        let lambda = self.frontier();
        loop {
            candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
            let pos: Vec<f64> = candidates.iter().map(|c| c.0).collect();
            let res = cascade_jump(&pos, lambda, k0, self.alpha, self.n_total)?;
            let alive_left = self.n_total - self.n_dead;
            if res.new_frontier < lambda + width || candidates.len() == alive_left {
                for &k in &res.absorbed_indices {
                    let idx = candidates[k].1;
                    self.kill(idx, self.t);
                }
                return Ok(res);
            }
            width *= 4.0;
            candidates = (0..self.n_total)
                .filter(|&i| self.alive[i] && self.positions[i] <= lambda + width)
                .map(|i| (self.positions[i], i))
                .collect();
        }
    }

    /// Applies the jump rule at `t = 0`.
    ///
    /// When particles already sit at or below the origin they seed the
    /// cascade. Otherwise a single virtual quantum probes the empirical
    /// CDF: the cascade it triggers is the discrete infimum scan at
    /// resolution `alpha / N`, and the frontier is then set to the absorbed
    /// count so that mass balance stays exact.
    pub fn initial_jump(&mut self) -> Result<JumpResult, SimError> {
        assert_eq!(self.n_dead, 0, "initial jump applied twice");
        if self.alpha <= 0.0 {
            return Ok(JumpResult::default());
        }
        let quantum = self.alpha / self.n_total as f64;
        let k0 = self.positions.iter().filter(|&&x| x <= 0.0).count();
        if k0 > 0 {
            for i in 0..self.n_total {
                if self.positions[i] <= 0.0 {
                    self.kill(i, 0.0);
                }
            }
            let n_dead0 = self.n_dead;
            // the fresh absorptions are already counted in the frontier
            self.n_dead = 0;
            let width = quantum * (2 * k0 + 16) as f64;
            let cand = self.candidates(width);
            let res = self.resolve_cascade(k0, cand, width)?;
            self.n_dead += n_dead0;
            return Ok(res);
        }
        let width = quantum * 16.0;
        let cand = self.candidates(width);
        let mut probe = self.clone();
        let res = probe.resolve_cascade(1, cand, width)?;
        let absorbed = probe.n_dead;
        for i in 0..self.n_total {
            if !probe.alive[i] {
                self.kill(i, 0.0);
            }
        }
        debug_assert_eq!(self.n_dead, absorbed);
        let lambda0 = self.frontier();
        Ok(JumpResult {
            delta: lambda0,
            new_frontier: lambda0,
            absorbed_mass: absorbed as f64 / self.n_total as f64,
            absorbed_indices: res.absorbed_indices,
            total_freeze: false,
        })
    }

    fn candidates(&self, width: f64) -> Vec<(f64, usize)> {
        let level = self.frontier() + width;
        (0..self.n_total)
            .filter(|&i| self.alive[i] && self.positions[i] <= level)
            .map(|i| (self.positions[i], i))
            .collect()
    }

    /// One Euler step with the ensemble's own Gaussian increments.
    pub fn step(&mut self, dt: f64) -> Result<StepOutcome, SimError> {
        if !(dt > 0.0) {
            return Err(SimError::Parameter(format!("dt = {dt} must be > 0")));
        }
        let sd = dt.sqrt();
        let (seed, step) = (self.seed, self.step_index);
        self.step_with(dt, |i| sd * rng::gaussian(seed, i as u64, step))
    }

    /// One step with caller-supplied increments (indexed by particle).
    pub fn step_with<F>(&mut self, dt: f64, increment: F) -> Result<StepOutcome, SimError>
    where
        F: Fn(usize) -> f64,
    {
        if !(dt > 0.0) {
            return Err(SimError::Parameter(format!("dt = {dt} must be > 0")));
        }
        let lambda = self.frontier();
        let quantum = self.alpha / self.n_total as f64;
        let t_new = self.t + dt;
        let mut hit = Vec::new();
        for i in 0..self.n_total {
            if !self.alive[i] {
                continue;
            }
            let x = self.positions[i] + increment(i);
            self.positions[i] = x;
            if x <= lambda {
                hit.push(i);
            }
        }
        self.t = t_new;
        self.step_index += 1;
        let k0 = hit.len();
        for &i in &hit {
            self.kill(i, t_new);
        }
        if k0 == 0 || self.alpha <= 0.0 {
            return Ok(StepOutcome {
                k0,
                delta: self.frontier() - lambda,
                cascade: 0,
            });
        }
        // the cascade starts from the pre-step frontier with k0 fresh quanta
        self.n_dead -= k0;
        let width = quantum * (2 * k0 + 16) as f64;
        let cand: Vec<(f64, usize)> = (0..self.n_total)
            .filter(|&i| self.alive[i] && self.positions[i] <= lambda + width)
            .map(|i| (self.positions[i], i))
            .collect();
        let res = self.resolve_cascade(k0, cand, width)?;
        self.n_dead += k0;
        Ok(StepOutcome {
            k0,
            delta: self.frontier() - lambda,
            cascade: res.absorbed_indices.len(),
        })
    }
}

/// Runs the ensemble to `t_end`, applying the initial jump first.
pub fn run(
    mut e: Ensemble,
    t_end: f64,
    dt: f64,
    sample_every: usize,
    jump_threshold: f64,
) -> Result<(FrontierPath, Ensemble), SimError> {
    let (path, _) = run_inner(&mut e, t_end, dt, sample_every, jump_threshold, None)?;
    Ok((path, e))
}

/// Like [`run`], also keeping alive-particle snapshots every
/// `snapshot_every` steps (including `t = 0`).
pub fn run_with_snapshots(
    mut e: Ensemble,
    t_end: f64,
    dt: f64,
    sample_every: usize,
    jump_threshold: f64,
    snapshot_every: usize,
) -> Result<(FrontierPath, Ensemble, Vec<Snapshot>), SimError> {
    let (path, snaps) = run_inner(&mut e, t_end, dt, sample_every, jump_threshold, Some(snapshot_every.max(1)))?;
    Ok((path, e, snaps))
}

fn run_inner(
    e: &mut Ensemble,
    t_end: f64,
    dt: f64,
    sample_every: usize,
    jump_threshold: f64,
    snapshot_every: Option<usize>,
) -> Result<(FrontierPath, Vec<Snapshot>), SimError> {
    if !(t_end > 0.0) || !(dt > 0.0) {
        return Err(SimError::Parameter(format!("t_end = {t_end} and dt = {dt} must be > 0")));
    }
    let threshold = particle_jump_threshold(e.alpha, e.n_total, jump_threshold);
    let mut rec = PathRecorder::new(e.alpha, dt, threshold, sample_every);
    let before = e.frontier();
    e.initial_jump()?;
    rec.start(before, e.frontier());
    let mut snaps = Vec::new();
    if snapshot_every.is_some() {
        snaps.push(e.snapshot());
    }
    let n_steps = (t_end / dt).round() as usize;
    for k in 1..=n_steps {
        let out = e.step(dt)?;
        // keep the time grid free of accumulated rounding
        e.t = k as f64 * dt;
        // fresh hits are smooth motion; only the cascade part can be a jump
        let lambda = e.frontier();
        rec.step(e.t, lambda - e.alpha * out.cascade as f64 / e.n_total as f64, lambda);
        if let Some(every) = snapshot_every {
            if k % every == 0 {
                snaps.push(e.snapshot());
            }
        }
    }
    Ok((rec.finish(), snaps))
}

/// Density estimator for [`empirical_field`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Estimator {
    /// Histogram with bins of the given width centred on the grid nodes.
    Histogram { bin_width: f64 },
    /// Gaussian kernel estimate.
    Kernel { bandwidth: f64 },
}

/// Alive-particle density on `x_grid`, normalized to integrate to the alive
/// fraction. Values at nodes on or below the frontier are zero.
pub fn empirical_field(snapshots: &[Snapshot], x_grid: &[f64], estimator: Estimator, alpha: f64) -> Result<Field, SimError> {
    if snapshots.is_empty() {
        return Err(SimError::Parameter("empty snapshot set".into()));
    }
    match estimator {
        Estimator::Histogram { bin_width } | Estimator::Kernel { bandwidth: bin_width } if !(bin_width > 0.0) => {
            return Err(SimError::Parameter("bin width / bandwidth must be > 0".into()));
        }
        _ => {}
    }
    let mut values = Vec::with_capacity(snapshots.len());
    let mut frontier = Vec::with_capacity(snapshots.len());
    let mut frontier_index = Vec::with_capacity(snapshots.len());
    for snap in snapshots {
        let n = snap.n_total as f64;
        let row: Vec<f64> = match estimator {
            Estimator::Histogram { bin_width } => {
                let mut sorted = snap.alive_positions.clone();
                sorted.sort_by(|a, b| a.total_cmp(b));
                x_grid
                    .iter()
                    .map(|&x| {
                        let lo = sorted.partition_point(|&p| p < x - 0.5 * bin_width);
                        let hi = sorted.partition_point(|&p| p < x + 0.5 * bin_width);
                        (hi - lo) as f64 / (n * bin_width)
                    })
                    .collect()
            }
            Estimator::Kernel { bandwidth } => {
                let norm = 1.0 / (n * bandwidth * (2.0 * std::f64::consts::PI).sqrt());
                x_grid
                    .iter()
                    .map(|&x| {
                        snap.alive_positions
                            .iter()
                            .map(|&p| (-0.5 * ((x - p) / bandwidth).powi(2)).exp())
                            .sum::<f64>()
                            * norm
                    })
                    .collect()
            }
        };
        let first_liquid = x_grid.partition_point(|&x| x <= snap.lambda);
        let mut row = row;
        row[..first_liquid].iter_mut().for_each(|v| *v = 0.0);
        values.push(row);
        frontier.push(snap.lambda);
        frontier_index.push(first_liquid);
    }
    Ok(Field {
        x_grid: x_grid.to_vec(),
        t_grid: snapshots.iter().map(|s| s.t).collect(),
        values,
        frontier,
        frontier_index,
        alpha,
        cumulative: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform() -> Density {
        Density::piecewise_constant(vec![0.0, 2.0], vec![0.5]).unwrap()
    }

    #[test]
    fn stratified_positions() {
        let e = init_ensemble(&uniform(), 4, 1, Sampling::Stratified).unwrap();
        for (p, want) in e.positions.iter().zip([0.25, 0.75, 1.25, 1.75]) {
            assert!((p - want).abs() < 1e-15);
        }
        let one = init_ensemble(&uniform(), 1, 1, Sampling::Stratified).unwrap();
        assert!((one.positions[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn same_seed_same_ensemble() {
        let a = init_ensemble(&uniform(), 50, 9, Sampling::Uniform).unwrap();
        let b = init_ensemble(&uniform(), 50, 9, Sampling::Uniform).unwrap();
        assert_eq!(a, b);
        assert!(init_ensemble(&uniform(), 0, 9, Sampling::Uniform).is_err());
    }

    #[test]
    fn quiet_step_keeps_frontier() {
        let d = Density::piecewise_constant(vec![1.0, 2.0], vec![1.0]).unwrap();
        let mut e = init_ensemble(&d, 100, 3, Sampling::Stratified).unwrap().with_alpha(1.0);
        let out = e.step(1e-8).unwrap();
        assert_eq!(out.k0, 0);
        assert_eq!(e.frontier(), 0.0);
        assert!(e.step(0.0).is_err());
    }

    #[test]
    fn forced_hit_triggers_cascade() {
        let d = Density::piecewise_constant(vec![0.0, 2.0], vec![0.5]).unwrap();
        let mut e = init_ensemble(&d, 5, 3, Sampling::Stratified).unwrap().with_alpha(1.0);
        e.positions = vec![0.7, 0.1, 0.5, 0.9, 1.5];
        // particle 0 is pushed to the frontier, the rest stay put
        let out = e.step_with(0.1, |i| if i == 0 { -1.0 } else { 0.0 }).unwrap();
        assert_eq!(out.k0, 1);
        assert_eq!(out.cascade, 1);
        assert!((e.frontier() - 0.4).abs() < 1e-15);
        assert!(!e.alive[1] && e.alive[2]);
        assert_eq!(e.absorption_time[1], 0.1);
    }

    #[test]
    fn zero_alpha_decouples() {
        let mut e = init_ensemble(&uniform(), 200, 5, Sampling::Stratified).unwrap();
        let (path, e2) = {
            let e3 = e.clone();
            run(e3, 0.5, 0.01, 1, 0.0).unwrap()
        };
        assert!(path.lambda.iter().all(|&l| l == 0.0));
        assert!(e2.n_dead() > 0);
        e.step(0.01).unwrap();
        assert_eq!(e.frontier(), 0.0);
    }

    #[test]
    fn initial_jump_matches_continuum_value() {
        let d = Density::piecewise_constant(vec![0.0, 0.3, 1.0, 1.5], vec![2.0, 0.0, 0.8]).unwrap();
        let n = 10_000;
        let mut e = init_ensemble(&d, n, 1, Sampling::Stratified).unwrap().with_alpha(1.0);
        let r = e.initial_jump().unwrap();
        assert!((e.frontier() - 0.6).abs() <= 2.0 / n as f64, "{}", e.frontier());
        assert!((r.absorbed_mass - e.frontier()).abs() < 1e-15);
        assert!(e.alive_positions().iter().all(|&x| x > e.frontier()));
    }

    #[test]
    fn subcritical_initial_jump_is_one_quantum_at_most() {
        let n = 1000;
        let mut e = init_ensemble(&uniform(), n, 1, Sampling::Stratified).unwrap().with_alpha(1.0);
        e.initial_jump().unwrap();
        assert!(e.frontier() <= 1.0 / n as f64 + 1e-15);
    }

    #[test]
    fn mass_balance_and_monotone_path() {
        let e = init_ensemble(&uniform(), 2000, 11, Sampling::Stratified).unwrap().with_alpha(1.0);
        let (path, e) = run(e, 0.2, 1e-3, 1, 0.0).unwrap();
        assert!(path.is_non_decreasing());
        assert_eq!(e.frontier() / e.alpha + e.alive_fraction(), 1.0);
        let dead_times_ok = e
            .absorption_time
            .iter()
            .zip(&e.alive)
            .all(|(&t, &a)| if a { t.is_infinite() } else { t <= e.t });
        assert!(dead_times_ok);
        assert!(e.alive_positions().iter().all(|&x| x > e.frontier()));
    }

    #[test]
    fn histogram_field_normalization() {
        let e = init_ensemble(&uniform(), 10_000, 2, Sampling::Stratified).unwrap().with_alpha(1.0);
        let x: Vec<f64> = (0..=300).map(|j| j as f64 * 0.01).collect();
        let f = empirical_field(&[e.snapshot()], &x, Estimator::Histogram { bin_width: 0.01 }, 1.0).unwrap();
        let integral: f64 = f.values[0].iter().sum::<f64>() * 0.01;
        assert!((integral - 1.0).abs() < 0.01);
        assert!((f.values[0][100] - 0.5).abs() < 0.02);
        assert!(empirical_field(&[], &x, Estimator::Histogram { bin_width: 0.01 }, 1.0).is_err());
    }

    #[test]
    fn field_is_zero_below_frontier() {
        let e = init_ensemble(&uniform(), 5000, 2, Sampling::Stratified).unwrap().with_alpha(1.0);
        let (_, mut e, _) = run_with_snapshots(e, 0.1, 1e-3, 1, 0.0, 100).unwrap();
        e.t = 0.1;
        let snap = e.snapshot();
        let x: Vec<f64> = (0..=300).map(|j| j as f64 * 0.01).collect();
        let f = empirical_field(std::slice::from_ref(&snap), &x, Estimator::Kernel { bandwidth: 0.02 }, 1.0).unwrap();
        for (xj, v) in x.iter().zip(&f.values[0]) {
            if *xj <= snap.lambda {
                assert_eq!(*v, 0.0);
            }
        }
        let integral: f64 = f.values[0].iter().sum::<f64>() * 0.01;
        assert!((integral - e.alive_fraction()).abs() < 0.05);
    }
}
