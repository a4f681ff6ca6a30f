use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::densities::Density;
use crate::error::HarnessError;
use crate::frontier::{FrontierPath, JumpRecord};
use crate::grid_solver::{run_grid, Field, GridConfig, WeightField};
use crate::particle_sim::{self, empirical_field, init_ensemble, Ensemble, Estimator};
use crate::potential::PotentialField;

use super::analysis::{analyze_level, LevelAnalysis, LevelSummary};
use super::config::{LevelParams, Method, ScenarioConfig};
use super::verify::{verify_suite, Ledger};

/// Grid results kept by the harness.
#[derive(Clone, Debug)]
pub struct GridOutput {
    pub path: FrontierPath,
    pub field: Field,
    pub weight: WeightField,
    pub max_mass_residual: f64,
    pub surviving_mass: f64,
}

/// Particle results kept by the harness.
#[derive(Clone, Debug)]
pub struct ParticleOutput {
    pub path: FrontierPath,
    pub n: usize,
    pub alive_fraction: f64,
    /// Histogram of absorption positions.
    pub weight: WeightField,
    /// Empirical density, only built when the particles are the primary
    /// method.
    pub field: Option<Field>,
}

#[derive(Clone, Debug)]
pub struct LevelRun {
    pub params: LevelParams,
    pub grid: Option<GridOutput>,
    pub particle: Option<ParticleOutput>,
}

impl LevelRun {
    /// The method the analysis runs on: the grid when present.
    pub fn primary(&self) -> Method {
        if self.grid.is_some() {
            Method::Grid
        } else {
            Method::Particle
        }
    }

    pub fn path(&self) -> &FrontierPath {
        match (&self.grid, &self.particle) {
            (Some(g), _) => &g.path,
            (None, Some(p)) => &p.path,
            (None, None) => unreachable!("a level runs at least one method"),
        }
    }

    pub fn field(&self) -> &Field {
        match (&self.grid, &self.particle) {
            (Some(g), _) => &g.field,
            (None, Some(p)) => p.field.as_ref().expect("primary particle run keeps its field"),
            (None, None) => unreachable!("a level runs at least one method"),
        }
    }

    pub fn weight(&self) -> &WeightField {
        match (&self.grid, &self.particle) {
            (Some(g), _) => &g.weight,
            (None, Some(p)) => &p.weight,
            (None, None) => unreachable!("a level runs at least one method"),
        }
    }

    pub fn surviving_mass(&self) -> f64 {
        match (&self.grid, &self.particle) {
            (Some(g), _) => g.surviving_mass,
            (None, Some(p)) => p.alive_fraction,
            (None, None) => unreachable!("a level runs at least one method"),
        }
    }
}

fn node_grid(dx: f64, x_max: f64) -> Vec<f64> {
    let n = (x_max / dx).round() as usize;
    (0..=n).map(|j| j as f64 * dx).collect()
}

/// Histogram of the positions at which particles were absorbed, on the
/// grid nodes, with freezing times read off the frontier path.
pub fn absorption_weight(e: &Ensemble, path: &FrontierPath, x_grid: &[f64]) -> WeightField {
    let dx = x_grid[1] - x_grid[0];
    let mut nu = vec![0.0; x_grid.len()];
    let unit = 1.0 / (e.n_total as f64 * dx);
    for (&x, &alive) in e.positions.iter().zip(&e.alive) {
        if alive {
            continue;
        }
        let j = ((x.max(0.0) / dx).round() as usize).min(x_grid.len() - 1);
        nu[j] += unit;
    }
    // same node rule as the grid solver: frozen once the frontier passes
    // the lower edge of the cell
    let freeze_time = x_grid
        .iter()
        .map(|&x| {
            let k = path.lambda.iter().position(|&l| x - 0.5 * dx < l);
            k.map_or(f64::INFINITY, |k| path.times[k])
        })
        .collect();
    WeightField {
        x_grid: x_grid.to_vec(),
        nu,
        freeze_time,
    }
}

pub fn run_level(cfg: &ScenarioConfig, d: &Density, p: &LevelParams) -> Result<LevelRun, HarnessError> {
    let grid = if cfg.method.grid() {
        let gc = GridConfig {
            alpha: cfg.alpha,
            t_end: cfg.t_end,
            dt: p.grid_dt,
            dx: p.dx,
            x_max: cfg.x_max,
            sample_every: p.grid_sample_every,
            jump_threshold: cfg.thresholds.jump_threshold,
        };
        let run = run_grid(d, &gc)?;
        Some(GridOutput {
            path: run.path,
            field: run.field,
            weight: run.weight,
            max_mass_residual: run.max_mass_residual,
            surviving_mass: run.surviving_mass,
        })
    } else {
        None
    };
    let particle = if cfg.method.particle() {
        let e = init_ensemble(d, p.n, cfg.seed, cfg.sampling)?.with_alpha(cfg.alpha);
        let x_grid = node_grid(p.dx, cfg.x_max);
        let thr = cfg.thresholds.jump_threshold;
        let (path, e, field) = if grid.is_none() {
            let every = p.particle_sample_every;
            let (path, e, snaps) = particle_sim::run_with_snapshots(e, cfg.t_end, p.particle_dt, 1, thr, every)?;
            let est = Estimator::Histogram { bin_width: p.dx };
            let field = empirical_field(&snaps, &x_grid, est, cfg.alpha)?;
            (path, e, Some(field))
        } else {
            let (path, e) = particle_sim::run(e, cfg.t_end, p.particle_dt, 1, thr)?;
            (path, e, None)
        };
        Some(ParticleOutput {
            weight: absorption_weight(&e, &path, &x_grid),
            alive_fraction: e.alive_fraction(),
            n: p.n,
            path,
            field,
        })
    } else {
        None
    };
    Ok(LevelRun {
        params: *p,
        grid,
        particle,
    })
}

/// Everything `run_scenario` produces, kept in memory as well.
#[derive(Debug)]
pub struct ScenarioOutcome {
    pub runs: Vec<LevelRun>,
    pub analyses: Vec<LevelAnalysis>,
    pub summary: Summary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Status {
    pub hard_failures: usize,
    pub soft_failures: usize,
    pub passed: usize,
    pub skipped: usize,
}

/// Contents of `summary.json`. Nothing time- or host-dependent is
/// recorded, so identical configurations give identical files.
#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub scenario: String,
    pub config: ScenarioConfig,
    pub levels: Vec<LevelSummary>,
    pub ledger: Ledger,
    pub status: Status,
}

impl Summary {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serializes");
        s.push('\n');
        s
    }
}

pub fn summarize(cfg: &ScenarioConfig, d: &Density, runs: &[LevelRun], analyses: &[LevelAnalysis]) -> Summary {
    let levels: Vec<LevelSummary> = analyses.iter().map(|a| a.summary.clone()).collect();
    let ledger = verify_suite(cfg, d, runs, &levels);
    let status = ledger.status();
    Summary {
        scenario: cfg.id.clone(),
        config: cfg.clone(),
        levels,
        ledger,
        status,
    }
}

/// Runs every refinement level, analyses and verifies them, and writes the
/// artifacts under `<output_dir>/<id>/`. The finest level goes to the
/// scenario directory itself, coarser ones to `levels/<k>/`.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioOutcome, HarnessError> {
    cfg.validate()?;
    let d = cfg.density.build(cfg.alpha)?;
    let mut runs = Vec::with_capacity(cfg.refinement_levels);
    for p in cfg.levels() {
        runs.push(run_level(cfg, &d, &p)?);
    }
    let analyses: Vec<LevelAnalysis> = runs.iter().map(|r| analyze_level(cfg, &d, r, None)).collect();
    let summary = summarize(cfg, &d, &runs, &analyses);
    write_scenario(cfg, &runs, &analyses, &summary)?;
    Ok(ScenarioOutcome {
        runs,
        analyses,
        summary,
    })
}

pub fn level_dir(scenario_dir: &Path, level: usize, levels: usize) -> PathBuf {
    if level + 1 == levels {
        scenario_dir.to_path_buf()
    } else {
        scenario_dir.join("levels").join(level.to_string())
    }
}

fn write(path: &Path, text: &str) -> Result<(), HarnessError> {
    fs::write(path, text).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn read(path: &Path) -> Result<String, HarnessError> {
    fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn artifact_err(path: &Path, reason: impl Into<String>) -> HarnessError {
    HarnessError::Artifact {
        path: path.display().to_string(),
        reason: reason.into(),
    }
}

pub fn write_scenario(
    cfg: &ScenarioConfig,
    runs: &[LevelRun],
    analyses: &[LevelAnalysis],
    summary: &Summary,
) -> Result<(), HarnessError> {
    let root = cfg.scenario_dir();
    for (run, an) in runs.iter().zip(analyses) {
        let dir = level_dir(&root, run.params.level, runs.len());
        fs::create_dir_all(&dir).map_err(|source| HarnessError::Io {
            path: dir.display().to_string(),
            source,
        })?;
        write_level(&dir, run, an)?;
    }
    write(&root.join("summary.json"), &summary.to_json())
}

fn write_level(dir: &Path, run: &LevelRun, an: &LevelAnalysis) -> Result<(), HarnessError> {
    write(&dir.join("frontier.csv"), &run.path().to_csv())?;
    write(&dir.join("jumps.json"), &run.path().jumps_json())?;
    write(&dir.join("field.csv"), &run.field().to_csv())?;
    write(&dir.join("nu.csv"), &run.weight().to_csv())?;
    write(&dir.join("w.csv"), &an.w.to_csv())?;
    write(&dir.join("profile.csv"), &an.profile.to_csv())?;
    if let (Some(_), Some(p)) = (&run.grid, &run.particle) {
        write(&dir.join("frontier_particle.csv"), &p.path.to_csv())?;
        write(&dir.join("jumps_particle.json"), &p.path.jumps_json())?;
        write(&dir.join("nu_particle.csv"), &p.weight.to_csv())?;
    }
    Ok(())
}

/// Reads the configuration stored in a scenario's `summary.json`.
pub fn load_config(scenario_dir: &Path) -> Result<ScenarioConfig, HarnessError> {
    let path = scenario_dir.join("summary.json");
    let doc: serde_json::Value = serde_json::from_str(&read(&path)?).map_err(|e| artifact_err(&path, e.to_string()))?;
    let cfg = doc
        .get("config")
        .cloned()
        .ok_or_else(|| artifact_err(&path, "no config entry"))?;
    let mut cfg: ScenarioConfig = serde_json::from_value(cfg).map_err(|e| artifact_err(&path, e.to_string()))?;
    // the directory may have been moved since the run
    if let Some(parent) = scenario_dir.parent() {
        cfg.output_dir = parent.to_path_buf();
    }
    Ok(cfg)
}

fn load_path(dir: &Path, csv: &str, json: &str, alpha: f64, dt: f64) -> Result<FrontierPath, HarnessError> {
    let p = dir.join(csv);
    let mut path = FrontierPath::from_csv(&read(&p)?).map_err(|e| artifact_err(&p, e))?;
    let j = dir.join(json);
    let jumps: Vec<JumpRecord> = serde_json::from_str(&read(&j)?).map_err(|e| artifact_err(&j, e.to_string()))?;
    path.jumps = jumps;
    path.alpha = alpha;
    path.dt = dt;
    Ok(path)
}

/// Loaded level together with the potential found on disk, if any.
pub struct LoadedLevel {
    pub run: LevelRun,
    pub w: Option<PotentialField>,
}

/// Rebuilds the level runs of a scenario from its artifacts.
pub fn load_scenario(scenario_dir: &Path) -> Result<(ScenarioConfig, Vec<LoadedLevel>), HarnessError> {
    let cfg = load_config(scenario_dir)?;
    let mut out = Vec::new();
    for p in cfg.levels() {
        let dir = level_dir(scenario_dir, p.level, cfg.refinement_levels);
        let primary_dt = if cfg.method.grid() { p.grid_dt } else { p.particle_dt };
        let path = load_path(&dir, "frontier.csv", "jumps.json", cfg.alpha, primary_dt)?;
        let fpath = dir.join("field.csv");
        let field = Field::from_csv(&read(&fpath)?, &path, cfg.alpha).map_err(|e| artifact_err(&fpath, e))?;
        let npath = dir.join("nu.csv");
        let weight = WeightField::from_csv(&read(&npath)?, &path).map_err(|e| artifact_err(&npath, e))?;
        let last = field.n_times().saturating_sub(1);
        let lambda_end = path.lambda.last().copied().unwrap_or(0.0);
        let wpath = dir.join("w.csv");
        let w = if wpath.exists() {
            let tail = field.mass(last);
            Some(PotentialField::from_csv(&read(&wpath)?, cfg.alpha, tail).map_err(|e| artifact_err(&wpath, e))?)
        } else {
            None
        };
        let run = if cfg.method.grid() {
            let max_mass_residual = (0..field.n_times())
                .map(|k| (field.frontier[k] / cfg.alpha + field.mass(k) - 1.0).abs())
                .fold(0.0, f64::max);
            let grid = GridOutput {
                surviving_mass: field.mass(last),
                max_mass_residual,
                path,
                field,
                weight,
            };
            let particle = if cfg.method.particle() {
                let ppath = load_path(&dir, "frontier_particle.csv", "jumps_particle.json", cfg.alpha, p.particle_dt)?;
                let np = dir.join("nu_particle.csv");
                let pw = WeightField::from_csv(&read(&np)?, &ppath).map_err(|e| artifact_err(&np, e))?;
                let lp = ppath.lambda.last().copied().unwrap_or(0.0);
                Some(ParticleOutput {
                    alive_fraction: 1.0 - lp / cfg.alpha,
                    n: p.n,
                    path: ppath,
                    weight: pw,
                    field: None,
                })
            } else {
                None
            };
            LevelRun {
                params: p,
                grid: Some(grid),
                particle,
            }
        } else {
            LevelRun {
                params: p,
                grid: None,
                particle: Some(ParticleOutput {
                    alive_fraction: 1.0 - lambda_end / cfg.alpha,
                    n: p.n,
                    path,
                    weight,
                    field: Some(field),
                }),
            }
        };
        out.push(LoadedLevel { run, w });
    }
    Ok((cfg, out))
}

/// Recomputes analysis and ledger for an existing scenario directory and
/// rewrites `w.csv`, `profile.csv` and `summary.json`.
pub fn analyze_dir(scenario_dir: &Path) -> Result<Summary, HarnessError> {
    let (cfg, loaded) = load_scenario(scenario_dir)?;
    let d = cfg.density.build(cfg.alpha)?;
    let analyses: Vec<LevelAnalysis> = loaded
        .iter()
        .map(|l| analyze_level(&cfg, &d, &l.run, l.w.clone()))
        .collect();
    let runs: Vec<LevelRun> = loaded.into_iter().map(|l| l.run).collect();
    let summary = summarize(&cfg, &d, &runs, &analyses);
    for (run, an) in runs.iter().zip(&analyses) {
        let dir = level_dir(scenario_dir, run.params.level, runs.len());
        write(&dir.join("w.csv"), &an.w.to_csv())?;
        write(&dir.join("profile.csv"), &an.profile.to_csv())?;
    }
    write(&scenario_dir.join("summary.json"), &summary.to_json())?;
    Ok(summary)
}

/// Verifies an existing scenario directory without writing anything.
pub fn verify_dir(scenario_dir: &Path) -> Result<Summary, HarnessError> {
    let (cfg, loaded) = load_scenario(scenario_dir)?;
    let d = cfg.density.build(cfg.alpha)?;
    let analyses: Vec<LevelAnalysis> = loaded
        .iter()
        .map(|l| analyze_level(&cfg, &d, &l.run, l.w.clone()))
        .collect();
    let runs: Vec<LevelRun> = loaded.into_iter().map(|l| l.run).collect();
    Ok(summarize(&cfg, &d, &runs, &analyses))
}
