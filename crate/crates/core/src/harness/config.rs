use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::densities::{oscillatory_density, power_gap_density, Density};
use crate::error::HarnessError;
use crate::particle_sim::Sampling;
use crate::potential::{Margin, Window};

/// Initial density, tagged by `family`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensitySpec {
    Piecewise {
        breaks: Vec<f64>,
        values: Vec<f64>,
    },
    /// Uses the scenario `alpha`.
    PowerGap {
        c: f64,
        n: u32,
        delta: f64,
        steps: usize,
        #[serde(default)]
        tail_breaks: Vec<f64>,
        #[serde(default)]
        tail_values: Vec<f64>,
    },
    Oscillatory {
        alpha1: f64,
        alpha2: f64,
        a1: f64,
        p: f64,
        q: f64,
        n_levels: usize,
        #[serde(default)]
        tail_breaks: Vec<f64>,
        #[serde(default)]
        tail_values: Vec<f64>,
    },
}

impl DensitySpec {
    pub fn build(&self, alpha: f64) -> Result<Density, HarnessError> {
        let d = match self {
            DensitySpec::Piecewise { breaks, values } => Density::piecewise_constant(breaks.clone(), values.clone())?,
            DensitySpec::PowerGap {
                c,
                n,
                delta,
                steps,
                tail_breaks,
                tail_values,
            } => power_gap_density(alpha, *c, *n, *delta, *steps, tail_breaks, tail_values)?,
            DensitySpec::Oscillatory {
                alpha1,
                alpha2,
                a1,
                p,
                q,
                n_levels,
                tail_breaks,
                tail_values,
            } => oscillatory_density(*alpha1, *alpha2, *a1, *p, *q, *n_levels, tail_breaks, tail_values)?,
        };
        Ok(d)
    }

    pub fn family(&self) -> &'static str {
        match self {
            DensitySpec::Piecewise { .. } => "piecewise",
            DensitySpec::PowerGap { .. } => "power_gap",
            DensitySpec::Oscillatory { .. } => "oscillatory",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Particle,
    #[default]
    Grid,
    Both,
}

impl Method {
    pub fn grid(self) -> bool {
        matches!(self, Method::Grid | Method::Both)
    }

    pub fn particle(self) -> bool {
        matches!(self, Method::Particle | Method::Both)
    }
}

/// How the grid time step follows `dx` across refinement levels.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DtScaling {
    /// `dt` halves with `dx`.
    #[default]
    Linear,
    /// `dt` is quartered when `dx` halves.
    Parabolic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    #[serde(default = "default_jump_threshold")]
    pub jump_threshold: f64,
    /// Defaults to `0.1 / alpha`.
    #[serde(default)]
    pub eps_u: Option<f64>,
    /// Defaults to `5 dx`.
    #[serde(default)]
    pub eps_slope: Option<f64>,
    /// Defaults to `10 dx^2 / alpha`.
    #[serde(default)]
    pub eps_w: Option<f64>,
}

fn default_jump_threshold() -> f64 {
    0.01
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            jump_threshold: default_jump_threshold(),
            eps_u: None,
            eps_slope: None,
            eps_w: None,
        }
    }
}

/// Post-processing settings. Times are absolute.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Box for the one-sided bounds; defaults to `t` in
    /// `[0.2 t_end, t_end]` and `x` in `[0, support end + 1]`.
    #[serde(default)]
    pub window: Option<Window>,
    #[serde(default = "default_nondeg_radius")]
    pub nondeg_radius: f64,
    #[serde(default = "default_margin")]
    pub margin: Margin,
    /// Interior boundary points probed by the blow-up fit.
    #[serde(default = "default_blowup_points")]
    pub blowup_points: usize,
    /// Start times `t0` for the jump and oscillation counts.
    #[serde(default = "default_jump_windows")]
    pub jump_windows: Vec<f64>,
    /// Distance kept from the ends of the frozen range in profile checks.
    #[serde(default = "default_profile_margin")]
    pub profile_margin: f64,
    #[serde(default = "default_s_prime_min")]
    pub s_prime_min: f64,
}

fn default_nondeg_radius() -> f64 {
    0.1
}
fn default_margin() -> Margin {
    Margin { space: 0.05, time: 0.05 }
}
fn default_blowup_points() -> usize {
    9
}
fn default_jump_windows() -> Vec<f64> {
    vec![0.05, 0.1]
}
fn default_profile_margin() -> f64 {
    0.05
}
fn default_s_prime_min() -> f64 {
    1e-6
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            window: None,
            nondeg_radius: default_nondeg_radius(),
            margin: default_margin(),
            blowup_points: default_blowup_points(),
            jump_windows: default_jump_windows(),
            profile_margin: default_profile_margin(),
            s_prime_min: default_s_prime_min(),
        }
    }
}

/// One scenario, as read from a JSON document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub id: String,
    pub density: DensitySpec,
    pub alpha: f64,
    #[serde(default)]
    pub method: Method,
    /// Particle count at the coarsest level.
    #[serde(default = "default_n")]
    pub n: usize,
    /// Particle time step, and grid time step unless `grid_dt` is set.
    pub dt: f64,
    #[serde(default)]
    pub grid_dt: Option<f64>,
    pub dx: f64,
    pub x_max: f64,
    pub t_end: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub sampling: Sampling,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_levels")]
    pub refinement_levels: usize,
    #[serde(default)]
    pub dt_scaling: DtScaling,
    /// Spacing of stored field samples; defaults to `t_end / 400`.
    #[serde(default)]
    pub sample_dt: Option<f64>,
    #[serde(default)]
    pub analysis: AnalysisConfig,
}

fn default_n() -> usize {
    10_000
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("runs")
}
fn default_levels() -> usize {
    1
}

/// Solver parameters of one refinement level.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelParams {
    pub level: usize,
    pub dx: f64,
    pub grid_dt: f64,
    pub particle_dt: f64,
    pub n: usize,
    pub grid_sample_every: usize,
    pub particle_sample_every: usize,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file and applies `key.path=value` overrides before
    /// validation.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut doc: Value = serde_json::from_str(&text).map_err(|e| HarnessError::Config(e.to_string()))?;
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        let cfg: ScenarioConfig = serde_json::from_value(doc).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.id.is_empty() || self.id.contains(['/', '\\']) || self.id == "." || self.id == ".." {
            return bad(format!("id {:?} is not a usable directory name", self.id));
        }
        for (name, v) in [("alpha", self.alpha), ("dt", self.dt), ("dx", self.dx), ("t_end", self.t_end)] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} = {v} must be positive and finite"));
            }
        }
        if let Some(g) = self.grid_dt {
            if !(g > 0.0 && g.is_finite()) {
                return bad(format!("grid_dt = {g} must be positive and finite"));
            }
        }
        if let Some(s) = self.sample_dt {
            if !(s > 0.0 && s.is_finite()) {
                return bad(format!("sample_dt = {s} must be positive and finite"));
            }
        }
        if self.refinement_levels < 1 {
            return bad("refinement_levels must be >= 1".into());
        }
        if self.method.particle() && self.n < 1 {
            return bad("n must be >= 1".into());
        }
        if self.thresholds.jump_threshold < 0.0 {
            return bad("jump_threshold must be >= 0".into());
        }
        for (name, v) in [
            ("eps_u", self.thresholds.eps_u),
            ("eps_slope", self.thresholds.eps_slope),
            ("eps_w", self.thresholds.eps_w),
        ] {
            if let Some(v) = v {
                if !(v > 0.0) {
                    return bad(format!("{name} = {v} must be > 0"));
                }
            }
        }
        let d = self.density.build(self.alpha)?;
        let need = self.alpha + d.support().1;
        if !(self.x_max >= need) {
            return bad(format!(
                "x_max = {} must be at least alpha + support end = {need}",
                self.x_max
            ));
        }
        if self.x_max / self.dx > 5e6 {
            return bad(format!("x_max / dx = {} nodes is too many", self.x_max / self.dx));
        }
        Ok(())
    }

    pub fn grid_dt(&self) -> f64 {
        self.grid_dt.unwrap_or(self.dt)
    }

    pub fn sample_dt(&self) -> f64 {
        self.sample_dt.unwrap_or(self.t_end / 400.0)
    }

    pub fn level(&self, k: usize) -> LevelParams {
        let h = 0.5f64.powi(k as i32);
        let grid_dt = match self.dt_scaling {
            DtScaling::Linear => self.grid_dt() * h,
            DtScaling::Parabolic => self.grid_dt() * h * h,
        };
        let particle_dt = self.dt * h;
        let every = |dt: f64| ((self.sample_dt() / dt).round() as usize).max(1);
        LevelParams {
            level: k,
            dx: self.dx * h,
            grid_dt,
            particle_dt,
            n: self.n.saturating_mul(1 << (2 * k)),
            grid_sample_every: every(grid_dt),
            particle_sample_every: every(particle_dt),
        }
    }

    pub fn levels(&self) -> Vec<LevelParams> {
        (0..self.refinement_levels).map(|k| self.level(k)).collect()
    }

    pub fn eps_u(&self) -> f64 {
        self.thresholds.eps_u.unwrap_or(0.1 / self.alpha)
    }

    pub fn eps_slope(&self, dx: f64) -> f64 {
        self.thresholds.eps_slope.unwrap_or(5.0 * dx)
    }

    pub fn eps_w(&self, dx: f64) -> f64 {
        self.thresholds
            .eps_w
            .unwrap_or_else(|| crate::potential::default_eps_w(dx, self.alpha))
    }

    pub fn window(&self, d: &Density) -> Window {
        self.analysis.window.unwrap_or(Window {
            t_min: 0.2 * self.t_end,
            t_max: self.t_end,
            x_min: 0.0,
            x_max: (d.support().1 + 1.0).min(self.x_max),
        })
    }

    pub fn scenario_dir(&self) -> PathBuf {
        self.output_dir.join(&self.id)
    }
}

/// Sets `a.b.c=value` in a JSON document. The value is parsed as JSON when
/// possible and taken as a string otherwise; missing objects are created.
pub fn apply_override(doc: &mut Value, spec: &str) -> Result<(), HarnessError> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| HarnessError::Config(format!("override {spec:?} is not key=value")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(HarnessError::Config(format!("bad key {key:?}")));
    }
    let mut node = doc;
    for (i, part) in parts.iter().enumerate() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| HarnessError::Config(format!("{key}: {} is not an object", parts[..i].join("."))))?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    unreachable!("key has at least one part")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform() -> String {
        r#"{"id": "u", "density": {"family": "piecewise", "breaks": [0, 2], "values": [0.5]},
            "alpha": 1, "dt": 0.001, "dx": 0.01, "x_max": 7, "t_end": 1}"#
            .into()
    }

    #[test]
    fn defaults_fill_in() {
        let c = ScenarioConfig::from_json(&uniform()).unwrap();
        assert_eq!(c.method, Method::Grid);
        assert_eq!(c.refinement_levels, 1);
        assert_eq!(c.thresholds.jump_threshold, 0.01);
        assert!((c.sample_dt() - 0.0025).abs() < 1e-15);
    }

    #[test]
    fn x_max_below_alpha_is_rejected() {
        let mut doc: Value = serde_json::from_str(&uniform()).unwrap();
        apply_override(&mut doc, "x_max=0.5").unwrap();
        let c: ScenarioConfig = serde_json::from_value(doc).unwrap();
        assert!(matches!(c.validate(), Err(HarnessError::Config(_))));
    }

    #[test]
    fn unknown_key_is_rejected() {
        let text = uniform().replace("\"t_end\"", "\"t_ned\": 1, \"t_end\"");
        assert!(ScenarioConfig::from_json(&text).is_err());
    }

    #[test]
    fn dotted_overrides() {
        let mut doc: Value = serde_json::from_str(&uniform()).unwrap();
        apply_override(&mut doc, "thresholds.eps_w=0.5").unwrap();
        apply_override(&mut doc, "method=both").unwrap();
        apply_override(&mut doc, "density.values=[0.25]").unwrap();
        let c: ScenarioConfig = serde_json::from_value(doc).unwrap();
        assert_eq!(c.thresholds.eps_w, Some(0.5));
        assert_eq!(c.method, Method::Both);
        assert!(apply_override(&mut serde_json::json!({"a": 1}), "a.b=2").is_err());
        assert!(apply_override(&mut serde_json::json!({}), "novalue").is_err());
    }

    #[test]
    fn refinement_levels_nest() {
        let mut c = ScenarioConfig::from_json(&uniform()).unwrap();
        c.refinement_levels = 3;
        c.dt_scaling = DtScaling::Parabolic;
        let l = c.levels();
        assert_eq!(l.len(), 3);
        assert_eq!(l[2].dx, 0.0025);
        assert!((l[2].grid_dt - 0.001 / 16.0).abs() < 1e-18);
        assert!((l[2].particle_dt - 0.001 / 4.0).abs() < 1e-18);
        assert_eq!(l[2].n, 160_000);
    }
}
