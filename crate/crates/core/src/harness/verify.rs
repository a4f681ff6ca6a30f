//! Invariant registry and the pass/fail ledger.

use serde::{Deserialize, Serialize};

use crate::densities::{oscillation_points, Density};
use crate::jump_rule::{cascade_jump, continuum_jump, ScanSpec};
use crate::particle_sim::{self, init_ensemble, Sampling};
use crate::rng;

use super::analysis::LevelSummary;
use super::config::{DensitySpec, ScenarioConfig};
use super::scenario::LevelRun;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct InvariantSpec {
    pub id: &'static str,
    pub module: &'static str,
    pub claim: &'static str,
    /// A hard failure makes the run fail; soft ones are reported only.
    pub hard: bool,
}

const fn inv(id: &'static str, module: &'static str, claim: &'static str, hard: bool) -> InvariantSpec {
    InvariantSpec { id, module, claim, hard }
}

/// Every checked invariant. Trend claims need `refinement_levels >= 2`
/// (or 3) and are skipped otherwise.
pub const REGISTRY: &[InvariantSpec] = &[
    inv("D1", "densities", "cdf non-decreasing with cdf(end) = 1 within 1e-12", true),
    inv("D2", "densities", "power-gap profile stays below 1/alpha - c x^n on (0, delta)", true),
    inv("D3", "densities", "oscillatory profile takes alpha1 / alpha2 on its level intervals", true),
    inv("J1", "jump_rule", "more seed absorptions or extra particles below the frontier never shrink the cascade", true),
    inv("J2", "jump_rule", "stratified-ensemble cascade matches the continuum t=0 jump within alpha/N + h_scan", false),
    inv("J3", "jump_rule", "continuum jump: F(x) - F(0) >= x/alpha for every scanned x < delta", true),
    inv("P1", "particle_sim", "lambda/alpha + alive fraction = 1 exactly", true),
    inv("P2", "particle_sim", "lambda <= alpha", true),
    inv("P3", "particle_sim", "same seed, dt and N reproduce the path bit for bit", true),
    inv("P4", "particle_sim", "sup |lambda^N - lambda^4N| decreases with N", false),
    inv("G1", "grid_solver", "|lambda/alpha + mass - 1| <= 1e-8 at every step", true),
    inv("G2", "grid_solver", "|∫nu - lambda_T/alpha| <= 2 dx max nu", false),
    inv("G3", "grid_solver", "max u sqrt(t) stable (< 30%) under refinement", false),
    inv("G4", "grid_solver", "∫_0^T u(x, s) ds <= 2x + 2dx", false),
    inv("G5", "grid_solver", "max forward u_t and centred u_xx grow < 50% under refinement", false),
    inv("W1", "potential", "w >= -1e-12", true),
    inv("W2", "potential", "{w > eps_w} = {t < s(x)} outside a band of max(2dx, sqrt(alpha eps_w) + dx)", false),
    inv("W3", "potential", "complementarity max |min(w, w_t - w_xx/2 + nu)| <= 0.1, L1 residual decreasing under refinement", false),
    inv("B1", "boundary_analysis", "s non-decreasing, flat on jump intervals and only there (2dx band)", false),
    inv("B2", "boundary_analysis", "unresolved fraction non-increasing under refinement", false),
    inv("B3", "boundary_analysis", "largest s' at jump endpoints decreases under refinement", false),
    inv("B4", "boundary_analysis", "max |s'(x+dx) - s'(x)| does not grow (< 30%) under refinement", false),
    inv("B5", "boundary_analysis", "max adjacent slope of s stable (< 30%) under refinement", false),
    inv("B6", "boundary_analysis", ">= 90% of interior boundary probes fit a blow-up profile", false),
    inv("H1", "harness_cli", "every frontier path is non-decreasing", true),
    inv("H2", "harness_cli", "sup |lambda_particle - lambda_grid| < 0.05 alpha", false),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LedgerEntry {
    pub id: &'static str,
    pub claim: &'static str,
    pub measured: Option<f64>,
    pub threshold: Option<f64>,
    pub verdict: Verdict,
    pub hard: bool,
    pub note: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Ledger {
    pub entries: Vec<LedgerEntry>,
}

impl Ledger {
    pub fn get(&self, id: &str) -> Option<&LedgerEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn hard_failures(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| e.hard && e.verdict == Verdict::Fail)
            .count()
    }

    pub fn status(&self) -> super::scenario::Status {
        let count = |v: Verdict| self.entries.iter().filter(|e| e.verdict == v).count();
        super::scenario::Status {
            hard_failures: self.hard_failures(),
            soft_failures: count(Verdict::Fail) - self.hard_failures(),
            passed: count(Verdict::Pass),
            skipped: count(Verdict::Skipped),
        }
    }
}

/// Result of one check before it is joined with its registry entry.
struct Outcome {
    measured: Option<f64>,
    threshold: Option<f64>,
    verdict: Verdict,
    note: String,
}

fn le(measured: f64, threshold: f64) -> Outcome {
    Outcome {
        measured: Some(measured),
        threshold: Some(threshold),
        verdict: if measured <= threshold { Verdict::Pass } else { Verdict::Fail },
        note: String::new(),
    }
}

fn ge(measured: f64, threshold: f64) -> Outcome {
    Outcome {
        verdict: if measured >= threshold { Verdict::Pass } else { Verdict::Fail },
        ..le(measured, threshold)
    }
}

fn skip(note: impl Into<String>) -> Outcome {
    Outcome {
        measured: None,
        threshold: None,
        verdict: Verdict::Skipped,
        note: note.into(),
    }
}

impl Outcome {
    fn note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }
}

/// Magnitude below which trend quantities count as zero.
const TREND_FLOOR: f64 = 1e-9;

/// Relative change from `a` to `b`.
fn growth(a: f64, b: f64) -> f64 {
    if a.abs() < TREND_FLOOR {
        if b.abs() < TREND_FLOOR {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (b - a) / a.abs()
    }
}

/// `true` when every consecutive pair satisfies `b < a`.
fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn finest_two<T: Copy>(v: &[T]) -> Option<(T, T)> {
    match v {
        [.., a, b] => Some((*a, *b)),
        _ => None,
    }
}

fn fmt_list(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x:.4e}")).collect();
    format!("[{}]", items.join(", "))
}

fn check_d1(d: &Density) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut prev = 0.0;
    for w in d.breaks().windows(2) {
        for k in 0..=4 {
            let x = w[0] + (w[1] - w[0]) * k as f64 / 4.0;
            let c = d.cdf(x);
            worst = worst.max(prev - c);
            prev = c;
        }
    }
    let end = (d.cdf(d.support().1) - 1.0).abs();
    le(worst.max(end), 1e-12)
}

fn check_d2(cfg: &ScenarioConfig, d: &Density) -> Outcome {
    match &cfg.density {
        DensitySpec::PowerGap { c, n, delta, .. } => {
            let ok = d.satisfies_power_gap(cfg.alpha, *c, *n, *delta);
            le(if ok { 0.0 } else { 1.0 }, 0.0).note("measured 1 when some cell exceeds the curve after normalization")
        }
        _ => skip("not a power-gap density"),
    }
}

fn check_d3(cfg: &ScenarioConfig, d: &Density) -> Outcome {
    let DensitySpec::Oscillatory {
        alpha1,
        alpha2,
        a1,
        p,
        q,
        n_levels,
        ..
    } = &cfg.density
    else {
        return skip("not an oscillatory density");
    };
    let a = oscillation_points(*a1, *p, *q, *n_levels);
    let scale = d.scale();
    let mut misses = 0usize;
    for n in 1..=*n_levels {
        // alpha1 on [a_{2n}, a_{2n-1}), alpha2 on [a_{2n+1}, a_{2n})
        let bands = [(a[2 * n - 1], a[2 * n - 2], *alpha1), (a[2 * n], a[2 * n - 1], *alpha2)];
        for (b, &(lo, hi, v)) in bands.iter().enumerate() {
            for i in 0..100u64 {
                let stream = (n as u64) << 8 | b as u64;
                let x = lo + (hi - lo) * rng::uniform(cfg.seed, stream, i);
                if (d.pdf(x) / scale - v).abs() > 1e-12 * v {
                    misses += 1;
                }
            }
        }
    }
    le(misses as f64, 0.0)
}

/// Randomised check of the data-monotonicity of the cascade.
fn check_j1(cfg: &ScenarioConfig) -> Outcome {
    let n_total = 25;
    let mut violations = 0usize;
    for inst in 0..200u64 {
        let u = |i: u64| rng::uniform(cfg.seed ^ 0x6a75_6d70, inst, i);
        let alive = 1 + (u(0) * 20.0) as usize;
        let mut xs: Vec<f64> = (0..alive).map(|i| 0.3 * u(1 + i as u64)).collect();
        xs.sort_by(f64::total_cmp);
        let xs: Vec<f64> = xs.into_iter().map(|x| x + 1e-9).collect();
        let k0 = (u(100) * 3.0) as usize;
        let Ok(base) = cascade_jump(&xs, 0.0, k0, cfg.alpha, n_total) else {
            violations += 1;
            continue;
        };
        let more = cascade_jump(&xs, 0.0, k0 + 1, cfg.alpha, n_total);
        if more.map_or(true, |r| r.delta < base.delta) {
            violations += 1;
        }
        if base.delta > 0.0 && alive < 24 {
            let extra = 1e-9 + base.delta * u(101);
            let mut ys = xs.clone();
            let at = ys.partition_point(|&y| y <= extra);
            ys.insert(at, extra);
            let grown = cascade_jump(&ys, 0.0, k0, cfg.alpha, n_total);
            if grown.map_or(true, |r| r.delta < base.delta) {
                violations += 1;
            }
        }
    }
    le(violations as f64, 0.0).note("200 random instances, N = 25")
}

fn check_j2(cfg: &ScenarioConfig, d: &Density, n: usize, dx: f64) -> Outcome {
    let h = 0.25 * dx;
    let scan = ScanSpec::new(h, cfg.alpha, true);
    let Ok(cont) = continuum_jump(|x| d.cdf(x), 0.0, cfg.alpha, &scan) else {
        return le(f64::INFINITY, 0.0).note("continuum scan failed");
    };
    let ens = init_ensemble(d, n, cfg.seed, Sampling::Stratified).map(|e| e.with_alpha(cfg.alpha));
    let Ok(mut e) = ens else {
        return le(f64::INFINITY, 0.0).note("ensemble could not be built");
    };
    if e.initial_jump().is_err() {
        return le(f64::INFINITY, 0.0).note("particle jump failed");
    }
    let diff = (e.frontier() - cont.new_frontier).abs();
    le(diff, cfg.alpha / n as f64 + h).note(format!("N = {n}"))
}

fn check_j3(cfg: &ScenarioConfig, d: &Density, dx: f64) -> Outcome {
    let h = 0.25 * dx;
    let scan = ScanSpec::new(h, cfg.alpha, true);
    let Ok(r) = continuum_jump(|x| d.cdf(x), 0.0, cfg.alpha, &scan) else {
        return le(f64::INFINITY, 0.0).note("continuum scan failed");
    };
    let mut worst: f64 = 0.0;
    let mut x = h;
    while x < r.delta {
        worst = worst.max(x / cfg.alpha - (d.cdf(x) - d.cdf(0.0)));
        x += h;
    }
    le(worst, 1e-12).note(format!("delta = {}", r.delta))
}

fn check_p1(runs: &[LevelRun], alpha: f64) -> Outcome {
    let mut checked = false;
    let mut bad = 0usize;
    for r in runs {
        if let Some(p) = &r.particle {
            checked = true;
            let n = p.n as f64;
            for &l in &p.path.lambda {
                let dead = (l * n / alpha).round();
                let alive = (n - dead) / n;
                if alpha * dead / n != l || dead / n + alive != 1.0 {
                    bad += 1;
                }
            }
        }
    }
    if !checked {
        return skip("no particle run");
    }
    le(bad as f64, 0.0).note("samples whose frontier is not alpha times an absorbed count over N")
}

fn check_p2(runs: &[LevelRun], alpha: f64) -> Outcome {
    let over: Vec<f64> = runs
        .iter()
        .filter_map(|r| r.particle.as_ref())
        .map(|p| p.path.lambda.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - alpha)
        .collect();
    if over.is_empty() {
        return skip("no particle run");
    }
    le(over.into_iter().fold(f64::NEG_INFINITY, f64::max), 0.0)
}

/// Replays the first steps of the coarsest particle run.
fn check_p3(cfg: &ScenarioConfig, d: &Density, runs: &[LevelRun]) -> Outcome {
    let Some((r, p)) = runs.iter().find_map(|r| r.particle.as_ref().map(|p| (r, p))) else {
        return skip("no particle run");
    };
    let dt = r.params.particle_dt;
    let total = p.path.len().saturating_sub(1);
    let steps = total.min(200);
    if steps == 0 {
        return skip("empty particle path");
    }
    let replay = init_ensemble(d, p.n, cfg.seed, cfg.sampling)
        .map(|e| e.with_alpha(cfg.alpha))
        .and_then(|e| particle_sim::run(e, steps as f64 * dt, dt, 1, cfg.thresholds.jump_threshold));
    let Ok((path, _)) = replay else {
        return le(1.0, 0.0).note("replay failed");
    };
    let same = path.lambda.len() == steps + 1
        && path.lambda.iter().zip(&p.path.lambda).all(|(a, b)| a.to_bits() == b.to_bits())
        && path.times.iter().zip(&p.path.times).all(|(a, b)| a.to_bits() == b.to_bits());
    le(if same { 0.0 } else { 1.0 }, 0.0).note(format!("replayed {steps} steps"))
}

fn check_p4(runs: &[LevelRun]) -> Outcome {
    let paths: Vec<_> = runs.iter().filter_map(|r| r.particle.as_ref()).collect();
    if paths.len() < 3 {
        return skip("needs three particle levels");
    }
    let d: Vec<f64> = paths
        .windows(2)
        .map(|w| {
            w[0].path
                .times
                .iter()
                .map(|&t| (w[0].path.value_at(t) - w[1].path.value_at(t)).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    let ok = strictly_decreasing(&d);
    Outcome {
        measured: d.last().copied(),
        threshold: None,
        verdict: if ok { Verdict::Pass } else { Verdict::Fail },
        note: format!("sup distances between successive levels {}", fmt_list(&d)),
    }
}

fn check_g1(levels: &[LevelSummary]) -> Outcome {
    let r: Vec<f64> = levels.iter().filter_map(|l| l.max_mass_residual).collect();
    if r.is_empty() {
        return skip("no grid run");
    }
    le(r.into_iter().fold(0.0, f64::max), 1e-8)
}

fn grid_levels(levels: &[LevelSummary]) -> Vec<&LevelSummary> {
    levels.iter().filter(|l| l.max_mass_residual.is_some()).collect()
}

fn check_g2(levels: &[LevelSummary], alpha: f64) -> Outcome {
    let Some(l) = grid_levels(levels).pop() else {
        return skip("no grid run");
    };
    let diff = (l.nu_integral - l.lambda_end / alpha).abs();
    le(diff, 2.0 * l.params.dx * l.nu_max).note(format!("surviving mass {:.3e}", l.surviving_mass))
}

fn check_g3(levels: &[LevelSummary]) -> Outcome {
    let c: Vec<f64> = levels.iter().map(|l| l.decay_constant).collect();
    match finest_two(&c) {
        Some((a, b)) => le(growth(a, b).abs(), 0.3).note(format!("constants {}", fmt_list(&c))),
        None => skip(format!("single level, constant {}", c[0])),
    }
}

fn check_g4(levels: &[LevelSummary]) -> Outcome {
    let Some(l) = levels.last() else {
        return skip("no level");
    };
    le(l.time_integral_excess, 2.0 * l.params.dx)
}

fn check_g5(levels: &[LevelSummary]) -> Outcome {
    let b: Vec<(f64, f64)> = levels
        .iter()
        .filter_map(|l| l.bounds.as_ref().map(|b| (b.max_u_t, b.max_u_xx)))
        .collect();
    if b.len() < levels.len() {
        return le(f64::INFINITY, 0.5).note("bound window empty at some level");
    }
    match finest_two(&b) {
        Some((a, c)) => {
            let g = growth(a.0, c.0).max(growth(a.1, c.1));
            le(g, 0.5).note(format!("u_t {:.4} -> {:.4}, u_xx {:.4} -> {:.4}", a.0, c.0, a.1, c.1))
        }
        None => skip("single level"),
    }
}

fn check_w1(levels: &[LevelSummary]) -> Outcome {
    let m = levels.iter().map(|l| l.min_w).fold(f64::INFINITY, f64::min);
    le(-m, 1e-12)
}

fn check_w2(levels: &[LevelSummary]) -> Outcome {
    let l = levels.last().expect("at least one level");
    le(l.support_mismatch as f64, 0.0)
}

fn check_w3(levels: &[LevelSummary]) -> Outcome {
    if levels.iter().any(|l| l.obstacle.points == 0) {
        return skip("no interior obstacle points");
    }
    let l1: Vec<f64> = levels.iter().map(|l| l.obstacle.l1).collect();
    let comp = levels.last().map_or(0.0, |l| l.obstacle.complementarity);
    let mut out = le(comp, 0.1);
    // an exactly zero residual cannot decrease further
    let improving = l1.windows(2).all(|w| w[1] < w[0] || w[1] == 0.0);
    if !improving {
        out.verdict = Verdict::Fail;
    }
    out.note(format!("L1 residuals {}", fmt_list(&l1)))
}

fn check_b1(levels: &[LevelSummary]) -> Outcome {
    let p = &levels.last().expect("at least one level").profile;
    let bad = p.decreasing_pairs + p.flat_outside_jumps + p.sloped_inside_jumps;
    le(bad as f64, 0.0).note(format!(
        "decreasing {}, flat outside jumps {}, sloped inside jumps {}",
        p.decreasing_pairs, p.flat_outside_jumps, p.sloped_inside_jumps
    ))
}

/// Minimum number of interior points outside jumps for profile trends.
const MIN_FREE_POINTS: usize = 5;

fn thin_profile(levels: &[LevelSummary]) -> Option<Outcome> {
    let thin = levels.iter().any(|l| l.profile.free_points < MIN_FREE_POINTS);
    thin.then(|| skip(format!("fewer than {MIN_FREE_POINTS} interior points outside jumps")))
}

fn check_b2(levels: &[LevelSummary]) -> Outcome {
    if let Some(o) = thin_profile(levels) {
        return o;
    }
    let f: Vec<f64> = levels.iter().map(|l| l.profile.unresolved_fraction).collect();
    if f.len() < 2 {
        return skip(format!("single level, fraction {}", f[0]));
    }
    let ok = f.windows(2).all(|w| w[1] <= w[0]);
    Outcome {
        measured: f.last().copied(),
        threshold: None,
        verdict: if ok { Verdict::Pass } else { Verdict::Fail },
        note: format!("fractions {}", fmt_list(&f)),
    }
}

fn check_b3(levels: &[LevelSummary]) -> Outcome {
    let m: Vec<f64> = levels
        .iter()
        .map(|l| {
            l.endpoint_slopes
                .iter()
                .flat_map(|e| [e.lower, e.upper])
                .filter(|v| v.is_finite())
                .fold(f64::NAN, f64::max)
        })
        .collect();
    if m.iter().all(|v| v.is_nan()) {
        return Outcome {
            measured: None,
            threshold: None,
            verdict: Verdict::Pass,
            note: "no jump endpoints".into(),
        };
    }
    if m.len() < 2 {
        return skip(format!("single level, max endpoint slope {}", m[0]));
    }
    let ok = strictly_decreasing(&m);
    Outcome {
        measured: m.last().copied(),
        threshold: None,
        verdict: if ok { Verdict::Pass } else { Verdict::Fail },
        note: format!("max endpoint slopes {}", fmt_list(&m)),
    }
}

fn check_b4(levels: &[LevelSummary]) -> Outcome {
    if let Some(o) = thin_profile(levels) {
        return o;
    }
    let v: Vec<f64> = levels.iter().map(|l| l.profile.max_slope_increment).collect();
    match finest_two(&v) {
        Some((a, b)) => le(growth(a, b), 0.3).note(format!("increments {}", fmt_list(&v))),
        None => skip(format!("single level, increment {}", v[0])),
    }
}

fn check_b5(levels: &[LevelSummary]) -> Outcome {
    if let Some(o) = thin_profile(levels) {
        return o;
    }
    let v: Vec<f64> = levels.iter().map(|l| l.profile.max_adjacent_slope).collect();
    match finest_two(&v) {
        Some((a, b)) => le(growth(a, b).abs(), 0.3).note(format!("slopes {}", fmt_list(&v))),
        None => skip(format!("single level, slope {}", v[0])),
    }
}

fn check_b6(levels: &[LevelSummary]) -> Outcome {
    let b = &levels.last().expect("at least one level").blowup;
    if b.probed == b.inside_jump {
        return skip("no probe outside jumps");
    }
    let fitted = (b.vanishing + b.critical) as f64 / (b.probed - b.inside_jump) as f64;
    ge(fitted, 0.9).note(format!(
        "vanishing {}, critical {}, inconclusive {}, failed {}",
        b.vanishing, b.critical, b.inconclusive, b.failed
    ))
}

fn check_h1(runs: &[LevelRun]) -> Outcome {
    let mut worst: f64 = 0.0;
    for r in runs {
        let paths = r.grid.iter().map(|g| &g.path).chain(r.particle.iter().map(|p| &p.path));
        for p in paths {
            for w in p.lambda.windows(2) {
                worst = worst.max(w[0] - w[1]);
            }
        }
    }
    le(worst, 0.0).note("largest decrease between samples")
}

fn check_h2(levels: &[LevelSummary], alpha: f64) -> Outcome {
    match levels.last().and_then(|l| l.comparison.as_ref()) {
        Some(c) => {
            let mut out = le(c.sup, 0.05 * alpha);
            if out.verdict == Verdict::Fail {
                out.note = format!("at t = {}", c.sup_at);
            }
            out
        }
        None => skip("single method"),
    }
}

/// Runs every registered check on a scenario's levels.
pub fn verify_suite(cfg: &ScenarioConfig, d: &Density, runs: &[LevelRun], levels: &[LevelSummary]) -> Ledger {
    assert!(!runs.is_empty() && runs.len() == levels.len(), "one summary per level");
    let coarse = &runs[0].params;
    let n = if cfg.method.particle() { coarse.n } else { 10_000 };
    let mut entries = Vec::with_capacity(REGISTRY.len());
    for spec in REGISTRY {
        let out = match spec.id {
            "D1" => check_d1(d),
            "D2" => check_d2(cfg, d),
            "D3" => check_d3(cfg, d),
            "J1" => check_j1(cfg),
            "J2" => check_j2(cfg, d, n, coarse.dx),
            "J3" => check_j3(cfg, d, coarse.dx),
            "P1" => check_p1(runs, cfg.alpha),
            "P2" => check_p2(runs, cfg.alpha),
            "P3" => check_p3(cfg, d, runs),
            "P4" => check_p4(runs),
            "G1" => check_g1(levels),
            "G2" => check_g2(levels, cfg.alpha),
            "G3" => check_g3(levels),
            "G4" => check_g4(levels),
            "G5" => check_g5(levels),
            "W1" => check_w1(levels),
            "W2" => check_w2(levels),
            "W3" => check_w3(levels),
            "B1" => check_b1(levels),
            "B2" => check_b2(levels),
            "B3" => check_b3(levels),
            "B4" => check_b4(levels),
            "B5" => check_b5(levels),
            "B6" => check_b6(levels),
            "H1" => check_h1(runs),
            "H2" => check_h2(levels, cfg.alpha),
            other => unreachable!("unregistered invariant {other}"),
        };
        entries.push(LedgerEntry {
            id: spec.id,
            claim: spec.claim,
            measured: out.measured,
            threshold: out.threshold,
            verdict: out.verdict,
            hard: spec.hard,
            note: out.note,
        });
    }
    Ledger { entries }
}
