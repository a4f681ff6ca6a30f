//! Acceptance criteria at desk scale. Prints one PASS/FAIL line per
//! criterion and exits non-zero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use supercool::boundary_analysis::{
    blowup_fit, classify_points, freezing_time, speed_formula_check, BlowupOptions, BlowupVerdict, ClassifyOptions,
};
use supercool::grid_solver::{run_grid, GridConfig};
use supercool::harness::{compare_paths, run_scenario, DensitySpec, LevelSummary, ScenarioConfig};
use supercool::jump_rule::{cascade_jump, verify_cascade_minimality};
use supercool::particle_sim::{self, init_ensemble, Sampling};
use supercool::{rng, synthetic, Density};

struct Outcome {
    id: u32,
    pass: bool,
    detail: String,
}

fn outcome(id: u32, pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        id,
        pass,
        detail: detail.into(),
    }
}

fn scenario(json: &str, out: &std::path::Path) -> Vec<LevelSummary> {
    let mut cfg = ScenarioConfig::from_json(json).expect("valid scenario");
    cfg.output_dir = out.to_path_buf();
    run_scenario(&cfg).expect("scenario runs").summary.levels
}

fn uniform_json() -> &'static str {
    r#"{"id": "uniform", "density": {"family": "piecewise", "breaks": [0, 2], "values": [0.5]},
        "alpha": 1, "dt": 0.0025, "dx": 0.01, "x_max": 7, "t_end": 1,
        "refinement_levels": 3, "dt_scaling": "parabolic"}"#
}

fn oscillatory_json() -> &'static str {
    r#"{"id": "oscillatory", "density": {"family": "oscillatory", "alpha1": 0.5, "alpha2": 1.2, "a1": 1,
        "p": 0.5, "q": 0.5, "n_levels": 4, "tail_breaks": [1, 1.53515625], "tail_values": [0.5]},
        "alpha": 1, "dt": 0.0025, "dx": 0.01, "x_max": 7, "t_end": 1,
        "refinement_levels": 3, "dt_scaling": "parabolic"}"#
}

fn jump_json() -> &'static str {
    r#"{"id": "jump", "density": {"family": "piecewise", "breaks": [0, 0.1, 0.3, 1.5333333333333333],
        "values": [0.3, 3, 0.3]},
        "alpha": 1, "dt": 0.0025, "dx": 0.01, "x_max": 7, "t_end": 1,
        "refinement_levels": 3, "dt_scaling": "parabolic"}"#
}

fn closed_form_density() -> Density {
    Density::piecewise_constant(vec![0.0, 0.3, 1.0, 1.5], vec![2.0, 0.0, 0.8]).unwrap()
}

fn growth(coarse: f64, fine: f64) -> f64 {
    fine / coarse.max(1e-12)
}

fn cascade_oracle() -> Outcome {
    let mut mismatches = 0;
    let mut nontrivial = 0;
    for i in 0..1000u64 {
        let u = |j: u64| rng::uniform(11, i, j);
        let n_total = 1 + (u(0) * 20.0) as usize;
        let alive_n = 1 + (u(1) * n_total as f64) as usize;
        let alive_n = alive_n.min(n_total);
        let alpha = 0.2 + 2.0 * u(2);
        let lambda = u(3);
        let quantum = alpha / n_total as f64;
        let spread = (0.3 + 2.0 * u(4)) * alpha;
        let mut alive: Vec<f64> = (0..alive_n)
            .map(|j| {
                let r = u(10 + j as u64);
                if u(40 + j as u64) < 0.2 {
                    // exactly on a cascade level
                    lambda + quantum * (1 + (r * n_total as f64) as usize) as f64
                } else {
                    lambda + 1e-9 + r * spread
                }
            })
            .collect();
        alive.sort_by(f64::total_cmp);
        let k0 = (u(5) * 4.0) as usize;
        let r = cascade_jump(&alive, lambda, k0, alpha, n_total).unwrap();
        if !r.absorbed_indices.is_empty() {
            nontrivial += 1;
        }
        if !verify_cascade_minimality(&alive, lambda, k0, alpha, n_total, &r) {
            mismatches += 1;
        }
    }
    outcome(
        1,
        mismatches == 0,
        format!("{mismatches} mismatches in 1000 ensembles ({nontrivial} with absorptions)"),
    )
}

fn closed_form_jump() -> Outcome {
    let d = closed_form_density();
    let dx = 0.01;
    let cfg = GridConfig {
        alpha: 1.0,
        t_end: 0.01,
        dt: 0.0025,
        dx,
        x_max: 4.0,
        sample_every: 1,
        jump_threshold: 0.01,
    };
    let grid = run_grid(&d, &cfg).unwrap().path.lambda0();
    let n = 100_000;
    let mut e = init_ensemble(&d, n, 7, Sampling::Uniform).unwrap().with_alpha(1.0);
    e.initial_jump().unwrap();
    let part = e.frontier();
    let se = (0.6f64 * 0.4 / n as f64).sqrt();
    let tol_p = 1.0 / n as f64 + 3.0 * se;
    let pass = (grid - 0.6).abs() <= dx && (part - 0.6).abs() <= tol_p;
    outcome(
        2,
        pass,
        format!(
            "grid {grid:.5} (tol {dx}), particle {part:.5} (tol {tol_p:.2e}, N = {n}, i.i.d. sampling)"
        ),
    )
}

fn mass_balance() -> Outcome {
    let mut worst_p: f64 = 0.0;
    for d in [Density::piecewise_constant(vec![0.0, 2.0], vec![0.5]).unwrap(), closed_form_density()] {
        let mut e = init_ensemble(&d, 10_000, 3, Sampling::Stratified).unwrap().with_alpha(1.0);
        e.initial_jump().unwrap();
        let check = |e: &particle_sim::Ensemble| (e.frontier() / e.alpha + e.alive_fraction() - 1.0).abs();
        worst_p = worst_p.max(check(&e));
        for _ in 0..500 {
            e.step(0.002).unwrap();
            worst_p = worst_p.max(check(&e));
        }
    }
    let mut worst_g: f64 = 0.0;
    for d in [Density::piecewise_constant(vec![0.0, 2.0], vec![0.5]).unwrap(), closed_form_density()] {
        let cfg = GridConfig {
            alpha: 1.0,
            t_end: 1.0,
            dt: 0.0025,
            dx: 0.01,
            x_max: 7.0,
            sample_every: 40,
            jump_threshold: 0.01,
        };
        worst_g = worst_g.max(run_grid(&d, &cfg).unwrap().max_mass_residual);
    }
    outcome(
        3,
        worst_p <= 1e-12 && worst_g <= 1e-8,
        format!("particle max |Λ/α + alive - 1| = {worst_p:.1e}, grid max per-step residual = {worst_g:.1e}"),
    )
}

fn weight_normalization() -> Outcome {
    // alpha = 2 freezes everything within t = 0.01
    let d = Density::piecewise_constant(vec![0.0, 0.05, 1.3633333333333333], vec![0.3, 0.75]).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for dx in [0.01, 0.005] {
        let cfg = GridConfig {
            alpha: 2.0,
            t_end: 1.0,
            dt: 25.0 * dx * dx,
            dx,
            x_max: 6.4,
            sample_every: 40,
            jump_threshold: 0.01,
        };
        let run = run_grid(&d, &cfg).unwrap();
        let lend = *run.path.lambda.last().unwrap();
        let gap = (run.weight.integral() - lend / 2.0).abs();
        let tol = 2.0 * dx * run.weight.max() + 1e-3;
        pass &= run.surviving_mass < 1e-3 && gap <= tol;
        parts.push(format!(
            "dx {dx}: surviving {:.1e}, gap {gap:.4} <= {tol:.4}",
            run.surviving_mass
        ));
    }
    outcome(4, pass, parts.join("; "))
}

fn uniform_criteria(levels: &[LevelSummary]) -> Vec<Outcome> {
    let (c, f) = (&levels[1], &levels[2]);
    let l1: Vec<f64> = levels.iter().map(|l| l.obstacle.l1).collect();
    let obstacle = outcome(
        5,
        l1.windows(2).all(|w| w[1] < w[0]),
        format!("interior L1 residual {:.3e} -> {:.3e} -> {:.3e}", l1[0], l1[1], l1[2]),
    );

    let nd: Vec<f64> = levels.iter().map(|l| l.nondegeneracy.map_or(f64::NAN, |n| n.c)).collect();
    let var = (nd[2] - nd[1]).abs() / nd[1];
    let nondeg = outcome(
        6,
        nd[1] > 0.0 && nd[2] > 0.0 && var < 0.3,
        format!("c = {:.4} / {:.4} / {:.4}, finest-pair variation {:.1}%", nd[0], nd[1], nd[2], 100.0 * var),
    );

    let bounds = match (&c.bounds, &f.bounds) {
        (Some(bc), Some(bf)) => {
            let gt = growth(bc.max_u_t, bf.max_u_t);
            let gxx = growth(bc.max_u_xx, bf.max_u_xx);
            let gfront = growth(bc.max_abs_u_xx_front, bf.max_abs_u_xx_front);
            outcome(
                7,
                gt <= 1.5 && gxx <= 1.5,
                format!(
                    "max u_t {:.3e} -> {:.3e} (x{gt:.2}), max u_xx {:.3e} -> {:.3e} (x{gxx:.2}); unsigned |u_xx| at the frontier x{gfront:.2}",
                    bc.max_u_t, bf.max_u_t, bc.max_u_xx, bf.max_u_xx
                ),
            )
        }
        _ => outcome(7, false, "bounds unavailable"),
    };

    // synthetic profiles first
    let alpha = 2.0;
    let opts = BlowupOptions {
        radii: vec![0.05, 0.1, 0.2],
        min_radius: 0.04,
        min_time_span: 0.0,
        tolerance: 0.1,
    };
    let wv = synthetic::potential(alpha, 0.0025, 0.0025, 2.0, 1.0, |x, _| (x - 1.0).max(0.0).powi(2) / alpha);
    let wc = synthetic::potential(alpha, 0.0025, 0.0025, 2.0, 1.0, |_, t| (0.5 - t).max(0.0) / alpha);
    let fv = blowup_fit(&wv, 1.0, 0.5, &[], &opts).unwrap();
    let fc = blowup_fit(&wc, 1.0, 0.5, &[], &opts).unwrap();
    let synthetic_ok = fv.verdict == BlowupVerdict::VanishingProfile
        && fc.verdict == BlowupVerdict::CriticalProfile
        && fv.best_residual() < 1e-9
        && fc.best_residual() < 1e-9;
    let b = &f.blowup;
    let blowup = outcome(
        10,
        synthetic_ok && b.vanishing_fraction() >= 0.9 && b.max_vanishing_residual < 0.1,
        format!(
            "synthetic residuals {:.1e} / {:.1e}; uniform finest {}/{} vanishing, max residual {:.3}",
            fv.best_residual(),
            fc.best_residual(),
            b.vanishing,
            b.probed,
            b.max_vanishing_residual
        ),
    );

    let slopes: Vec<f64> = levels.iter().map(|l| l.profile.max_adjacent_slope).collect();
    let slope_var = (slopes[2] - slopes[1]).abs() / slopes[1];
    let c1 = (slope_var < 0.3, slopes, slope_var);
    vec![obstacle, nondeg, bounds, blowup, slope_stability(c1)]
}

// criterion 12 combines the uniform slopes with the jump scenario; the
// uniform half is carried through here
fn slope_stability(c1: (bool, Vec<f64>, f64)) -> Outcome {
    let (ok, s, var) = c1;
    outcome(
        12,
        ok,
        format!("max adjacent slope {:.3} / {:.3} / {:.3} ({:.1}%)", s[0], s[1], s[2], 100.0 * var),
    )
}

fn oscillatory_criteria(levels: &[LevelSummary]) -> Vec<Outcome> {
    let (c, f) = (&levels[1], &levels[2]);
    let mut same = true;
    let mut parts = Vec::new();
    for (wc, wf) in c.windows.iter().zip(&f.windows) {
        same &= wc.jumps_closed == wf.jumps_closed;
        parts.push(format!("t0 = {}: {} vs {}", wf.t0, wc.jumps_closed, wf.jumps_closed));
    }
    let total: Vec<usize> = levels.iter().map(|l| l.jumps.len()).collect();
    let discrete = outcome(
        8,
        same && !f.windows.is_empty(),
        format!("jumps in [t0, 1] {}; total jumps per level {:?}", parts.join(", "), total),
    );
    let mut ok = !f.windows.is_empty();
    let mut parts = Vec::new();
    for w in &f.windows {
        let need = (2 * w.jumps_open) as i64 - 1;
        ok &= w.oscillations as i64 >= need;
        parts.push(format!("t0 = {}: {} oscillations >= {}", w.t0, w.oscillations, need));
    }
    let counting = outcome(9, ok, parts.join(", "));
    vec![discrete, counting]
}

fn speed_formula() -> Outcome {
    let (alpha, v) = (1.0, 0.5);
    let mut medians = Vec::new();
    for dx in [0.02, 0.01, 0.005] {
        let (field, path) = synthetic::travelling_wave(alpha, v, dx, 3.0, 0.01, 1.0);
        let xs: Vec<f64> = field.x_grid.iter().copied().filter(|&x| x > 0.05 && x < 0.45).collect();
        let prof = classify_points(&freezing_time(&path, &xs), &field, &[], &ClassifyOptions::new(alpha, dx));
        medians.push(speed_formula_check(&prof, &field, 1e-6).median);
    }
    outcome(
        11,
        medians.windows(2).all(|w| w[1] < w[0]) && medians[2] < 0.1,
        format!(
            "travelling-wave median relative error {:.4} -> {:.4} -> {:.4}",
            medians[0], medians[1], medians[2]
        ),
    )
}

fn endpoint_slopes(levels: &[LevelSummary]) -> (bool, String) {
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    for l in levels {
        let Some((i, _)) = l
            .jumps
            .iter()
            .enumerate()
            .filter(|(_, j)| j.t > 0.0)
            .max_by(|a, b| a.1.size().total_cmp(&b.1.size()))
        else {
            return (false, "no positive-time jump".into());
        };
        lower.push(l.endpoint_slopes[i].lower);
        upper.push(l.endpoint_slopes[i].upper);
    }
    let dec = |v: &[f64]| v.windows(2).all(|w| w[1] < w[0]);
    (
        dec(&lower) && dec(&upper),
        format!(
            "jump endpoint s' lower {:.4} -> {:.4} -> {:.4}, upper {:.4} -> {:.4} -> {:.4}",
            lower[0], lower[1], lower[2], upper[0], upper[1], upper[2]
        ),
    )
}

fn cross_method() -> Outcome {
    let uniform = Density::piecewise_constant(vec![0.0, 2.0], vec![0.5]).unwrap();
    let spec: DensitySpec = serde_json::from_str(
        r#"{"family": "power_gap", "c": 1, "n": 1, "delta": 0.5, "steps": 10,
            "tail_breaks": [0.5, 2], "tail_values": [0.425]}"#,
    )
    .unwrap();
    let power_gap = spec.build(1.0).unwrap();
    let (n, dt_p, dx) = (100_000, 1e-4, 0.0025);
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, d) in [("uniform", &uniform), ("power gap", &power_gap)] {
        let cfg = GridConfig {
            alpha: 1.0,
            t_end: 1.0,
            dt: 25.0 * dx * dx,
            dx,
            x_max: 7.0,
            sample_every: 400,
            jump_threshold: 0.01,
        };
        let grid = run_grid(d, &cfg).unwrap().path;
        let e = init_ensemble(d, n, 7, Sampling::Stratified).unwrap().with_alpha(1.0);
        let (part, _) = particle_sim::run(e, 1.0, dt_p, 1, 0.01).unwrap();
        let c = compare_paths(&part, &grid, cfg.dt.max(dt_p), 1.0 / n as f64 + dx).unwrap();
        pass &= c.sup < 0.05;
        parts.push(format!("{name} sup {:.4} at t = {:.4}", c.sup, c.sup_at));
    }
    outcome(13, pass, format!("{} (< 0.05, N = {n})", parts.join(", ")))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let mut results: Vec<Outcome> = std::thread::scope(|s| {
        let a = s.spawn(|| vec![cascade_oracle(), closed_form_jump(), mass_balance(), weight_normalization()]);
        let b = s.spawn(|| uniform_criteria(&scenario(uniform_json(), dir)));
        let c = s.spawn(|| oscillatory_criteria(&scenario(oscillatory_json(), dir)));
        let d = s.spawn(|| endpoint_slopes(&scenario(jump_json(), dir)));
        let e = s.spawn(|| vec![speed_formula(), cross_method()]);
        let mut all = a.join().unwrap();
        all.extend(b.join().unwrap());
        all.extend(c.join().unwrap());
        all.extend(e.join().unwrap());
        let (ok, detail) = d.join().unwrap();
        let c12 = all.iter_mut().find(|o| o.id == 12).unwrap();
        c12.pass &= ok;
        c12.detail = format!("{}; {detail}", c12.detail);
        all
    });
    results.sort_by_key(|o| o.id);
    let mut failed = 0;
    for o in &results {
        println!("criterion {:>2}: {} {}", o.id, if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.0?}",
        results.len() - failed,
        start.elapsed()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
