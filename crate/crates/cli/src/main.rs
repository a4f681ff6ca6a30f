use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};

use clap::{Parser, Subcommand};
use serde_json::json;
use supercool::harness::{self, compare_paths, Ledger, ScenarioConfig, Summary, Verdict};
use supercool::HarnessError;

/// Scenario runner for the supercooled Stefan solvers.
///
/// Exit codes: 0 pass, 1 hard invariant failure, 2 configuration or input
/// error, 3 numerical abort.
#[derive(Parser)]
#[command(name = "supercool", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its artifacts.
    Simulate {
        config: PathBuf,
        /// Override a config key, e.g. `--set thresholds.eps_w=1e-4`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Shorthand for `--set output_dir=DIR`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute w, the freezing profile and the ledger of a finished run.
    Analyze { dir: PathBuf },
    /// Compare the frontiers of two runs, or grid against particles in one
    /// run made with `method = both`.
    Compare {
        a: PathBuf,
        b: Option<PathBuf>,
        /// Time tolerance for jump matching; defaults to the larger step.
        #[arg(long)]
        t_tol: Option<f64>,
        /// Frontier tolerance for jump matching; defaults to alpha/N + dx.
        #[arg(long)]
        lambda_tol: Option<f64>,
    },
    /// Re-run the invariant suite on a finished run.
    Verify { dir: PathBuf },
    /// Run one scenario per value of a config key.
    Sweep {
        config: PathBuf,
        /// Dotted config key to vary.
        #[arg(long)]
        param: String,
        /// Comma-separated JSON values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Scenarios run at the same time.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

fn overrides(set: &[String], out: &Option<PathBuf>) -> Vec<String> {
    let mut all = set.to_vec();
    if let Some(dir) = out {
        all.push(format!("output_dir={}", json!(dir.display().to_string())));
    }
    all
}

fn print_ledger(ledger: &Ledger) {
    for e in &ledger.entries {
        let verdict = match e.verdict {
            Verdict::Pass => "pass",
            Verdict::Fail if e.hard => "FAIL",
            Verdict::Fail => "fail",
            Verdict::Skipped => "skip",
        };
        let num = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.4e}"));
        println!(
            "{:<3} {:<5} measured {:>11} threshold {:>11}  {}{}",
            e.id,
            verdict,
            num(e.measured),
            num(e.threshold),
            e.claim,
            if e.note.is_empty() { String::new() } else { format!(" ({})", e.note) }
        );
    }
}

fn report(summary: &Summary) -> u8 {
    print_ledger(&summary.ledger);
    let s = &summary.status;
    println!(
        "{}: {} passed, {} hard failures, {} soft failures, {} skipped",
        summary.scenario, s.passed, s.hard_failures, s.soft_failures, s.skipped
    );
    u8::from(s.hard_failures > 0)
}

fn simulate(config: &Path, set: &[String], out: &Option<PathBuf>) -> Result<u8, HarnessError> {
    let cfg = ScenarioConfig::load(config, &overrides(set, out))?;
    let outcome = harness::run_scenario(&cfg)?;
    println!("artifacts in {}", cfg.scenario_dir().display());
    Ok(report(&outcome.summary))
}

fn compare(a: &Path, b: Option<&Path>, t_tol: Option<f64>, lambda_tol: Option<f64>) -> Result<u8, HarnessError> {
    let (cfg_a, runs_a) = harness::load_scenario(a)?;
    let finest_a = &runs_a.last().expect("at least one level").run;
    let (path_a, path_b, params_b, n) = match b {
        Some(b) => {
            let (cfg_b, runs_b) = harness::load_scenario(b)?;
            if cfg_a.density != cfg_b.density || cfg_a.alpha != cfg_b.alpha || cfg_a.t_end != cfg_b.t_end {
                return Err(HarnessError::Mismatch(
                    "density, alpha and t_end must agree".into(),
                ));
            }
            let finest_b = &runs_b.last().expect("at least one level").run;
            let n = finest_a
                .particle
                .as_ref()
                .or(finest_b.particle.as_ref())
                .map(|p| p.n);
            (finest_a.path().clone(), finest_b.path().clone(), finest_b.params, n)
        }
        None => {
            let (Some(g), Some(p)) = (&finest_a.grid, &finest_a.particle) else {
                return Err(HarnessError::Mismatch(
                    "a single run needs both methods to be compared".into(),
                ));
            };
            (g.path.clone(), p.path.clone(), finest_a.params, Some(p.n))
        }
    };
    let pa = finest_a.params;
    let step = |p: &harness::LevelParams| p.grid_dt.max(p.particle_dt);
    let t_tol = t_tol.unwrap_or(step(&pa).max(step(&params_b)));
    let dx = pa.dx.max(params_b.dx);
    let lambda_tol = lambda_tol.unwrap_or(n.map_or(0.0, |n| cfg_a.alpha / n as f64) + dx);
    let c = compare_paths(&path_a, &path_b, t_tol, lambda_tol)?;
    let doc = json!({
        "sup": c.sup,
        "sup_at": c.sup_at,
        "l1": c.l1,
        "t_end": c.t_end,
        "t_tol": t_tol,
        "lambda_tol": lambda_tol,
        "matched_jumps": c.matched.len(),
        "unmatched_a": c.unmatched_a,
        "unmatched_b": c.unmatched_b,
    });
    println!("{}", serde_json::to_string_pretty(&doc).expect("report serializes"));
    Ok(0)
}

fn sweep(
    config: &Path,
    param: &str,
    values: &[String],
    set: &[String],
    out: &Option<PathBuf>,
    jobs: usize,
) -> Result<u8, HarnessError> {
    let base = ScenarioConfig::load(config, &overrides(set, out))?;
    let mut configs = Vec::with_capacity(values.len());
    for v in values {
        let mut doc = serde_json::to_value(&base).expect("config serializes");
        harness::config::apply_override(&mut doc, &format!("{param}={v}"))?;
        let tag: String = v
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' })
            .collect();
        doc["id"] = json!(format!("{}-{}-{}", base.id, param.replace('.', "_"), tag));
        let cfg: ScenarioConfig = serde_json::from_value(doc).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        configs.push(cfg);
    }
    // each scenario owns its directory, so workers share nothing but the
    // queue position
    let next = AtomicUsize::new(0);
    let mut results: Vec<(usize, Result<Summary, HarnessError>)> = std::thread::scope(|s| {
        let workers: Vec<_> = (0..jobs.clamp(1, configs.len().max(1)))
            .map(|_| {
                s.spawn(|| {
                    let mut done = Vec::new();
                    loop {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        let Some(cfg) = configs.get(i) else { break };
                        done.push((i, harness::run_scenario(cfg).map(|o| o.summary)));
                    }
                    done
                })
            })
            .collect();
        workers
            .into_iter()
            .flat_map(|w| w.join().expect("sweep worker panicked"))
            .collect()
    });
    results.sort_by_key(|(i, _)| *i);
    let mut code = 0u8;
    for (i, r) in results {
        match r {
            Ok(s) => {
                let st = &s.status;
                println!(
                    "{}: {} passed, {} hard failures, {} soft failures",
                    configs[i].id, st.passed, st.hard_failures, st.soft_failures
                );
                code = code.max(u8::from(st.hard_failures > 0));
            }
            Err(e) => {
                eprintln!("{}: {e}", configs[i].id);
                code = code.max(e.exit_code() as u8);
            }
        }
    }
    Ok(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate { config, set, out } => simulate(config, set, out),
        Command::Analyze { dir } => harness::analyze_dir(dir).map(|s| report(&s)),
        Command::Compare { a, b, t_tol, lambda_tol } => compare(a, b.as_deref(), *t_tol, *lambda_tol),
        Command::Verify { dir } => harness::verify_dir(dir).map(|s| report(&s)),
        Command::Sweep {
            config,
            param,
            values,
            set,
            out,
            jobs,
        } => sweep(config, param, values, set, out, *jobs),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
