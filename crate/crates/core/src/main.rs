//! Command-line front end for the verification toolkit.
//!
//! Exit codes: 0 everything requested passed, 2 a proved conclusion failed
//! on the data, 3 a standing assumption failed, 4 configuration or usage
//! error.

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use redwave::audit::audit_assumptions;
use redwave::distcalc::{
    lemma_suite, mollified_quotient_check, random_descending_staircase, Bump,
};
use redwave::run::{run_scenario, write_outputs, RunArtifacts};
use redwave::scenario::{catalog, catalog_entry, load_str_with, Scenario};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "redwave",
    about = "Growth and uniqueness checks for exterior reduced-wave trajectories",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one scenario and run its full check list.
    Run(RunArgs),
    /// Audit the standing assumptions of one scenario, nothing else.
    Audit(SourceArgs),
    /// Run the built-in catalog end to end.
    Suite(SuiteArgs),
    /// Randomized verification of the averaged-difference lemma and the
    /// mollified quotient domination.
    Lemma(LemmaArgs),
}

#[derive(Args)]
struct SourceArgs {
    /// Name of a built-in scenario.
    #[arg(long, conflicts_with = "config")]
    scenario: Option<String>,
    /// Path to a scenario TOML file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the integrator tolerance.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Override the number of grid points.
    #[arg(long)]
    grid: Option<usize>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Directory for the trajectory, functional, and summary files.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SuiteArgs {
    /// Include the deliberately failing demonstration scenarios.
    #[arg(long)]
    all: bool,
    /// Run scenarios on a thread pool.
    #[arg(long)]
    parallel: bool,
    /// Directory for per-scenario output files.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LemmaArgs {
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Random step instances for the averaged-difference identity.
    #[arg(long, default_value_t = 100)]
    instances: usize,
    /// Random mollifiers per instance.
    #[arg(long, default_value_t = 100)]
    bumps: usize,
    /// Random descending staircases for the quotient domination.
    #[arg(long, default_value_t = 20)]
    quotient_trials: usize,
    /// Allowed relative deviation from the predicted averaged increment.
    #[arg(long, default_value_t = 0.10)]
    tolerance: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // Help and version requests are not usage errors.
            use clap::error::ErrorKind;
            let benign = matches!(
                e.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return if benign {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(4)
            };
        }
    };
    let code = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Audit(args) => cmd_audit(args),
        Command::Suite(args) => cmd_suite(args),
        Command::Lemma(args) => cmd_lemma(args),
    };
    ExitCode::from(code)
}

fn load_source(args: &SourceArgs) -> Result<Scenario, String> {
    let text = match (&args.scenario, &args.config) {
        (Some(name), None) => catalog_entry(name)
            .map(str::to_owned)
            .ok_or_else(|| format!("no built-in scenario named '{name}'"))?,
        (None, Some(path)) => {
            std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?
        }
        _ => return Err("pass exactly one of --scenario or --config".to_string()),
    };
    load_str_with(&text, |cfg| {
        if let Some(seed) = args.seed {
            cfg.seed = seed;
        }
        if let Some(t) = args.tolerance {
            cfg.tolerance = t;
        }
        if let Some(g) = args.grid {
            cfg.window.grid_points = g;
        }
    })
    .map_err(|e| e.to_string())
}

fn cmd_run(args: RunArgs) -> u8 {
    let sc = match load_source(&args.source) {
        Ok(sc) => sc,
        Err(e) => return usage_error(&e),
    };
    let art = match run_scenario(&sc) {
        Ok(a) => a,
        Err(e) => return usage_error(&e.to_string()),
    };
    print!("{}", art.report.summary());
    if let Some(dir) = &args.out {
        match write_outputs(&art, dir) {
            Ok(paths) => {
                println!("wrote: {}", paths.trajectory.display());
                println!("wrote: {}", paths.functionals.display());
                println!("wrote: {}", paths.summary.display());
            }
            Err(e) => return usage_error(&e.to_string()),
        }
    }
    art.report.exit_code() as u8
}

fn cmd_audit(args: SourceArgs) -> u8 {
    let sc = match load_source(&args) {
        Ok(sc) => sc,
        Err(e) => return usage_error(&e),
    };
    let report = match audit_assumptions(&sc.field, &sc.gauges, &sc.probes, &sc.grid) {
        Ok(r) => r,
        Err(e) => return usage_error(&e.to_string()),
    };
    println!("scenario: {}", sc.name);
    for line in report.summary_lines() {
        println!("{line}");
    }
    if report.failed() {
        println!("verdict: exit 3");
        3
    } else {
        println!("verdict: exit 0");
        0
    }
}

fn cmd_suite(args: SuiteArgs) -> u8 {
    let names: Vec<&str> = catalog()
        .into_iter()
        .map(|(n, _)| n)
        .filter(|n| args.all || !matches!(*n, "faded-tail" | "inverted-shells"))
        .collect();

    let one = |name: &&str| -> (String, Result<RunArtifacts, String>) {
        let text = catalog_entry(name).expect("catalog name");
        let art = load_str_with(text, |_| {})
            .map_err(|e| e.to_string())
            .and_then(|sc| run_scenario(&sc).map_err(|e| e.to_string()));
        (name.to_string(), art)
    };
    let results: Vec<(String, Result<RunArtifacts, String>)> = if args.parallel {
        names.par_iter().map(one).collect()
    } else {
        names.iter().map(one).collect()
    };

    let mut worst = 0u8;
    for (name, result) in &results {
        match result {
            Ok(art) => {
                let code = art.report.exit_code() as u8;
                worst = worst_code(worst, code);
                println!(
                    "{} {:<20} exit {}",
                    if code == 0 { "PASS" } else { "FAIL" },
                    name,
                    code
                );
                if code != 0 {
                    for line in art.report.summary().lines() {
                        println!("    {line}");
                    }
                }
                if let Some(dir) = &args.out {
                    if let Err(e) = write_outputs(art, dir) {
                        eprintln!("error: {name}: {e}");
                        worst = worst_code(worst, 4);
                    }
                }
            }
            Err(e) => {
                eprintln!("error: {name}: {e}");
                worst = worst_code(worst, 4);
            }
        }
    }
    println!("suite verdict: exit {worst}");
    worst
}

/// Precedence 4 > 3 > 2 > 0.
fn worst_code(a: u8, b: u8) -> u8 {
    a.max(b)
}

fn cmd_lemma(args: LemmaArgs) -> u8 {
    if args.instances == 0 || args.bumps == 0 {
        return usage_error("instances and bumps must be positive");
    }
    if !(args.tolerance > 0.0) {
        return usage_error("tolerance must be positive");
    }

    let trials = lemma_suite(args.seed, args.instances, args.bumps);
    let mut worst_rel = 0.0f64;
    let mut failures = 0usize;
    for t in &trials {
        worst_rel = worst_rel.max(t.rel_err);
        if t.rel_err > args.tolerance {
            failures += 1;
            println!(
                "FAIL instance eta={} h={} s={} measured={} expected={} rel_err={:.3e}",
                t.eta, t.h, t.s, t.measured, t.expected, t.rel_err
            );
        }
    }
    println!(
        "averaged-difference lemma: {} trials, worst relative error {:.3e} (tolerance {:.1e})",
        trials.len(),
        worst_rel,
        args.tolerance
    );

    let mut rng = ChaCha8Rng::seed_from_u64(args.seed.wrapping_add(1));
    let mut worst_gap = f64::NEG_INFINITY;
    let mut quotient_failures = 0usize;
    for _ in 0..args.quotient_trials {
        let f = random_descending_staircase(&mut rng, 1.0, 9.0);
        let h = rng.gen_range(0.05..0.4);
        let a = rng.gen_range(2.0..5.0);
        let b = rng.gen_range(a + 0.5..7.5);
        let bump = match Bump::new(a, b) {
            Ok(b) => b,
            Err(e) => return usage_error(&e.to_string()),
        };
        let (lhs, rhs) = mollified_quotient_check(&f, &bump, h);
        let gap = lhs - rhs;
        worst_gap = worst_gap.max(gap);
        if gap > 1e-8 {
            quotient_failures += 1;
            println!("FAIL quotient trial: lhs={lhs} rhs={rhs} gap={gap:.3e}");
        }
    }
    println!(
        "mollified quotient domination: {} trials, worst lhs-rhs gap {:.3e} (cap 1.0e-8)",
        args.quotient_trials, worst_gap
    );

    if failures + quotient_failures > 0 {
        println!("verdict: exit 2");
        2
    } else {
        println!("verdict: exit 0");
        0
    }
}

fn usage_error(msg: &str) -> u8 {
    eprintln!("error: {msg}");
    4
}
