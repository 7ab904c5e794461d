use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use hris_core::channel::{generate_channels, seeded_rng, trial_seed, CHANNEL_STREAM};
use hris_core::config::{load_config, parse_methods, parse_values, ConfigBundle, SweepVariable};
use hris_core::gap::{eta_max_bound, gap_report};
use hris_core::sweep::{emit_csv, run_sweep};
use hris_core::GapReport;

#[derive(Parser)]
#[command(name = "hris", version, about = "Hybrid-RIS placement and beamforming simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a seeded Monte-Carlo sweep and write aggregated spectral efficiency to CSV.
    Simulate(SimulateArgs),
    /// Compare the closed-form solver with the exhaustive oracle and print the gap bounds.
    GapAudit(GapAuditArgs),
}

#[derive(Args)]
struct Common {
    /// Flat key-value config file; every key is optional.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of Monte-Carlo trials.
    #[arg(long)]
    trials: Option<usize>,
    /// Root seed; trial seeds are derived from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Maximum number of placements the exhaustive oracle may enumerate.
    #[arg(long)]
    oracle_cap: Option<u128>,
    /// Maximum element count the exhaustive oracle accepts.
    #[arg(long)]
    oracle_max_elements: Option<usize>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    /// Swept parameter: rho, eta_db or L.
    #[arg(long)]
    sweep: Option<SweepVariable>,
    /// Comma-separated, strictly increasing sweep values.
    #[arg(long)]
    values: Option<String>,
    /// Comma-separated methods: proposed, arbitrary, passive, active, no_ris, oracle.
    #[arg(long)]
    methods: Option<String>,
    /// Random placements per trial for the arbitrary baseline.
    #[arg(long)]
    arbitrary_placements: Option<usize>,
    /// Whether a rho sweep also drives the RIS-UE link.
    #[arg(long)]
    tie_rho_links: Option<bool>,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GapAuditArgs {
    #[command(flatten)]
    common: Common,
    /// Target normalized gap, in (0, 1).
    #[arg(long)]
    delta: f64,
    /// Set eta to the largest amplification that guarantees the target gap, per instance.
    #[arg(long)]
    eta_at_bound: bool,
}

fn bundle_from(common: &Common) -> Result<ConfigBundle> {
    let mut bundle = match &common.config {
        Some(path) => load_config(path)?,
        None => ConfigBundle::default(),
    };
    if let Some(t) = common.trials {
        bundle.sweep.trials = t;
    }
    if let Some(s) = common.seed {
        bundle.sweep.root_seed = s;
    }
    if let Some(c) = common.oracle_cap {
        bundle.oracle.max_placements = c;
    }
    if let Some(n) = common.oracle_max_elements {
        bundle.oracle.max_elements = n;
    }
    Ok(bundle)
}

fn with_pool<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().context("building thread pool")?;
    Ok(pool.install(job))
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let mut bundle = bundle_from(&args.common)?;
    if let Some(v) = args.sweep {
        bundle.sweep.variable = v;
    }
    if let Some(v) = &args.values {
        bundle.sweep.values = parse_values(v)?;
    }
    if let Some(m) = &args.methods {
        bundle.sweep.methods = parse_methods(m)?;
    }
    if let Some(k) = args.arbitrary_placements {
        bundle.sweep.arbitrary_placements = k;
    }
    if let Some(t) = args.tie_rho_links {
        bundle.sweep.tie_rho_links = t;
    }
    bundle.validate()?;
    let rows = with_pool(args.common.threads, || run_sweep(&bundle))??;
    emit_csv(&rows, &args.out)?;
    eprintln!("wrote {} rows to {}", rows.len(), args.out.display());
    Ok(())
}

enum AuditLine {
    Report(GapReport, bool),
    Skipped(f64),
}

fn gap_audit(args: GapAuditArgs) -> Result<bool> {
    let bundle = bundle_from(&args.common)?;
    bundle.validate()?;
    if !(args.delta > 0.0 && args.delta < 1.0) {
        bail!("--delta must lie in (0, 1), got {}", args.delta);
    }
    let sweep = &bundle.sweep;
    let lines = with_pool(args.common.threads, || {
        use rayon::prelude::*;
        (0..sweep.trials)
            .into_par_iter()
            .map(|t| -> Result<AuditLine> {
                let seed = trial_seed(sweep.root_seed, t as u64);
                let mut system = bundle.system.clone();
                let mut rng = seeded_rng(seed, CHANNEL_STREAM);
                let channels = generate_channels(&system, &bundle.geometry, &bundle.fading, &mut rng)?;
                if args.eta_at_bound {
                    let eta = eta_max_bound(
                        &channels.h_ru,
                        system.num_active,
                        args.delta,
                        system.noise_var,
                        system.ris_noise_var,
                    )?;
                    if !(1.0..f64::INFINITY).contains(&eta) {
                        return Ok(AuditLine::Skipped(eta));
                    }
                    system.eta = eta;
                }
                let report = gap_report(&system, &channels, args.delta, &bundle.oracle)
                    .with_context(|| format!("trial {t} (seed {seed:#018x})"))?;
                let ok = report.check_chain().is_ok() && (!args.eta_at_bound || report.normalized_gap <= args.delta);
                Ok(AuditLine::Report(report, ok))
            })
            .collect::<Vec<_>>()
    })?;

    println!(
        "{:>5}  {:>12}  {:>12}  {:>12}  {:>12}  {:>10}  {:>10}  {:>10}  {:>10}  ok",
        "trial", "g_lb_dB", "g_prop_dB", "g_opt_dB", "g_ub_dB", "epsilon", "E", "eps/(1+e)", "eta_max"
    );
    let db = |g: f64| 10.0 * g.log10();
    let mut all_ok = true;
    for (t, line) in lines.into_iter().enumerate() {
        match line? {
            AuditLine::Report(r, ok) => {
                all_ok &= ok;
                println!(
                    "{t:>5}  {:>12.6}  {:>12.6}  {:>12.6}  {:>12.6}  {:>10.3e}  {:>10.3e}  {:>10.3e}  {:>10.4}  {}",
                    db(r.gamma_lb),
                    db(r.gamma_prop),
                    db(r.gamma_opt),
                    db(r.gamma_ub),
                    r.epsilon,
                    r.normalized_gap,
                    r.gap_bound(),
                    r.eta_max,
                    if ok { "yes" } else { "NO" }
                );
            }
            AuditLine::Skipped(eta) => println!("{t:>5}  skipped: eta_max = {eta:.4} is below 1"),
        }
    }
    Ok(all_ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate(args) => simulate(args).map(|_| true),
        Command::GapAudit(args) => gap_audit(args),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: gap bound violated on at least one trial");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
