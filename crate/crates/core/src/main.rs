use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ddf_dmt::manifest::{self, exit_code, summarize, Manifest};
use ddf_dmt::{Error, Result};

/// Tradeoff curves, closed-form verification, Monte Carlo campaigns and
/// codebook experiments for ARQ-DDF protocols.
#[derive(Parser, Debug)]
#[command(name = "ddf-dmt", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment manifest (TOML, or JSON).
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,

    /// Output directory; overrides the manifest.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Built-in curve manifest: fig-mar-ddf or fig-cvma-ddf.
    #[arg(long, global = true)]
    preset: Option<String>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Sample tradeoff curves to CSV.
    Curves,
    /// Check closed forms against the outage optimizer.
    Verify,
    /// Run Monte Carlo campaigns and fit error slopes.
    Simulate,
    /// Run random-codebook decoding experiments.
    Lab,
}

fn load(cli: &Cli) -> Result<Manifest> {
    let m = match (&cli.manifest, &cli.preset) {
        (Some(_), Some(_)) => return Err(Error::config("--preset", "give either --manifest or --preset")),
        (Some(path), None) => Manifest::load(path)?,
        (None, Some(p)) if cli.command == Command::Curves => Manifest::preset(p)?,
        (None, Some(_)) => return Err(Error::config("--preset", "presets exist for `curves` only")),
        (None, None) if cli.command == Command::Verify => Manifest {
            name: "verify".into(),
            seed: 0,
            output_dir: None,
            curves: None,
            verify: None,
            simulate: Vec::new(),
            lab: Vec::new(),
        },
        (None, None) => return Err(Error::config("--manifest", "a manifest or preset is required")),
    };
    Ok(m.with_seed(cli.seed))
}

fn run(cli: &Cli) -> Result<bool> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::config("--threads", "must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::config("--threads", e.to_string()))?;
    }
    let m = load(cli)?;
    let dir = m.resolve_out(cli.out.as_deref());
    match cli.command {
        Command::Curves => {
            for f in manifest::cmd_curves(&m, &dir)? {
                println!("{}", f.display());
            }
            Ok(true)
        }
        Command::Verify => {
            let (report, path) = manifest::cmd_verify(&m, &dir)?;
            for d in summarize(&report) {
                let status = if d.failed == 0 { "PASS" } else { "FAIL" };
                println!(
                    "{status} {:<10} {:<11} {:>3} points  max |diff| {:.3e} at r = {:.6}  ({} over {:.0e})",
                    d.curve_id, d.route, d.checked, d.max_error, d.worst_r, d.failed, report.tolerance
                );
            }
            println!("{} breakpoint-adjacent points excluded; report in {}", report.excluded, path.display());
            Ok(report.pass())
        }
        Command::Simulate => {
            let out = manifest::cmd_simulate(&m, &dir)?;
            for s in &out.slopes {
                let target = s.analytic_d.map_or("n/a".to_string(), |d| format!("{d:.4}"));
                println!(
                    "{} L={} r1={}: slope {:.4} +/- {:.4} (analytic d = {target})",
                    s.scenario, s.l, s.r1, s.slope, s.ci95
                );
            }
            for f in &out.files {
                println!("{}", f.display());
            }
            Ok(true)
        }
        Command::Lab => {
            let (results, path) = manifest::cmd_lab(&m, &dir)?;
            let mut clean = true;
            for r in &results {
                let c = &r.counts;
                println!(
                    "{} T={} M={} {} dB: undetected {:.3e}, final error {:.3e}, sphere violations {}, noise-norm violations {}",
                    r.config.scenario.name(),
                    r.config.t,
                    r.config.m,
                    r.config.snr_db,
                    r.undetected_rate,
                    r.final_error_rate,
                    c.sphere_violations,
                    c.noise_violations
                );
                clean &= c.sphere_violations == 0 && c.noise_violations == 0;
            }
            println!("{}", path.display());
            Ok(clean)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
