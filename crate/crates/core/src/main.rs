use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use quasicycle::harness::experiments::FrequencyClass;
use quasicycle::harness::{output, svg, validate, Execution, NetworkConfig};
use quasicycle::harness::{run_phase_snapshots, run_raster, run_single, run_sweep};

#[derive(Parser, Debug)]
#[command(
    name = "quasicycle",
    version,
    about = "Coupled quasi-cycle oscillator experiments"
)]
struct Cli {
    /// Key-value config file; every key is optional.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads for realization-level parallelism (1 = sequential).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// PLI against coupling norm for every configured network size.
    Sweep,
    /// Synchronous-group membership over time at one coupling norm.
    Raster {
        #[arg(long)]
        coupling_norm: Option<f64>,
    },
    /// Phase histograms at the configured snapshot times.
    Snapshots {
        #[arg(long)]
        coupling_norm: Option<f64>,
        /// Averaging window in seconds.
        #[arg(long)]
        window: Option<f64>,
    },
    /// One uncoupled oscillator: full model, reconstruction and polar form.
    Single,
    /// Quick invariant checks.
    Validate,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let mut cfg = match &cli.config {
        Some(path) => {
            NetworkConfig::load(path).with_context(|| format!("loading {}", path.display()))?
        }
        None => NetworkConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let exec = match cli.threads {
        Some(0) => bail!("--threads must be at least 1"),
        Some(1) => Execution::Sequential,
        Some(k) => {
            if !quasicycle::harness::exec::init_threads(k) {
                eprintln!("warning: could not configure {k} worker threads");
            }
            Execution::Parallel
        }
        None => Execution::default(),
    };

    output::ensure_dir(&cli.out)?;
    output::write_config_echo(&cli.out, &cfg)?;
    let started = Instant::now();

    match cli.command {
        Command::Sweep => {
            let sweep = run_sweep(&cfg, exec)?;
            output::write_sweep(&cli.out, &sweep)?;
            output::write_text(&cli.out.join("sweep.svg"), &svg::sweep_svg(&sweep))?;
            for row in &sweep.rows {
                println!(
                    "N={:<4} ||C||={:<12.4} rho_bar={:.4} (sd {:.4})",
                    row.n, row.coupling_norm, row.mean_rho_bar, row.sd_rho_bar
                );
            }
        }
        Command::Raster { coupling_norm } => {
            let norm = coupling_norm.unwrap_or(cfg.coupling_norm);
            let raster = run_raster(&cfg, norm)?;
            output::write_raster(&cli.out, &raster)?;
            let m = raster.window_means();
            println!("rho_bar = {:.4}", raster.rho_bar);
            println!(
                "group mean omega {:.4} vs population {:.4}",
                m.group_omega, m.population_omega
            );
            println!(
                "group mean Z {:.4} vs population {:.4}",
                m.group_z, m.population_z
            );
            for class in FrequencyClass::ALL {
                if let Some(rate) = raster.class_membership_rate(class) {
                    println!(
                        "{:<9} in group {:.1}% of steps",
                        class.as_str(),
                        100.0 * rate
                    );
                }
            }
        }
        Command::Snapshots {
            coupling_norm,
            window,
        } => {
            let norm = coupling_norm.unwrap_or(cfg.coupling_norm);
            let snaps = run_phase_snapshots(
                &cfg,
                norm,
                &cfg.snapshot_times,
                window.unwrap_or(cfg.snapshot_window),
            )?;
            output::write_snapshots(&cli.out, &snaps)?;
            for s in &snaps {
                println!(
                    "t={:.4}s max bin {:.1} min bin {:.1}",
                    s.time,
                    s.max_count(),
                    s.min_count()
                );
            }
        }
        Command::Single => {
            let run = run_single(&cfg)?;
            output::write_single(&cli.out, &run)?;
            println!(
                "spectral peak: full model {:.2} Hz, reconstruction {:.2} Hz (expected {:.2} Hz)",
                run.full_peak_hz,
                run.vstar_peak_hz,
                run.derived.frequency_hz()
            );
        }
        Command::Validate => {
            let checks = validate::run_validation(&cfg)?;
            let failed = checks.iter().filter(|c| !c.passed).count();
            for c in &checks {
                println!(
                    "{} {:<24} {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
            }
            if failed > 0 {
                bail!("{failed} check(s) failed");
            }
        }
    }

    // wall-clock goes here rather than into the CSVs, which must stay byte-stable
    let provenance = format!(
        "version = {}\nseed = {}\nexecution = {}\nrng = ChaCha8 (seed, stream id)\nelapsed_seconds = {:.3}\n",
        env!("CARGO_PKG_VERSION"),
        cfg.seed,
        exec.as_str(),
        started.elapsed().as_secs_f64()
    );
    output::write_text(&cli.out.join("provenance.txt"), &provenance)?;
    eprintln!("wrote results to {}", cli.out.display());
    Ok(())
}
