//! CSV persistence. Floats are written with 17 significant digits so files
//! are byte-identical for identical runs.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::harness::config::NetworkConfig;
use crate::harness::experiments::{Raster, SingleRun, Snapshot, SweepResult};
use crate::metrics::PHASE_BINS;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes a header and rows. An empty row iterator yields a header-only file.
pub fn write_table<I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| Error::csv(path, e))?;
    w.write_record(header).map_err(|e| Error::csv(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub fn write_config_echo(dir: &Path, cfg: &NetworkConfig) -> Result<PathBuf> {
    let path = dir.join("config.echo");
    write_text(&path, &cfg.echo())?;
    Ok(path)
}

pub fn write_sweep(dir: &Path, sweep: &SweepResult) -> Result<Vec<PathBuf>> {
    let summary = dir.join("sweep.csv");
    write_table(
        &summary,
        &[
            "n",
            "coupling_norm",
            "mean_rho_bar",
            "sd_rho_bar",
            "realizations",
        ],
        sweep.rows.iter().map(|r| {
            vec![
                r.n.to_string(),
                fmt_f64(r.coupling_norm),
                fmt_f64(r.mean_rho_bar),
                fmt_f64(r.sd_rho_bar),
                r.realizations.to_string(),
            ]
        }),
    )?;
    let per_run = dir.join("sweep_realizations.csv");
    write_table(
        &per_run,
        &[
            "n",
            "coupling_norm",
            "strength",
            "realization",
            "seed",
            "rho_bar",
            "rho_sd",
        ],
        sweep.realizations.iter().map(|r| {
            vec![
                r.n.to_string(),
                fmt_f64(r.coupling_norm),
                fmt_f64(r.strength),
                r.realization.to_string(),
                r.seed.to_string(),
                fmt_f64(r.rho_bar),
                fmt_f64(r.rho_sd),
            ]
        }),
    )?;
    let freqs = dir.join("frequencies.csv");
    write_table(
        &freqs,
        &["n", "coupling_norm", "realization", "oscillator", "omega"],
        sweep.realizations.iter().flat_map(|r| {
            r.omega.iter().enumerate().map(move |(i, w)| {
                vec![
                    r.n.to_string(),
                    fmt_f64(r.coupling_norm),
                    r.realization.to_string(),
                    i.to_string(),
                    fmt_f64(*w),
                ]
            })
        }),
    )?;
    Ok(vec![summary, per_run, freqs])
}

/// `raster.csv` lists one row per (step, member) pair, with members
/// identified by frequency rank; `metrics.csv` holds the per-step summary.
pub fn write_raster(dir: &Path, raster: &Raster) -> Result<Vec<PathBuf>> {
    let members = dir.join("raster.csv");
    write_table(
        &members,
        &["step", "rank", "oscillator", "omega", "class"],
        raster.frames.iter().flat_map(|f| {
            let mut ranked: Vec<usize> = f.sync_group.iter().map(|&i| raster.rank[i]).collect();
            ranked.sort_unstable();
            ranked.into_iter().map(move |r| {
                let i = raster.order[r];
                vec![
                    f.step.to_string(),
                    r.to_string(),
                    i.to_string(),
                    fmt_f64(raster.omega[i]),
                    raster.classes[i].as_str().to_string(),
                ]
            })
        }),
    )?;
    let metrics = dir.join("metrics.csv");
    write_table(
        &metrics,
        &[
            "step",
            "t",
            "rho",
            "psi",
            "group_size",
            "group_mean_omega",
            "group_mean_z",
            "group_mean_theta",
            "population_mean_omega",
            "population_mean_z",
            "population_mean_theta",
        ],
        raster.frames.iter().map(|f| {
            vec![
                f.step.to_string(),
                fmt_f64(f.t),
                fmt_f64(f.rho),
                fmt_f64(f.psi),
                f.sync_group.len().to_string(),
                fmt_f64(f.group.mean_omega),
                fmt_f64(f.group.mean_z),
                fmt_f64(f.group.mean_theta),
                fmt_f64(f.population.mean_omega),
                fmt_f64(f.population.mean_z),
                fmt_f64(f.population.mean_theta),
            ]
        }),
    )?;
    Ok(vec![members, metrics])
}

pub fn write_snapshots(dir: &Path, snapshots: &[Snapshot]) -> Result<PathBuf> {
    let path = dir.join("snapshots.csv");
    let bins: Vec<String> = (0..PHASE_BINS).map(|b| format!("bin_{b:02}")).collect();
    let mut header = vec!["time", "window", "frames"];
    header.extend(bins.iter().map(String::as_str));
    write_table(
        &path,
        &header,
        snapshots.iter().map(|s| {
            let mut row = vec![fmt_f64(s.time), fmt_f64(s.window), s.frames.to_string()];
            row.extend(s.mean_counts.iter().map(|&c| fmt_f64(c)));
            row
        }),
    )?;
    Ok(path)
}

pub fn write_single(dir: &Path, run: &SingleRun) -> Result<PathBuf> {
    let path = dir.join("single.csv");
    write_table(
        &path,
        &[
            "t",
            "v_e_full",
            "v_i_full",
            "v_e_vstar",
            "v_i_vstar",
            "z",
            "phi",
            "theta",
        ],
        (0..run.full.len()).map(|k| {
            let (f, v, p) = (&run.full[k], &run.vstar[k], &run.polar[k]);
            vec![
                fmt_f64(f.t),
                fmt_f64(f.values[0]),
                fmt_f64(f.values[1]),
                fmt_f64(v.values[0]),
                fmt_f64(v.values[1]),
                fmt_f64(p.values[0]),
                fmt_f64(p.values[1]),
                fmt_f64(p.values[2]),
            ]
        }),
    )?;
    Ok(path)
}
