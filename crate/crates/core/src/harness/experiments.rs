//! Experiment protocols: coupling sweeps, synchronous-group rasters, phase
//! histogram snapshots and single-oscillator runs.

use crate::error::{Error, Result};
use crate::harness::config::NetworkConfig;
use crate::harness::exec::{map_indexed, Execution};
use crate::metrics::{power_spectrum, MetricsFrame, PHASE_BINS};
use crate::model::{DerivedParams, EIParams};
use crate::network::{run_realization, RealizationOutcome};
use crate::processes::{component, simulate_full_model, simulate_polar, simulate_vstar, Path};
use crate::sde::{RngStream, TimeGrid};

/// One realization of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRealization {
    pub n: usize,
    pub coupling_norm: f64,
    /// Per-entry all-to-all strength `‖C‖/(N − 1)`.
    pub strength: f64,
    pub realization: usize,
    pub seed: u64,
    pub rho_bar: f64,
    pub rho_sd: f64,
    pub omega: Vec<f64>,
}

/// Aggregate over realizations at one `(N, ‖C‖)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    pub coupling_norm: f64,
    pub mean_rho_bar: f64,
    /// Sample standard deviation across realizations (0 for one realization).
    pub sd_rho_bar: f64,
    pub realizations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub realizations: Vec<SweepRealization>,
}

impl SweepResult {
    /// Rows for a single network size, in coupling order.
    pub fn curve(&self, n: usize) -> Vec<&SweepRow> {
        self.rows.iter().filter(|r| r.n == n).collect()
    }
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    let sd = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, sd)
}

/// Runs every `(N, ‖C‖, realization)` combination. Jobs are independent and
/// merged in a fixed order, so the result does not depend on `exec`.
pub fn run_sweep(cfg: &NetworkConfig, exec: Execution) -> Result<SweepResult> {
    cfg.validate()?;
    if cfg.coupling_norm_values.is_empty() || cfg.n_values.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut jobs = Vec::new();
    for &n in &cfg.n_values {
        for &norm in &cfg.coupling_norm_values {
            for r in 0..cfg.realizations {
                jobs.push((n, norm, r));
            }
        }
    }
    let outcomes = map_indexed(exec, jobs.len(), |k| {
        let (n, norm, r) = jobs[k];
        let spec = cfg.realization_spec(n, norm, r)?;
        let strength = match spec.coupling.kind {
            crate::network::CouplingKind::AllToAll { strength } => strength,
            crate::network::CouplingKind::Explicit(_) => f64::NAN,
        };
        let out = run_realization(&spec)?;
        Ok(SweepRealization {
            n,
            coupling_norm: norm,
            strength,
            realization: r,
            seed: spec.seed,
            rho_bar: out.rho_bar,
            rho_sd: out.rho_sd,
            omega: out.omega,
        })
    });
    let realizations = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
    let rows = realizations
        .chunks(cfg.realizations)
        .map(|chunk| {
            let values: Vec<f64> = chunk.iter().map(|r| r.rho_bar).collect();
            let (mean, sd) = mean_sd(&values);
            SweepRow {
                n: chunk[0].n,
                coupling_norm: chunk[0].coupling_norm,
                mean_rho_bar: mean,
                sd_rho_bar: sd,
                realizations: chunk.len(),
            }
        })
        .collect();
    Ok(SweepResult { rows, realizations })
}

/// Natural-frequency class of an oscillator, from 20 equal bins spanning
/// `mean ± clip_sds·sd`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrequencyClass {
    /// The two outermost bins on each side.
    Extreme,
    /// The two most populated remaining bins.
    Central,
    Remainder,
}

impl FrequencyClass {
    pub const ALL: [FrequencyClass; 3] = [
        FrequencyClass::Extreme,
        FrequencyClass::Central,
        FrequencyClass::Remainder,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            FrequencyClass::Extreme => "extreme",
            FrequencyClass::Central => "central",
            FrequencyClass::Remainder => "remainder",
        }
    }
}

pub const FREQUENCY_BINS: usize = 20;

pub fn frequency_classes(omega: &[f64], mean: f64, sd: f64, clip_sds: f64) -> Vec<FrequencyClass> {
    let half = sd * clip_sds;
    if !(half > 0.0) {
        return vec![FrequencyClass::Central; omega.len()];
    }
    let lo = mean - half;
    let width = 2.0 * half / FREQUENCY_BINS as f64;
    let bins: Vec<usize> = omega
        .iter()
        .map(|&w| (((w - lo) / width).floor().max(0.0) as usize).min(FREQUENCY_BINS - 1))
        .collect();
    let mut counts = [0usize; FREQUENCY_BINS];
    for &b in &bins {
        counts[b] += 1;
    }
    let extreme = |b: usize| !(2..FREQUENCY_BINS - 2).contains(&b);
    let mut inner: Vec<usize> = (0..FREQUENCY_BINS).filter(|&b| !extreme(b)).collect();
    // most populated first, lowest index on ties
    inner.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
    let central = [inner[0], inner[1]];
    bins.iter()
        .map(|&b| {
            if extreme(b) {
                FrequencyClass::Extreme
            } else if central.contains(&b) {
                FrequencyClass::Central
            } else {
                FrequencyClass::Remainder
            }
        })
        .collect()
}

/// Synchronous-group membership over time with oscillators ranked by
/// natural frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub coupling_norm: f64,
    pub seed: u64,
    pub burn_in: usize,
    pub omega: Vec<f64>,
    /// `order[rank]` is the oscillator with the `rank`-th lowest frequency.
    pub order: Vec<usize>,
    /// Inverse of `order`.
    pub rank: Vec<usize>,
    pub classes: Vec<FrequencyClass>,
    /// One frame per step, including step 0.
    pub frames: Vec<MetricsFrame>,
    pub rho_bar: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowMeans {
    pub group_omega: f64,
    pub population_omega: f64,
    pub group_z: f64,
    pub population_z: f64,
}

impl Raster {
    /// Membership column of `frame` indexed by rank.
    pub fn membership(&self, frame: usize) -> Vec<bool> {
        let mut col = vec![false; self.omega.len()];
        for &i in &self.frames[frame].sync_group {
            col[self.rank[i]] = true;
        }
        col
    }

    /// Average fraction of steps that a member of `class` spends in the
    /// synchronous group; `None` if the class is empty.
    pub fn class_membership_rate(&self, class: FrequencyClass) -> Option<f64> {
        let size = self.classes.iter().filter(|&&c| c == class).count();
        if size == 0 || self.frames.is_empty() {
            return None;
        }
        let hits: usize = self
            .frames
            .iter()
            .map(|f| {
                f.sync_group
                    .iter()
                    .filter(|&&i| self.classes[i] == class)
                    .count()
            })
            .sum();
        Some(hits as f64 / (size * self.frames.len()) as f64)
    }

    /// Group and population means averaged over the post-burn-in frames.
    pub fn window_means(&self) -> WindowMeans {
        let window: Vec<&MetricsFrame> = self
            .frames
            .iter()
            .filter(|f| f.step > self.burn_in)
            .collect();
        let k = window.len() as f64;
        let avg = |g: fn(&MetricsFrame) -> f64| window.iter().map(|f| g(f)).sum::<f64>() / k;
        WindowMeans {
            group_omega: avg(|f| f.group.mean_omega),
            population_omega: avg(|f| f.population.mean_omega),
            group_z: avg(|f| f.group.mean_z),
            population_z: avg(|f| f.population.mean_z),
        }
    }
}

fn recorded_run(cfg: &NetworkConfig, coupling_norm: f64) -> Result<RealizationOutcome> {
    let mut spec = cfg.realization_spec(cfg.n, coupling_norm, 0)?;
    spec.record_frames = true;
    run_realization(&spec)
}

pub fn run_raster(cfg: &NetworkConfig, coupling_norm: f64) -> Result<Raster> {
    cfg.validate()?;
    let out = recorded_run(cfg, coupling_norm)?;
    let mut order: Vec<usize> = (0..out.omega.len()).collect();
    order.sort_by(|&a, &b| out.omega[a].total_cmp(&out.omega[b]).then(a.cmp(&b)));
    let mut rank = vec![0; order.len()];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    Ok(Raster {
        coupling_norm,
        seed: out.seed,
        burn_in: cfg.burn_in,
        classes: frequency_classes(&out.omega, cfg.omega_mean, cfg.omega_sd, cfg.clip_sds),
        omega: out.omega,
        order,
        rank,
        frames: out.frames,
        rho_bar: out.rho_bar,
    })
}

/// Phase histogram averaged over the frames in `[time, time + window)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub window: f64,
    pub frames: usize,
    pub mean_counts: [f64; PHASE_BINS],
}

impl Snapshot {
    pub fn max_count(&self) -> f64 {
        self.mean_counts.iter().copied().fold(f64::MIN, f64::max)
    }

    pub fn min_count(&self) -> f64 {
        self.mean_counts.iter().copied().fold(f64::MAX, f64::min)
    }
}

pub fn run_phase_snapshots(
    cfg: &NetworkConfig,
    coupling_norm: f64,
    times: &[f64],
    window: f64,
) -> Result<Vec<Snapshot>> {
    cfg.validate()?;
    let duration = cfg.n_steps as f64 * cfg.dt;
    if let Some(t) = times.iter().find(|&&t| !(t >= 0.0 && t <= duration)) {
        return Err(Error::OutOfRange(format!(
            "snapshot time {t} outside [0, {duration}]"
        )));
    }
    let out = recorded_run(cfg, coupling_norm)?;
    let span = (window / cfg.dt).round() as usize;
    Ok(times
        .iter()
        .map(|&time| {
            let start = ((time / cfg.dt).round() as usize).min(cfg.n_steps);
            let end = (start + span.max(1)).min(cfg.n_steps + 1);
            let mut mean_counts = [0.0; PHASE_BINS];
            for f in &out.frames[start..end] {
                for (m, &c) in mean_counts.iter_mut().zip(&f.bin_counts) {
                    *m += c as f64;
                }
            }
            let k = (end - start) as f64;
            mean_counts.iter_mut().for_each(|m| *m /= k);
            Snapshot {
                time,
                window,
                frames: end - start,
                mean_counts,
            }
        })
        .collect())
}

/// Full model, `V*` reconstruction and polar form of one Table-1 oscillator.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleRun {
    pub grid: TimeGrid,
    pub derived: DerivedParams,
    pub full: Path<2>,
    pub vstar: Path<2>,
    pub polar: Path<3>,
    pub full_peak_hz: f64,
    pub vstar_peak_hz: f64,
}

pub fn run_single(cfg: &NetworkConfig) -> Result<SingleRun> {
    let params = EIParams::table1();
    let derived = DerivedParams::from_params(&params)?;
    let grid = TimeGrid::new(cfg.dt, cfg.single_steps)?;
    let full = simulate_full_model(
        &params,
        &grid,
        &mut [RngStream::new(cfg.seed, 0), RngStream::new(cfg.seed, 1)],
        [0.0, 0.0],
    )?;
    let vstar = simulate_vstar(
        &derived,
        &grid,
        &mut [RngStream::new(cfg.seed, 2), RngStream::new(cfg.seed, 3)],
        [0.0, 0.0],
    )?;
    let polar = simulate_polar(
        &derived,
        &grid,
        &mut RngStream::new(cfg.seed, 4),
        &mut RngStream::new(cfg.seed, 5),
        std::f64::consts::FRAC_1_SQRT_2,
        0.0,
        &cfg.polar_options(),
    )?;
    let full_peak_hz = power_spectrum(&component(&full, 0), cfg.dt)?.peak_frequency();
    let vstar_peak_hz = power_spectrum(&component(&vstar, 0), cfg.dt)?.peak_frequency();
    Ok(SingleRun {
        grid,
        derived,
        full,
        vstar,
        polar,
        full_peak_hz,
        vstar_peak_hz,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classes_partition() {
        let omega: Vec<f64> = (0..20).map(|k| 434.72 + 0.15 + 0.3 * k as f64).collect();
        let mut omega = omega;
        omega.extend([437.8, 437.8, 437.8, 437.5]);
        let c = frequency_classes(&omega, 437.72, 1.0, 3.0);
        assert_eq!(
            c.iter().filter(|&&x| x == FrequencyClass::Extreme).count(),
            4
        );
        // bin 10 holds 4, bin 9 holds 2
        assert_eq!(
            c.iter().filter(|&&x| x == FrequencyClass::Central).count(),
            6
        );
        assert_eq!(c[0], FrequencyClass::Extreme);
        assert_eq!(c[10], FrequencyClass::Central);
        assert_eq!(c[5], FrequencyClass::Remainder);
    }

    #[test]
    fn classes_degenerate_spread() {
        let c = frequency_classes(&[437.72; 3], 437.72, 0.0, 3.0);
        assert!(c.iter().all(|&x| x == FrequencyClass::Central));
    }

    #[test]
    fn snapshot_outside_run_rejected() {
        let cfg = NetworkConfig {
            n: 4,
            n_steps: 100,
            burn_in: 50,
            ..NetworkConfig::default()
        };
        assert!(matches!(
            run_phase_snapshots(&cfg, 0.0, &[1.0], 0.0),
            Err(Error::OutOfRange(_))
        ));
    }

    #[test]
    fn zero_window_is_single_frame() {
        let cfg = NetworkConfig {
            n: 8,
            n_steps: 200,
            burn_in: 100,
            ..NetworkConfig::default()
        };
        let snaps = run_phase_snapshots(&cfg, 10.0, &[0.0, 0.005, 0.01], 0.0).unwrap();
        for s in &snaps {
            assert_eq!(s.frames, 1);
            assert_eq!(s.mean_counts.iter().sum::<f64>(), 8.0);
            assert!(s.mean_counts.iter().all(|c| c.fract() == 0.0));
        }
    }

    #[test]
    fn sweep_rows_follow_grid_order() {
        let cfg = NetworkConfig {
            n_values: vec![3, 5],
            coupling_norm_values: vec![0.0, 10.0],
            realizations: 2,
            n_steps: 40,
            burn_in: 20,
            ..NetworkConfig::default()
        };
        let res = run_sweep(&cfg, Execution::Sequential).unwrap();
        let keys: Vec<(usize, f64)> = res.rows.iter().map(|r| (r.n, r.coupling_norm)).collect();
        assert_eq!(keys, vec![(3, 0.0), (3, 10.0), (5, 0.0), (5, 10.0)]);
        assert_eq!(res.realizations.len(), 8);
        assert_eq!(res.curve(5).len(), 2);
    }
}
