//! Synchronisation and spectral measurements.

use std::f64::consts::PI;

use rustfft::{num_complex::Complex64, FftPlanner};

use crate::error::{Error, Result};
use crate::network::NetworkState;

/// Number of equal phase bins on `[−π, π)`.
pub const PHASE_BINS: usize = 20;

/// Welch segment length in samples.
pub const SPECTRUM_SEGMENT: usize = 8192;

/// Shortest series accepted by [`power_spectrum`].
pub const SPECTRUM_MIN_LEN: usize = 256;

/// Wraps an angle into `[−π, π)`.
#[inline]
pub fn wrap_phase(theta: f64) -> f64 {
    let w = theta - 2.0 * PI * ((theta + PI) / (2.0 * PI)).floor();
    // rounding can land exactly on +π
    if w >= PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/// Bin index of a phase; bin `k` covers `[−π + kπ/10, −π + (k+1)π/10)`.
#[inline]
pub fn phase_bin(theta: f64) -> usize {
    let w = wrap_phase(theta);
    let k = ((w + PI) / (2.0 * PI / PHASE_BINS as f64)).floor() as usize;
    k.min(PHASE_BINS - 1)
}

/// Resultant `Σ e^{iθ_j}` as `(re, im)`.
fn resultant(theta: &[f64]) -> (f64, f64) {
    theta.iter().fold((0.0, 0.0), |(re, im), &t| {
        let (s, c) = t.sin_cos();
        (re + c, im + s)
    })
}

/// Phase-locking index and mean phase: `ρ e^{iψ} = (1/N) Σ e^{iθ_j}`.
///
/// `ψ` is 0 when the resultant vanishes.
pub fn pli(theta: &[f64]) -> Result<(f64, f64)> {
    if theta.is_empty() {
        return Err(Error::EmptyInput);
    }
    let (re, im) = resultant(theta);
    let n = theta.len() as f64;
    let rho = (re.hypot(im) / n).min(1.0);
    Ok((rho, resultant_angle(re, im)))
}

/// Argument of a resultant in `(−π, π]`, 0 for the zero vector.
fn resultant_angle(re: f64, im: f64) -> f64 {
    if re == 0.0 && im == 0.0 {
        return 0.0;
    }
    let a = im.atan2(re);
    if a <= -PI {
        a + 2.0 * PI
    } else {
        a
    }
}

/// Circular mean, i.e. the argument of the resultant.
pub fn circular_mean(theta: &[f64]) -> Result<f64> {
    pli(theta).map(|(_, psi)| psi)
}

pub fn phase_histogram(theta: &[f64]) -> [usize; PHASE_BINS] {
    let mut counts = [0usize; PHASE_BINS];
    for &t in theta {
        counts[phase_bin(t)] += 1;
    }
    counts
}

/// Index of the most populated bin, lowest index on ties.
pub fn modal_bin(counts: &[usize; PHASE_BINS]) -> usize {
    let mut best = 0;
    for (k, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = k;
        }
    }
    best
}

/// Indices (ascending) of the oscillators in the most populated phase bin.
pub fn synchronous_group(theta: &[f64]) -> Vec<usize> {
    if theta.is_empty() {
        return Vec::new();
    }
    let bins: Vec<usize> = theta.iter().map(|&t| phase_bin(t)).collect();
    let mut counts = [0usize; PHASE_BINS];
    for &b in &bins {
        counts[b] += 1;
    }
    let best = modal_bin(&counts);
    bins.iter()
        .enumerate()
        .filter(|&(_, &b)| b == best)
        .map(|(i, _)| i)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupStats {
    pub mean_omega: f64,
    pub mean_z: f64,
    /// Circular mean.
    pub mean_theta: f64,
}

/// Means of natural frequency and amplitude and circular mean phase over
/// `group`.
pub fn group_stats(group: &[usize], state: &NetworkState) -> Result<GroupStats> {
    if group.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = group.len() as f64;
    let mean_omega = group.iter().map(|&i| state.omega[i]).sum::<f64>() / n;
    let mean_z = group.iter().map(|&i| state.z[i]).sum::<f64>() / n;
    let phases: Vec<f64> = group.iter().map(|&i| state.theta[i]).collect();
    Ok(GroupStats {
        mean_omega,
        mean_z,
        mean_theta: circular_mean(&phases)?,
    })
}

/// Per-step synchronisation summary of a network.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsFrame {
    pub step: usize,
    pub t: f64,
    pub rho: f64,
    pub psi: f64,
    pub bin_counts: [usize; PHASE_BINS],
    pub sync_group: Vec<usize>,
    pub group: GroupStats,
    pub population: GroupStats,
}

impl MetricsFrame {
    pub fn compute(step: usize, t: f64, state: &NetworkState) -> Result<Self> {
        let (rho, psi) = pli(&state.theta)?;
        let bin_counts = phase_histogram(&state.theta);
        let sync_group = synchronous_group(&state.theta);
        let group = group_stats(&sync_group, state)?;
        let n = state.len() as f64;
        let population = GroupStats {
            mean_omega: state.omega.iter().sum::<f64>() / n,
            mean_z: state.z.iter().sum::<f64>() / n,
            mean_theta: psi,
        };
        Ok(MetricsFrame {
            step,
            t,
            rho,
            psi,
            bin_counts,
            sync_group,
            group,
            population,
        })
    }
}

/// One-sided power spectral density.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Hz.
    pub frequencies: Vec<f64>,
    /// Power per Hz.
    pub power: Vec<f64>,
}

impl Spectrum {
    /// Frequency of the largest power, excluding DC.
    pub fn peak_frequency(&self) -> f64 {
        let (k, _) = self.power.iter().enumerate().skip(1).fold(
            (1, f64::NEG_INFINITY),
            |(bk, bp), (k, &p)| {
                if p > bp {
                    (k, p)
                } else {
                    (bk, bp)
                }
            },
        );
        self.frequencies[k]
    }

    pub fn resolution(&self) -> f64 {
        self.frequencies.get(1).copied().unwrap_or(0.0)
    }

    /// `∫ P df` over the one-sided grid.
    pub fn total_power(&self) -> f64 {
        self.power.iter().sum::<f64>() * self.resolution()
    }
}

/// Welch averaged periodogram: Hann-tapered, mean-removed segments of
/// [`SPECTRUM_SEGMENT`] samples (or the largest power of two that fits) with
/// 50% overlap.
pub fn power_spectrum(series: &[f64], dt: f64) -> Result<Spectrum> {
    if series.len() < SPECTRUM_MIN_LEN {
        return Err(Error::InsufficientData {
            needed: SPECTRUM_MIN_LEN,
            got: series.len(),
        });
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("dt must be > 0, got {dt}")));
    }
    let seg = SPECTRUM_SEGMENT.min(prev_power_of_two(series.len()));
    let hop = seg / 2;
    let window: Vec<f64> = (0..seg)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / seg as f64).cos())
        .collect();
    let window_power: f64 = window.iter().map(|w| w * w).sum();

    let fft = FftPlanner::new().plan_fft_forward(seg);
    let n_bins = seg / 2 + 1;
    let mut acc = vec![0.0; n_bins];
    let mut buf = vec![Complex64::new(0.0, 0.0); seg];
    let mut segments = 0usize;
    let mut start = 0;
    while start + seg <= series.len() {
        let chunk = &series[start..start + seg];
        let mean = chunk.iter().sum::<f64>() / seg as f64;
        for ((b, &x), &w) in buf.iter_mut().zip(chunk).zip(&window) {
            *b = Complex64::new((x - mean) * w, 0.0);
        }
        fft.process(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
        segments += 1;
        start += hop;
    }

    let norm = dt / (window_power * segments as f64);
    let power = acc
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            let one_sided = if k == 0 || k == seg / 2 { 1.0 } else { 2.0 };
            p * norm * one_sided
        })
        .collect();
    let df = 1.0 / (seg as f64 * dt);
    Ok(Spectrum {
        frequencies: (0..n_bins).map(|k| k as f64 * df).collect(),
        power,
    })
}

fn prev_power_of_two(n: usize) -> usize {
    1 << (usize::BITS - 1 - n.leading_zeros())
}
