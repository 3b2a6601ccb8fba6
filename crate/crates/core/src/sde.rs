//! Seeded random streams and the Euler–Maruyama stepping contract.
//!
//! Every noise source in a simulation owns one [`RngStream`], addressed by a
//! `(seed, stream_id)` pair. Streams are ChaCha8 keystreams: the seed keys the
//! cipher, the stream id selects the nonce and the block counter is the step
//! position, so a draw depends only on `(seed, stream_id, position)` and never
//! on thread scheduling.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Any `|state|` above this aborts a realization with
/// [`Error::NumericalDivergence`].
pub const DIVERGENCE_LIMIT: f64 = 1e12;

#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RngStream {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// A draw from `Normal(0, variance)`. Always consumes one normal deviate,
    /// so streams stay aligned even when some variances are zero.
    #[inline]
    pub fn gaussian_increment(&mut self, variance: f64) -> f64 {
        debug_assert!(variance >= 0.0);
        let z = self.standard_normal();
        if variance == 0.0 {
            0.0
        } else {
            variance.sqrt() * z
        }
    }

    /// Uniform on `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }
}

/// SplitMix64 finaliser; used to derive child seeds from a master seed.
pub fn mix_seed(seed: u64, key: u64) -> u64 {
    let mut z = seed ^ key.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform time grid `t_k = t0 + k·dt`, `k = 0..=n_steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub dt: f64,
    pub n_steps: usize,
    pub t0: f64,
}

impl TimeGrid {
    pub fn new(dt: f64, n_steps: usize) -> Result<Self> {
        Self::with_start(dt, n_steps, 0.0)
    }

    pub fn with_start(dt: f64, n_steps: usize, t0: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be > 0, got {dt}")));
        }
        if n_steps == 0 {
            return Err(Error::InvalidParameter("n_steps must be >= 1".into()));
        }
        if !t0.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "t0 must be finite, got {t0}"
            )));
        }
        Ok(TimeGrid { dt, n_steps, t0 })
    }

    #[inline]
    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn duration(&self) -> f64 {
        self.n_steps as f64 * self.dt
    }

    /// The same index grid with time stretched by `factor` (used to sample a
    /// process at `λt`).
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        TimeGrid::with_start(self.dt * factor, self.n_steps, self.t0 * factor)
    }
}

/// `x + drift·dt + noise`, where `noise` already carries its `√variance`.
pub fn euler_maruyama_step(x: &[f64], drift: &[f64], noise: &[f64], dt: f64) -> Result<Vec<f64>> {
    let mut out = x.to_vec();
    euler_maruyama_step_in_place(&mut out, drift, noise, dt)?;
    Ok(out)
}

pub fn euler_maruyama_step_in_place(
    x: &mut [f64],
    drift: &[f64],
    noise: &[f64],
    dt: f64,
) -> Result<()> {
    assert_eq!(x.len(), drift.len(), "drift dimension mismatch");
    assert_eq!(x.len(), noise.len(), "noise dimension mismatch");
    for ((xi, &a), &b) in x.iter_mut().zip(drift).zip(noise) {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::NumericalDivergence {
                step: 0,
                value: a + b,
            });
        }
        *xi += a * dt + b;
        check_state(*xi, 0)?;
    }
    Ok(())
}

/// Finiteness and magnitude gate applied to every state update.
#[inline]
pub fn check_state(value: f64, step: usize) -> Result<()> {
    if value.is_finite() && value.abs() <= DIVERGENCE_LIMIT {
        Ok(())
    } else {
        Err(Error::NumericalDivergence { step, value })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_variance_is_exactly_zero() {
        let mut s = RngStream::new(1, 2);
        for _ in 0..100 {
            assert_eq!(s.gaussian_increment(0.0), 0.0);
        }
    }

    #[test]
    fn zero_variance_still_advances() {
        let mut a = RngStream::new(9, 0);
        let mut b = RngStream::new(9, 0);
        a.gaussian_increment(0.0);
        b.standard_normal();
        assert_eq!(a.standard_normal().to_bits(), b.standard_normal().to_bits());
    }

    #[test]
    fn same_seed_same_sequence() {
        let mut a = RngStream::new(42, 7);
        let mut b = RngStream::new(42, 7);
        for _ in 0..1000 {
            assert_eq!(
                a.gaussian_increment(2.5).to_bits(),
                b.gaussian_increment(2.5).to_bits()
            );
        }
    }

    #[test]
    fn distinct_streams_differ() {
        let mut a = RngStream::new(42, 0);
        let mut b = RngStream::new(42, 1);
        let same = (0..100)
            .filter(|_| a.standard_normal() == b.standard_normal())
            .count();
        assert_eq!(same, 0);
    }

    #[test]
    fn distinct_streams_uncorrelated() {
        let n = 200_000;
        let mut a = RngStream::new(5, 10);
        let mut b = RngStream::new(5, 11);
        let r: f64 = (0..n)
            .map(|_| a.standard_normal() * b.standard_normal())
            .sum::<f64>()
            / n as f64;
        // sd of the product mean is 1/sqrt(n) ~ 0.0022
        assert!(r.abs() < 0.01, "correlation {r}");
    }

    #[test]
    fn gaussian_moments_seed_42() {
        let n = 1_000_000;
        let mut s = RngStream::new(42, 0);
        let draws: Vec<f64> = (0..n).map(|_| s.gaussian_increment(1.0)).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean > -0.004 && mean < 0.004, "mean {mean}");
        assert!(var > 0.995 && var < 1.005, "var {var}");
    }

    #[test]
    fn time_changed_increment_variance() {
        // increments of b(λt) over dt have variance λ·dt
        let (lam, dt, n) = (8.333, 5e-5, 400_000);
        let mut s = RngStream::new(3, 3);
        let var = (0..n)
            .map(|_| s.gaussian_increment(lam * dt).powi(2))
            .sum::<f64>()
            / n as f64;
        assert!(
            (var / (lam * dt) - 1.0).abs() < 0.01,
            "ratio {}",
            var / (lam * dt)
        );
    }

    #[test]
    fn uniform_range() {
        let mut s = RngStream::new(0, 0);
        for _ in 0..10_000 {
            let u = s.uniform();
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn deterministic_euler() {
        let x = euler_maruyama_step(&[1.0], &[-1.0], &[0.0], 0.1).unwrap();
        assert!((x[0] - 0.9).abs() < 1e-15);
        let x = euler_maruyama_step(&[0.0], &[0.0], &[0.5], 0.1).unwrap();
        assert_eq!(x[0], 0.5);
    }

    #[test]
    fn non_finite_input_diverges() {
        assert!(matches!(
            euler_maruyama_step(&[0.0], &[f64::NAN], &[0.0], 0.1),
            Err(Error::NumericalDivergence { .. })
        ));
        assert!(matches!(
            euler_maruyama_step(&[0.0], &[0.0], &[f64::INFINITY], 0.1),
            Err(Error::NumericalDivergence { .. })
        ));
        assert!(matches!(
            euler_maruyama_step(&[1e12], &[0.0], &[1e6], 0.1),
            Err(Error::NumericalDivergence { .. })
        ));
    }

    #[test]
    fn grid_validation() {
        assert!(TimeGrid::new(0.0, 10).is_err());
        assert!(TimeGrid::new(1e-3, 0).is_err());
        let g = TimeGrid::with_start(0.5, 4, 1.0).unwrap();
        assert_eq!(g.time(4), 3.0);
        let s = g.scaled(2.0).unwrap();
        assert_eq!((s.dt, s.t0, s.n_steps), (1.0, 2.0, 4));
    }

    #[test]
    fn mix_seed_spreads() {
        assert_ne!(mix_seed(0, 0), mix_seed(0, 1));
        assert_ne!(mix_seed(0, 1), mix_seed(1, 0));
        assert_eq!(mix_seed(12, 34), mix_seed(12, 34));
    }
}
