//! Single-oscillator simulators.
//!
//! * [`simulate_full_model`]: Euler–Maruyama path of the linear noise model
//!   `dV = −A V dt + N dW`.
//! * [`simulate_ou2d`]: standard two-dimensional Ornstein–Uhlenbeck process
//!   `dS = −S dt + dW`.
//! * [`reconstruct_vstar`]: the rotation approximation
//!   `V*(t) = (σ/√λ) Q R(−ω_d t) S(λt)`.
//! * [`simulate_polar`]: the amplitude / phase-slip pair in real time, the
//!   uncoupled form of the network equations.

use crate::error::{Error, Result};
use crate::model::{DerivedParams, EIParams, Mat2, AMPLITUDE_RESCALE};
use crate::sde::{check_state, RngStream, TimeGrid};

/// Default lower bound for amplitudes after each Euler step.
pub const EPSILON_FLOOR: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSample<const D: usize> {
    pub t: f64,
    pub values: [f64; D],
}

pub type Path<const D: usize> = Vec<PathSample<D>>;

/// One coordinate of a path as a series.
pub fn component<const D: usize>(path: &[PathSample<D>], index: usize) -> Vec<f64> {
    path.iter().map(|s| s.values[index]).collect()
}

/// How the amplitude drift is advanced on the real-time grid.
///
/// The amplitude equation is written for `Z(λt)` while its drift carries
/// `dt`. `RealTime` advances the drift by `dt` and draws noise with variance
/// `λ·dt`; `LambdaScaled` additionally multiplies the amplitude drift by `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DriftScaling {
    #[default]
    RealTime,
    LambdaScaled,
}

impl DriftScaling {
    pub fn as_str(&self) -> &'static str {
        match self {
            DriftScaling::RealTime => "real_time",
            DriftScaling::LambdaScaled => "lambda_scaled",
        }
    }
}

impl std::str::FromStr for DriftScaling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "real_time" => Ok(DriftScaling::RealTime),
            "lambda_scaled" => Ok(DriftScaling::LambdaScaled),
            other => Err(Error::InvalidParameter(format!(
                "unknown drift scaling '{other}' (expected real_time or lambda_scaled)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarOptions {
    /// Divisor applied to `‖Q‖` in the amplitude equation.
    pub amplitude_rescale: f64,
    pub epsilon_floor: f64,
    pub drift_scaling: DriftScaling,
}

impl Default for PolarOptions {
    fn default() -> Self {
        PolarOptions {
            amplitude_rescale: AMPLITUDE_RESCALE,
            epsilon_floor: EPSILON_FLOOR,
            drift_scaling: DriftScaling::RealTime,
        }
    }
}

/// Per-oscillator coefficients of the polar equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarCoefficients {
    pub omega: f64,
    pub lambda: f64,
    /// `(σ/√λ)·(‖Q‖/rescale)`.
    pub amplitude_factor: f64,
}

impl PolarCoefficients {
    pub fn new(omega: f64, lambda: f64, sigma: f64, q_norm: f64, rescale: f64) -> Self {
        PolarCoefficients {
            omega,
            lambda,
            amplitude_factor: sigma / lambda.sqrt() * (q_norm / rescale),
        }
    }

    pub fn from_derived(d: &DerivedParams, rescale: f64) -> Self {
        Self::new(d.omega_d, d.lambda, d.sigma, d.q_norm, rescale)
    }
}

/// Result of one polar Euler–Maruyama update.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PolarUpdate {
    pub z: f64,
    pub theta: f64,
    pub slip: f64,
}

/// One Euler–Maruyama update of `(Z, θ)`, shared by [`simulate_polar`] and
/// the network stepper so that uncoupled runs agree bit for bit.
///
/// `eta` and `xi` are the phase and amplitude increments, each drawn with
/// variance `λ·dt`.
#[inline]
#[allow(clippy::too_many_arguments)]
pub(crate) fn polar_update(
    z: f64,
    theta: f64,
    c: &PolarCoefficients,
    phase_coupling: f64,
    amplitude_coupling: f64,
    eta: f64,
    xi: f64,
    dt: f64,
    opts: &PolarOptions,
    step: usize,
) -> Result<PolarUpdate> {
    let slip = eta / z;
    let theta_next = theta + (-c.omega + phase_coupling) * dt + slip;
    let mut drift = c.amplitude_factor * (0.5 / z - z) + amplitude_coupling;
    if opts.drift_scaling == DriftScaling::LambdaScaled {
        drift *= c.lambda;
    }
    let z_raw = z + drift * dt + c.amplitude_factor * xi;
    check_state(z_raw, step)?;
    check_state(theta_next, step)?;
    Ok(PolarUpdate {
        z: z_raw.max(opts.epsilon_floor),
        theta: theta_next,
        slip,
    })
}

/// Euler–Maruyama path of `dV = −A V dt + N dW`. `streams[0]` drives `W_E`,
/// `streams[1]` drives `W_I`. Returns `n_steps + 1` samples.
pub fn simulate_full_model(
    p: &EIParams,
    grid: &TimeGrid,
    streams: &mut [RngStream; 2],
    v0: [f64; 2],
) -> Result<Path<2>> {
    p.validate()?;
    let neg_a = p.drift_matrix().scale(-1.0);
    let noise = p.noise_matrix();
    let (ne, ni) = (noise.get(0, 0), noise.get(1, 1));
    let dt = grid.dt;

    let mut path = Vec::with_capacity(grid.n_steps + 1);
    let mut v = v0;
    path.push(PathSample {
        t: grid.time(0),
        values: v,
    });
    for k in 1..=grid.n_steps {
        let drift = neg_a.apply(v);
        let dw_e = streams[0].gaussian_increment(dt);
        let dw_i = streams[1].gaussian_increment(dt);
        v = [
            v[0] + drift[0] * dt + ne * dw_e,
            v[1] + drift[1] * dt + ni * dw_i,
        ];
        check_state(v[0], k)?;
        check_state(v[1], k)?;
        path.push(PathSample {
            t: grid.time(k),
            values: v,
        });
    }
    Ok(path)
}

/// Standard 2-D OU path `dS = −S dt + dW` with independent components.
pub fn simulate_ou2d(
    grid: &TimeGrid,
    streams: &mut [RngStream; 2],
    s0: [f64; 2],
) -> Result<Path<2>> {
    ou2d_path(grid, streams, s0, 1.0)
}

fn ou2d_path(
    grid: &TimeGrid,
    streams: &mut [RngStream; 2],
    s0: [f64; 2],
    noise_sd: f64,
) -> Result<Path<2>> {
    let dt = grid.dt;
    let var = noise_sd * noise_sd * dt;
    let mut path = Vec::with_capacity(grid.n_steps + 1);
    let mut s = s0;
    path.push(PathSample {
        t: grid.time(0),
        values: s,
    });
    for k in 1..=grid.n_steps {
        let w1 = streams[0].gaussian_increment(var);
        let w2 = streams[1].gaussian_increment(var);
        s = [s[0] - s[0] * dt + w1, s[1] - s[1] * dt + w2];
        check_state(s[0], k)?;
        check_state(s[1], k)?;
        path.push(PathSample {
            t: grid.time(k),
            values: s,
        });
    }
    Ok(path)
}

/// Applies `V*(t) = (σ/√λ) Q R(−ω_d t) S(λt)` pointwise.
///
/// `ou_path[k]` must be the OU state at scaled time `λ·grid.time(k)`.
pub fn reconstruct_vstar(
    ou_path: &[PathSample<2>],
    d: &DerivedParams,
    grid: &TimeGrid,
) -> Result<Path<2>> {
    if ou_path.len() != grid.n_steps + 1 {
        return Err(Error::GridMismatch(format!(
            "OU path has {} samples, grid expects {}",
            ou_path.len(),
            grid.n_steps + 1
        )));
    }
    let scale = d.sigma / d.lambda.sqrt();
    ou_path
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let t = grid.time(k);
            let expected = d.lambda * t;
            if (s.t - expected).abs() > 1e-9 * expected.abs().max(1.0) {
                return Err(Error::GridMismatch(format!(
                    "sample {k}: OU time {} but λ·t = {expected}",
                    s.t
                )));
            }
            let rotated = Mat2::rotation(-d.omega_d * t).apply(s.values);
            let v = d.q_matrix.apply(rotated);
            Ok(PathSample {
                t,
                values: [scale * v[0], scale * v[1]],
            })
        })
        .collect()
}

/// Simulates the OU process on the `λ`-scaled grid and reconstructs `V*`.
pub fn simulate_vstar(
    d: &DerivedParams,
    grid: &TimeGrid,
    streams: &mut [RngStream; 2],
    s0: [f64; 2],
) -> Result<Path<2>> {
    let scaled = grid.scaled(d.lambda)?;
    let ou = simulate_ou2d(&scaled, streams, s0)?;
    reconstruct_vstar(&ou, d, grid)
}

/// Real-time path of the amplitude `Z`, the accumulated phase slip `φ` and
/// the unwrapped total phase `θ = θ(0) − ω_d t + φ`.
///
/// Values are `[Z, φ, θ]`; `θ(0) = φ0 − ω_d t0`. `phase_stream` drives the
/// slip (`dφ = db(λt)/Z`) and `amplitude_stream` the radial noise.
pub fn simulate_polar(
    d: &DerivedParams,
    grid: &TimeGrid,
    phase_stream: &mut RngStream,
    amplitude_stream: &mut RngStream,
    z0: f64,
    phi0: f64,
    opts: &PolarOptions,
) -> Result<Path<3>> {
    if !(z0 > 0.0 && z0.is_finite()) {
        return Err(Error::InvalidInitial(z0));
    }
    let coef = PolarCoefficients::from_derived(d, opts.amplitude_rescale);
    let dt = grid.dt;
    let noise_var = d.lambda * dt;

    let mut z = z0;
    let mut phi = phi0;
    let mut theta = phi0 - d.omega_d * grid.t0;
    let mut path = Vec::with_capacity(grid.n_steps + 1);
    path.push(PathSample {
        t: grid.time(0),
        values: [z, phi, theta],
    });
    for k in 1..=grid.n_steps {
        let eta = phase_stream.gaussian_increment(noise_var);
        let xi = amplitude_stream.gaussian_increment(noise_var);
        let u = polar_update(z, theta, &coef, 0.0, 0.0, eta, xi, dt, opts, k)?;
        z = u.z;
        theta = u.theta;
        phi += u.slip;
        path.push(PathSample {
            t: grid.time(k),
            values: [z, phi, theta],
        });
    }
    Ok(path)
}
