//! Networks of Kuramoto-coupled quasi-cycle oscillators.
//!
//! Each oscillator carries an amplitude `Z_i` and an unwrapped phase `θ_i`.
//! One Euler–Maruyama step advances
//!
//! ```text
//! dθ_i = [−ω_i + (1/2N) Σ_j (Z_j/Z_i) C_ij sin(θ_j − θ_i)] dt + db_i(λ_i t)/Z_i
//! dZ_i = F_i (1/(2Z_i) − Z_i) dt + (1/2N) Σ_j C_ij g(Z_j, Z_i, θ_j, θ_i) dt + F_i dW_i(λ_i t)
//! ```
//!
//! with `F_i = (σ_i/√λ_i)(‖Q_i‖/rescale)` and the time-changed increments
//! drawn as `Normal(0, λ_i dt)`. `g` is the amplitude coupling variant.

use std::f64::consts::PI;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::metrics::{pli, MetricsFrame};
use crate::model::{
    canonical_transform, solve_sii_for_frequency, DAMPING_PER_SII, NETWORK_BASE, SIGMA_NUMERATOR,
};
use crate::processes::{polar_update, PolarCoefficients, PolarOptions};
use crate::sde::{RngStream, TimeGrid, DIVERGENCE_LIMIT};

/// Stream id of the phase noise `b_i` for oscillator `i` is `2i`, the
/// amplitude noise `W_i` is `2i + 1`.
pub fn noise_stream_id(oscillator: usize, amplitude: bool) -> u64 {
    2 * oscillator as u64 + amplitude as u64
}

/// Stream used to sample natural frequencies.
pub const FREQUENCY_STREAM: u64 = u64::MAX;
/// Stream used to draw initial phases and amplitudes.
pub const INITIAL_STREAM: u64 = u64::MAX - 1;

/// Default amplitude threshold for explosion experiments.
pub const EXPLOSION_THRESHOLD: f64 = 1e3;

/// Form of the amplitude interaction `g(Z_j, Z_i, θ_j, θ_i)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AmplitudeCoupling {
    /// `Z_j − Z_i`
    #[default]
    Difference,
    /// `Z_j / Z_i`
    Ratio,
    /// `Z_j`
    OtherOnly,
    /// `Z_j cos(θ_j − θ_i)`
    CosineFactor,
    None,
}

impl AmplitudeCoupling {
    pub const ALL: [AmplitudeCoupling; 5] = [
        AmplitudeCoupling::Difference,
        AmplitudeCoupling::Ratio,
        AmplitudeCoupling::OtherOnly,
        AmplitudeCoupling::CosineFactor,
        AmplitudeCoupling::None,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            AmplitudeCoupling::Difference => "difference",
            AmplitudeCoupling::Ratio => "ratio",
            AmplitudeCoupling::OtherOnly => "other_only",
            AmplitudeCoupling::CosineFactor => "cosine_factor",
            AmplitudeCoupling::None => "none",
        }
    }

    #[inline]
    fn pair(&self, zj: f64, zi: f64, dtheta: f64) -> f64 {
        match self {
            AmplitudeCoupling::Difference => zj - zi,
            AmplitudeCoupling::Ratio => zj / zi,
            AmplitudeCoupling::OtherOnly => zj,
            AmplitudeCoupling::CosineFactor => zj * dtheta.cos(),
            AmplitudeCoupling::None => 0.0,
        }
    }
}

impl FromStr for AmplitudeCoupling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AmplitudeCoupling::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown amplitude variant '{s}'")))
    }
}

/// Dense `N × N` coupling matrix with `C_ii = 0` and `C_ij ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl CouplingMatrix {
    /// `entries` is row-major.
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::InvalidParameter(format!(
                "coupling matrix needs {} entries, got {}",
                n * n,
                entries.len()
            )));
        }
        for i in 0..n {
            for j in 0..n {
                let c = entries[i * n + j];
                if i == j && c != 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "C[{i}][{i}] = {c}, must be 0"
                    )));
                }
                if !(c >= 0.0 && c.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "C[{i}][{j}] = {c}, must be >= 0"
                    )));
                }
            }
        }
        Ok(CouplingMatrix { n, entries })
    }

    /// `strength · (ones − identity)`.
    pub fn all_to_all(n: usize, strength: f64) -> Result<Self> {
        let entries = (0..n * n)
            .map(|k| if k / n == k % n { 0.0 } else { strength })
            .collect();
        Self::new(n, entries)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Every entry multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.n, self.entries.iter().map(|c| c * factor).collect())
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    /// Spectral norm by power iteration on `CᵀC`.
    pub fn norm2(&self) -> f64 {
        let n = self.n;
        if n == 0 {
            return 0.0;
        }
        let mut v = vec![1.0 / (n as f64).sqrt(); n];
        let mut w = vec![0.0; n];
        let mut u = vec![0.0; n];
        let mut estimate = 0.0;
        for _ in 0..1000 {
            for i in 0..n {
                w[i] = (0..n).map(|j| self.get(i, j) * v[j]).sum();
            }
            for j in 0..n {
                u[j] = (0..n).map(|i| self.get(i, j) * w[i]).sum();
            }
            let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                return 0.0;
            }
            for (vj, uj) in v.iter_mut().zip(&u) {
                *vj = uj / norm;
            }
            let next = norm.sqrt();
            if (next - estimate).abs() <= 1e-14 * next {
                return next;
            }
            estimate = next;
        }
        estimate
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CouplingKind {
    /// Every off-diagonal entry equals `strength`; `‖C‖ = strength·(N − 1)`.
    AllToAll {
        strength: f64,
    },
    Explicit(CouplingMatrix),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSpec {
    pub kind: CouplingKind,
    /// Include `Z_j/Z_i` in the phase coupling.
    pub ratio_factor: bool,
    pub amplitude: AmplitudeCoupling,
}

impl CouplingSpec {
    pub fn all_to_all(strength: f64) -> Self {
        CouplingSpec {
            kind: CouplingKind::AllToAll { strength },
            ratio_factor: true,
            amplitude: AmplitudeCoupling::Difference,
        }
    }

    /// All-to-all coupling whose 2-norm is `norm` for `n` oscillators.
    pub fn all_to_all_with_norm(norm: f64, n: usize) -> Self {
        let strength = if n > 1 { norm / (n - 1) as f64 } else { 0.0 };
        Self::all_to_all(strength)
    }

    pub fn uncoupled() -> Self {
        Self::all_to_all(0.0)
    }

    pub fn with_amplitude(mut self, amplitude: AmplitudeCoupling) -> Self {
        self.amplitude = amplitude;
        self
    }

    pub fn with_ratio_factor(mut self, ratio_factor: bool) -> Self {
        self.ratio_factor = ratio_factor;
        self
    }

    /// `‖C‖` for a network of `n` oscillators.
    pub fn norm(&self, n: usize) -> f64 {
        match &self.kind {
            CouplingKind::AllToAll { strength } => strength * n.saturating_sub(1) as f64,
            CouplingKind::Explicit(m) => m.norm2(),
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        match &self.kind {
            CouplingKind::AllToAll { strength } if !(*strength >= 0.0 && strength.is_finite()) => {
                Err(Error::InvalidParameter(format!(
                    "coupling strength must be >= 0, got {strength}"
                )))
            }
            CouplingKind::Explicit(m) if m.n() != n => Err(Error::InvalidParameter(format!(
                "coupling matrix is {0}x{0} but the network has {n} oscillators",
                m.n()
            ))),
            _ => Ok(()),
        }
    }

    fn is_zero(&self) -> bool {
        match &self.kind {
            CouplingKind::AllToAll { strength } => *strength == 0.0,
            CouplingKind::Explicit(m) => m.entries.iter().all(|&c| c == 0.0),
        }
    }
}

/// Instantaneous state of every oscillator plus its fixed coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState {
    pub z: Vec<f64>,
    /// Unwrapped phases.
    pub theta: Vec<f64>,
    /// Natural frequencies, rad/s.
    pub omega: Vec<f64>,
    /// Damping rates, 1/s.
    pub lam: Vec<f64>,
    /// Noise scalars.
    pub sig: Vec<f64>,
    /// `‖Q_i‖` before rescaling.
    pub qnorm: Vec<f64>,
}

impl NetworkState {
    /// State with coefficients derived from the natural frequencies.
    pub fn from_frequencies(omega: Vec<f64>, z: Vec<f64>, theta: Vec<f64>) -> Result<Self> {
        let derived = derive_per_oscillator(&omega)?;
        let state = NetworkState {
            z,
            theta,
            omega,
            lam: derived.lam,
            sig: derived.sig,
            qnorm: derived.qnorm,
        };
        state.validate()?;
        Ok(state)
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.z.len();
        if n == 0 {
            return Err(Error::EmptyInput);
        }
        let lens = [
            self.theta.len(),
            self.omega.len(),
            self.lam.len(),
            self.sig.len(),
            self.qnorm.len(),
        ];
        if lens.iter().any(|&l| l != n) {
            return Err(Error::InvalidParameter(format!(
                "state vectors have mismatched lengths: z={n}, others={lens:?}"
            )));
        }
        if let Some(z) = self.z.iter().find(|z| !(**z > 0.0 && z.is_finite())) {
            return Err(Error::InvalidInitial(*z));
        }
        if let Some(l) = self.lam.iter().find(|l| !(**l > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "damping rate must be > 0, got {l}"
            )));
        }
        Ok(())
    }

    fn coefficients(&self, rescale: f64) -> Vec<PolarCoefficients> {
        (0..self.len())
            .map(|i| {
                PolarCoefficients::new(
                    self.omega[i],
                    self.lam[i],
                    self.sig[i],
                    self.qnorm[i],
                    rescale,
                )
            })
            .collect()
    }
}

/// Per-oscillator `λ_i`, `σ_i` and `‖Q_i‖`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerOscillator {
    pub lam: Vec<f64>,
    pub sig: Vec<f64>,
    pub qnorm: Vec<f64>,
}

/// Coefficients for each natural frequency, attributing all frequency
/// variation to `S_II`: `λ = (250/3)·S_II(ω)`, `σ = 2998.38/ω`, and `‖Q‖`
/// from the canonical transform at that `S_II`.
pub fn derive_per_oscillator(omega: &[f64]) -> Result<PerOscillator> {
    let mut out = PerOscillator {
        lam: Vec::with_capacity(omega.len()),
        sig: Vec::with_capacity(omega.len()),
        qnorm: Vec::with_capacity(omega.len()),
    };
    for &w in omega {
        let s_ii = solve_sii_for_frequency(w)?;
        let q = canonical_transform(&NETWORK_BASE.with_s_ii(s_ii)?)?;
        out.lam.push(DAMPING_PER_SII * s_ii);
        out.sig.push(SIGMA_NUMERATOR / w);
        out.qnorm.push(q.norm2());
    }
    Ok(out)
}

/// `n` draws from `Normal(mean, sd²)`, each redrawn until it lies within
/// `mean ± clip_sds·sd`.
pub fn sample_natural_frequencies(
    n: usize,
    mean: f64,
    sd: f64,
    clip_sds: f64,
    stream: &mut RngStream,
) -> Vec<f64> {
    if sd == 0.0 || clip_sds <= 0.0 {
        return vec![mean; n];
    }
    (0..n)
        .map(|_| loop {
            let z = stream.standard_normal();
            if z.abs() <= clip_sds {
                break mean + sd * z;
            }
        })
        .collect()
}

/// Phase and amplitude noise streams for each oscillator.
#[derive(Debug, Clone)]
pub struct NetworkStreams {
    pub phase: Vec<RngStream>,
    pub amplitude: Vec<RngStream>,
}

impl NetworkStreams {
    pub fn new(seed: u64, n: usize) -> Self {
        NetworkStreams {
            phase: (0..n)
                .map(|i| RngStream::new(seed, noise_stream_id(i, false)))
                .collect(),
            amplitude: (0..n)
                .map(|i| RngStream::new(seed, noise_stream_id(i, true)))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOptions {
    pub dt: f64,
    pub polar: PolarOptions,
}

impl StepOptions {
    pub fn new(dt: f64) -> Self {
        StepOptions {
            dt,
            polar: PolarOptions::default(),
        }
    }
}

/// A network with its coupling, noise streams and scratch space.
#[derive(Debug, Clone)]
pub struct Network {
    state: NetworkState,
    coupling: CouplingSpec,
    opts: StepOptions,
    streams: NetworkStreams,
    coefs: Vec<PolarCoefficients>,
    sin: Vec<f64>,
    cos: Vec<f64>,
    phase_drive: Vec<f64>,
    amplitude_drive: Vec<f64>,
    steps: usize,
}

impl Network {
    pub fn new(
        state: NetworkState,
        coupling: CouplingSpec,
        opts: StepOptions,
        streams: NetworkStreams,
    ) -> Result<Self> {
        state.validate()?;
        coupling.validate(state.len())?;
        if !(opts.dt > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "dt must be > 0, got {}",
                opts.dt
            )));
        }
        let n = state.len();
        if streams.phase.len() != n || streams.amplitude.len() != n {
            return Err(Error::InvalidParameter(
                "one phase and one amplitude stream per oscillator".into(),
            ));
        }
        let coefs = state.coefficients(opts.polar.amplitude_rescale);
        Ok(Network {
            state,
            coupling,
            opts,
            streams,
            coefs,
            sin: vec![0.0; n],
            cos: vec![0.0; n],
            phase_drive: vec![0.0; n],
            amplitude_drive: vec![0.0; n],
            steps: 0,
        })
    }

    pub fn state(&self) -> &NetworkState {
        &self.state
    }

    pub fn into_state(self) -> NetworkState {
        self.state
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn coupling(&self) -> &CouplingSpec {
        &self.coupling
    }

    /// One Euler–Maruyama step of every oscillator.
    pub fn step(&mut self) -> Result<()> {
        self.compute_coupling();
        let dt = self.opts.dt;
        let step = self.steps + 1;
        let s = &mut self.state;
        for i in 0..s.len() {
            let c = &self.coefs[i];
            let var = c.lambda * dt;
            let eta = self.streams.phase[i].gaussian_increment(var);
            let xi = self.streams.amplitude[i].gaussian_increment(var);
            let u = polar_update(
                s.z[i],
                s.theta[i],
                c,
                self.phase_drive[i],
                self.amplitude_drive[i],
                eta,
                xi,
                dt,
                &self.opts.polar,
                step,
            )?;
            s.z[i] = u.z;
            s.theta[i] = u.theta;
        }
        self.steps = step;
        Ok(())
    }

    /// Fills `phase_drive` and `amplitude_drive` with the coupling drifts,
    /// already divided by `2N`, evaluated at the current state.
    fn compute_coupling(&mut self) {
        let n = self.state.len();
        if self.coupling.is_zero() {
            self.phase_drive.fill(0.0);
            self.amplitude_drive.fill(0.0);
            return;
        }
        let z = &self.state.z;
        for (i, &t) in self.state.theta.iter().enumerate() {
            let (s, c) = t.sin_cos();
            self.sin[i] = s;
            self.cos[i] = c;
        }
        let norm = 1.0 / (2.0 * n as f64);
        let ratio = self.coupling.ratio_factor;
        let variant = self.coupling.amplitude;
        match &self.coupling.kind {
            CouplingKind::AllToAll { strength } => {
                // Leave-one-out resultants; the self term is removed exactly so
                // a single oscillator sees zero coupling.
                let (mut sz, mut x, mut y, mut x1, mut y1) = (0.0, 0.0, 0.0, 0.0, 0.0);
                for i in 0..n {
                    sz += z[i];
                    x += z[i] * self.cos[i];
                    y += z[i] * self.sin[i];
                    x1 += self.cos[i];
                    y1 += self.sin[i];
                }
                let k = strength * norm;
                for i in 0..n {
                    let (si, ci, zi) = (self.sin[i], self.cos[i], z[i]);
                    let xo = x - zi * ci;
                    let yo = y - zi * si;
                    let szo = sz - zi;
                    self.phase_drive[i] = k * if ratio {
                        (yo * ci - xo * si) / zi
                    } else {
                        (y1 - si) * ci - (x1 - ci) * si
                    };
                    self.amplitude_drive[i] = k * match variant {
                        AmplitudeCoupling::Difference => szo - (n - 1) as f64 * zi,
                        AmplitudeCoupling::Ratio => szo / zi,
                        AmplitudeCoupling::OtherOnly => szo,
                        AmplitudeCoupling::CosineFactor => xo * ci + yo * si,
                        AmplitudeCoupling::None => 0.0,
                    };
                }
            }
            CouplingKind::Explicit(m) => {
                let theta = &self.state.theta;
                for i in 0..n {
                    let (mut phase, mut amp) = (0.0, 0.0);
                    for j in 0..n {
                        let cij = m.get(i, j);
                        if cij == 0.0 {
                            continue;
                        }
                        // sin(θj − θi) from cached sines and cosines
                        let sin_d = self.sin[j] * self.cos[i] - self.cos[j] * self.sin[i];
                        let weight = if ratio { z[j] / z[i] } else { 1.0 };
                        phase += cij * weight * sin_d;
                        amp += cij * variant.pair(z[j], z[i], theta[j] - theta[i]);
                    }
                    self.phase_drive[i] = norm * phase;
                    self.amplitude_drive[i] = norm * amp;
                }
            }
        }
    }
}

/// One Euler–Maruyama step of `state` in place.
pub fn step_network(
    state: &mut NetworkState,
    coupling: &CouplingSpec,
    opts: &StepOptions,
    streams: &mut NetworkStreams,
) -> Result<()> {
    let mut net = Network::new(
        std::mem::replace(state, empty_state()),
        coupling.clone(),
        *opts,
        std::mem::replace(
            streams,
            NetworkStreams {
                phase: vec![],
                amplitude: vec![],
            },
        ),
    )?;
    let result = net.step();
    *streams = std::mem::replace(
        &mut net.streams,
        NetworkStreams {
            phase: vec![],
            amplitude: vec![],
        },
    );
    *state = net.into_state();
    result
}

fn empty_state() -> NetworkState {
    NetworkState {
        z: vec![],
        theta: vec![],
        omega: vec![],
        lam: vec![],
        sig: vec![],
        qnorm: vec![],
    }
}

/// Mean-field Kuramoto baseline:
/// `dθ_j = [ω_j + (K/N) Σ_k sin(θ_k − θ_j)] dt + noise_sd·dW_j`.
pub fn step_classic_kuramoto(
    theta: &mut [f64],
    omega: &[f64],
    k: f64,
    dt: f64,
    streams: &mut [RngStream],
    noise_sd: f64,
) {
    let n = theta.len();
    assert_eq!(omega.len(), n);
    let (mut x, mut y) = (0.0, 0.0);
    let trig: Vec<(f64, f64)> = theta.iter().map(|t| t.sin_cos()).collect();
    for &(s, c) in &trig {
        x += c;
        y += s;
    }
    let kn = k / n as f64;
    let var = noise_sd * noise_sd * dt;
    for j in 0..n {
        let (s, c) = trig[j];
        let drift = omega[j] + kn * (y * c - x * s);
        let noise = if noise_sd > 0.0 {
            streams[j].gaussian_increment(var)
        } else {
            0.0
        };
        theta[j] += drift * dt + noise;
    }
}

/// Everything needed to run one realization from scratch.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizationSpec {
    pub n: usize,
    pub coupling: CouplingSpec,
    pub omega_mean: f64,
    pub omega_sd: f64,
    pub clip_sds: f64,
    pub dt: f64,
    pub n_steps: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub polar: PolarOptions,
    /// Stop at the first step any amplitude exceeds this value.
    pub explosion_threshold: Option<f64>,
    /// Keep a [`MetricsFrame`] for every step, including the initial state.
    pub record_frames: bool,
    /// Keep every amplitude at every `stride`-th post-burn-in step.
    pub amplitude_sample_stride: Option<usize>,
}

impl RealizationSpec {
    pub fn new(n: usize, coupling: CouplingSpec, seed: u64) -> Self {
        RealizationSpec {
            n,
            coupling,
            omega_mean: 437.72,
            omega_sd: 1.0,
            clip_sds: 3.0,
            dt: 5e-5,
            n_steps: 10_000,
            burn_in: 5_000,
            seed,
            polar: PolarOptions::default(),
            explosion_threshold: None,
            record_frames: false,
            amplitude_sample_stride: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("n must be >= 1".into()));
        }
        if self.burn_in >= self.n_steps {
            return Err(Error::InvalidParameter(format!(
                "burn_in ({}) must be < n_steps ({})",
                self.burn_in, self.n_steps
            )));
        }
        if !(self.omega_sd >= 0.0) {
            return Err(Error::InvalidParameter("omega_sd must be >= 0".into()));
        }
        TimeGrid::new(self.dt, self.n_steps)?;
        Ok(())
    }
}

/// First passage of an amplitude over the explosion threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Explosion {
    pub step: usize,
    pub time: f64,
    pub oscillator: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealizationOutcome {
    pub seed: u64,
    /// Sampled natural frequencies.
    pub omega: Vec<f64>,
    /// Mean of `ρ` over steps `burn_in + 1 ..= n_steps`.
    pub rho_bar: f64,
    /// Standard deviation of `ρ` over the same window.
    pub rho_sd: f64,
    /// Window means of the synchronous-group and population averages.
    pub group_mean_omega: f64,
    pub population_mean_omega: f64,
    pub group_mean_z: f64,
    pub population_mean_z: f64,
    pub max_z: f64,
    pub steps_run: usize,
    pub explosion: Option<Explosion>,
    pub frames: Vec<MetricsFrame>,
    pub amplitude_samples: Vec<f64>,
    pub final_state: NetworkState,
}

/// Builds the initial state: frequencies from the clipped normal, phases
/// uniform on `(−π, π]`, amplitudes uniform on `(0, 1]`.
pub fn initial_state(spec: &RealizationSpec) -> Result<NetworkState> {
    let mut freq = RngStream::new(spec.seed, FREQUENCY_STREAM);
    let omega = sample_natural_frequencies(
        spec.n,
        spec.omega_mean,
        spec.omega_sd,
        spec.clip_sds,
        &mut freq,
    );
    let mut init = RngStream::new(spec.seed, INITIAL_STREAM);
    let mut theta = Vec::with_capacity(spec.n);
    let mut z = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        theta.push(PI - 2.0 * PI * init.uniform());
        z.push(1.0 - init.uniform());
    }
    NetworkState::from_frequencies(omega, z, theta)
}

/// Runs one realization and summarises the post-burn-in window.
pub fn run_realization(spec: &RealizationSpec) -> Result<RealizationOutcome> {
    spec.validate()?;
    let state = initial_state(spec)?;
    let omega = state.omega.clone();
    let opts = StepOptions {
        dt: spec.dt,
        polar: spec.polar,
    };
    let mut net = Network::new(
        state,
        spec.coupling.clone(),
        opts,
        NetworkStreams::new(spec.seed, spec.n),
    )?;

    let mut frames = Vec::new();
    if spec.record_frames {
        frames.push(MetricsFrame::compute(0, 0.0, net.state())?);
    }
    let mut rho_sum = 0.0;
    let mut rho_sq = 0.0;
    let mut window = 0usize;
    let (mut g_omega, mut p_omega, mut g_z, mut p_z) = (0.0, 0.0, 0.0, 0.0);
    let mut max_z = net.state().z.iter().copied().fold(0.0, f64::max);
    let mut amplitude_samples = Vec::new();
    let mut explosion = None;
    let threshold = spec.explosion_threshold.unwrap_or(DIVERGENCE_LIMIT);

    for step in 1..=spec.n_steps {
        net.step()?;
        let t = step as f64 * spec.dt;
        let s = net.state();
        for (i, &z) in s.z.iter().enumerate() {
            if z > max_z {
                max_z = z;
            }
            if spec.explosion_threshold.is_some() && z > threshold && explosion.is_none() {
                explosion = Some(Explosion {
                    step,
                    time: t,
                    oscillator: i,
                    value: z,
                });
            }
        }
        let in_window = step > spec.burn_in;
        if spec.record_frames || in_window {
            let frame = MetricsFrame::compute(step, t, s)?;
            if in_window {
                rho_sum += frame.rho;
                rho_sq += frame.rho * frame.rho;
                g_omega += frame.group.mean_omega;
                p_omega += frame.population.mean_omega;
                g_z += frame.group.mean_z;
                p_z += frame.population.mean_z;
                window += 1;
                if let Some(stride) = spec.amplitude_sample_stride {
                    if (step - spec.burn_in).is_multiple_of(stride.max(1)) {
                        amplitude_samples.extend_from_slice(&s.z);
                    }
                }
            }
            if spec.record_frames {
                frames.push(frame);
            }
        }
        if explosion.is_some() {
            break;
        }
    }

    let w = window as f64;
    let (rho_bar, rho_sd) = if window > 0 {
        let mean = rho_sum / w;
        (mean, (rho_sq / w - mean * mean).max(0.0).sqrt())
    } else {
        (f64::NAN, f64::NAN)
    };
    let steps_run = net.steps();
    Ok(RealizationOutcome {
        seed: spec.seed,
        omega,
        rho_bar,
        rho_sd,
        group_mean_omega: g_omega / w,
        population_mean_omega: p_omega / w,
        group_mean_z: g_z / w,
        population_mean_z: p_z / w,
        max_z,
        steps_run,
        explosion,
        frames,
        amplitude_samples,
        final_state: net.into_state(),
    })
}

/// `ρ` of the current phases of a network.
pub fn network_pli(state: &NetworkState) -> Result<f64> {
    pli(&state.theta).map(|(rho, _)| rho)
}
