//! Flat `key = value` run configuration.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::model::AMPLITUDE_RESCALE;
use crate::network::{
    AmplitudeCoupling, CouplingKind, CouplingMatrix, CouplingSpec, RealizationSpec,
};
use crate::processes::{DriftScaling, PolarOptions, EPSILON_FLOOR};
use crate::sde::mix_seed;

/// Everything that determines the outputs of a run. All keys are optional.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    pub n: usize,
    /// Network sizes covered by `sweep`.
    pub n_values: Vec<usize>,
    /// `‖C‖` for `raster`, `snapshots` and single-point runs.
    pub coupling_norm: f64,
    pub coupling_norm_values: Vec<f64>,
    /// Optional explicit coupling matrix (CSV, one row per line). It is
    /// rescaled to each requested `‖C‖`.
    pub coupling_matrix: Option<PathBuf>,
    pub ratio_factor: bool,
    pub amplitude_variant: AmplitudeCoupling,
    pub omega_mean: f64,
    pub omega_sd: f64,
    pub clip_sds: f64,
    pub dt: f64,
    pub n_steps: usize,
    pub burn_in: usize,
    pub realizations: usize,
    pub seed: u64,
    pub amplitude_rescale: f64,
    pub epsilon_floor: f64,
    pub drift_time_scaling: DriftScaling,
    pub explosion_threshold: Option<f64>,
    /// Snapshot times in seconds.
    pub snapshot_times: Vec<f64>,
    /// Averaging window of each snapshot, seconds.
    pub snapshot_window: f64,
    /// Length of the single-oscillator runs.
    pub single_steps: usize,
}

/// Zero plus 12 log-spaced values from 1 to 2·10⁴.
pub fn default_coupling_grid() -> Vec<f64> {
    let top = 2e4f64.log10();
    std::iter::once(0.0)
        .chain((0..12).map(|k| {
            if k == 11 {
                2e4
            } else {
                10f64.powf(top * k as f64 / 11.0)
            }
        }))
        .collect()
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            n: 100,
            n_values: vec![2, 10, 66, 100],
            coupling_norm: 4950.0,
            coupling_norm_values: default_coupling_grid(),
            coupling_matrix: None,
            ratio_factor: true,
            amplitude_variant: AmplitudeCoupling::Difference,
            omega_mean: 437.72,
            omega_sd: 1.0,
            clip_sds: 3.0,
            dt: 5e-5,
            n_steps: 10_000,
            burn_in: 5_000,
            realizations: 10,
            seed: 0,
            amplitude_rescale: AMPLITUDE_RESCALE,
            epsilon_floor: EPSILON_FLOOR,
            drift_time_scaling: DriftScaling::RealTime,
            explosion_threshold: None,
            snapshot_times: vec![0.0, 0.05, 0.1, 0.2, 0.3, 0.45],
            snapshot_window: 0.005,
            single_steps: 80_000,
        }
    }
}

fn parse_value<T: std::str::FromStr>(line: usize, key: &str, raw: &str) -> Result<T> {
    raw.parse().map_err(|_| Error::Config {
        line,
        message: format!("cannot parse '{raw}' for key '{key}'"),
    })
}

fn parse_list<T: std::str::FromStr>(line: usize, key: &str, raw: &str) -> Result<Vec<T>> {
    if raw.is_empty() {
        return Ok(Vec::new());
    }
    raw.split(',')
        .map(|s| parse_value(line, key, s.trim()))
        .collect()
}

fn parse_optional(line: usize, key: &str, raw: &str) -> Result<Option<f64>> {
    if raw == "none" {
        Ok(None)
    } else {
        parse_value(line, key, raw).map(Some)
    }
}

fn join<T: std::fmt::Display>(values: &[T]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

impl NetworkConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = NetworkConfig::default();
        for (idx, raw_line) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw_line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Config {
                line,
                message: format!("expected 'key = value', got '{content}'"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "n" => cfg.n = parse_value(line, key, value)?,
                "n_values" => cfg.n_values = parse_list(line, key, value)?,
                "coupling_norm" => cfg.coupling_norm = parse_value(line, key, value)?,
                "coupling_norm_values" => cfg.coupling_norm_values = parse_list(line, key, value)?,
                "coupling_matrix" => {
                    cfg.coupling_matrix = (value != "none").then(|| PathBuf::from(value));
                }
                "ratio_factor" => cfg.ratio_factor = parse_value(line, key, value)?,
                "amplitude_variant" => {
                    cfg.amplitude_variant = value.parse().map_err(|e: Error| Error::Config {
                        line,
                        message: e.to_string(),
                    })?
                }
                "omega_mean" => cfg.omega_mean = parse_value(line, key, value)?,
                "omega_sd" => cfg.omega_sd = parse_value(line, key, value)?,
                "clip_sds" => cfg.clip_sds = parse_value(line, key, value)?,
                "dt" => cfg.dt = parse_value(line, key, value)?,
                "n_steps" => cfg.n_steps = parse_value(line, key, value)?,
                "burn_in" => cfg.burn_in = parse_value(line, key, value)?,
                "realizations" => cfg.realizations = parse_value(line, key, value)?,
                "seed" => cfg.seed = parse_value(line, key, value)?,
                "amplitude_rescale" => cfg.amplitude_rescale = parse_value(line, key, value)?,
                "epsilon_floor" => cfg.epsilon_floor = parse_value(line, key, value)?,
                "drift_time_scaling" => {
                    cfg.drift_time_scaling = value.parse().map_err(|e: Error| Error::Config {
                        line,
                        message: e.to_string(),
                    })?
                }
                "explosion_threshold" => {
                    cfg.explosion_threshold = parse_optional(line, key, value)?
                }
                "snapshot_times" => cfg.snapshot_times = parse_list(line, key, value)?,
                "snapshot_window" => cfg.snapshot_window = parse_value(line, key, value)?,
                "single_steps" => cfg.single_steps = parse_value(line, key, value)?,
                _ => {
                    return Err(Error::Config {
                        line,
                        message: format!("unknown key '{key}'"),
                    })
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.n == 0 || self.n_values.contains(&0) {
            return bad("network size must be >= 1".into());
        }
        if self.burn_in >= self.n_steps {
            return bad(format!(
                "burn_in ({}) must be < n_steps ({})",
                self.burn_in, self.n_steps
            ));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be > 0, got {}", self.dt));
        }
        if self.realizations == 0 {
            return bad("realizations must be >= 1".into());
        }
        if !(self.omega_sd >= 0.0) {
            return bad(format!("omega_sd must be >= 0, got {}", self.omega_sd));
        }
        if !(self.amplitude_rescale > 0.0) || !(self.epsilon_floor > 0.0) {
            return bad("amplitude_rescale and epsilon_floor must be > 0".into());
        }
        if self.coupling_norm < 0.0 || self.coupling_norm_values.iter().any(|&c| !(c >= 0.0)) {
            return bad("coupling norms must be >= 0".into());
        }
        if !(self.snapshot_window >= 0.0) {
            return bad("snapshot_window must be >= 0".into());
        }
        Ok(())
    }

    /// Canonical text form; parsing it yields an identical config.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("n", self.n.to_string());
        put("n_values", join(&self.n_values));
        put("coupling_norm", self.coupling_norm.to_string());
        put("coupling_norm_values", join(&self.coupling_norm_values));
        put(
            "coupling_matrix",
            self.coupling_matrix
                .as_ref()
                .map_or("none".into(), |p| p.display().to_string()),
        );
        put("ratio_factor", self.ratio_factor.to_string());
        put("amplitude_variant", self.amplitude_variant.as_str().into());
        put("omega_mean", self.omega_mean.to_string());
        put("omega_sd", self.omega_sd.to_string());
        put("clip_sds", self.clip_sds.to_string());
        put("dt", self.dt.to_string());
        put("n_steps", self.n_steps.to_string());
        put("burn_in", self.burn_in.to_string());
        put("realizations", self.realizations.to_string());
        put("seed", self.seed.to_string());
        put("amplitude_rescale", self.amplitude_rescale.to_string());
        put("epsilon_floor", self.epsilon_floor.to_string());
        put(
            "drift_time_scaling",
            self.drift_time_scaling.as_str().into(),
        );
        put(
            "explosion_threshold",
            self.explosion_threshold
                .map_or("none".into(), |v| v.to_string()),
        );
        put("snapshot_times", join(&self.snapshot_times));
        put("snapshot_window", self.snapshot_window.to_string());
        put("single_steps", self.single_steps.to_string());
        s
    }

    pub fn polar_options(&self) -> PolarOptions {
        PolarOptions {
            amplitude_rescale: self.amplitude_rescale,
            epsilon_floor: self.epsilon_floor,
            drift_scaling: self.drift_time_scaling,
        }
    }

    fn load_matrix(&self, path: &Path) -> Result<CouplingMatrix> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| Error::csv(path, e))?;
        let mut entries = Vec::new();
        let mut rows = 0;
        for record in reader.records() {
            let record = record.map_err(|e| Error::csv(path, e))?;
            for field in record.iter() {
                entries.push(field.parse::<f64>().map_err(|_| {
                    Error::InvalidParameter(format!(
                        "{}: bad matrix entry '{field}'",
                        path.display()
                    ))
                })?);
            }
            rows += 1;
        }
        CouplingMatrix::new(rows, entries)
    }

    /// Coupling for `n` oscillators with 2-norm `norm`.
    pub fn coupling_for(&self, n: usize, norm: f64) -> Result<CouplingSpec> {
        let base = CouplingSpec::all_to_all_with_norm(norm, n)
            .with_ratio_factor(self.ratio_factor)
            .with_amplitude(self.amplitude_variant);
        match &self.coupling_matrix {
            None => Ok(base),
            Some(path) => {
                let m = self.load_matrix(path)?;
                if m.n() != n {
                    return Err(Error::InvalidParameter(format!(
                        "coupling matrix has {} rows but n = {n}",
                        m.n()
                    )));
                }
                let current = m.norm2();
                let scale = if current > 0.0 { norm / current } else { 0.0 };
                Ok(CouplingSpec {
                    kind: CouplingKind::Explicit(m.scaled(scale)?),
                    ..base
                })
            }
        }
    }

    /// Seed of realization `index` at network size `n` and coupling `norm`.
    pub fn realization_seed(&self, n: usize, norm: f64, index: usize) -> u64 {
        mix_seed(
            mix_seed(mix_seed(self.seed, n as u64), norm.to_bits()),
            index as u64,
        )
    }

    pub fn realization_spec(&self, n: usize, norm: f64, index: usize) -> Result<RealizationSpec> {
        let mut spec = RealizationSpec::new(
            n,
            self.coupling_for(n, norm)?,
            self.realization_seed(n, norm, index),
        );
        spec.omega_mean = self.omega_mean;
        spec.omega_sd = self.omega_sd;
        spec.clip_sds = self.clip_sds;
        spec.dt = self.dt;
        spec.n_steps = self.n_steps;
        spec.burn_in = self.burn_in;
        spec.polar = self.polar_options();
        spec.explosion_threshold = self.explosion_threshold;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_shape() {
        let g = default_coupling_grid();
        assert_eq!(g.len(), 13);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[1], 1.0);
        assert_eq!(g[12], 2e4);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn echo_round_trip() {
        let cfg = NetworkConfig {
            seed: 123,
            explosion_threshold: Some(1e3),
            amplitude_variant: AmplitudeCoupling::CosineFactor,
            drift_time_scaling: DriftScaling::LambdaScaled,
            coupling_norm_values: vec![0.0, 0.1, 1.0 / 3.0],
            ..NetworkConfig::default()
        };
        let back = NetworkConfig::parse(&cfg.echo()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.echo(), cfg.echo());
    }

    #[test]
    fn comments_and_blank_lines() {
        let cfg = NetworkConfig::parse("# header\n\n n = 12  # trailing\nseed=9\n").unwrap();
        assert_eq!(cfg.n, 12);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.dt, 5e-5);
    }

    #[test]
    fn errors_carry_line_numbers() {
        match NetworkConfig::parse("n = 3\nbogus = 1\n") {
            Err(Error::Config { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        match NetworkConfig::parse("n = 3\n\ndt = fast\n") {
            Err(Error::Config { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            NetworkConfig::parse("no equals sign"),
            Err(Error::Config { line: 1, .. })
        ));
    }

    #[test]
    fn invariants_enforced() {
        assert!(NetworkConfig::parse("burn_in = 10000").is_err());
        assert!(NetworkConfig::parse("n = 0").is_err());
        assert!(NetworkConfig::parse("dt = 0").is_err());
    }

    #[test]
    fn realization_seeds_distinct() {
        let cfg = NetworkConfig::default();
        let a = cfg.realization_seed(100, 4950.0, 0);
        assert_ne!(a, cfg.realization_seed(100, 4950.0, 1));
        assert_ne!(a, cfg.realization_seed(66, 4950.0, 0));
        assert_ne!(a, cfg.realization_seed(100, 0.0, 0));
    }

    #[test]
    fn matrix_file_rescaled_to_norm() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        std::fs::write(&path, "0,1,2\n1,0,1\n2,1,0\n").unwrap();
        let cfg = NetworkConfig {
            coupling_matrix: Some(path),
            ..NetworkConfig::default()
        };
        let c = cfg.coupling_for(3, 10.0).unwrap();
        assert!((c.norm(3) - 10.0).abs() < 1e-9);
        assert!(cfg.coupling_for(4, 10.0).is_err());
    }
}
