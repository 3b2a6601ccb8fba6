//! Fast invariant checks run by the `validate` subcommand.

use std::f64::consts::PI;

use crate::error::Result;
use crate::harness::config::NetworkConfig;
use crate::metrics::{phase_histogram, pli};
use crate::model::{DerivedParams, EIParams, Mat2};
use crate::network::{run_realization, CouplingSpec, RealizationSpec};
use crate::sde::RngStream;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check {
        name,
        passed,
        detail,
    }
}

pub fn run_validation(cfg: &NetworkConfig) -> Result<Vec<Check>> {
    let mut out = Vec::new();

    let d = DerivedParams::from_params(&EIParams::table1())?;
    out.push(check(
        "table1",
        (d.lambda - 8.333).abs() <= 1e-3
            && (d.omega_d - 437.72).abs() <= 1e-2
            && (d.sigma - 6.85).abs() <= 1e-2
            && (d.q_norm - 703.5).abs() <= 0.5,
        format!(
            "lambda={:.4} omega={:.3} sigma={:.4} |Q|={:.2}",
            d.lambda, d.omega_d, d.sigma, d.q_norm
        ),
    ));

    let p = EIParams::table1();
    let q = d.q_matrix;
    let residual = q
        .inverse()
        .map(|qi| {
            qi.mul(&p.drift_matrix().scale(-1.0))
                .mul(&q)
                .max_abs_diff(&Mat2::new(-d.lambda, d.omega_d, -d.omega_d, -d.lambda))
        })
        .unwrap_or(f64::INFINITY);
    out.push(check(
        "canonical_form",
        residual < 1e-9,
        format!("residual={residual:.3e}"),
    ));

    let mut rng = RngStream::new(cfg.seed, 0);
    let theta: Vec<f64> = (0..64).map(|_| 2.0 * PI * rng.uniform()).collect();
    let shifted: Vec<f64> = theta
        .iter()
        .enumerate()
        .map(|(i, t)| t + 2.0 * PI * (i as f64 - 32.0))
        .collect();
    let (a, _) = pli(&theta)?;
    let (b, _) = pli(&shifted)?;
    out.push(check(
        "pli_wrap_invariance",
        (a - b).abs() < 1e-9,
        format!("{a:.12} vs {b:.12}"),
    ));

    let total: usize = phase_histogram(&theta).iter().sum();
    out.push(check(
        "histogram_partition",
        total == 64,
        format!("sum={total}"),
    ));

    let mut spec = RealizationSpec::new(8, CouplingSpec::all_to_all_with_norm(100.0, 8), cfg.seed);
    spec.n_steps = 400;
    spec.burn_in = 200;
    let r1 = run_realization(&spec)?;
    let r2 = run_realization(&spec)?;
    out.push(check(
        "realization_determinism",
        r1 == r2,
        format!("rho_bar={:.6}", r1.rho_bar),
    ));
    out.push(check(
        "amplitudes_positive",
        r1.final_state.z.iter().all(|&z| z > 0.0),
        format!(
            "min z={:.3e}",
            r1.final_state.z.iter().copied().fold(f64::MAX, f64::min)
        ),
    ));
    Ok(out)
}
