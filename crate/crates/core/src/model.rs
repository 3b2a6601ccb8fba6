//! Closed-form parameter algebra for a single excitatory-inhibitory (E-I)
//! linear noise oscillator.
//!
//! The oscillator is the centred linear SDE
//!
//! ```text
//! dV = -A V dt + N dW,
//! A = [[(1 - S_EE)/τ_E,  S_EI/τ_E      ],
//!      [-S_IE/τ_I,       (1 + S_II)/τ_I]],
//! N = diag(σ_E/τ_E, σ_I/τ_I)
//! ```
//!
//! whose drift `-A` has eigenvalues `-λ ± iω_d` in the quasi-cycle regime.
//! From the raw parameters this module derives the damping rate `λ`, the
//! natural frequency `ω_d`, a real matrix `Q` bringing `-A` into the
//! rotation-plus-damping canonical form, the scalar noise level `σ`, and
//! `‖Q‖`.

use crate::error::{Error, Result};

/// Dense 2×2 real matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[1.0, 0.0], [0.0, 1.0]]);

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn diag(a: f64, d: f64) -> Self {
        Mat2([[a, 0.0], [0.0, d]])
    }

    /// Counter-clockwise rotation by `angle` radians.
    pub fn rotation(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Mat2([[c, -s], [s, c]])
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.0[row][col]
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn transpose(&self) -> Self {
        let m = &self.0;
        Mat2([[m[0][0], m[1][0]], [m[0][1], m[1][1]]])
    }

    pub fn scale(&self, k: f64) -> Self {
        let m = &self.0;
        Mat2([[k * m[0][0], k * m[0][1]], [k * m[1][0], k * m[1][1]]])
    }

    pub fn mul(&self, other: &Mat2) -> Self {
        let a = &self.0;
        let b = &other.0;
        Mat2([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }

    #[inline]
    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1],
            m[1][0] * v[0] + m[1][1] * v[1],
        ]
    }

    /// Inverse, or `None` when the determinant is zero relative to the
    /// magnitude of the entries.
    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        let scale = self.frobenius_sq();
        if !det.is_finite() || det.abs() <= f64::EPSILON * scale {
            return None;
        }
        let m = &self.0;
        let inv = 1.0 / det;
        Some(Mat2([
            [m[1][1] * inv, -m[0][1] * inv],
            [-m[1][0] * inv, m[0][0] * inv],
        ]))
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.0.iter().flatten().map(|x| x * x).sum()
    }

    /// Spectral norm (largest singular value), closed form for 2×2:
    /// `s_max² = (‖M‖_F² + sqrt(‖M‖_F⁴ − 4 det²)) / 2`.
    pub fn norm2(&self) -> f64 {
        self.singular_values().1
    }

    /// `(smallest, largest)` singular values.
    pub fn singular_values(&self) -> (f64, f64) {
        let f = self.frobenius_sq();
        let det = self.det();
        let disc = (f * f - 4.0 * det * det).max(0.0).sqrt();
        let smax_sq = 0.5 * (f + disc);
        let smax = smax_sq.sqrt();
        // det = smin * smax avoids cancellation in (f - disc) / 2
        let smin = if smax > 0.0 { det.abs() / smax } else { 0.0 };
        (smin, smax)
    }

    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        self.0
            .iter()
            .flatten()
            .zip(other.0.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Raw parameters of one E-I oscillator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EIParams {
    pub s_ee: f64,
    pub s_ei: f64,
    pub s_ie: f64,
    pub s_ii: f64,
    /// Seconds.
    pub tau_e: f64,
    /// Seconds.
    pub tau_i: f64,
    /// mV.
    pub sigma_e: f64,
    /// mV.
    pub sigma_i: f64,
}

/// Population parameters shared by every oscillator in the network
/// experiments; only `S_II` varies between oscillators.
pub const NETWORK_BASE: EIParams = EIParams {
    s_ee: 1.5,
    s_ei: 1.0,
    s_ie: 4.0,
    s_ii: 0.1,
    tau_e: 0.003,
    tau_i: 0.006,
    sigma_e: 12.0,
    sigma_i: 12.0,
};

/// `λ = DAMPING_PER_SII · S_II` for [`NETWORK_BASE`] (exactly 250/3).
pub const DAMPING_PER_SII: f64 = 250.0 / 3.0;

/// Numerator of the closed form `σ = SIGMA_NUMERATOR / ω_d` used for the
/// network population.
pub const SIGMA_NUMERATOR: f64 = 2998.38;

/// Default normalisation for `‖Q‖` in the amplitude equations.
pub const AMPLITUDE_RESCALE: f64 = 703.5;

/// Default bound on `λ/ω_d` for [`is_quasi_cycle`].
pub const DEFAULT_RATIO_THRESHOLD: f64 = 0.05;

impl EIParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        s_ee: f64,
        s_ei: f64,
        s_ie: f64,
        s_ii: f64,
        tau_e: f64,
        tau_i: f64,
        sigma_e: f64,
        sigma_i: f64,
    ) -> Result<Self> {
        let p = EIParams {
            s_ee,
            s_ei,
            s_ie,
            s_ii,
            tau_e,
            tau_i,
            sigma_e,
            sigma_i,
        };
        p.validate()?;
        Ok(p)
    }

    /// The operating point of the single-oscillator figures
    /// (`λ = 8.333`, `ω_d = 437.72`).
    pub fn table1() -> Self {
        NETWORK_BASE
    }

    pub fn validate(&self) -> Result<()> {
        let efficacies = [
            ("s_ee", self.s_ee),
            ("s_ei", self.s_ei),
            ("s_ie", self.s_ie),
            ("s_ii", self.s_ii),
            ("sigma_e", self.sigma_e),
            ("sigma_i", self.sigma_i),
        ];
        for (name, v) in efficacies {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        for (name, v) in [("tau_e", self.tau_e), ("tau_i", self.tau_i)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and > 0, got {v}"
                )));
            }
        }
        Ok(())
    }

    pub fn with_s_ii(self, s_ii: f64) -> Result<Self> {
        let p = EIParams { s_ii, ..self };
        p.validate()?;
        Ok(p)
    }

    /// The matrix `A` of `dV = -A V dt + N dW`.
    pub fn drift_matrix(&self) -> Mat2 {
        Mat2::new(
            (1.0 - self.s_ee) / self.tau_e,
            self.s_ei / self.tau_e,
            -self.s_ie / self.tau_i,
            (1.0 + self.s_ii) / self.tau_i,
        )
    }

    /// The diagonal noise matrix `N`.
    pub fn noise_matrix(&self) -> Mat2 {
        Mat2::diag(self.sigma_e / self.tau_e, self.sigma_i / self.tau_i)
    }

    fn frequency_radicand(&self) -> f64 {
        let bracket = (1.0 - self.s_ee) / self.tau_e - (1.0 + self.s_ii) / self.tau_i;
        self.s_ei * self.s_ie / (self.tau_e * self.tau_i) - 0.25 * bracket * bracket
    }

    /// Inverts the natural-frequency relation for `S_II`, holding every other
    /// parameter fixed.
    ///
    /// Writing `u = (1 + S_II)/τ_I` and `K = S_EI S_IE/(τ_E τ_I)`, the
    /// frequency relation gives `u = (1 − S_EE)/τ_E + 2 sqrt(K − ω²)`; the
    /// other root makes `u` smaller and is never admissible for the network
    /// operating point.
    pub fn solve_s_ii(&self, omega_d: f64) -> Result<f64> {
        if !(omega_d > 0.0 && omega_d.is_finite()) {
            return Err(Error::OutOfRange(format!(
                "natural frequency must be positive, got {omega_d}"
            )));
        }
        let k = self.s_ei * self.s_ie / (self.tau_e * self.tau_i);
        let disc = k - omega_d * omega_d;
        if disc < 0.0 {
            return Err(Error::OutOfRange(format!(
                "omega_d = {omega_d} exceeds the maximum attainable frequency {}",
                k.sqrt()
            )));
        }
        let u = (1.0 - self.s_ee) / self.tau_e + 2.0 * disc.sqrt();
        let s_ii = u * self.tau_i - 1.0;
        if s_ii < 0.0 {
            return Err(Error::OutOfRange(format!(
                "omega_d = {omega_d} requires S_II = {s_ii} < 0"
            )));
        }
        Ok(s_ii)
    }
}

/// Quantities derived from [`EIParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedParams {
    /// Damping rate, 1/s.
    pub lambda: f64,
    /// Natural frequency, rad/s.
    pub omega_d: f64,
    /// Noise scalar, mV.
    pub sigma: f64,
    pub q_matrix: Mat2,
    pub q_norm: f64,
}

impl DerivedParams {
    pub fn from_params(p: &EIParams) -> Result<Self> {
        let lambda = derive_damping(p);
        let omega_d = derive_frequency(p)?;
        let q_matrix = canonical_transform(p)?;
        let sigma = derive_sigma(p, &q_matrix)?;
        Ok(DerivedParams {
            lambda,
            omega_d,
            sigma,
            q_matrix,
            q_norm: q_matrix.norm2(),
        })
    }

    /// The canonical drift `[[−λ, ω_d], [−ω_d, −λ]]`.
    pub fn canonical_drift(&self) -> Mat2 {
        Mat2::new(-self.lambda, self.omega_d, -self.omega_d, -self.lambda)
    }

    /// Frequency in Hz.
    pub fn frequency_hz(&self) -> f64 {
        self.omega_d / std::f64::consts::TAU
    }
}

/// `λ = ½[(1 − S_EE)/τ_E + (1 + S_II)/τ_I]`.
pub fn derive_damping(p: &EIParams) -> f64 {
    0.5 * ((1.0 - p.s_ee) / p.tau_e + (1.0 + p.s_ii) / p.tau_i)
}

/// `ω_d`, the imaginary part of the eigenvalues of `-A`.
pub fn derive_frequency(p: &EIParams) -> Result<f64> {
    let radicand = p.frequency_radicand();
    if !(radicand > 0.0) {
        return Err(Error::NotOscillatory);
    }
    Ok(radicand.sqrt())
}

/// `σ = sqrt(½ Tr(Q⁻¹ N Nᵀ Q⁻ᵀ))`, i.e. `‖Q⁻¹N‖_F / √2`.
pub fn derive_sigma(p: &EIParams, q: &Mat2) -> Result<f64> {
    let q_inv = q.inverse().ok_or(Error::SingularTransform)?;
    let c = q_inv.mul(&p.noise_matrix());
    Ok((0.5 * c.frobenius_sq()).sqrt())
}

/// Real matrix `Q` with `Q⁻¹(−A)Q = [[−λ, ω_d], [−ω_d, −λ]]`.
///
/// With `−A = [[a, b], [c, d]]`, the vector `w = (μ − d, c)` is an
/// eigenvector for `μ = −λ + iω_d`; the columns of `Q` are `−Im w` and
/// `Re w`, which gives `Q = [[−ω_d, −λ − d], [0, c]]`. For the network
/// population this is `[[−ω_d, λ + 500/3], [0, 2000/3]]`.
pub fn canonical_transform(p: &EIParams) -> Result<Mat2> {
    let omega = derive_frequency(p)?;
    let lambda = derive_damping(p);
    let neg_a = p.drift_matrix().scale(-1.0);
    let c = neg_a.get(1, 0);
    let d = neg_a.get(1, 1);
    let q = Mat2::new(-omega, -lambda - d, 0.0, c);
    if q.inverse().is_none() {
        return Err(Error::SingularTransform);
    }
    Ok(q)
}

/// `S_II` reproducing a given natural frequency for the network population
/// ([`NETWORK_BASE`] with `S_II` free).
pub fn solve_sii_for_frequency(omega_d: f64) -> Result<f64> {
    NETWORK_BASE.solve_s_ii(omega_d)
}

/// `0 < λ` and `λ/ω_d < ratio_threshold`.
pub fn is_quasi_cycle(d: &DerivedParams, ratio_threshold: f64) -> bool {
    d.lambda > 0.0 && d.omega_d > 0.0 && d.lambda / d.omega_d < ratio_threshold
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn table1_damping() {
        assert_abs_diff_eq!(derive_damping(&EIParams::table1()), 8.333, epsilon = 1e-3);
    }

    #[test]
    fn damping_first_term_vanishes() {
        let p = EIParams {
            s_ee: 1.0,
            s_ii: 0.0,
            tau_e: 0.01,
            tau_i: 0.02,
            ..NETWORK_BASE
        };
        assert_abs_diff_eq!(derive_damping(&p), 0.5 / 0.02, epsilon = 1e-12);
    }

    #[test]
    fn damping_s_ii_02() {
        let p = NETWORK_BASE.with_s_ii(0.2).unwrap();
        assert_abs_diff_eq!(derive_damping(&p), 16.667, epsilon = 1e-3);
        assert_abs_diff_eq!(derive_damping(&p), DAMPING_PER_SII * 0.2, epsilon = 1e-9);
    }

    #[test]
    fn table1_frequency() {
        assert_abs_diff_eq!(
            derive_frequency(&EIParams::table1()).unwrap(),
            437.72,
            epsilon = 0.01
        );
    }

    #[test]
    fn frequency_not_oscillatory_without_cross_coupling() {
        let p = EIParams {
            s_ei: 0.0,
            ..NETWORK_BASE
        };
        assert!(matches!(derive_frequency(&p), Err(Error::NotOscillatory)));
        assert!(matches!(
            canonical_transform(&p),
            Err(Error::NotOscillatory)
        ));
    }

    #[test]
    fn frequency_s_ii_02() {
        // (2000/9·1000 − (2500/36)·2.2²)^½
        let expected = (4.0 / 1.8e-5 - (2500.0 / 0.36) * 2.2f64.powi(2)).sqrt();
        let got = derive_frequency(&NETWORK_BASE.with_s_ii(0.2).unwrap()).unwrap();
        assert_abs_diff_eq!(got, expected, epsilon = 1e-9);
        assert_abs_diff_eq!(got, 434.29, epsilon = 0.01);
    }

    #[test]
    fn table1_q_matrix_matches_explicit_form() {
        let q = canonical_transform(&EIParams::table1()).unwrap();
        assert_abs_diff_eq!(q.get(0, 0), -437.72, epsilon = 0.01);
        assert_abs_diff_eq!(q.get(0, 1), 175.0, epsilon = 0.01);
        assert_eq!(q.get(1, 0), 0.0);
        assert_abs_diff_eq!(q.get(1, 1), 666.67, epsilon = 0.01);
        let lambda = derive_damping(&EIParams::table1());
        assert_abs_diff_eq!(q.get(0, 1), lambda + 500.0 / 3.0, epsilon = 1e-9);
    }

    #[test]
    fn table1_canonical_identity() {
        let p = EIParams::table1();
        let d = DerivedParams::from_params(&p).unwrap();
        let q_inv = d.q_matrix.inverse().unwrap();
        let lhs = q_inv.mul(&p.drift_matrix().scale(-1.0)).mul(&d.q_matrix);
        assert!(lhs.max_abs_diff(&d.canonical_drift()) < 1e-9);
        assert_abs_diff_eq!(lhs.get(0, 1), 437.72, epsilon = 0.01);
        assert_abs_diff_eq!(lhs.get(0, 0), -8.333, epsilon = 1e-3);
    }

    #[test]
    fn table1_q_norm() {
        let d = DerivedParams::from_params(&EIParams::table1()).unwrap();
        assert_abs_diff_eq!(d.q_norm, 703.5, epsilon = 0.5);
    }

    #[test]
    fn table1_sigma() {
        let d = DerivedParams::from_params(&EIParams::table1()).unwrap();
        assert_abs_diff_eq!(d.sigma, 6.85, epsilon = 0.01);
        assert_abs_diff_eq!(d.sigma, SIGMA_NUMERATOR / d.omega_d, epsilon = 1e-2);
    }

    #[test]
    fn sigma_zero_noise() {
        let p = EIParams {
            sigma_e: 0.0,
            sigma_i: 0.0,
            ..NETWORK_BASE
        };
        let q = canonical_transform(&p).unwrap();
        assert_eq!(derive_sigma(&p, &q).unwrap(), 0.0);
    }

    #[test]
    fn sigma_singular_transform() {
        let q = Mat2::new(1.0, 2.0, 2.0, 4.0);
        assert!(matches!(
            derive_sigma(&NETWORK_BASE, &q),
            Err(Error::SingularTransform)
        ));
    }

    #[test]
    fn sigma_at_400_matches_closed_form() {
        let s_ii = solve_sii_for_frequency(400.0).unwrap();
        let d = DerivedParams::from_params(&NETWORK_BASE.with_s_ii(s_ii).unwrap()).unwrap();
        assert_abs_diff_eq!(d.omega_d, 400.0, epsilon = 1e-9);
        assert_abs_diff_eq!(d.sigma, 2998.38 / 400.0, epsilon = 1e-2);
    }

    #[test]
    fn solve_sii_table1() {
        let s = solve_sii_for_frequency(437.72).unwrap();
        assert_abs_diff_eq!(s, 0.1, epsilon = 1e-3);
        let w = derive_frequency(&NETWORK_BASE.with_s_ii(s).unwrap()).unwrap();
        assert_abs_diff_eq!(w, 437.72, epsilon = 437.72 * 1e-9);
    }

    #[test]
    fn solve_sii_upper_clip() {
        // Frozen from an independent evaluation of the quadratic root
        // S = −2 + sqrt(b² − 4a(ω² − K + 4a)) / 2a with a = 2500/0.36.
        let s = solve_sii_for_frequency(440.72).unwrap();
        assert_abs_diff_eq!(s, 0.007_557_458_804, epsilon = 1e-9);
        let s = solve_sii_for_frequency(434.72).unwrap();
        assert_abs_diff_eq!(s, 0.187_845_312_265, epsilon = 1e-9);
    }

    #[test]
    fn solve_sii_out_of_range() {
        // above sqrt(K) = 471.40 the discriminant is negative
        assert!(matches!(
            solve_sii_for_frequency(480.0),
            Err(Error::OutOfRange(_))
        ));
        // between ω(S_II = 0) = 440.96 and 471.40 the root is negative
        assert!(matches!(
            solve_sii_for_frequency(450.0),
            Err(Error::OutOfRange(_))
        ));
        assert!(matches!(
            solve_sii_for_frequency(-1.0),
            Err(Error::OutOfRange(_))
        ));
    }

    #[test]
    fn quasi_cycle_predicate() {
        let d = DerivedParams::from_params(&EIParams::table1()).unwrap();
        assert!(is_quasi_cycle(&d, DEFAULT_RATIO_THRESHOLD));
        assert_abs_diff_eq!(d.lambda / d.omega_d, 0.019, epsilon = 1e-3);
        assert!(!is_quasi_cycle(&DerivedParams { lambda: 0.0, ..d }, 0.05));
        assert!(!is_quasi_cycle(&DerivedParams { lambda: 50.0, ..d }, 0.05));
    }

    #[test]
    fn params_validation() {
        assert!(EIParams::new(1.5, 1.0, 4.0, -0.1, 0.003, 0.006, 12.0, 12.0).is_err());
        assert!(EIParams::new(1.5, 1.0, 4.0, 0.1, 0.0, 0.006, 12.0, 12.0).is_err());
        assert!(EIParams::new(1.5, 1.0, 4.0, 0.1, 0.003, 0.006, 12.0, 12.0).is_ok());
    }

    #[test]
    fn singular_values_of_rotation_are_one() {
        let (lo, hi) = Mat2::rotation(0.7).singular_values();
        assert_abs_diff_eq!(lo, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(hi, 1.0, epsilon = 1e-12);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn frequency_round_trip(omega in 434.72f64..440.72) {
                let s = solve_sii_for_frequency(omega).unwrap();
                let w = derive_frequency(&NETWORK_BASE.with_s_ii(s).unwrap()).unwrap();
                prop_assert!(((w - omega) / omega).abs() < 1e-6);
            }

            #[test]
            fn damping_linear_in_s_ii(s in 0.0f64..0.5) {
                let lam = derive_damping(&NETWORK_BASE.with_s_ii(s).unwrap());
                prop_assert!((lam - DAMPING_PER_SII * s).abs() < 1e-9);
                prop_assert!((lam - 83.33 * s).abs() < 1e-2);
            }

            #[test]
            fn sigma_closed_form(s in 0.0f64..0.5) {
                let d = DerivedParams::from_params(&NETWORK_BASE.with_s_ii(s).unwrap()).unwrap();
                prop_assert!((d.sigma - SIGMA_NUMERATOR / d.omega_d).abs() < 1e-2);
            }

            #[test]
            fn quasi_cycle_monotone_in_damping(
                lam in 0.0f64..100.0, shrink in 0.0f64..1.0, thr in 0.001f64..0.5
            ) {
                let d = DerivedParams::from_params(&EIParams::table1()).unwrap();
                let hi = DerivedParams { lambda: lam, ..d };
                let lo = DerivedParams { lambda: lam * shrink, ..d };
                if is_quasi_cycle(&hi, thr) && lo.lambda > 0.0 {
                    prop_assert!(is_quasi_cycle(&lo, thr));
                }
            }

            #[test]
            fn q_norm_is_largest_singular_value(
                a in -1e3f64..1e3, b in -1e3f64..1e3, c in -1e3f64..1e3, d in -1e3f64..1e3,
                x in -1.0f64..1.0, y in -1.0f64..1.0
            ) {
                let m = Mat2::new(a, b, c, d);
                let n = (x * x + y * y).sqrt();
                prop_assume!(n > 1e-3);
                let v = m.apply([x / n, y / n]);
                let gain = (v[0] * v[0] + v[1] * v[1]).sqrt();
                prop_assert!(gain <= m.norm2() * (1.0 + 1e-12) + 1e-9);
            }
        }
    }
}
