//! Pulsed protocol: a blue-detuned pulse entangles a gigahertz resonator
//! `b₁` with an itinerant optical temporal mode, the light crosses a lossy
//! fiber (beam splitter of reflectivity `R`), and a red-detuned pulse swaps it
//! onto a megahertz resonator `b₂` with efficiency `W`.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::gaussian::CovarianceMatrix;
use crate::units::pulse_coupling;

/// Squeezing, transfer efficiency and fiber reflectivity of one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseParams {
    r: f64,
    w: f64,
    reflectivity: f64,
}

impl PulseParams {
    pub fn new(r: f64, w: f64, reflectivity: f64) -> Result<Self> {
        if !(r >= 0.0) || !(2.0 * r).cosh().is_finite() {
            return Err(Error::Domain(format!(
                "squeeze parameter must be finite and >= 0, got {r}"
            )));
        }
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::Domain(format!(
                "transfer efficiency W must lie in [0, 1], got {w}"
            )));
        }
        if !(0.0..=1.0).contains(&reflectivity) {
            return Err(Error::Domain(format!(
                "reflectivity R must lie in [0, 1], got {reflectivity}"
            )));
        }
        Ok(Self { r, w, reflectivity })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn reflectivity(&self) -> f64 {
        self.reflectivity
    }

    pub fn transmittance(&self) -> f64 {
        1.0 - self.reflectivity
    }
}

/// Laboratory description of the two pulses and the fiber link. Rates in
/// rad/s, powers in W, durations in s, wavelength in m, loss in dB/km,
/// distance in km.
///
/// Both pulses sit on a mechanical sideband, so the drive detuning has
/// magnitude `omega_mech_*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseLabParams {
    pub g0_blue: f64,
    pub g0_red: f64,
    pub kappa_blue: f64,
    pub kappa_red: f64,
    pub omega_mech_blue: f64,
    pub omega_mech_red: f64,
    pub power_blue: f64,
    pub power_red: f64,
    pub tau_b: f64,
    pub tau_r: f64,
    pub wavelength: f64,
    pub fiber_loss: f64,
    pub distance: f64,
}

impl Default for PulseLabParams {
    fn default() -> Self {
        let two_pi = 2.0 * PI;
        Self {
            g0_blue: two_pi * 825e3,
            g0_red: two_pi * 1.7e3,
            kappa_blue: two_pi * 1.3e9,
            kappa_red: two_pi * 20e6,
            omega_mech_blue: two_pi * 5.3e9,
            omega_mech_red: two_pi * 100e6,
            power_blue: 0.4e-6,
            power_red: 33.5e-6,
            tau_b: 10e-6,
            tau_r: 10e-6,
            wavelength: 1550e-9,
            fiber_loss: 0.2,
            distance: 0.0,
        }
    }
}

/// Couplings reached by the two pulses and the resulting protocol
/// parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedPulse {
    pub g_blue: f64,
    pub g_red: f64,
    pub params: PulseParams,
}

impl PulseLabParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("g0_blue", self.g0_blue),
            ("g0_red", self.g0_red),
            ("kappa_blue", self.kappa_blue),
            ("kappa_red", self.kappa_red),
            ("omega_mech_blue", self.omega_mech_blue),
            ("omega_mech_red", self.omega_mech_red),
            ("tau_b", self.tau_b),
            ("tau_r", self.tau_r),
            ("wavelength", self.wavelength),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        let non_negative = [
            ("power_blue", self.power_blue),
            ("power_red", self.power_red),
            ("fiber_loss", self.fiber_loss),
            ("distance", self.distance),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Domain(format!("{name} must be non-negative, got {v}")));
            }
        }
        Ok(())
    }

    /// Runs the lab-to-model chain. Logs a warning when either coupling
    /// leaves the weak-coupling regime (`G > κ/10`), where adiabatic
    /// elimination of the cavity is questionable.
    pub fn derive(&self) -> Result<DerivedPulse> {
        self.validate()?;
        let g_blue = pulse_coupling(
            self.power_blue,
            self.wavelength,
            self.kappa_blue,
            self.omega_mech_blue,
            self.g0_blue,
        )?;
        let g_red = pulse_coupling(
            self.power_red,
            self.wavelength,
            self.kappa_red,
            self.omega_mech_red,
            self.g0_red,
        )?;
        for (label, g, kappa) in [("blue", g_blue, self.kappa_blue), ("red", g_red, self.kappa_red)] {
            if g > 0.1 * kappa {
                log::warn!(
                    "{label} pulse coupling G = {g:.4e} rad/s exceeds kappa/10 = {:.4e} rad/s",
                    0.1 * kappa
                );
            }
        }
        let params = PulseParams::new(
            squeeze_parameter(g_blue, self.kappa_blue, self.tau_b)?,
            transfer_efficiency(g_red, self.kappa_red, self.tau_r)?,
            loss_from_distance(self.distance, self.fiber_loss)?,
        )?;
        Ok(DerivedPulse { g_blue, g_red, params })
    }
}

fn check_rate_inputs(g_eff: f64, kappa: f64, tau: f64) -> Result<()> {
    if !(g_eff >= 0.0) || !(kappa > 0.0) || !(tau >= 0.0) {
        return Err(Error::Domain(format!(
            "need G >= 0, kappa > 0, tau >= 0; got G = {g_eff}, kappa = {kappa}, tau = {tau}"
        )));
    }
    Ok(())
}

/// `r = arccosh(exp(𝒢τ))` with `𝒢 = 2G²/κ`, evaluated as
/// `x + ln(1 + √(1 − e^{−2x}))` so that neither small nor large `x` loses
/// digits.
pub fn squeeze_parameter(g_eff: f64, kappa: f64, tau: f64) -> Result<f64> {
    check_rate_inputs(g_eff, kappa, tau)?;
    let x = 2.0 * g_eff * g_eff / kappa * tau;
    Ok(x + (-(-2.0 * x).exp_m1()).sqrt().ln_1p())
}

/// `W = 1 − exp(−2𝒢τ)` with `𝒢 = 2G²/κ`.
pub fn transfer_efficiency(g_eff: f64, kappa: f64, tau: f64) -> Result<f64> {
    check_rate_inputs(g_eff, kappa, tau)?;
    Ok(-(-4.0 * g_eff * g_eff / kappa * tau).exp_m1())
}

/// Beam-splitter reflectivity equivalent to `distance` km of fiber with
/// `fiber_loss` dB/km attenuation.
pub fn loss_from_distance(distance: f64, fiber_loss: f64) -> Result<f64> {
    if !(distance >= 0.0) || !(fiber_loss >= 0.0) {
        return Err(Error::Domain(format!(
            "distance and fiber loss must be non-negative, got {distance} km, {fiber_loss} dB/km"
        )));
    }
    let exponent = -fiber_loss * distance / 10.0 * std::f64::consts::LN_10;
    Ok(-exponent.exp_m1())
}

/// Coefficients `(cosh r, sinh r)` of the two-mode-squeezing Bogoliubov map
/// `b₁ → cosh r · b₁ + i sinh r · C†`.
pub fn squeezing_coefficients(r: f64) -> (f64, f64) {
    (r.cosh(), r.sinh())
}

/// Coefficients `(√(1−W), √W)` of the state-transfer map
/// `b₂ → √(1−W) b₂ + i√W C`.
pub fn transfer_coefficients(w: f64) -> (f64, f64) {
    ((1.0 - w).sqrt(), w.sqrt())
}

/// Covariance matrix of `(b₁, b₂)` after squeezing, loss and transfer.
pub fn subsystem_cm(p: &PulseParams) -> CovarianceMatrix {
    let wt = p.w * p.transmittance();
    let a = 0.5 * (2.0 * p.r).cosh();
    let b = wt * p.r.sinh().powi(2) + 0.5;
    let c = 0.5 * wt.sqrt() * (2.0 * p.r).sinh();
    #[rustfmt::skip]
    let m = DMatrix::from_row_slice(4, 4, &[
        a,   0.0, -c,  0.0,
        0.0, a,   0.0, c,
        -c,  0.0, b,   0.0,
        0.0, c,   0.0, b,
    ]);
    CovarianceMatrix::new(m).expect("finite 4x4 block matrix")
}

/// Logarithmic negativity between `b₁` and `b₂`.
pub fn e12(p: &PulseParams) -> Result<f64> {
    subsystem_cm(p).log_negativity()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const TWO_PI: f64 = 2.0 * PI;

    fn params(r: f64, w: f64, refl: f64) -> PulseParams {
        PulseParams::new(r, w, refl).unwrap()
    }

    #[test]
    fn validation() {
        assert!(PulseParams::new(-0.1, 0.5, 0.5).is_err());
        assert!(PulseParams::new(0.1, 1.2, 0.5).is_err());
        assert!(PulseParams::new(0.1, 0.5, -0.5).is_err());
        assert!(PulseParams::new(f64::NAN, 0.5, 0.5).is_err());
        assert!(PulseParams::new(1e4, 0.5, 0.5).is_err());
        assert!(PulseParams::new(0.0, 0.0, 1.0).is_ok());
    }

    #[test]
    fn squeeze_parameter_values() {
        assert_eq!(squeeze_parameter(1e6, 1e9, 0.0).unwrap(), 0.0);
        // 𝒢τ = 1 compared with the textbook logarithm form
        let r = squeeze_parameter(1.0, 2.0, 1.0).unwrap();
        let e = 1f64.exp();
        assert_relative_eq!(r, (e + (e * e - 1.0).sqrt()).ln(), max_relative = 1e-15);
        assert!((r - 1.6575).abs() < 1e-4);
        // far in the exponential regime r → 𝒢τ + ln 2
        let r = squeeze_parameter(1.0, 2.0, 40.0).unwrap();
        assert_relative_eq!(r, 40.0 + 2f64.ln(), max_relative = 1e-15);
        // tiny 𝒢τ: r ≈ √(2x)
        let r = squeeze_parameter(1e-6, 2.0, 1.0).unwrap();
        assert_relative_eq!(r, (2e-12f64).sqrt(), max_relative = 1e-6);
        assert!(squeeze_parameter(1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn squeeze_parameter_round_trips_through_cosh() {
        for x in [1e-3, 0.3, 1.49, 5.0] {
            let r = squeeze_parameter(1.0, 2.0, x).unwrap();
            assert_relative_eq!(r.cosh().ln(), x, max_relative = 1e-12);
        }
    }

    #[test]
    fn transfer_efficiency_values() {
        assert_eq!(transfer_efficiency(1e6, 1e9, 0.0).unwrap(), 0.0);
        let w = transfer_efficiency(1.0, 2.0, 1.0).unwrap();
        assert_relative_eq!(w, 1.0 - (-2f64).exp(), max_relative = 1e-15);
        assert_eq!(transfer_efficiency(1.0, 2.0, 1e3).unwrap(), 1.0);
        let mut last = 0.0;
        for tau in [0.1, 0.5, 1.0, 3.0] {
            let w = transfer_efficiency(1.0, 2.0, tau).unwrap();
            assert!(w > last && w < 1.0);
            last = w;
        }
    }

    #[test]
    fn fiber_loss_conversion() {
        assert_eq!(loss_from_distance(0.0, 0.2).unwrap(), 0.0);
        assert_relative_eq!(
            loss_from_distance(10.0, 0.2).unwrap(),
            1.0 - 10f64.powf(-0.2),
            max_relative = 1e-14
        );
        assert!((loss_from_distance(10.0, 0.2).unwrap() - 0.369).abs() < 1e-3);
        assert_relative_eq!(loss_from_distance(50.0, 0.2).unwrap(), 0.9, max_relative = 1e-14);
        assert!(loss_from_distance(-1.0, 0.2).is_err());
    }

    #[test]
    fn lab_pipeline_reproduces_quoted_values() {
        let d = PulseLabParams::default().derive().unwrap();
        assert!((d.g_blue / TWO_PI / 3.93e6 - 1.0).abs() < 0.01);
        assert!((d.params.r() - 2.18).abs() < 0.02, "r = {}", d.params.r());
        assert!((d.params.w() - 0.95).abs() < 0.01, "W = {}", d.params.w());
        assert_eq!(d.params.reflectivity(), 0.0);
        let far = PulseLabParams {
            distance: 50.0,
            ..Default::default()
        };
        assert_relative_eq!(far.derive().unwrap().params.reflectivity(), 0.9, max_relative = 1e-14);
    }

    #[test]
    fn lab_validation() {
        let bad = PulseLabParams {
            tau_b: 0.0,
            ..Default::default()
        };
        assert!(bad.derive().is_err());
        let bad = PulseLabParams {
            distance: -3.0,
            ..Default::default()
        };
        assert!(bad.derive().is_err());
    }

    #[test]
    fn coefficients_preserve_commutators() {
        for (g, kappa, tau) in [(1.0, 2.0, 0.3), (3.93e6 * TWO_PI, 1.3e9 * TWO_PI, 10e-6)] {
            let x = 2.0 * g * g / kappa * tau;
            let (u, v) = squeezing_coefficients(squeeze_parameter(g, kappa, tau).unwrap());
            // e^{2𝒢τ} − (e^{2𝒢τ} − 1) = 1
            assert_relative_eq!(u * u, (2.0 * x).exp(), max_relative = 1e-12);
            assert_relative_eq!(u * u - v * v, 1.0, max_relative = 1e-12);
            let (p, q) = transfer_coefficients(transfer_efficiency(g, kappa, tau).unwrap());
            // e^{−2𝒢τ} + (1 − e^{−2𝒢τ}) = 1
            assert_relative_eq!(p * p, (-4.0 * g * g / kappa * tau).exp(), max_relative = 1e-12);
            assert_relative_eq!(p * p + q * q, 1.0, max_relative = 1e-15);
        }
    }

    #[test]
    fn unsqueezed_state_is_vacuum() {
        let v = subsystem_cm(&params(0.0, 0.7, 0.3));
        assert_eq!(v, CovarianceMatrix::vacuum(2));
        assert_eq!(e12(&params(0.0, 0.7, 0.3)).unwrap(), 0.0);
    }

    #[test]
    fn lossless_perfect_transfer_is_tmsv() {
        for r in [0.1, 0.5, 0.95, 1.44, 2.18] {
            let v = subsystem_cm(&params(r, 1.0, 0.0));
            let s = CovarianceMatrix::two_mode_squeezed(r);
            // same state up to the sign convention on the cross block
            for i in 0..4 {
                for j in 0..4 {
                    assert_relative_eq!(v.get(i, j).abs(), s.get(i, j).abs(), max_relative = 1e-14);
                }
            }
            assert!((e12(&params(r, 1.0, 0.0)).unwrap() - 2.0 * r).abs() < 1e-12);
        }
    }

    #[test]
    fn reference_point_entries() {
        let v = subsystem_cm(&params(0.95, 0.55, 0.0));
        assert!((v.get(0, 0) - 1.7089).abs() < 1e-3);
        assert!((v.get(2, 2) - 1.1649).abs() < 1e-3);
        assert!((v.get(0, 2).abs() - 1.2119).abs() < 1e-3);
        assert!(v.get(0, 2) < 0.0 && v.get(1, 3) > 0.0);
        assert!((e12(&params(0.95, 0.55, 0.0)).unwrap() - 0.942).abs() < 1e-3);
    }

    // Independent two-mode formula: 2ν̃₋² = Δ̃ − √(Δ̃² − 4 det V) with
    // Δ̃ = a² + b² + 2c² for the symmetric block structure used here.
    fn e12_oracle(r: f64, wt: f64) -> f64 {
        let a = 0.5 * (2.0 * r).cosh();
        let b = wt * r.sinh().powi(2) + 0.5;
        let c = 0.5 * wt.sqrt() * (2.0 * r).sinh();
        let det = (a * b - c * c).powi(2);
        let delta = a * a + b * b + 2.0 * c * c;
        let nu = ((delta - (delta * delta - 4.0 * det).sqrt()) / 2.0).sqrt();
        (-(2.0 * nu).ln()).max(0.0)
    }

    #[test]
    fn matches_independent_formula() {
        for r in [0.3, 0.95, 1.44] {
            for wt in [0.05, 0.3, 0.8] {
                let e = e12(&params(r, wt, 0.0)).unwrap();
                assert!((e - e12_oracle(r, wt)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn strictly_decreasing_in_reflectivity() {
        for (r, w) in [(2.18, 0.95), (1.44, 0.80), (0.95, 0.55)] {
            let mut last = f64::INFINITY;
            for k in 0..=100 {
                let refl = k as f64 / 100.0;
                let e = e12(&params(r, w, refl)).unwrap();
                if k < 100 {
                    assert!(e < last, "r={r} W={w} R={refl}");
                }
                last = e;
            }
            assert!(last < 1e-10);
        }
    }

    #[test]
    fn only_wt_product_matters() {
        let a = e12(&params(1.1, 0.6, 0.5)).unwrap();
        let b = e12(&params(1.1, 0.3, 0.0)).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-14);
    }

    proptest! {
        #[test]
        fn cm_is_physical(r in 0.0f64..3.0, w in 0.0f64..=1.0, refl in 0.0f64..=1.0) {
            prop_assert!(subsystem_cm(&params(r, w, refl)).check_physicality(1e-10));
        }

        #[test]
        fn monotone_in_w_and_r(
            r in 0.01f64..2.5,
            w in 0.01f64..0.99,
            refl in 0.0f64..0.99,
            dr in 0.0f64..0.5,
            dw in 0.0f64..0.5,
        ) {
            let base = e12(&params(r, w, refl)).unwrap();
            let more_w = e12(&params(r, (w + dw).min(1.0), refl)).unwrap();
            let more_r = e12(&params(r + dr, w, refl)).unwrap();
            prop_assert!(more_w >= base - 1e-12);
            prop_assert!(more_r >= base - 1e-12);
        }

        #[test]
        fn cross_block_sign_is_irrelevant(r in 0.0f64..2.5, wt in 0.0f64..=1.0) {
            let v = subsystem_cm(&params(r, wt, 0.0));
            let mut flipped = v.clone().into_matrix();
            for (i, j) in [(0, 2), (2, 0), (1, 3), (3, 1)] {
                flipped[(i, j)] = -flipped[(i, j)];
            }
            let f = CovarianceMatrix::new(flipped).unwrap().log_negativity().unwrap();
            prop_assert!((f - v.log_negativity().unwrap()).abs() < 1e-12);
        }
    }
}
