//! Physical constants and the handful of laboratory-to-model conversions the
//! two schemes need: Bose occupations, drive amplitudes and linearized
//! couplings.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// CODATA 2018 exact/recommended values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalQuantities {
    /// J·s
    pub hbar: f64,
    /// J/K
    pub k_boltzmann: f64,
    /// m/s
    pub speed_of_light: f64,
}

pub const CODATA: PhysicalQuantities = PhysicalQuantities {
    hbar: 1.054_571_817e-34,
    k_boltzmann: 1.380_649e-23,
    speed_of_light: 299_792_458.0,
};

/// An angular frequency in rad/s.
///
/// Resonances are positive; detunings may carry either sign.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct AngularFrequency(pub f64);

impl AngularFrequency {
    pub fn from_hz(hz: f64) -> Self {
        Self(2.0 * PI * hz)
    }

    /// Optical carrier frequency of light with the given vacuum wavelength.
    pub fn from_wavelength(meters: f64) -> Self {
        Self(2.0 * PI * CODATA.speed_of_light / meters)
    }

    pub fn rad_per_s(self) -> f64 {
        self.0
    }

    pub fn hz(self) -> f64 {
        self.0 / (2.0 * PI)
    }
}

impl From<AngularFrequency> for f64 {
    fn from(w: AngularFrequency) -> f64 {
        w.0
    }
}

/// Bose–Einstein occupation `1 / (exp(ħω/k_B T) - 1)`.
///
/// Exactly zero at `T = 0`; underflows cleanly to zero for optical modes at
/// cryogenic temperatures.
pub fn thermal_occupation(omega: AngularFrequency, temperature: f64) -> Result<f64> {
    if !(omega.0 > 0.0) {
        return Err(Error::Domain(format!(
            "thermal occupation needs a positive frequency, got {} rad/s",
            omega.0
        )));
    }
    if !(temperature >= 0.0) {
        return Err(Error::Domain(format!(
            "temperature must be non-negative, got {temperature} K"
        )));
    }
    if temperature == 0.0 {
        return Ok(0.0);
    }
    let x = CODATA.hbar * omega.0 / (CODATA.k_boltzmann * temperature);
    Ok(1.0 / x.exp_m1())
}

/// Drive amplitude `ε = sqrt(κ P / ħ ω_l)` for a laser of power `P` (W) at
/// angular frequency `ω_l` pumping a cavity of linewidth `κ` (rad/s).
pub fn drive_amplitude(power: f64, drive_omega: AngularFrequency, kappa: f64) -> Result<f64> {
    if !(power >= 0.0) {
        return Err(Error::Domain(format!(
            "drive power must be non-negative, got {power} W"
        )));
    }
    if !(kappa > 0.0) || !(drive_omega.0 > 0.0) {
        return Err(Error::Domain(
            "drive amplitude needs positive linewidth and drive frequency".into(),
        ));
    }
    Ok((kappa * power / (CODATA.hbar * drive_omega.0)).sqrt())
}

/// Linearized optomechanical coupling `G = g0 |⟨c⟩|` reached by a drive of
/// the given power, with the intracavity amplitude
/// `|⟨c⟩| = ε / |κ/2 + iΔ|`.
pub fn pulse_coupling(power: f64, wavelength: f64, kappa: f64, detuning: f64, g0: f64) -> Result<f64> {
    if !(wavelength > 0.0) || !(g0 >= 0.0) {
        return Err(Error::Domain(
            "pulse coupling needs a positive wavelength and non-negative g0".into(),
        ));
    }
    let eps = drive_amplitude(power, AngularFrequency::from_wavelength(wavelength), kappa)?;
    let amplitude = eps / (0.5 * kappa).hypot(detuning);
    Ok(g0 * amplitude)
}
