//! Cascaded steady-state model: a dispersive optomechanical cavity `c` with a
//! megahertz resonator `b`, whose output is carried by a waveguide into a
//! remote Brillouin node with optical modes `a₁`, `a₂` and a gigahertz phonon
//! `m`.
//!
//! Quadrature ordering of the 10-dimensional fluctuation vector is
//! `(c, b, a₁, a₂, m)`, each as `(X, Y)`.

mod lyapunov;
mod matrices;
mod steady;

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::gaussian::{CovarianceMatrix, DEFAULT_PHYSICALITY_TOL};

pub use lyapunov::{
    check_stability, relative_residual, solve_lyapunov, solve_lyapunov_cascaded, solve_sylvester, Stability,
};
pub use matrices::{build_diffusion, build_drift};
pub use steady::{solve_steady_state, SteadyState};

pub const MODE_C: usize = 0;
pub const MODE_B: usize = 1;
pub const MODE_A1: usize = 2;
pub const MODE_A2: usize = 3;
pub const MODE_M: usize = 4;

/// Number of quadratures belonging to the upstream node (`c`, `b`).
pub const UPSTREAM_DIM: usize = 4;

/// Parameters of the cascaded system. All rates and frequencies in rad/s,
/// temperatures in K, wavelengths in m.
///
/// The `a₂` pump is resonant (`Δ₂ = 0`), which forces `Δ_m = Δ₁`; neither is
/// a free parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CascadedParams {
    pub omega_b: f64,
    pub omega_m: f64,
    pub kappa_c: f64,
    pub kappa_a: f64,
    pub gamma_b: f64,
    pub gamma_m: f64,
    /// Bare dispersive coupling.
    pub g_c: f64,
    /// Bare triple-resonant coupling.
    pub g: f64,
    /// Effective detuning of cavity `c` from its pump.
    pub delta_c_tilde: f64,
    pub delta_1: f64,
    /// Waveguide coupling efficiency.
    pub eta: f64,
    /// Required `|G_c|`.
    pub target_gc: f64,
    /// Required `|G₂|`.
    pub target_g2: f64,
    pub t1: f64,
    pub t2: f64,
    pub lambda_c: f64,
    pub lambda_a1: f64,
    pub lambda_a2: f64,
}

impl Default for CascadedParams {
    fn default() -> Self {
        let two_pi = 2.0 * PI;
        let omega_b = two_pi * 10e6;
        Self {
            omega_b,
            omega_m: two_pi * 8.2e9,
            kappa_c: 2.0 * omega_b,
            kappa_a: 2.0 * omega_b,
            gamma_b: 1e-4 * omega_b,
            gamma_m: 0.5 * omega_b,
            g_c: two_pi * 100.0,
            g: two_pi * 20.0,
            delta_c_tilde: omega_b,
            delta_1: -omega_b,
            eta: 1.0,
            target_gc: two_pi * 3e6,
            target_g2: two_pi * 3e6,
            t1: 0.01,
            t2: 0.01,
            lambda_c: 1550e-9,
            lambda_a1: 1550e-9,
            lambda_a2: 1550e-9,
        }
    }
}

impl CascadedParams {
    pub fn delta_2(&self) -> f64 {
        0.0
    }

    pub fn delta_m(&self) -> f64 {
        self.delta_1
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("omega_b", self.omega_b),
            ("omega_m", self.omega_m),
            ("kappa_c", self.kappa_c),
            ("kappa_a", self.kappa_a),
            ("gamma_b", self.gamma_b),
            ("gamma_m", self.gamma_m),
            ("lambda_c", self.lambda_c),
            ("lambda_a1", self.lambda_a1),
            ("lambda_a2", self.lambda_a2),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        let non_negative = [
            ("g_c", self.g_c),
            ("g", self.g),
            ("target_gc", self.target_gc),
            ("target_g2", self.target_g2),
            ("t1", self.t1),
            ("t2", self.t2),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Domain(format!("{name} must be non-negative, got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::Domain(format!("eta must lie in [0, 1], got {}", self.eta)));
        }
        if !self.delta_c_tilde.is_finite() || !self.delta_1.is_finite() {
            return Err(Error::Domain("detunings must be finite".into()));
        }
        Ok(())
    }
}

/// Everything produced by one steady-state solve.
#[derive(Debug, Clone)]
pub struct CascadedSolution {
    pub steady: SteadyState,
    pub drift: DMatrix<f64>,
    pub diffusion: DMatrix<f64>,
    pub stability: Stability,
    /// `None` when the drift matrix is unstable.
    pub covariance: Option<CovarianceMatrix>,
}

/// Runs steady state, drift/diffusion assembly, the stability test and, when
/// stable, the Lyapunov solve.
pub fn solve(p: &CascadedParams) -> Result<CascadedSolution> {
    p.validate()?;
    let steady = solve_steady_state(p)?;
    let drift = build_drift(p, &steady);
    let diffusion = build_diffusion(p)?;
    let stability = check_stability(&drift)?;
    let covariance = if stability.all() {
        Some(solve_lyapunov_cascaded(&drift, &diffusion)?)
    } else {
        None
    };
    Ok(CascadedSolution {
        steady,
        drift,
        diffusion,
        stability,
        covariance,
    })
}

/// Entanglement and excitation figures of merit at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntanglementReport {
    pub e_cb: Option<f64>,
    pub e_a1b: Option<f64>,
    pub e_mb: Option<f64>,
    pub dn_b: Option<f64>,
    pub dn_a1: Option<f64>,
    pub dn_m: Option<f64>,
    pub stable: bool,
    /// Worst relative residual of the mean-field equations.
    pub steady_residual: f64,
    /// `‖AV + VAᵀ + D‖_F / ‖D‖_F`, when stable.
    pub lyapunov_residual: Option<f64>,
    /// Uncertainty-principle check of the full covariance matrix.
    pub physical: Option<bool>,
}

pub fn entanglement_report(p: &CascadedParams) -> Result<EntanglementReport> {
    let sol = solve(p)?;
    let steady_residual = sol.steady.residuals(p).into_iter().fold(0.0, f64::max);
    let Some(v) = sol.covariance.as_ref() else {
        return Ok(EntanglementReport {
            e_cb: None,
            e_a1b: None,
            e_mb: None,
            dn_b: None,
            dn_a1: None,
            dn_m: None,
            stable: false,
            steady_residual,
            lyapunov_residual: None,
            physical: None,
        });
    };
    let en = |a: usize| v.extract_bipartite(a, MODE_B)?.log_negativity();
    Ok(EntanglementReport {
        e_cb: Some(en(MODE_C)?),
        e_a1b: Some(en(MODE_A1)?),
        e_mb: Some(en(MODE_M)?),
        dn_b: Some(v.excitation_number(MODE_B)?),
        dn_a1: Some(v.excitation_number(MODE_A1)?),
        dn_m: Some(v.excitation_number(MODE_M)?),
        stable: true,
        steady_residual,
        lyapunov_residual: Some(relative_residual(&sol.drift, v.matrix(), &sol.diffusion)),
        physical: Some(v.check_physicality(DEFAULT_PHYSICALITY_TOL)),
    })
}

#[cfg(test)]
mod tests;
