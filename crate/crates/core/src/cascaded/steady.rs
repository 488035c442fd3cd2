use num_complex::Complex64;

use super::CascadedParams;
use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 10_000;
const TOLERANCE: f64 = 1e-12;
const DAMPING: f64 = 0.5;

/// Mean-field amplitudes and the linearized couplings they induce.
///
/// Pump phases are fixed by taking `ε` and `ε₂` real and positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    pub avg_c: Complex64,
    pub avg_b: Complex64,
    pub avg_a1: Complex64,
    pub avg_a2: Complex64,
    pub avg_m: Complex64,
    pub coupling_c: Complex64,
    pub coupling_1: Complex64,
    pub coupling_2: Complex64,
    pub coupling_m: Complex64,
    pub epsilon: f64,
    pub epsilon_2: f64,
    pub iterations: usize,
}

const I: Complex64 = Complex64::new(0.0, 1.0);

fn relative(terms: &[Complex64]) -> f64 {
    let sum: Complex64 = terms.iter().sum();
    let scale = terms.iter().map(|t| t.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        0.0
    } else {
        sum.norm() / scale
    }
}

impl SteadyState {
    /// Relative residuals of the five mean-field equations
    /// `(c, b, a₁, a₂, m)`, each normalized by its largest term.
    pub fn residuals(&self, p: &CascadedParams) -> [f64; 5] {
        let (c, b, a1, a2, m) = (self.avg_c, self.avg_b, self.avg_a1, self.avg_a2, self.avg_m);
        [
            relative(&[
                -(I * p.delta_c_tilde + 0.5 * p.kappa_c) * c,
                Complex64::from(self.epsilon),
            ]),
            relative(&[-(I * p.omega_b + 0.5 * p.gamma_b) * b, I * p.g_c * c.norm_sqr()]),
            relative(&[
                -(I * p.delta_1 + 0.5 * p.kappa_a) * a1,
                -I * p.g * a2 * m,
                feed_through(p, c, self.epsilon),
            ]),
            relative(&[
                -(I * p.delta_2() + 0.5 * p.kappa_a) * a2,
                -I * p.g * a1 * m.conj(),
                Complex64::from(self.epsilon_2),
            ]),
            relative(&[-(I * p.delta_m() + 0.5 * p.gamma_m) * m, -I * p.g * a1 * a2.conj()]),
        ]
    }
}

/// Mean field entering `a₁` through the waveguide:
/// `√(κ_a κ_c η)⟨c⟩ − √(η κ_a/κ_c) ε`.
fn feed_through(p: &CascadedParams, c: Complex64, epsilon: f64) -> Complex64 {
    (p.kappa_a * p.kappa_c * p.eta).sqrt() * c - (p.eta * p.kappa_a / p.kappa_c).sqrt() * epsilon
}

/// Solves the `(a₁, m)` pair exactly for a given `⟨a₂⟩`.
fn solve_pair(p: &CascadedParams, source: Complex64, a2: Complex64) -> Result<(Complex64, Complex64)> {
    // [ -(iΔ₁ + κ_a/2)   -i g a₂          ] [a₁]   [-S]
    // [ -i g a₂*         -(iΔ_m + γ_m/2)  ] [m ] = [ 0]
    let m11 = -(I * p.delta_1 + 0.5 * p.kappa_a);
    let m12 = -I * p.g * a2;
    let m21 = -I * p.g * a2.conj();
    let m22 = -(I * p.delta_m() + 0.5 * p.gamma_m);
    let det = m11 * m22 - m12 * m21;
    let scale = (m11 * m22).norm().max((m12 * m21).norm());
    if det.norm() <= 1e-14 * scale || det.norm() == 0.0 {
        return Err(Error::SingularSystem);
    }
    let rhs = -source;
    let a1 = rhs * m22 / det;
    let m = -rhs * m21 / det;
    Ok((a1, m))
}

/// Mean-field solution at fixed `|G_c|` and `|G₂|`.
///
/// `⟨c⟩` and `⟨b⟩` follow in closed form; `(⟨a₁⟩, ⟨m⟩)` are solved exactly
/// given `⟨a₂⟩`, and `⟨a₂⟩` is found by a damped fixed point in which `ε₂` is
/// re-chosen every step so that `|⟨a₂⟩|` hits its target.
pub fn solve_steady_state(p: &CascadedParams) -> Result<SteadyState> {
    let (epsilon, avg_c) = if p.target_gc == 0.0 {
        (0.0, Complex64::new(0.0, 0.0))
    } else {
        if p.g_c == 0.0 {
            return Err(Error::UnreachableTarget("nonzero |G_c| requested with g_c = 0".into()));
        }
        let amplitude = p.target_gc / p.g_c;
        let epsilon = amplitude * (0.5 * p.kappa_c).hypot(p.delta_c_tilde);
        (epsilon, epsilon / Complex64::new(0.5 * p.kappa_c, p.delta_c_tilde))
    };
    let avg_b = I * p.g_c * avg_c.norm_sqr() / Complex64::new(0.5 * p.gamma_b, p.omega_b);
    let source = feed_through(p, avg_c, epsilon);

    let half_kappa = 0.5 * p.kappa_a;
    let (avg_a1, avg_a2, avg_m, epsilon_2, iterations) = if p.target_g2 == 0.0 {
        // a₂ = 0 decouples m from a₁, so no back-action reaches a₂ and ε₂ = 0
        let (a1, m) = solve_pair(p, source, Complex64::new(0.0, 0.0))?;
        (a1, Complex64::new(0.0, 0.0), m, 0.0, 0)
    } else {
        if p.g == 0.0 {
            return Err(Error::UnreachableTarget("nonzero |G_2| requested with g = 0".into()));
        }
        let target = p.target_g2 / p.g;
        let reach = half_kappa * target;
        let mut a2 = Complex64::new(target, 0.0);
        let mut last_change = f64::INFINITY;
        let mut converged = None;
        for it in 1..=MAX_ITERATIONS {
            let (a1, m) = solve_pair(p, source, a2)?;
            let z = -I * p.g * a1 * m.conj();
            let disc = reach * reach - z.im * z.im;
            if disc < 0.0 {
                return Err(Error::UnreachableTarget(
                    "back-action on a2 exceeds what a real pump can compensate".into(),
                ));
            }
            let eps2 = -z.re + disc.sqrt();
            if eps2 < 0.0 {
                return Err(Error::UnreachableTarget(
                    "required a2 pump amplitude is negative".into(),
                ));
            }
            let candidate = (eps2 + z) / half_kappa;
            last_change = (candidate - a2).norm() / a2.norm();
            if last_change < TOLERANCE {
                converged = Some((candidate, eps2, it));
                break;
            }
            a2 = a2 * (1.0 - DAMPING) + candidate * DAMPING;
        }
        let Some((a2, eps2, it)) = converged else {
            return Err(Error::NonConvergence {
                iterations: MAX_ITERATIONS,
                last_change,
            });
        };
        let (a1, m) = solve_pair(p, source, a2)?;
        (a1, a2, m, eps2, it)
    };

    Ok(SteadyState {
        avg_c,
        avg_b,
        avg_a1,
        avg_a2,
        avg_m,
        coupling_c: p.g_c * avg_c,
        coupling_1: p.g * avg_a1,
        coupling_2: p.g * avg_a2,
        coupling_m: p.g * avg_m,
        epsilon,
        epsilon_2,
        iterations,
    })
}
