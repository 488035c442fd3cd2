use nalgebra::DMatrix;

use super::{CascadedParams, SteadyState};
use crate::error::Result;
use crate::units::{thermal_occupation, AngularFrequency};

/// Drift matrix of the linearized quadrature dynamics `u̇ = A u + n`.
///
/// Rows 1–4 (upstream) never reference the downstream quadratures; the only
/// upstream→downstream link is the `√(κ_a κ_c η)` waveguide feed into `a₁`.
pub fn build_drift(p: &CascadedParams, ss: &SteadyState) -> DMatrix<f64> {
    let (gc_re, gc_im) = (ss.coupling_c.re, ss.coupling_c.im);
    let (g1_re, g1_im) = (ss.coupling_1.re, ss.coupling_1.im);
    let (g2_re, g2_im) = (ss.coupling_2.re, ss.coupling_2.im);
    let (gm_re, gm_im) = (ss.coupling_m.re, ss.coupling_m.im);
    let hk_c = 0.5 * p.kappa_c;
    let hk_a = 0.5 * p.kappa_a;
    let hg_b = 0.5 * p.gamma_b;
    let hg_m = 0.5 * p.gamma_m;
    let dc = p.delta_c_tilde;
    let d1 = p.delta_1;
    let d2 = p.delta_2();
    let dm = p.delta_m();
    let feed = (p.kappa_a * p.kappa_c * p.eta).sqrt();

    #[rustfmt::skip]
    let rows = [
        -hk_c,        dc,          -2.0 * gc_im, 0.0,   0.0,    0.0,    0.0,    0.0,    0.0,    0.0,
        -dc,          -hk_c,       2.0 * gc_re,  0.0,   0.0,    0.0,    0.0,    0.0,    0.0,    0.0,
        0.0,          0.0,         -hg_b,        p.omega_b, 0.0, 0.0,   0.0,    0.0,    0.0,    0.0,
        2.0 * gc_re,  2.0 * gc_im, -p.omega_b,   -hg_b, 0.0,    0.0,    0.0,    0.0,    0.0,    0.0,
        feed,         0.0,         0.0,          0.0,   -hk_a,  d1,     gm_im,  gm_re,  g2_im,  g2_re,
        0.0,          feed,        0.0,          0.0,   -d1,    -hk_a,  -gm_re, gm_im,  -g2_re, g2_im,
        0.0,          0.0,         0.0,          0.0,   -gm_im, gm_re,  -hk_a,  d2,     g1_im,  -g1_re,
        0.0,          0.0,         0.0,          0.0,   -gm_re, -gm_im, -d2,    -hk_a,  -g1_re, -g1_im,
        0.0,          0.0,         0.0,          0.0,   -g2_im, g2_re,  g1_im,  -g1_re, -hg_m,  dm,
        0.0,          0.0,         0.0,          0.0,   -g2_re, -g2_im, -g1_re, -g1_im, -dm,    -hg_m,
    ];
    DMatrix::from_row_slice(10, 10, &rows)
}

/// Diffusion matrix of the input noises.
///
/// The `a₁` input is `√(1−η) a₁,in − √η c_in`, so its noise is partly the
/// upstream cavity's vacuum/thermal noise and is correlated with `c`'s own
/// input (the off-diagonal `−√(κ_a κ_c η)(n_c + ½)` blocks). The mechanical
/// occupations come from `(ω_b, T1)` and `(ω_m, T2)`; the optical ones are
/// evaluated at the optical frequencies and vanish in practice.
pub fn build_diffusion(p: &CascadedParams) -> Result<DMatrix<f64>> {
    let optical = |lambda: f64, t: f64| thermal_occupation(AngularFrequency::from_wavelength(lambda), t);
    let n_c = optical(p.lambda_c, p.t1)?;
    let n_a1 = optical(p.lambda_a1, p.t2)?;
    let n_a2 = optical(p.lambda_a2, p.t2)?;
    let n_b = thermal_occupation(AngularFrequency(p.omega_b), p.t1)?;
    let n_m = thermal_occupation(AngularFrequency(p.omega_m), p.t2)?;

    let diag = [
        p.kappa_c * (n_c + 0.5),
        p.gamma_b * (n_b + 0.5),
        p.kappa_a * ((1.0 - p.eta) * (n_a1 + 0.5) + p.eta * (n_c + 0.5)),
        p.kappa_a * (n_a2 + 0.5),
        p.gamma_m * (n_m + 0.5),
    ];
    let mut d = DMatrix::zeros(10, 10);
    for (mode, value) in diag.into_iter().enumerate() {
        d[(2 * mode, 2 * mode)] = value;
        d[(2 * mode + 1, 2 * mode + 1)] = value;
    }
    let cross = -(p.kappa_a * p.kappa_c * p.eta).sqrt() * (n_c + 0.5);
    for k in 0..2 {
        d[(k, 4 + k)] = cross;
        d[(4 + k, k)] = cross;
    }
    Ok(d)
}
