use super::*;
use approx::assert_relative_eq;
use num_complex::Complex64;
use proptest::prelude::*;

const TWO_PI: f64 = 2.0 * PI;

fn zero_couplings() -> SteadyState {
    let z = Complex64::new(0.0, 0.0);
    SteadyState {
        avg_c: z,
        avg_b: z,
        avg_a1: z,
        avg_a2: z,
        avg_m: z,
        coupling_c: z,
        coupling_1: z,
        coupling_2: z,
        coupling_m: z,
        epsilon: 0.0,
        epsilon_2: 0.0,
        iterations: 0,
    }
}

fn detuned_point() -> CascadedParams {
    let p = CascadedParams::default();
    CascadedParams {
        eta: 0.9,
        delta_c_tilde: 0.75 * p.omega_b,
        ..p
    }
}

#[test]
fn no_drive_and_no_feed_leaves_downstream_dark() {
    let p = CascadedParams {
        eta: 0.0,
        target_gc: 0.0,
        ..Default::default()
    };
    let ss = solve_steady_state(&p).unwrap();
    assert_eq!(ss.avg_a1.norm(), 0.0);
    assert_eq!(ss.avg_m.norm(), 0.0);
    assert_eq!(ss.coupling_1.norm(), 0.0);
    assert_eq!(ss.coupling_m.norm(), 0.0);
    assert_relative_eq!(ss.coupling_2.norm(), p.target_g2, max_relative = 1e-12);
}

#[test]
fn vanishing_bare_coupling_cannot_reach_target() {
    let p = CascadedParams {
        g: 0.0,
        ..Default::default()
    };
    assert!(matches!(solve_steady_state(&p), Err(Error::UnreachableTarget(_))));
    let p = CascadedParams {
        g_c: 0.0,
        ..Default::default()
    };
    assert!(matches!(solve_steady_state(&p), Err(Error::UnreachableTarget(_))));
}

#[test]
fn steady_state_at_reference_point() {
    let p = CascadedParams::default();
    let ss = solve_steady_state(&p).unwrap();
    for r in ss.residuals(&p) {
        assert!(r < 1e-10, "residuals {:?}", ss.residuals(&p));
    }
    assert_relative_eq!(ss.coupling_c.norm(), p.target_gc, max_relative = 1e-12);
    assert_relative_eq!(ss.coupling_2.norm(), p.target_g2, max_relative = 1e-10);
    assert_relative_eq!(ss.coupling_c.norm(), p.g_c * ss.avg_c.norm(), max_relative = 1e-10);
    assert_relative_eq!(ss.coupling_1.norm(), p.g * ss.avg_a1.norm(), max_relative = 1e-10);
    assert_relative_eq!(ss.coupling_m.norm(), p.g * ss.avg_m.norm(), max_relative = 1e-10);
    // order-of-magnitude: |a₁| ≈ ε / |iΔ₁ + κ_a/2| with the reflected pump ε
    let estimate = p.g * ss.epsilon / (0.5 * p.kappa_a).hypot(p.delta_1);
    let g1 = ss.coupling_1.norm();
    assert!(g1 > 0.3 * estimate && g1 < 3.0 * estimate);
    let mhz = g1 / TWO_PI / 1e6;
    assert!(mhz > 0.1 && mhz < 10.0, "G1/2pi = {mhz} MHz");
    assert!(ss.epsilon > 0.0 && ss.epsilon_2 > 0.0);
}

#[test]
fn drift_without_couplings_is_block_diagonal() {
    let p = CascadedParams {
        eta: 0.0,
        ..Default::default()
    };
    let a = build_drift(&p, &zero_couplings());
    for i in 0..10 {
        for j in 0..10 {
            if i / 2 != j / 2 {
                assert_eq!(a[(i, j)], 0.0, "({i},{j})");
            }
        }
    }
    assert_eq!(a[(0, 0)], -0.5 * p.kappa_c);
    assert_eq!(a[(0, 1)], p.delta_c_tilde);
    assert_eq!(a[(1, 0)], -p.delta_c_tilde);
    assert_eq!(a[(2, 3)], p.omega_b);
    assert_eq!(a[(8, 9)], p.delta_1);
    assert_eq!(a[(9, 8)], -p.delta_1);
    assert_eq!(a[(6, 7)], 0.0);
}

#[test]
fn drift_feed_through_only() {
    let p = CascadedParams::default();
    let a = build_drift(&p, &zero_couplings());
    let feed = (p.kappa_a * p.kappa_c).sqrt();
    for i in 0..10 {
        for j in 0..10 {
            if i / 2 == j / 2 {
                continue;
            }
            let expected = if (i, j) == (4, 0) || (i, j) == (5, 1) {
                feed
            } else {
                0.0
            };
            assert_eq!(a[(i, j)], expected, "({i},{j})");
        }
    }
}

#[test]
fn reference_drift_is_stable() {
    let p = CascadedParams::default();
    let ss = solve_steady_state(&p).unwrap();
    let a = build_drift(&p, &ss);
    let s = check_stability(&a).unwrap();
    assert!(s.full && s.upstream && s.downstream);
    // one-way: no downstream quadrature feeds the upstream rows
    for i in 0..4 {
        for j in 4..10 {
            assert_eq!(a[(i, j)], 0.0);
        }
    }
}

#[test]
fn stability_of_trivial_matrices() {
    let s = check_stability(&(-DMatrix::<f64>::identity(10, 10))).unwrap();
    assert!(s.full && s.upstream && s.downstream);
    let s = check_stability(&DMatrix::<f64>::identity(10, 10)).unwrap();
    assert!(!s.full && !s.upstream && !s.downstream);
}

#[test]
fn diffusion_without_waveguide_has_no_cross_block() {
    let p = CascadedParams {
        eta: 0.0,
        ..Default::default()
    };
    let d = build_diffusion(&p).unwrap();
    for i in 0..4 {
        for j in 4..10 {
            assert_eq!(d[(i, j)], 0.0);
            assert_eq!(d[(j, i)], 0.0);
        }
    }
}

#[test]
fn diffusion_at_zero_temperature() {
    let p = CascadedParams {
        t1: 0.0,
        t2: 0.0,
        ..Default::default()
    };
    let d = build_diffusion(&p).unwrap();
    let diag = [p.kappa_c, p.gamma_b, p.kappa_a, p.kappa_a, p.gamma_m];
    let mut expected = DMatrix::zeros(10, 10);
    for (k, x) in diag.iter().enumerate() {
        expected[(2 * k, 2 * k)] = 0.5 * x;
        expected[(2 * k + 1, 2 * k + 1)] = 0.5 * x;
    }
    let cross = -0.5 * (p.kappa_a * p.kappa_c).sqrt();
    for k in 0..2 {
        expected[(k, 4 + k)] = cross;
        expected[(4 + k, k)] = cross;
    }
    assert_eq!(d, expected);
}

#[test]
fn diffusion_thermal_mechanics() {
    let p = CascadedParams::default();
    let d = build_diffusion(&p).unwrap();
    let expected = p.gamma_b * 20.84;
    assert!((d[(2, 2)] / expected - 1.0).abs() < 0.005);
    assert_eq!(d[(2, 2)], d[(3, 3)]);
    // gigahertz phonon and optical modes are essentially at zero temperature
    assert_relative_eq!(d[(8, 8)], 0.5 * p.gamma_m, max_relative = 1e-15);
    assert_eq!(d[(0, 0)], 0.5 * p.kappa_c);
}

#[test]
fn lyapunov_trivial_cases() {
    let a = DMatrix::<f64>::identity(4, 4) * -0.5;
    let d = DMatrix::<f64>::identity(4, 4);
    let v = solve_lyapunov(&a, &d).unwrap();
    assert!((v.matrix() - DMatrix::<f64>::identity(4, 4)).abs().max() < 1e-14);

    let (gamma, omega, n) = (0.3, 7.0, 2.5);
    let a = DMatrix::from_row_slice(2, 2, &[-0.5 * gamma, omega, -omega, -0.5 * gamma]);
    let d = DMatrix::<f64>::identity(2, 2) * (gamma * (n + 0.5));
    let v = solve_lyapunov(&a, &d).unwrap();
    assert!((v.matrix() - DMatrix::<f64>::identity(2, 2) * (n + 0.5)).abs().max() < 1e-12);
}

#[test]
fn lyapunov_rejects_unstable_drift() {
    let a = DMatrix::<f64>::identity(2, 2);
    let d = DMatrix::<f64>::identity(2, 2);
    assert!(matches!(solve_lyapunov(&a, &d), Err(Error::Unstable)));
}

#[test]
fn sylvester_rectangular() {
    let a = DMatrix::from_row_slice(2, 2, &[-1.0, 0.5, 0.0, -2.0]);
    let b = DMatrix::from_row_slice(3, 3, &[-3.0, 0.0, 1.0, 0.2, -1.5, 0.0, 0.0, 0.0, -0.7]);
    let q = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, -1.0, 0.5, 0.25]);
    let x = solve_sylvester(&a, &b, &q).unwrap();
    let r = &a * &x + &x * b.transpose() + &q;
    assert!(r.abs().max() < 1e-14);
}

#[test]
fn cascaded_and_dense_solves_agree() {
    let sol = solve(&detuned_point()).unwrap();
    let v = sol.covariance.unwrap();
    let dense = solve_lyapunov(&sol.drift, &sol.diffusion).unwrap();
    let scale = v.matrix().abs().max();
    assert!((v.matrix() - dense.matrix()).abs().max() < 1e-10 * scale);
    assert!(relative_residual(&sol.drift, v.matrix(), &sol.diffusion) < 1e-9);
    assert!(relative_residual(&sol.drift, dense.matrix(), &sol.diffusion) < 1e-9);
}

#[test]
fn reference_covariance_is_physical() {
    let sol = solve(&CascadedParams::default()).unwrap();
    let v = sol.covariance.unwrap();
    assert!(v.check_physicality(1e-8));
}

#[test]
fn no_waveguide_means_no_remote_entanglement() {
    let p = CascadedParams {
        eta: 0.0,
        ..Default::default()
    };
    let r = entanglement_report(&p).unwrap();
    assert!(r.stable);
    assert!(r.e_a1b.unwrap() < 1e-10);
    assert!(r.e_mb.unwrap() < 1e-10);
    assert!(r.e_cb.unwrap() > 0.0);
}

#[test]
fn no_dispersive_coupling_means_no_entanglement_with_b() {
    let p = CascadedParams {
        g_c: 0.0,
        target_gc: 0.0,
        ..Default::default()
    };
    let r = entanglement_report(&p).unwrap();
    assert!(r.stable);
    assert!(r.e_cb.unwrap() < 1e-10);
    assert!(r.e_a1b.unwrap() < 1e-10);
    assert!(r.e_mb.unwrap() < 1e-10);
}

#[test]
fn remote_mechanical_entanglement_at_low_temperature() {
    let r = entanglement_report(&detuned_point()).unwrap();
    assert!(r.stable);
    assert!(r.e_mb.unwrap() > 0.0);
    assert!(r.physical.unwrap());
    assert!(r.lyapunov_residual.unwrap() < 1e-9);
    assert!(r.steady_residual < 1e-10);
}

#[test]
fn e_mb_vanishes_with_waveguide_efficiency() {
    let at = |eta: f64| {
        entanglement_report(&CascadedParams {
            eta,
            ..Default::default()
        })
        .unwrap()
        .e_mb
        .unwrap()
    };
    assert!(at(0.0) < 1e-10);
    let mut last = f64::INFINITY;
    for eta in [0.5, 0.2, 0.05, 0.0] {
        let e = at(eta);
        assert!(e <= last);
        last = e;
    }
}

#[test]
fn downstream_excitation_grows_with_t2() {
    let dn = |t2: f64| {
        entanglement_report(&CascadedParams { t2, ..detuned_point() })
            .unwrap()
            .dn_a1
            .unwrap()
    };
    let mut last = 0.0;
    for t2 in [0.01, 0.1, 0.3, 1.0] {
        let v = dn(t2);
        assert!(v > last, "T2 = {t2}: {v}");
        last = v;
    }
}

#[test]
fn unstable_points_are_reported_not_errors() {
    // strong blue detuning with a large dispersive coupling destabilizes c-b
    let p = CascadedParams {
        delta_c_tilde: -CascadedParams::default().omega_b,
        target_gc: 2.0 * PI * 8e6,
        ..Default::default()
    };
    let r = entanglement_report(&p).unwrap();
    assert!(!r.stable);
    assert!(r.e_cb.is_none() && r.e_a1b.is_none() && r.dn_b.is_none());
}

#[test]
fn coarse_grid_is_physical_with_small_residuals() {
    let base = CascadedParams::default();
    for i in 0..9 {
        for j in 0..9 {
            let p = CascadedParams {
                delta_c_tilde: base.omega_b * (2.0 * i as f64 / 8.0),
                delta_1: base.omega_b * (-2.0 + 2.0 * j as f64 / 8.0),
                ..base
            };
            let r = entanglement_report(&p).unwrap();
            if r.stable {
                assert!(r.lyapunov_residual.unwrap() < 1e-9);
                assert!(r.physical.unwrap());
            }
        }
    }
}

fn upstream_block(p: &CascadedParams) -> DMatrix<f64> {
    let v = solve(p).unwrap().covariance.unwrap();
    v.matrix().view((0, 0), (4, 4)).clone_owned()
}

#[test]
fn upstream_covariance_ignores_downstream_parameters() {
    let base = detuned_point();
    let reference = upstream_block(&base);
    let variants = [
        CascadedParams { t2: 0.5, ..base },
        CascadedParams {
            g: base.g * 3.0,
            ..base
        },
        CascadedParams {
            gamma_m: base.gamma_m * 0.2,
            ..base
        },
        CascadedParams {
            target_g2: base.target_g2 * 0.3,
            ..base
        },
    ];
    for p in variants {
        assert_eq!(upstream_block(&p), reference);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn upstream_is_bit_identical_for_any_downstream_change(
        t2 in 0.0f64..1.0,
        g_scale in 0.5f64..4.0,
        gamma_scale in 0.1f64..2.0,
        g2_scale in 0.1f64..1.5,
    ) {
        let base = detuned_point();
        let p = CascadedParams {
            t2,
            g: base.g * g_scale,
            gamma_m: base.gamma_m * gamma_scale,
            target_g2: base.target_g2 * g2_scale,
            ..base
        };
        let sol = solve(&p).unwrap();
        prop_assume!(sol.covariance.is_some());
        prop_assert_eq!(upstream_block(&p), upstream_block(&base));
    }
}
