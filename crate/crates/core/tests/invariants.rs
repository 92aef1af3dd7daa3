//! Property tests for the invariants of each module.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::Array3;
use proptest::prelude::*;

use sgdg::basis::{StochasticBasis, UniformDistribution};
use sgdg::dg::{
    apply_lh, apply_limiter, project_initial, DgSpace, Mesh1D, NumericalFlux, NumericalFluxKind, ProjectionMethod,
    SgField,
};
use sgdg::estimator::{residual_norms, QuadratureConfig};
use sgdg::experiments::table::{eoc, table_from_csv, table_from_json, table_to_csv, table_to_json};
use sgdg::experiments::{run, ConvergenceRow, RunConfig};
use sgdg::reconstruction::{spatial_reconstruct, Quantity, SpaceTimeReconstruction};
use sgdg::sg::{FluxLaw, RandomField};
use sgdg::time::{march, RkScheme, StepConfig};

fn dist() -> impl Strategy<Value = UniformDistribution> {
    prop_oneof![
        Just(UniformDistribution::new(1.0, 3.0).unwrap()),
        Just(UniformDistribution::new(-0.2, 0.2).unwrap()),
        (-5.0f64..5.0, 0.1f64..4.0).prop_map(|(a, w)| UniformDistribution::new(a, a + w).unwrap()),
    ]
}

fn random_field(
    n_el: usize,
    p: usize,
    n: usize,
    values: &[f64],
) -> SgField {
    let space = DgSpace::new(Mesh1D::uniform(0.0, 2.0, n_el).unwrap(), p);
    let basis = Arc::new(StochasticBasis::new(UniformDistribution::new(1.0, 3.0).unwrap(), n));
    let data = Array3::from_shape_fn((n_el, p + 1, n + 1), |(k, j, m)| {
        values[(k * 7 + j * 3 + m) % values.len()] / (1.0 + j as f64)
    });
    SgField::from_data(space, basis, data)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn projection_reproduces_low_degree_polynomials(
        d in dist(),
        n in 0usize..=8,
        coeffs in proptest::collection::vec(-2.0f64..2.0, 9),
    ) {
        let basis = StochasticBasis::new(d, n);
        let g = |xi: f64| coeffs[..=n].iter().rev().fold(0.0, |acc, c| acc * (xi - d.mean()) + c);
        let proj = basis.project(g);
        let mut mean = 0.0;
        let mut second = 0.0;
        for &(xi, w) in basis.quadrature() {
            let v = basis.evaluate_series(&proj.coeffs, xi);
            prop_assert!((v - g(xi)).abs() <= 1e-12 * (1.0 + g(xi).abs()));
            mean += w * g(xi);
            second += w * g(xi) * g(xi);
        }
        let (m, var) = proj.moments();
        prop_assert!((m - mean).abs() <= 1e-12 * (1.0 + mean.abs()));
        prop_assert!((var - (second - mean * mean)).abs() <= 1e-12 * (1.0 + second));
    }

    #[test]
    fn sg_flux_matches_direct_quadrature(n in 0usize..=12, u in proptest::collection::vec(-2.0f64..2.0, 13)) {
        let basis = StochasticBasis::new(UniformDistribution::new(1.0, 3.0).unwrap(), n);
        let u = &u[..=n];
        for law in [FluxLaw::Burgers, FluxLaw::LinearAdvection { speed: -1.5 }] {
            let f = law.sg_flux(&basis, u);
            for (i, fi) in f.iter().enumerate() {
                let direct: f64 = basis
                    .quadrature()
                    .iter()
                    .enumerate()
                    .map(|(q, &(xi, w))| w * law.f(basis.evaluate_series(u, xi)) * basis.psi_at_node(q, i))
                    .sum();
                prop_assert!((fi - direct).abs() <= 1e-11, "{law:?} mode {i}: {fi} vs {direct}");
                prop_assert_eq!(*fi, law.sg_flux_exact_mode(&basis, u, i));
            }
        }
    }

    #[test]
    fn burgers_jacobian_matches_finite_differences(
        n in 1usize..=6,
        u in proptest::collection::vec(-2.0f64..2.0, 7),
        v in proptest::collection::vec(-1.0f64..1.0, 7),
    ) {
        let basis = StochasticBasis::new(UniformDistribution::new(-0.2, 0.2).unwrap(), n);
        let (u, v) = (&u[..=n], &v[..=n]);
        let mut jv = vec![0.0; n + 1];
        FluxLaw::Burgers.sg_jacobian_apply(&basis, u, v, &mut jv);
        let eps = 1e-5;
        let shifted = |s: f64| -> Vec<f64> { u.iter().zip(v).map(|(a, b)| a + s * b).collect() };
        let fp = FluxLaw::Burgers.sg_flux(&basis, &shifted(eps));
        let fm = FluxLaw::Burgers.sg_flux(&basis, &shifted(-eps));
        for i in 0..=n {
            prop_assert!(((fp[i] - fm[i]) / (2.0 * eps) - jv[i]).abs() <= 1e-6);
        }
    }

    #[test]
    fn operator_conserves_mass(values in proptest::collection::vec(-1.0f64..1.0, 11), dt in 1e-3f64..0.05) {
        let u = random_field(7, 2, 2, &values);
        for kind in [NumericalFluxKind::Upwind, NumericalFluxKind::LaxWendroff] {
            for law in [FluxLaw::Burgers, FluxLaw::LinearAdvection { speed: 2.0 }] {
                let l = apply_lh(&u, &NumericalFlux::new(kind, law, dt), &RandomField::zero(), 0.0);
                prop_assert!(l.total_mean().abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn limiter_is_idempotent(values in proptest::collection::vec(-1.0f64..1.0, 13), tvb in 0.0f64..100.0) {
        let u = random_field(9, 2, 1, &values);
        let once = apply_limiter(&u, tvb);
        let twice = apply_limiter(&once, tvb);
        prop_assert!(once.data().iter().zip(twice.data()).all(|(a, b)| (a - b).abs() <= 1e-14));
        for k in 0..9 {
            prop_assert!((once.cell_mean(k, 0) - u.cell_mean(k, 0)).abs() <= 1e-14);
        }
    }

    #[test]
    fn lifting_is_continuous_and_orthogonal(
        values in proptest::collection::vec(-1.0f64..1.0, 17),
        p in 1usize..=4,
        dt in 0.0f64..0.02,
    ) {
        let u = random_field(6, p, 2, &values);
        for kind in [NumericalFluxKind::Upwind, NumericalFluxKind::LaxWendroff] {
            let flux = NumericalFlux::new(kind, FluxLaw::Burgers, dt);
            let lifted = spatial_reconstruct(&u, &flux).unwrap();
            let (mut a, mut b) = (vec![0.0; 3], vec![0.0; 3]);
            for k in 0..6 {
                lifted.modes_at(k, 1.0, Quantity::Value, &mut a);
                lifted.modes_at((k + 1) % 6, -1.0, Quantity::Value, &mut b);
                for m in 0..3 {
                    prop_assert!((a[m] - b[m]).abs() <= 1e-11);
                }
                // orthonormal Legendre coefficients below p are the DG ones
                for j in 0..p {
                    for m in 0..3 {
                        prop_assert!((lifted.value[[k, j, m]] - u.data()[[k, j, m]]).abs() <= 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn tables_round_trip(
        values in proptest::collection::vec(1e-300f64..1e300, 10),
        levels in 0usize..6,
        missing in any::<bool>(),
    ) {
        let rows: Vec<ConvergenceRow> = (0..levels)
            .map(|l| ConvergenceRow {
                level: l,
                elements: 16 << l,
                h: values[0] / (1 << l) as f64,
                dt: values[1],
                chaos_degree: l,
                p: 2,
                error: (!missing).then_some(values[2]),
                r_st: values[3],
                r_stoch: values[4],
                e0_st: values[5],
                e0_stoch: 0.0,
                bound: values[6],
                exp_factor: values[7],
                eoc_error: (l > 0 && !missing).then_some(-values[8].ln()),
                eoc_r_st: (l > 0).then_some(values[9].ln()),
                wall_time: values[9],
            })
            .collect();
        prop_assert_eq!(&table_from_csv(&table_to_csv(&rows).unwrap()).unwrap(), &rows);
        prop_assert_eq!(&table_from_json(&table_to_json(&rows).unwrap()).unwrap(), &rows);
    }

    #[test]
    fn eoc_recovers_power_laws(c in 1e-6f64..1e3, rate in -1.0f64..6.0) {
        let e = eoc(c, c * 0.5f64.powf(rate)).unwrap();
        prop_assert!((e - rate).abs() <= 1e-9);
    }
}

#[test]
fn march_conserves_the_mean() {
    let space = DgSpace::new(Mesh1D::uniform(0.0, 2.0, 12).unwrap(), 2);
    let basis = Arc::new(StochasticBasis::new(UniformDistribution::new(1.0, 3.0).unwrap(), 3));
    let u0 = RandomField::new(|_, x, xi| xi * (PI * x).cos() + 0.5);
    let uh = project_initial(&u0, 0.0, &space, &basis, ProjectionMethod::GaussLegendreInterp);
    let m0 = uh.total_mean();
    for (law, kind) in [
        (FluxLaw::LinearAdvection { speed: 2.0 }, NumericalFluxKind::Upwind),
        (FluxLaw::Burgers, NumericalFluxKind::LaxWendroff),
    ] {
        for scheme in [RkScheme::ssp_rk3(), RkScheme::rk3_7()] {
            let cfg = StepConfig {
                scheme: &scheme,
                flux: NumericalFlux::new(kind, law, 0.0),
                source: &RandomField::zero(),
                limiter: None,
            };
            let traj = march(uh.clone(), &cfg, 0.005, 0.1).unwrap();
            assert!((traj.final_state().total_mean() - m0).abs() <= 1e-11, "{law:?}");
        }
    }
}

#[test]
fn doubling_quadrature_leaves_norms_unchanged() {
    for case in ["advection", "burgers_smooth"] {
        let mut c = RunConfig::for_case(case).unwrap();
        c.t_end = 0.048;
        c.chaos_degree = 3;
        let coarse = run(&c).unwrap();
        c.quadrature = c.quadrature.scaled(2);
        let fine = run(&c).unwrap();
        let pairs = [
            ("R_st", coarse.row.r_st, fine.row.r_st),
            ("R_stoch", coarse.row.r_stoch, fine.row.r_stoch),
            ("E0_st", coarse.row.e0_st, fine.row.e0_st),
            ("error", coarse.row.error.unwrap(), fine.row.error.unwrap()),
        ];
        for (name, a, b) in pairs {
            // norms at round-off level carry no relative information
            if a.max(b) < 1e-13 {
                continue;
            }
            assert!((a - b).abs() <= 1e-6 * a.max(b), "{case} {name}: {a} vs {b}");
        }
    }
}

#[test]
fn report_fields_are_nonnegative() {
    let mut c = RunConfig::for_case("burgers_smooth").unwrap();
    c.t_end = 0.04;
    let out = run(&c).unwrap();
    let r = &out.residuals;
    let scalars = [r.r_st_sq, r.r_stoch_sq, r.r_sts_sq, r.r_stoch_direct_sq, r.e0_st, r.e0_stoch];
    assert!(scalars.iter().all(|v| *v >= 0.0), "{scalars:?}");
    assert!(r.r_st_modes.iter().chain(&r.r_stoch_tail_modes).all(|v| *v >= 0.0));
    assert!(r.profile.r_st_density.iter().chain(&r.profile.r_stoch_density).all(|v| *v >= 0.0));
    let e = &out.estimator;
    assert!(e.bound_numerical >= 0.0 && e.bound_reconstruction >= 0.0 && e.exp_factor >= 1.0);
    assert!(r.lipschitz_integral.unwrap() >= 0.0);
}

#[test]
fn reconstruction_dx_matches_finite_differences() {
    let space = DgSpace::new(Mesh1D::uniform(0.0, 2.0, 10).unwrap(), 2);
    let basis = Arc::new(StochasticBasis::new(UniformDistribution::new(1.0, 3.0).unwrap(), 2));
    let u0 = RandomField::new(|_, x, xi| xi * (PI * x).sin());
    let uh = project_initial(&u0, 0.0, &space, &basis, ProjectionMethod::GaussLegendreInterp);
    let scheme = RkScheme::rk3_7();
    let cfg = StepConfig {
        scheme: &scheme,
        flux: NumericalFlux::new(NumericalFluxKind::LaxWendroff, FluxLaw::Burgers, 0.0),
        source: &RandomField::zero(),
        limiter: None,
    };
    let traj = march(uh, &cfg, 0.01, 0.03).unwrap();
    let rec = SpaceTimeReconstruction::from_trajectory(&traj, 0.0).unwrap();
    let eps = 1e-6;
    for &(t, x, xi) in &[(0.005, 0.33, 1.4), (0.017, 1.07, 2.2), (0.029, 1.91, 2.9)] {
        let dx = rec.eval_sts(t, x, xi, Quantity::Dx).unwrap();
        let fd = (rec.eval_sts(t, x + eps, xi, Quantity::Value).unwrap()
            - rec.eval_sts(t, x - eps, xi, Quantity::Value).unwrap())
            / (2.0 * eps);
        assert!((dx - fd).abs() <= 1e-6 * (1.0 + dx.abs()), "{dx} vs {fd}");
        let dt = rec.eval_sts(t, x, xi, Quantity::Dt).unwrap();
        let fd = (rec.eval_sts(t + eps, x, xi, Quantity::Value).unwrap()
            - rec.eval_sts(t - eps, x, xi, Quantity::Value).unwrap())
            / (2.0 * eps);
        assert!((dt - fd).abs() <= 1e-6 * (1.0 + dt.abs()), "{dt} vs {fd}");
    }
}

#[test]
fn residual_norms_are_deterministic() {
    let mut c = RunConfig::for_case("burgers_smooth").unwrap();
    c.t_end = 0.024;
    let a = run(&c).unwrap();
    let b = run(&c).unwrap();
    let csv = |rows: &[ConvergenceRow]| {
        let mut rows = rows.to_vec();
        rows.iter_mut().for_each(|r| r.wall_time = 0.0);
        table_to_csv(&rows).unwrap()
    };
    assert_eq!(csv(&[a.row]), csv(&[b.row]));
    let q = QuadratureConfig::default();
    let rec = SpaceTimeReconstruction::from_trajectory(&a.trajectory, 0.0).unwrap();
    let case = sgdg::experiments::lookup("burgers_smooth").unwrap();
    let r1 = residual_norms(&rec, case.law, &case.source, &q, true).unwrap();
    let r2 = residual_norms(&rec, case.law, &case.source, &q, true).unwrap();
    assert_eq!(r1, r2);
}
