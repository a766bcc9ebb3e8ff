use proptest::prelude::*;

use orbifold_yamabe::bubble::{bubble_jet, energy_j, fit_inverse_square};
use orbifold_yamabe::geometry::{Coordinate, RadialGeometry};
use orbifold_yamabe::pohozaev::{pohozaev_report, BallQuadrature, FlatEquation};
use orbifold_yamabe::solver::{
    classify_wall, scan, solve_bvp, transform_identity_check, KFamily, Problem, SolverOptions,
};

fn cheap() -> ProptestConfig {
    ProptestConfig::with_cases(64)
}

proptest! {
    #![proptest_config(cheap())]

    #[test]
    fn coordinates_round_trip(n in 1u32..7, s in 1e-3f64..1e3) {
        let g = RadialGeometry::lebrun_compact(n).unwrap();
        for via in [Coordinate::T, Coordinate::HatR] {
            let y = g.coord_transform(s, Coordinate::S, via).unwrap();
            let back = g.coord_transform(y, via, Coordinate::S).unwrap();
            prop_assert!((back - s).abs() <= 1e-12 * s, "{via}: {s} -> {y} -> {back}");
        }
    }

    #[test]
    fn energy_is_scale_invariant(n in 1u32..5, width in 0.2f64..5.0, scale in 0.05f64..20.0) {
        let g = RadialGeometry::lebrun_compact(n).unwrap();
        let k = KFamily::bump(0.3).unwrap();
        let profile = move |a: f64| move |s: f64| {
            let d = 1.0 + (s / width).powi(2);
            (a / d, -2.0 * a * s / (width * width * d * d))
        };
        let one = energy_j(profile(1.0), &k, 3.0, &g, (1e-6, 1e4)).unwrap();
        let scaled = energy_j(profile(scale), &k, 3.0, &g, (1e-6, 1e4)).unwrap();
        prop_assert!((one.value - scaled.value).abs() <= 1e-8 * one.value.abs());
    }

    #[test]
    fn wall_label_ignores_curvature_scale(amplitude in -0.9f64..3.0, width in 0.3f64..3.0, c in 0.01f64..100.0, n in 1u32..6) {
        let k = KFamily::Bump { base: 1.0, amplitude, width };
        let ck = KFamily::Bump { base: c, amplitude: c * amplitude, width };
        let (a, b) = (classify_wall(&k, n), classify_wall(&ck, n));
        prop_assert!((a.margin - b.margin).abs() <= 1e-12 * (1.0 + a.margin.abs()));
        if a.margin.abs() > 1e-9 {
            prop_assert_eq!(a.label, b.label);
        }
    }

    #[test]
    fn transform_forms_agree(n in 1u32..8, seed in any::<u64>()) {
        let check = transform_identity_check(n, seed, 4, 6).unwrap();
        prop_assert!(check.max_relative_difference <= 1e-12, "{check:?}");
    }

    #[test]
    fn pohozaev_terms_scale_with_group_order(c in 0.5f64..10.0, r in 0.1f64..5.0, g in 2u32..9) {
        let eq = FlatEquation { potential: 0.0, curvature: c, p: 3.0 };
        let u = |x: f64| bubble_jet(c, x);
        let quad = BallQuadrature::Adaptive { tol: 1e-12 };
        let full = pohozaev_report(&eq, &u, r, 1, quad).unwrap();
        let quotient = pohozaev_report(&eq, &u, r, g, quad).unwrap();
        let gf = g as f64;
        prop_assert!((full.boundary_p - gf * quotient.boundary_p).abs() <= 1e-12 * full.scale);
        for (a, b) in full.terms.as_array().iter().zip(quotient.terms.as_array()) {
            prop_assert!((a - gf * b).abs() <= 1e-12 * full.scale);
        }
    }

    #[test]
    fn inverse_square_fit_recovers_model(limit in -10.0f64..10.0, coefficient in -100.0f64..100.0) {
        let lambdas = [10.0, 20.0, 40.0, 80.0, 160.0];
        let values: Vec<f64> = lambdas.iter().map(|l| limit + coefficient / (l * l)).collect();
        let fit = fit_inverse_square(&lambdas, &values).unwrap();
        prop_assert!((fit.limit - limit).abs() <= 1e-9 * (1.0 + limit.abs()));
        prop_assert!((fit.coefficient - coefficient).abs() <= 1e-6 * (1.0 + coefficient.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// If `u` solves with curvature `K` then `λu` solves with `K λ^{1-p}`.
    #[test]
    fn solutions_rescale_with_curvature(
        lambda in prop::sample::select(vec![0.5f64, 2.0]),
        p in 1.5f64..3.0,
        bumped in any::<bool>(),
    ) {
        // constant solutions for n = 1, non-constant ones for the bump on n = 2
        let (n, k) = if bumped { (2, KFamily::bump(-0.5).unwrap()) } else { (1, KFamily::constant(1.0).unwrap()) };
        let g = RadialGeometry::lebrun_compact(n).unwrap();
        let opts = SolverOptions::default();
        let rescaled = match &k {
            KFamily::Bump { base, amplitude, width } => {
                let f = lambda.powf(1.0 - p);
                KFamily::Bump { base: base * f, amplitude: amplitude * f, width: *width }
            }
            _ => KFamily::constant(lambda.powf(1.0 - p)).unwrap(),
        };
        let base = solve_bvp(&g, &k, p, &opts).unwrap();
        let scaled = solve_bvp(&g, &rescaled, p, &opts).unwrap();
        let (a, b) = (base.solution().unwrap(), scaled.solution().unwrap());
        prop_assert!((b.max_u - lambda * a.max_u).abs() <= 1e-6 * b.max_u);
        prop_assert!((b.min_u - lambda * a.min_u).abs() <= 1e-6 * b.min_u);
    }

    #[test]
    fn scans_are_deterministic(n in 1u32..5, amplitude in -0.8f64..2.0, p in 2.0f64..3.0) {
        let g = RadialGeometry::lebrun_compact(n).unwrap();
        let k = KFamily::bump(amplitude).unwrap();
        let problem = Problem::new(&g, &k, p).unwrap();
        let opts = SolverOptions { slope_count: 24, ..SolverOptions::default() };
        let slopes = opts.slope_grid();
        prop_assert_eq!(scan(&problem, &slopes, &opts), scan(&problem, &slopes, &opts));
    }
}
