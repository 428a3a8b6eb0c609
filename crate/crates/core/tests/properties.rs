//! Randomised invariants over the analytic layer.

use std::f64::consts::{E, PI};

use proptest::prelude::*;
use tsa_aoi::optimize::objective_at;
use tsa_aoi::*;

fn config() -> impl Strategy<Value = NetworkConfig> {
    (
        0.0005f64..0.3,
        1.0f64..5.0,
        -5.0f64..10.0,
        prop_oneof![(10.0f64..50.0).prop_map(Some), Just(None)],
        2.5f64..5.0,
    )
        .prop_map(|(lambda, r, theta_db, snr_db, alpha)| match snr_db {
            Some(snr) => NetworkConfig::from_db(lambda, r, theta_db, snr, alpha).unwrap(),
            None => NetworkConfig::new(lambda, r, db_to_linear(theta_db), f64::INFINITY, alpha).unwrap(),
        })
        // Beyond this the noise alone drives p_s below anything representable.
        .prop_filter("noise term too large", |c| c.noise_term() < 5.0)
}

fn params() -> impl Strategy<Value = ProtocolParams> {
    (0.01f64..=1.0, prop_oneof![Just(0.0), 0.0f64..300.0]).prop_map(|(eta, a)| ProtocolParams::new(eta, a).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn every_root_solves_the_fixed_point(cfg in config(), pp in params()) {
        let class = classify_region(&cfg, &pp).unwrap();
        let roots = class.roots();
        prop_assert!(!roots.is_empty());
        for w in roots.windows(2) {
            prop_assert!(w[0] < w[1]);
        }
        for p in roots {
            prop_assert!(p > 0.0 && p <= 1.0);
            let res = fixed_point_residual(&cfg, &pp, p).unwrap();
            // Tangent roots on a region boundary are only resolved to the
            // square root of the solver tolerance.
            let tol = if class.region == Region::Boundary { 1e-6 } else { 1e-10 };
            prop_assert!(res.abs() < tol, "residual {res} at p = {p}");
        }
    }

    #[test]
    fn operating_point_is_monotone(cfg in config(), pp in params(), scale in 1.0f64..4.0, extra in 0.0f64..50.0) {
        let p = operating_point(&cfg, &pp).unwrap();
        let denser = cfg.with_lambda(cfg.lambda() * scale).unwrap();
        prop_assert!(operating_point(&denser, &pp).unwrap() <= p * (1.0 + 1e-12));
        let higher = ProtocolParams::new(pp.eta, pp.age_threshold + extra).unwrap();
        prop_assert!(operating_point(&cfg, &higher).unwrap() >= p * (1.0 - 1e-12));
    }

    #[test]
    fn iteration_from_one_reaches_the_operating_point(cfg in config(), pp in params()) {
        let class = classify_region(&cfg, &pp).unwrap();
        prop_assume!(matches!(class.region, Region::MonoHigh | Region::MonoLow | Region::Bistable));
        match fixed_point_iterate(&cfg, &pp, 1.0, 1e-13, 5_000_000, false) {
            Ok(it) => prop_assert!((it.p_s - class.attained()).abs() < 1e-8 * class.attained().max(1e-3),
                "iterate {} vs root {}", it.p_s, class.attained()),
            // Near-tangent roots contract arbitrarily slowly.
            Err(Error::NonConvergence { .. }) => {}
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
    }

    #[test]
    fn average_sits_between_bounds(a in 0.0f64..1e4, eta in 1e-3f64..=1.0, p in 1e-4f64..=1.0) {
        let avg = time_average_aoi(a, eta, p).unwrap();
        let peak = mean_peak_aoi(a, eta, p).unwrap();
        let b = aoi_bounds(a, eta, p).unwrap();
        let tol = 1e-12 * avg;
        prop_assert!(b.lower <= avg + tol && avg <= b.upper + tol);
        prop_assert!(avg <= peak + tol);
        prop_assert!((b.upper - b.lower - 0.5).abs() < 1e-9 * b.upper);
    }

    #[test]
    fn lambert_residual(x in prop_oneof![-1.0 / E..0.0, 0.0f64..10.0, 10.0f64..1e12]) {
        let w = lambert_w0(x).unwrap();
        prop_assert!(w >= -1.0);
        let back = w * w.exp();
        prop_assert!((back - x).abs() <= 1e-12 * x.abs().max(1e-3), "W({x}) = {w}");
    }

    #[test]
    fn contention_matches_reflection_formula(theta in 1e-3f64..1e3, alpha in 2.05f64..8.0) {
        // Γ(1 − δ)Γ(1 + δ) = πδ / sin(πδ).
        let delta = 2.0 / alpha;
        let exact = PI * theta.powf(delta) * PI * delta / (PI * delta).sin();
        let c = spatial_contention(theta, alpha).unwrap().value();
        prop_assert!((c / exact - 1.0).abs() < 1e-12, "{c} vs {exact}");
    }

    #[test]
    fn throttled_rate_identity(cfg in config(), a in 0.0f64..200.0) {
        let k = cfg.noise_term();
        for (res, target) in [(opt_eta_peak(&cfg, a).unwrap(), Target::Peak), (opt_eta_avg(&cfg, a).unwrap(), Target::Average)] {
            if res.regime == Regime::ThrottledRate {
                let eta = 1.0 / (cfg.spatial_load() - a * (-1.0 - k).exp());
                prop_assert!((res.eta_star / eta - 1.0).abs() < 1e-12);
                prop_assert!((res.p_s_at_opt - (-1.0 - k).exp()).abs() < 1e-15);
                let pp = ProtocolParams::new(res.eta_star, a).unwrap();
                prop_assert!(fixed_point_residual(&cfg, &pp, res.p_s_at_opt).unwrap().abs() < 1e-12);
                let direct = match target {
                    Target::Peak => mean_peak_aoi(a, res.eta_star, res.p_s_at_opt).unwrap(),
                    Target::Average => time_average_aoi(a, res.eta_star, res.p_s_at_opt).unwrap(),
                };
                prop_assert!((res.objective / direct - 1.0).abs() < 1e-10, "{} vs {direct}", res.objective);
            } else {
                prop_assert_eq!(res.eta_star, 1.0);
            }
        }
    }

    #[test]
    fn rate_optimum_dominates_other_rates(cfg in config(), a in 0.0f64..200.0, eta in 0.01f64..=1.0) {
        for (res, target) in [(opt_eta_peak(&cfg, a).unwrap(), Target::Peak), (opt_eta_avg(&cfg, a).unwrap(), Target::Average)] {
            let other = objective_at(&cfg, target, a, eta).unwrap();
            prop_assert!(res.objective <= other * (1.0 + 1e-9), "{:?}: {} > {other} at η = {eta}", target, res.objective);
        }
    }

    #[test]
    fn joint_peak_dominates_any_point(cfg in config(), a in 0.0f64..300.0, eta in 0.01f64..=1.0) {
        let (best, _) = opt_joint_peak(&cfg).unwrap();
        let other = objective_at(&cfg, Target::Peak, a, eta).unwrap();
        prop_assert!(best.objective <= other * (1.0 + 1e-9), "{} > {other}", best.objective);
    }
}
