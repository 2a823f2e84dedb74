use num_complex::Complex64;
use proptest::prelude::*;

use quadlab_core::stability::{
    closed_form_directional, hyers_iterate, series_bound, stabilize, ControlFunction, Direction, Setting,
    StabilityConfig,
};
use quadlab_core::{
    approximate_remainder, residual, residual_from_terms, sample_unitary, AlgebraElement, EquationSpec,
    Mapping, ModulePoint, QuasiNormSpec,
};

fn coord() -> impl Strategy<Value = f64> {
    -10.0..10.0f64
}

fn real_point(d: usize) -> impl Strategy<Value = ModulePoint> {
    prop::collection::vec(coord(), d).prop_map(|v| ModulePoint::from_reals(&v))
}

fn symmetric(d: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(-3.0..3.0f64, d * d).prop_map(move |raw| {
        (0..d)
            .map(|i| (0..d).map(|j| 0.5 * (raw[i * d + j] + raw[j * d + i])).collect())
            .collect()
    })
}

fn m2_point() -> impl Strategy<Value = ModulePoint> {
    prop::collection::vec(coord(), 8).prop_map(|v| {
        let entries = (0..4).map(|i| Complex64::new(v[2 * i], v[2 * i + 1])).collect();
        ModulePoint::single(AlgebraElement::from_entries(2, entries).unwrap())
    })
}

fn equations() -> impl Strategy<Value = EquationSpec> {
    prop_oneof![
        Just(EquationSpec::Fe1),
        Just(EquationSpec::Fe2),
        (3usize..=6).prop_map(|n| EquationSpec::Fe3 { n }),
        prop_oneof![Just(0i64), 2i64..6, -5i64..-1].prop_map(|a| EquationSpec::Fe3Zero { a }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn quadratic_forms_solve_every_equation(
        eq in equations(),
        m in symmetric(2),
        pts in prop::collection::vec(real_point(2), 6),
    ) {
        let f = Mapping::QuadraticForm { coefficients: m };
        let xs = &pts[..eq.arity()];
        let r = residual(&f, &eq, xs).unwrap().frobenius_norm();
        let scale: f64 = xs.iter().map(|x| x.frobenius_norm()).sum::<f64>().powi(2) * 400.0;
        prop_assert!(r <= 1e-12 * (1.0 + scale), "{eq}: {r}");
    }

    #[test]
    fn both_residual_routes_agree(
        eq in equations(),
        pts in prop::collection::vec(real_point(1), 6),
        deg in 1u32..5,
    ) {
        let f = Mapping::perturbed(Mapping::Monomial { degree: deg }, Mapping::Sine, 0.5);
        let xs = &pts[..eq.arity()];
        let a = residual(&f, &eq, xs).unwrap();
        let b = residual_from_terms(&f, &eq, xs).unwrap();
        let scale = 1.0 + a.frobenius_norm() + b.frobenius_norm();
        prop_assert!((&a - &b).frobenius_norm() <= 1e-10 * scale * 1e4);
    }

    #[test]
    fn matrix_square_twisted_remainder_vanishes(
        pts in prop::collection::vec(m2_point(), 5),
        seed in any::<u64>(),
        n in 3usize..=5,
    ) {
        let u = sample_unitary(2, seed);
        let r = approximate_remainder(&Mapping::MatrixSquare, &u, n, &pts[..n]).unwrap();
        let scale: f64 = pts[..n].iter().map(|x| x.frobenius_norm()).sum::<f64>().powi(2) * (n * n) as f64;
        prop_assert!(r.frobenius_norm() <= 1e-12 * (1.0 + scale));
    }

    #[test]
    fn quasi_norm_triangle_inequalities(
        p in 0.2..1.0f64,
        x in real_point(3),
        y in real_point(3),
    ) {
        let spec = QuasiNormSpec::lp(p, 3).unwrap();
        let (nx, ny, nxy) = (
            spec.norm_eval(&x).unwrap(),
            spec.norm_eval(&y).unwrap(),
            spec.norm_eval(&(&x + &y)).unwrap(),
        );
        prop_assert!(nxy <= spec.modulus() * (nx + ny) * (1.0 + 1e-12));
        prop_assert!(nxy.powf(p) <= (nx.powf(p) + ny.powf(p)) * (1.0 + 1e-12));
    }

    #[test]
    fn closed_form_matches_truncated_series(
        n in 3usize..=6,
        eps in 0.01..5.0f64,
        r in prop_oneof![0.0..1.5f64, 2.5..4.0f64],
        k in 1.0..1.3f64,
        t in 0.1..10.0f64,
    ) {
        let phi = ControlFunction::Power { epsilon: eps, r };
        let dir = if r < 2.0 { Direction::Forward } else { Direction::Backward };
        let x = ModulePoint::from_reals(&[t]);
        let norm = QuasiNormSpec::euclidean(1);
        let tol = 1e-10;
        for setting in [Setting::Quasi { k }, Setting::PNorm { p: 1.0 / k }] {
            match series_bound(&phi, &norm, n, setting, dir, &x, tol) {
                Ok(s) => {
                    let c = s.closed_form.unwrap();
                    prop_assert!((c - s.truncated).abs() <= 10.0 * tol * c.max(1.0), "{setting:?}: {s:?}");
                }
                Err(e) => prop_assert!(
                    matches!(e, quadlab_core::Error::Divergent(_) | quadlab_core::Error::OpenProblem(_)),
                    "{e}"
                ),
            }
        }
    }

    #[test]
    fn unit_modulus_equals_unit_exponent(
        n in 3usize..=8,
        eps in 0.01..5.0f64,
        r in prop_oneof![0.0..1.95f64, 2.05..5.0f64],
        t in 0.0..10.0f64,
    ) {
        for dir in [Direction::Forward, Direction::Backward] {
            for phi in [ControlFunction::Power { epsilon: eps, r }, ControlFunction::Constant { theta: eps }] {
                let a = closed_form_directional(&phi, n, Setting::Quasi { k: 1.0 }, dir, t);
                let b = closed_form_directional(&phi, n, Setting::PNorm { p: 1.0 }, dir, t);
                match (a, b) {
                    (Ok(a), Ok(b)) => prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(f64::MIN_POSITIVE)),
                    (Err(_), Err(_)) => {}
                    other => prop_assert!(false, "{other:?}"),
                }
            }
        }
    }

    #[test]
    fn exact_quadratic_is_a_fixed_point(
        m in symmetric(2),
        x in real_point(2),
        steps in 0usize..25,
        n in 3usize..=6,
    ) {
        let f = Mapping::QuadraticForm { coefficients: m };
        let fx = f.eval(&x).unwrap();
        for dir in [Direction::Forward, Direction::Backward] {
            let it = hyers_iterate(&f, n, steps, &x, dir).unwrap();
            prop_assert!((&it - &fx).frobenius_norm() <= 1e-9 * (1.0 + fx.frobenius_norm()));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cauchy_estimate_dominates_gaps_and_estimates_scale(
        amp in 0.01..1.0f64,
        t in -10.0..10.0f64,
        n in 3usize..=5,
    ) {
        let f = Mapping::perturbed(Mapping::square(), Mapping::Sine, amp);
        let x = ModulePoint::from_reals(&[t]);
        let mut cfg = StabilityConfig::new(n, QuasiNormSpec::euclidean(1), vec![x.clone(), x.scale_real(n as f64 - 1.0)]);
        cfg.precheck_samples = 20;
        let theta = amp * (n * (n * (n - 1) / 2) + n) as f64;
        let rep = stabilize(&f, &ControlFunction::Constant { theta }, &cfg).unwrap();
        prop_assert!(rep.passed());
        for p in &rep.probes {
            for (g, b) in p.gaps.iter().zip(&p.gap_bounds) {
                prop_assert!(*g <= b * (1.0 + 1e-9) + 1e-12, "gap {g} > {b}");
            }
        }
        let q0 = rep.probes[0].q_estimate.real_parts()[0];
        let q1 = rep.probes[1].q_estimate.real_parts()[0];
        let b2 = ((n - 1) * (n - 1)) as f64;
        prop_assert!((q1 - b2 * q0).abs() <= 1e-9 * (1.0 + q1.abs()));
    }
}
