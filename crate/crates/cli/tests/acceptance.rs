//! Acceptance suite. Runs every criterion, prints one line each and exits
//! nonzero if any fails.

use std::process::{Command, ExitCode};
use std::time::Instant;

use quadlab_core::finite::{check_admissible, spaces_equal};
use quadlab_core::polarization::{inner_product_characterization, IdentityMode};
use quadlab_core::stability::{
    closed_form_bounds, closed_form_directional, dead_zone_sweep, fit_epsilon, fit_theta, series_bound, stabilize,
    verify_unitary_covariance, BoundParams, ControlFunction, Direction, Setting, StabilityConfig,
};
use quadlab_core::{
    approximate_remainder, residual, BoxSampler, EquationSpec, Error, GroupSpec, Mapping, ModulePoint, PointShape,
    QuasiNormSpec,
};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn groups() -> Vec<GroupSpec> {
    let mut v = Vec::new();
    for q in [5, 7, 11, 13] {
        for d in 1..=2 {
            v.push(GroupSpec::new(q, d).unwrap());
        }
    }
    v
}

fn oracle_fe3() -> Outcome {
    let start = Instant::now();
    let (mut cases, mut skipped) = (0, 0);
    for g in groups() {
        for n in 3..=5 {
            let eq = EquationSpec::Fe3 { n };
            if check_admissible(&eq, &g).is_err() {
                skipped += 1;
                continue;
            }
            let c = spaces_equal(&eq, &EquationSpec::Fe1, &g).map_err(|e| e.to_string())?;
            let d = g.d();
            ensure(c.equal, || format!("F_{}^{d}, n = {n}: {c}", g.q()))?;
            ensure(c.dim_b == d * (d + 1) / 2, || {
                format!("F_{}^{d}: fe1 has dimension {}", g.q(), c.dim_b)
            })?;
            cases += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 60.0, || format!("took {secs:.1} s"))?;
    Ok(format!("{cases} admissible cases equal ({skipped} inadmissible skipped), {secs:.1} s"))
}

fn oracle_fe3_0() -> Outcome {
    let mut cases = 0;
    for g in groups() {
        for a in [0, 2, 3, 4] {
            let eq = EquationSpec::Fe3Zero { a };
            if check_admissible(&eq, &g).is_err() {
                continue;
            }
            let c = spaces_equal(&eq, &EquationSpec::Fe1, &g).map_err(|e| e.to_string())?;
            ensure(c.equal, || format!("F_{}^{}, a = {a}: {c}", g.q(), g.d()))?;
            cases += 1;
        }
    }
    ensure(cases > 0, || "no admissible case".into())?;
    Ok(format!("{cases} admissible cases equal"))
}

fn forward_residuals() -> Outcome {
    const TUPLES: usize = 10_000;
    let mut smp = BoxSampler::with_default_box(PointShape::real(3), 1);
    let equations = [
        EquationSpec::Fe1,
        EquationSpec::Fe2,
        EquationSpec::Fe3 { n: 3 },
        EquationSpec::Fe3 { n: 4 },
        EquationSpec::Fe3 { n: 5 },
        EquationSpec::Fe3Zero { a: 0 },
        EquationSpec::Fe3Zero { a: 2 },
        EquationSpec::Fe3Zero { a: 3 },
        EquationSpec::Fe3Zero { a: -4 },
    ];
    let mut worst: f64 = 0.0;
    for eq in &equations {
        for _ in 0..TUPLES {
            let mut m = vec![vec![0.0; 3]; 3];
            let mut largest: f64 = 0.0;
            for i in 0..3 {
                for j in i..3 {
                    let c = smp.uniform(-5.0, 5.0);
                    m[i][j] = c;
                    m[j][i] = c;
                    largest = largest.max(c.abs());
                }
            }
            let f = Mapping::QuadraticForm { coefficients: m };
            let xs = smp.tuple(eq.arity());
            let r = residual(&f, eq, &xs).map_err(|e| e.to_string())?.frobenius_norm();
            let sum: f64 = xs.iter().map(ModulePoint::frobenius_norm).sum();
            let scale = largest.max(1.0) * sum * sum;
            worst = worst.max(r / (1.0 + scale));
            ensure(r <= 1e-9 * (1.0 + scale), || format!("{eq}: residual {r:e} at scale {scale:e}"))?;
        }
    }
    let mut smp = BoxSampler::with_default_box(PointShape::complex(1, 2), 2);
    for n in 3..=5 {
        for _ in 0..TUPLES {
            let u = smp.unitary();
            let xs = smp.tuple(n);
            let r = approximate_remainder(&Mapping::MatrixSquare, &u, n, &xs)
                .map_err(|e| e.to_string())?
                .frobenius_norm();
            let sum: f64 = xs.iter().map(ModulePoint::frobenius_norm).sum();
            let scale = sum * sum;
            worst = worst.max(r / (1.0 + scale));
            ensure(r <= 1e-9 * (1.0 + scale), || format!("D_u, n = {n}: residual {r:e}"))?;
        }
    }
    Ok(format!(
        "{} equations x {TUPLES} tuples, worst residual / (1 + scale) = {worst:.1e}",
        equations.len() + 3
    ))
}

fn power_bound() -> Outcome {
    let start = Instant::now();
    let phi = ControlFunction::Power { epsilon: 1.0, r: 1.0 };
    let e1 = QuasiNormSpec::euclidean(1);
    let k1 = Setting::Quasi { k: 1.0 };
    for t in [0.5, 1.0, 2.0, 7.5] {
        let closed = closed_form_directional(&phi, 3, k1, Direction::Forward, t).map_err(|e| e.to_string())?;
        let s = series_bound(&phi, &e1, 3, k1, Direction::Forward, &ModulePoint::from_reals(&[t]), 1e-15)
            .map_err(|e| e.to_string())?;
        let want = 5.0 / 6.0 * t;
        ensure((closed - want).abs() <= 1e-12 * want, || format!("closed form {closed} at |x| = {t}"))?;
        ensure((s.truncated - closed).abs() <= 1e-12 * closed, || {
            format!("series {} vs closed {closed} at |x| = {t}", s.truncated)
        })?;
    }

    let f = Mapping::perturbed(Mapping::square(), Mapping::Rational, 0.05);
    let mut smp = BoxSampler::with_default_box(PointShape::real(1), 3);
    let epsilon = fit_epsilon(&f, 3, 1.0, &e1, &e1, &mut smp, 5000).map_err(|e| e.to_string())?;
    let probes: Vec<_> = (0..100).map(|_| smp.point()).collect();
    let cfg = StabilityConfig::new(3, e1, probes);
    let rep = stabilize(&f, &ControlFunction::Power { epsilon, r: 1.0 }, &cfg).map_err(|e| e.to_string())?;
    let bad = rep.probes.iter().filter(|p| !(p.within_bound && p.converged)).count();
    ensure(bad == 0, || format!("{bad}/100 probes outside the bound"))?;
    let worst = rep.probes.iter().map(|p| p.deviation / p.bound).fold(0.0, f64::max);
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 10.0, || format!("took {secs:.1} s"))?;
    Ok(format!(
        "bound 5/6 |x| by closed form and series; fitted epsilon {epsilon:.3}, 100 probes, max deviation/bound {worst:.3}, {secs:.2} s"
    ))
}

fn quasi_constant() -> Outcome {
    let half = QuasiNormSpec::lp(0.5, 2).map_err(|e| e.to_string())?;
    let form = |m: [[f64; 2]; 2]| Mapping::QuadraticForm {
        coefficients: m.iter().map(|r| r.to_vec()).collect(),
    };
    let f = Mapping::Stack {
        components: vec![
            Mapping::perturbed(form([[1.0, 0.5], [0.5, 2.0]]), Mapping::Sine, 0.1),
            Mapping::perturbed(form([[-1.0, 0.0], [0.0, 0.5]]), Mapping::Sine, 0.05),
        ],
    };
    let mut smp = BoxSampler::with_default_box(PointShape::real(2), 4);
    let theta = fit_theta(&f, 3, &half, &half, &mut smp, 5000).map_err(|e| e.to_string())?;
    let probes: Vec<_> = (0..100).map(|_| smp.point()).collect();
    let mut cfg = StabilityConfig::new(3, half.clone(), probes);
    cfg.codomain_norm = Some(half);
    let rep = stabilize(&f, &ControlFunction::Constant { theta }, &cfg).map_err(|e| e.to_string())?;
    ensure(rep.setting == Setting::Quasi { k: 2.0 }, || format!("{:?}", rep.setting))?;
    let want = 5.0 * 2.0 * theta / (3.0 * 2.0);
    for p in &rep.probes {
        ensure((p.bound - want).abs() <= 1e-12 * want, || format!("bound {} != 5 theta / 3", p.bound))?;
        ensure(p.deviation <= p.bound && p.converged, || {
            format!("deviation {} > {} at {:?}", p.deviation, p.bound, p.probe)
        })?;
    }
    let worst = rep.probes.iter().map(|p| p.deviation).fold(0.0, f64::max);
    Ok(format!(
        "K = 2, fitted theta {theta:.3}, bound 5 theta/3 = {want:.3}, max deviation {worst:.3} over 100 probes"
    ))
}

fn unit_equality() -> Outcome {
    let e1 = QuasiNormSpec::euclidean(1);
    let (mut compared, mut guarded, mut worst) = (0, 0, 0.0f64);
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
    for n in 3..=8 {
        for r in [0.25, 0.5, 1.0, 1.5, 1.9, 2.1, 2.5, 3.0, 4.0] {
            for epsilon in [0.1, 1.0, 3.0] {
                for t in [0.1, 1.0, 2.0, 10.0] {
                    for dir in [Direction::Forward, Direction::Backward] {
                        let k1 = Setting::Quasi { k: 1.0 };
                        let p1 = Setting::PNorm { p: 1.0 };
                        for phi in [ControlFunction::Power { epsilon, r }, ControlFunction::Constant { theta: epsilon }] {
                            match (
                                closed_form_directional(&phi, n, k1, dir, t),
                                closed_form_directional(&phi, n, p1, dir, t),
                            ) {
                                (Ok(a), Ok(b)) => {
                                    worst = worst.max(rel(a, b));
                                    compared += 1;
                                }
                                (Err(_), Err(_)) => continue,
                                other => return Err(format!("n={n} r={r} {dir:?}: {other:?}")),
                            }
                            let x = ModulePoint::from_reals(&[t]);
                            match (
                                series_bound(&phi, &e1, n, k1, dir, &x, 1e-12),
                                series_bound(&phi, &e1, n, p1, dir, &x, 1e-12),
                            ) {
                                (Ok(a), Ok(b)) => {
                                    worst = worst.max(rel(a.truncated, b.truncated));
                                    compared += 1;
                                }
                                // ratios near 1 need scales past the guard on both sides alike
                                (Err(Error::Overflow(_)), Err(Error::Overflow(_))) => guarded += 1,
                                other => return Err(format!("series n={n} r={r} {dir:?}: {other:?}")),
                            }
                        }
                    }
                }
            }
        }
    }
    ensure(worst <= 1e-12, || format!("relative difference {worst:e}"))?;
    Ok(format!(
        "{compared} closed-form and series pairs, largest relative difference {worst:.1e} ({guarded} series at the overflow guard)"
    ))
}

fn inner_products() -> Outcome {
    for d in [2, 3, 5] {
        let norm = QuasiNormSpec::euclidean(d);
        for mode in [
            IdentityMode::B { a: 2 },
            IdentityMode::B { a: 3 },
            IdentityMode::C { n: 3 },
            IdentityMode::C { n: 4 },
        ] {
            let mut smp = BoxSampler::with_default_box(PointShape::real(d), 5);
            let rep = inner_product_characterization(&norm, mode, &mut smp, 10_000).map_err(|e| e.to_string())?;
            ensure(rep.passed && rep.tuples >= 10_000, || format!("R^{d} {mode:?}: {rep:?}"))?;
        }
    }
    let mut smp = BoxSampler::with_default_box(PointShape::real(2), 6);
    let rep = inner_product_characterization(&QuasiNormSpec::l1(2), IdentityMode::B { a: 2 }, &mut smp, 10_000)
        .map_err(|e| e.to_string())?;
    let w = rep.witness.ok_or("l1 passed identity (b)")?;
    ensure(
        w.tuple == [ModulePoint::from_reals(&[1.0, 0.0]), ModulePoint::from_reals(&[0.0, 1.0])],
        || format!("witness {:?}", w.tuple),
    )?;
    ensure((w.residual.abs() - 4.0).abs() < 1e-12, || format!("residual {}", w.residual))?;
    Ok("Euclidean R^2, R^3, R^5 pass (b) and (c) on 10^4 samples; l1 fails (b) at (1,0), (0,1) with residual 4".into())
}

fn convergence_rate() -> Outcome {
    let f = Mapping::perturbed(Mapping::square(), Mapping::Sine, 1.0);
    let e1 = QuasiNormSpec::euclidean(1);
    let mut smp = BoxSampler::with_default_box(PointShape::real(1), 7);
    let theta = fit_theta(&f, 3, &e1, &e1, &mut smp, 5000).map_err(|e| e.to_string())?;
    // the constant in the a-priori gap bound Phi / 4^m
    let c = 5.0 / 3.0 * theta;
    let mut probes: Vec<_> = (0..50).map(|_| smp.point()).collect();
    probes.push(ModulePoint::from_reals(&[1.0]));
    let mut cfg = StabilityConfig::new(3, e1, probes);
    cfg.m_max = 20;
    cfg.tol = 1e-300;
    let rep = stabilize(&f, &ControlFunction::Constant { theta }, &cfg).map_err(|e| e.to_string())?;
    let mut observed: f64 = 0.0;
    for p in &rep.probes {
        ensure(p.gaps.len() == 20, || format!("{} steps at {:?}", p.gaps.len(), p.probe))?;
        for (i, g) in p.gaps.iter().enumerate() {
            let scale = 4f64.powi(i as i32 + 1);
            observed = observed.max(g * scale);
            ensure(*g <= c / scale * (1.0 + 1e-9), || format!("gap {g:e} at m = {} exceeds C 4^-m", i + 1))?;
        }
    }
    let at_one = rep.probes.last().unwrap();
    for (m, it) in at_one.iterates.iter().enumerate() {
        let dist = (it.real_parts()[0] - 1.0).abs();
        ensure(dist <= 4f64.powi(-(m as i32)) + 1e-15, || format!("x = 1: |Q_m - 1| = {dist:e} at m = {m}"))?;
    }
    Ok(format!(
        "C = 5 theta/3 = {c:.3} from fitted theta; observed max gap 4^m = {observed:.3} over 51 probes, m <= 20"
    ))
}

fn covariance() -> Outcome {
    let f = Mapping::perturbed(Mapping::MatrixSquare, Mapping::Sine, 0.1);
    let e = QuasiNormSpec::euclidean(1);
    let shape = PointShape::complex(1, 2);
    let mut smp = BoxSampler::with_default_box(shape, 8);
    let theta = fit_theta(&f, 3, &e, &e, &mut smp, 2000).map_err(|e| e.to_string())?;
    let probes: Vec<_> = (0..20).map(|_| smp.point()).collect();
    let us: Vec<_> = (0..100).map(|_| smp.unitary()).collect();
    let mut cfg = StabilityConfig::new(3, e, probes);
    cfg.field = quadlab_core::Field::Complex;
    let rep = verify_unitary_covariance(&f, &ControlFunction::Constant { theta }, &cfg, &us, 1e-6)
        .map_err(|e| e.to_string())?;
    ensure(rep.passed && rep.samples == 100, || format!("{rep:?}"))?;
    Ok(format!("100 Haar unitaries on M_2(C), max relative defect {:.1e}", rep.max_relative))
}

fn open_problem() -> Outcome {
    let params = BoundParams {
        n: 3,
        setting: Setting::Quasi { k: 4.0 },
        control: ControlFunction::Constant { theta: 1.0 },
        norm_x: 1.0,
    };
    match closed_form_bounds(&params) {
        Err(Error::OpenProblem(_)) => {}
        other => return Err(format!("K = 4 gave {other:?}")),
    }
    let sweep = dead_zone_sweep(3, 1.0, &[1.0, 2.0, 3.0, 3.5, 4.0, 5.0]);
    let signs: Vec<bool> = sweep.iter().map(|p| p.denominator > 0.0).collect();
    ensure(signs == [true, true, true, true, false, false], || format!("{signs:?}"))?;
    ensure(sweep.last().unwrap().denominator < 0.0, || "denominator never negative".into())?;
    for p in &sweep {
        ensure(p.bound.is_ok() == (p.denominator > 0.0), || format!("K = {}: {:?}", p.k, p.bound))?;
    }
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = Command::new(env!("CARGO_BIN_EXE_quadlab"))
        .env("QUADLAB_OUT_DIR", dir.path())
        .args(["preset", "open-problem-3.6"])
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.code() == Some(4), || format!("exit {:?}", out.status.code()))?;
    Ok("K = 4 rejected as open problem; (n-1)^2 - K goes 3, 2, 1, 0.5, 0, -1; preset exits 4".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("fe3 and fe1 solution spaces agree over F_q^d", oracle_fe3),
        ("fe3_0 and fe1 solution spaces agree over F_q^d", oracle_fe3_0),
        ("quadratic forms solve every equation", forward_residuals),
        ("power control bound 5/6 |x|", power_bound),
        ("constant control in l^(1/2)(R^2)", quasi_constant),
        ("K = 1 and p = 1 bounds coincide", unit_equality),
        ("inner-product identities", inner_products),
        ("iterate gaps decay like 4^-m", convergence_rate),
        ("unitary covariance of the limit", covariance),
        ("open-problem boundary", open_problem),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {:>2} PASS  {name} [{secs:.2} s]: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} [{secs:.2} s]: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
