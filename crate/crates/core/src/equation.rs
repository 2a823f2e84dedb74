//! Residual evaluators for the quadratic-type functional equations.
//!
//! Every residual is returned as a codomain value (left side minus right side);
//! callers pick the norm to measure it with.
//!
//! * `fe1`:  `f(x+y) + f(x-y) - 2f(x) - 2f(y)`
//! * `fe2`:  `3f(x-y) + 3f(y-z) + 3f(x-z) - f(y+z-2x) - f(x+z-2y) - f(x+y-2z)`
//! * `fe3(n)`: `n sum_{i<j} f(x_i - x_j) - sum_i f(sum_j x_j - n x_i)`
//! * `fe3_0(a)`: `f(ax+y) + f(x+ay) + (a-1)f(x-y) - (a+1)f(x+y) - (a^2-1)(f(x)+f(y))`
//! * `homogeneity(s, m)`: `f(s x) - s^m f(x)`

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::algebra::{hat, AlgebraElement, HatMode, ModulePoint, Unitary};
use crate::error::{invalid, mismatch, Error, Result};
use crate::mapping::Evaluate;
use crate::norm::QuasiNormSpec;
use crate::sampling::BoxSampler;

/// Tolerance on `| ||u|| - 1 |` for the self-adjoint twisted remainder.
pub const UNIT_NORM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case")]
pub enum EquationSpec {
    Fe1,
    Fe2,
    Fe3 {
        n: usize,
    },
    #[serde(rename = "fe3_0")]
    Fe3Zero {
        a: i64,
    },
    /// `f(scale x) = scale^degree f(x)`.
    Homogeneity {
        scale: i64,
        degree: u32,
    },
}

/// One summand `coeff * f(sum_i args[i] x_i)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Term {
    pub coeff: i64,
    pub args: Vec<i64>,
}

fn term(coeff: i64, args: &[i64]) -> Term {
    Term {
        coeff,
        args: args.to_vec(),
    }
}

impl EquationSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            EquationSpec::Fe3 { n } if n < 3 => {
                Err(invalid("n", format!("arity must be at least 3, got {n}")))
            }
            EquationSpec::Fe3Zero { a } if a.abs() == 1 => {
                Err(invalid("a", "the equation needs |a| != 1"))
            }
            EquationSpec::Homogeneity { scale: 0, .. } => {
                Err(invalid("scale", "must be nonzero"))
            }
            _ => Ok(()),
        }
    }

    /// Number of free variables.
    pub fn arity(&self) -> usize {
        match *self {
            EquationSpec::Fe1 | EquationSpec::Fe3Zero { .. } => 2,
            EquationSpec::Fe2 => 3,
            EquationSpec::Fe3 { n } => n,
            EquationSpec::Homogeneity { .. } => 1,
        }
    }

    /// The equation as a signed sum of evaluations at integer combinations of
    /// the variables. Terms are listed as written, without merging.
    pub fn terms(&self) -> Vec<Term> {
        match *self {
            EquationSpec::Fe1 => vec![
                term(1, &[1, 1]),
                term(1, &[1, -1]),
                term(-2, &[1, 0]),
                term(-2, &[0, 1]),
            ],
            EquationSpec::Fe2 => vec![
                term(3, &[1, -1, 0]),
                term(3, &[0, 1, -1]),
                term(3, &[1, 0, -1]),
                term(-1, &[-2, 1, 1]),
                term(-1, &[1, -2, 1]),
                term(-1, &[1, 1, -2]),
            ],
            EquationSpec::Fe3 { n } => {
                let ni = n as i64;
                let mut out = Vec::with_capacity(n * (n + 1) / 2);
                for i in 0..n {
                    for j in (i + 1)..n {
                        let mut args = vec![0; n];
                        args[i] = 1;
                        args[j] = -1;
                        out.push(Term { coeff: ni, args });
                    }
                }
                for i in 0..n {
                    let mut args = vec![1; n];
                    args[i] = 1 - ni;
                    out.push(Term { coeff: -1, args });
                }
                out
            }
            EquationSpec::Fe3Zero { a } => vec![
                term(1, &[a, 1]),
                term(1, &[1, a]),
                term(a - 1, &[1, -1]),
                term(-(a + 1), &[1, 1]),
                term(-(a * a - 1), &[1, 0]),
                term(-(a * a - 1), &[0, 1]),
            ],
            EquationSpec::Homogeneity { scale, degree } => {
                vec![term(1, &[scale]), term(-scale.pow(degree), &[1])]
            }
        }
    }
}

impl fmt::Display for EquationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EquationSpec::Fe1 => write!(f, "fe1"),
            EquationSpec::Fe2 => write!(f, "fe2"),
            EquationSpec::Fe3 { n } => write!(f, "fe3:{n}"),
            EquationSpec::Fe3Zero { a } => write!(f, "fe3_0:{a}"),
            EquationSpec::Homogeneity { scale, degree } => write!(f, "hom:{scale}:{degree}"),
        }
    }
}

impl FromStr for EquationSpec {
    type Err = Error;

    /// `fe1`, `fe2`, `fe3:<n>`, `fe3_0:<a>`, `hom:<scale>:<degree>`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |i: usize| -> Result<i64> {
            parts
                .get(i)
                .ok_or_else(|| invalid("equation", format!("missing parameter in `{s}`")))?
                .parse::<i64>()
                .map_err(|e| invalid("equation", format!("bad parameter in `{s}`: {e}")))
        };
        let eq = match parts[0] {
            "fe1" if parts.len() == 1 => EquationSpec::Fe1,
            "fe2" if parts.len() == 1 => EquationSpec::Fe2,
            "fe3" if parts.len() == 2 => {
                let n = num(1)?;
                if n < 0 {
                    return Err(invalid("n", "arity must be positive"));
                }
                EquationSpec::Fe3 { n: n as usize }
            }
            "fe3_0" if parts.len() == 2 => EquationSpec::Fe3Zero { a: num(1)? },
            "hom" if parts.len() == 3 => {
                let degree = num(2)?;
                if !(0..=32).contains(&degree) {
                    return Err(invalid("degree", "must be in 0..=32"));
                }
                EquationSpec::Homogeneity {
                    scale: num(1)?,
                    degree: degree as u32,
                }
            }
            _ => {
                return Err(invalid(
                    "equation",
                    format!("unknown equation `{s}` (expected fe1, fe2, fe3:<n>, fe3_0:<a>, hom:<s>:<m>)"),
                ))
            }
        };
        eq.validate()?;
        Ok(eq)
    }
}

fn same_shape(points: &[&ModulePoint]) -> Result<()> {
    let first = points[0];
    points.iter().try_for_each(|p| first.ensure_same_shape(p))
}

fn add_scaled(acc: &mut Option<ModulePoint>, v: ModulePoint, c: f64) -> Result<()> {
    let v = v.scale_real(c);
    *acc = Some(match acc.take() {
        None => v,
        Some(a) => {
            a.ensure_same_shape(&v)?;
            &a + &v
        }
    });
    Ok(())
}

/// `f(x+y) + f(x-y) - 2f(x) - 2f(y)`.
pub fn residual_fe1(f: &dyn Evaluate, x: &ModulePoint, y: &ModulePoint) -> Result<ModulePoint> {
    same_shape(&[x, y])?;
    let mut acc = None;
    add_scaled(&mut acc, f.evaluate(&(x + y))?, 1.0)?;
    add_scaled(&mut acc, f.evaluate(&(x - y))?, 1.0)?;
    add_scaled(&mut acc, f.evaluate(x)?, -2.0)?;
    add_scaled(&mut acc, f.evaluate(y)?, -2.0)?;
    Ok(acc.expect("nonempty"))
}

/// `3f(x-y) + 3f(y-z) + 3f(x-z) - f(y+z-2x) - f(x+z-2y) - f(x+y-2z)`.
pub fn residual_fe2(
    f: &dyn Evaluate,
    x: &ModulePoint,
    y: &ModulePoint,
    z: &ModulePoint,
) -> Result<ModulePoint> {
    same_shape(&[x, y, z])?;
    let mut acc = None;
    add_scaled(&mut acc, f.evaluate(&(x - y))?, 3.0)?;
    add_scaled(&mut acc, f.evaluate(&(y - z))?, 3.0)?;
    add_scaled(&mut acc, f.evaluate(&(x - z))?, 3.0)?;
    add_scaled(&mut acc, f.evaluate(&(&(y + z) - &x.scale_real(2.0)))?, -1.0)?;
    add_scaled(&mut acc, f.evaluate(&(&(x + z) - &y.scale_real(2.0)))?, -1.0)?;
    add_scaled(&mut acc, f.evaluate(&(&(x + y) - &z.scale_real(2.0)))?, -1.0)?;
    Ok(acc.expect("nonempty"))
}

/// `n sum_{i<j} f(x_i - x_j) - sum_i f(sum_j x_j - n x_i)`.
pub fn residual_fe3(f: &dyn Evaluate, n: usize, xs: &[ModulePoint]) -> Result<ModulePoint> {
    twisted_remainder(f, None, n, xs)
}

/// `f(ax+y) + f(x+ay) + (a-1)f(x-y) - (a+1)f(x+y) - (a^2-1)[f(x)+f(y)]`.
pub fn residual_fe3_0(
    f: &dyn Evaluate,
    a: i64,
    x: &ModulePoint,
    y: &ModulePoint,
) -> Result<ModulePoint> {
    EquationSpec::Fe3Zero { a }.validate()?;
    same_shape(&[x, y])?;
    let af = a as f64;
    let mut acc = None;
    add_scaled(&mut acc, f.evaluate(&(&x.scale_real(af) + y))?, 1.0)?;
    add_scaled(&mut acc, f.evaluate(&(x + &y.scale_real(af)))?, 1.0)?;
    add_scaled(&mut acc, f.evaluate(&(x - y))?, af - 1.0)?;
    add_scaled(&mut acc, f.evaluate(&(x + y))?, -(af + 1.0))?;
    add_scaled(&mut acc, f.evaluate(x)?, -(af * af - 1.0))?;
    add_scaled(&mut acc, f.evaluate(y)?, -(af * af - 1.0))?;
    Ok(acc.expect("nonempty"))
}

/// `f(s x) - s^m f(x)`.
pub fn residual_homogeneity(
    f: &dyn Evaluate,
    scale: i64,
    degree: u32,
    x: &ModulePoint,
) -> Result<ModulePoint> {
    let mut acc = None;
    add_scaled(&mut acc, f.evaluate(&x.scale_real(scale as f64))?, 1.0)?;
    add_scaled(&mut acc, f.evaluate(x)?, -(scale as f64).powi(degree as i32))?;
    Ok(acc.expect("nonempty"))
}

/// Residual of any equation on `eq.arity()` points.
pub fn residual(f: &dyn Evaluate, eq: &EquationSpec, xs: &[ModulePoint]) -> Result<ModulePoint> {
    eq.validate()?;
    if xs.len() != eq.arity() {
        return Err(mismatch(
            format!("{} points", eq.arity()),
            format!("{} points", xs.len()),
        ));
    }
    match *eq {
        EquationSpec::Fe1 => residual_fe1(f, &xs[0], &xs[1]),
        EquationSpec::Fe2 => residual_fe2(f, &xs[0], &xs[1], &xs[2]),
        EquationSpec::Fe3 { n } => residual_fe3(f, n, xs),
        EquationSpec::Fe3Zero { a } => residual_fe3_0(f, a, &xs[0], &xs[1]),
        EquationSpec::Homogeneity { scale, degree } => {
            residual_homogeneity(f, scale, degree, &xs[0])
        }
    }
}

/// Residual assembled from [`EquationSpec::terms`].
pub fn residual_from_terms(
    f: &dyn Evaluate,
    eq: &EquationSpec,
    xs: &[ModulePoint],
) -> Result<ModulePoint> {
    let mut acc = None;
    for t in eq.terms() {
        let arg = ModulePoint::linear_combination(&t.args, xs)?;
        add_scaled(&mut acc, f.evaluate(&arg)?, t.coeff as f64)?;
    }
    Ok(acc.expect("nonempty"))
}

enum Twist<'a> {
    Conjugate(&'a AlgebraElement),
    LeftMultiply(&'a AlgebraElement, AlgebraElement),
}

fn twisted_remainder(
    f: &dyn Evaluate,
    twist: Option<Twist<'_>>,
    n: usize,
    xs: &[ModulePoint],
) -> Result<ModulePoint> {
    EquationSpec::Fe3 { n }.validate()?;
    if xs.len() != n {
        return Err(mismatch(format!("{n} points"), format!("{} points", xs.len())));
    }
    let refs: Vec<&ModulePoint> = xs.iter().collect();
    same_shape(&refs)?;
    let u = match &twist {
        None => None,
        Some(Twist::Conjugate(u)) | Some(Twist::LeftMultiply(u, _)) => Some(*u),
    };
    if let Some(u) = u {
        if u.k() != xs[0].k() {
            return Err(mismatch(
                format!("algebra M_{}", xs[0].k()),
                format!("algebra M_{}", u.k()),
            ));
        }
    }
    let moved: Vec<ModulePoint> = match u {
        Some(u) => xs.iter().map(|x| x.left_mul(u)).collect(),
        None => xs.to_vec(),
    };
    let mut acc = None;
    for i in 0..n {
        for j in (i + 1)..n {
            add_scaled(&mut acc, f.evaluate(&(&moved[i] - &moved[j]))?, n as f64)?;
        }
    }
    let total = xs[1..].iter().fold(xs[0].clone(), |a, b| &a + b);
    for x in xs {
        let v = f.evaluate(&(&total - &x.scale_real(n as f64)))?;
        let v = match &twist {
            None => v,
            Some(Twist::Conjugate(u)) => {
                if v.k() != u.k() {
                    return Err(mismatch(
                        format!("codomain over M_{}", u.k()),
                        format!("codomain over M_{}", v.k()),
                    ));
                }
                v.conjugate_by(u)
            }
            Some(Twist::LeftMultiply(_, h)) => v.left_mul(h),
        };
        add_scaled(&mut acc, v, -1.0)?;
    }
    Ok(acc.expect("n >= 3"))
}

/// `D_u f(x_1..x_n) = n sum_{i<j} f(u x_i - u x_j) - sum_i u f(sum_j x_j - n x_i) u*`.
pub fn approximate_remainder(
    f: &dyn Evaluate,
    u: &Unitary,
    n: usize,
    xs: &[ModulePoint],
) -> Result<ModulePoint> {
    twisted_remainder(f, Some(Twist::Conjugate(u.as_element())), n, xs)
}

/// `n sum_{i<j} f(u x_i - u x_j) - sum_i û f(sum_j x_j - n x_i)` for `||u|| = 1`.
pub fn approximate_remainder_sa(
    f: &dyn Evaluate,
    u: &AlgebraElement,
    mode: HatMode,
    n: usize,
    xs: &[ModulePoint],
) -> Result<ModulePoint> {
    let norm = u.operator_norm();
    if (norm - 1.0).abs() > UNIT_NORM_TOL {
        return Err(invalid("u", format!("need ||u|| = 1, got {norm}")));
    }
    let h = hat(u, mode);
    twisted_remainder(f, Some(Twist::LeftMultiply(u, h)), n, xs)
}

/// Largest residual norm over `trials` sampled tuples. For `fe3` every trial
/// also draws a unitary and measures the twisted remainder `D_u f`.
pub fn empirical_sup_residual(
    f: &dyn Evaluate,
    eq: &EquationSpec,
    sampler: &mut BoxSampler,
    trials: usize,
    codomain_norm: &QuasiNormSpec,
) -> Result<f64> {
    if trials == 0 {
        return Err(invalid("trials", "need at least one trial"));
    }
    eq.validate()?;
    let mut sup: f64 = 0.0;
    for _ in 0..trials {
        let xs = sampler.tuple(eq.arity());
        let r = match *eq {
            EquationSpec::Fe3 { n } => {
                let u = sampler.unitary();
                approximate_remainder(f, &u, n, &xs)?
            }
            _ => residual(f, eq, &xs)?,
        };
        sup = sup.max(codomain_norm.norm_eval(&r)?);
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{sample_unitary, PointShape};
    use crate::mapping::Mapping;
    use num_complex::Complex64;

    fn r(v: f64) -> ModulePoint {
        ModulePoint::from_reals(&[v])
    }

    fn val(p: &ModulePoint) -> f64 {
        p.coord(0).entry(0, 0).re
    }

    fn mono(d: u32) -> Mapping {
        Mapping::Monomial { degree: d }
    }

    #[test]
    fn fe1_examples() {
        assert!(val(&residual_fe1(&mono(2), &r(1.7), &r(-0.3)).unwrap()).abs() < 1e-12);
        assert_eq!(val(&residual_fe1(&mono(3), &r(1.0), &r(1.0)).unwrap()), 4.0);
        let c = 0.75;
        let f = Mapping::Sum {
            terms: vec![mono(2), Mapping::Constant { value: c }],
        };
        assert_eq!(val(&residual_fe1(&f, &r(0.0), &r(0.0)).unwrap()), -2.0 * c);
    }

    #[test]
    fn fe2_examples() {
        assert!(val(&residual_fe2(&mono(2), &r(1.0), &r(2.5), &r(-4.0)).unwrap()).abs() < 1e-12);
        assert_eq!(val(&residual_fe2(&mono(3), &r(1.0), &r(0.0), &r(0.0)).unwrap()), 12.0);
    }

    #[test]
    fn fe3_examples() {
        let xs = [r(1.0), r(0.0), r(0.0)];
        assert_eq!(val(&residual_fe3(&mono(2), 3, &xs).unwrap()), 0.0);
        assert_eq!(val(&residual_fe3(&mono(3), 3, &xs).unwrap()), 12.0);
        // all-zero tuple: (n C(n,2) - n) f(0)
        for n in 3..=6 {
            let zs = vec![r(0.0); n];
            let c = 1.5;
            let f = Mapping::Constant { value: c };
            let expected = (n * n * (n - 1) / 2 - n) as f64 * c;
            assert_eq!(val(&residual_fe3(&f, n, &zs).unwrap()), expected);
        }
        assert!(residual_fe3(&mono(2), 2, &[r(1.0), r(2.0)]).is_err());
    }

    #[test]
    fn fe3_0_examples() {
        assert_eq!(val(&residual_fe3_0(&mono(2), 2, &r(1.0), &r(1.0)).unwrap()), 0.0);
        assert_eq!(val(&residual_fe3_0(&mono(4), 2, &r(1.0), &r(1.0)).unwrap()), 108.0);
        assert!(residual_fe3_0(&mono(2), 1, &r(1.0), &r(1.0)).is_err());
        assert!(residual_fe3_0(&mono(2), -1, &r(1.0), &r(1.0)).is_err());
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let two = ModulePoint::from_reals(&[1.0, 2.0]);
        assert!(matches!(
            residual_fe1(&Mapping::MatrixSquare, &r(1.0), &two),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn remainder_with_identity_is_fe3() {
        let f = Mapping::perturbed(mono(2), Mapping::Sine, 1.0);
        let xs = [r(0.3), r(-1.2), r(2.2), r(4.0)];
        let a = approximate_remainder(&f, &Unitary::identity(1), 4, &xs).unwrap();
        let b = residual_fe3(&f, 4, &xs).unwrap();
        assert!((val(&a) - val(&b)).abs() < 1e-12);
    }

    #[test]
    fn abs_square_is_phase_covariant() {
        let f = Mapping::QuadraticForm {
            coefficients: vec![vec![1.0]],
        };
        let xs: Vec<_> = [Complex64::new(1.0, 2.0), Complex64::new(-0.5, 0.1), Complex64::new(3.0, -1.0)]
            .iter()
            .map(|z| ModulePoint::from_scalars(&[*z]))
            .collect();
        for seed in 0..10 {
            let u = sample_unitary(1, seed);
            let d = approximate_remainder(&f, &u, 3, &xs).unwrap();
            assert!(d.frobenius_norm() < 1e-9);
            let s = approximate_remainder_sa(&f, u.as_element(), HatMode::Avg, 3, &xs).unwrap();
            assert!(s.frobenius_norm() < 1e-9);
        }
    }

    #[test]
    fn sa_remainder_rejects_non_unit() {
        let u = AlgebraElement::real(2.0);
        assert!(approximate_remainder_sa(&mono(2), &u, HatMode::Left, 3, &[r(1.0), r(0.0), r(0.0)]).is_err());
    }

    #[test]
    fn sa_remainder_with_one_is_fe3_and_cubic_is_not_covariant() {
        let xs = [r(1.0), r(0.0), r(0.0)];
        let one = AlgebraElement::real(1.0);
        let a = approximate_remainder_sa(&mono(3), &one, HatMode::Left, 3, &xs).unwrap();
        assert_eq!(val(&a), 12.0);
        // u = -1 on (1,0,0): 3(-1 - 1 + 0) - (-8 + 1 + 1) = 0
        let m = AlgebraElement::real(-1.0);
        let b = approximate_remainder_sa(&mono(3), &m, HatMode::Left, 3, &xs).unwrap();
        assert_eq!(val(&b), 0.0);
        // u = -1 on (1,1,0): 3(0 - 1 - 1) - (-1 - 1 + 8) = -12
        let xs2 = [r(1.0), r(1.0), r(0.0)];
        let c = approximate_remainder_sa(&mono(3), &m, HatMode::Left, 3, &xs2).unwrap();
        assert_eq!(val(&c), -12.0);
    }

    #[test]
    fn parse_and_display_roundtrip() {
        for s in ["fe1", "fe2", "fe3:4", "fe3_0:2", "fe3_0:0", "hom:2:3"] {
            let eq: EquationSpec = s.parse().unwrap();
            assert_eq!(eq.to_string(), s);
        }
        for bad in ["fe3:2", "fe3_0:1", "fe3_0:-1", "fe4", "fe3", "hom:0:2"] {
            assert!(bad.parse::<EquationSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn trials_zero_is_an_error() {
        let mut s = BoxSampler::with_default_box(PointShape::real(1), 0);
        let norm = QuasiNormSpec::euclidean(1);
        assert!(empirical_sup_residual(&mono(2), &EquationSpec::Fe1, &mut s, 0, &norm).is_err());
    }

    #[test]
    fn sine_perturbation_sup_is_bounded_by_term_count() {
        let f = Mapping::perturbed(mono(2), Mapping::Sine, 1.0);
        let mut s = BoxSampler::with_default_box(PointShape::real(1), 42);
        let norm = QuasiNormSpec::euclidean(1);
        let sup = empirical_sup_residual(&f, &EquationSpec::Fe3 { n: 3 }, &mut s, 5000, &norm).unwrap();
        assert!(sup <= 12.0, "{sup}");
        assert!(sup > 1.0);
    }

    #[test]
    fn sup_is_monotone_in_trials() {
        let f = Mapping::perturbed(mono(2), Mapping::Rational, 0.3);
        let norm = QuasiNormSpec::euclidean(1);
        let mut prev = 0.0;
        for trials in [1, 10, 100, 1000] {
            let mut s = BoxSampler::with_default_box(PointShape::real(1), 7);
            let v = empirical_sup_residual(&f, &EquationSpec::Fe3 { n: 4 }, &mut s, trials, &norm).unwrap();
            assert!(v >= prev);
            prev = v;
        }
    }
}
