//! Closed-form mapping families `f: M_1 -> M_2`.
//!
//! Every family except [`Mapping::Stack`] maps into a rank-one module over the
//! same algebra as its input. Mappings are plain data so experiment configs
//! can name them; [`Mapping::Custom`] wraps a closure and exists for tests.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraElement, ModulePoint};
use crate::error::{invalid, mismatch, Result};

/// Anything that can be evaluated on a module point.
pub trait Evaluate {
    fn evaluate(&self, x: &ModulePoint) -> Result<ModulePoint>;
}

impl<F> Evaluate for F
where
    F: Fn(&ModulePoint) -> Result<ModulePoint>,
{
    fn evaluate(&self, x: &ModulePoint) -> Result<ModulePoint> {
        self(x)
    }
}

type DynMap = dyn Fn(&ModulePoint) -> ModulePoint + Send + Sync;

/// Test-only evaluation hook.
#[derive(Clone)]
pub struct CustomMap(pub Arc<DynMap>);

impl fmt::Debug for CustomMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CustomMap(..)")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Mapping {
    /// `sum_ij M_ij x_i x_j*`; `x^T M x` on real points.
    QuadraticForm { coefficients: Vec<Vec<f64>> },
    /// `sum_i x_i x_i*`.
    MatrixSquare,
    /// `sum_i x_i^degree`.
    Monomial { degree: u32 },
    /// `value * I`.
    Constant { value: f64 },
    /// Bounded self-adjoint bump: Hermitian part of the entrywise
    /// `sin(Re z) + i sin(Im z)`, summed over coordinates. `sin t` on reals.
    Sine,
    /// `sum_i x_i x_i* x_i / (1 + ||x_i||_F^2)`; `t^3 / (1 + t^2)` on reals.
    Rational,
    /// `base(x) + amplitude * bump(x)`.
    Perturbed {
        base: Box<Mapping>,
        bump: Box<Mapping>,
        amplitude: f64,
    },
    /// Table over `F_q^d`, read at the integer parts of real coordinates.
    Tabulated { q: u64, d: usize, table: Vec<u64> },
    Sum { terms: Vec<Mapping> },
    /// Concatenates rank-one components into a rank-`len` codomain point.
    Stack { components: Vec<Mapping> },
    #[serde(skip)]
    Custom(CustomMap),
}

impl Mapping {
    pub fn custom(f: impl Fn(&ModulePoint) -> ModulePoint + Send + Sync + 'static) -> Self {
        Mapping::Custom(CustomMap(Arc::new(f)))
    }

    pub fn square() -> Self {
        Mapping::Monomial { degree: 2 }
    }

    pub fn perturbed(base: Mapping, bump: Mapping, amplitude: f64) -> Self {
        Mapping::Perturbed {
            base: Box::new(base),
            bump: Box::new(bump),
            amplitude,
        }
    }

    /// Checks the static invariants of the family tree.
    pub fn validate(&self) -> Result<()> {
        match self {
            Mapping::QuadraticForm { coefficients } => {
                let d = coefficients.len();
                if d == 0 {
                    return Err(invalid("coefficients", "empty coefficient matrix"));
                }
                for row in coefficients {
                    if row.len() != d {
                        return Err(mismatch(d, row.len()));
                    }
                }
                for i in 0..d {
                    for j in 0..d {
                        let (a, b) = (coefficients[i][j], coefficients[j][i]);
                        if !a.is_finite() || (a - b).abs() > 1e-12 * (1.0 + a.abs()) {
                            return Err(invalid(
                                "coefficients",
                                "coefficient matrix must be finite and symmetric",
                            ));
                        }
                    }
                }
                Ok(())
            }
            Mapping::Constant { value } if !value.is_finite() => {
                Err(invalid("value", "must be finite"))
            }
            Mapping::Perturbed {
                base,
                bump,
                amplitude,
            } => {
                if !amplitude.is_finite() {
                    return Err(invalid("amplitude", "must be finite"));
                }
                base.validate()?;
                bump.validate()
            }
            Mapping::Tabulated { q, d, table } => {
                let expected = q.checked_pow(*d as u32).unwrap_or(u64::MAX);
                if *q < 2 || table.len() as u64 != expected {
                    return Err(mismatch(expected, table.len()));
                }
                if table.iter().any(|v| v >= q) {
                    return Err(invalid("table", "entries must lie in 0..q"));
                }
                Ok(())
            }
            Mapping::Sum { terms } => terms.iter().try_for_each(Mapping::validate),
            Mapping::Stack { components } => {
                if components.is_empty() {
                    return Err(invalid("components", "stack needs at least one component"));
                }
                for c in components {
                    c.validate()?;
                    if c.codomain_rank() != 1 {
                        return Err(invalid("components", "stack components must be rank one"));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn codomain_rank(&self) -> usize {
        match self {
            Mapping::Stack { components } => components.len(),
            Mapping::Perturbed { base, .. } => base.codomain_rank(),
            Mapping::Sum { terms } => terms.first().map_or(1, Mapping::codomain_rank),
            _ => 1,
        }
    }

    pub fn eval(&self, x: &ModulePoint) -> Result<ModulePoint> {
        let k = x.k();
        Ok(match self {
            Mapping::QuadraticForm { coefficients } => {
                if coefficients.len() != x.rank() {
                    return Err(mismatch(
                        format!("rank {}", coefficients.len()),
                        format!("rank {}", x.rank()),
                    ));
                }
                let mut acc = AlgebraElement::zeros(k);
                for (i, row) in coefficients.iter().enumerate() {
                    for (j, m) in row.iter().enumerate() {
                        if *m != 0.0 {
                            let term = x.coord(i) * &x.coord(j).adjoint();
                            acc = &acc + &term.scale_real(*m);
                        }
                    }
                }
                ModulePoint::single(acc)
            }
            Mapping::MatrixSquare => ModulePoint::single(sum_coords(x, |c| c * &c.adjoint())),
            Mapping::Monomial { degree } => ModulePoint::single(sum_coords(x, |c| c.pow(*degree))),
            Mapping::Constant { value } => {
                ModulePoint::single(AlgebraElement::scalar_multiple(k, Complex64::new(*value, 0.0)))
            }
            Mapping::Sine => ModulePoint::single(sum_coords(x, |c| {
                let s = c.map_entries(|z| Complex64::new(z.re.sin(), z.im.sin()));
                (&s + &s.adjoint()).scale_real(0.5)
            })),
            Mapping::Rational => ModulePoint::single(sum_coords(x, |c| {
                let n2 = c.frobenius_norm().powi(2);
                (&(c * &c.adjoint()) * c).scale_real(1.0 / (1.0 + n2))
            })),
            Mapping::Perturbed {
                base,
                bump,
                amplitude,
            } => {
                let b = base.eval(x)?;
                let p = bump.eval(x)?;
                b.ensure_same_shape(&p)?;
                &b + &p.scale_real(*amplitude)
            }
            Mapping::Tabulated { q, d, table } => {
                if x.rank() != *d || k != 1 {
                    return Err(mismatch(
                        format!("rank {d} over M_1"),
                        format!("rank {} over M_{k}", x.rank()),
                    ));
                }
                let idx = x.real_parts().iter().fold(0u64, |acc, v| {
                    let r = (v.round() as i64).rem_euclid(*q as i64) as u64;
                    acc * q + r
                });
                ModulePoint::from_reals(&[table[idx as usize] as f64])
            }
            Mapping::Sum { terms } => {
                let mut iter = terms.iter();
                let first = iter
                    .next()
                    .ok_or(crate::error::Error::Empty("sum of mappings"))?;
                let mut acc = first.eval(x)?;
                for t in iter {
                    let v = t.eval(x)?;
                    acc.ensure_same_shape(&v)?;
                    acc = &acc + &v;
                }
                acc
            }
            Mapping::Stack { components } => ModulePoint::concat(
                components
                    .iter()
                    .map(|c| c.eval(x))
                    .collect::<Result<Vec<_>>>()?,
            )?,
            Mapping::Custom(f) => (f.0)(x),
        })
    }
}

impl Evaluate for Mapping {
    fn evaluate(&self, x: &ModulePoint) -> Result<ModulePoint> {
        self.eval(x)
    }
}

fn sum_coords(x: &ModulePoint, f: impl Fn(&AlgebraElement) -> AlgebraElement) -> AlgebraElement {
    x.coords()
        .iter()
        .map(f)
        .reduce(|a, b| &a + &b)
        .expect("rank >= 1")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::sample_unitary;

    fn real(f: &Mapping, xs: &[f64]) -> f64 {
        f.eval(&ModulePoint::from_reals(xs)).unwrap().coord(0).entry(0, 0).re
    }

    #[test]
    fn quadratic_form_is_xtmx_on_reals() {
        let f = Mapping::QuadraticForm {
            coefficients: vec![vec![1.0, 1.5], vec![1.5, 0.0]],
        };
        f.validate().unwrap();
        assert_eq!(real(&f, &[2.0, 3.0]), 4.0 + 2.0 * 1.5 * 6.0);
    }

    #[test]
    fn asymmetric_form_rejected() {
        let f = Mapping::QuadraticForm {
            coefficients: vec![vec![1.0, 1.0], vec![0.0, 1.0]],
        };
        assert!(f.validate().is_err());
    }

    #[test]
    fn perturbed_adds_scaled_bump() {
        let f = Mapping::perturbed(Mapping::square(), Mapping::Sine, 0.1);
        let t = 1.3f64;
        assert!((real(&f, &[t]) - (t * t + 0.1 * t.sin())).abs() < 1e-15);
    }

    #[test]
    fn rational_on_reals() {
        let t = 2.0f64;
        assert!((real(&Mapping::Rational, &[t]) - t.powi(3) / (1.0 + t * t)).abs() < 1e-15);
    }

    #[test]
    fn matrix_square_is_self_adjoint() {
        let u = sample_unitary(2, 3);
        let x = ModulePoint::single(u.as_element().scale_real(2.0));
        let y = Mapping::MatrixSquare.eval(&x).unwrap();
        assert!(y.coord(0).is_self_adjoint(1e-12));
        assert!((&y.coord(0).clone() - &AlgebraElement::identity(2).scale_real(4.0))
            .frobenius_norm()
            < 1e-12);
    }

    #[test]
    fn tabulated_reads_reduced_coordinates() {
        let q = 5;
        let table: Vec<u64> = (0..q).map(|x| (x * x) % q).collect();
        let f = Mapping::Tabulated { q, d: 1, table };
        f.validate().unwrap();
        assert_eq!(real(&f, &[7.0]), 4.0);
        assert_eq!(real(&f, &[-1.0]), 1.0);
    }

    #[test]
    fn stack_concatenates() {
        let f = Mapping::Stack {
            components: vec![Mapping::square(), Mapping::Constant { value: 2.0 }],
        };
        f.validate().unwrap();
        let y = f.eval(&ModulePoint::from_reals(&[3.0])).unwrap();
        assert_eq!(y.real_parts(), vec![9.0, 2.0]);
        assert_eq!(f.codomain_rank(), 2);
    }

    #[test]
    fn serde_roundtrip_of_nested_family() {
        let f = Mapping::perturbed(
            Mapping::QuadraticForm {
                coefficients: vec![vec![1.0]],
            },
            Mapping::Sum {
                terms: vec![Mapping::Sine, Mapping::Rational],
            },
            0.25,
        );
        let s = serde_json::to_string(&f).unwrap();
        let back: Mapping = serde_json::from_str(&s).unwrap();
        assert_eq!(real(&f, &[1.7]), real(&back, &[1.7]));
    }
}
