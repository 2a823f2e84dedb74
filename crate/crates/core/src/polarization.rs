//! Recovering the biadditive form behind a quadratic mapping, and the
//! parallelogram-type tests that detect inner-product norms.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::ModulePoint;
use crate::equation::EquationSpec;
use crate::error::{Error, Result};
use crate::finite::FunctionVector;
use crate::mapping::Evaluate;
use crate::norm::QuasiNormSpec;
use crate::sampling::BoxSampler;

/// Relative tolerance of the real-valued identity checks.
pub const IDENTITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarization {
    /// `B(x, y) = [Q(x+y) - Q(x-y)] / 4`.
    #[default]
    Real,
    /// `B(x, y) = [Q(x+y) - Q(x-y) + iQ(x+iy) - iQ(x-iy)] / 4`.
    Complex,
}

pub fn biadditive_from_quadratic(
    q: &dyn Evaluate,
    x: &ModulePoint,
    y: &ModulePoint,
    mode: Polarization,
) -> Result<ModulePoint> {
    x.ensure_same_shape(y)?;
    let mut acc = &q.evaluate(&(x + y))? - &q.evaluate(&(x - y))?;
    if mode == Polarization::Complex {
        let iy = y.scale(Complex64::i());
        let twist = &q.evaluate(&(x + &iy))? - &q.evaluate(&(x - &iy))?;
        acc = &acc + &twist.scale(Complex64::i());
    }
    Ok(acc.scale_real(0.25))
}

/// `[f(x+y) - f(x-y)] / 4` over `F_q`. Groups only admit odd `q`, so 4 is a unit.
pub fn biadditive_from_table(f: &FunctionVector, x: usize, y: usize) -> u32 {
    f.polarize(x, y)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagonalDefect {
    NotAdditive,
    Asymmetric,
    OffDiagonal,
}

/// A sampled triple on which the polarized form misbehaves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalWitness {
    pub defect: DiagonalDefect,
    pub x: ModulePoint,
    pub y: ModulePoint,
    pub z: ModulePoint,
    pub residual: f64,
}

/// Samples `(x, y, z)` and checks, in this order, `B(x+z, y) = B(x,y) + B(z,y)`,
/// `B(x, y) = B(y, x)` (adjoint of it for complex polarization) and
/// `Q(x) = B(x, x)`, each to [`IDENTITY_TOL`] relative to the values involved.
pub fn check_diagonal(
    q: &dyn Evaluate,
    sampler: &mut BoxSampler,
    samples: usize,
    mode: Polarization,
) -> Result<Option<DiagonalWitness>> {
    let b = |x: &ModulePoint, y: &ModulePoint| biadditive_from_quadratic(q, x, y, mode);
    for _ in 0..samples {
        let (x, y, z) = (sampler.point(), sampler.point(), sampler.point());
        let witness = |defect, residual| DiagonalWitness {
            defect,
            x: x.clone(),
            y: y.clone(),
            z: z.clone(),
            residual,
        };

        let bxy = b(&x, &y)?;
        let lhs = b(&(&x + &z), &y)?;
        let rhs = &bxy + &b(&z, &y)?;
        if let Some(r) = defect(&lhs, &rhs) {
            return Ok(Some(witness(DiagonalDefect::NotAdditive, r)));
        }
        let byx = b(&y, &x)?;
        let swapped = match mode {
            Polarization::Real => byx,
            Polarization::Complex => byx.adjoint(),
        };
        if let Some(r) = defect(&bxy, &swapped) {
            return Ok(Some(witness(DiagonalDefect::Asymmetric, r)));
        }
        if let Some(r) = defect(&q.evaluate(&x)?, &b(&x, &x)?) {
            return Ok(Some(witness(DiagonalDefect::OffDiagonal, r)));
        }
    }
    Ok(None)
}

fn defect(a: &ModulePoint, b: &ModulePoint) -> Option<f64> {
    let r = (a - b).frobenius_norm();
    let scale = 1.0 + a.frobenius_norm() + b.frobenius_norm();
    (r > IDENTITY_TOL * scale).then_some(r)
}

/// Which identity to test `Q = ||.||^2` against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum IdentityMode {
    /// `Q(ax+y) + Q(x+ay) + (a-1)Q(x-y) = (a+1)Q(x+y) + (a^2-1)[Q(x)+Q(y)]`.
    B { a: i64 },
    /// `n sum_{i<j} Q(x_i-x_j) = sum_i Q(sum_j x_j - n x_i)`.
    C { n: usize },
}

impl IdentityMode {
    pub fn equation(&self) -> EquationSpec {
        match *self {
            IdentityMode::B { a } => EquationSpec::Fe3Zero { a },
            IdentityMode::C { n } => EquationSpec::Fe3 { n },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityViolation {
    pub tuple: Vec<ModulePoint>,
    pub residual: f64,
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InnerProductReport {
    pub passed: bool,
    pub tuples: usize,
    pub sup_residual: f64,
    /// First tuple whose residual exceeds the tolerance.
    pub witness: Option<IdentityViolation>,
}

/// Residual of the identity with `Q = ||.||^2`, and its scale
/// `1 + sum |c| Q(arg)`.
pub fn identity_residual(norm: &QuasiNormSpec, eq: &EquationSpec, xs: &[ModulePoint]) -> Result<(f64, f64)> {
    let mut residual = 0.0;
    let mut scale = 1.0;
    for term in eq.terms() {
        let arg = ModulePoint::linear_combination(&term.args, xs)?;
        let v = norm.norm_eval(&arg)?.powi(2);
        residual += term.coeff as f64 * v;
        scale += (term.coeff as f64).abs() * v;
    }
    Ok((residual, scale))
}

/// Tests the identity on every tuple of distinct canonical basis vectors in
/// the first two slots (zeros elsewhere), then on `trials` sampled tuples.
/// Stops at the first violation.
pub fn inner_product_characterization(
    norm: &QuasiNormSpec,
    mode: IdentityMode,
    sampler: &mut BoxSampler,
    trials: usize,
) -> Result<InnerProductReport> {
    let eq = mode.equation();
    eq.validate()?;
    let shape = sampler.shape();
    if shape.rank != norm.dim() {
        return Err(crate::error::mismatch(
            format!("rank {}", norm.dim()),
            format!("rank {}", shape.rank),
        ));
    }
    let arity = eq.arity();
    let mut canonical = Vec::new();
    for i in 0..shape.rank {
        for j in 0..shape.rank {
            if i != j {
                let mut t = vec![ModulePoint::zeros(shape.rank, shape.k); arity];
                t[0] = ModulePoint::basis(shape.rank, shape.k, i);
                t[1] = ModulePoint::basis(shape.rank, shape.k, j);
                canonical.push(t);
            }
        }
    }
    let mut report = InnerProductReport {
        passed: true,
        tuples: 0,
        sup_residual: 0.0,
        witness: None,
    };
    let sampled = (0..trials).map(|_| sampler.tuple(arity));
    for xs in canonical.into_iter().chain(sampled) {
        let (r, scale) = identity_residual(norm, &eq, &xs)?;
        if !r.is_finite() {
            return Err(Error::Divergent(format!("non-finite identity residual {r}")));
        }
        report.tuples += 1;
        report.sup_residual = report.sup_residual.max(r.abs());
        if r.abs() > IDENTITY_TOL * scale {
            report.passed = false;
            report.witness = Some(IdentityViolation {
                tuple: xs,
                residual: r.abs(),
                scale,
            });
            break;
        }
    }
    Ok(report)
}
