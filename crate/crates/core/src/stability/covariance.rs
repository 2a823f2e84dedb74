//! Checks that limits of the direct method commute with the algebra action.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::control::ControlFunction;
use super::engine::{estimate, StabilityConfig};
use crate::algebra::Unitary;
use crate::error::{Error, Result};
use crate::mapping::Evaluate;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceReport {
    pub samples: usize,
    /// Largest `||Q_est(ux) - u Q_est(x) u*||`.
    pub max_defect: f64,
    /// Largest defect divided by `1 + ||Q_est(x)||`.
    pub max_relative: f64,
    pub tol: f64,
    pub passed: bool,
}

fn summarize(pairs: Vec<(f64, f64)>, tol: f64) -> CovarianceReport {
    let max_defect = pairs.iter().map(|p| p.0).fold(0.0, f64::max);
    let max_relative = pairs.iter().map(|p| p.1).fold(0.0, f64::max);
    CovarianceReport {
        samples: pairs.len(),
        max_defect,
        max_relative,
        tol,
        passed: max_relative <= tol,
    }
}

/// `Q_est(ux)` against `u Q_est(x) u*`, pairing unitary `i` with probe
/// `i mod #probes`.
pub fn verify_unitary_covariance(
    f: &(dyn Evaluate + Sync),
    phi: &ControlFunction,
    cfg: &StabilityConfig,
    unitaries: &[Unitary],
    tol: f64,
) -> Result<CovarianceReport> {
    cfg.validate()?;
    if unitaries.is_empty() {
        return Err(Error::Empty("unitaries"));
    }
    let codomain = cfg.codomain_norm_for(f)?;
    let pairs = unitaries
        .par_iter()
        .enumerate()
        .map(|(i, u)| {
            let x = &cfg.probes[i % cfg.probes.len()];
            let qx = estimate(f, phi, cfg, x)?;
            let qux = estimate(f, phi, cfg, &x.left_mul(u.as_element()))?;
            let defect = codomain.norm_eval(&(&qux - &qx.conjugate_by(u.as_element())))?;
            Ok((defect, defect / (1.0 + codomain.norm_eval(&qx)?)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(pairs, tol))
}

/// `Q_est(ax)` against `|a|^2 Q_est(x)` for scalars `a` acting on a
/// module over the scalar algebra.
pub fn verify_scalar_homogeneity(
    f: &(dyn Evaluate + Sync),
    phi: &ControlFunction,
    cfg: &StabilityConfig,
    scalars: &[Complex64],
    tol: f64,
) -> Result<CovarianceReport> {
    cfg.validate()?;
    if scalars.is_empty() {
        return Err(Error::Empty("scalars"));
    }
    let codomain = cfg.codomain_norm_for(f)?;
    let pairs = scalars
        .par_iter()
        .enumerate()
        .map(|(i, a)| {
            let x = &cfg.probes[i % cfg.probes.len()];
            let qx = estimate(f, phi, cfg, x)?;
            let qax = estimate(f, phi, cfg, &x.scale(*a))?;
            let defect = codomain.norm_eval(&(&qax - &qx.scale_real(a.norm_sqr())))?;
            Ok((defect, defect / (1.0 + codomain.norm_eval(&qx)?)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(pairs, tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{sample_unitary, ModulePoint};
    use crate::mapping::Mapping;
    use crate::norm::QuasiNormSpec;

    #[test]
    fn exact_matrix_square_is_covariant() {
        let x = ModulePoint::single(sample_unitary(2, 9).as_element().scale_real(1.5));
        let cfg = StabilityConfig::new(3, QuasiNormSpec::euclidean(1), vec![x]);
        let us: Vec<Unitary> = (0..10).map(|s| sample_unitary(2, 100 + s)).collect();
        let phi = ControlFunction::Constant { theta: 0.0 };
        let rep = verify_unitary_covariance(&Mapping::MatrixSquare, &phi, &cfg, &us, 1e-10).unwrap();
        assert!(rep.passed);
        assert!(rep.max_defect <= 1e-10);
    }

    #[test]
    fn scalar_homogeneity_of_perturbed_square() {
        let f = Mapping::perturbed(Mapping::square(), Mapping::Sine, 0.1);
        let cfg = StabilityConfig::new(3, QuasiNormSpec::euclidean(1), vec![ModulePoint::from_reals(&[1.3])]);
        let phi = ControlFunction::Constant { theta: 1.2 };
        let scalars = [Complex64::new(2.0, 0.0), Complex64::new(-0.5, 0.0), Complex64::new(3.0, 0.0)];
        let rep = verify_scalar_homogeneity(&f, &phi, &cfg, &scalars, 1e-9).unwrap();
        assert!(rep.passed, "{rep:?}");
    }
}
