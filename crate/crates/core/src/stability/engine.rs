//! Runs the direct method on probes and compares what it finds against the
//! theoretical bounds.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bounds::{bound_at, cap_at, Direction, Setting};
use super::control::{power, ControlFunction};
use super::iterate::{hyers_iterate, iteration_scale, require_zero_at_origin, shifted};
use crate::algebra::{Field, ModulePoint, PointShape};
use crate::equation::approximate_remainder;
use crate::error::{invalid, mismatch, Error, Result};
use crate::mapping::Evaluate;
use crate::norm::QuasiNormSpec;
use crate::sampling::{BoxSampler, DEFAULT_HALF_WIDTH};

/// Which family of bounds to compare against.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundFamily {
    /// Modulus of concavity `K`.
    #[default]
    Quasi,
    /// `p`-norm exponent.
    PNorm,
}

fn default_m_max() -> usize {
    60
}

fn default_tol() -> f64 {
    1e-9
}

fn default_series_tol() -> f64 {
    1e-12
}

fn default_precheck() -> usize {
    200
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StabilityConfig {
    pub n: usize,
    /// Norm on the domain module.
    pub norm: QuasiNormSpec,
    /// Defaults to the domain family at the codomain's rank.
    #[serde(default)]
    pub codomain_norm: Option<QuasiNormSpec>,
    #[serde(default)]
    pub family: BoundFamily,
    #[serde(default)]
    pub direction: Direction,
    #[serde(default = "default_m_max")]
    pub m_max: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_series_tol")]
    pub series_tol: f64,
    pub probes: Vec<ModulePoint>,
    /// Scalars of the sample box used by the pre-check.
    #[serde(default)]
    pub field: Field,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_precheck")]
    pub precheck_samples: usize,
}

impl StabilityConfig {
    pub fn new(n: usize, norm: QuasiNormSpec, probes: Vec<ModulePoint>) -> Self {
        Self {
            n,
            norm,
            codomain_norm: None,
            family: BoundFamily::default(),
            direction: Direction::default(),
            m_max: default_m_max(),
            tol: default_tol(),
            series_tol: default_series_tol(),
            probes,
            field: Field::default(),
            seed: 0,
            precheck_samples: default_precheck(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(invalid("n", format!("need n >= 3, got {}", self.n)));
        }
        if self.m_max == 0 {
            return Err(invalid("m_max", "need at least one iteration"));
        }
        if self.tol.is_nan() || self.tol <= 0.0 || self.series_tol.is_nan() || self.series_tol <= 0.0 {
            return Err(invalid("tol", "tolerances must be positive"));
        }
        let first = self.probes.first().ok_or(Error::Empty("probes"))?;
        for p in &self.probes {
            if p.rank() != self.norm.dim() || p.k() != first.k() {
                return Err(mismatch(
                    format!("rank {} over M_{}", self.norm.dim(), first.k()),
                    format!("rank {} over M_{}", p.rank(), p.k()),
                ));
            }
        }
        Ok(())
    }

    pub fn codomain_norm_for(&self, f: &dyn Evaluate) -> Result<QuasiNormSpec> {
        if let Some(c) = &self.codomain_norm {
            return Ok(c.clone());
        }
        let probe = self.probes.first().ok_or(Error::Empty("probes"))?;
        Ok(self.norm.with_dim(f.evaluate(probe)?.rank()))
    }

    /// The weaker of the two spaces' constants: larger `K`, smaller `p`.
    pub fn setting(&self, codomain: &QuasiNormSpec) -> Setting {
        match self.family {
            BoundFamily::Quasi => Setting::Quasi {
                k: self.norm.modulus().max(codomain.modulus()),
            },
            BoundFamily::PNorm => Setting::PNorm {
                p: self.norm.p_exponent().min(codomain.p_exponent()),
            },
        }
    }

    pub fn sample_shape(&self) -> PointShape {
        let k = self.probes.first().map_or(1, ModulePoint::k);
        PointShape {
            rank: self.norm.dim(),
            k,
            field: self.field,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub probe: ModulePoint,
    pub norm_x: f64,
    pub q_estimate: ModulePoint,
    /// Iterates `0..=iterations`.
    pub iterates: Vec<ModulePoint>,
    /// `gaps[m-1] = ||iterate_m - iterate_{m-1}||`.
    pub gaps: Vec<f64>,
    /// The a-priori bound on each gap from `Phi`.
    pub gap_bounds: Vec<f64>,
    /// Bound on `||iterate_m - Q(x)||` implied by the error bound.
    pub tail_bounds: Vec<f64>,
    pub iterations: usize,
    /// The last gap fell below `tol`.
    pub converged: bool,
    /// The last tail bound fell below `tol`.
    pub tail_guaranteed: bool,
    /// `||g(x) - Q_est(x)||`, `g` the scheme's shifted mapping.
    pub deviation: f64,
    pub bound: f64,
    pub margin: f64,
    pub within_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub setting: Setting,
    pub direction: Direction,
    pub probes: Vec<ProbeReport>,
    pub warnings: Vec<String>,
    pub all_within_bound: bool,
    pub all_converged: bool,
}

impl StabilityReport {
    pub fn passed(&self) -> bool {
        self.all_within_bound && self.all_converged
    }
}

struct Context<'a> {
    f: &'a (dyn Evaluate + Sync),
    phi: &'a ControlFunction,
    cfg: &'a StabilityConfig,
    codomain: QuasiNormSpec,
    setting: Setting,
}

impl Context<'_> {
    fn bound(&self, x: &ModulePoint) -> Result<f64> {
        let c = self.cfg;
        bound_at(self.phi, &c.norm, c.n, self.setting, c.direction, x, c.series_tol)
    }

    fn gap_bound(&self, x: &ModulePoint, m: usize) -> Result<f64> {
        let n = self.cfg.n;
        let prev = iteration_scale(n, m - 1)?;
        let cap = |y: &ModulePoint| cap_at(self.phi, &self.cfg.norm, n, y);
        let b2 = (n as f64 - 1.0).powi(2);
        Ok(match self.cfg.direction {
            Direction::Forward => cap(&x.scale_real(prev))? / (prev * prev * b2),
            Direction::Backward => {
                let s = iteration_scale(n, m)?;
                prev * prev * cap(&x.scale_real(1.0 / s))?
            }
        })
    }

    fn tail_bound(&self, x: &ModulePoint, m: usize) -> f64 {
        let tail = || -> Result<f64> {
            let s = iteration_scale(self.cfg.n, m)?;
            Ok(match self.cfg.direction {
                Direction::Forward => self.bound(&x.scale_real(s))? / (s * s),
                Direction::Backward => s * s * self.bound(&x.scale_real(1.0 / s))?,
            })
        };
        tail().unwrap_or(f64::INFINITY)
    }

    fn probe(&self, x: &ModulePoint) -> Result<ProbeReport> {
        let cfg = self.cfg;
        let dist = |a: &ModulePoint, b: &ModulePoint| self.codomain.norm_eval(&(a - b));
        let bound = self.bound(x)?;
        let target = shifted(self.f, cfg.n, cfg.direction, x)?;
        let mut iterates = vec![hyers_iterate(self.f, cfg.n, 0, x, cfg.direction)?];
        let (mut gaps, mut gap_bounds, mut tail_bounds) = (Vec::new(), Vec::new(), Vec::new());
        for m in 1..=cfg.m_max {
            let it = match hyers_iterate(self.f, cfg.n, m, x, cfg.direction) {
                Ok(it) if it.is_finite() => it,
                Ok(_) | Err(Error::Overflow(_)) => break,
                Err(e) => return Err(e),
            };
            let gap = dist(&it, iterates.last().expect("seeded"))?;
            let tail = self.tail_bound(x, m);
            gaps.push(gap);
            gap_bounds.push(self.gap_bound(x, m).unwrap_or(f64::INFINITY));
            tail_bounds.push(tail);
            iterates.push(it);
            if gap < cfg.tol && tail < cfg.tol {
                break;
            }
        }
        let q_estimate = iterates.last().expect("seeded").clone();
        let deviation = dist(&target, &q_estimate)?;
        let margin = bound - deviation;
        Ok(ProbeReport {
            probe: x.clone(),
            norm_x: cfg.norm.norm_eval(x)?,
            iterations: gaps.len(),
            converged: gaps.last().is_some_and(|g| *g < cfg.tol),
            tail_guaranteed: tail_bounds.last().is_some_and(|t| *t < cfg.tol),
            q_estimate,
            iterates,
            gaps,
            gap_bounds,
            tail_bounds,
            deviation,
            bound,
            margin,
            within_bound: margin >= -cfg.tol,
        })
    }
}

/// Samples tuples and unitaries and reports how often `||D_u f|| <= phi`
/// fails, as warnings.
fn precheck(ctx: &Context<'_>) -> Result<Vec<String>> {
    let cfg = ctx.cfg;
    let mut sampler = BoxSampler::new(cfg.sample_shape(), DEFAULT_HALF_WIDTH, cfg.seed);
    let (mut violations, mut worst) = (0usize, 0.0f64);
    for _ in 0..cfg.precheck_samples {
        let xs = sampler.tuple(cfg.n);
        let u = sampler.unitary();
        let r = ctx.codomain.norm_eval(&approximate_remainder(ctx.f, &u, cfg.n, &xs)?)?;
        let phi = ctx.phi.evaluate(&cfg.norm, &xs)?;
        if r > phi * (1.0 + 1e-9) + 1e-12 {
            violations += 1;
            worst = worst.max(r - phi);
        }
    }
    Ok(if violations > 0 {
        vec![format!(
            "control function violated on {violations}/{} sampled tuples (worst excess {worst:e})",
            cfg.precheck_samples
        )]
    } else {
        Vec::new()
    })
}

/// Iterates the configured scheme on every probe, in parallel, and compares
/// each deviation against the bound at that probe.
pub fn stabilize(
    f: &(dyn Evaluate + Sync),
    phi: &ControlFunction,
    cfg: &StabilityConfig,
) -> Result<StabilityReport> {
    cfg.validate()?;
    phi.validate()?;
    let codomain = cfg.codomain_norm_for(f)?;
    let setting = cfg.setting(&codomain);
    if cfg.direction == Direction::Backward {
        require_zero_at_origin(f, &cfg.probes[0])?;
    }
    let ctx = Context {
        f,
        phi,
        cfg,
        codomain,
        setting,
    };
    // Surface parameter rejections before any iteration.
    ctx.bound(&cfg.probes[0])?;
    let warnings = precheck(&ctx)?;
    let probes = cfg
        .probes
        .par_iter()
        .map(|x| ctx.probe(x))
        .collect::<Result<Vec<_>>>()?;
    Ok(StabilityReport {
        setting,
        direction: cfg.direction,
        all_within_bound: probes.iter().all(|p| p.within_bound),
        all_converged: probes.iter().all(|p| p.converged),
        probes,
        warnings,
    })
}

/// `Q_est(x)` by the configured scheme with the usual stop rule.
pub fn estimate(
    f: &(dyn Evaluate + Sync),
    phi: &ControlFunction,
    cfg: &StabilityConfig,
    x: &ModulePoint,
) -> Result<ModulePoint> {
    let codomain = cfg.codomain_norm_for(f)?;
    let ctx = Context {
        f,
        phi,
        cfg,
        setting: cfg.setting(&codomain),
        codomain,
    };
    Ok(ctx.probe(x)?.q_estimate)
}

fn sampled_remainders(
    f: &dyn Evaluate,
    n: usize,
    domain: &QuasiNormSpec,
    codomain: &QuasiNormSpec,
    sampler: &mut BoxSampler,
    trials: usize,
    mut visit: impl FnMut(f64, &[ModulePoint]) -> Result<()>,
) -> Result<()> {
    if trials == 0 {
        return Err(invalid("trials", "need at least one trial"));
    }
    if sampler.shape().rank != domain.dim() {
        return Err(mismatch(domain.dim(), sampler.shape().rank));
    }
    for _ in 0..trials {
        let xs = sampler.tuple(n);
        let u = sampler.unitary();
        let r = codomain.norm_eval(&approximate_remainder(f, &u, n, &xs)?)?;
        visit(r, &xs)?;
    }
    Ok(())
}

/// Smallest `epsilon` making `epsilon sum ||x_i||^r` dominate the sampled
/// twisted remainders: the sup of the ratios.
pub fn fit_epsilon(
    f: &dyn Evaluate,
    n: usize,
    r: f64,
    domain: &QuasiNormSpec,
    codomain: &QuasiNormSpec,
    sampler: &mut BoxSampler,
    trials: usize,
) -> Result<f64> {
    let mut eps: f64 = 0.0;
    sampled_remainders(f, n, domain, codomain, sampler, trials, |res, xs| {
        let mut denom = 0.0;
        for x in xs {
            denom += power(domain.norm_eval(x)?, r);
        }
        if denom > 0.0 {
            eps = eps.max(res / denom);
        }
        Ok(())
    })?;
    Ok(eps)
}

/// Sup of the sampled twisted remainders.
pub fn fit_theta(
    f: &dyn Evaluate,
    n: usize,
    domain: &QuasiNormSpec,
    codomain: &QuasiNormSpec,
    sampler: &mut BoxSampler,
    trials: usize,
) -> Result<f64> {
    let mut theta: f64 = 0.0;
    sampled_remainders(f, n, domain, codomain, sampler, trials, |res, _| {
        theta = theta.max(res);
        Ok(())
    })?;
    Ok(theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapping::Mapping;

    fn probes(ts: &[f64]) -> Vec<ModulePoint> {
        ts.iter().map(|t| ModulePoint::from_reals(&[*t])).collect()
    }

    #[test]
    fn sine_bump_stays_within_constant_bound() {
        let f = Mapping::perturbed(Mapping::square(), Mapping::Sine, 0.1);
        let cfg = StabilityConfig::new(3, QuasiNormSpec::euclidean(1), probes(&[-9.5, -2.0, 0.3, 1.0, 7.25]));
        let phi = ControlFunction::Constant { theta: 1.2 };
        let rep = stabilize(&f, &phi, &cfg).unwrap();
        assert!(rep.warnings.is_empty(), "{:?}", rep.warnings);
        assert!(rep.passed());
        for p in &rep.probes {
            assert!((p.bound - 2.0 / 3.0).abs() < 1e-15);
            assert!(p.deviation <= 0.1 + 1e-12);
            assert!(p.tail_guaranteed);
        }
    }

    #[test]
    fn exact_form_has_zero_deviation() {
        let f = Mapping::QuadraticForm {
            coefficients: vec![vec![1.0, -0.5], vec![-0.5, 2.0]],
        };
        let pts = vec![
            ModulePoint::from_reals(&[1.0, 2.0]),
            ModulePoint::from_reals(&[-3.0, 0.5]),
        ];
        let cfg = StabilityConfig::new(4, QuasiNormSpec::euclidean(2), pts);
        let phi = ControlFunction::Power { epsilon: 1e-3, r: 1.0 };
        let rep = stabilize(&f, &phi, &cfg).unwrap();
        for p in &rep.probes {
            assert!(p.deviation <= 1e-9);
            assert!((p.margin - p.bound).abs() <= 1e-9);
        }
    }

    #[test]
    fn backward_rejects_shifted_mapping() {
        let f = Mapping::Sum {
            terms: vec![Mapping::square(), Mapping::Constant { value: 1.0 }],
        };
        let mut cfg = StabilityConfig::new(3, QuasiNormSpec::euclidean(1), probes(&[1.0]));
        cfg.direction = Direction::Backward;
        let phi = ControlFunction::Power { epsilon: 1.0, r: 3.0 };
        assert!(matches!(stabilize(&f, &phi, &cfg), Err(Error::NonzeroAtOrigin(_))));
    }

    #[test]
    fn non_convergent_trace_is_flagged() {
        let f = Mapping::perturbed(Mapping::square(), Mapping::Sine, 1.0);
        let mut cfg = StabilityConfig::new(3, QuasiNormSpec::euclidean(1), probes(&[1.0]));
        cfg.m_max = 3;
        let phi = ControlFunction::Constant { theta: 12.0 };
        let rep = stabilize(&f, &phi, &cfg).unwrap();
        assert!(!rep.all_converged);
        assert!(!rep.passed());
    }

    #[test]
    fn fitted_theta_for_sine_bump() {
        let f = Mapping::perturbed(Mapping::square(), Mapping::Sine, 0.1);
        let n1 = QuasiNormSpec::euclidean(1);
        let mut s = BoxSampler::new(PointShape::real(1), 10.0, 4);
        let theta = fit_theta(&f, 3, &n1, &n1, &mut s, 2000).unwrap();
        assert!(theta > 0.5 && theta <= 1.2, "{theta}");
    }
}
