//! Error bounds between an approximate solution and the quadratic mapping it
//! converges to: truncated series for any control and closed forms for the
//! power and constant controls.

use serde::{Deserialize, Serialize};

use super::control::{phi_cap, phi_cap_closed, power, ControlFunction};
use crate::algebra::ModulePoint;
use crate::error::{invalid, Error, Result};
use crate::norm::QuasiNormSpec;

/// Largest scale factor applied to a probe when summing a series.
pub const SCALE_GUARD: f64 = 1e100;
/// Term cap for truncated series.
pub const MAX_SERIES_TERMS: usize = 100_000;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Limit of `f((n-1)^m x) / (n-1)^{2m}`.
    #[default]
    Forward,
    /// Limit of `(n-1)^{2m} f(x / (n-1)^m)`.
    Backward,
}

/// How the codomain's triangle inequality is relaxed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Setting {
    /// `||x + y|| <= K (||x|| + ||y||)`.
    Quasi { k: f64 },
    /// `||x + y||^p <= ||x||^p + ||y||^p`.
    PNorm { p: f64 },
}

impl Setting {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Setting::Quasi { k } if !(k >= 1.0 && k.is_finite()) => {
                Err(invalid("K", format!("need 1 <= K < inf, got {k}")))
            }
            Setting::PNorm { p } if !(p > 0.0 && p <= 1.0) => {
                Err(invalid("p", format!("need 0 < p <= 1, got {p}")))
            }
            _ => Ok(()),
        }
    }
}

/// Ratio of consecutive series terms for the analytic controls; the series
/// converges iff it is below 1.
pub fn series_ratio(phi: &ControlFunction, n: usize, setting: Setting, dir: Direction) -> Option<f64> {
    let b = n as f64 - 1.0;
    let growth = match *phi {
        ControlFunction::Power { r, .. } => r,
        ControlFunction::Constant { .. } => 0.0,
        ControlFunction::Custom(_) => return None,
    };
    let e = match dir {
        Direction::Forward => growth - 2.0,
        Direction::Backward => 2.0 - growth,
    };
    Some(match setting {
        Setting::Quasi { k } => k * b.powf(e),
        Setting::PNorm { p } => b.powf(e * p),
    })
}

fn check_n(n: usize) -> Result<()> {
    if n < 3 {
        return Err(invalid("n", format!("need n >= 3, got {n}")));
    }
    Ok(())
}

/// Fails with [`Error::OpenProblem`] when neither scheme's series converges
/// and with [`Error::Divergent`] when only the other direction's does.
fn ensure_convergent(phi: &ControlFunction, n: usize, setting: Setting, dir: Direction) -> Result<()> {
    let Some(ratio) = series_ratio(phi, n, setting, dir) else {
        return Ok(());
    };
    if ratio < 1.0 {
        return Ok(());
    }
    let other = match dir {
        Direction::Forward => Direction::Backward,
        Direction::Backward => Direction::Forward,
    };
    let other_ratio = series_ratio(phi, n, setting, other).expect("analytic");
    if other_ratio < 1.0 {
        Err(Error::Divergent(format!(
            "{dir:?} series ratio {ratio} >= 1 for {phi:?} with {setting:?}; the {other:?} scheme converges"
        )))
    } else {
        Err(Error::OpenProblem(format!(
            "no known bound for {phi:?} with {setting:?} and n = {n} (series ratios {ratio}, {other_ratio})"
        )))
    }
}

/// Closed form of the bound for the analytic controls at a point of norm
/// `norm_x`, scheme fixed by `dir`.
pub fn closed_form_directional(
    phi: &ControlFunction,
    n: usize,
    setting: Setting,
    dir: Direction,
    norm_x: f64,
) -> Result<f64> {
    check_n(n)?;
    phi.validate()?;
    setting.validate()?;
    if !phi.is_analytic() {
        return Err(invalid("phi", "closed forms exist only for power and constant controls"));
    }
    ensure_convergent(phi, n, setting, dir)?;
    let b = n as f64 - 1.0;
    let nf = n as f64;
    let (amp, r) = match *phi {
        ControlFunction::Power { epsilon, r } => (epsilon * power(norm_x, r), r),
        ControlFunction::Constant { theta } => (theta, 0.0),
        ControlFunction::Custom(_) => unreachable!(),
    };
    let num = (nf + 2.0) * amp;
    Ok(match (setting, dir) {
        (Setting::Quasi { k }, Direction::Forward) => num * k / (nf * (b * b - k * b.powf(r))),
        (Setting::Quasi { k }, Direction::Backward) => num * k / (nf * (b.powf(r) - k * b * b)),
        (Setting::PNorm { p }, Direction::Forward) => {
            num / (nf * (b.powf(2.0 * p) - b.powf(r * p)).powf(1.0 / p))
        }
        (Setting::PNorm { p }, Direction::Backward) => {
            num / (nf * (b.powf(r * p) - b.powf(2.0 * p)).powf(1.0 / p))
        }
    })
}

/// Parameters of a closed-form bound evaluation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundParams {
    pub n: usize,
    pub setting: Setting,
    pub control: ControlFunction,
    pub norm_x: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    pub value: f64,
    pub direction: Direction,
}

/// The bound for whichever scheme converges: forward when the control grows
/// slower than quadratically (beyond the `K` margin), backward when faster.
/// Parameters where neither converges are rejected as open problems.
pub fn closed_form_bounds(params: &BoundParams) -> Result<BoundValue> {
    let BoundParams {
        n,
        setting,
        ref control,
        norm_x,
    } = *params;
    for direction in [Direction::Forward, Direction::Backward] {
        match closed_form_directional(control, n, setting, direction, norm_x) {
            Ok(value) => return Ok(BoundValue { value, direction }),
            Err(Error::Divergent(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    unreachable!("one direction converges unless the region is open")
}

/// One row of the dead-zone sweep for the constant control.
#[derive(Debug, Clone, PartialEq)]
pub struct DeadZonePoint {
    pub k: f64,
    /// `(n-1)^2 - K`; the constant-control bound exists iff this is positive.
    pub denominator: f64,
    pub bound: std::result::Result<f64, Error>,
}

/// Constant-control bounds across moduli `ks`.
pub fn dead_zone_sweep(n: usize, theta: f64, ks: &[f64]) -> Vec<DeadZonePoint> {
    let b = n as f64 - 1.0;
    ks.iter()
        .map(|&k| DeadZonePoint {
            k,
            denominator: b * b - k,
            bound: closed_form_directional(
                &ControlFunction::Constant { theta },
                n,
                Setting::Quasi { k },
                Direction::Forward,
                0.0,
            ),
        })
        .collect()
}

/// A truncated series together with the closed form when one exists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesBound {
    pub truncated: f64,
    pub closed_form: Option<f64>,
    pub terms: usize,
}

impl SeriesBound {
    /// The closed form if available, else the truncated value.
    pub fn value(&self) -> f64 {
        self.closed_form.unwrap_or(self.truncated)
    }
}

/// Sums `sum_{i >= start} term(i)` until the geometric tail estimate from
/// the observed ratio drops below `tol`.
fn sum_series(start: usize, tol: f64, mut term: impl FnMut(usize) -> Result<f64>) -> Result<(f64, usize)> {
    let mut sum = 0.0;
    let mut prev: Option<f64> = None;
    let mut rising = 0usize;
    for i in start..start + MAX_SERIES_TERMS {
        let t = term(i)?;
        if !t.is_finite() {
            return Err(Error::Divergent(format!("term {i} is {t}")));
        }
        sum += t;
        if t == 0.0 {
            if prev == Some(0.0) {
                return Ok((sum, i - start + 1));
            }
            prev = Some(t);
            continue;
        }
        if let Some(p) = prev.filter(|p| *p > 0.0) {
            let ratio = t / p;
            if ratio < 1.0 {
                rising = 0;
                if t * ratio / (1.0 - ratio) < tol {
                    return Ok((sum, i - start + 1));
                }
            } else {
                rising += 1;
                if rising >= 50 {
                    return Err(Error::Divergent(format!(
                        "terms stopped shrinking by term {i} (ratio {ratio})"
                    )));
                }
            }
        }
        prev = Some(t);
    }
    Err(Error::Divergent(format!("no convergence within {MAX_SERIES_TERMS} terms")))
}

fn scaled(x: &ModulePoint, factor: f64) -> Result<ModulePoint> {
    if !(1.0 / SCALE_GUARD..=SCALE_GUARD).contains(&factor) {
        return Err(Error::Overflow(format!("scale factor {factor:e} outside 1e+-100")));
    }
    Ok(x.scale_real(factor))
}

/// `K/(n-1)^2 sum_{i>=0} K^i Phi((n-1)^i x) / (n-1)^{2i}`.
pub fn series_bound_forward(
    phi: &ControlFunction,
    norm: &QuasiNormSpec,
    n: usize,
    k: f64,
    x: &ModulePoint,
    series_tol: f64,
) -> Result<SeriesBound> {
    series_bound(phi, norm, n, Setting::Quasi { k }, Direction::Forward, x, series_tol)
}

/// `1/(n-1)^2 sum_{i>=1} K^i (n-1)^{2i} Phi(x / (n-1)^i)`.
pub fn series_bound_backward(
    phi: &ControlFunction,
    norm: &QuasiNormSpec,
    n: usize,
    k: f64,
    x: &ModulePoint,
    series_tol: f64,
) -> Result<SeriesBound> {
    series_bound(phi, norm, n, Setting::Quasi { k }, Direction::Backward, x, series_tol)
}

/// `1/(n-1)^2 [sum_{i>=0} Phi((n-1)^i x)^p / (n-1)^{2ip}]^{1/p}`.
pub fn series_bound_forward_p(
    phi: &ControlFunction,
    norm: &QuasiNormSpec,
    n: usize,
    p: f64,
    x: &ModulePoint,
    series_tol: f64,
) -> Result<SeriesBound> {
    series_bound(phi, norm, n, Setting::PNorm { p }, Direction::Forward, x, series_tol)
}

/// `1/(n-1)^2 [sum_{i>=1} (n-1)^{2ip} Phi(x / (n-1)^i)^p]^{1/p}`.
pub fn series_bound_backward_p(
    phi: &ControlFunction,
    norm: &QuasiNormSpec,
    n: usize,
    p: f64,
    x: &ModulePoint,
    series_tol: f64,
) -> Result<SeriesBound> {
    series_bound(phi, norm, n, Setting::PNorm { p }, Direction::Backward, x, series_tol)
}

pub fn series_bound(
    phi: &ControlFunction,
    norm: &QuasiNormSpec,
    n: usize,
    setting: Setting,
    dir: Direction,
    x: &ModulePoint,
    series_tol: f64,
) -> Result<SeriesBound> {
    check_n(n)?;
    phi.validate()?;
    setting.validate()?;
    if series_tol.is_nan() || series_tol <= 0.0 {
        return Err(invalid("series_tol", "must be positive"));
    }
    ensure_convergent(phi, n, setting, dir)?;
    let b = n as f64 - 1.0;
    let b2 = b * b;
    let cap = |i: usize| -> Result<f64> {
        let factor = match dir {
            Direction::Forward => b.powi(i as i32),
            Direction::Backward => b.powi(-(i as i32)),
        };
        phi_cap(phi, norm, n, &scaled(x, factor)?)
    };
    let start = match dir {
        Direction::Forward => 0,
        Direction::Backward => 1,
    };
    let (truncated, terms) = match setting {
        Setting::Quasi { k } => {
            let pre = match dir {
                Direction::Forward => k / b2,
                Direction::Backward => 1.0 / b2,
            };
            let weight = |i: usize| match dir {
                Direction::Forward => (k / b2).powi(i as i32),
                Direction::Backward => (k * b2).powi(i as i32),
            };
            let (s, t) = sum_series(start, series_tol / pre, |i| Ok(weight(i) * cap(i)?))?;
            (pre * s, t)
        }
        Setting::PNorm { p } => {
            let weight = |i: usize| match dir {
                Direction::Forward => b2.powf(-(i as f64) * p),
                Direction::Backward => b2.powf(i as f64 * p),
            };
            // d(S^{1/p}/b2) = S^{1/p-1} dS / (p b2); a first pass fixes S's scale
            let first = weight(start) * cap(start)?.powf(p);
            let slope = if first > 0.0 { first.powf(1.0 / p - 1.0) / (p * b2) } else { 1.0 };
            let tol_s = series_tol / slope.max(f64::MIN_POSITIVE);
            let (s, t) = sum_series(start, tol_s, |i| Ok(weight(i) * cap(i)?.powf(p)))?;
            (s.powf(1.0 / p) / b2, t)
        }
    };
    let closed_form = match phi {
        ControlFunction::Custom(_) => None,
        _ => Some(closed_form_directional(phi, n, setting, dir, norm.norm_eval(x)?)?),
    };
    Ok(SeriesBound {
        truncated,
        closed_form,
        terms,
    })
}

/// The bound at `x` from closed forms when available, otherwise the
/// truncated series.
pub fn bound_at(
    phi: &ControlFunction,
    norm: &QuasiNormSpec,
    n: usize,
    setting: Setting,
    dir: Direction,
    x: &ModulePoint,
    series_tol: f64,
) -> Result<f64> {
    if phi.is_analytic() {
        closed_form_directional(phi, n, setting, dir, norm.norm_eval(x)?)
    } else {
        Ok(series_bound(phi, norm, n, setting, dir, x, series_tol)?.truncated)
    }
}

/// `Phi` at `x`, in closed form for the analytic controls.
pub(crate) fn cap_at(phi: &ControlFunction, norm: &QuasiNormSpec, n: usize, x: &ModulePoint) -> Result<f64> {
    match phi_cap_closed(phi, n, norm.norm_eval(x)?) {
        Some(v) => Ok(v),
        None => phi_cap(phi, norm, n, x),
    }
}
