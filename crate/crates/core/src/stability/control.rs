//! Control functions `phi` bounding the twisted remainder, and the derived
//! one-variable controls `phi_i`, `phi~` and `Phi`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::ModulePoint;
use crate::error::{invalid, Result};
use crate::norm::QuasiNormSpec;

type DynControl = dyn Fn(&[ModulePoint]) -> f64 + Send + Sync;

#[derive(Clone)]
pub struct CustomControl(pub Arc<DynControl>);

impl fmt::Debug for CustomControl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CustomControl(..)")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum ControlFunction {
    /// `epsilon * sum_i ||x_i||^r`.
    Power { epsilon: f64, r: f64 },
    /// `theta`.
    Constant { theta: f64 },
    #[serde(skip)]
    Custom(CustomControl),
}

impl ControlFunction {
    pub fn custom(f: impl Fn(&[ModulePoint]) -> f64 + Send + Sync + 'static) -> Self {
        ControlFunction::Custom(CustomControl(Arc::new(f)))
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ControlFunction::Power { epsilon, r } => {
                if !(epsilon >= 0.0 && epsilon.is_finite()) {
                    return Err(invalid("epsilon", format!("need 0 <= epsilon < inf, got {epsilon}")));
                }
                if !(r >= 0.0 && r.is_finite()) {
                    return Err(invalid("r", format!("need 0 <= r < inf, got {r}")));
                }
                Ok(())
            }
            ControlFunction::Constant { theta } if !(theta >= 0.0 && theta.is_finite()) => {
                Err(invalid("theta", format!("need 0 <= theta < inf, got {theta}")))
            }
            _ => Ok(()),
        }
    }

    pub fn evaluate(&self, norm: &QuasiNormSpec, xs: &[ModulePoint]) -> Result<f64> {
        Ok(match self {
            ControlFunction::Power { epsilon, r } => {
                let mut s = 0.0;
                for x in xs {
                    s += power(norm.norm_eval(x)?, *r);
                }
                epsilon * s
            }
            ControlFunction::Constant { theta } => *theta,
            ControlFunction::Custom(c) => (c.0)(xs),
        })
    }

    /// Power and constant controls have closed-form bounds.
    pub fn is_analytic(&self) -> bool {
        !matches!(self, ControlFunction::Custom(_))
    }
}

/// `t^r`, with empty slots contributing nothing even when `r = 0`.
pub(crate) fn power(t: f64, r: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t.powf(r)
    }
}

/// `phi` on the tuple with `x` in slot `i` (1-based) and zeros elsewhere.
pub fn phi_component(phi: &ControlFunction, norm: &QuasiNormSpec, n: usize, i: usize, x: &ModulePoint) -> Result<f64> {
    if i == 0 || i > n {
        return Err(invalid("i", format!("slot {i} outside 1..={n}")));
    }
    let mut xs = vec![x.zeros_like(); n];
    xs[i - 1] = x.clone();
    phi.evaluate(norm, &xs)
}

/// `min_{1<=i<=n-1} phi_i(x) + phi_{i+1}(x)`.
pub fn phi_tilde(phi: &ControlFunction, norm: &QuasiNormSpec, n: usize, x: &ModulePoint) -> Result<f64> {
    if n < 2 {
        return Err(invalid("n", format!("need n >= 2, got {n}")));
    }
    let comps = (1..=n)
        .map(|i| phi_component(phi, norm, n, i, x))
        .collect::<Result<Vec<_>>>()?;
    Ok(comps.windows(2).map(|w| w[0] + w[1]).fold(f64::INFINITY, f64::min))
}

/// `|(n^2 + 1) - (i + 1) n|` for `i = 1..=n`.
pub fn phi_cap_weights(n: usize) -> Vec<u64> {
    let n = n as i64;
    (1..=n).map(|i| ((n * n + 1) - (i + 1) * n).unsigned_abs()).collect()
}

/// `min_{1<=i<=n} phi_i(-x) + |(n^2+1) - (i+1)n| / n * phi~(x)`.
pub fn phi_cap(phi: &ControlFunction, norm: &QuasiNormSpec, n: usize, x: &ModulePoint) -> Result<f64> {
    if n < 3 {
        return Err(invalid("n", format!("need n >= 3, got {n}")));
    }
    let tilde = phi_tilde(phi, norm, n, x)?;
    let neg = -x;
    let mut best = f64::INFINITY;
    for (i, w) in (1..=n).zip(phi_cap_weights(n)) {
        let v = phi_component(phi, norm, n, i, &neg)? + w as f64 / n as f64 * tilde;
        best = best.min(v);
    }
    Ok(best)
}

/// `Phi` for the analytic families as a function of `||x||`:
/// `(n+2)/n * epsilon ||x||^r` and `(n+2)/n * theta`.
pub fn phi_cap_closed(phi: &ControlFunction, n: usize, norm_x: f64) -> Option<f64> {
    let c = (n as f64 + 2.0) / n as f64;
    match *phi {
        ControlFunction::Power { epsilon, r } => Some(c * epsilon * power(norm_x, r)),
        ControlFunction::Constant { theta } => Some(c * theta),
        ControlFunction::Custom(_) => None,
    }
}
