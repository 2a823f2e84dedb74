use crate::algebra::ModulePoint;
use crate::error::{invalid, Error, Result};
use crate::mapping::Evaluate;

use super::bounds::Direction;

/// Largest admissible `(n-1)^m`.
pub const ITERATION_GUARD: f64 = 1e100;

/// `(n-1)^m`, or an overflow error past [`ITERATION_GUARD`].
pub fn iteration_scale(n: usize, m: usize) -> Result<f64> {
    let s = (n as f64 - 1.0).powi(m as i32);
    if s > ITERATION_GUARD || !s.is_finite() {
        return Err(Error::Overflow(format!("(n-1)^m = {s:e} exceeds 1e100")));
    }
    Ok(s)
}

/// `(n-1) f(0) / 2`, the shift that turns `f` into the forward scheme's `g`.
pub fn origin_shift(f: &dyn Evaluate, n: usize, x: &ModulePoint) -> Result<ModulePoint> {
    Ok(f.evaluate(&x.zeros_like())?.scale_real((n as f64 - 1.0) / 2.0))
}

/// The forward scheme's `g = f + (n-1) f(0) / 2`; the backward scheme uses
/// `f` itself.
pub fn shifted(f: &dyn Evaluate, n: usize, dir: Direction, x: &ModulePoint) -> Result<ModulePoint> {
    let fx = f.evaluate(x)?;
    match dir {
        Direction::Forward => Ok(&fx + &origin_shift(f, n, x)?),
        Direction::Backward => Ok(fx),
    }
}

/// Rejects mappings with `f(0) != 0`, which the backward scheme cannot use.
pub fn require_zero_at_origin(f: &dyn Evaluate, like: &ModulePoint) -> Result<()> {
    let f0 = f.evaluate(&like.zeros_like())?.frobenius_norm();
    if f0 != 0.0 {
        return Err(Error::NonzeroAtOrigin(f0));
    }
    Ok(())
}

/// The `m`-th iterate: `g((n-1)^m x) / (n-1)^{2m}` forward,
/// `(n-1)^{2m} f(x / (n-1)^m)` backward.
pub fn hyers_iterate(f: &dyn Evaluate, n: usize, m: usize, x: &ModulePoint, dir: Direction) -> Result<ModulePoint> {
    if n < 3 {
        return Err(invalid("n", format!("need n >= 3, got {n}")));
    }
    let s = iteration_scale(n, m)?;
    match dir {
        Direction::Forward => {
            let g = shifted(f, n, dir, &x.scale_real(s))?;
            Ok(g.scale_real(1.0 / (s * s)))
        }
        Direction::Backward => {
            require_zero_at_origin(f, x)?;
            Ok(f.evaluate(&x.scale_real(1.0 / s))?.scale_real(s * s))
        }
    }
}
