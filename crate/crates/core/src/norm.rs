//! Quasi-norms on finite-rank modules.
//!
//! A quasi-norm satisfies the norm axioms except that the triangle inequality
//! is relaxed to `||x + y|| <= K (||x|| + ||y||)` for a constant `K >= 1`, the
//! modulus of concavity. The `l^p` functional with `0 < p < 1` is the standard
//! example: it is a `p`-norm (`||x + y||^p <= ||x||^p + ||y||^p`) with
//! `K = 2^(1/p - 1)`.
//!
//! Matrix coordinates contribute their Frobenius norm before aggregation.

use serde::{Deserialize, Serialize};

use crate::algebra::{ModulePoint, PointShape};
use crate::error::{invalid, mismatch, Error, Result};
use crate::sampling::BoxSampler;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormKind {
    /// `(sum |c_i|^p)^(1/p)`, `0 < p <= 1`.
    LpQuasi { p: f64 },
    Euclidean,
    L1,
    /// `sqrt(sum w_i |c_i|^2)` with positive weights.
    Weighted { weights: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawNormSpec", into = "RawNormSpec")]
pub struct QuasiNormSpec {
    kind: NormKind,
    dim: usize,
}

#[derive(Serialize, Deserialize)]
struct RawNormSpec {
    #[serde(flatten)]
    kind: NormKind,
    dim: usize,
}

impl TryFrom<RawNormSpec> for QuasiNormSpec {
    type Error = Error;
    fn try_from(raw: RawNormSpec) -> Result<Self> {
        QuasiNormSpec::new(raw.kind, raw.dim)
    }
}

impl From<QuasiNormSpec> for RawNormSpec {
    fn from(s: QuasiNormSpec) -> Self {
        RawNormSpec {
            kind: s.kind,
            dim: s.dim,
        }
    }
}

impl QuasiNormSpec {
    pub fn new(kind: NormKind, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dim", "must be at least 1"));
        }
        match &kind {
            NormKind::LpQuasi { p } if !(*p > 0.0 && *p <= 1.0) => {
                return Err(invalid("p", format!("need 0 < p <= 1, got {p}")));
            }
            NormKind::Weighted { weights } => {
                if weights.len() != dim {
                    return Err(mismatch(dim, weights.len()));
                }
                if weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
                    return Err(invalid("weights", "weights must be positive and finite"));
                }
            }
            _ => {}
        }
        Ok(Self { kind, dim })
    }

    pub fn euclidean(dim: usize) -> Self {
        Self::new(NormKind::Euclidean, dim).expect("dim >= 1")
    }

    pub fn l1(dim: usize) -> Self {
        Self::new(NormKind::L1, dim).expect("dim >= 1")
    }

    pub fn lp(p: f64, dim: usize) -> Result<Self> {
        Self::new(NormKind::LpQuasi { p }, dim)
    }

    pub fn kind(&self) -> &NormKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The same family on a different rank. Weighted norms fall back to the
    /// Euclidean norm since their weights are tied to one rank.
    pub fn with_dim(&self, dim: usize) -> Self {
        let kind = match &self.kind {
            NormKind::Weighted { weights } if weights.len() != dim => NormKind::Euclidean,
            k => k.clone(),
        };
        Self::new(kind, dim).expect("validated family")
    }

    /// Modulus of concavity `K`.
    pub fn modulus(&self) -> f64 {
        match self.kind {
            NormKind::LpQuasi { p } => 2f64.powf(1.0 / p - 1.0),
            _ => 1.0,
        }
    }

    /// The exponent `p` for which this is a `p`-norm. Norms are 1-norms.
    pub fn p_exponent(&self) -> f64 {
        match self.kind {
            NormKind::LpQuasi { p } => p,
            _ => 1.0,
        }
    }

    pub fn norm_eval(&self, x: &ModulePoint) -> Result<f64> {
        if x.rank() != self.dim {
            return Err(mismatch(
                format!("rank {}", self.dim),
                format!("rank {}", x.rank()),
            ));
        }
        let mags = x.coords().iter().map(|c| c.frobenius_norm());
        Ok(match &self.kind {
            NormKind::Euclidean => mags.map(|m| m * m).sum::<f64>().sqrt(),
            NormKind::L1 => mags.sum(),
            NormKind::Weighted { weights } => mags
                .zip(weights)
                .map(|(m, w)| w * m * m)
                .sum::<f64>()
                .sqrt(),
            NormKind::LpQuasi { p } => {
                let s: f64 = mags.map(|m| m.powf(*p)).sum();
                s.powf(1.0 / p)
            }
        })
    }
}

/// `sup ||x + y|| / (||x|| + ||y||)` over all pairs of distinct basis vectors
/// followed by `trials` random pairs from `sampler`.
pub fn concavity_modulus_estimate(
    spec: &QuasiNormSpec,
    sampler: &mut BoxSampler,
    trials: usize,
) -> Result<f64> {
    if trials == 0 {
        return Err(invalid("trials", "need at least one trial"));
    }
    let PointShape { rank, k, .. } = sampler.shape();
    let mut best: f64 = 0.0;
    let mut consider = |x: &ModulePoint, y: &ModulePoint| -> Result<()> {
        let denom = spec.norm_eval(x)? + spec.norm_eval(y)?;
        if denom > 0.0 {
            best = best.max(spec.norm_eval(&(x + y))? / denom);
        }
        Ok(())
    };
    for i in 0..rank {
        for j in 0..rank {
            if i != j {
                consider(&ModulePoint::basis(rank, k, i), &ModulePoint::basis(rank, k, j))?;
            }
        }
    }
    for _ in 0..trials {
        let x = sampler.point();
        let y = sampler.point();
        consider(&x, &y)?;
    }
    Ok(best)
}
