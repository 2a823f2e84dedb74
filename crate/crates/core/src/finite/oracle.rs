use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::constraints::{enumerate_constraints, ConstraintMatrix};
use super::field;
use super::group::GroupSpec;
use super::nullspace::{Eliminator, FunctionVector};
use crate::equation::EquationSpec;
use crate::error::Result;

/// Outcome of comparing two solution spaces over the same group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceComparison {
    pub equal: bool,
    pub dim_a: usize,
    pub dim_b: usize,
    /// Dimension of the common solution space.
    pub dim_stacked: usize,
    pub subsampled: bool,
    /// A solution of one equation that violates the other.
    pub witness: Option<FunctionVector>,
}

impl fmt::Display for SpaceComparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.equal {
            write!(f, "spaces equal, dim {}", self.dim_a)
        } else {
            write!(
                f,
                "spaces differ: dim {} vs {} (common {})",
                self.dim_a, self.dim_b, self.dim_stacked
            )?;
            if let Some(w) = &self.witness {
                write!(f, ", witness {:?}", w.table())?;
            }
            Ok(())
        }
    }
}

/// Compares the solution spaces of `eq_a` and `eq_b` on `group`. They are
/// equal iff both dimensions match the dimension of the stacked system.
pub fn spaces_equal(eq_a: &EquationSpec, eq_b: &EquationSpec, group: &GroupSpec) -> Result<SpaceComparison> {
    let ma = enumerate_constraints(eq_a, group)?;
    let mb = enumerate_constraints(eq_b, group)?;
    Ok(compare(&ma, &mb))
}

pub fn compare(ma: &ConstraintMatrix, mb: &ConstraintMatrix) -> SpaceComparison {
    let group = ma.group();
    let mut ea = Eliminator::new(group.q(), ma.columns());
    ea.push_matrix(ma);
    let mut eb = Eliminator::new(group.q(), mb.columns());
    eb.push_matrix(mb);
    let mut stacked = ea.clone();
    stacked.push_matrix(mb);

    let (dim_a, dim_b, dim_stacked) = (ea.nullity(), eb.nullity(), stacked.nullity());
    let equal = dim_a == dim_stacked && dim_b == dim_stacked;
    let witness = if equal {
        None
    } else {
        let wrap = |table| FunctionVector::new(group, table).expect("group-sized table");
        eb.nullspace()
            .into_iter()
            .find(|v| !ma.annihilates(v))
            .or_else(|| ea.nullspace().into_iter().find(|v| !mb.annihilates(v)))
            .map(wrap)
    };
    SpaceComparison {
        equal,
        dim_a,
        dim_b,
        dim_stacked,
        subsampled: ma.is_subsampled() || mb.is_subsampled(),
        witness,
    }
}

/// Triples tested exhaustively below this count, sampled above it.
pub const EXHAUSTIVE_TRIPLES: usize = 1_000_000;

/// Failure of the biadditive decomposition of a finite function.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiagonalFailure {
    Asymmetric { x: usize, y: usize },
    NotAdditive { x: usize, z: usize, y: usize },
    OffDiagonal { x: usize },
}

/// Checks that `B = polarize(f)` is symmetric, additive in its first slot
/// and has `f` on its diagonal. All triples are tried when there are at most
/// [`EXHAUSTIVE_TRIPLES`]; otherwise `samples` seeded random triples.
pub fn check_diagonal_finite(f: &FunctionVector, samples: usize, seed: u64) -> std::result::Result<(), DiagonalFailure> {
    let g = f.group();
    let q = g.q();
    let order = g.order();
    for x in 0..order {
        let b = f.polarize(x, x);
        if b != f.at(x) {
            return Err(DiagonalFailure::OffDiagonal { x });
        }
    }
    let check = |x: usize, z: usize, y: usize| -> std::result::Result<(), DiagonalFailure> {
        if f.polarize(x, y) != f.polarize(y, x) {
            return Err(DiagonalFailure::Asymmetric { x, y });
        }
        let lhs = f.polarize(g.add(x, z), y);
        let rhs = field::add(f.polarize(x, y), f.polarize(z, y), q);
        if lhs != rhs {
            return Err(DiagonalFailure::NotAdditive { x, z, y });
        }
        Ok(())
    };
    if order.saturating_pow(3) <= EXHAUSTIVE_TRIPLES {
        for x in 0..order {
            for z in 0..order {
                for y in 0..order {
                    check(x, z, y)?;
                }
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let (x, z, y) = (
                rng.random_range(0..order),
                rng.random_range(0..order),
                rng.random_range(0..order),
            );
            check(x, z, y)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theorem_scale_oracle_over_f5() {
        let g = GroupSpec::new(5, 1).unwrap();
        let c = spaces_equal(&EquationSpec::Fe3 { n: 3 }, &EquationSpec::Fe1, &g).unwrap();
        assert!(c.equal);
        assert_eq!(c.to_string(), "spaces equal, dim 1");
    }

    #[test]
    fn cubic_scaling_separates_with_cube_witness() {
        let g = GroupSpec::new(5, 1).unwrap();
        let hom = EquationSpec::Homogeneity { scale: 2, degree: 3 };
        let c = spaces_equal(&EquationSpec::Fe1, &hom, &g).unwrap();
        assert!(!c.equal);
        assert_eq!(c.witness.unwrap().table(), &[0, 1, 3, 2, 4]);
    }

    #[test]
    fn quartic_fails_diagonal_check() {
        let g = GroupSpec::new(7, 1).unwrap();
        let f = FunctionVector::from_fn(g, |c| (c[0] as i64).pow(4));
        assert!(check_diagonal_finite(&f, 0, 0).is_err());
        let z = FunctionVector::zero(g);
        assert!(check_diagonal_finite(&z, 0, 0).is_ok());
    }
}
