//! Exact solution spaces of the functional equations over finite groups
//! `F_q^d`, by linear algebra over `F_q`.

pub mod constraints;
pub mod field;
pub mod group;
pub mod nullspace;
pub mod oracle;

pub use constraints::{check_admissible, enumerate_constraints, obstruction_constants, ConstraintMatrix};
pub use group::GroupSpec;
pub use nullspace::{nullspace_basis, Eliminator, FunctionVector};
pub use oracle::{check_diagonal_finite, compare, spaces_equal, DiagonalFailure, SpaceComparison};
