//! Quadratic functional equations on modules over matrix algebras.
//!
//! * [`algebra`], [`norm`]: the algebras `M_k(C)`, their unitary groups, the
//!   modules `M_k^d` and quasi-norms on them.
//! * [`mapping`], [`equation`]: mapping families and the residuals of the
//!   quadratic-type functional equations.
//! * [`finite`], [`polarization`]: exact solution spaces over `F_q^d`, the
//!   biadditive form behind a quadratic mapping, inner-product detection.
//! * [`stability`]: the direct method and its error bounds.

pub mod algebra;
pub mod equation;
pub mod error;
pub mod finite;
pub mod mapping;
pub mod norm;
pub mod polarization;
pub mod sampling;
pub mod stability;

pub use algebra::{
    hat, haar_unitary, sample_unitary, AlgebraElement, Field, HatMode, ModulePoint, PointShape, Unitary,
};
pub use equation::{
    approximate_remainder, approximate_remainder_sa, empirical_sup_residual, residual, residual_fe1,
    residual_fe2, residual_fe3, residual_fe3_0, residual_from_terms, residual_homogeneity, EquationSpec,
};
pub use error::{Error, Result};
pub use finite::{nullspace_basis, spaces_equal, ConstraintMatrix, FunctionVector, GroupSpec, SpaceComparison};
pub use mapping::{Evaluate, Mapping};
pub use norm::{concavity_modulus_estimate, NormKind, QuasiNormSpec};
pub use polarization::{
    biadditive_from_quadratic, check_diagonal, inner_product_characterization, IdentityMode, Polarization,
};
pub use sampling::BoxSampler;
pub use stability::{
    closed_form_bounds, stabilize, BoundFamily, ControlFunction, Direction, Setting, StabilityConfig,
    StabilityReport,
};
