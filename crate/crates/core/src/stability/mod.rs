//! Hyers' direct method for approximately quadratic mappings.

pub mod bounds;
pub mod control;
pub mod covariance;
pub mod engine;
pub mod iterate;

pub use bounds::{
    bound_at, closed_form_bounds, closed_form_directional, dead_zone_sweep, series_bound,
    series_bound_backward, series_bound_backward_p, series_bound_forward, series_bound_forward_p,
    series_ratio, BoundParams, BoundValue, DeadZonePoint, Direction, SeriesBound, Setting,
};
pub use control::{phi_cap, phi_cap_closed, phi_cap_weights, phi_component, phi_tilde, ControlFunction};
pub use covariance::{verify_scalar_homogeneity, verify_unitary_covariance, CovarianceReport};
pub use engine::{
    estimate, fit_epsilon, fit_theta, stabilize, BoundFamily, ProbeReport, StabilityConfig, StabilityReport,
};
pub use iterate::{hyers_iterate, iteration_scale, origin_shift, require_zero_at_origin, shifted, ITERATION_GUARD};
