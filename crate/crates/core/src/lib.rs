//! Classical deflection of relativistic charged particles by a uniformly bent
//! crystal, modelled as concentric rectangular ring potentials.
//!
//! * [`crystal`]: physical and dimensionless crystal descriptions, the ring
//!   potential and regime predicates.
//! * [`deflection`]: closed-form deflection function, extrema and average
//!   reflection angles.
//! * [`oracle`]: ray tracing, direct quadrature and orbit integration used to
//!   check the closed forms.
//! * [`experiments`]: the proton measurements and the prediction report.

pub mod config;
pub mod crystal;
pub mod deflection;
pub mod error;
pub mod experiments;
pub mod oracle;
pub mod quadrature;

pub use crystal::{
    orbiting_check, potential_at, reflection_condition, scale, scaled_impact, BeamSpec,
    RingPotentialSpec, ScaledGeometry,
};
pub use deflection::{
    alpha_one_ring_piecewise_negative, alpha_one_ring_piecewise_positive, alpha_ring_exact,
    alpha_ring_small, chi_crystal, extrema, mean_reflection_numeric, mean_reflection_refined,
    mean_reflection_rough, sqrt_clamped, sweep, sweep_refined, DeflectionCurve, DeflectionSample,
    Extrema, Mode,
};
pub use error::{Error, Result};
pub use oracle::{ode_deflection, quad_deflection, ray_trace, TraceResult};
