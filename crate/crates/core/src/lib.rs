//! Filtered polynomial approximation and filtered hyperinterpolation on `S^d`.

pub mod cubature;
pub mod error;
pub mod experiments;
pub mod expansion;
pub mod filters;
pub mod operators;
pub mod sobolev;
pub mod special_functions;
pub mod sphere;
pub mod zonal_kernel;

pub use cubature::CubatureRule;
pub use error::{Error, Result, RuleParseError};
pub use expansion::{ZonalExpansion, ZonalSum};
pub use filters::Filter;
pub use sphere::SphereFunction;
pub use zonal_kernel::ZonalKernel;
