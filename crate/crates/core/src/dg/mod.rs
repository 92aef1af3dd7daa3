//! Discontinuous Galerkin discretization in space.

pub mod field;
pub mod flux;
pub mod limiter;
pub mod mesh;
pub mod operator;
pub mod projection;
pub mod space;

pub use field::{Derivative, SgField};
pub use flux::{NumericalFlux, NumericalFluxKind};
pub use limiter::apply_limiter;
pub use mesh::{Mesh1D, Side};
pub use operator::apply_lh;
pub use projection::{project_initial, ProjectionMethod};
pub use space::DgSpace;
