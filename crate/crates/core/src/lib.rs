//! Numerical geometry of warped products `dr² + h(r)² g_N`: curvature and structure
//! conditions, black-hole model families, radial graph hypersurfaces, Minkowski and
//! Heintze-Karcher identities, the conformal normal flow and a CMC solver.

pub mod cmc;
pub mod conditions;
pub mod error;
pub mod flow;
pub mod geometry;
pub mod identities;
pub mod models;
pub mod quadrature;
pub mod sphere;
pub mod spline;
pub mod surface;
pub mod warping;

pub use conditions::{check_conditions, compute_r1, scan_h3_extrema, Condition, ConditionReport, ConditionSet};
pub use error::{GeomError, Result};
pub use models::{make_model, ModelRegistry, ModelSpec, OmegaProfile};
pub use warping::{Jet, Kind, Variant, WarpingFunction};
