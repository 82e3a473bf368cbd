//! Causal imbeddings of two-dimensional globally hyperbolic spacetimes into
//! 2D Minkowski space and the 2D Einstein cylinder.
//!
//! Events are encoded by their shadows on the slice `t = 0`, the shadows are
//! mapped to the flat target, and the result is checked against independent
//! causal oracles.

// `!(a > b)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod csvio;
pub mod diagram;
pub mod embed;
pub mod error;
pub mod expr;
pub mod metric;
pub mod nullflow;
pub mod ode;
pub mod shadow;
pub mod tolerance;
pub mod verify;

pub use embed::{
    compactify, conformal_factor, embed_cylinder, embed_minkowski, embed_noncompact_to_cylinder,
    embed_point, jacobian, CylinderEvent, EmbeddedPoint, MinkowskiEvent, SurfaceMap, Target,
};
pub use error::{Error, Result};
pub use metric::{check_lorentzian, parse_metric_spec, Metric2D, MetricSpec, Topology};
pub use nullflow::{integrate_null, null_slopes, shadow_endpoint, Direction, Event, NullBranch, NullPath};
pub use shadow::{causal_order, compute_shadow, shadows_intersect, CausalRelation, RelationTag, Shadow, Side};
pub use tolerance::Tolerances;
pub use verify::{
    build_grid_oracle, classify_conformal_map, cylinder_order, minkowski_order, GridOracle,
    MapVerdict, VerificationReport, VerifyConfig,
};
