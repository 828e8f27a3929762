//! Semiconcave functions, gradient flows, radial curves and quasigeodesics on
//! concrete two-dimensional Alexandrov spaces.
//!
//! Every space here has a one-dimensional space of directions (a circle or an
//! arc), so all direction arithmetic is angular. The crate is `no_std` and only
//! needs `alloc`.

#![no_std]
// Float methods resolve to std's inherent ones whenever a dependency links std.
#![allow(unused_imports)]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod concavity_tight;
pub mod error;
mod ext;
pub mod extremal;
pub mod flow;
pub mod functions;
pub mod model_plane;
pub mod quasigeodesic;
pub mod radial;
pub mod report;
pub mod spaces;
pub mod tangent;

pub use error::{GeoError, Result};
pub use model_plane::Kappa;
pub use functions::Expr;
pub use report::Report;
pub use spaces::{Point, Sigma, Space, TangentVec};
