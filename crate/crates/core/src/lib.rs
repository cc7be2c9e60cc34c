//! Dense three-axis contact force reconstruction for marker-based elastomer
//! tactile sensors.
//!
//! The gel pad is discretized as a single layer of Hex-8 elements whose
//! bottom face is bonded to the rigid backing. Marker motion observed by the
//! camera is tracked, corrected for the apparent in-plane shift that normal
//! deformation produces through the refracting gel, combined with a normal
//! displacement reconstructed from the contact patch, and mapped to nodal
//! forces with the precomputed stiffness matrix (`F = K U`).

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Node-indexed loops over shape-function tables read closer to the math.
#![allow(clippy::needless_range_loop)]

pub mod config;
pub mod error;
pub mod exec;
pub mod fem;
pub mod io;
pub mod mesh;
pub mod optics;
pub mod pipeline;
pub mod raster;
pub mod tracking;

pub use error::{Error, Result};
pub use exec::Execution;
