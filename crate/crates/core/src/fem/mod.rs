//! Hex-8 finite element machinery: element integration, global assembly,
//! the inverse force map and the forward oracle solve.

pub mod element;
pub mod field;
pub mod operator;
pub mod persist;
pub mod sparse;

pub use element::{element_stiffness, ElementStiffness};
pub use field::{resultant, DisplacementField, ForceField};
pub use operator::{assemble, assemble_with, StiffnessOperator, FORWARD_SOLVE_TOLERANCE};
pub use persist::{decode_operator, encode_operator, load_operator, save_operator};
pub use sparse::{CsrMatrix, SolverKind};
