//! File formats: mesh text, marker and result tables, frame sources and SVG
//! plots. The stiffness dump lives in [`crate::fem`] and the configuration
//! in [`crate::config`].

pub mod frames;
pub mod markers;
pub mod mesh_format;
pub mod results;
pub mod svg;

pub use frames::{companion_mask, frame_source, list_frames, load_frame_input, load_markers};
pub use markers::{
    read_correspondence, read_frame, read_frame_file, write_correspondence, write_frame,
    write_frame_file,
};
pub use mesh_format::{decode_mesh, encode_mesh, read_mesh, write_mesh, MESH_HEADER};
pub use results::{read_result, read_result_file, write_result, write_result_file, RESULT_HEADER};
pub use svg::{emit_quiver_svg, quiver_svg, PlotStyle, MAX_ARROW_SPACINGS};
