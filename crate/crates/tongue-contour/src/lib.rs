//! File formats, batch evaluation and the command line for tongue contour
//! extraction. The algorithms themselves live in `tongue_contour_core`,
//! re-exported here as [`core`].

pub mod cli;
pub mod contour_csv;
pub mod corpus;
pub mod manifest;
pub mod netpbm;
pub mod overlay;

pub use tongue_contour_core as core;
