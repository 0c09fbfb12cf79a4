//! Tongue contour post-processing and evaluation core.
//!
//! Turns per-pixel contour probability maps into ordered, 1-pixel-wide open
//! curves and scores predicted curves against ground truth with the Mean Sum
//! of Distance (MSD) metric. Everything here is pure computation over
//! in-memory rasters: no file system, no threads. File formats, the batch
//! runner and the command line live in the `tongue-contour` crate.
//!
//! Pipeline:
//! probability map -> threshold -> (optional thinning) -> outlier filter ->
//! extremity pair -> squared-distance point graph -> Dijkstra -> [`Contour`].

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod extract;
pub mod folds;
pub mod metrics;
pub mod preprocess;
pub mod rasterize;
pub mod rng;
pub mod synth;
pub mod types;

pub use extract::{extract_contour, ExtractConfig, ExtractError, ExtractStage};
pub use folds::{split_folds, FoldAssignment, FoldError, FoldMode, Split};
pub use metrics::{
    aggregate_fold, aggregate_overall, msd, msd_px, EvalRecord, EvalStatus, FoldReport,
    MeanStd, MetricsError, OverallSummary,
};
pub use preprocess::{crop, equalize, CropRect};
pub use rasterize::{rasterize_contour, weight_map, weighted_bce, LossWeights};
pub use rng::SplitMix64;
pub use synth::{corrupt, gen_curve, CorruptedMap, SynthError, SynthParams};
pub use types::{
    BinaryMask, Contour, ContourError, GrayImage, Grid, GridError, ImageMeta, PixelPoint,
    ProbMap, WeightMap,
};
