//! Evaluation of class-guided saliency maps.
//!
//! Two families of metrics:
//!
//! * **accuracy** ([`accuracy`]): the Weighting Game, the share of saliency
//!   mass that falls inside the class segmentation mask after a 9×9
//!   dilation, next to the classic Pointing Game and a small-object variant;
//! * **stability** ([`stability`]): Spearman rank correlation between maps
//!   of consecutive video frames, or between a cropped map and the map of
//!   the cropped image.
//!
//! Masks come from COCO-style annotation files ([`mask`]); saliency maps are
//! exchanged as SMAP or grayscale PNG files ([`io`]). The [`synth`] module
//! generates scenes and ideal explainers so every metric can be exercised
//! without a model. [`pipeline`] holds the batch drivers behind the
//! `saliency-eval` binary.
//!
//! See `examples/` for one runnable program per capability.

pub mod accuracy;
pub mod error;
pub mod grid;
pub mod io;
pub mod mask;
pub mod morphology;
pub mod pipeline;
pub mod resample;
pub mod rng;
pub mod stability;
pub mod synth;

pub use accuracy::{
    aggregate, evaluate_mask, evaluate_pair, pointing_game, uniform_baseline, weighting_game,
    AccuracyConfig, AccuracyRecord, AccuracySummary,
};
pub use error::{Error, Result};
pub use grid::{
    area_fraction, argmax_location, masked_mass, total_mass, BinaryMask, PixelLocation,
    SaliencyMap,
};
pub use morphology::{dilate, KernelSpec};
pub use resample::{apply_crop, bilinear_resize, sample_crop, synthesize_zoom_sequence, CropSpec};
pub use rng::RngStream;
pub use stability::{crop_stability, spearman, StabilityRecord, StabilitySummary};
