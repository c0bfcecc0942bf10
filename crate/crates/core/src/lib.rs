//! Multi-target visual tracking on raw image frames.
//!
//! The pipeline per frame: running-average background subtraction extracts
//! foreground blobs, a bootstrap particle filter predicts each tracked
//! object's state under a second-order ARMA transition, and a data
//! association pass validates filter outputs against the detected blobs,
//! managing an occlusion queue with adaptive noise for recovery. A
//! deterministic synthetic-scene generator and an evaluation harness
//! (ground-truth comparison, particle-count sweeps, cost-benefit analysis)
//! round out the toolkit.
//!
//! Modules follow the pipeline stages:
//!
//! - [`scene_io`]: P6 raster frames, NTXY trajectories, synthetic scenes
//! - [`background`]: running-average model, foreground mask, blob extraction
//! - [`appearance`]: HSV histograms and Bhattacharyya similarity
//! - [`particle_filter`]: predict / measure / select / resample per object
//! - [`data_association`]: blob-object matching, occlusion queue, recovery
//! - [`tracker`]: per-frame orchestration and timing
//! - [`eval`]: accuracy vs ground truth, sweeps, cost-benefit

pub mod appearance;
pub mod background;
pub mod data_association;
mod error;
pub mod eval;
pub mod particle_filter;
pub mod scene_io;
pub mod tracker;

pub use error::{Error, Result};
