//! Core algorithms for personal emotion recognition from wearable gait data.
//!
//! Everything here is a pure function of its inputs and needs only `alloc`:
//! slicing raw sensor streams into labelled walks, windowed feature
//! extraction, the three personal-model families, randomized hyperparameter
//! search, the evaluation metrics and the synthetic cohort generator. File
//! formats, the command line and thread pools live in the `emowalk` crate.

#![cfg_attr(not(test), no_std)]

#[cfg(test)]
extern crate std;

extern crate alloc;

pub mod eval;
pub mod features;
pub mod ingest;
pub mod learners;
pub mod seed;
pub mod synth;
pub mod tuning;

/// Class label used throughout: 1 happy, 0 neutral, -1 sad.
pub type Label = i8;
