//! Dynamic sign recognition from hand trajectories.
//!
//! The pipeline runs from grayscale frames to a class label:
//!
//! 1. [`imaging`] finds the frame where the gloved hand enters and tracks
//!    it by region growing, producing per-frame [`imaging::RegionStats`].
//! 2. [`features`] normalizes those statistics and resamples them to a
//!    fixed-length [`features::FeatureMatrix`].
//! 3. [`hmm`] trains one Gaussian-mixture HMM ([`gmm`] emissions) per sign
//!    with Baum-Welch.
//! 4. [`classify`] picks the sign whose model gives the highest
//!    likelihood and runs the evaluation protocols.
//!
//! [`datagen`] builds synthetic corpora with the same layout.

pub mod classify;
pub mod datagen;
pub mod error;
pub mod features;
pub mod frames;
pub mod gmm;
pub mod hmm;
pub mod imaging;
pub mod model_file;

pub use error::{Error, Result};
pub use features::{FeatureMatrix, FeatureSet};
pub use gmm::{Gaussian, Gmm};
pub use hmm::{Hmm, TrainConfig};

/// Crate version embedded in every written artifact.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
