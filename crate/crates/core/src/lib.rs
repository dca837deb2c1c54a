//! Simulated quantum image classification.
//!
//! Training is classical: grayscale images are stacked into an l2-normalized
//! sample matrix whose leading right singular vectors become the principal
//! components. Each component and each input image is encoded into a
//! direct-sum quantum state, and an input is classified by measuring
//! `n^2` copies of its state with the projector onto the encoded components.
//!
//! ```
//! use qpca::classifier::{classify, train, yes_probability, TrainOptions};
//! use qpca::pca::ComponentSelection;
//!
//! let samples = [[0.9, 0.1, 0.0, 0.2], [0.8, 0.2, 0.1, 0.1]];
//! let opts = TrainOptions { selection: ComponentSelection::Count(1), ..Default::default() };
//! let model = train(&samples, &opts).unwrap().model;
//! let p = yes_probability(&model, &[0.9, 0.1, 0.0, 0.2]).unwrap();
//! assert!(p > 0.0 && p <= 1.0 / 16.0 + 1e-12);
//! let result = classify(&model, &[0.9, 0.1, 0.0, 0.2], 7).unwrap();
//! assert!(result.trials_run <= 16);
//! ```

pub mod classifier;
pub mod cli;
pub mod encoding;
pub mod error;
pub mod linalg;
pub mod model_io;
pub mod pca;
pub mod quantum;

pub use error::{Error, Result};
