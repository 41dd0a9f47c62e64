//! Topological features of masked 3D volumes.
//!
//! Volumes are summarized into patch point clouds whose alpha-complex
//! persistence is vectorized into fixed-length features; a cubical
//! filtration of the raw volume serves as the baseline.

pub mod alpha;
pub mod bench;
pub mod cubical;
pub mod error;
pub mod exec;
pub mod io;
pub mod ml;
pub mod patch;
pub mod persistence;
pub mod phantom;
pub mod pipeline;
pub mod preprocess;
pub mod vectorize;
pub mod volume;

pub use error::{Error, Result};
pub use exec::Parallelism;
pub use volume::{Dims, Mask, Volume};
