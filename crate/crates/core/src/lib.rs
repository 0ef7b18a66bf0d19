//! Tile-based watermark embedding and detection with Reed–Solomon error
//! correction, plus a stream/batch scheduler and a discrete-event simulator
//! for the detection pipeline.

pub mod bits;
pub mod detect;
pub mod error;
pub mod exec;
pub mod gf;
pub mod imaging;
pub mod rng;
pub mod rscodec;
pub mod sched;
pub mod simexec;
pub mod stegocodec;
pub mod synth;
pub mod tiling;

pub use bits::Bits;
pub use error::{Error, Result};
