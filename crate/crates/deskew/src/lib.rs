//! Image IO, synthetic datasets, batch evaluation and the command-line front
//! end for [`deskew_core`].

pub mod cli;
pub mod config;
pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod fft;
pub mod io;
pub mod synth;

pub use error::{Error, Result};
pub use fft::RustFft;
