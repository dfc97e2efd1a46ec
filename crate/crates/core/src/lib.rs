//! Singular measures and distributions on the circle with one-sided Fourier
//! decay, together with the numerical machinery that certifies their
//! properties.

pub mod asym;
pub mod cantor;
pub mod dims;
pub mod circle;
pub mod cli;
pub mod error;
pub mod fit;
pub mod hardy;
pub mod nufft;
pub mod quad;
pub mod report;
pub mod salem;

pub use error::{Error, Result};
