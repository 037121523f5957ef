//! Spectral theory of quantized mirror curves.
//!
//! Two pipelines live side by side. The operator side Weyl-quantizes a toric
//! mirror curve and diagonalizes it in a harmonic-oscillator basis, or
//! integrates the exact kernel of its inverse. The enumerative side predicts
//! the same spectrum from periods, free energies and the grand potential.

pub mod dd;
pub mod enumerative;
pub mod error;
pub mod fredholm;
pub mod kernels;
pub mod periods;
pub mod quad;
pub mod quantizer;
pub mod series;
pub mod specfun;
pub mod toric;

pub mod eigen;

pub use error::{Error, Result};
