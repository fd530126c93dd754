//! Berezin-Toeplitz quantization of the torus and the sphere, random
//! perturbations of the resulting matrices and the spectral statistics used to
//! compare them with the Weyl law.

// `!(x > 0.0)` is the idiom here for checks that must also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calculus;
mod error;
mod fsutil;
pub mod geometry;
pub mod grushin;
pub mod harness;
pub mod linalg;
pub mod potential;
pub mod quantize;
pub mod randmat;
pub mod spectra;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use geometry::{PhaseSpace, SpaceKind, SymbolSpec};
pub use quantize::{quantize, ToeplitzMatrix};
pub use num_complex::Complex64;
