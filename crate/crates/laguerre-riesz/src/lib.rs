//! Numerical library for convolution-type Laguerre expansions on
//! `(0, inf)^d`: eigenfunction evaluation, weighted quadrature, spectral
//! projections, Bochner-Riesz and Cesaro summability, heat kernels, and a
//! set of desk-scale experiments that measure the exponent laws these
//! operators obey.

pub mod error;
pub mod expansion;
pub mod gamma;
pub mod kernels;
pub mod lab;
pub mod measure;
pub mod special;
pub mod summability;

pub use error::{Error, Result};
pub use special::{AlphaVector, MultiIndex};
