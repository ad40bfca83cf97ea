//! Hyperspectral pan-sharpening.
//!
//! Fuses a low-resolution hyperspectral cube with a high-resolution
//! panchromatic image. The estimate minimizes a weighted sum of a level-line
//! alignment term and total variation, subject to data-fit constraints whose
//! radii come from the sensor noise levels. The solver is ADMM with an exact
//! Fourier-domain least-squares step.
//!
//! - [`tensor`]: cube, plane and vector-field containers
//! - [`operators`]: gradient, decimation, blur, spectral mixing and the
//!   stacked splitting operator, each with its adjoint
//! - [`prox`]: shrinkage maps and ball projections
//! - [`solver`]: the ADMM loop
//! - [`metrics`]: RMSE, ERGAS, SAM, FCC and the QNR distortion indices
//! - [`sim`]: forward sensor simulation and synthetic scenes
//! - [`io`]: band-sequential raw files with JSON headers
//! - [`cli`]: configuration files and the `simulate`/`sharpen`/`evaluate` commands

pub mod cli;
pub mod error;
mod fft;
pub mod io;
pub mod metrics;
pub mod operators;
pub mod prox;
pub mod sim;
pub mod solver;
pub mod tensor;

pub use error::{Error, Result};
pub use operators::{Psf, SensorModel, SplitOperator, SplitVector};
pub use solver::{PanSharpener, SolverConfig};
pub use tensor::{HyperCube, PanImage, Plane, VectorField};
