//! Band-limited cone-adapted shearlet frames on periodic grids.
//!
//! Modules, bottom-up:
//! - [`windows`]: spectral windows and their partition identities
//! - [`lattice`]: dilation/shear matrices, indices, cells
//! - [`grid`]: sampling grids and the d-dimensional FFT
//! - [`frame`]: frame construction for the cone-projected and smooth variants
//! - [`transform`]: analysis, synthesis, lattice sampling, dyadic transform
//! - [`spaces`]: Besov and Triebel-Lizorkin norms, maximal functions
//! - [`verify`]: numerical checks with structured reports

pub mod error;
pub mod frame;
pub mod grid;
pub mod lattice;
pub mod signals;
pub mod spaces;
pub mod transform;
pub mod verify;
pub mod windows;

pub use error::{Error, Result};
pub use frame::{Frame, FrameSpec, Variant};
pub use grid::{Grid, GridFft};
pub use lattice::{Band, ShearIndex};
pub use transform::{CoefficientField, GridFunction, SequenceCoefficients};
pub use windows::{WindowBank, WindowParams};
