pub mod assembly;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod kernel;
pub mod meshio;
pub mod spectral;
pub mod xi_quadrature;

pub use error::{Error, Result};
