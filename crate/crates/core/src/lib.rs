//! Extended Gaussian distributions: Gaussians combined with uninformative
//! directions along a subspace, with exact conditioning.

pub mod cli;
pub mod decorated;
pub mod dsl;
pub mod error;
pub mod gauss;
pub mod gaussex;
pub mod linalg;
pub mod linrel;
pub mod subspace;

pub use error::{Error, Result};
pub use linalg::{Matrix, Vector};
pub use gaussex::{ExtendedGaussian, ExtendedGaussianMap};
pub use subspace::{Subspace, Tolerance};
