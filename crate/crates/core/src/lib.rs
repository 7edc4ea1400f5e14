//! Temperley-Lieb loop-model modules, lattice Virasoro generators and
//! measurements of emerging Jordan blocks and indecomposability parameters.

pub mod algebra;
pub mod analysis;
pub mod basis;
pub mod characters;
pub mod cli;
pub mod error;
pub mod inner;
pub mod jordan;
pub mod koosaleur;
pub mod linalg;
pub mod spectral;

pub use error::{Error, Result};
