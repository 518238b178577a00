//! Computational toolkit for the inverse theory of the Gowers `U^3` norm on finite abelian groups.

pub mod error;
pub mod experiments;
pub mod bohr;
pub mod cli;
pub mod forms;
pub mod fourier;
pub mod fp;
pub mod inverse_f5;
pub mod group;
pub mod lattice;
pub mod nil;
pub mod norms;
pub mod quadratic;

pub use error::{Error, Result};
