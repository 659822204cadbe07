pub mod dirichlet;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod kernel;
pub mod layerpot;
pub mod lpr;
pub mod polyspace;
pub mod quadrature;
pub mod scheme;
pub mod target;
pub mod volume;

pub use error::{Error, Result};
