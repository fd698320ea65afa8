//! Numerical experiments around almost-commuting matrices: normalized-trace
//! linear algebra, finite-dimensional subalgebras, quantum expanders,
//! relative spectral-gap constructions, deformed tensor witnesses and a
//! nearest commuting pair search.

pub mod error;
pub mod expander;
pub mod gap_unitaries;
pub mod io;
pub mod linalg;
pub mod nearcomm;
pub mod subalgebra;
pub mod witness;

pub use error::{Error, Result};
