//! Critical Z-invariant Ising model on ℤ²-periodic isoradial graphs, solved
//! through Fisher's dimer representation and Kasteleyn Pfaffians.

pub mod cli;
pub mod embedding;
pub mod error;
pub mod fisher;
pub mod gibbs;
pub mod ising;
pub mod isoradial;
pub mod kasteleyn;
pub mod laplacian;
pub mod laurent;
pub mod oracle;
pub mod pfaffian;
pub mod report;
pub mod spectral;
pub mod torus;

pub use error::{Error, Result};
