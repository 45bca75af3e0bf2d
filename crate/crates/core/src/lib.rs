//! Symbolic tools for graphs of groups over free and free abelian vertex
//! groups, test-sequence constructions, integer-lattice coset covering and
//! verification of formal solutions to systems of equations over groups.

pub mod error;
pub mod gog;
pub mod lattice;
pub mod merz;
pub mod modular;
pub mod target;
pub mod testseq;
pub mod words;

pub use error::{Error, Result};
pub use words::{Alphabet, Generator, Word};
