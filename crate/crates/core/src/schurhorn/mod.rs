//! Finite majorization certificates: T-transform chains, Birkhoff decompositions,
//! Schur–Horn synthesis and the matrix-level witness.

pub mod birkhoff;
pub mod synth;
pub mod tchain;
pub mod witness;

pub use birkhoff::{birkhoff, BirkhoffCertificate};
pub use synth::{schur_horn_matrix, symmetric_eigenvalues, SymMatrix};
pub use tchain::{compose, tchain, TTransform};
pub use witness::{khintchine_witness, WitnessReport};
