//! Contraction-parameter coordinates for positive semidefinite matrices.
//!
//! Every Hermitian positive semidefinite `d x d` matrix `S` is described by its
//! diagonal scales `L_kk = sqrt(S_kk)` together with a strictly upper triangular
//! family of complex numbers `Gamma_kj` in the closed unit disc. The map is
//! computed in both directions without eigenvalues, and the same recursion
//! yields a Cholesky factor of `S`.
//!
//! On top of that coordinate system the crate provides density-matrix tools
//! ([`states`]) and quantum-channel tools ([`channels`]).

pub mod channels;
pub mod error;
pub mod matcore;
pub mod random;
pub mod schur;
pub mod states;

pub use error::{Error, Result};
pub use matcore::{ComplexMatrix, Tolerance, C64};
pub use schur::SchurParams;
