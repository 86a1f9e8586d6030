//! Computable objects around box norms on Z^D and the PET induction scheme.
//!
//! * [`lattice`]: exact vectors, multisets, GAPs and Fejér kernels.
//! * [`polyalg`]: polynomials in `z, h_1, ..., h_r` with Z^D coefficients.
//! * [`norms`]: box norms, Gowers–Cauchy–Schwarz products, counting operators.
//! * [`pet`]: the van der Corput operation and the PET reduction loop.
//! * [`equidist`]: exact and sampled counts for linear and multilinear systems.

pub mod equidist;
pub mod error;
mod grid;
pub mod int;
pub mod lattice;
pub mod norms;
pub mod pet;
pub mod polyalg;

pub use error::{Error, Result};
pub use int::Int;
pub use lattice::{FejerKernel, GenArithProgression, IntMultiset, LatticeVector};
pub use norms::{LatticeFunction, NormReport};
pub use pet::{PetTrace, PolynomialFamily};
pub use polyalg::{Monomial, VectorPolynomial};
