//! Singular Poisson reduction of cotangent bundles `T*Q` under compact
//! matrix group actions of a single isotropy type.
//!
//! The reduced space is realized in section coordinates `(x, eta, lambda)`
//! with `x` coordinates on `Q/K`, `eta` a covector on `Q/K` and `lambda` in
//! the annihilator of the isotropy algebra along the section. The reduced
//! bracket, Hamiltonian fields and leaf data can all be compared against a
//! brute-force canonical bracket on `T*Q`.

pub mod check;
pub mod connection;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod leaves;
pub mod lie;
pub mod linalg;
pub mod rng;
pub mod scenarios;
pub mod weinstein;

pub use error::{Error, Result};
pub use lie::{AlgebraElement, CoAlgebraElement, MatrixLieAlgebra, Subspace};
pub use nalgebra;
