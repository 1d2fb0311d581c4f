//! Small dense linear algebra: a row-major matrix, a symmetric Jacobi
//! eigensolver, and a general real eigensolver.

mod hqr;
mod jacobi;
mod matrix;

pub use hqr::{eigenvalues, merge_clusters};
pub use jacobi::{symmetric_eigen, SymmetricEigen};
pub use matrix::{dist, dot, norm, Matrix};
