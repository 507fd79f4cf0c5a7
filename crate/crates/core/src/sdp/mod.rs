//! Semidefinite programming over a single PSD block.

pub mod eig;
pub mod solver;
pub mod sym;

pub use eig::{sym_eig, SymEigen};
pub use solver::{solve, solve_logged, Residuals, SdpError, SdpInstance, SdpOptions, SdpSolution, SdpStatus};
pub use sym::{smat, svec, svec_index, svec_len, SparseSym, SymMat};
