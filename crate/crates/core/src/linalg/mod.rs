//! Sparse symmetric storage, conjugate gradients, extreme generalized
//! eigenvalues and a dense eigendecomposition oracle.

mod cg;
mod dense;
mod eigen;
mod sparse;

pub use cg::{cg_solve, cg_solve_observed, default_max_iter, CG_TOL};
pub use dense::{dense_generalized_eig, dense_spd_solve, DenseMatrix, GeneralizedEigen, DENSE_CAP};
pub use eigen::{mass_dot, spectrum_bounds, SpectrumBounds};
pub use sparse::{dot, energy_norm, norm2, SparseSymMatrix, SymTriplets};
