//! Dense complex linear algebra and the two special functions used by the
//! rate expressions (exponential integral `Ei` and modified Bessel `I0`).
//!
//! Everything here operates on small matrices (dimension up to a few tens),
//! so all routines are plain dense O(n^3) algorithms with no blocking.

mod linalg;
mod special;
mod vector;

pub use linalg::{herm_eig, logdet_pd, solve_hermitian_pd, sym_eig};
pub use special::{bessel_i0, expint_ei};
pub use vector::{ComplexVector, HermitianMatrix};
