//! Exact and certified computations for the little q-Jacobi family and its
//! 2x2 matrix-valued analogue.
//!
//! Module map:
//! - [`scalar`], [`certified`], [`matrix`]: Gaussian-rational scalars,
//!   midpoint/radius enclosures, exact dense linear algebra.
//! - [`qcalc`]: q-Pochhammer symbols, q-binomials, q-derivatives,
//!   q-integrals, terminating 2phi1.
//! - [`polymat`]: matrix polynomials in `z` and `z^{-1}`, exact lattice
//!   interpolation.
//! - [`lqjacobi`]: the scalar little q-Jacobi family.
//! - [`weights`]: q-weights, moment-based and certified inner products,
//!   monic Gram-Schmidt, reducibility, weight construction from symmetry.
//! - [`qdiffop`]: q-difference operators with right-acting coefficients.
//! - [`meta`]: matrix-valued basic hypergeometric series 2eta1 and the
//!   q-difference equation it solves.
//! - [`mvlqj`]: the explicit 2x2 matrix-valued little q-Jacobi family.
//! - [`verify`]: the cross-validation suite used by the CLI.

pub mod certified;
pub mod error;
pub mod lqjacobi;
pub mod matrix;
pub mod meta;
pub mod mvlqj;
pub mod polymat;
pub mod qcalc;
pub mod qdiffop;
pub mod scalar;
pub mod verify;
pub mod weights;

pub use certified::{CertifiedMat, CertifiedReal, CertifiedScalar};
pub use error::{Error, Result};
pub use matrix::Mat;
pub use polymat::{LaurentMatPoly, MatPoly};
pub use qcalc::{LatticeFunction, QBase};
pub use scalar::{ExactScalar, Rat};
