//! Elliptic lattices on biquadratic curves and the interpolatory elliptic
//! hypergeometric expansions that solve linear first-order difference
//! equations on them.
//!
//! The crate is organised bottom-up:
//!
//! * [`poly`]: complex polynomials, rational functions and root finding;
//! * [`curve`]: the biquadratic curve `F(x, y) = Σ c_ij x^i y^j` and its two
//!   quadratic views;
//! * [`lattice`]: elliptic lattices generated by alternating second-root
//!   extraction, plus closed-form lattices for the degenerate cases;
//! * [`diffops`]: the divided-difference and mean operators and the
//!   interpolation bases built on two lattices;
//! * [`solver`]: the expansion solving `a·Df = c·Mf + d`;
//! * [`convergence`]: empirical and predicted geometric rates, period
//!   quadrature, small-divisor detection;
//! * [`io`]: CSV and JSON dumps.

pub mod convergence;
pub mod curve;
pub mod diffops;
pub mod error;
pub mod io;
pub mod lattice;
pub mod poly;
pub mod solver;

pub use curve::{BiquadraticCurve, RootPair};
pub use diffops::BasisPair;
pub use error::{Error, Result};
pub use lattice::{LatticePair, LatticeSpec};
pub use poly::{Polynomial, RationalFunction};
pub use solver::{DifferenceEquation, ExpansionSolution};

/// Scalar field for every computation in the crate.
pub type Scalar = num_complex::Complex64;

/// Shorthand for a real-valued [`Scalar`].
pub fn re(x: f64) -> Scalar {
    Scalar::new(x, 0.0)
}
