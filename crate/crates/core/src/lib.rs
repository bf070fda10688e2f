//! Brown measures of `x₀ + T`, with `T` R-diagonal and `*`-free from `x₀`.
//!
//! The pipeline runs on the imaginary axis: symmetrized modulus laws
//! ([`measures`]) feed the subordination solver ([`subordination`]), whose
//! boundary values give Fuglede–Kadison determinants, the support domain and
//! the density ([`brown`]). [`rmt_oracle`] samples finite matrices of the
//! same model to check the theory; [`cli`] backs the `brownkit` binary.
//!
//! ```
//! use brownkit::brown::brown_density;
//! use brownkit::operator_models::{OperatorModel, RDiagonalSpec};
//! use num_complex::Complex64;
//!
//! let t = RDiagonalSpec::Circular { variance: 1.0 };
//! let rho = brown_density(&t, &OperatorModel::zero(), Complex64::new(0.3, 0.2)).unwrap();
//! assert!((rho - std::f64::consts::FRAC_1_PI).abs() < 1e-12);
//! ```
//!
//! Runnable examples: `circular_law`, `determinants`, `subordination`,
//! `radial_cdf`, `ring_radii`, `domain_boundary`, `selfadjoint_circular`,
//! `elliptic_domain` and `single_ring_validation`.

pub mod error;
pub mod linalg;
pub mod measures;
pub mod quadrature;
pub mod roots;

pub use error::{Error, Result};

pub mod brown;
pub mod cli;
pub mod operator_models;
pub mod rmt_oracle;
pub mod subordination;
