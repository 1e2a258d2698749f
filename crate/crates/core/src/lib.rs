//! Mother body of a planar orthogonality model with two point insertions.
//!
//! The model has external field `V(z) = c log(z^2 + a^2)` with `a^2 >= 2c`
//! and time `0 < t < t*`. Modules, in dependency order:
//!
//! * [`model`]: parameters, `t*` and `t_c`.
//! * [`conformal`]: the rational conformal map and labelled preimages.
//! * [`spectral`]: the cubic spectral curve, its sheets, nodes and discriminant.
//! * [`measures`]: `mu1`, `mu2`, potentials, variational checks, `gamma`, phi-functions.
//! * [`oracle`]: exact orthogonal polynomials over the rationals and their zeros.
//! * [`asympt`]: strong asymptotics and zero-distribution comparisons.
//! * [`verify`]: the end-to-end acceptance checks.
//!
//! [`exec`] selects sequential or rayon execution; [`export`] writes
//! deterministic CSV and JSON.

pub mod asympt;
pub mod conformal;
pub mod error;
pub mod measures;
pub mod exec;
pub mod export;
pub mod model;
pub mod oracle;
pub mod poly;
pub mod quad;
pub mod solve1d;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
pub use exec::Exec;
pub use num_complex::Complex64 as C64;
