//! Far-field radar scattering by shooting and bouncing rays, with a Monte Carlo
//! path-space estimator and a deterministic branch-tree baseline.

pub mod em;
pub mod farfield;
pub mod geometry;
pub mod oracles;
pub mod path;
pub mod radar;
pub mod scenes;
pub mod signal;
pub mod scalar;
pub mod solver;

/// Double-precision real vector used by geometry and the solvers.
pub type Vec3 = em::Vec3<f64>;
/// Double-precision complex vector.
pub type ComplexVec3 = em::ComplexVec3<f64>;
/// Double-precision complex scalar.
pub type Complex = num_complex::Complex<f64>;
