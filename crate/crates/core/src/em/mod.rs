//! Field kernel: complex vectors, materials, Snell's law and Fresnel coefficients.

mod fresnel;
mod material;
mod optics;
mod vector;

pub use fresnel::{fresnel, InterfaceCoefficients};
pub use material::Material;
pub use optics::{interface_transform, reflect, refract, sp_basis, BranchKind, Refraction, SpBasis};
pub use vector::{real_times, ComplexVec3, Vec3};

/// Speed of light in vacuum, m/s.
pub const C0: f64 = 299_792_458.0;
/// Free-space impedance, ohms.
pub const ETA0: f64 = 376.730_313_412;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EmError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    #[error("field not transverse to propagation direction (|E·k| = {0:e})")]
    NonTransverse(f64),
}
