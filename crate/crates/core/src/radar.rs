//! Incidence and observation geometry in spherical coordinates.

use serde::{Deserialize, Serialize};

use crate::Vec3;

/// Receive/transmit polarization pair, receiver first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pol {
    Vv,
    Hh,
    Vh,
    Hv,
}

impl Pol {
    pub const ALL: [Pol; 4] = [Pol::Vv, Pol::Hh, Pol::Vh, Pol::Hv];

    /// Column index in a sweep.
    pub fn index(self) -> usize {
        self as usize
    }

    /// `(receive, transmit)` with 0 = vertical, 1 = horizontal.
    pub fn rx_tx(self) -> (usize, usize) {
        match self {
            Pol::Vv => (0, 0),
            Pol::Hh => (1, 1),
            Pol::Vh => (0, 1),
            Pol::Hv => (1, 0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Pol::Vv => "vv",
            Pol::Hh => "hh",
            Pol::Vh => "vh",
            Pol::Hv => "hv",
        }
    }
}

impl std::str::FromStr for Pol {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "vv" => Ok(Pol::Vv),
            "hh" => Ok(Pol::Hh),
            "vh" => Ok(Pol::Vh),
            "hv" => Ok(Pol::Hv),
            _ => Err(format!("unknown polarization '{s}' (expected vv, hh, vh or hv)")),
        }
    }
}

/// Radial unit vector and its `θ̂`, `φ̂` companions for angles in degrees.
pub fn spherical_frame(theta_deg: f64, phi_deg: f64) -> (Vec3, Vec3, Vec3) {
    let (st, ct) = theta_deg.to_radians().sin_cos();
    let (sp, cp) = phi_deg.to_radians().sin_cos();
    (
        Vec3::new(st * cp, st * sp, ct),
        Vec3::new(ct * cp, ct * sp, -st),
        Vec3::new(-sp, cp, 0.0),
    )
}

/// Plane-wave source and far-field receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Radar {
    /// Propagation direction of the incident wave.
    pub k_inc: Vec3,
    /// Incident field directions for vertical and horizontal transmit.
    pub tx: [Vec3; 2],
    /// Direction from the scene towards the receiver.
    pub k_scatter: Vec3,
    pub rx: [Vec3; 2],
}

impl Radar {
    /// Source and receiver at the same direction `(θ, φ)` from the scene.
    pub fn monostatic(theta_deg: f64, phi_deg: f64) -> Self {
        Self::bistatic(theta_deg, phi_deg, theta_deg, phi_deg)
    }

    pub fn bistatic(theta_deg: f64, phi_deg: f64, rx_theta_deg: f64, rx_phi_deg: f64) -> Self {
        let (r, th, ph) = spherical_frame(theta_deg, phi_deg);
        let (rs, ths, phs) = spherical_frame(rx_theta_deg, rx_phi_deg);
        Self { k_inc: -r, tx: [th, ph], k_scatter: rs, rx: [ths, phs] }
    }

    pub fn is_monostatic(&self) -> bool {
        (self.k_inc + self.k_scatter).norm() < 1e-12
    }
}
