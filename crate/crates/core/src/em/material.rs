use serde::{Deserialize, Serialize};

/// Lossless isotropic material, or a perfect electric conductor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub name: String,
    pub eps_r: f64,
    pub mu_r: f64,
    pub is_pec: bool,
}

impl Material {
    pub fn dielectric(name: impl Into<String>, eps_r: f64) -> Self {
        Self { name: name.into(), eps_r, mu_r: 1.0, is_pec: false }
    }

    pub fn vacuum() -> Self {
        Self::dielectric("air", 1.0)
    }

    pub fn pec(name: impl Into<String>) -> Self {
        Self { name: name.into(), eps_r: 1.0, mu_r: 1.0, is_pec: true }
    }

    /// `sqrt(eps_r * mu_r)`; meaningless for conductors.
    pub fn refractive_index(&self) -> f64 {
        (self.eps_r * self.mu_r).sqrt()
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.is_pec {
            return Ok(());
        }
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(self.eps_r) || !ok(self.mu_r) {
            return Err(format!("material '{}' needs finite eps_r, mu_r > 0", self.name));
        }
        Ok(())
    }
}
