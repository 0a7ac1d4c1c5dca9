//! Fresnel interface coefficients for lossless, non-magnetic media.
//!
//! Sign convention: with the `s`/`p` bases from [`sp_basis`](super::optics::sp_basis)
//! (`ŝ ∝ d × n̂`, `p̂ = ŝ × k̂` for every wave), the coefficients below keep the
//! tangential electric and magnetic fields continuous, and the perfect-conductor
//! limit is `r_s = −1`, `r_p = +1`. At normal incidence both polarizations then
//! reflect the physical field by `(n₁ − n₂)/(n₁ + n₂)`, e.g. `−0.2` from air into
//! `n = 1.5` glass.

use num_complex::Complex;

use super::EmError;
use crate::scalar::Scalar;

/// Reflection and transmission amplitudes at one interface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceCoefficients<T> {
    pub r_s: Complex<T>,
    pub r_p: Complex<T>,
    pub t_s: Complex<T>,
    pub t_p: Complex<T>,
    /// Cosine of the transmission angle; purely imaginary under total internal reflection.
    pub cos_theta_t: Complex<T>,
    pub total_internal_reflection: bool,
}

impl<T: Scalar> InterfaceCoefficients<T> {
    /// Perfect electric conductor: full reflection, no transmitted wave.
    pub fn pec() -> Self {
        let c = |v: f64| Complex::new(T::lit(v), T::zero());
        Self {
            r_s: c(-1.0),
            r_p: c(1.0),
            t_s: c(0.0),
            t_p: c(0.0),
            cos_theta_t: c(0.0),
            total_internal_reflection: false,
        }
    }

    /// Polarization-averaged reflection amplitude `(|r_s| + |r_p|)/2`, always in `[0, 1]`.
    pub fn mean_reflectance(&self) -> T {
        (self.r_s.norm() + self.r_p.norm()) * T::lit(0.5)
    }
}

/// Fresnel amplitudes for a wave travelling from index `n1` into index `n2`.
pub fn fresnel<T: Scalar>(n1: T, n2: T, cos_theta_i: T) -> Result<InterfaceCoefficients<T>, EmError> {
    if !(n1.is_finite() && n2.is_finite()) || n1 <= T::zero() || n2 <= T::zero() {
        return Err(EmError::Domain(format!("refractive indices must be finite and > 0 (n1={n1}, n2={n2})")));
    }
    if !cos_theta_i.is_finite() || cos_theta_i <= T::zero() || cos_theta_i > T::one() + T::epsilon() {
        return Err(EmError::Domain(format!("cos(theta_i) must lie in (0, 1], got {cos_theta_i}")));
    }
    let ci = cos_theta_i.min(T::one());
    let eta = n1 / n2;
    let sin2_t = eta * eta * (T::one() - ci * ci);
    let tir = sin2_t > T::one();
    let ct = if tir {
        // evanescent branch decaying into medium 2 under e^{+jωt}
        Complex::new(T::zero(), -(sin2_t - T::one()).sqrt())
    } else {
        Complex::new((T::one() - sin2_t).sqrt(), T::zero())
    };
    let ci = Complex::new(ci, T::zero());
    let n1c = Complex::new(n1, T::zero());
    let n2c = Complex::new(n2, T::zero());
    let two = T::lit(2.0);

    let ds = n1c * ci + n2c * ct;
    let dp = n2c * ci + n1c * ct;
    let r_s = (n1c * ci - n2c * ct) / ds;
    let r_p = (n2c * ci - n1c * ct) / dp;
    let (t_s, t_p) = if tir {
        // field beyond the interface is evanescent; no propagating branch
        (Complex::new(T::zero(), T::zero()), Complex::new(T::zero(), T::zero()))
    } else {
        (n1c * ci * two / ds, n1c * ci * two / dp)
    };
    Ok(InterfaceCoefficients {
        r_s,
        r_p,
        t_s,
        t_p,
        cos_theta_t: ct,
        total_internal_reflection: tir,
    })
}
