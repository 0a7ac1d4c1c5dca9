//! Ray directions at an interface and the polarization-resolved field transform.

use super::fresnel::InterfaceCoefficients;
use super::vector::{real_times, ComplexVec3, Vec3};
use super::EmError;
use crate::scalar::Scalar;

/// Which wave leaves the interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum BranchKind {
    Reflect,
    Transmit,
}

/// Result of applying Snell's law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Refraction<T> {
    Transmitted(Vec3<T>),
    TotalInternalReflection,
}

fn grazing_tolerance<T: Scalar>() -> T {
    T::lit(1e-9).max(T::epsilon() * T::lit(16.0))
}

/// Mirror `dir` about the plane with unit normal `normal`.
pub fn reflect<T: Scalar>(dir: Vec3<T>, normal: Vec3<T>) -> Result<Vec3<T>, EmError> {
    let c = dir.dot(normal);
    if c.abs() < grazing_tolerance() {
        return Err(EmError::DegenerateGeometry("grazing incidence".into()));
    }
    Ok((dir - normal * (c + c)).normalize())
}

/// Refract `dir` from index `n1` into index `n2`. The normal may face either way.
pub fn refract<T: Scalar>(dir: Vec3<T>, normal: Vec3<T>, n1: T, n2: T) -> Result<Refraction<T>, EmError> {
    let c = dir.dot(normal);
    if c.abs() < grazing_tolerance() {
        return Err(EmError::DegenerateGeometry("grazing incidence".into()));
    }
    let nn = if c > T::zero() { -normal } else { normal };
    let ci = -dir.dot(nn);
    let eta = n1 / n2;
    let sin2_t = eta * eta * (T::one() - ci * ci);
    if sin2_t > T::one() {
        return Ok(Refraction::TotalInternalReflection);
    }
    let ct = (T::one() - sin2_t).sqrt();
    Ok(Refraction::Transmitted((dir * eta + nn * (eta * ci - ct)).normalize()))
}

/// Local `s`/`p` polarization frame of one interface event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpBasis<T> {
    /// Perpendicular to the plane of incidence.
    pub s_hat: Vec3<T>,
    pub p_hat_in: Vec3<T>,
    pub p_hat_out_r: Vec3<T>,
    /// Present when a transmitted direction was supplied.
    pub p_hat_out_t: Option<Vec3<T>>,
}

/// Builds the `s`/`p` frame for incoming direction `dir_in` on a surface with `normal`.
///
/// Near normal incidence (`|dir × n̂| < 1e-6`) the plane of incidence is undefined;
/// `ŝ` is then the projection of `x̂` (or `ŷ` when `dir` is close to `x̂`) onto the
/// plane transverse to `dir`.
pub fn sp_basis<T: Scalar>(
    dir_in: Vec3<T>,
    normal: Vec3<T>,
    dir_t: Option<Vec3<T>>,
) -> Result<SpBasis<T>, EmError> {
    let dir_r = reflect(dir_in, normal)?;
    let c = dir_in.cross(normal);
    let s_hat = if c.norm() >= T::lit(1e-6) {
        c.normalize()
    } else {
        let project = |a: Vec3<T>| a - dir_in * a.dot(dir_in);
        let px = project(Vec3::unit_x());
        if px.norm() > T::lit(0.5) {
            px.normalize()
        } else {
            project(Vec3::unit_y()).normalize()
        }
    };
    Ok(SpBasis {
        s_hat,
        p_hat_in: s_hat.cross(dir_in).normalize(),
        p_hat_out_r: s_hat.cross(dir_r).normalize(),
        p_hat_out_t: dir_t.map(|t| s_hat.cross(t).normalize()),
    })
}

/// Decompose `e` on the incident `s`/`p` basis, scale by the branch coefficients and
/// recompose on the outgoing basis. `e` must be transverse to `dir_in`.
pub fn interface_transform<T: Scalar>(
    e: ComplexVec3<T>,
    dir_in: Vec3<T>,
    branch: BranchKind,
    coeffs: &InterfaceCoefficients<T>,
    basis: &SpBasis<T>,
) -> Result<ComplexVec3<T>, EmError> {
    let tol = T::lit(1e-9).max(T::epsilon() * T::lit(1e3));
    let along = e.dot_real(dir_in).norm();
    if along > tol * (e.norm() + T::min_positive_value()) {
        return Err(EmError::NonTransverse(along.to_f64().unwrap_or(f64::NAN)));
    }
    let es = e.dot_real(basis.s_hat);
    let ep = e.dot_real(basis.p_hat_in);
    let (cs, cp, p_out) = match branch {
        BranchKind::Reflect => (coeffs.r_s, coeffs.r_p, basis.p_hat_out_r),
        BranchKind::Transmit => {
            let p = basis
                .p_hat_out_t
                .ok_or_else(|| EmError::DegenerateGeometry("transmit branch without refracted direction".into()))?;
            (coeffs.t_s, coeffs.t_p, p)
        }
    };
    Ok(real_times(basis.s_hat, cs * es) + real_times(p_out, cp * ep))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::em::fresnel::fresnel;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex;
    use proptest::prelude::*;

    type V = Vec3<f64>;

    fn unit(theta: f64, phi: f64) -> V {
        V::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos())
    }

    fn transverse(d: V, a: f64, b: Complex<f64>, c: Complex<f64>) -> ComplexVec3<f64> {
        let helper = if d.x.abs() < 0.9 { V::unit_x() } else { V::unit_y() };
        let u = d.cross(helper).normalize();
        let w = d.cross(u);
        real_times(u, b * a) + real_times(w, c)
    }

    #[test]
    fn reflect_examples() {
        let r = reflect(-V::unit_z(), V::unit_z()).unwrap();
        assert_abs_diff_eq!((r - V::unit_z()).norm(), 0.0, epsilon = 1e-15);
        let s = 0.5f64.sqrt();
        let r = reflect(V::new(s, 0.0, -s), V::unit_z()).unwrap();
        assert_abs_diff_eq!((r - V::new(s, 0.0, s)).norm(), 0.0, epsilon = 1e-15);
        assert!(reflect(V::unit_x(), V::unit_z()).is_err());
    }

    #[test]
    fn refract_examples() {
        let d = V::new(0.3, 0.4, -(1.0f64 - 0.25).sqrt());
        match refract(d, V::unit_z(), 1.2, 1.2).unwrap() {
            Refraction::Transmitted(t) => assert_abs_diff_eq!((t - d).norm(), 0.0, epsilon = 1e-15),
            _ => panic!(),
        }
        match refract(-V::unit_z(), V::unit_z(), 1.0, 2.0).unwrap() {
            Refraction::Transmitted(t) => assert_abs_diff_eq!((t + V::unit_z()).norm(), 0.0, epsilon = 1e-15),
            _ => panic!(),
        }
        let th = 45f64.to_radians();
        let d = V::new(th.sin(), 0.0, -th.cos());
        match refract(d, V::unit_z(), 1.0, 1.5).unwrap() {
            Refraction::Transmitted(t) => {
                let expected = (th.sin() / 1.5).asin();
                assert_abs_diff_eq!(t.x.asin(), expected, epsilon = 1e-14);
            }
            _ => panic!(),
        }
        let th = 60f64.to_radians();
        let d = V::new(th.sin(), 0.0, th.cos());
        assert_eq!(refract(d, V::unit_z(), 1.5, 1.0).unwrap(), Refraction::TotalInternalReflection);
    }

    #[test]
    fn basis_examples() {
        let b = sp_basis(-V::unit_z(), V::unit_z(), Some(-V::unit_z())).unwrap();
        assert_abs_diff_eq!((b.s_hat - V::unit_x()).norm(), 0.0, epsilon = 1e-15);
        let s = 0.5f64.sqrt();
        let b = sp_basis(V::new(s, 0.0, -s), V::unit_z(), None).unwrap();
        assert_abs_diff_eq!(b.s_hat.y.abs(), 1.0, epsilon = 1e-15);
        // dir along x at normal incidence falls back to y
        let b = sp_basis(V::unit_x(), -V::unit_x(), None).unwrap();
        assert_abs_diff_eq!(b.s_hat.y.abs(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn pec_normal_incidence_negates_tangential_field() {
        let d = -V::unit_z();
        let b = sp_basis(d, V::unit_z(), None).unwrap();
        let pec = InterfaceCoefficients::pec();
        for e in [V::unit_x(), V::unit_y(), V::new(0.6, 0.8, 0.0)] {
            let out = interface_transform(e.to_complex(), d, BranchKind::Reflect, &pec, &b).unwrap();
            assert_abs_diff_eq!((out.real() + e).norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn index_matched_transmission_is_identity() {
        let d = unit(0.6, 0.3) * -1.0;
        let n = V::unit_z();
        let t = match refract(d, n, 1.4, 1.4).unwrap() {
            Refraction::Transmitted(t) => t,
            _ => unreachable!(),
        };
        let b = sp_basis(d, n, Some(t)).unwrap();
        let c = fresnel(1.4, 1.4, -d.dot(n)).unwrap();
        let e = transverse(d, 1.0, Complex::new(0.3, -0.2), Complex::new(-1.1, 0.5));
        let out = interface_transform(e, d, BranchKind::Transmit, &c, &b).unwrap();
        assert_abs_diff_eq!((out - e).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn air_glass_normal_reflect_magnitude() {
        let d = -V::unit_z();
        let b = sp_basis(d, V::unit_z(), Some(d)).unwrap();
        let c = fresnel(1.0, 1.5, 1.0).unwrap();
        let out = interface_transform(V::unit_x().to_complex(), d, BranchKind::Reflect, &c, &b).unwrap();
        assert_abs_diff_eq!(out.norm(), 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(out.x.re, -0.2, epsilon = 1e-15);
    }

    #[test]
    fn rejects_longitudinal_field() {
        let d = -V::unit_z();
        let b = sp_basis(d, V::unit_z(), None).unwrap();
        let e = V::new(1.0, 0.0, 0.1).to_complex();
        assert!(matches!(
            interface_transform(e, d, BranchKind::Reflect, &InterfaceCoefficients::pec(), &b),
            Err(EmError::NonTransverse(_))
        ));
    }

    /// Random non-grazing geometry: (dir, normal, n1, n2, field).
    fn geometry() -> impl Strategy<Value = (V, V, f64, f64, ComplexVec3<f64>)> {
        (
            0.0f64..std::f64::consts::PI,
            0.0f64..std::f64::consts::TAU,
            0.02f64..1.5,
            0.0f64..std::f64::consts::TAU,
            1.0f64..3.0,
            1.0f64..3.0,
            (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0),
        )
            .prop_map(|(nt, np, inc, az, n1, n2, (a, b, c, d))| {
                let n = unit(nt, np);
                let helper = if n.x.abs() < 0.9 { V::unit_x() } else { V::unit_y() };
                let u = n.cross(helper).normalize();
                let w = n.cross(u);
                let tangent = u * az.cos() + w * az.sin();
                let dir = (tangent * inc.sin() - n * inc.cos()).normalize();
                let e = transverse(dir, 1.0, Complex::new(a, b), Complex::new(c, d));
                (dir, n, n1, n2, e)
            })
    }

    proptest! {
        #[test]
        fn reflect_is_mirror_and_involutive((d, n, _, _, _) in geometry()) {
            let r = reflect(d, n).unwrap();
            prop_assert!((r.norm() - 1.0).abs() < 1e-12);
            prop_assert!((d.dot(n) + r.dot(n)).abs() < 1e-12);
            prop_assert!(d.cross(n).dot(r).abs() < 1e-12);
            let back = reflect(r, n).unwrap();
            prop_assert!((back - d).norm() < 1e-12);
        }

        #[test]
        fn snell_round_trip((d, n, n1, n2, _) in geometry()) {
            if let Refraction::Transmitted(t) = refract(d, n, n1, n2).unwrap() {
                let sin_i = d.cross(n).norm();
                let sin_t = t.cross(n).norm();
                prop_assert!((n1 * sin_i - n2 * sin_t).abs() < 1e-10);
                match refract(t, -n, n2, n1).unwrap() {
                    Refraction::Transmitted(back) => prop_assert!((back - d).norm() < 1e-10),
                    Refraction::TotalInternalReflection => prop_assert!(false, "reverse path cannot TIR"),
                }
            }
        }

        #[test]
        fn basis_is_orthonormal((d, n, n1, n2, _) in geometry()) {
            let t = match refract(d, n, n1, n2).unwrap() {
                Refraction::Transmitted(t) => Some(t),
                _ => None,
            };
            let b = sp_basis(d, n, t).unwrap();
            let r = reflect(d, n).unwrap();
            prop_assert!((b.s_hat.norm() - 1.0).abs() < 1e-12);
            prop_assert!(b.s_hat.dot(d).abs() < 1e-12);
            prop_assert!(b.s_hat.dot(b.p_hat_in).abs() < 1e-12);
            prop_assert!(b.p_hat_in.dot(d).abs() < 1e-12);
            prop_assert!(b.p_hat_out_r.dot(r).abs() < 1e-12);
            prop_assert!((b.p_hat_out_r.norm() - 1.0).abs() < 1e-12);
            if let (Some(pt), Some(t)) = (b.p_hat_out_t, t) {
                prop_assert!(pt.dot(t).abs() < 1e-12);
                prop_assert!(pt.dot(b.s_hat).abs() < 1e-12);
            }
        }

        /// Tangential E and H are continuous and power flux is conserved.
        #[test]
        fn boundary_conditions_and_energy((d, n, n1, n2, e) in geometry()) {
            let ci = -d.dot(n);
            let c = fresnel(n1, n2, ci).unwrap();
            let r = reflect(d, n).unwrap();
            let t = match refract(d, n, n1, n2).unwrap() {
                Refraction::Transmitted(t) => Some(t),
                Refraction::TotalInternalReflection => None,
            };
            let b = sp_basis(d, n, t).unwrap();
            let er = interface_transform(e, d, BranchKind::Reflect, &c, &b).unwrap();
            prop_assert!(er.dot_real(r).norm() < 1e-12);
            let tangential = |v: ComplexVec3<f64>| v.cross_real(n);
            let h = |k: V, f: ComplexVec3<f64>, idx: f64| ComplexVec3::real_cross(k, f).scale_real(idx);
            let flux = |f: ComplexVec3<f64>, idx: f64, cos: f64| f.norm_squared() * idx * cos;
            match t {
                Some(t) => {
                    let et = interface_transform(e, d, BranchKind::Transmit, &c, &b).unwrap();
                    prop_assert!(et.dot_real(t).norm() < 1e-12);
                    prop_assert!((tangential(e + er) - tangential(et)).norm() < 1e-10);
                    let hsum = h(d, e, n1) + h(r, er, n1);
                    prop_assert!((tangential(hsum) - tangential(h(t, et, n2))).norm() < 1e-10);
                    let balance = flux(er, n1, ci) + flux(et, n2, -t.dot(n));
                    prop_assert!((balance - flux(e, n1, ci)).abs() < 1e-10 * flux(e, n1, ci).max(1.0));
                    // linearity of the transform
                    let e2 = e.scale(Complex::new(0.4, -1.3));
                    let o2 = interface_transform(e + e2, d, BranchKind::Transmit, &c, &b).unwrap();
                    let o2_ref = et + interface_transform(e2, d, BranchKind::Transmit, &c, &b).unwrap();
                    prop_assert!((o2 - o2_ref).norm() < 1e-12);
                }
                None => {
                    prop_assert!((c.r_s.norm() - 1.0).abs() < 1e-12);
                    prop_assert!((c.r_p.norm() - 1.0).abs() < 1e-12);
                    prop_assert!((er.norm() - e.norm()).abs() < 1e-12);
                }
            }
        }
    }
}
