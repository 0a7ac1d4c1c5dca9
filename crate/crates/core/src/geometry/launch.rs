use super::Scene;
use crate::Vec3;

/// Rectangle on a plane perpendicular to the incident direction, upstream of the scene,
/// covering the scene's projected silhouette.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaunchRect {
    pub center: Vec3,
    pub u_axis: Vec3,
    pub v_axis: Vec3,
    pub half_extents: (f64, f64),
    pub area: f64,
}

impl LaunchRect {
    /// Point at fractional coordinates `(s, t) ∈ [0, 1]²`.
    #[inline]
    pub fn point(&self, s: f64, t: f64) -> Vec3 {
        let (a, b) = self.half_extents;
        self.center + self.u_axis * ((2.0 * s - 1.0) * a) + self.v_axis * ((2.0 * t - 1.0) * b)
    }
}

/// Orthonormal `(u, v)` spanning the plane perpendicular to `k`.
pub fn transverse_axes(k: Vec3) -> (Vec3, Vec3) {
    let helper = if k.z.abs() > 0.9 { Vec3::new(1.0, 0.0, 0.0) } else { Vec3::new(0.0, 0.0, 1.0) };
    let u = helper.cross(k).normalize();
    let v = k.cross(u);
    (u, v)
}

pub fn launch_rect(scene: &Scene, k_inc: Vec3, padding: f64) -> LaunchRect {
    let k = k_inc.normalize();
    let (u, v) = transverse_axes(k);
    let (c, r) = scene.bounding_sphere();
    let (mut u_lo, mut u_hi, mut v_lo, mut v_hi) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in scene.vertices() {
        let d = *p - c;
        let (pu, pv) = (d.dot(u), d.dot(v));
        u_lo = u_lo.min(pu);
        u_hi = u_hi.max(pu);
        v_lo = v_lo.min(pv);
        v_hi = v_hi.max(pv);
    }
    let a = 0.5 * (u_hi - u_lo) + padding;
    let b = 0.5 * (v_hi - v_lo) + padding;
    let standoff = r * 1.01 + scene.epsilon() * 10.0;
    let center = c + u * (0.5 * (u_hi + u_lo)) + v * (0.5 * (v_hi + v_lo)) - k * standoff;
    LaunchRect { center, u_axis: u, v_axis: v, half_extents: (a, b), area: 4.0 * a * b }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::load_scene;

    fn unit_cube() -> Scene {
        let mut s = String::new();
        for i in 0..8 {
            let f = |bit: i32| if i & bit == 0 { 0.0 } else { 1.0 };
            s += &format!("v {} {} {}\n", f(1), f(2), f(4));
        }
        s += "g c\nf 1 3 4 2\nf 5 6 8 7\nf 1 2 6 5\nf 3 7 8 4\nf 1 5 7 3\nf 2 4 8 6\n";
        load_scene(&s, "[materials.m]\npec = true\n[groups.c]\nfront = \"air\"\nback = \"m\"\n").unwrap()
    }

    #[test]
    fn axis_aligned_rect() {
        let s = unit_cube();
        let r = launch_rect(&s, Vec3::new(0.0, 0.0, -1.0), 0.0);
        assert!((r.area - 1.0).abs() < 1e-12);
        assert!(r.u_axis.dot(r.v_axis).abs() < 1e-15);
        let (c, rad) = s.bounding_sphere();
        assert!((r.center - c).dot(Vec3::new(0.0, 0.0, -1.0)) < -rad);
        let padded = launch_rect(&s, Vec3::new(0.0, 0.0, -1.0), 0.1);
        assert!((padded.area - 1.44).abs() < 1e-12);
    }

    #[test]
    fn diagonal_view_covers_every_vertex() {
        let s = unit_cube();
        let k = Vec3::new(-1.0, -1.0, -1.0).normalize();
        let r = launch_rect(&s, k, 0.0);
        assert!(r.u_axis.dot(k).abs() < 1e-15 && r.v_axis.dot(k).abs() < 1e-15);
        let mut max_u: f64 = 0.0;
        let mut max_v: f64 = 0.0;
        for p in s.vertices() {
            let d = *p - r.center;
            assert!(d.dot(r.u_axis).abs() <= r.half_extents.0 + 1e-12);
            assert!(d.dot(r.v_axis).abs() <= r.half_extents.1 + 1e-12);
            max_u = max_u.max(d.dot(r.u_axis).abs());
            max_v = max_v.max(d.dot(r.v_axis).abs());
        }
        assert!((max_u - r.half_extents.0).abs() < 1e-12 && (max_v - r.half_extents.1).abs() < 1e-12);
        // hexagonal silhouette: width sqrt(2) across one axis
        assert!((2.0 * r.half_extents.0 - 2f64.sqrt()).abs() < 1e-12 || (2.0 * r.half_extents.1 - 2f64.sqrt()).abs() < 1e-12);
    }
}
