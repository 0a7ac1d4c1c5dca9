//! Analytic and brute-force references. Nothing here calls into the field kernel, so
//! the solvers can be checked against an independent derivation.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::em::{BranchKind, C0};
use crate::{Complex, Vec3};

/// Planar layers at normal incidence. The first layer's top surface sits at `z = 0`
/// and layers stack downwards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerStack {
    /// `(refractive index, thickness in metres)` from the top down.
    pub layers: Vec<(f64, f64)>,
    pub n_before: f64,
    pub n_after: f64,
}

impl LayerStack {
    pub fn slab(n: f64, thickness: f64) -> Self {
        Self { layers: vec![(n, thickness)], n_before: 1.0, n_after: 1.0 }
    }

    /// Indices of every medium from the incidence side to the exit side.
    fn media(&self) -> Vec<f64> {
        let mut m = Vec::with_capacity(self.layers.len() + 2);
        m.push(self.n_before);
        m.extend(self.layers.iter().map(|l| l.0));
        m.push(self.n_after);
        m
    }
}

/// Normal-incidence amplitude coefficients from index `a` into index `b`.
fn r_t(a: f64, b: f64) -> (f64, f64) {
    ((a - b) / (a + b), 2.0 * a / (a + b))
}

type M2 = [[Complex; 2]; 2];

fn mul(a: &M2, b: &M2) -> M2 {
    let mut c = [[Complex::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

/// Forward and backward amplitudes on the near side from those on the far side.
fn interface(a: f64, b: f64) -> M2 {
    let (r, t) = r_t(a, b);
    let c = |v: f64| Complex::new(v / t, 0.0);
    [[c(1.0), c(r)], [c(r), c(1.0)]]
}

/// Crossing a layer of phase thickness `delta` under the `e^{+jωt}` convention.
fn propagation(delta: f64) -> M2 {
    let z = Complex::new(0.0, 0.0);
    [[Complex::from_polar(1.0, delta), z], [z, Complex::from_polar(1.0, -delta)]]
}

fn chain(stack: &LayerStack, k0: f64, include_last: bool) -> M2 {
    let media = stack.media();
    let one = Complex::new(1.0, 0.0);
    let zero = Complex::new(0.0, 0.0);
    let mut m = [[one, zero], [zero, one]];
    for (i, &(n, d)) in stack.layers.iter().enumerate() {
        m = mul(&m, &interface(media[i], n));
        m = mul(&m, &propagation(k0 * n * d));
    }
    if include_last {
        let k = media.len();
        m = mul(&m, &interface(media[k - 2], media[k - 1]));
    }
    m
}

/// Reflection coefficient of the stack, referenced to its top surface.
pub fn slab_reflection(stack: &LayerStack, f: f64, pec_backed: bool) -> Complex {
    let k0 = 2.0 * PI * f / C0;
    if pec_backed {
        // total field vanishes at the conductor: backward = −forward there
        let m = chain(stack, k0, false);
        (m[1][0] - m[1][1]) / (m[0][0] - m[0][1])
    } else {
        let m = chain(stack, k0, true);
        m[1][0] / m[0][0]
    }
}

/// Transmission coefficient through a non-backed stack.
pub fn slab_transmission(stack: &LayerStack, f: f64) -> Complex {
    let k0 = 2.0 * PI * f / C0;
    let m = chain(stack, k0, true);
    Complex::new(1.0, 0.0) / m[0][0]
}

/// Coherent `√σ` of a finite patch of the stack of area `area` at broadside, with the
/// stack's top surface at height `top_z` above the phase centre, radar looking down.
pub fn slab_sqrt_rcs(stack: &LayerStack, f: f64, pec_backed: bool, area: f64, top_z: f64) -> Complex {
    let k0 = 2.0 * PI * f / C0;
    let r = slab_reflection(stack, f, pec_backed);
    Complex::new(0.0, k0 * area / PI.sqrt()) * r * Complex::from_polar(1.0, 2.0 * k0 * top_z)
}

/// Broadside physical-optics RCS of an `a × b` flat conducting plate.
pub fn plate_rcs(a: f64, b: f64, lambda: f64) -> f64 {
    4.0 * PI * (a * b).powi(2) / (lambda * lambda)
}

/// Optical-limit RCS of a conducting sphere.
pub fn sphere_go_rcs(radius: f64) -> f64 {
    PI * radius * radius
}

/// Numerical physical-optics RCS of an `a × b` plate in the `z = 0` plane, for a
/// monostatic radar at polar angle `theta` (rad) in the x–z plane. Midpoint rule with
/// `n × n` cells.
pub fn plate_po_rcs_numeric(a: f64, b: f64, lambda: f64, theta: f64, n: usize) -> f64 {
    let k = 2.0 * PI / lambda;
    let (s, c) = theta.sin_cos();
    let da = a / n as f64;
    let db = b / n as f64;
    let mut sum = Complex::new(0.0, 0.0);
    for i in 0..n {
        let x = -a / 2.0 + (i as f64 + 0.5) * da;
        for j in 0..n {
            let _y = -b / 2.0 + (j as f64 + 0.5) * db;
            sum += Complex::from_polar(da * db, 2.0 * k * s * x);
        }
    }
    4.0 * PI / (lambda * lambda) * (c * sum.norm()).powi(2)
}

/// One reflect/transmit sequence through a layer stack at normal incidence.
#[derive(Debug, Clone, PartialEq)]
pub struct LayeredPath {
    /// Action at each surface encounter; the last one sends the wave back out of the top.
    pub sequence: Vec<BranchKind>,
    /// Product of amplitude coefficients along the path.
    pub amplitude: Complex,
    /// Sum of index times thickness over traversed layers.
    pub optical_length: f64,
}

/// Every path that leaves the top of the stack after at most `max_bounce` surface
/// encounters. With `pec_backed` the bottom interface is a perfect conductor.
pub fn enumerate_layered_paths(stack: &LayerStack, max_bounce: usize, pec_backed: bool) -> Vec<LayeredPath> {
    let media = stack.media();
    let n_layers = stack.layers.len();
    let mut out = Vec::new();
    // (interface index, travelling down?, amplitude, optical length, sequence)
    let mut stack_dfs: Vec<(usize, bool, Complex, f64, Vec<BranchKind>)> =
        vec![(0, true, Complex::new(1.0, 0.0), 0.0, Vec::new())];
    while let Some((iface, down, amp, len, seq)) = stack_dfs.pop() {
        if seq.len() >= max_bounce {
            continue;
        }
        // media on either side of interface `iface`
        let (above, below) = (media[iface], media[iface + 1]);
        let is_pec = pec_backed && iface == n_layers;
        let mut push = |kind: BranchKind, coeff: f64, next_down: bool, medium: usize| {
            let mut s = seq.clone();
            s.push(kind);
            let a = amp * coeff;
            if medium == 0 {
                out.push(LayeredPath { sequence: s, amplitude: a, optical_length: len });
                return;
            }
            if medium == n_layers + 1 {
                return;
            }
            let (n, d) = stack.layers[medium - 1];
            let next_iface = if next_down { medium } else { medium - 1 };
            stack_dfs.push((next_iface, next_down, a, len + n * d, s));
        };
        if is_pec {
            push(BranchKind::Reflect, -1.0, false, iface);
            continue;
        }
        if down {
            let (r, t) = r_t(above, below);
            push(BranchKind::Transmit, t, true, iface + 1);
            push(BranchKind::Reflect, r, false, iface);
        } else {
            let (r, t) = r_t(below, above);
            push(BranchKind::Transmit, t, false, iface);
            push(BranchKind::Reflect, r, true, iface + 1);
        }
    }
    out
}

/// Sum of `amplitude · e^{−jk₀·L}` over paths; approaches [`slab_reflection`].
pub fn layered_sum(paths: &[LayeredPath], f: f64) -> Complex {
    let k0 = 2.0 * PI * f / C0;
    paths.iter().map(|p| p.amplitude * Complex::from_polar(1.0, -k0 * p.optical_length)).sum()
}

/// Monostatic range of a point, positive away from the radar.
pub fn point_range(p: Vec3, k_inc: Vec3) -> f64 {
    k_inc.normalize().dot(p)
}

/// Expected peak ranges of an ideal right-angle dihedral: the double bounce maps to
/// the seam, whatever the incidence inside the corner.
pub fn dihedral_specular_ranges(seam_point: Vec3, k_inc: Vec3) -> Vec<f64> {
    vec![point_range(seam_point, k_inc)]
}

/// Peak ranges of a slab's front face and its first `echoes` internal round trips.
pub fn slab_echo_ranges(front_range: f64, n: f64, thickness: f64, echoes: usize) -> Vec<f64> {
    (0..=echoes).map(|m| front_range + m as f64 * n * thickness).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn single_interface() {
        let s = LayerStack { layers: vec![], n_before: 1.0, n_after: 1.5 };
        let r = slab_reflection(&s, 1e9, false);
        assert_abs_diff_eq!(r.re, -0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(r.im, 0.0, epsilon = 1e-15);
        let p = enumerate_layered_paths(&s, 10, false);
        assert_eq!(p.len(), 1);
        assert_abs_diff_eq!(p[0].amplitude.re, -0.2, epsilon = 1e-15);
    }

    #[test]
    fn half_wave_window_is_transparent() {
        let f = 1e9;
        let lambda = C0 / f;
        let s = LayerStack::slab(1.5, lambda / 3.0);
        assert!(slab_reflection(&s, f, false).norm() < 1e-14);
    }

    #[test]
    fn fringe_period() {
        let s = LayerStack::slab(1.5, 3.0);
        let period = C0 / (2.0 * 1.5 * 3.0);
        for f in [1.1e9, 1.7e9, 2.6e9] {
            let a = slab_reflection(&s, f, false);
            let b = slab_reflection(&s, f + period, false);
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-9);
        }
        assert_abs_diff_eq!(period, 33.3e6, epsilon = 0.05e6);
    }

    #[test]
    fn pec_backing_is_lossless() {
        let s = LayerStack::slab(1.5, 3.0);
        for i in 0..101 {
            let f = 1e9 + 2e7 * i as f64;
            assert_abs_diff_eq!(slab_reflection(&s, f, true).norm(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn series_matches_transfer_matrix() {
        let s = LayerStack::slab(1.5, 3.0);
        let paths = enumerate_layered_paths(&s, 20, false);
        for f in [1e9, 1.55e9, 2.98e9] {
            assert_abs_diff_eq!((layered_sum(&paths, f) - slab_reflection(&s, f, false)).norm(), 0.0, epsilon = 1e-8);
        }
        let pec = enumerate_layered_paths(&s, 60, true);
        let f = 2.2e9;
        assert_abs_diff_eq!((layered_sum(&pec, f) - slab_reflection(&s, f, true)).norm(), 0.0, epsilon = 1e-8);
    }

    #[test]
    fn three_bounce_slab_terms() {
        let s = LayerStack::slab(1.5, 3.0);
        let p = enumerate_layered_paths(&s, 3, false);
        assert_eq!(p.len(), 2);
        let (r, t) = r_t(1.0, 1.5);
        let (r2, t2) = r_t(1.5, 1.0);
        let second = p.iter().find(|x| x.sequence.len() == 3).unwrap();
        assert_abs_diff_eq!(second.amplitude.re, t * r2 * t2, epsilon = 1e-15);
        assert_abs_diff_eq!(second.optical_length, 9.0, epsilon = 1e-15);
        assert!(p.iter().any(|x| x.sequence == vec![BranchKind::Reflect] && (x.amplitude.re - r).abs() < 1e-15));
    }

    #[test]
    fn plate_scaling_and_numeric_cross_check() {
        let s = plate_rcs(1.0, 1.0, 0.1);
        assert_abs_diff_eq!(s, 4.0 * PI * 100.0, epsilon = 1e-9);
        assert_abs_diff_eq!(plate_rcs(2.0, 1.0, 0.1), 4.0 * s, epsilon = 1e-9);
        assert_abs_diff_eq!(plate_rcs(1.0, 1.0, 0.2), s / 4.0, epsilon = 1e-9);
        assert_abs_diff_eq!(plate_po_rcs_numeric(1.0, 1.0, 0.1, 0.0, 50), s, epsilon = 1e-9 * s);
        assert!(plate_po_rcs_numeric(1.0, 1.0, 0.1, 0.05, 400) < s);
    }

    #[test]
    fn sphere_values() {
        assert_abs_diff_eq!(sphere_go_rcs(1.0), PI);
        assert_abs_diff_eq!(sphere_go_rcs(0.5), PI / 4.0);
    }

    #[test]
    fn range_helpers() {
        let k = Vec3::new(0.0, 0.0, -1.0);
        assert_abs_diff_eq!(point_range(Vec3::new(0.0, 0.0, -4.0), k), 4.0);
        assert_eq!(dihedral_specular_ranges(Vec3::zero(), Vec3::new(-1.0, 0.0, -1.0)), vec![0.0]);
        assert_eq!(slab_echo_ranges(-1.5, 1.5, 3.0, 2), vec![-1.5, 3.0, 7.5]);
    }

    proptest! {
        #[test]
        fn lossless_stack_conserves_energy(n1 in 1.0f64..4.0, n2 in 1.0f64..4.0, d1 in 0.01f64..2.0, d2 in 0.01f64..2.0, f in 1e8f64..5e9) {
            let s = LayerStack { layers: vec![(n1, d1), (n2, d2)], n_before: 1.0, n_after: 1.0 };
            let r = slab_reflection(&s, f, false);
            let t = slab_transmission(&s, f);
            prop_assert!((r.norm_sqr() + t.norm_sqr() - 1.0).abs() < 1e-10);
        }

        #[test]
        fn partial_sums_converge_geometrically(n in 1.2f64..3.0, f in 1e9f64..3e9) {
            let s = LayerStack::slab(n, 0.7);
            let exact = slab_reflection(&s, f, false);
            let rr = ((n - 1.0) / (n + 1.0)).powi(2);
            let mut prev = f64::INFINITY;
            for m in [3usize, 5, 7, 9] {
                let err = (layered_sum(&enumerate_layered_paths(&s, m, false), f) - exact).norm();
                prop_assert!(err <= prev * rr * 1.0001 + 1e-15 || prev.is_infinite());
                prev = err;
            }
        }
    }
}
