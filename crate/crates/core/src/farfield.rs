//! Equivalent surface currents at a ray arrival and their radiation to the far field.
//!
//! Electric currents are stored multiplied by the free-space impedance, so both
//! current vectors have the scale of the field amplitude.

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::em::{BranchKind, C0};
use crate::geometry::{Hit, Interaction, Scene};
use crate::path::{Junction, PathState, GRAZING_COS, TX_POLS};
use crate::radar::{Pol, Radar};
use crate::{Complex, ComplexVec3, Vec3};

/// Which equivalent-current model applies at an arrival.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurrentCase {
    Pec,
    Entering,
    Exiting,
}

impl CurrentCase {
    pub fn of(hit: &Hit) -> Option<Self> {
        match hit.interaction() {
            Interaction::Pec => Some(Self::Pec),
            Interaction::Entering => Some(Self::Entering),
            Interaction::Exiting => Some(Self::Exiting),
            Interaction::Internal => None,
        }
    }
}

/// `(η₀·J, M)` for one incident field.
pub type Currents = (ComplexVec3, ComplexVec3);

/// Equivalent currents for incident field `e` travelling along `dir_in`.
///
/// `scattered` is the reflected field (entering case) or transmitted field (exiting
/// case) with its propagation direction, and is ignored for conductors. Returns
/// `None` when no wave leaves the surface on the exterior side.
pub fn meca_currents(
    hit: &Hit,
    e: ComplexVec3,
    dir_in: Vec3,
    case: CurrentCase,
    scattered: Option<(ComplexVec3, Vec3)>,
) -> Option<Currents> {
    let n = hit.normal;
    match case {
        CurrentCase::Pec => {
            let h = ComplexVec3::real_cross(dir_in, e).scale_real(hit.n_incident);
            Some((ComplexVec3::real_cross(n, h).scale_real(2.0), ComplexVec3::zero()))
        }
        CurrentCase::Entering => {
            let (er, kr) = scattered.unwrap_or((ComplexVec3::zero(), dir_in - n * (2.0 * dir_in.dot(n))));
            let h = (ComplexVec3::real_cross(dir_in, e) + ComplexVec3::real_cross(kr, er)).scale_real(hit.n_incident);
            Some((ComplexVec3::real_cross(n, h), (e + er).cross_real(n)))
        }
        CurrentCase::Exiting => {
            let (et, kt) = scattered?;
            let n_out = -n;
            let h = ComplexVec3::real_cross(kt, et).scale_real(hit.n_transmit);
            Some((ComplexVec3::real_cross(n_out, h), et.cross_real(n_out)))
        }
    }
}

/// Currents for both transmit polarizations, reusing the field transforms already
/// computed for the branch outcomes at this hit.
pub fn junction_currents(state: &PathState, hit: &Hit, junction: &Junction) -> Option<[Currents; TX_POLS]> {
    let case = CurrentCase::of(hit)?;
    let wanted = match case {
        CurrentCase::Pec => None,
        CurrentCase::Entering => Some(BranchKind::Reflect),
        CurrentCase::Exiting => Some(BranchKind::Transmit),
    };
    let outcome = match wanted {
        Some(kind) => Some(junction.outcomes.iter().find(|o| o.kind == kind)?),
        None => None,
    };
    let mut out = [(ComplexVec3::zero(), ComplexVec3::zero()); TX_POLS];
    for (p, slot) in out.iter_mut().enumerate() {
        let scattered = outcome.map(|o| (o.new_e[p], o.new_dir));
        *slot = meca_currents(hit, state.e[p], state.dir, case, scattered)?;
    }
    Some(out)
}

/// Characteristic function: the surface borders the exterior and sees the receiver.
pub fn chi_visibility(scene: &Scene, hit: &Hit, k_scatter: Vec3, occlusion_enabled: bool) -> bool {
    hit.exterior_facing && !(occlusion_enabled && scene.occluded(hit.point, k_scatter))
}

/// Frequency-independent record of one scattering event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contribution {
    pub a_j: [ComplexVec3; TX_POLS],
    pub a_m: [ComplexVec3; TX_POLS],
    pub phi_total: f64,
    pub exit_point: Vec3,
    pub bounce: u32,
    /// Transmission bit per hit of the path, see [`PathState::history`].
    pub history: u64,
    pub case: CurrentCase,
}

impl Contribution {
    /// Reflect/transmit action at each hit of the path, ending with the action that
    /// sends the radiated wave out: a reflection off the surface it arrived at, or the
    /// transmission out through it.
    pub fn branch_sequence(&self) -> Vec<BranchKind> {
        let mut seq: Vec<BranchKind> = (1..self.bounce)
            .map(|i| if i <= 64 && self.history >> (i - 1) & 1 == 1 { BranchKind::Transmit } else { BranchKind::Reflect })
            .collect();
        seq.push(if self.case == CurrentCase::Exiting { BranchKind::Transmit } else { BranchKind::Reflect });
        seq
    }
}

/// Scales currents into an estimator term: `weight / (prob · pdf_area · |k̂·n̂|)`.
pub fn make_contribution(path: &PathState, hit: &Hit, currents: &[Currents; TX_POLS], pdf_area: f64) -> Option<Contribution> {
    let case = CurrentCase::of(hit)?;
    let c = path.dir.dot(hit.normal).abs();
    if c < GRAZING_COS {
        return None;
    }
    let s = path.weight / (path.prob * pdf_area * c);
    let mut a_j = [ComplexVec3::zero(); TX_POLS];
    let mut a_m = [ComplexVec3::zero(); TX_POLS];
    for p in 0..TX_POLS {
        a_j[p] = currents[p].0.scale_real(s);
        a_m[p] = currents[p].1.scale_real(s);
    }
    Some(Contribution { a_j, a_m, phi_total: path.phi, exit_point: hit.point, bounce: path.bounce, history: path.history, case })
}

/// Coherent scattering amplitude `√σ` per frequency and polarization.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub frequencies: Vec<f64>,
    /// Indexed by [`Pol::index`].
    pub values: Vec<[Complex; 4]>,
    pub meta: SweepMeta,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepMeta {
    pub solver: String,
    pub seed: Option<u64>,
    pub rays_launched: u64,
    pub contributions: u64,
}

impl SweepResult {
    pub fn value(&self, i: usize, pol: Pol) -> Complex {
        self.values[i][pol.index()]
    }

    pub fn column(&self, pol: Pol) -> Vec<Complex> {
        self.values.iter().map(|v| v[pol.index()]).collect()
    }

    /// `10·log10 σ` in dBsm.
    pub fn rcs_dbsm(&self, i: usize, pol: Pol) -> f64 {
        10.0 * self.value(i, pol).norm_sqr().log10()
    }

    /// CSV with `# key: value` header comments.
    pub fn to_csv(&self, header: &[(String, String)]) -> String {
        let mut s = String::new();
        for (k, v) in header {
            let _ = writeln!(s, "# {k}: {v}");
        }
        s.push_str("frequency_hz,re_vv,im_vv,re_hh,im_hh,re_vh,im_vh,re_hv,im_hv\n");
        for (f, row) in self.frequencies.iter().zip(&self.values) {
            let _ = write!(s, "{f:e}");
            for c in row {
                let _ = write!(s, ",{:e},{:e}", c.re, c.im);
            }
            s.push('\n');
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self, String> {
        let mut frequencies = Vec::new();
        let mut values = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with("frequency_hz") {
                continue;
            }
            let nums: Result<Vec<f64>, _> = line.split(',').map(str::parse::<f64>).collect();
            let nums = nums.map_err(|e| format!("line {}: {e}", i + 1))?;
            if nums.len() != 9 {
                return Err(format!("line {}: expected 9 columns, found {}", i + 1, nums.len()));
            }
            frequencies.push(nums[0]);
            let mut row = [Complex::new(0.0, 0.0); 4];
            for (k, c) in row.iter_mut().enumerate() {
                *c = Complex::new(nums[1 + 2 * k], nums[2 + 2 * k]);
            }
            values.push(row);
        }
        Ok(Self { frequencies, values, meta: SweepMeta::default() })
    }
}

const RESEED_INTERVAL: usize = 32;

/// Streaming reduction of contributions into per-frequency sums.
#[derive(Debug, Clone)]
pub struct SweepAccumulator {
    frequencies: Vec<f64>,
    wavenumbers: Vec<f64>,
    /// `(k₀, Δk)` when the grid is uniform, enabling the phase recurrence.
    uniform: Option<(f64, f64)>,
    k_scatter: Vec3,
    rx: [Vec3; 2],
    rx_cross_k: [Vec3; 2],
    sums: Vec<[Complex; 4]>,
    count: u64,
}

impl SweepAccumulator {
    pub fn new(frequencies: &[f64], radar: &Radar) -> Self {
        let wavenumbers: Vec<f64> = frequencies.iter().map(|f| 2.0 * PI * f / C0).collect();
        let uniform = uniform_step(frequencies).map(|_| {
            let n = wavenumbers.len();
            let dk = if n > 1 { (wavenumbers[n - 1] - wavenumbers[0]) / (n - 1) as f64 } else { 0.0 };
            (wavenumbers[0], dk)
        });
        let ks = radar.k_scatter;
        Self {
            frequencies: frequencies.to_vec(),
            wavenumbers,
            uniform,
            k_scatter: ks,
            rx: radar.rx,
            rx_cross_k: [radar.rx[0].cross(ks), radar.rx[1].cross(ks)],
            sums: vec![[Complex::new(0.0, 0.0); 4]; frequencies.len()],
            count: 0,
        }
    }

    /// Receiver projections of the radiated vector, ordered as [`Pol::ALL`].
    #[inline]
    fn projections(&self, c: &Contribution) -> [Complex; 4] {
        // R̂·(k̂×k̂×A) = −R̂·A because R̂ ⟂ k̂; R̂·(k̂×M) = (R̂×k̂)·M
        let proj = |rx: usize, tx: usize| -c.a_j[tx].dot_real(self.rx[rx]) + c.a_m[tx].dot_real(self.rx_cross_k[rx]);
        let mut p = [Complex::new(0.0, 0.0); 4];
        for pol in Pol::ALL {
            let (r, t) = pol.rx_tx();
            p[pol.index()] = proj(r, t);
        }
        p
    }

    pub fn add(&mut self, c: &Contribution) {
        let p = self.projections(c);
        let path = c.phi_total - self.k_scatter.dot(c.exit_point);
        self.count += 1;
        match self.uniform {
            Some((k0, dk)) => {
                let step = Complex::from_polar(1.0, -dk * path);
                let mut cur = Complex::new(0.0, 0.0);
                for (i, sum) in self.sums.iter_mut().enumerate() {
                    cur = if i % RESEED_INTERVAL == 0 {
                        Complex::from_polar(1.0, -(k0 + dk * i as f64) * path)
                    } else {
                        cur * step
                    };
                    for q in 0..4 {
                        sum[q] += p[q] * cur;
                    }
                }
            }
            None => {
                for (k, sum) in self.wavenumbers.iter().zip(self.sums.iter_mut()) {
                    let ph = Complex::from_polar(1.0, -k * path);
                    for q in 0..4 {
                        sum[q] += p[q] * ph;
                    }
                }
            }
        }
    }

    /// Adds another accumulator's sums. Combining in a fixed order keeps results reproducible.
    pub fn merge(&mut self, other: &SweepAccumulator) {
        for (a, b) in self.sums.iter_mut().zip(&other.sums) {
            for q in 0..4 {
                a[q] += b[q];
            }
        }
        self.count += other.count;
    }

    pub fn fresh(&self) -> Self {
        let mut s = self.clone();
        s.sums.iter_mut().for_each(|r| *r = [Complex::new(0.0, 0.0); 4]);
        s.count = 0;
        s
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn finish(&self, meta: SweepMeta) -> SweepResult {
        let values = self
            .wavenumbers
            .iter()
            .zip(&self.sums)
            .map(|(k, s)| {
                let f = Complex::new(0.0, k / (2.0 * PI.sqrt()));
                [s[0] * f, s[1] * f, s[2] * f, s[3] * f]
            })
            .collect();
        SweepResult {
            frequencies: self.frequencies.clone(),
            values,
            meta: SweepMeta { contributions: self.count, ..meta },
        }
    }
}

/// Frequency step when the grid is uniform to within rounding.
pub fn uniform_step(frequencies: &[f64]) -> Option<f64> {
    match frequencies.len() {
        0 => None,
        1 => Some(0.0),
        n => {
            let step = (frequencies[n - 1] - frequencies[0]) / (n - 1) as f64;
            let ok = frequencies.windows(2).enumerate().all(|(i, w)| {
                let expect = frequencies[0] + step * (i + 1) as f64;
                w[1] > w[0] && (w[1] - expect).abs() <= 1e-9 * step.abs().max(frequencies[n - 1].abs() * 1e-6)
            });
            ok.then_some(step)
        }
    }
}

/// Evaluates a list of contributions over a frequency grid.
pub fn evaluate_sweep(contributions: &[Contribution], frequencies: &[f64], radar: &Radar) -> SweepResult {
    let mut acc = SweepAccumulator::new(frequencies, radar);
    for c in contributions {
        acc.add(c);
    }
    acc.finish(SweepMeta::default())
}

/// Uniform grid of `count` frequencies from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![start],
        n => (0..n).map(|i| start + (stop - start) * i as f64 / (n - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{load_scene, AMBIENT};
    use crate::path::{advance, branch_outcomes, init_path};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn hit_at(normal: Vec3, n1: f64, n2: f64, near: u16, far: u16, pec: bool) -> Hit {
        Hit {
            t: 1.0,
            point: Vec3::zero(),
            normal,
            triangle: 0,
            near_material: near,
            far_material: far,
            n_incident: n1,
            n_transmit: n2,
            far_side_pec: pec,
            exterior_facing: true,
        }
    }

    #[test]
    fn pec_normal_incidence_current() {
        let h = hit_at(Vec3::unit_z(), 1.0, 1.0, AMBIENT, 1, true);
        let (j, m) = meca_currents(&h, Vec3::unit_x().to_complex(), -Vec3::unit_z(), CurrentCase::Pec, None).unwrap();
        assert_abs_diff_eq!((j.real() - Vec3::new(2.0, 0.0, 0.0)).norm(), 0.0, epsilon = 1e-15);
        assert_eq!(m, ComplexVec3::zero());
    }

    #[test]
    fn entering_without_contrast_is_single_wave() {
        let h = hit_at(Vec3::unit_z(), 1.0, 1.0, AMBIENT, 1, false);
        let e = Vec3::unit_x().to_complex();
        let (j, m) = meca_currents(&h, e, -Vec3::unit_z(), CurrentCase::Entering, None).unwrap();
        // n̂ × (k̂ × E) and E × n̂ for the incident wave alone
        assert_abs_diff_eq!((j.real() - Vec3::new(1.0, 0.0, 0.0)).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((m.real() - Vec3::new(0.0, -1.0, 0.0)).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn entering_glass_scales_currents_by_one_plus_and_minus_r() {
        let obj = "v -1 -1 0\nv 1 -1 0\nv 1 1 0\nv -1 1 0\nv 0 0 -1\ng s\nf 1 2 3 4\nf 2 1 5\nf 3 2 5\nf 4 3 5\nf 1 4 5\n";
        let scene = load_scene(obj, "[materials.g]\neps_r = 2.25\n[groups.s]\nfront = \"air\"\nback = \"g\"\n").unwrap();
        let k = -Vec3::unit_z();
        let st = init_path(Vec3::new(0.1, 0.2, 1.0), k, [Vec3::unit_x().to_complex(), Vec3::unit_y().to_complex()], 1.0);
        let h = scene.intersect(st.origin, k, 0.0).unwrap();
        let st = advance(&st, &h);
        let j = branch_outcomes(&st, &h).unwrap();
        let cur = junction_currents(&st, &h, &j).unwrap();
        let (jj, mm) = cur[0];
        assert_abs_diff_eq!(mm.norm(), 0.8, epsilon = 1e-12);
        assert_abs_diff_eq!(jj.norm(), 1.2, epsilon = 1e-12);
    }

    #[test]
    fn exiting_under_tir_has_no_currents() {
        let h = hit_at(-Vec3::unit_z(), 1.5, 1.0, 1, AMBIENT, false);
        assert!(meca_currents(&h, Vec3::unit_x().to_complex(), Vec3::unit_z(), CurrentCase::Exiting, None).is_none());
    }

    fn plate_contribution(area: f64) -> Contribution {
        let z = ComplexVec3::zero();
        Contribution {
            a_j: [Vec3::new(2.0 * area, 0.0, 0.0).to_complex(), Vec3::new(0.0, 2.0 * area, 0.0).to_complex()],
            a_m: [z, z],
            phi_total: 0.0,
            exit_point: Vec3::zero(),
            bounce: 1,
            history: 0,
            case: CurrentCase::Pec,
        }
    }

    #[test]
    fn plate_broadside_matches_closed_form() {
        let radar = Radar::monostatic(0.0, 0.0);
        let f = C0 / 0.1;
        let s = evaluate_sweep(&[plate_contribution(1.0)], &[f], &radar);
        let sigma = 4.0 * PI / (0.1f64 * 0.1);
        assert_abs_diff_eq!(s.value(0, Pol::Vv).norm_sqr(), sigma, epsilon = 1e-9 * sigma);
        assert_abs_diff_eq!(s.value(0, Pol::Hh).norm_sqr(), sigma, epsilon = 1e-9 * sigma);
        assert!(s.value(0, Pol::Vh).norm() < 1e-6 * s.value(0, Pol::Vv).norm());
    }

    #[test]
    fn empty_list_gives_zero() {
        let s = evaluate_sweep(&[], &linspace(1e9, 2e9, 5), &Radar::monostatic(10.0, 20.0));
        assert!(s.values.iter().flatten().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let radar = Radar::monostatic(20.0, 30.0);
        let mut c = plate_contribution(0.3);
        c.phi_total = 1.234;
        let s = evaluate_sweep(&[c], &linspace(1e9, 3e9, 11), &radar);
        let text = s.to_csv(&[("seed".into(), "1".into())]);
        let back = SweepResult::from_csv(&text).unwrap();
        assert_eq!(back.frequencies, s.frequencies);
        assert_eq!(back.values, s.values);
    }

    fn arb_contribution() -> impl Strategy<Value = Contribution> {
        let c = || (-1.0f64..1.0, -1.0f64..1.0);
        let v = move || (c(), c(), c()).prop_map(|(x, y, z)| ComplexVec3::new(Complex::new(x.0, x.1), Complex::new(y.0, y.1), Complex::new(z.0, z.1)));
        (v(), v(), v(), v(), 0.0f64..20.0, (-3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0)).prop_map(|(a, b, m, n, phi, p)| Contribution {
            a_j: [a, b],
            a_m: [m, n],
            phi_total: phi,
            exit_point: Vec3::new(p.0, p.1, p.2),
            bounce: 1,
            history: 0,
            case: CurrentCase::Pec,
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn sweep_is_linear(a in proptest::collection::vec(arb_contribution(), 1..8), b in proptest::collection::vec(arb_contribution(), 1..8)) {
            let radar = Radar::monostatic(35.0, 10.0);
            let f = linspace(1e9, 3e9, 101);
            let sa = evaluate_sweep(&a, &f, &radar);
            let sb = evaluate_sweep(&b, &f, &radar);
            let all: Vec<_> = a.iter().chain(&b).copied().collect();
            let s = evaluate_sweep(&all, &f, &radar);
            for i in 0..f.len() {
                for q in 0..4 {
                    let d = s.values[i][q] - sa.values[i][q] - sb.values[i][q];
                    prop_assert!(d.norm() <= 1e-12 * (sa.values[i][q].norm() + sb.values[i][q].norm() + 1.0) * 1e3);
                }
            }
        }

        #[test]
        fn single_frequency_matches_sweep_slice(cs in proptest::collection::vec(arb_contribution(), 1..6), idx in 0usize..101) {
            let radar = Radar::bistatic(20.0, 0.0, 40.0, 10.0);
            let f = linspace(1e9, 3e9, 101);
            let full = evaluate_sweep(&cs, &f, &radar);
            let one = evaluate_sweep(&cs, &[f[idx]], &radar);
            for q in 0..4 {
                let d = (full.values[idx][q] - one.values[0][q]).norm();
                prop_assert!(d <= 1e-9 * (one.values[0][q].norm() + 1.0) * 10.0);
            }
        }

        #[test]
        fn phase_centre_shift_is_pure_phase(cs in proptest::collection::vec(arb_contribution(), 1..6), s in (-2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0)) {
            let radar = Radar::monostatic(25.0, 50.0);
            let shift = Vec3::new(s.0, s.1, s.2);
            let f = linspace(1e9, 3e9, 21);
            let base = evaluate_sweep(&cs, &f, &radar);
            // translating the scene by `shift` adds k̂ⁱ·s to every optical path
            let moved: Vec<_> = cs.iter().map(|c| Contribution {
                phi_total: c.phi_total + radar.k_inc.dot(shift),
                exit_point: c.exit_point + shift,
                ..*c
            }).collect();
            let shifted = evaluate_sweep(&moved, &f, &radar);
            for (i, fr) in f.iter().enumerate() {
                let k = 2.0 * PI * fr / C0;
                let expect = Complex::from_polar(1.0, k * (radar.k_scatter.dot(shift) - radar.k_inc.dot(shift)));
                for q in 0..4 {
                    let d = (shifted.values[i][q] - base.values[i][q] * expect).norm();
                    prop_assert!(d <= 1e-9 * (base.values[i][q].norm() + 1.0) * 10.0);
                }
            }
        }
    }
}
