//! Range profiles and ISAR images from coherent sweeps.
//!
//! A scatterer at monostatic range `R` (the component of its position along the
//! incidence direction) contributes `e^{−j2kR}` to a sweep. Transforms are scaled so
//! that it shows up at `+R` on the range axis.

use std::fmt::Write as _;
use std::str::FromStr;

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::em::C0;
use crate::farfield::{uniform_step, SweepResult};
use crate::radar::Pol;
use crate::Complex;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SignalError {
    #[error("frequencies must be uniformly spaced")]
    NonUniformFrequencies,
    #[error("angles must be uniformly spaced")]
    NonUniformAngles,
    #[error("zero-pad factor must be >= 1")]
    BadPadding,
    #[error("need at least {0} samples")]
    TooFewSamples(usize),
    #[error("angular aperture {0:.1} deg exceeds the 30 deg small-angle limit")]
    UnsupportedAperture(f64),
    #[error("sweep {0} does not share the frequency grid of the first sweep")]
    MismatchedSweeps(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    None,
    #[default]
    Hann,
}

impl Window {
    pub fn name(self) -> &'static str {
        match self {
            Window::None => "none",
            Window::Hann => "hann",
        }
    }

    pub fn weights(self, n: usize) -> Vec<f64> {
        match self {
            Window::None => vec![1.0; n],
            Window::Hann if n < 2 => vec![1.0; n],
            Window::Hann => (0..n).map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64).cos()).collect(),
        }
    }
}

impl FromStr for Window {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "none" => Ok(Window::None),
            "hann" => Ok(Window::Hann),
            o => Err(format!("unknown window '{o}' (none | hann)")),
        }
    }
}

fn db(x: f64) -> f64 {
    20.0 * x.max(1e-300).log10()
}

/// Unitary transform of `data` zero-padded to `n`, returned with bin 0 in the middle.
/// `inverse` selects the `e^{+j}` kernel.
fn centred_transform(data: &[Complex], n: usize, inverse: bool, planner: &mut FftPlanner<f64>) -> Vec<Complex> {
    let mut buf = vec![Complex::new(0.0, 0.0); n];
    buf[..data.len()].copy_from_slice(data);
    let fft = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
    fft.process(&mut buf);
    let scale = 1.0 / (n as f64).sqrt();
    let half = n / 2;
    (0..n).map(|i| buf[(i + n - half) % n] * scale).collect()
}

/// Signed bin index of each centred output position.
fn centred_bins(n: usize) -> impl Iterator<Item = f64> {
    let half = n / 2;
    (0..n).map(move |i| i as f64 - half as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RangeProfile {
    pub range_m: Vec<f64>,
    pub magnitude_db: Vec<f64>,
    pub values: Vec<Complex>,
    pub window: Window,
    pub zero_pad: usize,
}

impl RangeProfile {
    pub fn bin_spacing(&self) -> f64 {
        if self.range_m.len() < 2 {
            return 0.0;
        }
        self.range_m[1] - self.range_m[0]
    }

    /// Range of the strongest bin.
    pub fn peak_range(&self) -> f64 {
        let i = (0..self.values.len()).max_by(|&a, &b| self.values[a].norm().total_cmp(&self.values[b].norm())).unwrap_or(0);
        self.range_m[i]
    }

    /// Ranges of local maxima within `window_db` of the strongest bin, strongest first.
    pub fn peaks(&self, window_db: f64) -> Vec<f64> {
        let top = self.magnitude_db.iter().cloned().fold(f64::MIN, f64::max);
        let m = &self.magnitude_db;
        let mut idx: Vec<usize> = (1..m.len().saturating_sub(1))
            .filter(|&i| m[i] >= m[i - 1] && m[i] > m[i + 1] && m[i] >= top - window_db)
            .collect();
        idx.sort_by(|&a, &b| m[b].total_cmp(&m[a]));
        idx.into_iter().map(|i| self.range_m[i]).collect()
    }

    pub fn to_csv(&self, header: &[(String, String)]) -> String {
        let mut s = String::new();
        for (k, v) in header {
            let _ = writeln!(s, "# {k}: {v}");
        }
        let _ = writeln!(s, "# window: {}", self.window.name());
        let _ = writeln!(s, "# zero_pad: {}", self.zero_pad);
        s.push_str("range_m,mag_db\n");
        for (r, m) in self.range_m.iter().zip(&self.magnitude_db) {
            let _ = writeln!(s, "{r:e},{m:e}");
        }
        s
    }
}

/// Inverse transform of one polarization of `sweep` onto a range axis.
pub fn range_profile(sweep: &SweepResult, pol: Pol, window: Window, zero_pad: usize) -> Result<RangeProfile, SignalError> {
    range_profile_of(&sweep.frequencies, &sweep.column(pol), window, zero_pad)
}

/// [`range_profile`] on raw samples.
pub fn range_profile_of(frequencies: &[f64], values: &[Complex], window: Window, zero_pad: usize) -> Result<RangeProfile, SignalError> {
    if zero_pad < 1 {
        return Err(SignalError::BadPadding);
    }
    if frequencies.len() < 2 {
        return Err(SignalError::TooFewSamples(2));
    }
    let df = uniform_step(frequencies).ok_or(SignalError::NonUniformFrequencies)?;
    let w = window.weights(values.len());
    let data: Vec<Complex> = values.iter().zip(&w).map(|(v, w)| v * w).collect();
    let n = values.len() * zero_pad;
    let out = centred_transform(&data, n, true, &mut FftPlanner::new());
    let spacing = C0 / (2.0 * n as f64 * df);
    Ok(RangeProfile {
        range_m: centred_bins(n).map(|b| b * spacing).collect(),
        magnitude_db: out.iter().map(|v| db(v.norm())).collect(),
        values: out,
        window,
        zero_pad,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IsarOptions {
    pub window: Window,
    pub zero_pad: usize,
    /// Display floor relative to the image peak.
    pub floor_db: f64,
}

impl Default for IsarOptions {
    fn default() -> Self {
        Self { window: Window::Hann, zero_pad: 4, floor_db: -40.0 }
    }
}

/// Down-range by cross-range image in dB relative to its peak, clipped at the floor.
#[derive(Debug, Clone, PartialEq)]
pub struct IsarImage {
    pub down_range_m: Vec<f64>,
    pub cross_range_m: Vec<f64>,
    /// `db[i][j]` at down-range `i`, cross-range `j`.
    pub db: Vec<Vec<f64>>,
    /// Absolute level of the 0 dB pixel.
    pub peak_db: f64,
    pub floor_db: f64,
}

impl IsarImage {
    /// Position of the brightest pixel as `(down-range, cross-range)`.
    pub fn peak_position(&self) -> (f64, f64) {
        let mut best = (0, 0);
        for (i, row) in self.db.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if *v > self.db[best.0][best.1] {
                    best = (i, j);
                }
            }
        }
        (self.down_range_m[best.0], self.cross_range_m[best.1])
    }

    pub fn to_csv(&self, header: &[(String, String)]) -> String {
        let mut s = String::new();
        for (k, v) in header {
            let _ = writeln!(s, "# {k}: {v}");
        }
        let _ = writeln!(s, "# floor_db: {}", self.floor_db);
        let _ = writeln!(s, "# peak_db: {:e}", self.peak_db);
        s.push_str("down_range_m\\cross_range_m");
        for c in &self.cross_range_m {
            let _ = write!(s, ",{c:e}");
        }
        s.push('\n');
        for (r, row) in self.down_range_m.iter().zip(&self.db) {
            let _ = write!(s, "{r:e}");
            for v in row {
                let _ = write!(s, ",{v:e}");
            }
            s.push('\n');
        }
        s
    }

    /// Binary 8-bit graymap, far range at the top, floor black and peak white.
    pub fn to_pgm(&self, header: &[(String, String)]) -> Vec<u8> {
        let (h, w) = (self.down_range_m.len(), self.cross_range_m.len());
        let mut s = String::from("P5\n");
        for (k, v) in header {
            let _ = writeln!(s, "# {k}: {v}");
        }
        let _ = writeln!(s, "# db_window: {} 0", self.floor_db);
        let _ = writeln!(s, "{w} {h}\n255");
        let mut out = s.into_bytes();
        for row in self.db.iter().rev() {
            for v in row {
                let t = ((v - self.floor_db) / -self.floor_db).clamp(0.0, 1.0);
                out.push((t * 255.0).round() as u8);
            }
        }
        out
    }
}

/// Small-angle range-Doppler image from one sweep per aspect angle.
///
/// `angles_deg` are the radar positions along the aperture. Cross-range is measured
/// along the direction in which the incidence direction turns as the angle increases,
/// so scatterers at positive cross-range move away as the angle grows.
pub fn isar(sweeps: &[SweepResult], angles_deg: &[f64], pol: Pol, opts: &IsarOptions) -> Result<IsarImage, SignalError> {
    let columns: Vec<Vec<Complex>> = sweeps.iter().map(|s| s.column(pol)).collect();
    let first = sweeps.first().ok_or(SignalError::TooFewSamples(2))?;
    for (i, s) in sweeps.iter().enumerate() {
        if s.frequencies != first.frequencies {
            return Err(SignalError::MismatchedSweeps(i));
        }
    }
    isar_of(&first.frequencies, angles_deg, &columns, opts)
}

/// [`isar`] on a raw `angle × frequency` matrix.
pub fn isar_of(frequencies: &[f64], angles_deg: &[f64], data: &[Vec<Complex>], opts: &IsarOptions) -> Result<IsarImage, SignalError> {
    if opts.zero_pad < 1 {
        return Err(SignalError::BadPadding);
    }
    if frequencies.len() < 2 || angles_deg.len() < 2 || data.len() != angles_deg.len() {
        return Err(SignalError::TooFewSamples(2));
    }
    let df = uniform_step(frequencies).ok_or(SignalError::NonUniformFrequencies)?;
    let dtheta = uniform_step(angles_deg).ok_or(SignalError::NonUniformAngles)?.to_radians();
    let aperture = (angles_deg[angles_deg.len() - 1] - angles_deg[0]).abs();
    if aperture > 30.0 {
        return Err(SignalError::UnsupportedAperture(aperture));
    }
    let (nf, na) = (frequencies.len(), angles_deg.len());
    let (npf, npa) = (nf * opts.zero_pad, na * opts.zero_pad);
    let wf = opts.window.weights(nf);
    let wa = opts.window.weights(na);
    let mut planner = FftPlanner::new();

    // frequency → range for every angle
    let ranged: Vec<Vec<Complex>> = data
        .iter()
        .zip(&wa)
        .map(|(row, a)| {
            let r: Vec<Complex> = row.iter().zip(&wf).map(|(v, f)| v * (f * a)).collect();
            centred_transform(&r, npf, true, &mut planner)
        })
        .collect();
    // angle → cross-range for every range bin
    let mut mag = vec![vec![0.0; npa]; npf];
    let mut col = vec![Complex::new(0.0, 0.0); na];
    for (i, m) in mag.iter_mut().enumerate() {
        for (a, c) in col.iter_mut().enumerate() {
            *c = ranged[a][i];
        }
        let t = centred_transform(&col, npa, dtheta > 0.0, &mut planner);
        for (slot, v) in m.iter_mut().zip(&t) {
            *slot = v.norm();
        }
    }
    let peak = mag.iter().flatten().cloned().fold(0.0, f64::max);
    let peak_db = db(peak);
    let fc = 0.5 * (frequencies[0] + frequencies[nf - 1]);
    let range_step = C0 / (2.0 * npf as f64 * df);
    let cross_step = C0 / (2.0 * fc * npa as f64 * dtheta.abs());
    Ok(IsarImage {
        down_range_m: centred_bins(npf).map(|b| b * range_step).collect(),
        cross_range_m: centred_bins(npa).map(|b| b * cross_step).collect(),
        db: mag.iter().map(|row| row.iter().map(|v| (db(*v) - peak_db).max(opts.floor_db)).collect()).collect(),
        peak_db,
        floor_db: opts.floor_db,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::farfield::linspace;
    use std::f64::consts::PI;

    fn point(freqs: &[f64], r: f64) -> Vec<Complex> {
        freqs.iter().map(|f| Complex::from_polar(1.0, -2.0 * (2.0 * PI * f / C0) * r)).collect()
    }

    #[test]
    fn single_scatterer_peaks_at_its_range() {
        let f = linspace(1e9, 3e9, 101);
        for r in [-3.0, 0.0, 1.3, 3.6] {
            let p = range_profile_of(&f, &point(&f, r), Window::Hann, 4).unwrap();
            assert!((p.peak_range() - r).abs() <= p.bin_spacing(), "{r}: {}", p.peak_range());
        }
    }

    #[test]
    fn bin_spacing_follows_padded_bandwidth() {
        let f = linspace(1e9, 3e9, 101);
        let p = range_profile_of(&f, &point(&f, 0.0), Window::Hann, 4).unwrap();
        let df = 2e9 / 100.0;
        assert!((p.bin_spacing() - C0 / (2.0 * 404.0 * df)).abs() < 1e-12);
        assert_eq!(p.range_m.len(), 404);
        assert!(p.range_m.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn two_scatterers_resolve() {
        let f = linspace(1e9, 3e9, 101);
        let res = C0 / (2.0 * 2e9);
        let v: Vec<Complex> = point(&f, 1.0).iter().zip(point(&f, 1.0 + 3.0 * res)).map(|(a, b)| a + b).collect();
        let p = range_profile_of(&f, &v, Window::Hann, 4).unwrap();
        let peaks = p.peaks(6.0);
        assert_eq!(peaks.len(), 2, "{peaks:?}");
        let mut peaks = peaks;
        peaks.sort_by(f64::total_cmp);
        assert!((peaks[0] - 1.0).abs() <= p.bin_spacing());
        assert!((peaks[1] - 1.0 - 3.0 * res).abs() <= p.bin_spacing());
    }

    #[test]
    fn parseval_without_window_or_padding() {
        let f = linspace(1e9, 2e9, 64);
        let v: Vec<Complex> = (0..64).map(|i| Complex::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos())).collect();
        let p = range_profile_of(&f, &v, Window::None, 1).unwrap();
        let e_in: f64 = v.iter().map(|c| c.norm_sqr()).sum();
        let e_out: f64 = p.values.iter().map(|c| c.norm_sqr()).sum();
        assert!((e_in - e_out).abs() < 1e-10 * e_in);
    }

    #[test]
    fn optical_shift_moves_the_peak() {
        let f = linspace(1e9, 3e9, 101);
        let a = range_profile_of(&f, &point(&f, 2.0), Window::Hann, 4).unwrap();
        let b = range_profile_of(&f, &point(&f, 2.9), Window::Hann, 4).unwrap();
        assert!((b.peak_range() - a.peak_range() - 0.9).abs() <= a.bin_spacing());
    }

    #[test]
    fn rejects_bad_grids() {
        let v = vec![Complex::new(1.0, 0.0); 3];
        assert_eq!(range_profile_of(&[1e9, 1.1e9, 1.3e9], &v, Window::Hann, 4), Err(SignalError::NonUniformFrequencies));
        assert_eq!(range_profile_of(&[1e9, 2e9, 3e9], &v, Window::Hann, 0), Err(SignalError::BadPadding));
        let ang = linspace(0.0, 40.0, 3);
        let data = vec![v.clone(); 3];
        assert_eq!(isar_of(&[1e9, 2e9, 3e9], &ang, &data, &IsarOptions::default()), Err(SignalError::UnsupportedAperture(40.0)));
    }

    /// Monostatic sweep of point scatterers at `(down, cross)` seen from aspect angles
    /// `angles` about 0, with range `down·cos θ + cross·sin θ`.
    fn scene_data(freqs: &[f64], angles: &[f64], pts: &[(f64, f64, f64)]) -> Vec<Vec<Complex>> {
        angles
            .iter()
            .map(|a| {
                let t = a.to_radians();
                freqs
                    .iter()
                    .map(|f| {
                        let k = 2.0 * PI * f / C0;
                        pts.iter().map(|&(x, y, amp)| Complex::from_polar(amp, -2.0 * k * (x * t.cos() + y * t.sin()))).sum()
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn isar_point_lands_on_its_pixel() {
        let f = linspace(1e9, 3e9, 130);
        let ang = linspace(-10.0, 10.0, 51);
        let img = isar_of(&f, &ang, &scene_data(&f, &ang, &[(1.5, -2.0, 1.0)]), &IsarOptions::default()).unwrap();
        let (r, c) = img.peak_position();
        let dr = img.down_range_m[1] - img.down_range_m[0];
        let dc = img.cross_range_m[1] - img.cross_range_m[0];
        let cell_r = C0 / (2.0 * 2e9);
        let cell_c = C0 / (2.0 * 2e9 * 20f64.to_radians());
        assert!((r - 1.5).abs() <= cell_r.max(dr), "{r}");
        assert!((c + 2.0).abs() <= cell_c.max(dc), "{c}");
        assert_eq!(img.db.len(), 520);
        assert_eq!(img.db[0].len(), 204);
    }

    #[test]
    fn isar_two_points_without_ghosts() {
        let f = linspace(1e9, 3e9, 130);
        let ang = linspace(-10.0, 10.0, 51);
        let pts = [(0.0, 3.5, 1.0), (0.0, -3.5, 1.0)];
        let img = isar_of(&f, &ang, &scene_data(&f, &ang, &pts), &IsarOptions::default()).unwrap();
        let cell_c = C0 / (2.0 * 2e9 * 20f64.to_radians());
        let cell_r = C0 / (2.0 * 2e9);
        // off-centre points migrate through range across the aperture
        let migration = 3.5 * 10f64.to_radians().sin();
        let d = &img.db;
        let mut maxima = 0;
        for i in 1..d.len() - 1 {
            for j in 1..d[0].len() - 1 {
                let v = d[i][j];
                if v <= -40.0 || [(i - 1, j), (i + 1, j), (i, j - 1), (i, j + 1)].iter().any(|&(a, b)| d[a][b] > v) {
                    continue;
                }
                maxima += 1;
                let (r, c) = (img.down_range_m[i], img.cross_range_m[j]);
                let near = pts.iter().any(|p| (c - p.1).abs() < 4.0 * cell_c && (r - p.0).abs() < 3.0 * cell_r + migration);
                assert!(near, "ghost at ({r}, {c}) = {v}");
            }
        }
        assert!(maxima >= 2);
        for p in pts {
            let j = img.cross_range_m.iter().position(|c| (c - p.1).abs() < cell_c / 4.0).unwrap();
            assert!(d.iter().any(|row| row[j] > -3.0), "no peak at {}", p.1);
        }
    }

    #[test]
    fn pgm_header_and_size() {
        let f = linspace(1e9, 2e9, 8);
        let ang = linspace(-2.0, 2.0, 5);
        let img = isar_of(&f, &ang, &scene_data(&f, &ang, &[(0.0, 0.0, 1.0)]), &IsarOptions { zero_pad: 1, ..Default::default() }).unwrap();
        let bytes = img.to_pgm(&[("seed".into(), "3".into())]);
        let text = String::from_utf8_lossy(&bytes[..40]).to_string();
        assert!(text.starts_with("P5\n# seed: 3\n# db_window: -40 0\n5 8\n255\n"), "{text}");
        let header_len = "P5\n# seed: 3\n# db_window: -40 0\n5 8\n255\n".len();
        assert_eq!(bytes.len(), header_len + 40);
        assert!(bytes[header_len..].contains(&255));
    }
}
