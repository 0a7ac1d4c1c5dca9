//! Experiment configuration: a TOML document with units spelled out in key names.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use mcsbr::radar::{Pol, Radar};
use mcsbr::scenes::{self, SceneSource};
use mcsbr::signal::{IsarOptions, Window};
use mcsbr::solver::det::DetConfig;
use mcsbr::solver::mc::McConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scene: SceneConfig,
    #[serde(default)]
    pub source: SourceConfig,
    #[serde(default)]
    pub receiver: ReceiverConfig,
    #[serde(default)]
    pub frequency: FrequencyConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub angle_sweep: AngleSweepConfig,
    #[serde(default)]
    pub profile: ProfileConfig,
    #[serde(default)]
    pub isar: IsarOptions,
    #[serde(default)]
    pub convergence: ConvergenceConfig,
    #[serde(default)]
    pub bench: BenchConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(default)]
    pub outputs: OutputsConfig,
}

/// Either a built-in scene or a mesh file with its material map. Paths are relative
/// to the directory holding the config file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    pub builtin: Option<String>,
    pub mesh_path: Option<PathBuf>,
    pub material_map_path: Option<PathBuf>,
    /// Overrides for built-in dimensions, where the scene has such a parameter.
    pub size_m: Option<f64>,
    pub radius_m: Option<f64>,
    pub subdivisions: Option<u32>,
    pub eps_r: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Polarization {
    #[default]
    V,
    H,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SourceConfig {
    /// Direction the wave comes from, as polar and azimuth angles.
    pub theta_deg: f64,
    pub phi_deg: f64,
    pub polarization: Polarization,
}

impl Default for SourceConfig {
    fn default() -> Self {
        Self { theta_deg: 0.0, phi_deg: 0.0, polarization: Polarization::V }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReceiverConfig {
    pub monostatic: bool,
    /// Observation direction when not monostatic.
    pub theta_deg: Option<f64>,
    pub phi_deg: Option<f64>,
    /// Defaults to the source polarization.
    pub polarization: Option<Polarization>,
}

impl Default for ReceiverConfig {
    fn default() -> Self {
        Self { monostatic: true, theta_deg: None, phi_deg: None, polarization: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrequencyConfig {
    pub start_hz: f64,
    pub stop_hz: f64,
    pub count: usize,
}

impl Default for FrequencyConfig {
    fn default() -> Self {
        Self { start_hz: 1e9, stop_hz: 3e9, count: 101 }
    }
}

impl FrequencyConfig {
    pub fn grid(&self) -> Vec<f64> {
        mcsbr::farfield::linspace(self.start_hz, self.stop_hz, self.count)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    #[default]
    Mc,
    Deterministic,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub kind: SolverKind,
    pub mc: McConfig,
    pub deterministic: DetConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngleAxis {
    #[default]
    Theta,
    Phi,
}

/// Source angles swept by `angle-sweep` and `isar`; the other source angle stays fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AngleSweepConfig {
    pub axis: AngleAxis,
    pub start_deg: f64,
    pub stop_deg: f64,
    pub count: usize,
    /// Narrowband frequency for `angle-sweep`; defaults to the centre of the frequency grid.
    pub frequency_hz: Option<f64>,
}

impl Default for AngleSweepConfig {
    fn default() -> Self {
        Self { axis: AngleAxis::Theta, start_deg: -30.0, stop_deg: 30.0, count: 61, frequency_hz: None }
    }
}

impl AngleSweepConfig {
    pub fn angles(&self) -> Vec<f64> {
        mcsbr::farfield::linspace(self.start_deg, self.stop_deg, self.count)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileConfig {
    pub window: Window,
    pub zero_pad: usize,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        Self { window: Window::Hann, zero_pad: 4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceAxis {
    #[default]
    Frequency,
    Angle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergenceConfig {
    /// Frequency sweep or narrowband angle sweep.
    pub axis: ConvergenceAxis,
    pub strata_per_wavelength: Vec<f64>,
    pub samples_per_stratum: Vec<u32>,
    /// Seeds run per grid point, counting up from the solver seed.
    pub seeds: u32,
    /// Reference sweep CSV; when absent the deterministic solver provides the reference.
    pub reference_csv: Option<PathBuf>,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        Self {
            axis: ConvergenceAxis::Frequency,
            strata_per_wavelength: vec![2.5, 5.0, 10.0],
            samples_per_stratum: vec![1, 4],
            seeds: 4,
            reference_csv: None,
        }
    }
}

/// One paired row of the benchmark table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchPair {
    pub strata_per_wavelength: f64,
    pub samples_per_stratum: u32,
    pub det_rays_per_wavelength: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub repeats: u32,
    pub warmups: u32,
    pub pairs: Vec<BenchPair>,
    pub max_bounce: Vec<u32>,
    pub force_stack_accounting: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            repeats: 3,
            warmups: 1,
            pairs: vec![BenchPair { strata_per_wavelength: 10.0, samples_per_stratum: 4, det_rays_per_wavelength: 20.0 }],
            max_bounce: vec![3, 9],
            force_stack_accounting: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleKind {
    #[default]
    Slab,
    Plate,
    Sphere,
}

/// Analytic reference evaluated over the frequency grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    pub kind: OracleKind,
    pub eps_r: f64,
    /// Slab thickness or plate side along x.
    pub thickness_m: f64,
    /// Side of the square slab patch or plate side along y.
    pub width_m: f64,
    pub pec_backed: bool,
    /// Height of the illuminated face above the phase centre.
    pub top_z_m: f64,
    pub radius_m: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { kind: OracleKind::Slab, eps_r: 1.5, thickness_m: 3.0, width_m: 3.0, pec_backed: false, top_z_m: 1.5, radius_m: 1.0 }
    }
}

/// Artifact file names, relative to the output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputsConfig {
    pub sweep_csv: String,
    pub angle_sweep_csv: String,
    pub profile_csv: String,
    pub isar_data_csv: String,
    pub isar_csv: String,
    pub isar_pgm: String,
    pub convergence_csv: String,
    pub convergence_summary_csv: String,
    pub bench_csv: String,
    pub bench_timing: String,
    pub oracle_csv: String,
    pub stats: String,
    pub manifest: String,
}

impl Default for OutputsConfig {
    fn default() -> Self {
        let s = |x: &str| x.to_string();
        Self {
            sweep_csv: s("sweep.csv"),
            angle_sweep_csv: s("angle_sweep.csv"),
            profile_csv: s("profile.csv"),
            isar_data_csv: s("isar_data.csv"),
            isar_csv: s("isar.csv"),
            isar_pgm: s("isar.pgm"),
            convergence_csv: s("convergence.csv"),
            convergence_summary_csv: s("convergence_summary.csv"),
            bench_csv: s("bench.csv"),
            bench_timing: s("bench_timing.toml"),
            oracle_csv: s("oracle.csv"),
            stats: s("stats.toml"),
            manifest: s("manifest.toml"),
        }
    }
}

/// Parses a config, naming the offending field on schema errors.
pub fn parse(text: &str) -> Result<ExperimentConfig> {
    let de = toml::Deserializer::parse(text).context("config is not valid TOML")?;
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        anyhow::anyhow!("config field `{path}`: {}", e.inner().message())
    })
}

fn check(ok: bool, field: &str, msg: &str) -> Result<()> {
    if !ok {
        bail!("config field `{field}`: {msg}");
    }
    Ok(())
}

fn valid_theta(t: f64) -> bool {
    (0.0..=180.0).contains(&t)
}

fn valid_phi(p: f64) -> bool {
    (-360.0..=360.0).contains(&p)
}

impl ExperimentConfig {
    /// Checks value ranges and that referenced files exist under `base`.
    pub fn validate(&self, base: &Path) -> Result<()> {
        let sc = &self.scene;
        match (&sc.builtin, &sc.mesh_path, &sc.material_map_path) {
            (Some(name), None, None) => {
                check(scenes::BUILTIN_NAMES.contains(&name.as_str()), "scene.builtin", &format!("unknown scene '{name}', expected one of {}", scenes::BUILTIN_NAMES.join(", ")))?;
            }
            (None, Some(m), Some(mm)) => {
                check(base.join(m).is_file(), "scene.mesh_path", &format!("file {} not found", base.join(m).display()))?;
                check(base.join(mm).is_file(), "scene.material_map_path", &format!("file {} not found", base.join(mm).display()))?;
            }
            _ => bail!("config field `scene`: give either `builtin` or both `mesh_path` and `material_map_path`"),
        }
        check(valid_theta(self.source.theta_deg), "source.theta_deg", "must lie in [0, 180]")?;
        check(valid_phi(self.source.phi_deg), "source.phi_deg", "must lie in [-360, 360]")?;
        let r = &self.receiver;
        if r.monostatic {
            check(r.theta_deg.is_none() && r.phi_deg.is_none(), "receiver", "theta_deg/phi_deg only apply when monostatic = false")?;
        } else {
            let t = r.theta_deg.context("config field `receiver.theta_deg`: required when monostatic = false")?;
            let p = r.phi_deg.context("config field `receiver.phi_deg`: required when monostatic = false")?;
            check(valid_theta(t), "receiver.theta_deg", "must lie in [0, 180]")?;
            check(valid_phi(p), "receiver.phi_deg", "must lie in [-360, 360]")?;
        }
        let f = &self.frequency;
        check(f.count >= 1, "frequency.count", "must be >= 1")?;
        check(f.start_hz > 0.0 && f.start_hz.is_finite(), "frequency.start_hz", "must be > 0")?;
        check(f.stop_hz >= f.start_hz && f.stop_hz.is_finite(), "frequency.stop_hz", "must be >= start_hz")?;
        self.solver.mc.validate().map_err(|e| anyhow::anyhow!("config field `solver.mc`: {e}"))?;
        self.solver.deterministic.validate().map_err(|e| anyhow::anyhow!("config field `solver.deterministic`: {e}"))?;
        let a = &self.angle_sweep;
        check(a.count >= 1, "angle_sweep.count", "must be >= 1")?;
        check(a.stop_deg >= a.start_deg, "angle_sweep.stop_deg", "must be >= start_deg")?;
        // Negative polar angles sweep through the pole into the opposite half-plane.
        let in_range = match a.axis {
            AngleAxis::Theta => a.start_deg >= -180.0 && a.stop_deg <= 180.0,
            AngleAxis::Phi => valid_phi(a.start_deg) && valid_phi(a.stop_deg),
        };
        check(in_range, "angle_sweep", "angles out of range")?;
        if let Some(fh) = a.frequency_hz {
            check(fh > 0.0 && fh.is_finite(), "angle_sweep.frequency_hz", "must be > 0")?;
        }
        check(self.profile.zero_pad >= 1, "profile.zero_pad", "must be >= 1")?;
        check(self.isar.zero_pad >= 1, "isar.zero_pad", "must be >= 1")?;
        check(self.isar.floor_db < 0.0, "isar.floor_db", "must be < 0")?;
        let c = &self.convergence;
        check(!c.strata_per_wavelength.is_empty() && c.strata_per_wavelength.iter().all(|s| *s > 0.0), "convergence.strata_per_wavelength", "must be a non-empty list of positive values")?;
        check(!c.samples_per_stratum.is_empty() && c.samples_per_stratum.iter().all(|s| *s >= 1), "convergence.samples_per_stratum", "must be a non-empty list of values >= 1")?;
        check(c.seeds >= 1, "convergence.seeds", "must be >= 1")?;
        if let Some(p) = &c.reference_csv {
            check(base.join(p).is_file(), "convergence.reference_csv", &format!("file {} not found", base.join(p).display()))?;
        }
        let b = &self.bench;
        check(b.repeats >= 1, "bench.repeats", "must be >= 1")?;
        check(!b.pairs.is_empty(), "bench.pairs", "must not be empty")?;
        for (i, p) in b.pairs.iter().enumerate() {
            check(p.strata_per_wavelength > 0.0 && p.samples_per_stratum >= 1 && p.det_rays_per_wavelength > 0.0, &format!("bench.pairs[{i}]"), "densities must be positive")?;
        }
        check(!b.max_bounce.is_empty() && b.max_bounce.iter().all(|m| *m >= 1), "bench.max_bounce", "must be a non-empty list of values >= 1")?;
        let o = &self.oracle;
        check(o.eps_r >= 1.0, "oracle.eps_r", "must be >= 1")?;
        check(o.thickness_m > 0.0 && o.width_m > 0.0 && o.radius_m > 0.0, "oracle", "dimensions must be positive")?;
        Ok(())
    }

    pub fn radar(&self) -> Radar {
        self.radar_at(self.source.theta_deg, self.source.phi_deg)
    }

    /// Radar with the source moved to `(θ, φ)`; a bistatic receiver stays put.
    pub fn radar_at(&self, theta_deg: f64, phi_deg: f64) -> Radar {
        let r = &self.receiver;
        if r.monostatic {
            Radar::monostatic(theta_deg, phi_deg)
        } else {
            Radar::bistatic(theta_deg, phi_deg, r.theta_deg.unwrap_or(theta_deg), r.phi_deg.unwrap_or(phi_deg))
        }
    }

    /// Source direction at one point of the angle sweep.
    pub fn source_at(&self, angle_deg: f64) -> (f64, f64) {
        match self.angle_sweep.axis {
            AngleAxis::Theta => (angle_deg, self.source.phi_deg),
            AngleAxis::Phi => (self.source.theta_deg, angle_deg),
        }
    }

    /// Polarization channel selected by the source and receiver settings.
    pub fn pol(&self) -> Pol {
        let tx = self.source.polarization;
        let rx = self.receiver.polarization.unwrap_or(tx);
        match (rx, tx) {
            (Polarization::V, Polarization::V) => Pol::Vv,
            (Polarization::H, Polarization::H) => Pol::Hh,
            (Polarization::V, Polarization::H) => Pol::Vh,
            (Polarization::H, Polarization::V) => Pol::Hv,
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self.solver.kind {
            SolverKind::Mc => Some(self.solver.mc.seed),
            SolverKind::Deterministic => None,
        }
    }
}

/// Scene text plus the parsed scene.
pub struct LoadedScene {
    pub source: SceneSource,
    pub scene: mcsbr::geometry::Scene,
}

fn builtin_source(sc: &SceneConfig, name: &str) -> Result<SceneSource> {
    let unused = |field: &str, v: bool| check(!v, &format!("scene.{field}"), &format!("not a parameter of builtin scene '{name}'"));
    let size = sc.size_m;
    let eps = sc.eps_r;
    let src = match name {
        "sphere" => {
            unused("size_m", size.is_some())?;
            unused("eps_r", eps.is_some())?;
            scenes::pec_sphere(sc.radius_m.unwrap_or(1.0), sc.subdivisions.unwrap_or(5))
        }
        "pec_cube" | "glass_cube" | "glass_cube_pec_bottom" => {
            unused("radius_m", sc.radius_m.is_some())?;
            unused("subdivisions", sc.subdivisions.is_some())?;
            let s = size.unwrap_or(3.0);
            match name {
                "pec_cube" => {
                    unused("eps_r", eps.is_some())?;
                    scenes::pec_cube(s)
                }
                "glass_cube" => scenes::glass_cube(s, eps.unwrap_or(1.5)),
                _ => scenes::glass_cube_pec_bottom(s, eps.unwrap_or(1.5)),
            }
        }
        "plate" => {
            unused("radius_m", sc.radius_m.is_some())?;
            unused("subdivisions", sc.subdivisions.is_some())?;
            unused("eps_r", eps.is_some())?;
            let s = size.unwrap_or(1.0);
            scenes::plate(s, s, 0.0)
        }
        _ => {
            let given = size.is_some() || sc.radius_m.is_some() || sc.subdivisions.is_some() || eps.is_some();
            check(!given, "scene", &format!("builtin scene '{name}' takes no parameters"))?;
            scenes::builtin(name)?
        }
    };
    Ok(src)
}

pub fn load_scene(cfg: &ExperimentConfig, base: &Path) -> Result<LoadedScene> {
    let sc = &cfg.scene;
    let source = match (&sc.builtin, &sc.mesh_path, &sc.material_map_path) {
        (Some(name), _, _) => builtin_source(sc, name)?,
        (None, Some(m), Some(mm)) => {
            let mesh_text = std::fs::read_to_string(base.join(m)).with_context(|| format!("reading {}", base.join(m).display()))?;
            let material_map = std::fs::read_to_string(base.join(mm)).with_context(|| format!("reading {}", base.join(mm).display()))?;
            let mesh = mcsbr::geometry::parse_obj(&mesh_text).with_context(|| format!("parsing {}", base.join(m).display()))?;
            SceneSource { mesh, material_map }
        }
        _ => bail!("config field `scene`: give either `builtin` or both `mesh_path` and `material_map_path`"),
    };
    let scene = source.load().context("building scene")?;
    Ok(LoadedScene { source, scene })
}

/// Hash of the canonical config text plus the scene's mesh and material map.
pub fn config_hash(cfg: &ExperimentConfig, scene: &SceneSource) -> Result<String> {
    let canonical = toml::to_string(cfg).context("serialising config")?;
    let mut h = Sha256::new();
    for part in [canonical.as_str(), &scene.obj_text(), &scene.material_map] {
        h.update((part.len() as u64).to_le_bytes());
        h.update(part.as_bytes());
    }
    let mut s = String::with_capacity(64);
    for b in h.finalize() {
        let _ = write!(s, "{b:02x}");
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[scene]\nbuiltin = \"plate\"\n";

    #[test]
    fn defaults_fill_missing_sections() {
        let c = parse(MINIMAL).unwrap();
        assert_eq!(c.frequency.count, 101);
        assert_eq!(c.solver.kind, SolverKind::Mc);
        assert_eq!(c.pol(), Pol::Vv);
        c.validate(Path::new(".")).unwrap();
    }

    #[test]
    fn unknown_field_names_its_path() {
        let err = parse("[scene]\nbuiltin = \"plate\"\n[solver.mc]\nstrata = 3\n").unwrap_err().to_string();
        assert!(err.contains("solver.mc"), "{err}");
        let err = parse("[scene]\nbuiltin = \"plate\"\n[frequency]\ncount = \"many\"\n").unwrap_err().to_string();
        assert!(err.contains("frequency.count"), "{err}");
    }

    #[test]
    fn range_errors_name_fields() {
        let mut c = parse(MINIMAL).unwrap();
        c.frequency.count = 0;
        assert!(c.validate(Path::new(".")).unwrap_err().to_string().contains("frequency.count"));
        let mut c = parse(MINIMAL).unwrap();
        c.source.theta_deg = 200.0;
        assert!(c.validate(Path::new(".")).unwrap_err().to_string().contains("source.theta_deg"));
        let mut c = parse(MINIMAL).unwrap();
        c.scene = SceneConfig { mesh_path: Some("missing.obj".into()), material_map_path: Some("m.toml".into()), ..Default::default() };
        assert!(c.validate(Path::new(".")).unwrap_err().to_string().contains("scene.mesh_path"));
    }

    #[test]
    fn builtin_parameters_checked() {
        let c = parse("[scene]\nbuiltin = \"sphere\"\nradius_m = 0.5\nsubdivisions = 2\n").unwrap();
        let s = load_scene(&c, Path::new(".")).unwrap();
        assert_eq!(s.scene.triangles().len(), 320);
        let c = parse("[scene]\nbuiltin = \"nested\"\nsize_m = 2\n").unwrap();
        assert!(load_scene(&c, Path::new(".")).is_err());
    }

    #[test]
    fn hash_tracks_config_and_scene() {
        let c = parse(MINIMAL).unwrap();
        let s = load_scene(&c, Path::new(".")).unwrap();
        let h = config_hash(&c, &s.source).unwrap();
        assert_eq!(h.len(), 64);
        assert_eq!(h, config_hash(&c, &s.source).unwrap());
        let mut c2 = c.clone();
        c2.solver.mc.seed = 7;
        assert_ne!(h, config_hash(&c2, &s.source).unwrap());
        let other = scenes::plate(2.0, 1.0, 0.0);
        assert_ne!(h, config_hash(&c, &other).unwrap());
    }

    #[test]
    fn bistatic_receiver_stays_fixed() {
        let c = parse("[scene]\nbuiltin = \"plate\"\n[receiver]\nmonostatic = false\ntheta_deg = 30.0\nphi_deg = 0.0\n").unwrap();
        c.validate(Path::new(".")).unwrap();
        let a = c.radar_at(0.0, 0.0);
        let b = c.radar_at(10.0, 0.0);
        assert_eq!(a.k_scatter, b.k_scatter);
        assert!(!a.is_monostatic());
    }
}
