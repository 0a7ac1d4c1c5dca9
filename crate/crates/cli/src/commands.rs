//! Command implementations. Each one writes its artifacts into the output directory
//! and finishes with a run manifest.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use mcsbr::farfield::{SweepMeta, SweepResult};
use mcsbr::oracles::{plate_rcs, slab_sqrt_rcs, sphere_go_rcs, LayerStack};
use mcsbr::radar::{Pol, Radar};
use mcsbr::signal::{isar, range_profile};
use mcsbr::solver::{det, mc, RunStats};
use mcsbr::Complex;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{self, ConvergenceAxis, ExperimentConfig, LoadedScene, OracleKind, SolverKind};

/// Which experiment to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Sweep,
    AngleSweep,
    RangeProfile,
    Isar,
    Convergence,
    Bench,
    Oracle,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Sweep => "sweep",
            Command::AngleSweep => "angle-sweep",
            Command::RangeProfile => "range-profile",
            Command::Isar => "isar",
            Command::Convergence => "convergence",
            Command::Bench => "bench",
            Command::Oracle => "oracle",
        }
    }
}

/// Settings that come from the command line rather than the config file.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub config_path: PathBuf,
    pub seed: Option<u64>,
    /// Worker threads; 0 uses every core. Never affects results.
    pub workers: usize,
    pub out_dir: PathBuf,
}

/// Summary of a finished command.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub config_sha256: String,
    pub artifacts: Vec<PathBuf>,
    pub lines: Vec<String>,
}

#[derive(Serialize)]
struct ArtifactEntry {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    config_sha256: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    version: &'a str,
    workers: usize,
    config_path: String,
    wall_time_s: f64,
    artifacts: Vec<ArtifactEntry>,
    stats: Vec<RunStats>,
}

#[derive(Serialize)]
struct StatsFile<'a> {
    command: &'a str,
    config_sha256: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    stats: &'a RunStats,
}

fn hex(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        let _ = write!(s, "{b:02x}");
    }
    s
}

/// Everything a command needs, plus the artifacts written so far.
struct Run {
    cfg: ExperimentConfig,
    base: PathBuf,
    opts: RunOptions,
    command: Command,
    scene: LoadedScene,
    hash: String,
    written: Vec<(String, String)>,
    stats: Vec<RunStats>,
    lines: Vec<String>,
}

impl Run {
    /// Seed that shapes this command's results, if any.
    fn seed(&self) -> Option<u64> {
        match self.command {
            Command::Convergence | Command::Bench => Some(self.cfg.solver.mc.seed),
            Command::Oracle => None,
            _ => self.cfg.seed(),
        }
    }

    fn solver_name(&self) -> &'static str {
        match (self.command, self.cfg.solver.kind) {
            (Command::Convergence, _) => "mc",
            (Command::Bench, _) => "mc+deterministic",
            (Command::Oracle, _) => "oracle",
            (_, SolverKind::Mc) => "mc",
            (_, SolverKind::Deterministic) => "deterministic",
        }
    }

    /// Comment header shared by every artifact. Nothing here may depend on timing or worker count.
    fn header_for(&self, solver: &str, seed: Option<u64>) -> Vec<(String, String)> {
        vec![
            ("command".into(), self.command.name().into()),
            ("config_sha256".into(), self.hash.clone()),
            ("seed".into(), seed.map_or_else(|| "none".to_string(), |s| s.to_string())),
            ("solver".into(), solver.into()),
            ("polarization".into(), self.cfg.pol().name().into()),
        ]
    }

    fn header(&self) -> Vec<(String, String)> {
        self.header_for(self.solver_name(), self.seed())
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.opts.out_dir.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
        }
        std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.written.push((name.to_string(), hex(&Sha256::digest(bytes))));
        Ok(())
    }

    fn say(&mut self, line: String) {
        self.lines.push(line);
    }

    fn mc_config(&self, seed: u64) -> mc::McConfig {
        mc::McConfig { seed, ..self.cfg.solver.mc.clone() }
    }

    /// Runs the configured solver.
    fn solve(&self, radar: &Radar, freqs: &[f64], seed: u64) -> Result<(SweepResult, RunStats)> {
        let w = self.opts.workers;
        let scene = &self.scene.scene;
        Ok(match self.cfg.solver.kind {
            SolverKind::Mc => mc::estimate(scene, radar, freqs, &self.mc_config(seed), w)?,
            SolverKind::Deterministic => det::solve(scene, radar, freqs, &self.cfg.solver.deterministic, w)?,
        })
    }

    /// One solve per source angle at the given frequencies. Monte Carlo seeds count up
    /// along the sweep so neighbouring angles get independent samples.
    fn solve_angles(&self, angles: &[f64], freqs: &[f64], seed: u64) -> Result<(Vec<SweepResult>, RunStats)> {
        let mut out = Vec::with_capacity(angles.len());
        let mut total: Option<RunStats> = None;
        for (i, a) in angles.iter().enumerate() {
            let (t, p) = self.cfg.source_at(*a);
            let (sw, st) = self.solve(&self.cfg.radar_at(t, p), freqs, seed.wrapping_add(i as u64))?;
            match &mut total {
                None => total = Some(st),
                Some(tot) => {
                    tot.absorb(&st);
                    tot.wall_time_s += st.wall_time_s;
                }
            }
            out.push(sw);
        }
        Ok((out, total.unwrap_or_default()))
    }

    fn write_stats(&mut self, st: &RunStats) -> Result<()> {
        let file = StatsFile { command: self.command.name(), config_sha256: &self.hash, seed: self.seed(), stats: st };
        let text = toml::to_string(&file).context("serialising stats")?;
        let name = self.cfg.outputs.stats.clone();
        self.write(&name, text.as_bytes())?;
        self.stats.push(st.clone());
        Ok(())
    }

    fn finish(self, started: Instant) -> Result<RunReport> {
        let manifest = Manifest {
            command: self.command.name(),
            config_sha256: &self.hash,
            seed: self.seed(),
            version: env!("CARGO_PKG_VERSION"),
            workers: self.opts.workers,
            config_path: self.opts.config_path.display().to_string(),
            wall_time_s: started.elapsed().as_secs_f64(),
            artifacts: self.written.iter().map(|(p, h)| ArtifactEntry { path: p.clone(), sha256: h.clone() }).collect(),
            stats: self.stats.clone(),
        };
        let text = toml::to_string(&manifest).context("serialising manifest")?;
        let path = self.opts.out_dir.join(&self.cfg.outputs.manifest);
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        let mut artifacts: Vec<PathBuf> = self.written.iter().map(|(p, _)| self.opts.out_dir.join(p)).collect();
        artifacts.push(path);
        Ok(RunReport { config_sha256: self.hash, artifacts, lines: self.lines })
    }
}

/// Values along an angle axis, one row per angle.
pub fn angle_series_csv(header: &[(String, String)], angles: &[f64], frequency: f64, values: &[[Complex; 4]]) -> String {
    let mut s = String::new();
    for (k, v) in header {
        let _ = writeln!(s, "# {k}: {v}");
    }
    s.push_str("angle_deg,frequency_hz,re_vv,im_vv,re_hh,im_hh,re_vh,im_vh,re_hv,im_hv\n");
    for (a, row) in angles.iter().zip(values) {
        let _ = write!(s, "{a:e},{frequency:e}");
        for c in row {
            let _ = write!(s, ",{:e},{:e}", c.re, c.im);
        }
        s.push('\n');
    }
    s
}

/// Reads either a frequency sweep CSV or an angle series CSV as `(axis, values)`.
pub fn read_series_csv(text: &str) -> Result<(Vec<f64>, Vec<[Complex; 4]>)> {
    let mut xs = Vec::new();
    let mut vals = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(|c: char| c.is_ascii_alphabetic()) {
            continue;
        }
        let nums = line.split(',').map(str::parse::<f64>).collect::<Result<Vec<_>, _>>().with_context(|| format!("line {}", i + 1))?;
        let first_value = match nums.len() {
            9 => 1,
            10 => 2,
            n => bail!("line {}: expected 9 or 10 columns, found {n}", i + 1),
        };
        xs.push(nums[0]);
        let mut row = [Complex::new(0.0, 0.0); 4];
        for (k, c) in row.iter_mut().enumerate() {
            *c = Complex::new(nums[first_value + 2 * k], nums[first_value + 1 + 2 * k]);
        }
        vals.push(row);
    }
    Ok((xs, vals))
}

fn db(v: Complex) -> f64 {
    10.0 * v.norm_sqr().max(1e-30).log10()
}

/// Mean over points of the squared dB difference for one polarization.
pub fn mean_squared_db_error(a: &[[Complex; 4]], b: &[[Complex; 4]], pol: Pol) -> f64 {
    let i = pol.index();
    let n = a.len().min(b.len()).max(1);
    a.iter().zip(b).map(|(x, y)| (db(x[i]) - db(y[i])).powi(2)).sum::<f64>() / n as f64
}

fn sweep_command(run: &mut Run) -> Result<()> {
    let freqs = run.cfg.frequency.grid();
    let (sweep, st) = run.solve(&run.cfg.radar(), &freqs, run.cfg.solver.mc.seed)?;
    let csv = sweep.to_csv(&run.header());
    let name = run.cfg.outputs.sweep_csv.clone();
    run.write(&name, csv.as_bytes())?;
    run.write_stats(&st)?;
    let pol = run.cfg.pol();
    let mean_db = (0..sweep.frequencies.len()).map(|i| sweep.rcs_dbsm(i, pol)).sum::<f64>() / sweep.frequencies.len() as f64;
    run.say(format!("{} frequencies, band-mean {} RCS {mean_db:.3} dBsm", freqs.len(), pol.name()));
    Ok(())
}

fn narrowband_frequency(cfg: &ExperimentConfig) -> f64 {
    cfg.angle_sweep.frequency_hz.unwrap_or(0.5 * (cfg.frequency.start_hz + cfg.frequency.stop_hz))
}

fn angle_sweep_command(run: &mut Run) -> Result<()> {
    let angles = run.cfg.angle_sweep.angles();
    let f = narrowband_frequency(&run.cfg);
    let (sweeps, st) = run.solve_angles(&angles, &[f], run.cfg.solver.mc.seed)?;
    let values: Vec<[Complex; 4]> = sweeps.iter().map(|s| s.values[0]).collect();
    let csv = angle_series_csv(&run.header(), &angles, f, &values);
    let name = run.cfg.outputs.angle_sweep_csv.clone();
    run.write(&name, csv.as_bytes())?;
    run.write_stats(&st)?;
    run.say(format!("{} angles at {:.4} GHz", angles.len(), f / 1e9));
    Ok(())
}

fn range_profile_command(run: &mut Run) -> Result<()> {
    let freqs = run.cfg.frequency.grid();
    let (sweep, st) = run.solve(&run.cfg.radar(), &freqs, run.cfg.solver.mc.seed)?;
    let header = run.header();
    let p = &run.cfg.profile;
    let profile = range_profile(&sweep, run.cfg.pol(), p.window, p.zero_pad)?;
    let (sweep_name, profile_name) = (run.cfg.outputs.sweep_csv.clone(), run.cfg.outputs.profile_csv.clone());
    run.write(&sweep_name, sweep.to_csv(&header).as_bytes())?;
    run.write(&profile_name, profile.to_csv(&header).as_bytes())?;
    run.write_stats(&st)?;
    let peaks: Vec<String> = profile.peaks(20.0).iter().take(5).map(|r| format!("{r:.3}")).collect();
    run.say(format!("bin {:.4} m, peaks within 20 dB at [{}] m", profile.bin_spacing(), peaks.join(", ")));
    Ok(())
}

fn isar_command(run: &mut Run) -> Result<()> {
    let angles = run.cfg.angle_sweep.angles();
    let freqs = run.cfg.frequency.grid();
    let (sweeps, st) = run.solve_angles(&angles, &freqs, run.cfg.solver.mc.seed)?;
    let image = isar(&sweeps, &angles, run.cfg.pol(), &run.cfg.isar)?;
    let header = run.header();
    let mut data = String::new();
    for (a, s) in angles.iter().zip(&sweeps) {
        let mut h = header.clone();
        h.push(("angle_deg".into(), format!("{a:e}")));
        data.push_str(&s.to_csv(&h));
    }
    let o = run.cfg.outputs.clone();
    run.write(&o.isar_data_csv, data.as_bytes())?;
    run.write(&o.isar_csv, image.to_csv(&header).as_bytes())?;
    run.write(&o.isar_pgm, &image.to_pgm(&header))?;
    run.write_stats(&st)?;
    let (dr, cr) = image.peak_position();
    run.say(format!("{}x{} data, peak at down-range {dr:.2} m, cross-range {cr:.2} m", freqs.len(), angles.len()));
    Ok(())
}

/// Reference and Monte Carlo series along the configured convergence axis.
fn convergence_series(run: &Run, seed: u64, mc_cfg: Option<&mc::McConfig>) -> Result<(Vec<f64>, Vec<[Complex; 4]>)> {
    let scene = &run.scene.scene;
    let w = run.opts.workers;
    let solve = |radar: &Radar, freqs: &[f64]| -> Result<SweepResult> {
        Ok(match mc_cfg {
            Some(c) => mc::estimate(scene, radar, freqs, &mc::McConfig { seed, ..c.clone() }, w)?.0,
            None => det::solve(scene, radar, freqs, &run.cfg.solver.deterministic, w)?.0,
        })
    };
    match run.cfg.convergence.axis {
        ConvergenceAxis::Frequency => {
            let freqs = run.cfg.frequency.grid();
            let s = solve(&run.cfg.radar(), &freqs)?;
            Ok((freqs, s.values))
        }
        ConvergenceAxis::Angle => {
            let angles = run.cfg.angle_sweep.angles();
            let f = narrowband_frequency(&run.cfg);
            let mut vals = Vec::with_capacity(angles.len());
            for a in &angles {
                let (t, p) = run.cfg.source_at(*a);
                vals.push(solve(&run.cfg.radar_at(t, p), &[f])?.values[0]);
            }
            Ok((angles, vals))
        }
    }
}

fn series_csv(run: &Run, header: &[(String, String)], xs: &[f64], vals: &[[Complex; 4]]) -> String {
    match run.cfg.convergence.axis {
        ConvergenceAxis::Frequency => {
            SweepResult { frequencies: xs.to_vec(), values: vals.to_vec(), meta: SweepMeta::default() }.to_csv(header)
        }
        ConvergenceAxis::Angle => angle_series_csv(header, xs, narrowband_frequency(&run.cfg), vals),
    }
}

fn convergence_command(run: &mut Run) -> Result<()> {
    let pol = run.cfg.pol();
    let conv = run.cfg.convergence.clone();
    let base_seed = run.cfg.solver.mc.seed;
    let (ref_x, ref_vals) = match &conv.reference_csv {
        Some(p) => {
            let path = run.base.join(p);
            let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            read_series_csv(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => convergence_series(run, 0, None)?,
    };
    let ref_header = run.header_for(if conv.reference_csv.is_some() { "file" } else { "deterministic" }, None);
    let text = series_csv(run, &ref_header, &ref_x, &ref_vals);
    run.write("sweeps/reference.csv", text.as_bytes())?;

    let mut table = String::new();
    let mut summary = String::new();
    for (k, v) in run.header() {
        let _ = writeln!(table, "# {k}: {v}");
        let _ = writeln!(summary, "# {k}: {v}");
    }
    table.push_str("strata_per_wavelength,samples_per_stratum,rays_per_wavelength,seed,mse_db2\n");
    summary.push_str("strata_per_wavelength,samples_per_stratum,rays_per_wavelength,seeds,mean_mse_db2,seed_mean_mse_db2,mean_seed_std_db\n");
    for &strata in &conv.strata_per_wavelength {
        for &spp in &conv.samples_per_stratum {
            let cfg = mc::McConfig { strata_per_wavelength: strata, samples_per_stratum: spp, ..run.cfg.solver.mc.clone() };
            let mut runs: Vec<Vec<[Complex; 4]>> = Vec::new();
            let mut mses = Vec::new();
            for k in 0..conv.seeds {
                let seed = base_seed.wrapping_add(k as u64);
                let (x, vals) = convergence_series(run, seed, Some(&cfg))?;
                if x.len() != ref_x.len() || x.iter().zip(&ref_x).any(|(a, b)| (a - b).abs() > 1e-6 * b.abs().max(1.0)) {
                    bail!("reference axis does not match the convergence axis");
                }
                let mse = mean_squared_db_error(&vals, &ref_vals, pol);
                let h = run.header_for("mc", Some(seed));
                let name = format!("sweeps/mc_s{strata}_n{spp}_seed{seed}.csv");
                let text = series_csv(run, &h, &x, &vals);
                run.write(&name, text.as_bytes())?;
                let _ = writeln!(table, "{strata},{spp},{:e},{seed},{mse:e}", cfg.rays_per_wavelength());
                mses.push(mse);
                runs.push(vals);
            }
            let n = runs.len() as f64;
            let idx = pol.index();
            let mean_vals: Vec<[Complex; 4]> = (0..ref_x.len())
                .map(|i| {
                    let mut m = [Complex::new(0.0, 0.0); 4];
                    for r in &runs {
                        for (a, b) in m.iter_mut().zip(&r[i]) {
                            *a += b / n;
                        }
                    }
                    m
                })
                .collect();
            let std_db = (0..ref_x.len())
                .map(|i| {
                    let d: Vec<f64> = runs.iter().map(|r| db(r[i][idx])).collect();
                    let mu = d.iter().sum::<f64>() / n;
                    (d.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (n - 1.0).max(1.0)).sqrt()
                })
                .sum::<f64>()
                / ref_x.len() as f64;
            let mean_mse = mses.iter().sum::<f64>() / n;
            let _ = writeln!(
                summary,
                "{strata},{spp},{:e},{},{mean_mse:e},{:e},{std_db:e}",
                cfg.rays_per_wavelength(),
                conv.seeds,
                mean_squared_db_error(&mean_vals, &ref_vals, pol)
            );
            run.say(format!("{strata} strata/lambda x {spp} spp: mean squared dB error {mean_mse:.4e}"));
        }
    }
    let o = run.cfg.outputs.clone();
    run.write(&o.convergence_csv, table.as_bytes())?;
    run.write(&o.convergence_summary_csv, summary.as_bytes())?;
    Ok(())
}

#[derive(Serialize)]
struct BenchTiming {
    max_bounce: u32,
    mc_strata_per_wavelength: f64,
    mc_samples_per_stratum: u32,
    det_rays_per_wavelength: f64,
    repeats: u32,
    warmups: u32,
    mc_wall_time_s: f64,
    det_wall_time_s: f64,
    time_ratio_mc_over_det: f64,
}

#[derive(Serialize)]
struct BenchTimingFile<'a> {
    command: &'a str,
    config_sha256: &'a str,
    workers: usize,
    rows: Vec<BenchTiming>,
}

fn timed<T>(warmups: u32, repeats: u32, mut f: impl FnMut() -> Result<T>) -> Result<(T, f64)> {
    for _ in 0..warmups {
        f()?;
    }
    let mut total = 0.0;
    let mut last = None;
    for _ in 0..repeats {
        let t = Instant::now();
        last = Some(f()?);
        total += t.elapsed().as_secs_f64();
    }
    Ok((last.expect("repeats >= 1"), total / repeats as f64))
}

fn bench_command(run: &mut Run) -> Result<()> {
    let freqs = run.cfg.frequency.grid();
    let radar = run.cfg.radar();
    let b = run.cfg.bench.clone();
    let scene = &run.scene.scene;
    let w = run.opts.workers;
    let mut csv = String::new();
    for (k, v) in run.header() {
        let _ = writeln!(csv, "# {k}: {v}");
    }
    csv.push_str("max_bounce,mc_strata_per_wavelength,mc_samples_per_stratum,det_rays_per_wavelength,mc_rays_launched,det_rays_launched,mc_peak_state_bytes,det_peak_state_bytes,peak_ratio_det_over_mc\n");
    let mut rows = Vec::new();
    let mut all_stats = Vec::new();
    let mut lines = Vec::new();
    for pair in &b.pairs {
        for &mb in &b.max_bounce {
            let mc_cfg = mc::McConfig {
                strata_per_wavelength: pair.strata_per_wavelength,
                samples_per_stratum: pair.samples_per_stratum,
                max_bounce: mb,
                ..run.cfg.solver.mc.clone()
            };
            let det_cfg = det::DetConfig {
                rays_per_wavelength: pair.det_rays_per_wavelength,
                max_bounce: mb,
                force_stack_accounting: b.force_stack_accounting,
                ..run.cfg.solver.deterministic.clone()
            };
            let (ms, mt) = timed(b.warmups, b.repeats, || Ok(mc::estimate(scene, &radar, &freqs, &mc_cfg, w)?.1))?;
            let (ds, dt) = timed(b.warmups, b.repeats, || Ok(det::solve(scene, &radar, &freqs, &det_cfg, w)?.1))?;
            let ratio = ds.peak_state_bytes as f64 / ms.peak_state_bytes.max(1) as f64;
            let _ = writeln!(
                csv,
                "{mb},{},{},{},{},{},{},{},{ratio:e}",
                pair.strata_per_wavelength,
                pair.samples_per_stratum,
                pair.det_rays_per_wavelength,
                ms.rays_launched,
                ds.rays_launched,
                ms.peak_state_bytes,
                ds.peak_state_bytes
            );
            let line = format!(
                "max_bounce {mb}: MC {:.3} s / {} B, deterministic {:.3} s / {} B (memory x{ratio:.1}, time x{:.2})",
                mt,
                ms.peak_state_bytes,
                dt,
                ds.peak_state_bytes,
                dt / mt.max(1e-12)
            );
            lines.push(line);
            rows.push(BenchTiming {
                max_bounce: mb,
                mc_strata_per_wavelength: pair.strata_per_wavelength,
                mc_samples_per_stratum: pair.samples_per_stratum,
                det_rays_per_wavelength: pair.det_rays_per_wavelength,
                repeats: b.repeats,
                warmups: b.warmups,
                mc_wall_time_s: mt,
                det_wall_time_s: dt,
                time_ratio_mc_over_det: mt / dt.max(1e-12),
            });
            all_stats.push(ms);
            all_stats.push(ds);
        }
    }
    let timing = BenchTimingFile { command: "bench", config_sha256: &run.hash, workers: w, rows };
    let timing_text = toml::to_string(&timing).context("serialising bench timings")?;
    let o = run.cfg.outputs.clone();
    run.write(&o.bench_csv, csv.as_bytes())?;
    run.write(&o.bench_timing, timing_text.as_bytes())?;
    run.stats.extend(all_stats);
    run.lines.extend(lines);
    Ok(())
}

fn oracle_command(run: &mut Run) -> Result<()> {
    let o = run.cfg.oracle;
    let freqs = run.cfg.frequency.grid();
    let values: Vec<[Complex; 4]> = freqs
        .iter()
        .map(|&f| {
            let v = match o.kind {
                OracleKind::Slab => {
                    let stack = LayerStack::slab(o.eps_r.sqrt(), o.thickness_m);
                    slab_sqrt_rcs(&stack, f, o.pec_backed, o.width_m * o.width_m, o.top_z_m)
                }
                // A conducting plate is a perfectly reflecting slab face.
                OracleKind::Plate => {
                    let k0 = 2.0 * std::f64::consts::PI * f / mcsbr::em::C0;
                    let amp = plate_rcs(o.thickness_m, o.width_m, mcsbr::em::C0 / f).sqrt();
                    Complex::new(0.0, -amp) * Complex::from_polar(1.0, 2.0 * k0 * o.top_z_m)
                }
                OracleKind::Sphere => Complex::new(sphere_go_rcs(o.radius_m).sqrt(), 0.0),
            };
            let zero = Complex::new(0.0, 0.0);
            [v, v, zero, zero]
        })
        .collect();
    let sweep = SweepResult { frequencies: freqs, values, meta: SweepMeta::default() };
    let mut header = run.header();
    let kind = match o.kind {
        OracleKind::Slab => "slab",
        OracleKind::Plate => "plate",
        OracleKind::Sphere => "sphere",
    };
    header.push(("oracle".into(), kind.into()));
    if o.kind == OracleKind::Sphere {
        header.push(("phase".into(), "not modelled".into()));
    }
    let name = run.cfg.outputs.oracle_csv.clone();
    run.write(&name, sweep.to_csv(&header).as_bytes())?;
    run.say(format!("{kind} oracle over {} frequencies", sweep.frequencies.len()));
    Ok(())
}

/// Loads the config, runs `command` and writes its artifacts and manifest.
pub fn run(command: Command, opts: RunOptions) -> Result<RunReport> {
    let started = Instant::now();
    let text = std::fs::read_to_string(&opts.config_path).with_context(|| format!("reading config {}", opts.config_path.display()))?;
    let mut cfg = config::parse(&text).with_context(|| format!("in {}", opts.config_path.display()))?;
    if let Some(s) = opts.seed {
        cfg.solver.mc.seed = s;
    }
    let base = opts.config_path.parent().map(Path::to_path_buf).unwrap_or_default();
    cfg.validate(&base).with_context(|| format!("in {}", opts.config_path.display()))?;
    let scene = config::load_scene(&cfg, &base)?;
    let hash = config::config_hash(&cfg, &scene.source)?;
    std::fs::create_dir_all(&opts.out_dir).with_context(|| format!("creating {}", opts.out_dir.display()))?;
    let mut run = Run { cfg, base, opts, command, scene, hash, written: Vec::new(), stats: Vec::new(), lines: Vec::new() };
    match command {
        Command::Sweep => sweep_command(&mut run)?,
        Command::AngleSweep => angle_sweep_command(&mut run)?,
        Command::RangeProfile => range_profile_command(&mut run)?,
        Command::Isar => isar_command(&mut run)?,
        Command::Convergence => convergence_command(&mut run)?,
        Command::Bench => bench_command(&mut run)?,
        Command::Oracle => oracle_command(&mut run)?,
    }
    run.finish(started)
}

/// Writes a built-in scene as `<name>.obj` and `<name>.materials.toml`.
pub fn write_scene(scene: &config::SceneConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let name = scene.builtin.clone().context("scene name missing")?;
    let cfg = ExperimentConfig { scene: scene.clone(), ..Default::default() };
    let loaded = config::load_scene(&cfg, Path::new("."))?;
    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let obj = out_dir.join(format!("{name}.obj"));
    let map = out_dir.join(format!("{name}.materials.toml"));
    std::fs::write(&obj, loaded.source.obj_text()).with_context(|| format!("writing {}", obj.display()))?;
    std::fs::write(&map, &loaded.source.material_map).with_context(|| format!("writing {}", map.display()))?;
    Ok(vec![obj, map])
}
