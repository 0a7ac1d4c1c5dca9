//! Monte Carlo path-space estimator: stratified launch, one sampled continuation per
//! hit with Fresnel or uniform branch probabilities, Russian roulette, executed as a
//! wavefront over fixed chunks of launch samples.

use std::time::Instant;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{cells_along, with_pool, ContributionSink, RunStats, SolverError, Step, Tracer, RAYS_PER_CHUNK};
use crate::em::C0;
use crate::farfield::{Contribution, SweepAccumulator, SweepMeta, SweepResult};
use crate::geometry::{launch_rect, LaunchRect, Scene};
use crate::path::{take_branch, Junction, PathState};
use crate::radar::Radar;
use crate::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchStrategy {
    FiftyFifty,
    Fresnel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RouletteConfig {
    pub enabled: bool,
    /// Termination probability once past `min_bounce`.
    pub q: f64,
    pub min_bounce: u32,
}

impl Default for RouletteConfig {
    fn default() -> Self {
        Self { enabled: true, q: 0.5, min_bounce: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McConfig {
    pub strata_per_wavelength: f64,
    pub samples_per_stratum: u32,
    pub branch_strategy: BranchStrategy,
    /// Lower clamp on either branch probability under Fresnel sampling.
    pub p_min: f64,
    pub roulette: RouletteConfig,
    /// Hard cap on surface hits per path.
    pub max_bounce: u32,
    pub seed: u64,
    /// Wavelength setting the stratum size; defaults to the shortest in the sweep.
    pub reference_wavelength_m: Option<f64>,
    pub padding_m: f64,
    /// Test receiver visibility along the scattering direction.
    pub occlusion: bool,
    /// Sample uniformly inside each stratum; when off, every sample sits at the centre.
    pub jitter: bool,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            strata_per_wavelength: 10.0,
            samples_per_stratum: 16,
            branch_strategy: BranchStrategy::Fresnel,
            p_min: 0.05,
            roulette: RouletteConfig::default(),
            max_bounce: 9,
            seed: 0,
            reference_wavelength_m: None,
            padding_m: 0.0,
            occlusion: true,
            jitter: true,
        }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: &str| Err(SolverError::Config(m.to_string()));
        if !(self.strata_per_wavelength > 0.0 && self.strata_per_wavelength.is_finite()) {
            return bad("strata_per_wavelength must be > 0");
        }
        if self.samples_per_stratum == 0 {
            return bad("samples_per_stratum must be >= 1");
        }
        if !(self.p_min >= 0.0 && self.p_min < 0.5) {
            return bad("p_min must lie in [0, 0.5)");
        }
        if !(self.roulette.q > 0.0 && self.roulette.q < 1.0) {
            return bad("roulette.q must lie in (0, 1)");
        }
        if self.roulette.min_bounce < 1 {
            return bad("roulette.min_bounce must be >= 1");
        }
        if self.max_bounce < 1 {
            return bad("max_bounce must be >= 1");
        }
        if let Some(l) = self.reference_wavelength_m {
            if !(l > 0.0 && l.is_finite()) {
                return bad("reference_wavelength_m must be > 0");
            }
        }
        if self.padding_m.is_nan() || self.padding_m < 0.0 {
            return bad("padding_m must be >= 0");
        }
        Ok(())
    }

    /// Effective ray density: strata per wavelength times the square root of samples per stratum.
    pub fn rays_per_wavelength(&self) -> f64 {
        self.strata_per_wavelength * (self.samples_per_stratum as f64).sqrt()
    }
}

/// Launch aperture cut into equal cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrataGrid {
    pub rect: LaunchRect,
    pub nu: usize,
    pub nv: usize,
    pub cell_area: f64,
    pub pdf_per_cell: f64,
}

impl StrataGrid {
    pub fn len(&self) -> usize {
        self.nu * self.nv
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cell `(iu, iv)` of flat index `i`.
    pub fn cell(&self, i: usize) -> (usize, usize) {
        (i % self.nu, i / self.nu)
    }

    pub fn center(&self, i: usize) -> Vec3 {
        let (iu, iv) = self.cell(i);
        self.rect.point((iu as f64 + 0.5) / self.nu as f64, (iv as f64 + 0.5) / self.nv as f64)
    }
}

/// Cells no larger than `wavelength / strata_per_wavelength` on a side.
pub fn build_strata(rect: &LaunchRect, strata_per_wavelength: f64, wavelength: f64) -> StrataGrid {
    let target = wavelength / strata_per_wavelength;
    let nu = cells_along(2.0 * rect.half_extents.0, target);
    let nv = cells_along(2.0 * rect.half_extents.1, target);
    let cell_area = rect.area / (nu * nv) as f64;
    StrataGrid { rect: *rect, nu, nv, cell_area, pdf_per_cell: 1.0 / cell_area }
}

/// Independent generator for one `(seed, a, b)` key and stream.
pub fn keyed_rng(seed: u64, a: u64, b: u64, stream: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&a.to_le_bytes());
    key[16..24].copy_from_slice(&b.to_le_bytes());
    let mut r = ChaCha8Rng::from_seed(key);
    r.set_stream(stream);
    r
}

const POSITION_STREAM: u64 = u64::MAX;

/// Uniform point in the cell, from a stream keyed by `(seed, cell, sample)`.
pub fn sample_stratum(grid: &StrataGrid, cell: usize, seed: u64, sample: u32) -> (Vec3, f64) {
    let (iu, iv) = grid.cell(cell);
    let mut rng = keyed_rng(seed, cell as u64, sample as u64, POSITION_STREAM);
    let (a, b): (f64, f64) = (rng.gen(), rng.gen());
    let p = grid.rect.point((iu as f64 + a) / grid.nu as f64, (iv as f64 + b) / grid.nv as f64);
    (p, grid.pdf_per_cell)
}

/// Number of decision dimensions drawn from the low-discrepancy sequence.
const QMC_DIMS: usize = 32;

/// Two generators per dimension, one for each launch-grid axis.
const PRIMES: [u64; 2 * QMC_DIMS] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113,
    127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191, 193, 197, 199, 211, 223, 227, 229, 233, 239, 241, 251,
    257, 263, 269, 271, 277, 281, 283, 293, 307, 311,
];

fn frac_sqrt_fixed(p: u64) -> u64 {
    let s = (p as f64).sqrt();
    ((s - s.floor()) * 2f64.powi(64)) as u64
}

/// Branch and roulette decisions. Dimension `d` for the stratum in grid cell
/// `(a, b)` and sample `s` is `frac(a·√p + b·√q + Δ(seed, s, d))` with a distinct
/// prime pair per dimension: a two-dimensional Kronecker lattice over the launch grid
/// with an independent uniform shift per sample and dimension. Every decision is
/// uniformly distributed and samples are independent, while decisions are spread
/// evenly over any patch of the grid. Dimensions past the table fall back to keyed
/// streams.
pub struct DecisionStreams {
    seed: u64,
    nu: u64,
    alphas: [(u64, u64); QMC_DIMS],
    shifts: Vec<[u64; QMC_DIMS]>,
}

impl DecisionStreams {
    /// Streams for a launch grid `nu` cells wide.
    pub fn new(seed: u64, samples: u32, nu: usize) -> Self {
        let mut alphas = [(0u64, 0u64); QMC_DIMS];
        for (d, a) in alphas.iter_mut().enumerate() {
            *a = (frac_sqrt_fixed(PRIMES[2 * d]), frac_sqrt_fixed(PRIMES[2 * d + 1]));
        }
        let shifts = (0..samples)
            .map(|s| {
                let mut row = [0u64; QMC_DIMS];
                for (d, slot) in row.iter_mut().enumerate() {
                    *slot = keyed_rng(seed, u64::MAX, s as u64, d as u64).next_u64();
                }
                row
            })
            .collect();
        Self { seed, nu: nu.max(1) as u64, alphas, shifts }
    }

    /// Decision variable in `[0, 1)`.
    #[inline]
    pub fn uniform(&self, stratum: u64, sample: u32, dim: usize) -> f64 {
        let bits = if dim < QMC_DIMS {
            let (a, b) = (stratum % self.nu, stratum / self.nu);
            let (x, y) = self.alphas[dim];
            a.wrapping_mul(x).wrapping_add(b.wrapping_mul(y)).wrapping_add(self.shifts[sample as usize][dim])
        } else {
            keyed_rng(self.seed, stratum, sample as u64, dim as u64).next_u64()
        };
        (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

fn branch_dim(bounce: u32) -> usize {
    2 * (bounce.max(1) as usize - 1)
}

/// Picks one continuation. Returns its index and the probability of having picked it.
pub fn choose_branch(junction: &Junction, strategy: BranchStrategy, p_min: f64, u: f64) -> (usize, f64) {
    if junction.outcomes.len() < 2 {
        return (0, 1.0);
    }
    let p_reflect = match strategy {
        BranchStrategy::FiftyFifty => 0.5,
        BranchStrategy::Fresnel => junction.coeffs.mean_reflectance().clamp(p_min, 1.0 - p_min),
    };
    if u < p_reflect {
        (0, p_reflect)
    } else {
        (1, 1.0 - p_reflect)
    }
}

/// Russian roulette on a path that has made `state.bounce` hits. Survivors are
/// reweighted by `1/(1−q)`; `None` means the path is terminated.
pub fn roulette_step(state: PathState, cfg: &RouletteConfig, u: f64) -> Option<PathState> {
    if !cfg.enabled || state.bounce < cfg.min_bounce {
        return Some(state);
    }
    if u < cfg.q {
        return None;
    }
    Some(PathState { weight: state.weight / (1.0 - cfg.q), ..state })
}

#[derive(Clone, Copy)]
struct Live {
    state: PathState,
    stratum: u64,
    sample: u32,
}

struct Setup<'a> {
    tracer: Tracer<'a>,
    grid: StrataGrid,
    cfg: &'a McConfig,
    decisions: DecisionStreams,
}

fn setup<'a>(scene: &'a Scene, radar: &Radar, frequencies: &[f64], cfg: &'a McConfig) -> Result<Setup<'a>, SolverError> {
    cfg.validate()?;
    if frequencies.is_empty() || frequencies.iter().any(|f| f.is_nan() || *f <= 0.0) {
        return Err(SolverError::Config("frequency list must be non-empty and positive".into()));
    }
    let fmax = frequencies.iter().cloned().fold(0.0, f64::max);
    let wavelength = cfg.reference_wavelength_m.unwrap_or(C0 / fmax);
    let rect = launch_rect(scene, radar.k_inc, cfg.padding_m);
    let grid = build_strata(&rect, cfg.strata_per_wavelength, wavelength);
    if grid.is_empty() {
        return Err(SolverError::Config("launch aperture has no strata".into()));
    }
    Ok(Setup {
        tracer: Tracer::new(scene, *radar, cfg.occlusion),
        grid,
        cfg,
        decisions: DecisionStreams::new(cfg.seed, cfg.samples_per_stratum, grid.nu),
    })
}

fn run_chunk(s: &Setup<'_>, first: u64, last: u64, sink: &mut impl ContributionSink) -> RunStats {
    let spp = s.cfg.samples_per_stratum as u64;
    let mut stats = RunStats::default();
    let mut live: Vec<Live> = (first..last)
        .map(|idx| {
            let stratum = idx / spp;
            let sample = (idx % spp) as u32;
            let p = if s.cfg.jitter {
                sample_stratum(&s.grid, stratum as usize, s.cfg.seed, sample).0
            } else {
                s.grid.center(stratum as usize)
            };
            Live { state: s.tracer.launch(p), stratum, sample }
        })
        .collect();
    stats.rays_launched = live.len() as u64;
    stats.peak_state_bytes = (live.len() * std::mem::size_of::<PathState>()) as u64;
    // each stratum's estimate averages its samples
    let pdf = s.grid.pdf_per_cell * spp as f64;

    while !live.is_empty() {
        let mut w = 0;
        for r in 0..live.len() {
            let l = live[r];
            let Step::Arrived { state, junction, .. } = s.tracer.step(&l.state, pdf, &mut stats, sink) else {
                continue;
            };
            if state.bounce >= s.cfg.max_bounce {
                stats.killed_at_cap += 1;
                continue;
            }
            let dim = branch_dim(state.bounce);
            let u = s.decisions.uniform(l.stratum, l.sample, dim);
            let (pick, prob) = choose_branch(&junction, s.cfg.branch_strategy, s.cfg.p_min, u);
            let next = take_branch(&state, &junction.outcomes[pick], prob);
            let u = s.decisions.uniform(l.stratum, l.sample, dim + 1);
            let Some(next) = roulette_step(next, &s.cfg.roulette, u) else {
                stats.killed_roulette += 1;
                continue;
            };
            live[w] = Live { state: next, ..l };
            w += 1;
        }
        live.truncate(w);
    }
    stats
}

fn run_all<S: ContributionSink + Send>(
    s: &Setup<'_>,
    workers: usize,
    new_sink: impl Fn() -> S + Sync + Send,
) -> Result<Vec<(S, RunStats)>, SolverError> {
    let total = (s.grid.len() as u64) * s.cfg.samples_per_stratum as u64;
    let chunk = RAYS_PER_CHUNK as u64;
    let n_chunks = total.div_ceil(chunk);
    with_pool(workers, || {
        (0..n_chunks)
            .into_par_iter()
            .map(|c| {
                let mut sink = new_sink();
                let st = run_chunk(s, c * chunk, ((c + 1) * chunk).min(total), &mut sink);
                (sink, st)
            })
            .collect()
    })
}

fn finish_stats(s: &Setup<'_>, parts: impl Iterator<Item = RunStats>, workers: usize, started: Instant) -> RunStats {
    let mut stats = RunStats {
        solver: "mc".into(),
        seed: Some(s.cfg.seed),
        workers,
        launch_grid: (s.grid.nu as u64, s.grid.nv as u64),
        rays_per_wavelength: s.cfg.rays_per_wavelength(),
        ..Default::default()
    };
    for p in parts {
        stats.absorb(&p);
    }
    stats.wall_time_s = started.elapsed().as_secs_f64();
    stats
}

/// Monte Carlo estimate of the scattered field over `frequencies`.
/// `workers = 0` uses every available core; the result does not depend on it.
pub fn estimate(
    scene: &Scene,
    radar: &Radar,
    frequencies: &[f64],
    cfg: &McConfig,
    workers: usize,
) -> Result<(SweepResult, RunStats), SolverError> {
    let started = Instant::now();
    let s = setup(scene, radar, frequencies, cfg)?;
    let proto = SweepAccumulator::new(frequencies, radar);
    let parts = run_all(&s, workers, || proto.fresh())?;
    let mut acc = proto.fresh();
    for (a, _) in &parts {
        acc.merge(a);
    }
    let stats = finish_stats(&s, parts.into_iter().map(|p| p.1), workers, started);
    let sweep = acc.finish(SweepMeta {
        solver: "mc".into(),
        seed: Some(cfg.seed),
        rays_launched: stats.rays_launched,
        contributions: 0,
    });
    Ok((sweep, stats))
}

/// Runs the estimator and returns every contribution in a fixed order.
pub fn trace_contributions(
    scene: &Scene,
    radar: &Radar,
    frequencies: &[f64],
    cfg: &McConfig,
    workers: usize,
) -> Result<(Vec<Contribution>, RunStats), SolverError> {
    let started = Instant::now();
    let s = setup(scene, radar, frequencies, cfg)?;
    let parts = run_all(&s, workers, Vec::new)?;
    let mut all = Vec::new();
    let mut stat_parts = Vec::with_capacity(parts.len());
    for (v, st) in parts {
        all.extend(v);
        stat_parts.push(st);
    }
    Ok((all, finish_stats(&s, stat_parts.into_iter(), workers, started)))
}

/// The strata grid `estimate` would use.
pub fn strata_for(scene: &Scene, radar: &Radar, frequencies: &[f64], cfg: &McConfig) -> Result<StrataGrid, SolverError> {
    Ok(setup(scene, radar, frequencies, cfg)?.grid)
}
