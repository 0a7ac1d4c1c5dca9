//! Solvers: the Monte Carlo path-space estimator and the deterministic branch-tree baseline.

pub mod det;
pub mod mc;

use serde::Serialize;

use crate::farfield::{chi_visibility, junction_currents, make_contribution, Contribution, CurrentCase, SweepAccumulator};
use crate::geometry::Scene;
use crate::path::{advance, branch_outcomes, init_path, Junction, PathKill, PathState};
use crate::radar::Radar;
use crate::Vec3;

/// Launch rays handled together by one worker; fixed so results do not depend on the worker count.
pub const RAYS_PER_CHUNK: usize = 4096;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("worker pool: {0}")]
    Pool(String),
}

/// Receives contributions as they are produced.
pub trait ContributionSink {
    fn push(&mut self, c: &Contribution);
}

impl ContributionSink for SweepAccumulator {
    fn push(&mut self, c: &Contribution) {
        self.add(c);
    }
}

impl ContributionSink for Vec<Contribution> {
    fn push(&mut self, c: &Contribution) {
        Vec::push(self, *c);
    }
}

/// Both kinds of sink at once, used when a caller wants the raw contributions too.
impl<A: ContributionSink, B: ContributionSink> ContributionSink for (A, B) {
    fn push(&mut self, c: &Contribution) {
        self.0.push(c);
        self.1.push(c);
    }
}

/// Counters shared by both solvers.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunStats {
    pub solver: String,
    pub seed: Option<u64>,
    pub workers: usize,
    pub rays_launched: u64,
    pub launch_grid: (u64, u64),
    pub rays_per_wavelength: f64,
    /// Ray casts performed at each bounce depth (index 0 is the launch segment).
    pub rays_per_bounce: Vec<u64>,
    pub contributions: u64,
    pub hidden_arrivals: u64,
    pub misses: u64,
    pub killed_grazing: u64,
    pub killed_numerical: u64,
    pub killed_roulette: u64,
    pub killed_at_cap: u64,
    pub killed_cutoff: u64,
    /// Instrumented peak of live path-state storage.
    pub peak_state_bytes: u64,
    pub wall_time_s: f64,
}

impl RunStats {
    pub(crate) fn count_cast(&mut self, bounce: u32) {
        let b = bounce as usize;
        if self.rays_per_bounce.len() <= b {
            self.rays_per_bounce.resize(b + 1, 0);
        }
        self.rays_per_bounce[b] += 1;
    }

    /// Adds counters from another partial run.
    pub fn absorb(&mut self, o: &RunStats) {
        if self.rays_per_bounce.len() < o.rays_per_bounce.len() {
            self.rays_per_bounce.resize(o.rays_per_bounce.len(), 0);
        }
        for (a, b) in self.rays_per_bounce.iter_mut().zip(&o.rays_per_bounce) {
            *a += b;
        }
        self.rays_launched += o.rays_launched;
        self.contributions += o.contributions;
        self.hidden_arrivals += o.hidden_arrivals;
        self.misses += o.misses;
        self.killed_grazing += o.killed_grazing;
        self.killed_numerical += o.killed_numerical;
        self.killed_roulette += o.killed_roulette;
        self.killed_at_cap += o.killed_at_cap;
        self.killed_cutoff += o.killed_cutoff;
        self.peak_state_bytes = self.peak_state_bytes.max(o.peak_state_bytes);
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).unwrap_or_default()
    }
}

/// Result of tracing one segment of a path.
#[allow(clippy::large_enum_variant)]
pub(crate) enum Step {
    Miss,
    Killed,
    /// The path reached a surface; `state` has been advanced onto it.
    Arrived { state: PathState, junction: Junction },
}

/// Scene, radar and receiver options bundled for the inner loop.
pub(crate) struct Tracer<'a> {
    pub scene: &'a Scene,
    pub radar: Radar,
    pub occlusion: bool,
    eps: f64,
}

impl<'a> Tracer<'a> {
    pub fn new(scene: &'a Scene, radar: Radar, occlusion: bool) -> Self {
        Self { scene, radar, occlusion, eps: scene.epsilon() }
    }

    pub fn launch(&self, p1: Vec3) -> PathState {
        let e0 = [self.radar.tx[0].to_complex(), self.radar.tx[1].to_complex()];
        init_path(p1, self.radar.k_inc, e0, self.scene.ambient_index())
    }

    /// Casts the next segment, emits the arrival's contribution when the surface is
    /// visible to the receiver, and lists the possible continuations.
    pub fn step(&self, state: &PathState, pdf_area: f64, stats: &mut RunStats, sink: &mut impl ContributionSink) -> Step {
        stats.count_cast(state.bounce);
        let origin = if state.bounce == 0 { state.origin } else { state.origin + state.dir * self.eps };
        let Some(hit) = self.scene.intersect(origin, state.dir, 0.0) else {
            stats.misses += 1;
            return Step::Miss;
        };
        let st = advance(state, &hit);
        let junction = match branch_outcomes(&st, &hit) {
            Ok(j) => j,
            Err(PathKill::Grazing) => {
                stats.killed_grazing += 1;
                return Step::Killed;
            }
            Err(PathKill::Numerical) => {
                stats.killed_numerical += 1;
                return Step::Killed;
            }
        };
        if CurrentCase::of(&hit).is_some() {
            if chi_visibility(self.scene, &hit, self.radar.k_scatter, self.occlusion) {
                if let Some(c) = junction_currents(&st, &hit, &junction).and_then(|cur| make_contribution(&st, &hit, &cur, pdf_area)) {
                    stats.contributions += 1;
                    sink.push(&c);
                }
            } else {
                stats.hidden_arrivals += 1;
            }
        }
        Step::Arrived { state: st, junction }
    }
}

/// Runs `f` on a pool of `workers` threads (0 = all cores).
pub(crate) fn with_pool<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> Result<R, SolverError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| SolverError::Pool(e.to_string()))?;
    Ok(pool.install(f))
}

/// Number of cells of side at most `target` tiling `extent`.
pub(crate) fn cells_along(extent: f64, target: f64) -> usize {
    let n = (extent / target * (1.0 - 1e-12)).ceil();
    (n as usize).max(1)
}
