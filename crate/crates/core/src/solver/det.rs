//! Deterministic baseline: one ray per launch-grid cell centre, every reflect and
//! transmit branch explored depth-first from an explicit stack of path snapshots,
//! midpoint-rule weighting by cell area.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mc::{build_strata, StrataGrid};
use super::{with_pool, ContributionSink, RunStats, SolverError, Step, Tracer, RAYS_PER_CHUNK};
use crate::em::C0;
use crate::farfield::{Contribution, SweepAccumulator, SweepMeta, SweepResult};
use crate::geometry::{launch_rect, Scene};
use crate::path::{take_branch, PathState};
use crate::radar::Radar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetConfig {
    pub rays_per_wavelength: f64,
    pub max_bounce: u32,
    /// Branches whose field magnitude falls below this fraction of the incident one are dropped.
    pub amplitude_cutoff: f64,
    /// Charge every junction snapshot to the memory counter, as a copy-per-branch
    /// implementation would, instead of only the live stack depth.
    pub force_stack_accounting: bool,
    pub reference_wavelength_m: Option<f64>,
    pub padding_m: f64,
    pub occlusion: bool,
}

impl Default for DetConfig {
    fn default() -> Self {
        Self {
            rays_per_wavelength: 20.0,
            max_bounce: 9,
            amplitude_cutoff: 0.0,
            force_stack_accounting: false,
            reference_wavelength_m: None,
            padding_m: 0.0,
            occlusion: true,
        }
    }
}

impl DetConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: &str| Err(SolverError::Config(m.to_string()));
        if !(self.rays_per_wavelength > 0.0 && self.rays_per_wavelength.is_finite()) {
            return bad("rays_per_wavelength must be > 0");
        }
        if self.max_bounce < 1 {
            return bad("max_bounce must be >= 1");
        }
        if !(self.amplitude_cutoff >= 0.0 && self.amplitude_cutoff.is_finite()) {
            return bad("amplitude_cutoff must be >= 0");
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
}

const STATE_BYTES: u64 = std::mem::size_of::<PathState>() as u64;

/// Pending branches of one launch ray, with an instrumented byte counter.
#[derive(Debug, Default)]
pub struct BranchStack {
    saved: Vec<PathState>,
    forced: bool,
    /// Snapshots taken since the last reset; only grows.
    snapshots: u64,
    peak_bytes: u64,
}

impl BranchStack {
    pub fn new(forced: bool) -> Self {
        Self { forced, ..Default::default() }
    }

    /// Starts a new launch ray; the counter restarts at one in-flight state.
    pub fn reset(&mut self) {
        self.saved.clear();
        self.snapshots = 0;
        self.peak_bytes = STATE_BYTES;
    }

    pub fn push(&mut self, s: PathState) {
        self.saved.push(s);
        self.snapshots += 1;
        let held = if self.forced { self.snapshots } else { self.saved.len() as u64 };
        self.peak_bytes = self.peak_bytes.max((held + 1) * STATE_BYTES);
    }

    pub fn pop(&mut self) -> Option<PathState> {
        self.saved.pop()
    }

    pub fn depth(&self) -> usize {
        self.saved.len()
    }

    pub fn peak_bytes(&self) -> u64 {
        self.peak_bytes
    }
}

fn field_magnitude(s: &PathState) -> f64 {
    s.e.iter().map(|e| e.norm()).fold(0.0, f64::max)
}

struct Setup<'a> {
    tracer: Tracer<'a>,
    grid: StrataGrid,
    cfg: &'a DetConfig,
}

fn setup<'a>(scene: &'a Scene, radar: &Radar, frequencies: &[f64], cfg: &'a DetConfig) -> Result<Setup<'a>, SolverError> {
    cfg.validate()?;
    if frequencies.is_empty() || frequencies.iter().any(|f| f.is_nan() || *f <= 0.0) {
        return Err(SolverError::Config("frequency list must be non-empty and positive".into()));
    }
    let fmax = frequencies.iter().cloned().fold(0.0, f64::max);
    let wavelength = cfg.reference_wavelength_m.unwrap_or(C0 / fmax);
    let rect = launch_rect(scene, radar.k_inc, cfg.padding_m);
    let grid = build_strata(&rect, cfg.rays_per_wavelength, wavelength);
    Ok(Setup { tracer: Tracer::new(scene, *radar, cfg.occlusion), grid, cfg })
}

fn trace_ray(s: &Setup<'_>, cell: usize, stack: &mut BranchStack, stats: &mut RunStats, sink: &mut impl ContributionSink) {
    let pdf = s.grid.pdf_per_cell;
    let cutoff = s.cfg.amplitude_cutoff;
    stack.reset();
    let mut current = Some(s.tracer.launch(s.grid.center(cell)));
    while let Some(state) = current.take().or_else(|| stack.pop()) {
        let Step::Arrived { state, junction } = s.tracer.step(&state, pdf, stats, sink) else {
            continue;
        };
        if state.bounce >= s.cfg.max_bounce {
            stats.killed_at_cap += 1;
            continue;
        }
        // Reflection is explored first; the other branch waits on the stack.
        for (i, o) in junction.outcomes.iter().enumerate().rev() {
            let next = take_branch(&state, o, 1.0);
            if cutoff > 0.0 && field_magnitude(&next) < cutoff {
                stats.killed_cutoff += 1;
                continue;
            }
            if i == 0 {
                current = Some(next);
            } else {
                stack.push(next);
            }
        }
    }
}

fn run_chunk(s: &Setup<'_>, first: usize, last: usize, sink: &mut impl ContributionSink) -> RunStats {
    let mut stats = RunStats { rays_launched: (last - first) as u64, ..Default::default() };
    let mut stack = BranchStack::new(s.cfg.force_stack_accounting);
    // Every ray of a chunk is in flight at once on parallel hardware, so their stacks add up.
    let mut chunk_bytes = 0;
    for cell in first..last {
        trace_ray(s, cell, &mut stack, &mut stats, sink);
        chunk_bytes += stack.peak_bytes();
    }
    stats.peak_state_bytes = chunk_bytes;
    stats
}

fn run_all<S: ContributionSink + Send>(
    s: &Setup<'_>,
    workers: usize,
    new_sink: impl Fn() -> S + Sync + Send,
) -> Result<Vec<(S, RunStats)>, SolverError> {
    let total = s.grid.len();
    let n_chunks = total.div_ceil(RAYS_PER_CHUNK);
    with_pool(workers, || {
        (0..n_chunks)
            .into_par_iter()
            .map(|c| {
                let mut sink = new_sink();
                let st = run_chunk(s, c * RAYS_PER_CHUNK, ((c + 1) * RAYS_PER_CHUNK).min(total), &mut sink);
                (sink, st)
            })
            .collect()
    })
}

fn finish_stats(s: &Setup<'_>, parts: impl Iterator<Item = RunStats>, workers: usize, started: Instant) -> RunStats {
    let mut stats = RunStats {
        solver: "deterministic".into(),
        seed: None,
        workers,
        launch_grid: (s.grid.nu as u64, s.grid.nv as u64),
        rays_per_wavelength: s.cfg.rays_per_wavelength,
        ..Default::default()
    };
    for p in parts {
        stats.absorb(&p);
    }
    stats.wall_time_s = started.elapsed().as_secs_f64();
    stats
}

/// Exhaustive branch-tree evaluation of the scattered field over `frequencies`.
pub fn solve(
    scene: &Scene,
    radar: &Radar,
    frequencies: &[f64],
    cfg: &DetConfig,
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
        solver: "deterministic".into(),
        seed: None,
        rays_launched: stats.rays_launched,
        contributions: 0,
    });
    Ok((sweep, stats))
}

/// Runs the solver and returns every contribution in launch then depth-first order.
pub fn trace_contributions(
    scene: &Scene,
    radar: &Radar,
    frequencies: &[f64],
    cfg: &DetConfig,
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

/// The launch grid `solve` would use.
pub fn grid_for(scene: &Scene, radar: &Radar, frequencies: &[f64], cfg: &DetConfig) -> Result<StrataGrid, SolverError> {
    Ok(setup(scene, radar, frequencies, cfg)?.grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Vec3;

    fn state() -> PathState {
        crate::path::init_path(Vec3::zero(), Vec3::new(0.0, 0.0, -1.0), [crate::ComplexVec3::zero(); 2], 1.0)
    }

    #[test]
    fn stack_counts_live_depth() {
        let mut st = BranchStack::new(false);
        st.reset();
        assert_eq!(st.peak_bytes(), STATE_BYTES);
        st.push(state());
        st.push(state());
        st.pop();
        st.push(state());
        assert_eq!(st.depth(), 2);
        assert_eq!(st.peak_bytes(), 3 * STATE_BYTES);
        st.reset();
        assert_eq!(st.peak_bytes(), STATE_BYTES);
    }

    #[test]
    fn forced_accounting_charges_every_snapshot() {
        let mut st = BranchStack::new(true);
        st.reset();
        for _ in 0..5 {
            st.push(state());
            st.pop();
        }
        assert_eq!(st.depth(), 0);
        assert_eq!(st.peak_bytes(), 6 * STATE_BYTES);
    }

    #[test]
    fn config_validation() {
        assert!(DetConfig::default().validate().is_ok());
        assert!(DetConfig { rays_per_wavelength: 0.0, ..Default::default() }.validate().is_err());
        assert!(DetConfig { max_bounce: 0, ..Default::default() }.validate().is_err());
        assert!(DetConfig { amplitude_cutoff: -1.0, ..Default::default() }.validate().is_err());
    }
}
