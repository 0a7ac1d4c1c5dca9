//! Geometric-optics ray state shared by both solvers: phase accumulation, interface
//! transforms and branch bookkeeping. The engine lists the possible continuations at
//! a surface and never chooses between them.

use arrayvec::ArrayVec;

use crate::em::{fresnel, interface_transform, refract, sp_basis, BranchKind, InterfaceCoefficients, Refraction};
use crate::geometry::Hit;
use crate::{ComplexVec3, Vec3};

/// Cosine below which a surface interaction is treated as grazing and the path dropped.
pub const GRAZING_COS: f64 = 1e-6;

/// Number of simultaneously tracked transmit polarizations (vertical, horizontal).
pub const TX_POLS: usize = 2;

/// One ray of a path being traced.
///
/// The field is carried for both transmit polarizations at once; branch choices never
/// depend on it, so a single trace serves the whole polarization matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathState {
    pub origin: Vec3,
    pub dir: Vec3,
    pub e: [ComplexVec3; TX_POLS],
    /// Optical path length in metres.
    pub phi: f64,
    pub prob: f64,
    pub weight: f64,
    pub bounce: u32,
    pub medium_n: f64,
    pub alive: bool,
    /// Bit `i` set when the branch taken at hit `i` was a transmission.
    pub history: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchOutcome {
    pub kind: BranchKind,
    pub new_dir: Vec3,
    pub new_e: [ComplexVec3; TX_POLS],
    pub new_n: f64,
    pub branch_prob: f64,
}

/// Everything a solver needs to pick a continuation at one hit.
#[derive(Debug, Clone)]
pub struct Junction {
    pub coeffs: InterfaceCoefficients<f64>,
    pub outcomes: ArrayVec<BranchOutcome, 2>,
}

/// Reasons a path stops before reaching a contribution or miss.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathKill {
    Grazing,
    Numerical,
}

/// Starts a path at `p1` on the launch plane. The phase is measured from the coordinate origin.
pub fn init_path(p1: Vec3, k_inc: Vec3, e0: [ComplexVec3; TX_POLS], ambient_n: f64) -> PathState {
    PathState {
        origin: p1,
        dir: k_inc,
        e: e0,
        phi: ambient_n * k_inc.dot(p1),
        prob: 1.0,
        weight: 1.0,
        bounce: 0,
        medium_n: ambient_n,
        alive: true,
        history: 0,
    }
}

/// Moves the ray to the hit point, adding the optical length of the segment.
#[inline]
pub fn advance(state: &PathState, hit: &Hit) -> PathState {
    let mut s = *state;
    s.phi += state.medium_n * (hit.point - state.origin).norm();
    s.origin = hit.point;
    s.bounce += 1;
    s
}

/// Lists the reflect and transmit continuations at `hit`, each with branch probability 1.
pub fn branch_outcomes(state: &PathState, hit: &Hit) -> Result<Junction, PathKill> {
    let dir = state.dir;
    let n = hit.normal;
    let cos_i = -dir.dot(n);
    if cos_i < GRAZING_COS {
        return Err(PathKill::Grazing);
    }
    let transform = |e: &[ComplexVec3; TX_POLS], kind, coeffs: &InterfaceCoefficients<f64>, basis| {
        let mut out = [ComplexVec3::zero(); TX_POLS];
        for (o, e) in out.iter_mut().zip(e) {
            *o = interface_transform(*e, dir, kind, coeffs, basis).map_err(|_| PathKill::Numerical)?;
        }
        Ok::<_, PathKill>(out)
    };
    let reflected = dir - n * (2.0 * dir.dot(n));
    let mut outcomes = ArrayVec::new();

    if hit.far_side_pec {
        let coeffs = InterfaceCoefficients::pec();
        let basis = sp_basis(dir, n, None).map_err(|_| PathKill::Grazing)?;
        outcomes.push(BranchOutcome {
            kind: BranchKind::Reflect,
            new_dir: reflected.normalize(),
            new_e: transform(&state.e, BranchKind::Reflect, &coeffs, &basis)?,
            new_n: hit.n_incident,
            branch_prob: 1.0,
        });
        return Ok(Junction { coeffs, outcomes });
    }

    let coeffs = fresnel(hit.n_incident, hit.n_transmit, cos_i.min(1.0)).map_err(|_| PathKill::Numerical)?;
    let refracted = match refract(dir, n, hit.n_incident, hit.n_transmit).map_err(|_| PathKill::Grazing)? {
        Refraction::Transmitted(t) if !coeffs.total_internal_reflection => Some(t),
        _ => None,
    };
    let basis = sp_basis(dir, n, refracted).map_err(|_| PathKill::Grazing)?;
    outcomes.push(BranchOutcome {
        kind: BranchKind::Reflect,
        new_dir: reflected.normalize(),
        new_e: transform(&state.e, BranchKind::Reflect, &coeffs, &basis)?,
        new_n: hit.n_incident,
        branch_prob: 1.0,
    });
    if let Some(t) = refracted {
        outcomes.push(BranchOutcome {
            kind: BranchKind::Transmit,
            new_dir: t,
            new_e: transform(&state.e, BranchKind::Transmit, &coeffs, &basis)?,
            new_n: hit.n_transmit,
            branch_prob: 1.0,
        });
    }
    Ok(Junction { coeffs, outcomes })
}

/// Continues `state` along `outcome`, multiplying in the probability of choosing it.
#[inline]
pub fn take_branch(state: &PathState, outcome: &BranchOutcome, branch_prob: f64) -> PathState {
    let mut s = *state;
    s.dir = outcome.new_dir;
    s.e = outcome.new_e;
    s.medium_n = outcome.new_n;
    s.prob *= branch_prob;
    if outcome.kind == BranchKind::Transmit && state.bounce >= 1 && state.bounce <= 64 {
        s.history |= 1u64 << (state.bounce - 1);
    }
    s
}
