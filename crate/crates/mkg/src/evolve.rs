//! Leapfrog evolution of the coupled system.
//!
//! Matter equation (Lorenz gauge, complex form of the Euler-Lagrange pair):
//!
//! ```text
//!   box psi + psi + N'(|psi|) psi/|psi| = -i beta (phi_tot dt_psi + A_tot . grad psi) / |psi|
//! ```
//!
//! Gauge fields: `box phi = rho`, `box A = j` with
//! `rho = -beta Im(conj(psi) dt_psi)/|psi|`, `j = beta Im(conj(psi) grad psi)/|psi|`.
//!
//! The first-order `dt_psi` coupling is handled with a centered difference and
//! a pointwise-implicit solve, keeping the scheme second order and
//! time-symmetric. Divisions by `|psi|` are floored, and the coupling rate is
//! capped at `0.5/dt`: the bare coupling force per unit amplitude does not
//! vanish with `|psi|`, so vacuum cells would otherwise see unresolvably fast
//! phase rotation.
//!
//! On periodic lattices the wave-equation sources are neutralized
//! (`rho - mean rho`): the torus admits no static potential for a net charge,
//! and an unneutralized zero mode grows secularly.

use crate::error::{Error, Result};
use crate::lattice::{grad2_at, laplacian_real, par_fill, shift_index, Boundary, LatticeState};
use crate::observables::{self, DiagnosticsRow};
use crate::potentials::PotentialSpec;
use crate::{Cplx, Real};
use rayon::prelude::*;

/// Reusable step buffers.
pub struct Engine {
    spec_pot: PotentialSpec,
    mask: Option<Vec<Real>>,
    psi_new: Vec<Cplx>,
    rho: Vec<Real>,
    j: Vec<Vec<Real>>,
    phi_new: Vec<Real>,
    a_new: Vec<Vec<Real>>,
    scratch: Vec<Real>,
}

impl Engine {
    pub fn new(spec_pot: PotentialSpec, state: &LatticeState) -> Self {
        let n = state.spec.len();
        let dim = state.spec.dim;
        Engine {
            spec_pot,
            mask: state.spec.sponge_mask(),
            psi_new: vec![Cplx::new(0.0, 0.0); n],
            rho: vec![0.0; n],
            j: vec![vec![0.0; n]; dim],
            phi_new: vec![0.0; n],
            a_new: vec![vec![0.0; n]; dim],
            scratch: vec![0.0; n],
        }
    }

    /// One leapfrog step; advances `state.t` by `dt`.
    pub fn step(&mut self, state: &mut LatticeState, step_index: usize) -> Result<()> {
        let spec = state.spec.clone();
        let n = spec.len();
        let dim = spec.dim;
        let h = spec.h();
        let dt = spec.dt;
        let h2 = h * h;
        let beta = state.beta;
        let floor = state.u_floor.max(1e-300);
        let rate_cap = 0.5 / dt;
        let cells = spec.cells;
        let pot = self.spec_pot;

        // matter update (pointwise implicit in the phi-coupling)
        {
            let psi = &state.psi;
            let psi_prev = &state.psi_prev;
            let phi = &state.phi;
            let phi_ext = state.phi_ext.as_deref();
            let a_self = &state.a;
            let a_ext = state.a_ext.as_deref();
            let sw = match state.ext_t_on {
                Some(t_on) => crate::particle::switch_factor(state.t, t_on),
                None => 1.0,
            };
            par_fill(&spec, &mut self.psi_new, |idx, ix, iy, iz| {
                let p = psi[idx];
                let amp = p.norm();
                let reg = amp / (amp * amp).max(floor * floor);
                let mut lap = -2.0 * dim as Real * p;
                for ax in 0..dim {
                    lap += psi[shift_index(&cells, ix, iy, iz, ax, 1)]
                        + psi[shift_index(&cells, ix, iy, iz, ax, -1)];
                }
                let lap = lap / h2;
                let np = pot.eval_unchecked(amp, 1);
                let phit = phi[idx] + sw * phi_ext.map_or(0.0, |e| e[idx]);
                let cc = (beta * phit * reg / (2.0 * dt)).clamp(-rate_cap, rate_cap);
                let mut rhs = (2.0 * p - psi_prev[idx]) / (dt * dt) + lap
                    - p
                    - np * p / amp.max(floor)
                    + Cplx::new(0.0, cc) * psi_prev[idx];
                for ax in 0..dim {
                    let atot = a_self[ax][idx] + sw * a_ext.map_or(0.0, |e| e[ax][idx]);
                    let ca = (beta * atot * reg).clamp(-rate_cap, rate_cap);
                    if ca != 0.0 {
                        let g = grad2_at(psi.as_slice(), &cells, ix, iy, iz, ax, h);
                        rhs -= Cplx::new(0.0, ca) * g;
                    }
                }
                rhs / Cplx::new(1.0 / (dt * dt), cc)
            });
        }

        // sources at the current level (time-centered dt_psi)
        {
            let psi = &state.psi;
            let psi_prev = &state.psi_prev;
            let psi_new = &self.psi_new;
            par_fill(&spec, &mut self.rho, |idx, _, _, _| {
                let p = psi[idx];
                let dps = (psi_new[idx] - psi_prev[idx]) / (2.0 * dt);
                let den = p.norm().max(floor);
                -beta * (p.conj() * dps).im / den
            });
            for ax in 0..dim {
                let jax = &mut self.j[ax];
                par_fill(&spec, jax, |idx, ix, iy, iz| {
                    let p = psi[idx];
                    let den = p.norm().max(floor);
                    let g = grad2_at(psi.as_slice(), &cells, ix, iy, iz, ax, h);
                    beta * (p.conj() * g).im / den
                });
            }
            if spec.boundary == Boundary::Periodic {
                let mean = self.rho.iter().sum::<Real>() / n as Real;
                self.rho.iter_mut().for_each(|v| *v -= mean);
                for jax in self.j.iter_mut() {
                    let mean = jax.iter().sum::<Real>() / n as Real;
                    jax.iter_mut().for_each(|v| *v -= mean);
                }
            }
        }

        // gauge updates
        laplacian_real(&spec, &state.phi, &mut self.scratch);
        {
            let phi = &state.phi;
            let phi_prev = &state.phi_prev;
            let lap = &self.scratch;
            let rho = &self.rho;
            par_fill(&spec, &mut self.phi_new, |idx, _, _, _| {
                2.0 * phi[idx] - phi_prev[idx] + dt * dt * (lap[idx] + rho[idx])
            });
        }
        for ax in 0..dim {
            laplacian_real(&spec, &state.a[ax], &mut self.scratch);
            let a = &state.a[ax];
            let a_prev = &state.a_prev[ax];
            let lap = &self.scratch;
            let j = &self.j[ax];
            par_fill(&spec, &mut self.a_new[ax], |idx, _, _, _| {
                2.0 * a[idx] - a_prev[idx] + dt * dt * (lap[idx] + j[idx])
            });
        }

        // rotate time levels
        std::mem::swap(&mut state.psi_prev, &mut state.psi);
        std::mem::swap(&mut state.psi, &mut self.psi_new);
        std::mem::swap(&mut state.phi_prev, &mut state.phi);
        std::mem::swap(&mut state.phi, &mut self.phi_new);
        for ax in 0..dim {
            std::mem::swap(&mut state.a_prev[ax], &mut state.a[ax]);
            std::mem::swap(&mut state.a[ax], &mut self.a_new[ax]);
        }
        state.t += dt;

        if let Some(mask) = &self.mask {
            let apply_c = |f: &mut Vec<Cplx>| {
                f.par_iter_mut().zip(mask.par_iter()).for_each(|(v, &m)| *v *= m)
            };
            let apply_r = |f: &mut Vec<Real>| {
                f.par_iter_mut().zip(mask.par_iter()).for_each(|(v, &m)| *v *= m)
            };
            apply_c(&mut state.psi);
            apply_c(&mut state.psi_prev);
            apply_r(&mut state.phi);
            apply_r(&mut state.phi_prev);
            for ax in 0..dim {
                apply_r(&mut state.a[ax]);
                apply_r(&mut state.a_prev[ax]);
            }
        }

        if state.psi.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Blowup { step: step_index, what: "psi became non-finite".into() });
        }
        Ok(())
    }
}

/// Per-soliton tracking window: charge-weighted centroid within radius
/// `3 r0` of the previous position.
#[derive(Debug, Clone)]
pub struct TrackerWindow {
    pub center: [Real; 3],
    pub r0: Real,
    /// Net window charge at the first record; tracking is declared invalid
    /// (A-2) when the current net charge collapses against it.
    pub q_ref: Option<Real>,
}

impl TrackerWindow {
    pub fn new(center: [Real; 3], r0: Real) -> Self {
        TrackerWindow { center, r0, q_ref: None }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub t: Vec<Real>,
    pub xi: Vec<[Real; 3]>,
    /// Set when the windows approached closer than `2 r0` (assumption A-2).
    pub aborted_at: Option<Real>,
}

impl Trajectory {
    /// Velocities by centered differences over the recorded samples.
    pub fn velocities(&self) -> Vec<[Real; 3]> {
        let m = self.t.len();
        let mut v = vec![[0.0; 3]; m];
        for i in 1..m.saturating_sub(1) {
            let dt = self.t[i + 1] - self.t[i - 1];
            for a in 0..3 {
                v[i][a] = (self.xi[i + 1][a] - self.xi[i - 1][a]) / dt;
            }
        }
        if m >= 2 {
            let dt = self.t[1] - self.t[0];
            for a in 0..3 {
                v[0][a] = (self.xi[1][a] - self.xi[0][a]) / dt;
                v[m - 1][a] = (self.xi[m - 1][a] - self.xi[m - 2][a]) / dt;
            }
        }
        v
    }
}

/// Result of [`run`]: diagnostic rows every `every` steps plus per-tracker
/// trajectories.
pub struct RunOutput {
    pub rows: Vec<DiagnosticsRow>,
    pub trajectories: Vec<Trajectory>,
}

/// Steps the state `n_steps` times, recording diagnostics (and advancing the
/// tracking windows) every `every` steps. The zeroth row is recorded before
/// stepping.
pub fn run(
    state: &mut LatticeState,
    spec_pot: &PotentialSpec,
    n_steps: usize,
    every: usize,
    trackers: &mut Vec<TrackerWindow>,
) -> Result<RunOutput> {
    if n_steps == 0 {
        return Err(Error::Domain("run: n_steps must be >= 1".into()));
    }
    let every = every.max(1);
    let mut engine = Engine::new(*spec_pot, state);
    let mut rows = Vec::with_capacity(n_steps / every + 2);
    let mut trajectories: Vec<Trajectory> = trackers.iter().map(|_| Trajectory::default()).collect();

    let mut record = |state: &LatticeState,
                      trackers: &mut Vec<TrackerWindow>,
                      trajectories: &mut Vec<Trajectory>|
     -> Result<()> {
        // advance windows before recording the row: centroid within 3 r0
        let mut abort_time = None;
        for (k, w) in trackers.iter_mut().enumerate() {
            if trajectories[k].aborted_at.is_some() {
                continue;
            }
            let (c, qw) = observables::windowed_centroid_charge(state, w.center, 3.0 * w.r0);
            match w.q_ref {
                None => w.q_ref = Some(qw),
                Some(q0) => {
                    // net window charge collapsing: an opposite charge has
                    // entered the window and the centroid is no longer valid
                    if q0.abs() > 0.0 && qw.abs() < 0.3 * q0.abs() {
                        abort_time = Some(state.t);
                    }
                }
            }
            w.center = c;
            trajectories[k].t.push(state.t);
            trajectories[k].xi.push(c);
        }
        // A-2: abort all tracking when two windows overlap
        'outer: for i in 0..trackers.len() {
            for j in i + 1..trackers.len() {
                let mut d2 = 0.0;
                for a in 0..3 {
                    let d = trackers[i].center[a] - trackers[j].center[a];
                    d2 += d * d;
                }
                let rmin = 2.0 * trackers[i].r0.max(trackers[j].r0);
                if d2.sqrt() < rmin {
                    abort_time = Some(state.t);
                    break 'outer;
                }
            }
        }
        if let Some(ta) = abort_time {
            for tr in trajectories.iter_mut() {
                if tr.aborted_at.is_none() {
                    tr.aborted_at = Some(ta);
                }
            }
        }
        let window = trackers.first().map(|w| (w.center, 3.0 * w.r0));
        rows.push(observables::lattice_diagnostics_with(state, spec_pot, window));
        Ok(())
    };

    record(state, trackers, &mut trajectories)?;
    for step in 1..=n_steps {
        engine.step(state, step)?;
        if step % every == 0 {
            record(state, trackers, &mut trajectories)?;
        }
    }
    Ok(RunOutput { rows, trajectories })
}

/// Global phase rotation `psi -> e^{i theta} psi` (both levels).
pub fn phase_rotate(state: &mut LatticeState, theta: Real) {
    let rot = Cplx::from_polar(1.0, theta);
    state.psi.iter_mut().for_each(|c| *c *= rot);
    state.psi_prev.iter_mut().for_each(|c| *c *= rot);
}

/// The 4-parameter shift `S -> S - a t`, `phi -> phi + a` applied at the
/// current instant: the level at `t` is unchanged, the level at `t - dt`
/// picks up `e^{+i a dt}`, and both `phi` levels shift by the constant.
pub fn gauge_shift(state: &mut LatticeState, a: Real) {
    let rot = Cplx::from_polar(1.0, a * state.spec.dt);
    state.psi_prev.iter_mut().for_each(|c| *c *= rot);
    state.phi.iter_mut().for_each(|v| *v += a);
    state.phi_prev.iter_mut().for_each(|v| *v += a);
}

/// Swaps the two time levels of every field: the leapfrog recursion then
/// exactly retraces its history (time-symmetric stencil).
pub fn reverse_time_levels(state: &mut LatticeState) {
    std::mem::swap(&mut state.psi, &mut state.psi_prev);
    std::mem::swap(&mut state.phi, &mut state.phi_prev);
    let dim = state.spec.dim;
    for ax in 0..dim {
        let (a, ap) = {
            let a = std::mem::take(&mut state.a[ax]);
            let ap = std::mem::take(&mut state.a_prev[ax]);
            (a, ap)
        };
        state.a[ax] = ap;
        state.a_prev[ax] = a;
    }
}

/// Physical time reversal for `beta > 0`: level swap plus `psi -> conj(psi)`
/// and `A -> -A` (charge and currents flip consistently).
pub fn reverse_time_physical(state: &mut LatticeState) {
    reverse_time_levels(state);
    state.psi.iter_mut().for_each(|c| *c = c.conj());
    state.psi_prev.iter_mut().for_each(|c| *c = c.conj());
    for ax in 0..state.spec.dim {
        state.a[ax].iter_mut().for_each(|v| *v = -*v);
        state.a_prev[ax].iter_mut().for_each(|v| *v = -*v);
    }
}
