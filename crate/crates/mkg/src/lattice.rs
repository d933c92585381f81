//! Uniform lattice, field state, stencils, and the on-lattice stationary
//! state builder.
//!
//! Index layout is row-major with axis order (x, y, z): `((ix*ny)+iy)*nz+iz`.
//! Reduced dimensions keep inactive axes at a single cell. The topology is a
//! torus; the absorbing boundary is realized by a multiplicative sponge mask
//! over the outer 16 cells of each active axis.

use crate::error::{Error, Result};
use crate::fft::{minres, LatticeFft};
use crate::potentials::PotentialSpec;
use crate::radial::RadialProfile;
use crate::{Cplx, Real};
use serde::{Deserialize, Serialize};

pub const SPONGE_CELLS: usize = 16;
/// Sponge depth: amplitude factor at the outermost cell is `1 - SPONGE_STRENGTH`.
pub const SPONGE_STRENGTH: Real = 0.06;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    Periodic,
    AbsorbingSponge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub dim: usize,
    /// Cells per active axis (inactive axes are 1).
    pub cells: [usize; 3],
    /// Physical extent per active axis.
    pub extent: [Real; 3],
    pub dt: Real,
    pub boundary: Boundary,
}

impl LatticeSpec {
    pub fn new(dim: usize, cells_per_axis: usize, extent: Real, dt_factor: Real, boundary: Boundary) -> Result<Self> {
        let mut cells = [1usize; 3];
        let mut ext = [0.0; 3];
        for a in 0..dim {
            cells[a] = cells_per_axis;
            ext[a] = extent;
        }
        let h = extent / cells_per_axis as Real;
        let dt = dt_factor * 0.5 * h / (dim as Real).sqrt();
        let spec = Self { dim, cells, extent: ext, dt, boundary };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if !(1..=3).contains(&self.dim) {
            errs.push(format!("lattice.dim = {} not in 1..=3", self.dim));
        }
        let h = self.h();
        for a in 0..self.dim {
            if self.cells[a] < 32 {
                errs.push(format!("lattice axis {a}: {} cells < 32", self.cells[a]));
            }
            let ha = self.extent[a] / self.cells[a] as Real;
            if ((ha - h) / h).abs() > 1e-12 {
                errs.push(format!("lattice spacing not uniform across axes ({ha} vs {h})"));
            }
        }
        for a in self.dim..3 {
            if self.cells[a] != 1 {
                errs.push(format!("inactive axis {a} must have 1 cell"));
            }
        }
        let cfl = 0.5 * h / (self.dim as Real).sqrt();
        if !(self.dt > 0.0 && self.dt <= cfl * (1.0 + 1e-12)) {
            errs.push(format!("dt = {} violates the CFL bound 0.5 h/sqrt(dim) = {cfl}", self.dt));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }

    #[inline]
    pub fn h(&self) -> Real {
        self.extent[0] / self.cells[0] as Real
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.cells[0] * self.cells[1] * self.cells[2]
    }

    #[inline]
    pub fn volume_element(&self) -> Real {
        self.h().powi(self.dim as i32)
    }

    /// Cell-center coordinate along axis `a`.
    #[inline]
    pub fn coord(&self, a: usize, i: usize) -> Real {
        (i as Real + 0.5) * self.h() - 0.5 * self.extent[a]
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (ix * self.cells[1] + iy) * self.cells[2] + iz
    }

    pub fn position(&self, idx: usize) -> [Real; 3] {
        let nz = self.cells[2];
        let ny = self.cells[1];
        let iz = idx % nz;
        let iy = (idx / nz) % ny;
        let ix = idx / (nz * ny);
        let mut p = [0.0; 3];
        for (a, i) in [ix, iy, iz].into_iter().enumerate() {
            if a < self.dim {
                p[a] = self.coord(a, i);
            }
        }
        p
    }

    /// Damping mask for the absorbing boundary (all ones when periodic).
    pub fn sponge_mask(&self) -> Option<Vec<Real>> {
        if self.boundary == Boundary::Periodic {
            return None;
        }
        let prof = |n: usize| -> Vec<Real> {
            let mut p = vec![1.0; n];
            if n > 2 * SPONGE_CELLS {
                for i in 0..SPONGE_CELLS {
                    let t = (SPONGE_CELLS - i) as Real / SPONGE_CELLS as Real;
                    let damp = 1.0 - SPONGE_STRENGTH * t * t;
                    p[i] = damp;
                    p[n - 1 - i] = damp;
                }
            }
            p
        };
        let px = prof(self.cells[0]);
        let py = if self.dim >= 2 { prof(self.cells[1]) } else { vec![1.0] };
        let pz = if self.dim >= 3 { prof(self.cells[2]) } else { vec![1.0] };
        let mut mask = vec![1.0; self.len()];
        for ix in 0..self.cells[0] {
            for iy in 0..self.cells[1] {
                for iz in 0..self.cells[2] {
                    mask[self.index(ix, iy, iz)] = px[ix] * py[iy] * pz[iz];
                }
            }
        }
        Some(mask)
    }
}

/// Periodic neighbor index along one axis, arithmetic (no tables).
#[inline(always)]
pub(crate) fn shift_index(
    cells: &[usize; 3],
    ix: usize,
    iy: usize,
    iz: usize,
    axis: usize,
    by: isize,
) -> usize {
    let mut c = [ix, iy, iz];
    let m = cells[axis];
    let v = c[axis] as isize + by;
    c[axis] = if v < 0 {
        (v + m as isize) as usize
    } else if v >= m as isize {
        (v - m as isize) as usize
    } else {
        v as usize
    };
    (c[0] * cells[1] + c[1]) * cells[2] + c[2]
}

/// Runs `f(idx, ix, iy, iz, out_slab)` over x-slabs in parallel; `out` is the
/// destination array being filled.
pub(crate) fn par_fill<T: Send>(
    spec: &LatticeSpec,
    out: &mut [T],
    f: impl Fn(usize, usize, usize, usize) -> T + Sync,
) {
    use rayon::prelude::*;
    let [_, ny, nz] = spec.cells;
    let slab = ny * nz;
    out.par_chunks_mut(slab).enumerate().for_each(|(ix, chunk)| {
        for iy in 0..ny {
            for iz in 0..nz {
                let local = iy * nz + iz;
                chunk[local] = f(ix * slab + local, ix, iy, iz);
            }
        }
    });
}

/// Second-order discrete Laplacian on the torus.
pub(crate) fn laplacian_real(spec: &LatticeSpec, f: &[Real], out: &mut [Real]) {
    let h2 = spec.h() * spec.h();
    let dim = spec.dim;
    let cells = spec.cells;
    par_fill(spec, out, |idx, ix, iy, iz| {
        let mut acc = -2.0 * dim as Real * f[idx];
        for a in 0..dim {
            acc += f[shift_index(&cells, ix, iy, iz, a, 1)] + f[shift_index(&cells, ix, iy, iz, a, -1)];
        }
        acc / h2
    });
}

/// Fourth-order centered first derivative along `axis` (diagnostics only;
/// the evolution stencils stay second order).
#[inline(always)]
pub(crate) fn grad4_at<T>(f: &[T], cells: &[usize; 3], ix: usize, iy: usize, iz: usize, axis: usize, h: Real) -> T
where
    T: Copy
        + std::ops::Sub<Output = T>
        + std::ops::Add<Output = T>
        + std::ops::Mul<Real, Output = T>,
{
    let p1 = f[shift_index(cells, ix, iy, iz, axis, 1)];
    let m1 = f[shift_index(cells, ix, iy, iz, axis, -1)];
    let p2 = f[shift_index(cells, ix, iy, iz, axis, 2)];
    let m2 = f[shift_index(cells, ix, iy, iz, axis, -2)];
    ((p1 - m1) * 8.0 + (m2 - p2)) * (1.0 / (12.0 * h))
}

#[inline(always)]
pub(crate) fn grad2_at<T>(f: &[T], cells: &[usize; 3], ix: usize, iy: usize, iz: usize, axis: usize, h: Real) -> T
where
    T: Copy + std::ops::Sub<Output = T> + std::ops::Mul<Real, Output = T>,
{
    let p1 = f[shift_index(cells, ix, iy, iz, axis, 1)];
    let m1 = f[shift_index(cells, ix, iy, iz, axis, -1)];
    (p1 - m1) * (1.0 / (2.0 * h))
}

/// Full field state: matter `psi` and gauge `(phi, A)` with two time levels
/// (`curr` at time `t`, `prev` at `t - dt`), plus optional static external
/// potentials entering only the matter equation.
#[derive(Debug, Clone)]
pub struct LatticeState {
    pub spec: LatticeSpec,
    pub psi: Vec<Cplx>,
    pub psi_prev: Vec<Cplx>,
    pub phi: Vec<Real>,
    pub phi_prev: Vec<Real>,
    /// One component per active dimension.
    pub a: Vec<Vec<Real>>,
    pub a_prev: Vec<Vec<Real>>,
    pub phi_ext: Option<Vec<Real>>,
    pub a_ext: Option<Vec<Vec<Real>>>,
    /// Cosine switch-on time for the external potentials (`None` = always on).
    pub ext_t_on: Option<Real>,
    pub t: Real,
    pub beta: Real,
    /// Regularization floor for divisions by `|psi|`.
    pub u_floor: Real,
}

impl LatticeState {
    pub fn vacuum(spec: LatticeSpec, beta: Real) -> Self {
        let n = spec.len();
        let dim = spec.dim;
        LatticeState {
            spec,
            psi: vec![Cplx::new(0.0, 0.0); n],
            psi_prev: vec![Cplx::new(0.0, 0.0); n],
            phi: vec![0.0; n],
            phi_prev: vec![0.0; n],
            a: vec![vec![0.0; n]; dim],
            a_prev: vec![vec![0.0; n]; dim],
            phi_ext: None,
            a_ext: None,
            ext_t_on: None,
            t: 0.0,
            beta,
            u_floor: 0.0,
        }
    }

    /// Sets the floor to `1e-10 max |psi|` of the current level.
    pub fn reset_floor(&mut self) {
        let m = self.psi.iter().map(|c| c.norm()).fold(0.0, Real::max);
        self.u_floor = 1e-10 * m;
    }

    pub fn max_abs_psi(&self) -> Real {
        self.psi.iter().map(|c| c.norm()).fold(0.0, Real::max)
    }
}

/// Effective squared frequency of the leapfrog time stencil: a state rotating
/// at `exp(-i omega t)` satisfies the discrete wave operator with
/// `omega_hat^2 = (2 - 2 cos(omega dt)) / dt^2`.
pub fn leapfrog_omega_hat_sq(omega: Real, dt: Real) -> Real {
    (2.0 - 2.0 * (omega * dt).cos()) / (dt * dt)
}

/// Effective frequency in the centered first time difference:
/// `omega_check = sin(omega dt) / dt`.
pub fn leapfrog_omega_check(omega: Real, dt: Real) -> Real {
    (omega * dt).sin() / dt
}

/// Builds the exact discrete stationary soliton on the lattice: Newton on the
/// time-discretized profile equation
/// `-lap_h u + W'(u) - omega_hat^2 u + beta omega_check phi = 0`,
/// `phi = (-lap_h)^{-1} beta omega_check (u - mean u)`,
/// seeded by the interpolated radial profile and solved with an
/// FFT-preconditioned MINRES (the Jacobian has the mountain-pass negative
/// direction, so a definite solver is not applicable).
pub fn lattice_stationary(
    spec_pot: &PotentialSpec,
    profile: &RadialProfile,
    lattice: &LatticeSpec,
    center: [Real; 3],
) -> Result<LatticeState> {
    lattice.validate()?;
    let omega = profile.omega;
    let beta = profile.beta;
    let dt = lattice.dt;
    let what2 = leapfrog_omega_hat_sq(omega, dt);
    let wch = leapfrog_omega_check(omega, dt);
    let n = lattice.len();
    let h = lattice.h();

    // seed from the radial profile
    let interp = crate::interp::Pchip::uniform(0.0, profile.grid.h(), &profile.u);
    let mut u = vec![0.0; n];
    for (idx, v) in u.iter_mut().enumerate() {
        let p = lattice.position(idx);
        let mut r2 = 0.0;
        for a in 0..lattice.dim {
            let d = p[a] - center[a];
            r2 += d * d;
        }
        *v = interp.eval(r2.sqrt());
    }

    let fft = LatticeFft::new(lattice.cells, h);
    let lap = |f: &[Real]| -> Vec<Real> {
        let mut out = vec![0.0; n];
        laplacian_real(lattice, f, &mut out);
        out
    };

    let c0 = 1.0 - what2;
    if c0 <= 0.0 {
        return Err(Error::Domain("lattice_stationary: omega_hat >= 1".into()));
    }
    let mut phi = vec![0.0; n];
    let mut res = Real::INFINITY;
    for _it in 0..25 {
        let src: Vec<Real> = u.iter().map(|&v| beta * wch * v).collect();
        phi = fft.inverse_laplacian(&src);
        let lap_u = lap(&u);
        let f: Vec<Real> = (0..n)
            .map(|i| {
                let v = u[i];
                let np = spec_pot.eval_unchecked(v.abs(), 1) * v.signum();
                -lap_u[i] + v + np - what2 * v + beta * wch * phi[i]
            })
            .collect();
        let scale = u.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1e-300);
        res = f.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if res < 1e-11 * scale.max(1.0) {
            let state = assemble_state(lattice, &u, &phi, omega, beta, dt);
            return Ok(state);
        }
        let pot: Vec<Real> = u
            .iter()
            .map(|&v| 1.0 + spec_pot.eval_unchecked(v.abs(), 2) - what2)
            .collect();
        let apply_a = |x: &[Real]| -> Vec<Real> {
            let lx = lap(x);
            (0..n).map(|i| -lx[i] + pot[i] * x[i]).collect()
        };
        let neg_f: Vec<Real> = f.iter().map(|v| -v).collect();
        let du = minres(apply_a, |r| fft.shifted_inverse(r, c0), &neg_f, 1e-12, 400);
        for i in 0..n {
            u[i] += du[i];
        }
    }
    Err(Error::NoConvergence(format!(
        "lattice stationary Newton stalled at residual {res:.3e}"
    )))
}

fn assemble_state(
    lattice: &LatticeSpec,
    u: &[Real],
    phi: &[Real],
    omega: Real,
    beta: Real,
    dt: Real,
) -> LatticeState {
    let n = lattice.len();
    let rot = Cplx::from_polar(1.0, omega * dt); // psi(-dt) = u e^{+i omega dt}
    let mut st = LatticeState::vacuum(lattice.clone(), beta);
    for i in 0..n {
        st.psi[i] = Cplx::new(u[i], 0.0);
        st.psi_prev[i] = rot * u[i];
    }
    st.phi = phi.to_vec();
    st.phi_prev = phi.to_vec();
    st.reset_floor();
    st
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_validation() {
        assert!(LatticeSpec::new(2, 64, 16.0, 0.9, Boundary::Periodic).is_ok());
        assert!(LatticeSpec::new(2, 16, 16.0, 0.9, Boundary::Periodic).is_err()); // < 32 cells
        assert!(LatticeSpec::new(2, 64, 16.0, 1.2, Boundary::Periodic).is_err()); // CFL
    }

    #[test]
    fn indexing_roundtrip() {
        let s = LatticeSpec::new(3, 32, 8.0, 0.9, Boundary::Periodic).unwrap();
        let idx = s.index(3, 7, 11);
        let p = s.position(idx);
        assert!((p[0] - s.coord(0, 3)).abs() < 1e-15);
        assert!((p[1] - s.coord(1, 7)).abs() < 1e-15);
        assert!((p[2] - s.coord(2, 11)).abs() < 1e-15);
    }

    #[test]
    fn sponge_mask_shape() {
        let s = LatticeSpec::new(1, 128, 32.0, 0.9, Boundary::AbsorbingSponge).unwrap();
        let m = s.sponge_mask().unwrap();
        assert_eq!(m[0], 1.0 - SPONGE_STRENGTH);
        assert_eq!(m[64], 1.0);
        assert_eq!(m[127], 1.0 - SPONGE_STRENGTH);
    }
}
