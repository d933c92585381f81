//! Periodic-lattice spectral helpers: inverse discrete Laplacian (jellium
//! convention) and the shifted-Laplacian preconditioner used by the MINRES
//! Newton solve for on-lattice stationary states.

use crate::{Cplx, Real};
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

pub struct LatticeFft {
    dims: [usize; 3],
    fwd: [Option<Arc<dyn Fft<Real>>>; 3],
    inv: [Option<Arc<dyn Fft<Real>>>; 3],
    /// Symbol of the 5/7-point discrete Laplacian, per lattice site.
    symbol: Vec<Real>,
}

impl LatticeFft {
    pub fn new(dims: [usize; 3], h: Real) -> Self {
        let mut planner = FftPlanner::new();
        let mk = |planner: &mut FftPlanner<Real>, n: usize, inverse: bool| {
            if n > 1 {
                Some(if inverse {
                    planner.plan_fft_inverse(n)
                } else {
                    planner.plan_fft_forward(n)
                })
            } else {
                None
            }
        };
        let fwd = [
            mk(&mut planner, dims[0], false),
            mk(&mut planner, dims[1], false),
            mk(&mut planner, dims[2], false),
        ];
        let inv = [
            mk(&mut planner, dims[0], true),
            mk(&mut planner, dims[1], true),
            mk(&mut planner, dims[2], true),
        ];
        let sym1 = |n: usize| -> Vec<Real> {
            (0..n)
                .map(|i| {
                    let k = 2.0 * std::f64::consts::PI * i as Real / n as Real;
                    (2.0 - 2.0 * k.cos()) / (h * h)
                })
                .collect()
        };
        let (s0, s1, s2) = (sym1(dims[0]), sym1(dims[1]), sym1(dims[2]));
        let mut symbol = vec![0.0; dims[0] * dims[1] * dims[2]];
        let (n1, n2) = (dims[1], dims[2]);
        for i in 0..dims[0] {
            for j in 0..dims[1] {
                for k in 0..dims[2] {
                    symbol[(i * n1 + j) * n2 + k] = s0[i] + s1[j] + s2[k];
                }
            }
        }
        Self { dims, fwd, inv, symbol }
    }

    fn transform(&self, data: &mut [Cplx], inverse: bool) {
        let [n0, n1, n2] = self.dims;
        let plans = if inverse { &self.inv } else { &self.fwd };
        // axis 2 (contiguous)
        if let Some(p) = &plans[2] {
            for row in data.chunks_exact_mut(n2) {
                p.process(row);
            }
        }
        // axis 1
        if let Some(p) = &plans[1] {
            let mut buf = vec![Cplx::new(0.0, 0.0); n1];
            for i in 0..n0 {
                for k in 0..n2 {
                    for j in 0..n1 {
                        buf[j] = data[(i * n1 + j) * n2 + k];
                    }
                    p.process(&mut buf);
                    for j in 0..n1 {
                        data[(i * n1 + j) * n2 + k] = buf[j];
                    }
                }
            }
        }
        // axis 0
        if let Some(p) = &plans[0] {
            let mut buf = vec![Cplx::new(0.0, 0.0); n0];
            for j in 0..n1 {
                for k in 0..n2 {
                    for i in 0..n0 {
                        buf[i] = data[(i * n1 + j) * n2 + k];
                    }
                    p.process(&mut buf);
                    for i in 0..n0 {
                        data[(i * n1 + j) * n2 + k] = buf[i];
                    }
                }
            }
        }
        if inverse {
            let scale = 1.0 / (n0 * n1 * n2) as Real;
            for v in data.iter_mut() {
                *v *= scale;
            }
        }
    }

    /// `(-lap_h)^{-1} (f - mean f)` on the torus; the zero mode is dropped
    /// (neutralizing-background convention).
    pub fn inverse_laplacian(&self, f: &[Real]) -> Vec<Real> {
        let n = f.len();
        let mean = f.iter().sum::<Real>() / n as Real;
        let mut buf: Vec<Cplx> = f.iter().map(|&x| Cplx::new(x - mean, 0.0)).collect();
        self.transform(&mut buf, false);
        for (v, &s) in buf.iter_mut().zip(&self.symbol) {
            if s > 1e-13 {
                *v /= s;
            } else {
                *v = Cplx::new(0.0, 0.0);
            }
        }
        self.transform(&mut buf, true);
        buf.iter().map(|c| c.re).collect()
    }

    /// `(-lap_h + c0)^{-1} f`, the SPD preconditioner for MINRES.
    pub fn shifted_inverse(&self, f: &[Real], c0: Real) -> Vec<Real> {
        let mut buf: Vec<Cplx> = f.iter().map(|&x| Cplx::new(x, 0.0)).collect();
        self.transform(&mut buf, false);
        for (v, &s) in buf.iter_mut().zip(&self.symbol) {
            *v /= s + c0;
        }
        self.transform(&mut buf, true);
        buf.iter().map(|c| c.re).collect()
    }
}

/// Preconditioned MINRES for a symmetric (possibly indefinite) operator.
/// `apply_m` must be symmetric positive definite.
pub fn minres(
    apply_a: impl Fn(&[Real]) -> Vec<Real>,
    apply_m: impl Fn(&[Real]) -> Vec<Real>,
    b: &[Real],
    rtol: Real,
    max_iter: usize,
) -> Vec<Real> {
    let n = b.len();
    let dot = |a: &[Real], c: &[Real]| -> Real { a.iter().zip(c).map(|(x, y)| x * y).sum() };

    let mut x = vec![0.0; n];
    let mut r1 = b.to_vec();
    let mut y = apply_m(&r1);
    let beta1_sq = dot(&r1, &y);
    if beta1_sq <= 0.0 {
        return x;
    }
    let beta1 = beta1_sq.sqrt();
    let mut r2 = r1.clone();

    let (mut oldb, mut beta) = (0.0, beta1);
    let (mut dbar, mut epsln, mut phibar) = (0.0, 0.0, beta1);
    let (mut cs, mut sn) = (-1.0_f64, 0.0_f64);
    let mut w = vec![0.0; n];
    let mut w2 = vec![0.0; n];

    for _ in 0..max_iter {
        let v: Vec<Real> = y.iter().map(|&t| t / beta).collect();
        let mut ay = apply_a(&v);
        if oldb > 0.0 {
            let c = beta / oldb;
            for i in 0..n {
                ay[i] -= c * r1[i];
            }
        }
        let alfa = dot(&v, &ay);
        let c = alfa / beta;
        for i in 0..n {
            ay[i] -= c * r2[i];
        }
        r1 = std::mem::replace(&mut r2, ay);
        y = apply_m(&r2);
        oldb = beta;
        let beta_sq = dot(&r2, &y);
        beta = beta_sq.max(0.0).sqrt();

        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = (gbar * gbar + beta * beta).sqrt().max(1e-300);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;

        for i in 0..n {
            let wi = (v[i] - oldeps * w2[i] - delta * w[i]) / gamma;
            w2[i] = w[i];
            w[i] = wi;
            x[i] += phi * wi;
        }
        if phibar <= rtol * beta1 {
            break;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_laplacian_roundtrip_2d() {
        let (n, h) = (32usize, 0.5);
        let fft = LatticeFft::new([n, n, 1], h);
        // random-ish zero-mean field
        let mut f = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                f[i * n + j] = ((i * 7 + j * 3) % 11) as Real - 5.0;
            }
        }
        let mean = f.iter().sum::<Real>() / f.len() as Real;
        for v in f.iter_mut() {
            *v -= mean;
        }
        let phi = fft.inverse_laplacian(&f);
        // apply the discrete Laplacian back
        let idx = |i: usize, j: usize| (i % n) * n + (j % n);
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                let lap = (phi[idx(i + 1, j)] + phi[idx(i + n - 1, j)] + phi[idx(i, j + 1)]
                    + phi[idx(i, j + n - 1)]
                    - 4.0 * phi[idx(i, j)])
                    / (h * h);
                worst = worst.max((-lap - f[idx(i, j)]).abs());
            }
        }
        assert!(worst < 1e-10, "lap residual {worst}");
    }

    #[test]
    fn minres_solves_indefinite_diagonal() {
        // A = diag with one negative entry; M = I
        let a = [3.0, -0.7, 2.0, 5.0, 1.3];
        let b = [1.0, 2.0, -1.0, 0.5, 2.2];
        let x = minres(
            |v| v.iter().zip(a).map(|(x, d)| x * d).collect(),
            |v| v.to_vec(),
            &b,
            1e-14,
            100,
        );
        for i in 0..5 {
            assert!((x[i] - b[i] / a[i]).abs() < 1e-10);
        }
    }
}
