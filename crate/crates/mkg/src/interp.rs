//! Monotone cubic (Fritsch-Carlson) interpolation of radial profiles.
//! Preserves positivity and monotone decay of the data; evaluates to the
//! clamp value beyond the table.

use crate::Real;

pub struct Pchip {
    x0: Real,
    h: Real,
    y: Vec<Real>,
    d: Vec<Real>,
}

impl Pchip {
    /// Uniform-grid constructor: nodes `x0 + i h`.
    pub fn uniform(x0: Real, h: Real, y: &[Real]) -> Self {
        let n = y.len();
        assert!(n >= 2);
        let mut delta = vec![0.0; n - 1];
        for i in 0..n - 1 {
            delta[i] = (y[i + 1] - y[i]) / h;
        }
        let mut d = vec![0.0; n];
        // harmonic-mean slopes: d <= 2 min(delta) keeps the Fritsch-Carlson
        // monotonicity region satisfied without a separate limiter
        d[0] = delta[0];
        d[n - 1] = delta[n - 2];
        for i in 1..n - 1 {
            if delta[i - 1] * delta[i] <= 0.0 {
                d[i] = 0.0;
            } else {
                d[i] = 2.0 * delta[i - 1] * delta[i] / (delta[i - 1] + delta[i]);
            }
        }
        Self { x0, h, y: y.to_vec(), d }
    }

    /// Evaluate; outside the table returns the edge value (left) or 0 (right).
    pub fn eval(&self, x: Real) -> Real {
        let n = self.y.len();
        let t = (x - self.x0) / self.h;
        if t <= 0.0 {
            return self.y[0];
        }
        if t >= (n - 1) as Real {
            // the last node itself may land here through rounding
            return if t - ((n - 1) as Real) < 1e-9 { self.y[n - 1] } else { 0.0 };
        }
        let i = t as usize;
        let s = (t - i as Real) * self.h;
        let h = self.h;
        let (y0, y1, d0, d1) = (self.y[i], self.y[i + 1], self.d[i], self.d[i + 1]);
        // cubic Hermite on [0, h]
        let t1 = s / h;
        let t2 = t1 * t1;
        let t3 = t2 * t1;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t1;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
    }
}
