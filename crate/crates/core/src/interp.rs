//! Natural cubic spline interpolation on strictly increasing abscissae.

/// A C² piecewise cubic through `(x_i, y_i)` with zero end curvature.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl CubicSpline {
    /// Panics if `x` is not strictly increasing or lengths differ.
    pub fn new(x: &[f64], y: &[f64]) -> Self {
        let n = x.len();
        assert!(n >= 2 && y.len() == n, "spline needs matching samples");
        assert!(x.windows(2).all(|w| w[1] > w[0]), "abscissae must increase");
        let mut m = vec![0.0; n];
        if n > 2 {
            // Thomas algorithm for the interior second derivatives.
            let mut c = vec![0.0; n];
            let mut d = vec![0.0; n];
            for i in 1..n - 1 {
                let h0 = x[i] - x[i - 1];
                let h1 = x[i + 1] - x[i];
                let rhs = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
                let diag = 2.0 * (h0 + h1) - h0 * c[i - 1];
                c[i] = h1 / diag;
                d[i] = (rhs - h0 * d[i - 1]) / diag;
            }
            for i in (1..n - 1).rev() {
                m[i] = d[i] - c[i] * m[i + 1];
            }
        }
        Self { x: x.to_vec(), y: y.to_vec(), m }
    }

    /// Value at `t`; outside the data range the end cubic is extended.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        let i = match self.x.partition_point(|&v| v <= t) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        };
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_nodes_and_converges() {
        let x: Vec<f64> = (0..=200).map(|i| (i as f64 / 200.0).powf(1.3) * 3.0).collect();
        let y: Vec<f64> = x.iter().map(|v| v.sin()).collect();
        let s = CubicSpline::new(&x, &y);
        assert!((s.eval(x[17]) - y[17]).abs() < 1e-15);
        let mut err: f64 = 0.0;
        for j in 0..500 {
            let t = 0.1 + 2.8 * j as f64 / 500.0;
            err = err.max((s.eval(t) - t.sin()).abs());
        }
        assert!(err < 1e-7, "{err}");
    }
}
