//! Radial grids on `[0, R_max]` with trapezoid weights.

use crate::error::{Error, Result};

/// Node placement rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Spacing {
    Uniform,
    /// `r_i = R_max (i/(N−1))^g` with grading exponent `g ∈ [1, 2]`.
    Graded(f64),
}

/// Strictly increasing nodes `0 = r_0 < … < r_{N−1} = R_max` with the
/// momentum support radius used by the truncation guard.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    spacing: Spacing,
    r_support: f64,
}

impl RadialGrid {
    pub fn new(len: usize, r_max: f64, spacing: Spacing, r_support: f64) -> Result<Self> {
        if len < 8 {
            return Err(Error::InvalidGrid(format!("need at least 8 nodes, got {len}")));
        }
        if !(r_max > 0.0 && r_max.is_finite()) {
            return Err(Error::InvalidGrid(format!("R_max must be positive, got {r_max}")));
        }
        if !(r_support > 0.0 && r_support <= 0.6 * r_max) {
            return Err(Error::InvalidGrid(format!(
                "support radius {r_support} must lie in (0, 0.6·R_max = {}]",
                0.6 * r_max
            )));
        }
        let last = (len - 1) as f64;
        let nodes: Vec<f64> = match spacing {
            Spacing::Uniform => (0..len).map(|i| r_max * i as f64 / last).collect(),
            Spacing::Graded(g) => {
                if !(1.0..=2.0).contains(&g) {
                    return Err(Error::InvalidGrid(format!("grading exponent {g} outside [1, 2]")));
                }
                (0..len).map(|i| r_max * (i as f64 / last).powf(g)).collect()
            }
        };
        Ok(Self::from_nodes_unchecked(nodes, spacing, r_support))
    }

    pub fn uniform(len: usize, r_max: f64, r_support: f64) -> Result<Self> {
        Self::new(len, r_max, Spacing::Uniform, r_support)
    }

    fn from_nodes_unchecked(mut nodes: Vec<f64>, spacing: Spacing, r_support: f64) -> Self {
        let n = nodes.len();
        nodes[0] = 0.0;
        let mut weights = vec![0.0; n];
        for i in 0..n - 1 {
            let h = nodes[i + 1] - nodes[i];
            weights[i] += 0.5 * h;
            weights[i + 1] += 0.5 * h;
        }
        Self { nodes, weights, spacing, r_support }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Trapezoid weights: `∫ f ≈ Σ w_i f(r_i)`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn r_max(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn r_support(&self) -> f64 {
        self.r_support
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    /// Interval length `r_{i+1} − r_i`.
    pub fn step(&self, i: usize) -> f64 {
        self.nodes[i + 1] - self.nodes[i]
    }

    /// Largest interval length.
    pub fn max_step(&self) -> f64 {
        (0..self.len() - 1).map(|i| self.step(i)).fold(0.0, f64::max)
    }

    /// First node at or beyond the support radius.
    pub fn support_index(&self) -> usize {
        self.nodes.iter().position(|&r| r >= self.r_support).unwrap_or(self.len() - 1)
    }

    /// `∫_0^{R_max} f` by the trapezoid rule.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        f.iter().zip(&self.weights).map(|(a, w)| a * w).sum()
    }

    /// Tail integrals `∫_{r_i}^{R_max} f` by right-to-left cumulative trapezoid.
    pub fn tail_integrals(&self, f: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut out = vec![0.0; n];
        for i in (0..n - 1).rev() {
            out[i] = out[i + 1] + 0.5 * self.step(i) * (f[i] + f[i + 1]);
        }
        out
    }

    /// Tail integrals with a local cubic per interval (the interpolant through
    /// the four nearest nodes). Fourth order for smooth `f`.
    pub fn tail_integrals_cubic(&self, f: &[f64]) -> Vec<f64> {
        cubic_tails(&self.cubic_interval_weights(), f)
    }

    /// For each interval `[r_i, r_{i+1}]`: the first of four consecutive nodes
    /// and the exact integrals of their Lagrange basis cubics over the interval
    /// (two-point Gauss is exact for cubics).
    pub fn cubic_interval_weights(&self) -> Vec<(usize, [f64; 4])> {
        let n = self.len();
        let r = &self.nodes;
        let g = 0.5 / 3f64.sqrt();
        (0..n - 1)
            .map(|i| {
                let j0 = i.saturating_sub(1).min(n - 4);
                let h = self.step(i);
                let mid = 0.5 * (r[i] + r[i + 1]);
                let mut w = [0.0; 4];
                for x in [mid - g * h, mid + g * h] {
                    for (a, wa) in w.iter_mut().enumerate() {
                        let mut l = 1.0;
                        for b in 0..4 {
                            if a != b {
                                l *= (x - r[j0 + b]) / (r[j0 + a] - r[j0 + b]);
                            }
                        }
                        *wa += 0.5 * h * l;
                    }
                }
                (j0, w)
            })
            .collect()
    }
}

/// Right-to-left accumulation with weights from [`RadialGrid::cubic_interval_weights`].
pub fn cubic_tails(weights: &[(usize, [f64; 4])], f: &[f64]) -> Vec<f64> {
    let n = weights.len() + 1;
    let mut out = vec![0.0; n];
    for i in (0..n - 1).rev() {
        let (j0, w) = weights[i];
        out[i] = out[i + 1] + w[0] * f[j0] + w[1] * f[j0 + 1] + w[2] * f[j0 + 2] + w[3] * f[j0 + 3];
    }
    out
}
