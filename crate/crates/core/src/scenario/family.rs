//! Built-in initial momenta.

use super::config::{Family, ScenarioConfig};
use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::kernel::KernelSpec;
use crate::solver::InitialData;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Number of cosine modes in the seeded perturbation.
const MODES: usize = 4;

/// A momentum profile `ω_0(r)` supported in `[r_lo, r_hi]`.
///
/// With a nonzero perturbation the profile is multiplied by
/// `1 + p Σ_m c_m cos(mπx)/4`, `x ∈ [−1, 1]` the rescaled support coordinate and
/// `c_m ∈ [−1, 1]` drawn from the seed. Since `p < 1` the factor stays positive,
/// so signs and support are preserved.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumFamily {
    family: Family,
    amplitude: f64,
    r_lo: f64,
    r_hi: f64,
    tilt: f64,
    perturbation: f64,
    coeffs: [f64; MODES],
}

/// Smooth bump `exp(1 − 1/(1 − x²))`, peak 1 at `x = 0`.
fn bump(x: f64) -> f64 {
    let d = 1.0 - x * x;
    if d <= 0.0 {
        0.0
    } else {
        (1.0 - 1.0 / d).exp()
    }
}

impl MomentumFamily {
    pub fn new(
        family: Family,
        amplitude: f64,
        r_lo: f64,
        r_hi: f64,
        tilt: f64,
        perturbation: f64,
        seed: u64,
    ) -> Result<Self> {
        if !(amplitude >= 0.0 && amplitude.is_finite()) {
            return Err(Error::Config(format!("amplitude: must be ≥ 0, got {amplitude}")));
        }
        if !(r_lo >= 0.0 && r_lo < r_hi && r_hi.is_finite()) {
            return Err(Error::Config(format!("r_lo/r_hi: need 0 ≤ r_lo < r_hi, got [{r_lo}, {r_hi}]")));
        }
        if !(0.0..1.0).contains(&perturbation) {
            return Err(Error::Config(format!("perturbation: must lie in [0, 1), got {perturbation}")));
        }
        let mut coeffs = [0.0; MODES];
        if perturbation > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for c in &mut coeffs {
                *c = rng.gen_range(-1.0..=1.0);
            }
        }
        Ok(Self { family, amplitude, r_lo, r_hi, tilt, perturbation, coeffs })
    }

    pub fn from_config(cfg: &ScenarioConfig) -> Result<Self> {
        Self::new(cfg.family, cfg.amplitude, cfg.r_lo, cfg.r_hi, cfg.tilt, cfg.perturbation, cfg.seed)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn r_support(&self) -> f64 {
        self.r_hi
    }

    fn perturbation_factor(&self, x: f64) -> f64 {
        if self.perturbation == 0.0 {
            return 1.0;
        }
        let s: f64 =
            self.coeffs.iter().enumerate().map(|(m, c)| c * ((m + 1) as f64 * std::f64::consts::PI * x).cos()).sum();
        1.0 + self.perturbation * s / MODES as f64
    }

    pub fn eval(&self, r: f64) -> f64 {
        if !(r > self.r_lo && r < self.r_hi) {
            return 0.0;
        }
        let half = 0.5 * (self.r_hi - self.r_lo);
        let x = (r - self.r_lo) / half - 1.0;
        let a = self.amplitude;
        let base = match self.family {
            Family::NegBump => -a * bump(x),
            Family::NegPolyBump => {
                let (u, v) = ((r - self.r_lo) / half, (self.r_hi - r) / half);
                -a * (u * v).powi(3)
            }
            Family::HsMixedSign => a * bump(x) * (self.tilt - x),
        };
        base * self.perturbation_factor(x)
    }

    pub fn sample(&self, grid: &RadialGrid) -> Vec<f64> {
        grid.nodes().iter().map(|&r| self.eval(r)).collect()
    }
}

/// Samples the configured family on `grid` and packages it for the solver.
pub fn builtin_initial_data(spec: &KernelSpec, grid: &RadialGrid, family: &MomentumFamily) -> Result<InitialData> {
    InitialData::new(spec, grid, family.sample(grid))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_peaks_at_centre() {
        let f = MomentumFamily::new(Family::NegBump, 2.0, 1.0, 3.0, 0.0, 0.0, 0).unwrap();
        assert_eq!(f.eval(2.0), -2.0);
        assert_eq!(f.eval(1.0), 0.0);
        assert_eq!(f.eval(3.5), 0.0);
        let p = MomentumFamily::new(Family::NegPolyBump, 1.0, 1.0, 3.0, 0.0, 0.0, 0).unwrap();
        assert_eq!(p.eval(2.0), -1.0);
    }

    #[test]
    fn tilt_controls_sign() {
        let pos = MomentumFamily::new(Family::HsMixedSign, 1.0, 0.5, 2.5, 1.0, 0.0, 0).unwrap();
        let mixed = MomentumFamily::new(Family::HsMixedSign, 1.0, 0.5, 2.5, 0.0, 0.0, 0).unwrap();
        let rs: Vec<f64> = (0..300).map(|i| i as f64 * 0.01).collect();
        assert!(rs.iter().all(|&r| pos.eval(r) >= 0.0));
        assert!(rs.iter().any(|&r| mixed.eval(r) < 0.0) && rs.iter().any(|&r| mixed.eval(r) > 0.0));
    }
}
