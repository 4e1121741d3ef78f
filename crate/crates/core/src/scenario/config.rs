//! Flat `key = value` scenario files.

use crate::error::{Error, Result};
use crate::grid::{RadialGrid, Spacing};
use crate::kernel::KernelSpec;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Built-in initial momentum families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// `−A · exp(1 − 1/(1 − x²))` on `[r_lo, r_hi]`, `x` the rescaled coordinate.
    NegBump,
    /// `−A (r − r_lo)³ (r_hi − r)³`, normalized to peak `A`.
    NegPolyBump,
    /// `A · bump(x) · (tilt − x)`; nonnegative for `tilt ≥ 1`, nonpositive for
    /// `tilt ≤ −1`, sign-changing in between.
    HsMixedSign,
}

impl Family {
    pub fn as_str(&self) -> &'static str {
        match self {
            Family::NegBump => "neg_bump",
            Family::NegPolyBump => "neg_poly_bump",
            Family::HsMixedSign => "hs_mixed_sign",
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "neg_bump" => Ok(Family::NegBump),
            "neg_poly_bump" => Ok(Family::NegPolyBump),
            "hs_mixed_sign" => Ok(Family::HsMixedSign),
            other => Err(Error::Config(format!(
                "family: unknown value '{other}' (expected neg_bump, neg_poly_bump or hs_mixed_sign)"
            ))),
        }
    }
}

/// Everything needed to reproduce one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub sigma: u8,
    pub k: u8,
    pub n: u32,
    /// Number of grid nodes.
    pub nodes: usize,
    pub r_max: f64,
    pub spacing: Spacing,
    pub family: Family,
    pub amplitude: f64,
    pub r_lo: f64,
    pub r_hi: f64,
    /// Only used by [`Family::HsMixedSign`].
    pub tilt: f64,
    /// Relative size of the seeded smooth perturbation; 0 disables it.
    pub perturbation: f64,
    pub dt: f64,
    pub horizon: f64,
    pub epsilon: f64,
    pub output: Option<PathBuf>,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            sigma: 0,
            k: 1,
            n: 3,
            nodes: 1024,
            r_max: 20.0,
            spacing: Spacing::Uniform,
            family: Family::NegBump,
            amplitude: 1.0,
            r_lo: 1.0,
            r_hi: 3.0,
            tilt: 2.0,
            perturbation: 0.0,
            dt: 1e-3,
            horizon: 10.0,
            epsilon: 0.05,
            output: None,
            seed: 0,
        }
    }
}

/// Keys accepted in a config file, in serialization order.
pub const KEYS: [&str; 18] = [
    "sigma",
    "k",
    "n",
    "N",
    "r_max",
    "spacing",
    "grading",
    "family",
    "amplitude",
    "r_lo",
    "r_hi",
    "tilt",
    "perturbation",
    "dt",
    "horizon",
    "epsilon",
    "output",
    "seed",
];

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Config(format!("{key}: cannot parse '{value}' as a number")))
}

impl ScenarioConfig {
    /// Parses `key = value` lines; `#` starts a comment. Missing keys keep
    /// their defaults; unknown or repeated keys are errors. The result is
    /// validated.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen = std::collections::HashSet::new();
        let mut grading: Option<f64> = None;
        let mut graded = false;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value', got '{line}'", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(Error::Config(format!("{key}: given more than once (line {})", lineno + 1)));
            }
            cfg.set(key, value, &mut graded, &mut grading)?;
        }
        cfg.spacing = match (graded, grading) {
            (true, g) => Spacing::Graded(g.unwrap_or(1.5)),
            (false, Some(_)) => {
                return Err(Error::Config("grading: only meaningful with spacing = graded".into()));
            }
            (false, None) => Spacing::Uniform,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets one key from its text value (used by the parser and by sweeps).
    pub fn set_value(&mut self, key: &str, value: &str) -> Result<()> {
        let mut graded = matches!(self.spacing, Spacing::Graded(_));
        let mut grading = match self.spacing {
            Spacing::Graded(g) => Some(g),
            Spacing::Uniform => None,
        };
        self.set(key, value, &mut graded, &mut grading)?;
        self.spacing = if graded { Spacing::Graded(grading.unwrap_or(1.5)) } else { Spacing::Uniform };
        Ok(())
    }

    fn set(&mut self, key: &str, value: &str, graded: &mut bool, grading: &mut Option<f64>) -> Result<()> {
        match key {
            "sigma" => self.sigma = parse_num(key, value)?,
            "k" => self.k = parse_num(key, value)?,
            "n" => self.n = parse_num(key, value)?,
            "N" => self.nodes = parse_num(key, value)?,
            "r_max" => self.r_max = parse_num(key, value)?,
            "spacing" => {
                *graded = match value {
                    "uniform" => false,
                    "graded" => true,
                    other => {
                        return Err(Error::Config(format!(
                            "spacing: unknown value '{other}' (expected uniform or graded)"
                        )))
                    }
                }
            }
            "grading" => *grading = Some(parse_num(key, value)?),
            "family" => self.family = value.parse()?,
            "amplitude" => self.amplitude = parse_num(key, value)?,
            "r_lo" => self.r_lo = parse_num(key, value)?,
            "r_hi" => self.r_hi = parse_num(key, value)?,
            "tilt" => self.tilt = parse_num(key, value)?,
            "perturbation" => self.perturbation = parse_num(key, value)?,
            "dt" => self.dt = parse_num(key, value)?,
            "horizon" => self.horizon = parse_num(key, value)?,
            "epsilon" => self.epsilon = parse_num(key, value)?,
            "output" => self.output = if value.is_empty() { None } else { Some(PathBuf::from(value)) },
            "seed" => self.seed = parse_num(key, value)?,
            other => return Err(Error::Config(format!("unknown key '{other}' (known keys: {})", KEYS.join(", ")))),
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config '{}': {e}", path.display())))?;
        Self::parse(&text)
    }

    /// One `key = value` line per key; `parse(serialize(c)) == c`.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        for (key, value) in self.entries() {
            let _ = writeln!(s, "{key} = {value}");
        }
        s
    }

    /// `(key, value)` pairs in file order. `grading` is present only for
    /// graded grids.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let mut v = vec![
            ("sigma", self.sigma.to_string()),
            ("k", self.k.to_string()),
            ("n", self.n.to_string()),
            ("N", self.nodes.to_string()),
            ("r_max", self.r_max.to_string()),
        ];
        match self.spacing {
            Spacing::Uniform => v.push(("spacing", "uniform".into())),
            Spacing::Graded(g) => {
                v.push(("spacing", "graded".into()));
                v.push(("grading", g.to_string()));
            }
        }
        v.extend([
            ("family", self.family.as_str().to_string()),
            ("amplitude", self.amplitude.to_string()),
            ("r_lo", self.r_lo.to_string()),
            ("r_hi", self.r_hi.to_string()),
            ("tilt", self.tilt.to_string()),
            ("perturbation", self.perturbation.to_string()),
            ("dt", self.dt.to_string()),
            ("horizon", self.horizon.to_string()),
            ("epsilon", self.epsilon.to_string()),
            ("output", self.output.as_ref().map(|p| p.display().to_string()).unwrap_or_default()),
            ("seed", self.seed.to_string()),
        ]);
        v
    }

    pub fn spec(&self) -> Result<KernelSpec> {
        KernelSpec::new(self.sigma, self.k, self.n).map_err(|e| Error::Config(format!("sigma/k/n: {e}")))
    }

    pub fn grid(&self) -> Result<RadialGrid> {
        RadialGrid::new(self.nodes, self.r_max, self.spacing, self.r_hi).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.spec()?;
        if self.nodes < 128 {
            return Err(Error::Config(format!("N: need at least 128 nodes, got {}", self.nodes)));
        }
        if !(self.r_max > 0.0 && self.r_max.is_finite()) {
            return Err(Error::Config(format!("r_max: must be positive, got {}", self.r_max)));
        }
        if !(self.r_lo >= 0.0 && self.r_lo < self.r_hi) {
            return Err(Error::Config(format!("r_lo/r_hi: need 0 ≤ r_lo < r_hi, got [{}, {}]", self.r_lo, self.r_hi)));
        }
        if self.r_hi > 0.6 * self.r_max {
            return Err(Error::Config(format!(
                "r_hi: support must end by 0.6·r_max = {}, got {}",
                0.6 * self.r_max,
                self.r_hi
            )));
        }
        if let Spacing::Graded(g) = self.spacing {
            if !(1.0..=2.0).contains(&g) {
                return Err(Error::Config(format!("grading: must lie in [1, 2], got {g}")));
            }
        }
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return Err(Error::Config(format!("amplitude: must be ≥ 0, got {}", self.amplitude)));
        }
        if !self.tilt.is_finite() {
            return Err(Error::Config("tilt: must be finite".into()));
        }
        if !(0.0..1.0).contains(&self.perturbation) {
            return Err(Error::Config(format!("perturbation: must lie in [0, 1), got {}", self.perturbation)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("dt: must be positive, got {}", self.dt)));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::Config(format!("horizon: must be positive, got {}", self.horizon)));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Config(format!("epsilon: must lie in (0, 1), got {}", self.epsilon)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = ScenarioConfig::default();
        assert_eq!(ScenarioConfig::parse(&c.serialize()).unwrap(), c);
    }

    #[test]
    fn rejects_second_order_in_two_dimensions() {
        let err = ScenarioConfig::parse("sigma = 0\nk = 2\nn = 2\n").unwrap_err();
        assert!(err.to_string().contains("sigma/k/n"));
    }

    #[test]
    fn comments_and_unknown_keys() {
        let c = ScenarioConfig::parse("# header\nn = 4 # trailing\n\n").unwrap();
        assert_eq!(c.n, 4);
        assert!(ScenarioConfig::parse("colour = red").is_err());
        assert!(ScenarioConfig::parse("n = 3\nn = 4").is_err());
    }
}
