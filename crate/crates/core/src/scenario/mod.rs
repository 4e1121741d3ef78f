//! Scenario files, built-in initial data and reproducible run output.
//!
//! A run file is a block of `#`-prefixed metadata (code version, a timestamp,
//! the full config echo, the certificate and the run summary) followed by a
//! CSV table with columns `t,min_rho,argmin_rho_r,energy,margin,status`.
//! Everything except the timestamp line is a pure function of the config.

mod config;
mod family;

pub use config::{Family, ScenarioConfig, KEYS};
pub use family::{builtin_initial_data, MomentumFamily};

use crate::certify::{certify, BlowupCertificate, DominanceReport};
use crate::error::{Error, Result};
use crate::hunter_saxton::HsExactSolution;
use crate::solver::{FlowState, LagrangianSolver, RunOptions, RunResult, RunStatus};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Prefix of the only line allowed to differ between identical runs.
pub const TIMESTAMP_PREFIX: &str = "# generated_unix_time: ";
/// Prefix of the config echo lines.
pub const CONFIG_PREFIX: &str = "# config: ";
/// CSV column names.
pub const COLUMNS: [&str; 6] = ["t", "min_rho", "argmin_rho_r", "energy", "margin", "status"];

/// Process exit code for a run: 0 for a completed run or a detected blowup,
/// 3 when the truncation guard tripped. Configuration errors use 2.
pub fn exit_code(status: RunStatus) -> i32 {
    match status {
        RunStatus::Completed | RunStatus::BlowupDetected => 0,
        RunStatus::GuardTripped => 3,
    }
}

/// Exit code for invalid configurations and I/O failures.
pub const EXIT_CONFIG_ERROR: i32 = 2;

/// Everything produced by [`run_scenario`].
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub config: ScenarioConfig,
    /// Present when `ω_0 ≤ 0`.
    pub certificate: Option<BlowupCertificate>,
    pub dominance: Option<DominanceReport>,
    pub result: RunResult,
    /// Unix time of the run; only written to the timestamp line.
    pub timestamp: u64,
}

impl RunOutput {
    pub fn status(&self) -> RunStatus {
        self.result.status
    }

    pub fn exit_code(&self) -> i32 {
        exit_code(self.result.status)
    }

    /// The `#` metadata block, one line per entry.
    pub fn header(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# epdiff {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(s, "{TIMESTAMP_PREFIX}{}", self.timestamp);
        for line in self.config.serialize().lines() {
            let _ = writeln!(s, "{CONFIG_PREFIX}{line}");
        }
        match &self.certificate {
            Some(cert) => {
                for line in cert.report().lines() {
                    let _ = writeln!(s, "# certificate: {line}");
                }
            }
            None => {
                let _ = writeln!(s, "# certificate: not computed (initial momentum has a positive part)");
            }
        }
        if let Some(d) = &self.dominance {
            let _ = writeln!(
                s,
                "# dominance: {} (worst margin = {:.6e} at t = {:.6e})",
                if d.passed { "pass" } else { "fail" },
                d.worst_margin,
                d.worst_time
            );
        }
        let r = &self.result;
        let _ = writeln!(s, "# status: {}", r.status);
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.12e}")).unwrap_or_else(|| "none".into());
        let _ = writeln!(s, "# detection_time: {}", opt(r.detection_time));
        let _ = writeln!(s, "# extrapolated_blowup_time: {}", opt(r.extrapolated_blowup));
        if let Some(m) = &r.message {
            let _ = writeln!(s, "# message: {m}");
        }
        let _ = writeln!(
            s,
            "# units: nondimensional; t time, min_rho radial Jacobian, argmin_rho_r Lagrangian label, \
             energy kinetic energy, margin majorant minus monitored quantity (empty if not monitored)"
        );
        s
    }

    /// The CSV table including its header row. Rows before the last carry the
    /// status `running`; the last row carries the terminal status.
    pub fn csv_body(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(COLUMNS).map_err(std::io::Error::from)?;
        let rows = &self.result.rows;
        for (i, row) in rows.iter().enumerate() {
            let status = if i + 1 == rows.len() { self.result.status.as_str() } else { "running" };
            w.write_record([
                row.t.to_string(),
                format!("{:e}", row.min_rho),
                row.argmin_r.to_string(),
                format!("{:e}", row.energy),
                row.margin.map(|m| format!("{m:e}")).unwrap_or_default(),
                status.to_string(),
            ])
            .map_err(std::io::Error::from)?;
        }
        let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
    }

    pub fn render(&self) -> Result<String> {
        Ok(self.header() + &self.csv_body()?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = self.render()?;
        std::fs::write(path, text).map_err(|e| Error::Config(format!("cannot write output '{}': {e}", path.display())))
    }
}

/// Recovers the config from the echo lines of a rendered run file.
pub fn config_from_output(text: &str) -> Result<ScenarioConfig> {
    let echo: String = text.lines().filter_map(|l| l.strip_prefix(CONFIG_PREFIX)).map(|l| format!("{l}\n")).collect();
    if echo.is_empty() {
        return Err(Error::Config("no config echo found in output".into()));
    }
    ScenarioConfig::parse(&echo)
}

/// Drops the timestamp line, leaving the part of a run file that must be
/// reproducible.
pub fn strip_timestamp(text: &str) -> String {
    text.lines().filter(|l| !l.starts_with(TIMESTAMP_PREFIX)).map(|l| format!("{l}\n")).collect()
}

fn now_unix() -> u64 {
    std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Builds grid and data, certifies nonpositive momenta, integrates with the
/// comparison margin attached, and writes the output file if the config names
/// one.
pub fn run_scenario(config: &ScenarioConfig) -> Result<RunOutput> {
    config.validate()?;
    let spec = config.spec()?;
    let grid = config.grid()?;
    let family = MomentumFamily::from_config(config)?;
    let data = builtin_initial_data(&spec, &grid, &family)?;
    let certificate = data.is_nonpositive().then(|| certify(&spec, &grid, data.omega()));
    let solver = LagrangianSolver::new(spec, &grid, &data)?;
    let opts = RunOptions { dt: config.dt, horizon: config.horizon, epsilon: config.epsilon };
    let result = match &certificate {
        Some(cert) => {
            let mut monitor = |s: &FlowState| cert.margin(s);
            solver.run(&opts, Some(&mut monitor))?
        }
        None => solver.run(&opts, None)?,
    };
    let dominance = certificate.as_ref().map(|c| c.check_dominance(&result.rows));
    let out = RunOutput { config: config.clone(), certificate, dominance, result, timestamp: now_unix() };
    if let Some(path) = &config.output {
        out.write(path)?;
    }
    Ok(out)
}

/// Certificate for the configured spec, grid and momentum (also for
/// sign-mixed momenta, where it is marked not applicable).
pub fn certify_scenario(config: &ScenarioConfig) -> Result<BlowupCertificate> {
    config.validate()?;
    let spec = config.spec()?;
    let grid = config.grid()?;
    let family = MomentumFamily::from_config(config)?;
    Ok(certify(&spec, &grid, &family.sample(&grid)))
}

/// Fractions of the table end time at which [`exact_hs_table`] samples.
const TABLE_FRACTIONS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 0.9];

/// CSV table `t,r,gamma,rho,q` of the closed-form homogeneous first-order flow
/// on the grid nodes, at fixed fractions of `min(horizon, breakdown time)`.
/// A `#` line records the breakdown time.
pub fn exact_hs_table(config: &ScenarioConfig) -> Result<String> {
    config.validate()?;
    if config.sigma != 0 || config.k != 1 {
        return Err(Error::Config(format!(
            "exact-hs: the closed form needs sigma = 0 and k = 1, got sigma = {}, k = {}",
            config.sigma, config.k
        )));
    }
    let grid = config.grid()?;
    let family = MomentumFamily::from_config(config)?;
    let support = family.r_support();
    let eval = family.clone();
    let sol = HsExactSolution::new(config.n, move |r| eval.eval(r), support)?;
    let t_star = sol.breakdown_time();
    let t_end = config.horizon.min(t_star);
    let mut head = String::new();
    let _ = writeln!(head, "# epdiff {}", env!("CARGO_PKG_VERSION"));
    for line in config.serialize().lines() {
        let _ = writeln!(head, "{CONFIG_PREFIX}{line}");
    }
    let _ = writeln!(head, "# breakdown_time: {t_star:.12e}");
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["t", "r", "gamma", "rho", "q"]).map_err(std::io::Error::from)?;
    for frac in TABLE_FRACTIONS {
        let t = frac * t_end;
        for &r in grid.nodes() {
            let (g, rho) = sol.flow(t, r);
            w.write_record([t.to_string(), r.to_string(), g.to_string(), rho.to_string(), sol.q(t, r).to_string()])
                .map_err(std::io::Error::from)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    Ok(head + &String::from_utf8_lossy(&bytes))
}

/// Output path for one sweep member: `<stem>_<key>_<value>.<ext>` next to
/// `base`.
pub fn sweep_path(base: &Path, key: &str, value: &str) -> PathBuf {
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("run");
    let ext = base.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    let safe: String =
        value.chars().map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' }).collect();
    base.with_file_name(format!("{stem}_{key}_{safe}.{ext}"))
}

/// Runs `config` once per value of `key`, each writing its own file derived
/// from `base` via [`sweep_path`]. All configs are validated before any run
/// starts.
pub fn sweep(config: &ScenarioConfig, key: &str, values: &[String], base: &Path) -> Result<Vec<(PathBuf, RunOutput)>> {
    if key == "output" {
        return Err(Error::Config("sweep: 'output' cannot be swept".into()));
    }
    if values.is_empty() {
        return Err(Error::Config("sweep: no values given".into()));
    }
    let mut configs = Vec::with_capacity(values.len());
    for v in values {
        let mut c = config.clone();
        c.set_value(key, v)?;
        let path = sweep_path(base, key, v);
        c.output = Some(path.clone());
        c.validate().map_err(|e| Error::Config(format!("sweep value {key} = {v}: {e}")))?;
        configs.push((path, c));
    }
    configs.into_iter().map(|(p, c)| run_scenario(&c).map(|o| (p, o))).collect()
}
