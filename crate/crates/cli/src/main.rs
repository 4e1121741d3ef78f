use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use epdiff_core::scenario::{self, ScenarioConfig, EXIT_CONFIG_ERROR};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Radial EPDiff particle solver, blowup certifier and exact reference flows.
#[derive(Parser, Debug)]
#[command(name = "epdiff", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Scenario file (`key = value` lines).
    #[arg(value_name = "CONFIG", required_unless_present = "config")]
    config_pos: Option<PathBuf>,
    /// Scenario file; alternative to the positional argument.
    #[arg(long, conflicts_with = "config_pos")]
    config: Option<PathBuf>,
    /// Output file; overrides the config's `output` key. Without either the
    /// result goes to stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Suppress the summary on stderr.
    #[arg(long)]
    quiet: bool,
}

impl Common {
    fn load(&self) -> Result<ScenarioConfig> {
        let path = self.config.as_ref().or(self.config_pos.as_ref()).expect("clap enforces a config path");
        let mut cfg = ScenarioConfig::from_file(path)?;
        if let Some(out) = &self.output {
            cfg.output = Some(out.clone());
        }
        Ok(cfg)
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Certify, integrate and write the trajectory.
    Run(Common),
    /// Print or write the certificate only.
    Certify(Common),
    /// Tabulate the closed-form flow (sigma = 0, k = 1 only).
    ExactHs(Common),
    /// Run once per value of one config key, one output file per value.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Config key to vary.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
    },
}

fn emit(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write '{}'", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Run(common) => {
            let cfg = common.load()?;
            let out = scenario::run_scenario(&cfg)?;
            if cfg.output.is_none() {
                emit(&out.render()?, None)?;
            }
            if !common.quiet {
                let r = &out.result;
                eprintln!("status: {}", r.status);
                if let Some(t) = r.detection_time {
                    eprintln!("detection_time: {t:.6e}");
                }
                if let Some(c) = &out.certificate {
                    eprintln!("T_bound: {:.6e}", c.t_bound);
                }
                if let Some(m) = &r.message {
                    eprintln!("message: {m}");
                }
            }
            Ok(out.exit_code())
        }
        Command::Certify(common) => {
            let cfg = common.load()?;
            let cert = scenario::certify_scenario(&cfg)?;
            emit(&cert.report(), cfg.output.as_deref())?;
            if !common.quiet && cfg.output.is_some() {
                eprintln!("certificate passed: {}", cert.passed());
            }
            Ok(0)
        }
        Command::ExactHs(common) => {
            let cfg = common.load()?;
            let table = scenario::exact_hs_table(&cfg)?;
            emit(&table, cfg.output.as_deref())?;
            Ok(0)
        }
        Command::Sweep { common, param, values } => {
            let cfg = common.load()?;
            let base = cfg.output.clone().unwrap_or_else(|| PathBuf::from("sweep.csv"));
            let runs = scenario::sweep(&cfg, &param, &values, &base)?;
            let mut code = 0;
            for (path, out) in &runs {
                if !common.quiet {
                    eprintln!("{}: {}", path.display(), out.status());
                }
                code = code.max(out.exit_code());
            }
            Ok(code)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_CONFIG_ERROR as u8)
        }
    }
}
