use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use emwave::config::RunConfig;
use emwave::pipeline::{self, Manifest};
use emwave::{Error, Result};

/// Electromechanical wave simulation and wavefront analysis.
///
/// Any config key can be overridden after the named flags with
/// `--dotted.key value` or `--dotted.key=value`, e.g.
/// `--sensor.sample_rate 100 --detector.mode relative`.
#[derive(Parser)]
#[command(name = "emwave", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the disturbance and write per-sensor traces plus the trajectory.
    Simulate(Common),
    /// Detect arrivals in a trace directory and build TDOA and speed maps.
    Analyze(Common),
    /// Run the pipeline once per PV scenario and tabulate speeds.
    Scenario(Common),
    /// Locate the disturbance from a TDOA table.
    Locate(Common),
    /// Export interpolated frequency-deviation frames.
    Replay(Common),
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Root seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Per-key overrides.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "--KEY VALUE")]
    overrides: Vec<String>,
}

fn parse_overrides(tokens: &[String]) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    let mut it = tokens.iter();
    while let Some(tok) = it.next() {
        let key = tok
            .strip_prefix("--")
            .ok_or_else(|| Error::Config(format!("expected '--key value', found '{tok}'")))?;
        match key.split_once('=') {
            Some((k, v)) => out.push((k.to_string(), v.to_string())),
            None => {
                let v = it.next().ok_or_else(|| Error::Config(format!("override '--{key}' has no value")))?;
                out.push((key.to_string(), v.clone()));
            }
        }
    }
    Ok(out)
}

fn load(common: &Common) -> Result<RunConfig> {
    let mut overrides = parse_overrides(&common.overrides)?;
    if let Some(out) = &common.out {
        overrides.push(("out".into(), serde_json::to_string(out).expect("path serializes")));
    }
    if let Some(seed) = common.seed {
        overrides.push(("seed".into(), seed.to_string()));
    }
    RunConfig::load(common.config.as_deref(), &overrides)
}

fn report(m: &Manifest, cfg: &RunConfig) {
    println!(
        "{}: {} files in {} (config {})",
        m.command,
        m.files.len() + 1,
        cfg.out.display(),
        &m.config_hash[..16]
    );
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(c) => {
            let cfg = load(&c)?;
            report(&pipeline::run_simulate(&cfg)?, &cfg);
        }
        Command::Analyze(c) => {
            let cfg = load(&c)?;
            let (m, a) = pipeline::run_analyze(&cfg)?;
            for ex in &a.samples.exclusions {
                eprintln!("excluded bus {}: {}: {}", ex.bus, ex.code, ex.reason);
            }
            report(&m, &cfg);
        }
        Command::Scenario(c) => {
            let cfg = load(&c)?;
            let (m, outcomes) = pipeline::run_scenario(&cfg)?;
            for (k, o) in outcomes.iter().enumerate() {
                if let Err(e) = &o.result {
                    eprintln!("scenario {k} failed: {}: {e}", e.code());
                }
            }
            report(&m, &cfg);
        }
        Command::Locate(c) => {
            let cfg = load(&c)?;
            let (m, loc) = pipeline::run_locate(&cfg)?;
            if loc.collinear {
                eprintln!("warning: sensors are collinear; location is mirror-ambiguous");
            }
            println!("{},{},{},{}", loc.pos.x, loc.pos.y, loc.residual, loc.v_hat);
            report(&m, &cfg);
        }
        Command::Replay(c) => {
            let cfg = load(&c)?;
            report(&pipeline::run_replay(&cfg)?, &cfg);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}: {}", e.code(), e.to_string().replace('\n', " "));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
