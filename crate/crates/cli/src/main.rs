use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use abphase::scenario::{self, DumpKind, Sampling, Scenario};
use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

/// Aharonov-Bohm phase scenario runner.
#[derive(Parser)]
#[command(name = "abphase", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every formula and audit of a scenario and print the JSON report.
    Run {
        /// Scenario TOML file, or `preset:<name>`.
        config: String,
        /// Also write the report to this file.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Override the surface grid as `N,M`.
        #[arg(long, value_parser = parse_grid)]
        grid: Option<(usize, usize)>,
        /// Override the charge-to-ħ ratio.
        #[arg(long = "q-over-hbar", allow_hyphen_values = true)]
        q_over_hbar: Option<f64>,
    },
    /// Write fields, a surface mesh or the worldlines as CSV.
    Dump {
        config: String,
        #[arg(long)]
        what: DumpKind,
        #[arg(long)]
        out: PathBuf,
        /// Field sampling grid, e.g. `x=-3:3:31,y=-3:3:31,z=0,t=2`.
        #[arg(long)]
        sample: Option<Sampling>,
        /// Strategy whose mesh is dumped (default: the reference strategy).
        #[arg(long)]
        strategy: Option<String>,
    },
    /// Inspect the bundled presets.
    Presets {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    List,
    Show { name: String },
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (n, m) = s.split_once(',').ok_or("expected N,M")?;
    let n = n.trim().parse().map_err(|_| format!("bad N `{n}`"))?;
    let m = m.trim().parse().map_err(|_| format!("bad M `{m}`"))?;
    Ok((n, m))
}

fn load(config: &str) -> Result<Scenario> {
    let scenario = match config.strip_prefix("preset:") {
        Some(name) => scenario::load_preset(name)?,
        None => {
            let text = fs::read_to_string(Path::new(config)).with_context(|| format!("cannot read {config}"))?;
            scenario::load_scenario(&text).with_context(|| format!("invalid scenario {config}"))?
        }
    };
    Ok(scenario)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run { config, report, grid, q_over_hbar } => {
            let mut scn = load(&config)?;
            if let Some((n, m)) = grid {
                scn.set_grid(n, m)?;
            }
            if let Some(k) = q_over_hbar {
                if !k.is_finite() {
                    bail!("--q-over-hbar must be finite");
                }
                scn.constants.q_over_hbar = k;
            }
            let result = scn.run();
            let json = result.to_json();
            println!("{json}");
            if let Some(path) = report {
                fs::write(&path, format!("{json}\n")).with_context(|| format!("cannot write {}", path.display()))?;
            }
            for e in result.expectations.iter().filter(|e| !e.passed) {
                eprintln!(
                    "expectation failed: {} expected {:?} got {:?} (tolerance {}){}",
                    e.target,
                    e.expected,
                    e.actual,
                    e.tolerance,
                    e.note.as_deref().map(|n| format!(": {n}")).unwrap_or_default()
                );
            }
            Ok(result.passed)
        }
        Command::Dump { config, what, out, sample, strategy } => {
            let scn = load(&config)?;
            let csv = scn.dump(what, sample.as_ref(), strategy.as_deref())?;
            fs::write(&out, csv).with_context(|| format!("cannot write {}", out.display()))?;
            Ok(true)
        }
        Command::Presets { action: PresetAction::List } => {
            for name in scenario::preset_names() {
                let scn = scenario::load_preset(name)?;
                println!("{name}\t{}", scn.description);
            }
            Ok(true)
        }
        Command::Presets { action: PresetAction::Show { name } } => {
            match scenario::preset_source(&name) {
                Some(src) => print!("{src}"),
                None => bail!("unknown preset `{name}`"),
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
