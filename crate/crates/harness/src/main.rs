use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ris_core::config::ReflectionModel;
use ris_core::optimizer::Objective;
use ris_harness::experiments::{obtain_codebook, run};
use ris_harness::presets::{load_codebook, load_scenario};
use ris_harness::{CodebookSource, ExperimentKind, ExperimentSpec, HarnessError};

#[derive(Parser)]
#[command(name = "ris-sweep", version, about = "RIS beam-sweeping experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Model and simulated-measurement pattern cuts per codebook entry.
    Pattern(ExperimentArgs),
    /// Beam-sweeping AoA estimation at every Rx position of the scenario.
    Sweep(ExperimentArgs),
    /// Main-lobe drift of every codebook entry across frequencies.
    Freq(ExperimentArgs),
    /// Column-row scan against exhaustive enumeration on a tiny array.
    Oracle(ExperimentArgs),
    /// Build or inspect codebook files.
    #[command(subcommand)]
    Codebook(CodebookCommand),
    /// Rerun an experiment from the spec.json it emitted.
    Rerun {
        spec: PathBuf,
        /// Write to this directory instead of the one in the spec.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Max,
    Min,
}

impl From<ObjectiveArg> for Objective {
    fn from(o: ObjectiveArg) -> Self {
        match o {
            ObjectiveArg::Max => Objective::Maximize,
            ObjectiveArg::Min => Objective::Minimize,
        }
    }
}

#[derive(Args)]
struct ExperimentArgs {
    /// Scenario JSON file.
    #[arg(long)]
    scenario: PathBuf,
    /// `scan`, `model` or a codebook JSON file.
    #[arg(long, default_value = "scan")]
    codebook: String,
    #[arg(long, value_enum, default_value = "max")]
    objective: ObjectiveArg,
    #[arg(long, default_value_t = 1)]
    iterations: usize,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated frequencies in Hz for the frequency experiment.
    #[arg(long, value_delimiter = ',')]
    frequencies: Option<Vec<f64>>,
    /// Bottom rows rewritten by the row extension (default: a quarter).
    #[arg(long)]
    case2_rows: Option<usize>,
    /// Experiment name recorded in the spec.
    #[arg(long)]
    name: Option<String>,
}

#[derive(Subcommand)]
enum CodebookCommand {
    /// Build a codebook over the scenario's Rx grid and save it as JSON.
    Build {
        #[arg(long)]
        scenario: PathBuf,
        /// `scan` or `model`.
        #[arg(long, default_value = "scan")]
        source: String,
        #[arg(long, value_enum, default_value = "max")]
        objective: ObjectiveArg,
        #[arg(long, default_value_t = 1)]
        iterations: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print a codebook's entries and configurations.
    Show { codebook: PathBuf },
}

fn spec_from(kind: ExperimentKind, a: ExperimentArgs) -> ExperimentSpec {
    ExperimentSpec {
        name: a.name.unwrap_or_else(|| kind.as_str().to_string()),
        experiment: kind,
        scenario: a.scenario,
        codebook: CodebookSource::parse(&a.codebook),
        objective: a.objective.into(),
        iterations: a.iterations,
        out: a.out,
        seed: a.seed,
        frequencies_hz: a.frequencies,
        case2_rows: a.case2_rows,
    }
}

fn execute(cli: Cli) -> Result<(), HarnessError> {
    let spec = match cli.command {
        Command::Pattern(a) => spec_from(ExperimentKind::Pattern, a),
        Command::Sweep(a) => spec_from(ExperimentKind::Sweep, a),
        Command::Freq(a) => spec_from(ExperimentKind::Freq, a),
        Command::Oracle(a) => spec_from(ExperimentKind::Oracle, a),
        Command::Rerun { spec, out } => {
            let mut s = ExperimentSpec::load(&spec)?;
            if let Some(o) = out {
                s.out = o;
            }
            s
        }
        Command::Codebook(CodebookCommand::Build {
            scenario,
            source,
            objective,
            iterations,
            out,
        }) => {
            let source = match source.as_str() {
                "scan" => CodebookSource::Scan,
                "model" => CodebookSource::Model,
                other => return Err(HarnessError::Invalid(format!("unknown codebook source {other:?}"))),
            };
            let s = load_scenario(&scenario)?;
            let cb = obtain_codebook(&s, &source, objective.into(), iterations, &ReflectionModel::default())?;
            std::fs::write(&out, cb.to_json() + "\n").map_err(|e| HarnessError::io(&out, e))?;
            println!("wrote {} entries to {}", cb.len(), out.display());
            return Ok(());
        }
        Command::Codebook(CodebookCommand::Show { codebook }) => {
            let cb = load_codebook(&codebook)?;
            println!("entries: {}", cb.len());
            println!(
                "tx direction: az {} deg, el {} deg",
                cb.tx_direction.azimuth_deg(),
                cb.tx_direction.elevation_deg()
            );
            println!("geometry fingerprint: {}", cb.geometry_fingerprint);
            if let Some(f) = &cb.scenario_fingerprint {
                println!("scenario fingerprint: {f}");
            }
            for e in &cb.entries {
                println!("\n{} deg ({:?})", e.target_azimuth_deg, e.provenance);
                print!("{}", e.config.to_text_grid());
            }
            return Ok(());
        }
    };
    let out = run(&spec)?;
    println!("{}", serde_json::to_string_pretty(&out.summary).expect("json value serializes"));
    println!("wrote {} files to {}", out.files.len(), out.dir.display());
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
