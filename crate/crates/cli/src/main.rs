use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use infosel_tool::commands::{self, SynthArgs, DEFAULT_ARCHETYPES};
use infosel_tool::config::{Format, Overrides, RunConfig};
use infosel_tool::CliError;
use infosel_core::{MetricMode, NoiseModel};

/// Information-gain analysis of benchmark problem sets.
#[derive(Parser)]
#[command(name = "infosel", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Optional key=value configuration file; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Playthrough CSV(s) or one aggregated-statistics file (CSV or JSON).
    #[arg(long, short, global = true, value_delimiter = ',')]
    input: Vec<PathBuf>,
    #[arg(long, global = true)]
    metric: Option<MetricMode>,
    #[arg(long, global = true)]
    k: Option<usize>,
    #[arg(long, global = true)]
    sigma_floor: Option<f64>,
    #[arg(long, global = true)]
    epsilon_gain: Option<f64>,
    #[arg(long, global = true)]
    noise: Option<NoiseModel>,
    #[arg(long, global = true)]
    threshold: Option<f64>,
    #[arg(long, global = true, value_delimiter = ',')]
    format: Vec<Format>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Drop agents without records for every problem instead of failing.
    #[arg(long, global = true)]
    allow_missing: bool,
    /// Select individual metric keys instead of whole problems.
    #[arg(long, global = true)]
    per_key: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Aggregate playthroughs into per-cell statistics.
    Ingest,
    /// Rank every problem by win-rate, score and combined information gain.
    InfoGain,
    /// Greedily select the most informative problem set.
    Select,
    /// Correlation matrices, clustering and heatmaps.
    Correlate,
    /// Dump the confusion matrix for a set of problems.
    Confusion {
        #[arg(long, value_delimiter = ',', required = true)]
        problems: Vec<String>,
    },
    /// Write a synthetic playthrough corpus.
    Synth {
        #[arg(long, default_value_t = 5)]
        agents: usize,
        #[arg(long, default_value_t = 12)]
        problems: usize,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated archetypes cycled over the problems.
        #[arg(long, default_value = DEFAULT_ARCHETYPES)]
        archetypes: String,
    },
}

impl Cli {
    fn overrides(&self) -> Overrides {
        Overrides {
            inputs: (!self.input.is_empty()).then(|| self.input.clone()),
            mode: self.metric,
            k: self.k,
            sigma_floor: self.sigma_floor,
            epsilon_gain: self.epsilon_gain,
            noise: self.noise,
            threshold: self.threshold,
            out_dir: self.out.clone(),
            formats: (!self.format.is_empty()).then(|| self.format.clone()),
            allow_missing: self.allow_missing.then_some(true),
            per_key: self.per_key.then_some(true),
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = cli
        .config
        .as_ref()
        .map(|p| std::fs::read_to_string(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display()))))
        .transpose()?;
    let cfg = RunConfig::resolve(file.as_deref(), &cli.overrides())?;
    match &cli.command {
        Command::Ingest => commands::cmd_ingest(&cfg).map(drop),
        Command::InfoGain => commands::cmd_info_gain(&cfg).map(drop),
        Command::Select => commands::cmd_select(&cfg).map(drop),
        Command::Correlate => commands::cmd_correlate(&cfg).map(drop),
        Command::Confusion { problems } => commands::cmd_confusion(&cfg, problems).map(drop),
        Command::Synth {
            agents,
            problems,
            samples,
            seed,
            archetypes,
        } => commands::cmd_synth(
            &cfg,
            &SynthArgs {
                agents: *agents,
                problems: *problems,
                samples: *samples,
                seed: *seed,
                archetypes: archetypes.clone(),
            },
        )
        .map(drop),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
