use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ghostvar_core::{Linkage, MlpConfig, Scenario, ScenarioSpec};
use ghostvar_cli::config::{parse_basis, parse_methods};
use ghostvar_cli::{export_scenario, run_analysis, CliError, CliResult, DataSource, ModelSpec, RunConfig, SplitPolicy};

#[derive(Parser)]
#[command(name = "ghostvar", version, about = "Variable relevance by ghost variables, permutations and omission")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model and compute relevances, relevance matrices and figures.
    Analyze(AnalyzeArgs),
    /// Export one of the synthetic designs as CSV.
    Scenario(ScenarioArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Linear,
    Basis,
    Mlp,
}

#[derive(Clone, Copy, ValueEnum)]
enum LinkageArg {
    Average,
    Complete,
    Single,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// CSV with a header row; all columns but the response are features.
    #[arg(long, required_unless_present = "scenario", conflicts_with = "scenario")]
    input: Option<PathBuf>,
    /// Separate test CSV; disables splitting.
    #[arg(long, requires = "input")]
    test_input: Option<PathBuf>,
    /// Synthetic design instead of a CSV file (ex1, ex2, ex3).
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long, default_value = "y")]
    response: String,
    #[arg(long, value_enum, default_value = "linear")]
    model: ModelArg,
    /// Basis terms for `--model basis`, e.g. `cos:1,cos:2,prod:2:3` (1-based).
    #[arg(long)]
    basis: Option<String>,
    #[arg(long, default_value_t = MlpConfig::default().hidden)]
    hidden: usize,
    #[arg(long, default_value_t = MlpConfig::default().decay)]
    decay: f64,
    #[arg(long, default_value_t = MlpConfig::default().epochs)]
    epochs: usize,
    #[arg(long, default_value_t = MlpConfig::default().learning_rate)]
    learning_rate: f64,
    /// Comma-separated subset of ghost, perm, omission; or `all`.
    #[arg(long, default_value = "all")]
    methods: String,
    /// Training fraction for the seeded split.
    #[arg(long, default_value_t = 0.7)]
    split: f64,
    /// Explicit training size (overrides --split).
    #[arg(long)]
    train_size: Option<usize>,
    /// Explicit test size; defaults to the remaining rows.
    #[arg(long, requires = "train_size")]
    test_size: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
    #[arg(long, default_value_t = 0.01)]
    eigen_threshold: f64,
    #[arg(long, value_enum, default_value = "average")]
    linkage: LinkageArg,
    /// External predictor command line, split shell-style.
    #[arg(long)]
    predictor_cmd: Option<String>,
    #[arg(long, default_value_t = 60.0)]
    predictor_timeout: f64,
    #[arg(long, default_value_t = 1_000_000)]
    predictor_batch_rows: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ScenarioArgs {
    #[arg(long)]
    id: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    n1: Option<usize>,
    #[arg(long)]
    n2: Option<usize>,
    /// Independent features instead of the correlated design.
    #[arg(long)]
    uncorrelated: bool,
    #[arg(long)]
    out: PathBuf,
}

fn scenario_id(s: &str) -> CliResult<Scenario> {
    s.parse().map_err(|e: ghostvar_core::Error| CliError::Config(e.to_string()))
}

fn build_config(a: AnalyzeArgs) -> CliResult<RunConfig> {
    let source = match (&a.input, &a.scenario) {
        (Some(path), _) => DataSource::Csv { path: path.clone(), test_path: a.test_input.clone(), response: a.response.clone() },
        (None, Some(id)) => DataSource::Scenario { id: scenario_id(id)?, n1: None, n2: None },
        (None, None) => return Err(CliError::Config("either --input or --scenario is required".into())),
    };
    let model = if let Some(cmd) = &a.predictor_cmd {
        let command = shlex::split(cmd).ok_or_else(|| CliError::Config(format!("cannot parse command {cmd:?}")))?;
        ModelSpec::External { command, timeout_secs: a.predictor_timeout, max_batch_rows: a.predictor_batch_rows }
    } else {
        match a.model {
            ModelArg::Linear => ModelSpec::Linear,
            ModelArg::Basis => ModelSpec::Basis { basis: a.basis.as_deref().map(parse_basis).transpose()? },
            ModelArg::Mlp => ModelSpec::Mlp {
                config: MlpConfig {
                    hidden: a.hidden,
                    decay: a.decay,
                    epochs: a.epochs,
                    learning_rate: a.learning_rate,
                    ..MlpConfig::default()
                },
            },
        }
    };
    let mut config = RunConfig::new(source, model, parse_methods(&a.methods)?, a.seed);
    config.split = match (a.train_size, a.test_size) {
        (Some(n1), n2) => SplitPolicy::Sizes { n1, n2 },
        (None, _) => SplitPolicy::Fraction { train: a.split },
    };
    config.alpha = a.alpha;
    config.eigen_threshold = a.eigen_threshold;
    config.linkage = match a.linkage {
        LinkageArg::Average => Linkage::Average,
        LinkageArg::Complete => Linkage::Complete,
        LinkageArg::Single => Linkage::Single,
    };
    config.out_dir = Some(a.out);
    Ok(config)
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Analyze(a) => {
            let config = build_config(a)?;
            let bundle = run_analysis(&config)?;
            let dir = config.out_dir.as_ref().expect("output directory set");
            for note in &bundle.notes {
                eprintln!("note: {note}");
            }
            println!("{}", dir.join("report.json").display());
            Ok(())
        }
        Command::Scenario(s) => {
            let mut spec = ScenarioSpec::new(scenario_id(&s.id)?, s.seed);
            spec.n1 = s.n1.unwrap_or(spec.n1);
            spec.n2 = s.n2.unwrap_or(spec.n2);
            spec.uncorrelated = s.uncorrelated;
            export_scenario(&spec, &s.out)?;
            println!("{}", s.out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.diagnostic());
            ExitCode::from(e.exit_code())
        }
    }
}
