use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use polyframe::domains::draw_samples_on_stream;
use polyframe::experiments::{self, ExperimentConfig, ExperimentKind};
use polyframe::rng::streams;
use polyframe::{DomainKind, DomainSpec, Error, IndexFamily, SamplingMeasure};

#[derive(Parser)]
#[command(name = "polyframe", version, about = "Polynomial frame approximation on irregular domains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Median errors against the sample budget
    Converge(RunArgs),
    /// Conditioning constants against N
    Conditioning(RunArgs),
    /// Pointwise error on a 2-d grid
    Errormap(RunArgs),
    /// Measured quantities against the theoretical bounds
    Bounds(RunArgs),
    /// Print a multi-index set, one index per line
    Indexset {
        /// total_degree, tensor_product or hyperbolic_cross
        #[arg(long)]
        kind: String,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        dim: usize,
    },
    /// Draw sample points and print them as CSV
    Samples {
        #[arg(long)]
        domain: String,
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// uniform or chebyshev
        #[arg(long, default_value = "uniform")]
        measure: String,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment description
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; defaults to the config's `output`, else the current directory
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    trials: Option<usize>,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Parse(_) | Error::Parameter(_) => 2,
        Error::Numeric(_) => 3,
        Error::SamplingFailure { .. } => 4,
        _ => 1,
    }
}

fn run_experiment(kind: ExperimentKind, args: &RunArgs) -> polyframe::Result<()> {
    let mut cfg = ExperimentConfig::from_file(&args.config)?;
    cfg.experiment = kind;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
    cfg.validate()?;
    let out = experiments::run(&cfg)?;
    let dir = args
        .out
        .clone()
        .or_else(|| cfg.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    out.write_to(&dir)?;
    for (name, _) in &out.files {
        println!("{}", Path::new(&dir).join(name).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Converge(a) => run_experiment(ExperimentKind::Converge, a),
        Command::Conditioning(a) => run_experiment(ExperimentKind::Conditioning, a),
        Command::Errormap(a) => run_experiment(ExperimentKind::ErrorMap, a),
        Command::Bounds(a) => run_experiment(ExperimentKind::Bounds, a),
        Command::Indexset { kind, n, dim } => kind
            .parse::<IndexFamily>()
            .and_then(|f| f.build(*n, *dim))
            .map(|set| print!("{}", set.to_text())),
        Command::Samples {
            domain,
            dim,
            m,
            seed,
            measure,
        } => (|| {
            let kind: DomainKind = domain.parse()?;
            let measure: SamplingMeasure = measure.parse()?;
            let spec = DomainSpec::new(kind, *dim)?;
            let set = draw_samples_on_stream(&spec, measure, *m, *seed, streams::TRAINING)?;
            print!("{}", set.to_csv());
            Ok(())
        })(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
