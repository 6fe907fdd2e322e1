use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{error, info};

use ffexpand::experiment::{emit, report_json, run, ExperimentConfig, Format, Kind};
use ffexpand::Error;

#[derive(Parser)]
#[command(name = "ffexpand", version, about = "Run prime-field expansion experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Random-set expansion, exhaustive sumset checks and non-expansion witnesses.
    Expander(RunArgs),
    /// Point-hyperplane incidences against the Vinh bound.
    Incidence(RunArgs),
    /// Three-source sums, spectra and moment censuses.
    Extractor(RunArgs),
    /// Solution counts of a + b = c d.
    Sarkozy(RunArgs),
    /// Distinct entries of the n x n multiplication table.
    Multtable(RunArgs),
    /// Weil and Gauss sums, interval preimages.
    Weil(RunArgs),
    /// Smoothed interval counts for three-variable images.
    Wellspaced(RunArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
    Both,
}

#[derive(Args)]
struct RunArgs {
    /// JSON configuration; defaults to a small built-in one.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; `-` writes the JSON report to standard output.
    #[arg(long)]
    out: Option<String>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Runs even when a cost guard would refuse.
    #[arg(long)]
    override_budget: bool,
}

fn load(kind: Kind, args: &RunArgs) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::ConfigInvalid(vec![format!("{}: {e}", path.display())]))?;
            ExperimentConfig::from_json(&text)?
        }
        None => ExperimentConfig::default_for(kind),
    };
    if cfg.kind != kind {
        return Err(Error::ConfigInvalid(vec![format!(
            "kind: config is for {}, not {}",
            cfg.kind.name(),
            kind.name()
        )]));
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.output.dir = out.clone();
    }
    if let Some(f) = args.format {
        cfg.output.format = match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
            FormatArg::Both => Format::Both,
        };
    }
    cfg.override_budget |= args.override_budget;
    Ok(cfg)
}

fn execute(kind: Kind, args: &RunArgs) -> Result<(), Error> {
    let cfg = load(kind, args)?;
    let started = Instant::now();
    let report = run(&cfg)?;
    info!("{} finished in {:.3} s", kind.name(), started.elapsed().as_secs_f64());
    if cfg.output.dir == "-" {
        let mut out = std::io::stdout().lock();
        out.write_all(report_json(&report).as_bytes())?;
        out.flush()?;
        return Ok(());
    }
    for path in emit(&report, &PathBuf::from(&cfg.output.dir), cfg.output.format)? {
        info!("wrote {}", path.display());
    }
    Ok(())
}

fn configure_threads() {
    let Ok(v) = std::env::var("FFEXPAND_THREADS") else {
        return;
    };
    match v.parse::<usize>() {
        Ok(n) if n > 0 => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                error!("could not size the thread pool: {e}");
            }
        }
        _ => error!("ignoring FFEXPAND_THREADS={v}: expected a positive integer"),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    configure_threads();
    let (kind, args) = match &cli.command {
        Command::Expander(a) => (Kind::Expander, a),
        Command::Incidence(a) => (Kind::Incidence, a),
        Command::Extractor(a) => (Kind::Extractor, a),
        Command::Sarkozy(a) => (Kind::Sarkozy, a),
        Command::Multtable(a) => (Kind::Multtable, a),
        Command::Weil(a) => (Kind::Weil, a),
        Command::Wellspaced(a) => (Kind::Wellspaced, a),
    };
    match execute(kind, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ffexpand: {e}");
            ExitCode::from(match e {
                Error::ConfigInvalid(_) | Error::Parse { .. } => 2,
                Error::BudgetExceeded { .. } => 3,
                _ => 1,
            })
        }
    }
}
