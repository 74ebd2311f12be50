//! Command-line front end for the career-inequality pipeline.
//!
//! Configuration comes from defaults, an optional JSON config file, and
//! command-line flags, in that order of precedence (flags win). Exit
//! codes: 0 on success, 1 on usage errors, 2 on data or pipeline errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use matilda::pipeline::{run, Command, RunConfig};

#[derive(Parser)]
#[command(
    name = "matilda",
    version,
    about = "Career-inequality measurement for bibliographic corpora"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse publications, link citations, and write the corpus snapshot.
    Ingest(CommonArgs),
    /// Field descriptives: cohort sizes, dropout, team sizes, CCDFs.
    Describe(CommonArgs),
    /// Gini series per cohort, measure, counting scheme, and filter combo.
    Inequality(CommonArgs),
    /// Gender grids (Mann-Whitney U and Cliff's d) plus summaries.
    Gender(CommonArgs),
    /// Reproductive-feedback scaling fits and their envelopes.
    Matthew(CommonArgs),
    /// Early-career feature matrix with dropout and success labels.
    Features(CommonArgs),
    /// Elastic-net dropout and success models over all tiers.
    Predict(CommonArgs),
    /// Generate a synthetic corpus in the ingest formats.
    Synth(CommonArgs),
    /// Run the whole measurement pipeline on the given inputs.
    All(CommonArgs),
}

impl Cmd {
    fn split(&self) -> (Command, &CommonArgs) {
        match self {
            Cmd::Ingest(a) => (Command::Ingest, a),
            Cmd::Describe(a) => (Command::Describe, a),
            Cmd::Inequality(a) => (Command::Inequality, a),
            Cmd::Gender(a) => (Command::Gender, a),
            Cmd::Matthew(a) => (Command::Matthew, a),
            Cmd::Features(a) => (Command::Features, a),
            Cmd::Predict(a) => (Command::Predict, a),
            Cmd::Synth(a) => (Command::Synth, a),
            Cmd::All(a) => (Command::All, a),
        }
    }
}

#[derive(Args)]
struct CommonArgs {
    /// JSON config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Line-delimited publication records.
    #[arg(long)]
    input: Option<PathBuf>,

    /// Two-column CSV of citation keys (citing,cited).
    #[arg(long)]
    citations: Option<PathBuf>,

    /// Optional author_id,gender CSV overriding record labels.
    #[arg(long)]
    genders: Option<PathBuf>,

    /// Cohort start-year range, e.g. 1970:2000.
    #[arg(long)]
    cohorts: Option<String>,

    /// End of the early career (career ages 1..=TE).
    #[arg(long)]
    te: Option<usize>,

    /// Consecutive publication-free ages that define a dropout.
    #[arg(long)]
    gap: Option<usize>,

    /// Window width for windowed counting.
    #[arg(long)]
    window: Option<usize>,

    /// Attribute publications to first authors only (matthew stage).
    #[arg(long)]
    first_author: bool,

    /// Remove dropouts from the view (matthew stage).
    #[arg(long)]
    remove_dropouts: bool,

    /// Output directory (default: $MATILDA_OUT or ./out).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Seed for fold assignment and synthetic generation.
    #[arg(long)]
    seed: Option<u64>,

    /// Worker threads for per-cohort stages.
    #[arg(long)]
    jobs: Option<usize>,

    /// Significance threshold for gender-grid cells.
    #[arg(long)]
    alpha: Option<f64>,

    /// Calendar coverage enforced at ingest, e.g. 1960:2014.
    #[arg(long)]
    coverage: Option<String>,

    /// Guard years between coverage start and the first cohort.
    #[arg(long)]
    guard: Option<i32>,

    /// Drop records flagged as preprints at ingest.
    #[arg(long)]
    skip_preprints: bool,

    /// Synth scenario: paper, null, or ramp.
    #[arg(long)]
    scenario: Option<String>,

    /// Synth parameter JSON overriding the named scenario.
    #[arg(long)]
    params: Option<PathBuf>,
}

fn parse_year_range(text: &str) -> Result<(i32, i32), String> {
    let (a, b) = text
        .split_once(':')
        .ok_or_else(|| format!("expected START:END, got {text:?}"))?;
    let start = a.trim().parse().map_err(|_| format!("bad year {a:?}"))?;
    let end = b.trim().parse().map_err(|_| format!("bad year {b:?}"))?;
    Ok((start, end))
}

fn build_config(args: &CommonArgs) -> Result<RunConfig, String> {
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
            serde_json::from_str(&text).map_err(|e| format!("bad config file: {e}"))?
        }
        None => {
            let mut config = RunConfig::default();
            if let Ok(root) = std::env::var("MATILDA_OUT") {
                config.out = PathBuf::from(root);
            }
            config
        }
    };

    if let Some(v) = &args.input {
        config.input = Some(v.clone());
    }
    if let Some(v) = &args.citations {
        config.citations = Some(v.clone());
    }
    if let Some(v) = &args.genders {
        config.genders = Some(v.clone());
    }
    if let Some(v) = &args.cohorts {
        config.cohorts = parse_year_range(v)?;
    }
    if let Some(v) = args.te {
        config.t_e = v;
    }
    if let Some(v) = args.gap {
        config.gap = v;
    }
    if let Some(v) = args.window {
        config.window = v;
    }
    if args.first_author {
        config.first_author = true;
    }
    if args.remove_dropouts {
        config.remove_dropouts = true;
    }
    if let Some(v) = &args.out {
        config.out = v.clone();
    }
    if let Some(v) = args.seed {
        config.seed = v;
    }
    if let Some(v) = args.jobs {
        config.jobs = v;
    }
    if let Some(v) = args.alpha {
        config.alpha = v;
    }
    if let Some(v) = &args.coverage {
        config.coverage = Some(parse_year_range(v)?);
    }
    if let Some(v) = args.guard {
        config.guard_years = v;
    }
    if args.skip_preprints {
        config.skip_preprints = true;
    }
    if let Some(v) = &args.scenario {
        config.scenario = v.clone();
    }
    if let Some(v) = &args.params {
        config.params = Some(v.clone());
    }

    if config.t_e == 0 || config.t_e > 15 {
        return Err("--te must lie in 1..=15".into());
    }
    if config.window == 0 || config.window > 15 {
        return Err("--window must lie in 1..=15".into());
    }
    if config.gap == 0 {
        return Err("--gap must be positive".into());
    }
    Ok(config)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };

    let (command, args) = cli.command.split();
    let config = match build_config(args) {
        Ok(config) => config,
        Err(message) => {
            eprintln!("error: {message}");
            return ExitCode::from(1);
        }
    };

    match run(command, &config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
