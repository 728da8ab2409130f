//! Command-line pipeline: simulate event logs, train and select CTHSMM
//! candidates, inspect rules, decode observation sequences, and evaluate
//! saved models.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use cthsmm::csv_data::{load_csv, write_csv, ColumnRoles};
use cthsmm::io::write_atomic;
use cthsmm::model_json::{load_model, save_model};
use cthsmm::reports;
use cthsmm::spec_json::read_spec;
use cthsmm_core::{
    build_candidates, build_model, default_full_minbucket, grow_tree, horizon_sweep,
    sample_dataset, select_model, viterbi_decode, CthsmmModel, MinbucketScan, ModelConfig,
    PriorMode, TreeGrowthConfig,
};

#[derive(Parser)]
#[command(
    name = "cthsmm",
    version,
    about = "Learn classification-tree hidden semi-Markov models from temporal event logs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a synthetic event log from a ground-truth spec JSON.
    Simulate(SimulateArgs),
    /// Fit one model at a fixed leaf floor and save it as JSON.
    Train(TrainArgs),
    /// Build, score, and evaluate the full candidate family.
    Select(SelectArgs),
    /// Print the state definition rules of a saved model.
    Rules(RulesArgs),
    /// Decode the most probable state sojourns for an observation sequence.
    Predict(PredictArgs),
    /// Evaluate a saved model on a test event log across horizons.
    Evaluate(EvaluateArgs),
}

#[derive(Args)]
struct DataArgs {
    /// Input CSV event log.
    #[arg(long)]
    input: PathBuf,
    /// Entity id column.
    #[arg(long, default_value = "entity")]
    entity_col: String,
    /// Observation label column.
    #[arg(long, default_value = "observation")]
    obs_col: String,
    /// Duration column (positive integer time units).
    #[arg(long, default_value = "duration")]
    duration_col: String,
    /// Comma-separated predictor columns; defaults to every remaining column.
    #[arg(long, value_delimiter = ',')]
    predictors: Vec<String>,
}

impl DataArgs {
    fn roles(&self) -> ColumnRoles {
        ColumnRoles::new(
            &self.entity_col,
            &self.obs_col,
            &self.duration_col,
            self.predictors.clone(),
        )
    }
}

#[derive(Args)]
struct SimulateArgs {
    /// Ground-truth spec JSON.
    #[arg(long)]
    input: PathBuf,
    /// Directory for dataset.csv.
    #[arg(long)]
    output_dir: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Directory for model.json.
    #[arg(long)]
    output_dir: PathBuf,
    /// Leaf floor; defaults to 1% of the records, at least 1.
    #[arg(long)]
    minbucket: Option<usize>,
    /// Duration support cap as a multiple of the longest observed sojourn.
    #[arg(long, default_value_t = 1.5)]
    dmax_factor: f64,
}

#[derive(Args)]
struct SelectArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Directory for reports and candidate models.
    #[arg(long)]
    output_dir: PathBuf,
    /// Fraction of entities used for training.
    #[arg(long, default_value_t = 0.7)]
    train_fraction: f64,
    /// Seed for the entity split and cross-validation folds.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Minbucket scan range LO:HI; defaults to the full record range.
    #[arg(long)]
    scan: Option<String>,
    /// Cross-validation folds.
    #[arg(long, default_value_t = 10)]
    k_folds: usize,
    /// State prior estimator for mutual information.
    #[arg(long, value_enum, default_value_t = PriorModeArg::Record)]
    prior_mode: PriorModeArg,
    /// Horizons to sweep, e.g. "1-10" or "1,2,5".
    #[arg(long, default_value = "1-10")]
    horizons: String,
    /// Duration support cap as a multiple of the longest observed sojourn.
    #[arg(long, default_value_t = 1.5)]
    dmax_factor: f64,
}

#[derive(Args)]
struct RulesArgs {
    /// Saved model JSON.
    model: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    /// Saved model JSON.
    model: PathBuf,
    /// Observation sojourns as LABEL:HOURS pairs, e.g. "ICU:5" "Floor:48".
    #[arg(required = true)]
    observations: Vec<String>,
    /// Optional directory for decoded.json and timeline.txt.
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Saved model JSON.
    model: PathBuf,
    #[command(flatten)]
    data: DataArgs,
    /// Directory for sweep.csv.
    #[arg(long)]
    output_dir: PathBuf,
    /// Horizons to sweep, e.g. "1-10" or "1,2,5".
    #[arg(long, default_value = "1-10")]
    horizons: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum PriorModeArg {
    Uniform,
    Record,
    Duration,
}

impl From<PriorModeArg> for PriorMode {
    fn from(mode: PriorModeArg) -> PriorMode {
        match mode {
            PriorModeArg::Uniform => PriorMode::Uniform,
            PriorModeArg::Record => PriorMode::RecordFrequency,
            PriorModeArg::Duration => PriorMode::DurationWeighted,
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli.command) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Simulate(args) => simulate(args),
        Command::Train(args) => train(args),
        Command::Select(args) => select(args),
        Command::Rules(args) => rules(args),
        Command::Predict(args) => predict(args),
        Command::Evaluate(args) => evaluate(args),
    }
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let spec = read_spec(&args.input)?;
    let data = sample_dataset(&spec)?;
    let path = args.output_dir.join("dataset.csv");
    write_csv(&path, &data, &ColumnRoles::default())?;
    println!(
        "wrote {} entities, {} records to {}",
        data.n_entities(),
        data.n_records(),
        path.display()
    );
    Ok(())
}

fn train(args: TrainArgs) -> Result<()> {
    let data = load_csv(&args.data.input, &args.data.roles())?;
    let minbucket = args
        .minbucket
        .unwrap_or_else(|| default_full_minbucket(data.n_records()));
    let tree = grow_tree(&data, &TreeGrowthConfig::new(minbucket))?;
    let config = ModelConfig {
        dmax_factor: args.dmax_factor,
    };
    let model = build_model(&tree, &data, &config)?;
    let path = args.output_dir.join("model.json");
    save_model(&path, &model)?;
    println!(
        "trained a {}-state model at minbucket {} -> {}",
        model.n_states(),
        minbucket,
        path.display()
    );
    Ok(())
}

fn select(args: SelectArgs) -> Result<()> {
    let data = load_csv(&args.data.input, &args.data.roles())?;
    let horizons = parse_horizons(&args.horizons)?;
    let scan = args.scan.as_deref().map(parse_scan).transpose()?;
    let (train, test) = data.split_by_entity(args.train_fraction, args.seed)?;
    if test.n_entities() == 0 {
        bail!("the test split is empty; use --train-fraction below 1");
    }
    let config = ModelConfig {
        dmax_factor: args.dmax_factor,
    };
    let candidates = build_candidates(
        &train,
        args.k_folds,
        args.seed,
        args.prior_mode.into(),
        scan,
        &config,
    )?;
    let report = select_model(&candidates, &test, &horizons)?;

    write_atomic(
        &args.output_dir.join("selection_report.json"),
        reports::selection_report_json(&report).as_bytes(),
    )?;
    write_atomic(
        &args.output_dir.join("selection_report.csv"),
        reports::selection_report_csv(&report)?.as_bytes(),
    )?;
    write_atomic(
        &args.output_dir.join("candidates.csv"),
        reports::candidates_csv(&report)?.as_bytes(),
    )?;
    for candidate in &candidates.candidates {
        let path = args.output_dir.join(format!("model_{}.json", candidate.label));
        save_model(&path, &candidate.model)?;
    }

    println!(
        "evaluated {} candidates on {} test entities at horizons {:?}",
        report.rows.len(),
        test.n_entities(),
        report.horizons
    );
    for row in &report.rows {
        let flag = if row.is_mmie { "  [MMIE]" } else { "" };
        println!(
            "  {}: {} leaves, MI {:.4} bits, CV-MR {:.4}{}",
            row.label, row.n_leaves, row.mi_bits, row.cv_mr, flag
        );
    }
    println!("reports written to {}", args.output_dir.display());
    Ok(())
}

fn rules(args: RulesArgs) -> Result<()> {
    let model = load_model(&args.model)?;
    print!("{}", reports::rule_table(&model));
    Ok(())
}

fn predict(args: PredictArgs) -> Result<()> {
    let model = load_model(&args.model)?;
    let labels = parse_observations(&args.observations)?;
    let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
    let decoded = viterbi_decode(&model, &refs)?;
    print!("{}", reports::timeline_text(&decoded, &model));
    if let Some(dir) = args.output_dir {
        write_atomic(
            &dir.join("decoded.json"),
            reports::decoded_json(&decoded, &model).as_bytes(),
        )?;
        write_atomic(
            &dir.join("timeline.txt"),
            reports::timeline_text(&decoded, &model).as_bytes(),
        )?;
        println!("decoded output written to {}", dir.display());
    }
    Ok(())
}

fn evaluate(args: EvaluateArgs) -> Result<()> {
    let model = load_model(&args.model)?;
    let data = load_csv(&args.data.input, &args.data.roles())?;
    let horizons = parse_horizons(&args.horizons)?;
    let sweep = horizon_sweep(&model, model.tree(), &data, &horizons)?;
    let path = args.output_dir.join("sweep.csv");
    write_atomic(&path, reports::sweep_csv(&sweep)?.as_bytes())?;
    print_sweep(&model, &sweep);
    println!("sweep written to {}", path.display());
    Ok(())
}

fn print_sweep(model: &CthsmmModel, sweep: &[cthsmm_core::EvalMetrics]) {
    println!(
        "{}-state model over {} horizons:",
        model.n_states(),
        sweep.len()
    );
    for m in sweep {
        let fmt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.4}"));
        println!(
            "  horizon {:>3}: hit {}  lmrl {}  over {} sequences",
            m.horizon,
            fmt(m.hit_ratio),
            fmt(m.lmrl_ratio),
            m.n_sequences
        );
    }
}

/// Parse "1-10", "3", or "1,2,5-8" into an ascending-as-written horizon list.
fn parse_horizons(text: &str) -> Result<Vec<u32>> {
    let mut horizons = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            bail!("empty horizon entry in {text:?}");
        }
        match part.split_once('-') {
            Some((lo, hi)) => {
                let lo: u32 = lo.trim().parse().with_context(|| format!("horizon {part:?}"))?;
                let hi: u32 = hi.trim().parse().with_context(|| format!("horizon {part:?}"))?;
                if lo > hi {
                    bail!("horizon range {part:?} is descending");
                }
                horizons.extend(lo..=hi);
            }
            None => horizons.push(part.parse().with_context(|| format!("horizon {part:?}"))?),
        }
    }
    Ok(horizons)
}

/// Parse a minbucket scan range "LO:HI".
fn parse_scan(text: &str) -> Result<MinbucketScan> {
    let (lo, hi) = text
        .split_once(':')
        .with_context(|| format!("scan range {text:?} must be LO:HI"))?;
    let lo: usize = lo.trim().parse().with_context(|| format!("scan bound {lo:?}"))?;
    let hi: usize = hi.trim().parse().with_context(|| format!("scan bound {hi:?}"))?;
    Ok(MinbucketScan::new(lo, hi)?)
}

/// Expand LABEL:HOURS pairs into one label per time unit. The split is on
/// the last colon, so labels may themselves contain colons.
fn parse_observations(pairs: &[String]) -> Result<Vec<String>> {
    let mut labels = Vec::new();
    for pair in pairs {
        let (label, hours) = pair
            .rsplit_once(':')
            .with_context(|| format!("observation {pair:?} must be LABEL:HOURS"))?;
        let hours: u32 = hours
            .trim()
            .parse()
            .with_context(|| format!("observation {pair:?}: bad hour count"))?;
        if hours < 1 {
            bail!("observation {pair:?} must last at least 1 hour");
        }
        if label.is_empty() {
            bail!("observation {pair:?} has an empty label");
        }
        for _ in 0..hours {
            labels.push(label.to_string());
        }
    }
    Ok(labels)
}
