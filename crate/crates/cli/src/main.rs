//! Command-line front end: synthetic data generation, single-unit
//! counterfactual analysis, and Monte Carlo coverage validation.
//!
//! Exit codes: 0 on success, 2 on validation errors (bad flags, malformed
//! inputs), 1 on internal failures.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use counterfact_core::conformal::prediction_set;
use counterfact_core::counterfactual::{analyze_unit_with_spec, build_report, AnalysisOptions};
use counterfact_core::dataset::Dataset;
use counterfact_core::exec::with_threads;
use counterfact_core::experiments::{coverage_run, gen_highdim, gen_nonlinear, CoverageConfig};
use counterfact_core::features::{knot_cap, FeatureMapSpec};
use counterfact_core::schema::ColumnKind;

#[derive(Parser)]
#[command(
    name = "counterfact",
    version,
    about = "Counterfactual outcome analysis with conformal prediction intervals"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic benchmark dataset as CSV plus schema JSON.
    Synth(SynthArgs),
    /// Analyze one covariate point: per-exposure predictions, intervals
    /// and the pairwise confidence table.
    Analyze(AnalyzeArgs),
    /// Monte Carlo validation of empirical interval coverage.
    Coverage(CoverageArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ExperimentArg {
    Nonlinear,
    Highdim,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, value_enum)]
    experiment: ExperimentArg,
    /// Number of units.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Covariate dimension (highdim only).
    #[arg(long, default_value_t = 200)]
    d: usize,
    /// Covariance rank (highdim only).
    #[arg(long, default_value_t = 150)]
    rank: usize,
    /// Schema JSON path; defaults to the CSV path with extension
    /// `schema.json`.
    #[arg(long)]
    schema_out: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Dataset CSV path.
    #[arg(long)]
    data: PathBuf,
    /// Schema JSON path.
    #[arg(long)]
    schema: PathBuf,
    /// Unit covariates as a JSON object keyed by column name, e.g.
    /// '{"x1": 30}'. The key "__all__" sets every column at once.
    #[arg(long)]
    unit: String,
    /// Target coverage level.
    #[arg(long, default_value_t = 0.9)]
    beta: f64,
    /// Knots per continuous covariate.
    #[arg(long, default_value_t = 10)]
    knots: usize,
    #[arg(long, default_value_t = 200)]
    grid_size: usize,
    #[arg(long, default_value_t = 0.25)]
    margin: f64,
    /// Output JSON path.
    #[arg(long)]
    out: PathBuf,
    /// Optional CSV dump of the per-exposure score curves
    /// (exposure,y_grid,pi,prediction_at).
    #[arg(long)]
    scores_csv: Option<PathBuf>,
    /// Worker threads; 1 forces sequential execution. Overridden by
    /// CF_THREADS.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct CoverageArgs {
    #[arg(long, value_enum)]
    experiment: ExperimentArg,
    /// Monte Carlo replicates.
    #[arg(long)]
    runs: usize,
    #[arg(long, default_value_t = 0.9)]
    beta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; 1 forces sequential execution. Overridden by
    /// CF_THREADS.
    #[arg(long)]
    threads: Option<usize>,
    /// Units per replicate (defaults: 120 nonlinear, 100 highdim).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    rank: Option<usize>,
    /// Knots per continuous covariate (defaults: 10 nonlinear, 1 highdim).
    #[arg(long)]
    knots: Option<usize>,
    #[arg(long, default_value_t = 200)]
    grid_size: usize,
    #[arg(long, default_value_t = 0.25)]
    margin: f64,
    /// Draw one covariance pair for all replicates instead of redrawing.
    #[arg(long)]
    fixed_covariance: bool,
    /// Optional JSON report path.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum CliError {
    Validation(String),
    Internal(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Internal(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Internal(m) => m,
        }
    }
}

fn validation(err: impl std::fmt::Display) -> CliError {
    CliError::Validation(err.to_string())
}

fn internal(err: impl std::fmt::Display) -> CliError {
    CliError::Internal(err.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Synth(args) => run_synth(args),
        Command::Analyze(args) => run_analyze(args),
        Command::Coverage(args) => run_coverage(args),
    }
}

fn effective_threads(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    match std::env::var("CF_THREADS") {
        Ok(value) => {
            let parsed: usize = value
                .parse()
                .map_err(|_| validation(format!("CF_THREADS must be an integer, got '{value}'")))?;
            if parsed == 0 {
                return Err(validation("CF_THREADS must be positive"));
            }
            Ok(Some(parsed))
        }
        Err(_) => {
            if flag == Some(0) {
                return Err(validation("--threads must be positive"));
            }
            Ok(flag)
        }
    }
}

fn run_synth(args: SynthArgs) -> Result<(), CliError> {
    let (data, _units) = match args.experiment {
        ExperimentArg::Nonlinear => gen_nonlinear(args.n, args.seed).map_err(validation)?,
        ExperimentArg::Highdim => {
            gen_highdim(args.n, args.d, args.rank, args.seed).map_err(validation)?
        }
    };
    data.save_csv(&args.out).map_err(internal)?;
    let schema_path = args
        .schema_out
        .unwrap_or_else(|| args.out.with_extension("schema.json"));
    std::fs::write(&schema_path, data.schema().to_json()).map_err(internal)?;
    println!(
        "wrote {} units to {} (schema: {})",
        data.n(),
        args.out.display(),
        schema_path.display()
    );
    Ok(())
}

/// Builds the covariate row from the unit JSON: "__all__" fills every
/// column, per-name keys override, unset binary/categorical columns fall
/// back to the reference category with a warning, unset continuous columns
/// are an error.
fn unit_row(data: &Dataset, unit_json: &str) -> Result<Vec<f64>, CliError> {
    let parsed: BTreeMap<String, f64> = serde_json::from_str(unit_json)
        .map_err(|e| validation(format!("cannot parse --unit JSON: {e}")))?;
    let schema = data.schema();
    for key in parsed.keys() {
        if key != "__all__" && !schema.columns.iter().any(|c| &c.name == key) {
            return Err(validation(format!(
                "--unit key '{key}' is not a schema column"
            )));
        }
    }
    let fill = parsed.get("__all__").copied();
    let mut row = Vec::with_capacity(schema.len());
    for col in &schema.columns {
        let value = parsed.get(&col.name).copied().or(fill);
        let value = match (value, col.kind) {
            (Some(v), _) => v,
            (None, ColumnKind::Binary) | (None, ColumnKind::Categorical { .. }) => {
                eprintln!(
                    "warning: column '{}' not set in --unit, defaulting to 0",
                    col.name
                );
                0.0
            }
            (None, ColumnKind::Continuous) => {
                return Err(validation(format!(
                    "--unit is missing a value for continuous column '{}'",
                    col.name
                )));
            }
        };
        row.push(value);
    }
    schema
        .check_row(&row)
        .map_err(|e| validation(format!("--unit: {e}")))?;
    Ok(row)
}

fn warn_if_knots_exceed_cap(data: &Dataset, knots: usize) {
    let (d_prime, d_dprime) = data.schema().binary_continuous_counts();
    let mut counts = vec![0usize; data.exposures()];
    for row in data.rows() {
        counts[row.exposure] += 1;
    }
    let n_min = counts.iter().copied().min().unwrap_or(0);
    if let Some(cap) = knot_cap(n_min, d_prime, d_dprime) {
        if knots > cap {
            eprintln!(
                "warning: {knots} knots exceed the natural cap {cap} for the \
                 smallest exposure group (n={n_min})"
            );
        }
    }
}

fn run_analyze(args: AnalyzeArgs) -> Result<(), CliError> {
    let data = Dataset::load_csv(&args.data, &args.schema).map_err(validation)?;
    let x_raw = unit_row(&data, &args.unit)?;
    warn_if_knots_exceed_cap(&data, args.knots);

    let mut opts = AnalysisOptions::new(args.beta, args.knots);
    opts.grid_size = args.grid_size;
    opts.grid_margin = args.margin;
    if !(0.0 < args.beta && args.beta < 1.0) {
        return Err(validation(format!(
            "--beta must be in (0,1), got {}",
            args.beta
        )));
    }

    let spec = FeatureMapSpec::build(data.schema(), &data.covariate_rows(), args.knots)
        .map_err(validation)?;
    let threads = effective_threads(args.threads)?;
    let analyses = with_threads(threads, |mode| {
        analyze_unit_with_spec(&data, &spec, &x_raw, &opts, mode)
    })
    .map_err(internal)?;

    let report = build_report(&data, &spec, &analyses, args.beta).map_err(internal)?;
    let json = serde_json::to_string_pretty(&report).map_err(internal)?;
    std::fs::write(&args.out, json).map_err(internal)?;

    if let Some(scores_path) = &args.scores_csv {
        write_scores_csv(scores_path, &analyses).map_err(internal)?;
    }

    print_analysis_summary(&data, &analyses, args.beta);
    println!("report written to {}", args.out.display());
    Ok(())
}

fn write_scores_csv(
    path: &Path,
    analyses: &[counterfact_core::counterfactual::ExposureAnalysis],
) -> counterfact_core::Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["exposure", "y_grid", "pi", "prediction_at"])?;
    for analysis in analyses {
        let grid = analysis.scores.grid().points();
        let pi = analysis.scores.pi();
        let preds = analysis.scores.prediction_at();
        for i in 0..grid.len() {
            writer.write_record([
                analysis.exposure.to_string(),
                grid[i].to_string(),
                pi[i].to_string(),
                preds[i].to_string(),
            ])?;
        }
    }
    writer.flush()?;
    Ok(())
}

fn format_intervals(intervals: &[(f64, f64)]) -> String {
    if intervals.is_empty() {
        return "(empty)".to_string();
    }
    let mut out = String::new();
    for (i, (lo, hi)) in intervals.iter().enumerate() {
        if i > 0 {
            out.push_str(" u ");
        }
        let _ = write!(out, "[{lo:.4}, {hi:.4}]");
    }
    out
}

fn print_analysis_summary(
    data: &Dataset,
    analyses: &[counterfact_core::counterfactual::ExposureAnalysis],
    beta: f64,
) {
    let labels = data.labels();
    println!("exposures: {}", analyses.len());
    for a in analyses {
        let set = prediction_set(&a.scores, beta).expect("beta validated");
        println!(
            "  z={} (label {}): n={}  point={:.4}  {:.0}% set: {}",
            a.exposure,
            labels[a.exposure],
            a.n,
            a.point,
            beta * 100.0,
            format_intervals(&set.intervals)
        );
    }
    if analyses.len() >= 2 {
        if let Ok(table) = counterfact_core::counterfactual::pairwise_table(analyses) {
            println!("counterfactual confidence (%), row vs column:");
            print!("      ");
            for h in 0..analyses.len() - 1 {
                print!("{:>6}", format!("z={h}"));
            }
            println!();
            for g in 1..analyses.len() {
                print!("{:>6}", format!("z={g}"));
                for h in 0..analyses.len() - 1 {
                    if h < g {
                        print!("{:>6.0}", table.confidence[g][h] * 100.0);
                    } else {
                        print!("{:>6}", "-");
                    }
                }
                println!();
            }
            println!("effect estimates (row minus column):");
            for g in 1..analyses.len() {
                for h in 0..g {
                    println!("  z={g} - z={h}: {:+.4}", table.effects[g][h]);
                }
            }
        }
    }
}

fn run_coverage(args: CoverageArgs) -> Result<(), CliError> {
    let mut config = match args.experiment {
        ExperimentArg::Nonlinear => CoverageConfig::nonlinear(args.runs, args.beta, args.seed),
        ExperimentArg::Highdim => CoverageConfig::highdim(args.runs, args.beta, args.seed),
    };
    if let Some(n) = args.n {
        config.n = n;
    }
    if let Some(d) = args.d {
        config.d = d;
    }
    if let Some(rank) = args.rank {
        config.rank = rank;
    }
    if let Some(knots) = args.knots {
        config.knots = knots;
    }
    config.grid_size = args.grid_size;
    config.grid_margin = args.margin;
    config.fixed_covariance = args.fixed_covariance;
    if !(0.0 < args.beta && args.beta < 1.0) {
        return Err(validation(format!(
            "--beta must be in (0,1), got {}",
            args.beta
        )));
    }

    let threads = effective_threads(args.threads)?;
    let report = with_threads(threads, |mode| coverage_run(&config, mode)).map_err(internal)?;

    println!("experiment   {}", report.experiment);
    println!("runs         {}", report.runs);
    println!("beta         {}", report.beta);
    println!("seed         {}", report.seed);
    println!("exposure  coverage  mean_width");
    for z in 0..report.coverage.len() {
        println!(
            "{:<9} {:<9.4} {:.4}",
            z, report.coverage[z], report.mean_width[z]
        );
    }
    if let Some(out) = &args.out {
        let json = serde_json::to_string_pretty(&report).map_err(internal)?;
        std::fs::write(out, json).map_err(internal)?;
        println!("report written to {}", out.display());
    }
    Ok(())
}
