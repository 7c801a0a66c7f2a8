//! Command-line driver: one pipeline stage per invocation, composed via
//! files.
//!
//! Subcommands: `ingest` (CSV ↔ grid stack), `split`, `train`, `compare`,
//! `predict-grid`, `composite`, `diff-grid`, `kde`, `oc4`, `render`,
//! `bench-synth`. Every successful run prints exactly one machine-parsable
//! `key=value` summary line to standard output; human-oriented tables and
//! warnings go to standard error.
//!
//! Exit codes: 0 success, 1 domain error (the error class is named in the
//! message), 2 usage error (unknown subcommand/flag, malformed value,
//! conflicting flags). Runs with identical argv and inputs produce
//! byte-identical outputs; nothing is read besides the declared flags and
//! files, and seeds are never time-derived.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{ArgGroup, Args, Parser, Subcommand};

use crate::baseline::{baseline_chl, baseline_grid, coeffs_from_json, BandRatioCoeffs};
use crate::error::{Error, Result};
use crate::estimators::knn::Aggregation;
use crate::estimators::svr::GammaSpec;
use crate::estimators::{compute_oob_mae, fit, EstimatorSpec, ModelSpec, Payload, DEFAULT_SEED};
use crate::evaluation::gridops::{composite_average, relative_error_grid};
use crate::evaluation::kde::{default_grid, grid_between, kde_density, silverman_bandwidth};
use crate::evaluation::render::{render_map, MapScale};
use crate::evaluation::{compare_models, compare_tables, mae};
use crate::grid::{flatten_grid_stack, GeoGrid, GridStack, DEFAULT_FILL};
use crate::io::{read_grid, read_model, read_table, write_grid, write_model, write_table};
use crate::sample::{BAND_NAMES, N_BANDS};
use crate::split::split_train_test;
use crate::synth::synthetic_table;

/// Run the CLI on `args` (argv without the program name), writing to the
/// given output streams. Returns the process exit code: 0 success, 1 domain
/// error, 2 usage error. Taking the streams as parameters keeps every run
/// testable in-process.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv = std::iter::once(OsString::from("chlora")).chain(args.into_iter().map(Into::into));
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{rendered}");
                    0
                }
                _ => {
                    let _ = write!(stderr, "{rendered}");
                    2
                }
            };
        }
    };
    let outcome = match &cli.command {
        Command::Ingest(a) => cmd_ingest(a),
        Command::Split(a) => cmd_split(a),
        Command::Train(a) => cmd_train(a, stderr),
        Command::Compare(a) => cmd_compare(a, stderr),
        Command::PredictGrid(a) => cmd_predict_grid(a),
        Command::Composite(a) => cmd_composite(a),
        Command::DiffGrid(a) => cmd_diff_grid(a),
        Command::Kde(a) => cmd_kde(a),
        Command::Oc4(a) => cmd_oc4(a),
        Command::Render(a) => cmd_render(a),
        Command::BenchSynth(a) => cmd_bench_synth(a, stderr),
    };
    match outcome {
        Ok(summary) => {
            let _ = writeln!(stdout, "{summary}");
            0
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}

#[derive(Parser)]
#[command(
    name = "chlora",
    version,
    about = "Chlorophyll-a retrieval from six-band sea-surface reflectance",
    color = clap::ColorChoice::Never
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert a sample CSV to a grid stack, or a grid stack to a CSV
    Ingest(IngestArgs),
    /// Shuffle a labelled table and split it into train/test CSVs
    Split(SplitArgs),
    /// Fit one estimator on a labelled table and save the model file
    Train(TrainArgs),
    /// Fit several estimators and report test MAE and accuracy for each
    Compare(CompareArgs),
    /// Apply a saved model to every valid pixel of a grid stack
    PredictGrid(PredictGridArgs),
    /// Per-pixel mean of the chl planes of several grid files
    Composite(CompositeArgs),
    /// Per-pixel relative error (pred − truth)/truth of two chl grids
    DiffGrid(DiffGridArgs),
    /// Kernel density estimate of a table's chl_a values, as CSV
    Kde(KdeArgs),
    /// Apply the OC4V4 band-ratio algorithm to a grid stack
    Oc4(Oc4Args),
    /// Render a chl grid to a PPM image with a perceptual color ramp
    Render(RenderArgs),
    /// Generate a synthetic benchmark dataset and run the full comparison
    BenchSynth(BenchSynthArgs),
}

#[derive(Args)]
struct IngestArgs {
    /// Input path; direction is chosen by which side has the .csv extension
    #[arg(long = "in")]
    input: PathBuf,
    /// Output path
    #[arg(long)]
    out: PathBuf,
    /// Grid rows (csv → grid only)
    #[arg(long)]
    rows: Option<usize>,
    /// Grid columns (csv → grid only)
    #[arg(long)]
    cols: Option<usize>,
    /// Latitude of the northern edge, degrees north (csv → grid only)
    #[arg(long, allow_negative_numbers = true)]
    lat_north: Option<f64>,
    /// Latitude of the southern edge, degrees north (csv → grid only)
    #[arg(long, allow_negative_numbers = true)]
    lat_south: Option<f64>,
    /// Longitude of the western edge, degrees east (csv → grid only)
    #[arg(long, allow_negative_numbers = true)]
    lon_west: Option<f64>,
    /// Longitude of the eastern edge, degrees east (csv → grid only)
    #[arg(long, allow_negative_numbers = true)]
    lon_east: Option<f64>,
    /// Fill value marking missing pixels (csv → grid only)
    #[arg(long, default_value_t = DEFAULT_FILL, allow_negative_numbers = true)]
    fill: f64,
}

#[derive(Args)]
struct SplitArgs {
    /// Labelled sample table (CSV)
    #[arg(long = "in")]
    input: PathBuf,
    /// Fraction of rows for the training side
    #[arg(long, default_value_t = 0.8)]
    train_frac: f64,
    /// Fraction of rows for the test side
    #[arg(long, default_value_t = 0.2)]
    test_frac: f64,
    /// Shuffle seed
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Training CSV path (default: input stem + "_train.csv")
    #[arg(long)]
    out_train: Option<PathBuf>,
    /// Test CSV path (default: input stem + "_test.csv")
    #[arg(long)]
    out_test: Option<PathBuf>,
}

#[derive(Args)]
#[command(group = ArgGroup::new("estimator").required(true).args(["model", "spec_file"]))]
struct TrainArgs {
    /// Labelled training table (CSV)
    #[arg(long = "in")]
    input: PathBuf,
    /// Model file to write (JSON)
    #[arg(long)]
    out: PathBuf,
    /// Estimator kind: linear, ridge, tree, bagging, forest, extra_trees,
    /// svr or knn, with defaults adjustable via the flags below
    #[arg(long)]
    model: Option<String>,
    /// JSON estimator spec file; replaces --model and the hyperparameter
    /// flags (--seed / --log-chl still override it)
    #[arg(long, conflicts_with_all = [
        "lambda", "n_estimators", "max_features", "max_depth",
        "min_samples_split", "c", "epsilon", "gamma", "tol", "max_iter",
        "k", "aggregation", "bootstrap",
    ])]
    spec_file: Option<PathBuf>,
    /// Seed for any randomized fitting (default 42)
    #[arg(long)]
    seed: Option<u64>,
    /// Train on log10(chl) and exponentiate predictions
    #[arg(long)]
    log_chl: bool,
    /// Also report the out-of-bag MAE (bootstrap ensembles only)
    #[arg(long)]
    oob: bool,
    /// Ridge penalty weight
    #[arg(long)]
    lambda: Option<f64>,
    /// Number of trees in an ensemble
    #[arg(long)]
    n_estimators: Option<usize>,
    /// Features considered per split (1–6)
    #[arg(long)]
    max_features: Option<usize>,
    /// Maximum tree depth (unlimited when not given)
    #[arg(long)]
    max_depth: Option<u32>,
    /// Minimum samples a node needs to be split
    #[arg(long)]
    min_samples_split: Option<usize>,
    /// Draw bootstrap resamples (true/false)
    #[arg(long)]
    bootstrap: Option<bool>,
    /// SVR box penalty C
    #[arg(long)]
    c: Option<f64>,
    /// SVR tube half-width ε
    #[arg(long)]
    epsilon: Option<f64>,
    /// SVR RBF width: "scale" or a positive number
    #[arg(long)]
    gamma: Option<String>,
    /// SVR optimizer stopping tolerance
    #[arg(long)]
    tol: Option<f64>,
    /// SVR optimizer iteration cap
    #[arg(long)]
    max_iter: Option<u64>,
    /// Neighbour count for k-NN
    #[arg(long)]
    k: Option<u32>,
    /// k-NN aggregation: mean or median
    #[arg(long)]
    aggregation: Option<String>,
}

#[derive(Args)]
struct CompareArgs {
    /// Labelled training table (CSV)
    #[arg(long)]
    train: PathBuf,
    /// Labelled test table (CSV)
    #[arg(long)]
    test: PathBuf,
    /// "all-defaults" or the path of a JSON array of estimator specs
    #[arg(long, default_value = "all-defaults")]
    specs: String,
    /// Report CSV to write (model,mae,accuracy,n_test)
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PredictGridArgs {
    /// Grid stack with the six reflectance planes
    #[arg(long = "in")]
    input: PathBuf,
    /// Model file produced by train
    #[arg(long)]
    model: PathBuf,
    /// Chlorophyll grid file to write
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CompositeArgs {
    /// Grid file with a chl plane; repeat the flag once per input
    #[arg(long = "in", required = true)]
    inputs: Vec<PathBuf>,
    /// Composite grid file to write
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DiffGridArgs {
    /// Grid file whose chl plane holds the predictions
    #[arg(long)]
    pred: PathBuf,
    /// Grid file whose chl plane holds the reference values
    #[arg(long)]
    truth: PathBuf,
    /// Relative-error grid file to write
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct KdeArgs {
    /// Sample table (CSV); density is estimated over its chl_a column
    #[arg(long = "in")]
    input: PathBuf,
    /// Density curve CSV to write (x,density)
    #[arg(long)]
    out: PathBuf,
    /// Kernel bandwidth (default: Silverman's rule)
    #[arg(long)]
    bandwidth: Option<f64>,
    /// Number of evaluation points
    #[arg(long, default_value_t = 512)]
    points: usize,
    /// Lower edge of the evaluation grid (requires --hi; default: data
    /// range widened by six bandwidths)
    #[arg(long, allow_negative_numbers = true)]
    lo: Option<f64>,
    /// Upper edge of the evaluation grid (requires --lo)
    #[arg(long, allow_negative_numbers = true)]
    hi: Option<f64>,
}

#[derive(Args)]
struct Oc4Args {
    /// Grid stack with the six reflectance planes
    #[arg(long = "in")]
    input: PathBuf,
    /// Polynomial coefficients: "paper", "canonical", or a JSON file path
    #[arg(long, default_value = "paper")]
    coeffs: String,
    /// Chlorophyll grid file to write
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RenderArgs {
    /// Grid file with a chl plane
    #[arg(long = "in")]
    input: PathBuf,
    /// PPM image to write
    #[arg(long)]
    out: PathBuf,
    /// Low end of the color range, mg/m³
    #[arg(long, default_value_t = 0.01, allow_negative_numbers = true)]
    lo: f64,
    /// High end of the color range, mg/m³
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    hi: f64,
    /// Value-to-color mapping: log10 or linear
    #[arg(long, default_value = "log10")]
    scale: MapScale,
}

#[derive(Args)]
struct BenchSynthArgs {
    /// Number of synthetic samples to draw (≥ 1000)
    #[arg(long, default_value_t = 50_000)]
    n: usize,
    /// Multiplicative log-normal band noise fraction
    #[arg(long, default_value_t = 0.02)]
    noise: f64,
    /// Seed for both generation and the split
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Directory for bench_train.csv, bench_test.csv and bench_report.csv
    #[arg(long)]
    out_dir: PathBuf,
    /// Fraction of rows for the training side
    #[arg(long, default_value_t = 0.2)]
    train_frac: f64,
    /// Fraction of rows for the test side
    #[arg(long, default_value_t = 0.02)]
    test_frac: f64,
}

fn is_csv(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// `table.csv` + `_train` → `table_train.csv`, next to the input.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "table".into());
    path.with_file_name(format!("{stem}{suffix}.csv"))
}

fn count_present(grid: &GeoGrid) -> usize {
    (0..grid.len()).filter(|&i| grid.is_present(i)).count()
}

/// Wrap a single chlorophyll plane as a band-less stack and write it.
fn write_chl_grid(
    path: &Path,
    chl: GeoGrid,
    time_start: Option<String>,
    time_end: Option<String>,
) -> Result<()> {
    write_grid(
        path,
        &GridStack::new(Vec::new(), Some(chl), time_start, time_end)?,
    )
}

fn chl_plane<'a>(stack: &'a GridStack, origin: &Path) -> Result<&'a GeoGrid> {
    stack
        .chl
        .as_ref()
        .ok_or_else(|| Error::Schema(format!("{} has no chl plane", origin.display())))
}

fn cmd_ingest(a: &IngestArgs) -> Result<String> {
    match (is_csv(&a.input), is_csv(&a.out)) {
        (true, false) => ingest_csv_to_grid(a),
        (false, true) => ingest_grid_to_csv(a),
        _ => Err(Error::Argument(
            "ingest converts between .csv tables and grid stacks; \
             exactly one of --in/--out must end in .csv"
                .into(),
        )),
    }
}

fn ingest_csv_to_grid(a: &IngestArgs) -> Result<String> {
    let require = |name: &str, v: Option<f64>| {
        v.ok_or_else(|| Error::Argument(format!("csv → grid ingestion requires --{name}")))
    };
    let rows = a
        .rows
        .ok_or_else(|| Error::Argument("csv → grid ingestion requires --rows".into()))?;
    let cols = a
        .cols
        .ok_or_else(|| Error::Argument("csv → grid ingestion requires --cols".into()))?;
    let lat_north = require("lat-north", a.lat_north)?;
    let lat_south = require("lat-south", a.lat_south)?;
    let lon_west = require("lon-west", a.lon_west)?;
    let lon_east = require("lon-east", a.lon_east)?;

    let table = read_table(&a.input)?;
    if rows * cols != table.len() {
        return Err(Error::Dimension(format!(
            "table has {} rows but the grid declares {rows} x {cols} = {} pixels",
            table.len(),
            rows * cols
        )));
    }
    let labelled = table.rows.iter().filter(|s| s.chl.is_some()).count();
    if labelled != 0 && labelled != table.len() {
        return Err(Error::Argument(format!(
            "{labelled} of {} rows carry a chl_a value; a grid needs all or none",
            table.len()
        )));
    }

    let plane = |values: Vec<f64>| {
        GeoGrid::new(
            rows, cols, lat_north, lat_south, lon_west, lon_east, a.fill, values,
        )
    };
    let mut bands = Vec::with_capacity(N_BANDS);
    for (j, name) in BAND_NAMES.iter().enumerate() {
        let values = table.rows.iter().map(|s| s.rrs[j]).collect();
        bands.push((name.to_string(), plane(values)?));
    }
    let has_chl = labelled == table.len() && labelled > 0;
    let chl = if has_chl {
        let values = table
            .rows
            .iter()
            .map(|s| s.chl.expect("all labelled"))
            .collect();
        Some(plane(values)?)
    } else {
        None
    };
    write_grid(&a.out, &GridStack::new(bands, chl, None, None)?)?;
    Ok(format!(
        "n_rows={rows} n_cols={cols} n_bands={N_BANDS} chl_plane={has_chl} out={}",
        a.out.display()
    ))
}

fn ingest_grid_to_csv(a: &IngestArgs) -> Result<String> {
    let stack = read_grid(&a.input)?;
    let flat = flatten_grid_stack(&stack)?;
    write_table(&a.out, &flat.table)?;
    Ok(format!(
        "n_pixels={} n_valid={} out={}",
        stack.geometry().len(),
        flat.table.len(),
        a.out.display()
    ))
}

fn cmd_split(a: &SplitArgs) -> Result<String> {
    let table = read_table(&a.input)?;
    let split = split_train_test(&table, a.train_frac, a.test_frac, a.seed)?;
    let out_train = a
        .out_train
        .clone()
        .unwrap_or_else(|| sibling(&a.input, "_train"));
    let out_test = a
        .out_test
        .clone()
        .unwrap_or_else(|| sibling(&a.input, "_test"));
    write_table(&out_train, &split.train)?;
    write_table(&out_test, &split.test)?;
    Ok(format!(
        "n_train={} n_test={} out_train={} out_test={}",
        split.train.len(),
        split.test.len(),
        out_train.display(),
        out_test.display()
    ))
}

fn cmd_train(a: &TrainArgs, stderr: &mut dyn Write) -> Result<String> {
    let spec = build_spec(a)?;
    let table = read_table(&a.input)?;
    let model = fit(&table, &spec)?;
    if let Payload::Svr(svr) = &model.payload {
        if !svr.converged {
            let _ = writeln!(
                stderr,
                "warning: SVR optimizer stopped at max_iter before reaching tolerance; \
                 saving the model anyway"
            );
        }
    }
    let mut summary = format!(
        "model={} n_train={} seed={}",
        spec.model_type(),
        table.len(),
        spec.seed
    );
    if a.oob {
        let report = compute_oob_mae(&model, &table)?;
        match report.mae {
            Some(m) => summary.push_str(&format!(" oob_mae={m}")),
            None => summary.push_str(" oob_mae=none"),
        }
        summary.push_str(&format!(" oob_covered={}", report.covered));
    }
    write_model(&a.out, &model)?;
    summary.push_str(&format!(" out={}", a.out.display()));
    Ok(summary)
}

/// Resolve the estimator spec from --model + hyperparameter flags, or from
/// --spec-file (then --seed / --log-chl still apply on top).
fn build_spec(a: &TrainArgs) -> Result<EstimatorSpec> {
    let mut spec = match (&a.model, &a.spec_file) {
        (Some(kind), None) => {
            let mut model = ModelSpec::default_for(kind)?;
            apply_overrides(&mut model, a)?;
            EstimatorSpec::new(model)
        }
        (None, Some(path)) => {
            let text = fs::read_to_string(path)?;
            serde_json::from_str::<EstimatorSpec>(&text)
                .map_err(|e| Error::Parse(format!("estimator spec {}: {e}", path.display())))?
        }
        // clap's argument group guarantees exactly one source.
        _ => unreachable!("--model / --spec-file group not enforced"),
    };
    if let Some(seed) = a.seed {
        spec.seed = seed;
    }
    if a.log_chl {
        spec.log_chl = true;
    }
    spec.validate()?;
    Ok(spec)
}

/// Fold the hyperparameter flags into `model`, rejecting flags that do not
/// belong to its kind.
fn apply_overrides(model: &mut ModelSpec, a: &TrainArgs) -> Result<()> {
    let mut stray: Vec<&'static str> = Vec::new();
    match model {
        ModelSpec::Linear => collect_stray(a, &[], &mut stray),
        ModelSpec::Ridge { lambda } => {
            if let Some(v) = a.lambda {
                *lambda = v;
            }
            collect_stray(a, &["lambda"], &mut stray);
        }
        ModelSpec::Tree(p) => {
            if let Some(v) = a.max_depth {
                p.max_depth = Some(v);
            }
            if let Some(v) = a.min_samples_split {
                p.min_samples_split = v;
            }
            collect_stray(a, &["max-depth", "min-samples-split"], &mut stray);
        }
        ModelSpec::Bagging(p) | ModelSpec::Forest(p) | ModelSpec::ExtraTrees(p) => {
            if let Some(v) = a.n_estimators {
                p.n_estimators = v;
            }
            if let Some(v) = a.max_features {
                p.max_features = v;
            }
            if let Some(v) = a.bootstrap {
                p.bootstrap = v;
            }
            if let Some(v) = a.max_depth {
                p.tree.max_depth = Some(v);
            }
            if let Some(v) = a.min_samples_split {
                p.tree.min_samples_split = v;
            }
            collect_stray(
                a,
                &[
                    "n-estimators",
                    "max-features",
                    "bootstrap",
                    "max-depth",
                    "min-samples-split",
                ],
                &mut stray,
            );
        }
        ModelSpec::Svr(p) => {
            if let Some(v) = a.c {
                p.c = v;
            }
            if let Some(v) = a.epsilon {
                p.epsilon = v;
            }
            if let Some(s) = &a.gamma {
                p.gamma = parse_gamma(s)?;
            }
            if let Some(v) = a.tol {
                p.tol = v;
            }
            if let Some(v) = a.max_iter {
                p.max_iter = v;
            }
            collect_stray(a, &["c", "epsilon", "gamma", "tol", "max-iter"], &mut stray);
        }
        ModelSpec::Knn(p) => {
            if let Some(v) = a.k {
                p.k = v;
            }
            if let Some(s) = &a.aggregation {
                p.aggregation = parse_aggregation(s)?;
            }
            collect_stray(a, &["k", "aggregation"], &mut stray);
        }
    }
    if stray.is_empty() {
        Ok(())
    } else {
        Err(Error::Argument(format!(
            "flags not applicable to a {} model: --{}",
            model.model_type(),
            stray.join(", --")
        )))
    }
}

/// Record every hyperparameter flag that was given but is not in `allowed`.
fn collect_stray(a: &TrainArgs, allowed: &[&str], stray: &mut Vec<&'static str>) {
    let given: [(&'static str, bool); 13] = [
        ("lambda", a.lambda.is_some()),
        ("n-estimators", a.n_estimators.is_some()),
        ("max-features", a.max_features.is_some()),
        ("max-depth", a.max_depth.is_some()),
        ("min-samples-split", a.min_samples_split.is_some()),
        ("bootstrap", a.bootstrap.is_some()),
        ("c", a.c.is_some()),
        ("epsilon", a.epsilon.is_some()),
        ("gamma", a.gamma.is_some()),
        ("tol", a.tol.is_some()),
        ("max-iter", a.max_iter.is_some()),
        ("k", a.k.is_some()),
        ("aggregation", a.aggregation.is_some()),
    ];
    for (name, present) in given {
        if present && !allowed.contains(&name) {
            stray.push(name);
        }
    }
}

fn parse_gamma(s: &str) -> Result<GammaSpec> {
    if s == "scale" {
        return Ok(GammaSpec::Scale);
    }
    s.parse::<f64>()
        .map(GammaSpec::Value)
        .map_err(|_| Error::Argument(format!("--gamma accepts \"scale\" or a number, got {s:?}")))
}

fn parse_aggregation(s: &str) -> Result<Aggregation> {
    match s {
        "mean" => Ok(Aggregation::Mean),
        "median" => Ok(Aggregation::Median),
        other => Err(Error::Argument(format!(
            "--aggregation accepts mean or median, got {other:?}"
        ))),
    }
}

fn cmd_compare(a: &CompareArgs, stderr: &mut dyn Write) -> Result<String> {
    let train = read_table(&a.train)?;
    let test = read_table(&a.test)?;
    let specs = load_specs(&a.specs)?;
    let dataset = a
        .test
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "test".into());
    let report = compare_tables(&specs, &train, &test, &dataset)?;
    fs::write(&a.out, report.to_csv())?;
    let _ = write!(stderr, "{}", report.to_text_table());
    Ok(format!(
        "n_models={} n_test={} out={}",
        report.rows.len(),
        test.len(),
        a.out.display()
    ))
}

fn load_specs(arg: &str) -> Result<Vec<EstimatorSpec>> {
    if arg == "all-defaults" {
        return Ok(EstimatorSpec::all_defaults());
    }
    let path = Path::new(arg);
    let text = fs::read_to_string(path)?;
    let specs: Vec<EstimatorSpec> = serde_json::from_str(&text)
        .map_err(|e| Error::Parse(format!("estimator spec list {}: {e}", path.display())))?;
    if specs.is_empty() {
        return Err(Error::Argument(format!(
            "estimator spec list {} is empty",
            path.display()
        )));
    }
    Ok(specs)
}

fn cmd_predict_grid(a: &PredictGridArgs) -> Result<String> {
    let stack = read_grid(&a.input)?;
    let model = read_model(&a.model)?;
    let grid = model.predict_grid(&stack)?;
    let n_valid = count_present(&grid);
    let n_pixels = grid.len();
    write_chl_grid(
        &a.out,
        grid,
        stack.time_start.clone(),
        stack.time_end.clone(),
    )?;
    Ok(format!(
        "n_pixels={n_pixels} n_valid={n_valid} out={}",
        a.out.display()
    ))
}

fn cmd_composite(a: &CompositeArgs) -> Result<String> {
    let mut grids = Vec::with_capacity(a.inputs.len());
    for path in &a.inputs {
        let stack = read_grid(path)?;
        grids.push(chl_plane(&stack, path)?.clone());
    }
    let composite = composite_average(&grids)?;
    let n_covered = composite.counts.iter().filter(|&&c| c > 0).count();
    let n_pixels = composite.grid.len();
    write_chl_grid(&a.out, composite.grid, None, None)?;
    Ok(format!(
        "n_grids={} n_pixels={n_pixels} n_covered={n_covered} out={}",
        a.inputs.len(),
        a.out.display()
    ))
}

fn cmd_diff_grid(a: &DiffGridArgs) -> Result<String> {
    let pred_stack = read_grid(&a.pred)?;
    let truth_stack = read_grid(&a.truth)?;
    let diff = relative_error_grid(
        chl_plane(&pred_stack, &a.pred)?,
        chl_plane(&truth_stack, &a.truth)?,
    )?;
    let n_compared = count_present(&diff);
    let n_pixels = diff.len();
    write_chl_grid(&a.out, diff, None, None)?;
    Ok(format!(
        "n_pixels={n_pixels} n_compared={n_compared} out={}",
        a.out.display()
    ))
}

fn cmd_kde(a: &KdeArgs) -> Result<String> {
    let table = read_table(&a.input)?;
    let values: Vec<f64> = table.rows.iter().filter_map(|s| s.chl).collect();
    if values.is_empty() {
        return Err(Error::Argument(format!(
            "{} has no chl_a values to estimate a density from",
            a.input.display()
        )));
    }
    let bandwidth = match a.bandwidth {
        Some(h) => h,
        None => silverman_bandwidth(&values)?,
    };
    let xs = match (a.lo, a.hi) {
        (Some(lo), Some(hi)) => grid_between(lo, hi, a.points)?,
        (None, None) => default_grid(&values, bandwidth, a.points)?,
        _ => {
            return Err(Error::Argument(
                "--lo and --hi must be given together".into(),
            ))
        }
    };
    let curve = kde_density(&values, bandwidth, &xs)?;
    fs::write(&a.out, curve.to_csv())?;
    Ok(format!(
        "n={} bandwidth={bandwidth} points={} out={}",
        values.len(),
        xs.len(),
        a.out.display()
    ))
}

fn cmd_oc4(a: &Oc4Args) -> Result<String> {
    let stack = read_grid(&a.input)?;
    let coeffs = load_coeffs(&a.coeffs)?;
    let grid = baseline_grid(&stack, &coeffs)?;
    let n_valid = count_present(&grid);
    let n_pixels = grid.len();
    write_chl_grid(
        &a.out,
        grid,
        stack.time_start.clone(),
        stack.time_end.clone(),
    )?;
    Ok(format!(
        "n_pixels={n_pixels} n_valid={n_valid} out={}",
        a.out.display()
    ))
}

fn load_coeffs(arg: &str) -> Result<BandRatioCoeffs> {
    match arg {
        "paper" => Ok(BandRatioCoeffs::paper()),
        "canonical" => Ok(BandRatioCoeffs::canonical()),
        path => coeffs_from_json(&fs::read_to_string(Path::new(path))?),
    }
}

fn cmd_render(a: &RenderArgs) -> Result<String> {
    let stack = read_grid(&a.input)?;
    let grid = chl_plane(&stack, &a.input)?;
    let bytes = render_map(grid, a.lo, a.hi, a.scale)?;
    fs::write(&a.out, &bytes)?;
    Ok(format!(
        "rows={} cols={} lo={} hi={} scale={} out={}",
        grid.n_rows,
        grid.n_cols,
        a.lo,
        a.hi,
        a.scale,
        a.out.display()
    ))
}

fn cmd_bench_synth(a: &BenchSynthArgs, stderr: &mut dyn Write) -> Result<String> {
    let table = synthetic_table(a.n, a.noise, a.seed)?;
    let split = split_train_test(&table, a.train_frac, a.test_frac, a.seed)?;
    fs::create_dir_all(&a.out_dir)?;
    // The tables go to disk before the model comparison so that a comparison
    // failure (e.g. collinear features at noise 0) still leaves the dataset
    // behind for inspection.
    write_table(&a.out_dir.join("bench_train.csv"), &split.train)?;
    write_table(&a.out_dir.join("bench_test.csv"), &split.test)?;

    let coeffs = BandRatioCoeffs::paper();
    let truth = split.test.targets()?;
    let inverted: Vec<f64> = split
        .test
        .rows
        .iter()
        .map(|s| baseline_chl(s, &coeffs))
        .collect::<Result<_>>()?;
    let baseline_mae = mae(&inverted, &truth)?;

    let report = compare_models(&EstimatorSpec::all_defaults(), &split, "bench-synth")?;
    let report_path = a.out_dir.join("bench_report.csv");
    fs::write(&report_path, report.to_csv())?;
    let _ = write!(stderr, "{}", report.to_text_table());
    Ok(format!(
        "n={} noise={} seed={} n_train={} n_test={} baseline_mae={baseline_mae} report={}",
        a.n,
        a.noise,
        a.seed,
        split.train.len(),
        split.test.len(),
        report_path.display()
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::{Sample, SampleTable};

    /// Run the CLI in-process, returning (exit code, stdout, stderr).
    fn run_cli(args: &[&str]) -> (u8, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(args.iter().copied(), &mut out, &mut err);
        (
            code,
            String::from_utf8(out).expect("stdout is UTF-8"),
            String::from_utf8(err).expect("stderr is UTF-8"),
        )
    }

    /// A small labelled table with a noisy-ish monotone band→chl relation.
    fn toy_table(n: usize) -> SampleTable {
        let rows = (0..n)
            .map(|i| {
                let t = (i + 1) as f64 / n as f64;
                Sample {
                    rrs: [
                        0.004 + 0.002 * t,
                        0.005 + 0.001 * t,
                        0.006 - 0.002 * t,
                        0.005 - 0.001 * t,
                        0.005,
                        0.001 + 0.0005 * ((7 * i % 13) as f64 / 13.0),
                    ],
                    chl: Some(0.2 + 3.0 * t),
                }
            })
            .collect();
        SampleTable::new(rows)
    }

    #[test]
    fn help_goes_to_stdout_with_exit_zero() {
        let (code, out, err) = run_cli(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("Usage"), "help text missing: {out}");
        assert!(out.contains("bench-synth"));
        assert!(err.is_empty());
    }

    #[test]
    fn version_goes_to_stdout_with_exit_zero() {
        let (code, out, err) = run_cli(&["--version"]);
        assert_eq!(code, 0);
        assert!(out.contains("chlora"));
        assert!(err.is_empty());
    }

    #[test]
    fn unknown_subcommand_is_a_usage_error() {
        let (code, out, err) = run_cli(&["frobnicate"]);
        assert_eq!(code, 2);
        assert!(out.is_empty());
        assert!(!err.is_empty());
    }

    #[test]
    fn unknown_flag_is_a_usage_error() {
        let (code, _, err) = run_cli(&["split", "--in", "x.csv", "--frobnicate"]);
        assert_eq!(code, 2);
        assert!(err.contains("--frobnicate"));
    }

    #[test]
    fn missing_input_file_exits_one_with_the_error_class() {
        let (code, out, err) = run_cli(&["split", "--in", "/nonexistent/nowhere.csv"]);
        assert_eq!(code, 1);
        assert!(out.is_empty());
        assert!(err.starts_with("error: io error"), "got: {err}");
    }

    #[test]
    fn split_writes_sibling_files_and_a_summary_line() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("t.csv");
        write_table(&input, &toy_table(10)).unwrap();
        let (code, out, err) = run_cli(&[
            "split",
            "--in",
            input.to_str().unwrap(),
            "--train-frac",
            "0.5",
            "--test-frac",
            "0.3",
            "--seed",
            "7",
        ]);
        assert_eq!(code, 0, "stderr: {err}");
        let train_path = dir.path().join("t_train.csv");
        let test_path = dir.path().join("t_test.csv");
        assert_eq!(
            out,
            format!(
                "n_train=5 n_test=3 out_train={} out_test={}\n",
                train_path.display(),
                test_path.display()
            )
        );
        assert_eq!(read_table(&train_path).unwrap().len(), 5);
        assert_eq!(read_table(&test_path).unwrap().len(), 3);
    }

    #[test]
    fn train_requires_a_model_source() {
        let (code, _, err) = run_cli(&["train", "--in", "x.csv", "--out", "m.json"]);
        assert_eq!(code, 2);
        assert!(
            err.contains("--model") || err.contains("--spec-file"),
            "got: {err}"
        );
    }

    #[test]
    fn spec_file_conflicts_with_hyperparameter_flags() {
        let (code, _, err) = run_cli(&[
            "train",
            "--in",
            "x.csv",
            "--out",
            "m.json",
            "--spec-file",
            "s.json",
            "--lambda",
            "2.0",
        ]);
        assert_eq!(code, 2);
        assert!(err.contains("--lambda"), "got: {err}");
    }

    #[test]
    fn misapplied_hyperparameter_flag_is_an_argument_error() {
        // Checked before any file is read, so the paths need not exist.
        let (code, _, err) = run_cli(&[
            "train", "--in", "x.csv", "--out", "m.json", "--model", "linear", "--k", "3",
        ]);
        assert_eq!(code, 1);
        assert!(err.starts_with("error: argument error"), "got: {err}");
        assert!(err.contains("--k"));
    }

    #[test]
    fn ingest_train_predict_render_pipeline_runs_end_to_end() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("pixels.csv");
        write_table(&csv, &toy_table(4)).unwrap();
        let train_csv = dir.path().join("train.csv");
        write_table(&train_csv, &toy_table(20)).unwrap();

        let grid_path = dir.path().join("stack.ocg");
        let (code, out, err) = run_cli(&[
            "ingest",
            "--in",
            csv.to_str().unwrap(),
            "--out",
            grid_path.to_str().unwrap(),
            "--rows",
            "2",
            "--cols",
            "2",
            "--lat-north",
            "46.0",
            "--lat-south",
            "40.0",
            "--lon-west",
            "-6.0",
            "--lon-east",
            "16.0",
        ]);
        assert_eq!(code, 0, "stderr: {err}");
        assert!(out.starts_with("n_rows=2 n_cols=2 n_bands=6 chl_plane=true"));

        let model_path = dir.path().join("ridge.json");
        let (code, out, err) = run_cli(&[
            "train",
            "--in",
            train_csv.to_str().unwrap(),
            "--out",
            model_path.to_str().unwrap(),
            "--model",
            "ridge",
            "--lambda",
            "0.5",
        ]);
        assert_eq!(code, 0, "stderr: {err}");
        assert!(
            out.starts_with("model=ridge n_train=20 seed=42"),
            "got: {out}"
        );

        let chl_path = dir.path().join("chl.ocg");
        let (code, out, err) = run_cli(&[
            "predict-grid",
            "--in",
            grid_path.to_str().unwrap(),
            "--model",
            model_path.to_str().unwrap(),
            "--out",
            chl_path.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "stderr: {err}");
        assert!(out.starts_with("n_pixels=4 n_valid=4"), "got: {out}");
        let predicted = read_grid(&chl_path).unwrap();
        assert!(predicted.chl.is_some());
        assert!(predicted.bands.is_empty());

        let ppm_path = dir.path().join("map.ppm");
        let (code, out, err) = run_cli(&[
            "render",
            "--in",
            chl_path.to_str().unwrap(),
            "--out",
            ppm_path.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "stderr: {err}");
        assert!(out.contains("scale=log10"));
        let bytes = fs::read(&ppm_path).unwrap();
        assert!(bytes.starts_with(b"P6\n2 2\n255\n"));
        assert_eq!(bytes.len(), 11 + 12);
    }

    #[test]
    fn ingest_requires_exactly_one_csv_side() {
        let (code, _, err) = run_cli(&["ingest", "--in", "a.csv", "--out", "b.csv"]);
        assert_eq!(code, 1);
        assert!(err.starts_with("error: argument error"), "got: {err}");
    }

    #[test]
    fn kde_lo_and_hi_must_come_together() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("t.csv");
        write_table(&input, &toy_table(8)).unwrap();
        let (code, _, err) = run_cli(&[
            "kde",
            "--in",
            input.to_str().unwrap(),
            "--out",
            dir.path().join("d.csv").to_str().unwrap(),
            "--lo",
            "0.1",
        ]);
        assert_eq!(code, 1);
        assert!(err.contains("--lo and --hi"), "got: {err}");
    }

    #[test]
    fn kde_writes_a_density_curve() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("t.csv");
        write_table(&input, &toy_table(20)).unwrap();
        let out_path = dir.path().join("density.csv");
        let (code, out, err) = run_cli(&[
            "kde",
            "--in",
            input.to_str().unwrap(),
            "--out",
            out_path.to_str().unwrap(),
            "--points",
            "64",
        ]);
        assert_eq!(code, 0, "stderr: {err}");
        assert!(out.starts_with("n=20 bandwidth="), "got: {out}");
        let text = fs::read_to_string(&out_path).unwrap();
        assert!(text.starts_with("x,density\n"));
        assert_eq!(text.lines().count(), 65);
    }

    #[test]
    fn compare_writes_an_eight_row_report() {
        let dir = tempfile::tempdir().unwrap();
        let table = synthetic_table(1000, 0.05, 3).unwrap();
        let split = split_train_test(&table, 0.03, 0.01, 3).unwrap();
        let train = dir.path().join("train.csv");
        let test = dir.path().join("test.csv");
        write_table(&train, &split.train).unwrap();
        write_table(&test, &split.test).unwrap();
        let out_path = dir.path().join("report.csv");
        let (code, out, err) = run_cli(&[
            "compare",
            "--train",
            train.to_str().unwrap(),
            "--test",
            test.to_str().unwrap(),
            "--out",
            out_path.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "stderr: {err}");
        assert!(out.starts_with("n_models=8 n_test=10"), "got: {out}");
        // The human-readable table goes to stderr, not stdout.
        assert!(err.contains("extra_trees"));
        assert_eq!(out.lines().count(), 1);
        let text = fs::read_to_string(&out_path).unwrap();
        assert!(text.starts_with("model,mae,accuracy,n_test\n"));
        assert_eq!(text.lines().count(), 9);
    }

    #[test]
    fn bench_synth_is_reproducible_byte_for_byte() {
        let dir = tempfile::tempdir().unwrap();
        let run_dir = |name: &str| {
            let out_dir = dir.path().join(name);
            let (code, out, err) = run_cli(&[
                "bench-synth",
                "--n",
                "1000",
                "--noise",
                "0.05",
                "--seed",
                "11",
                "--out-dir",
                out_dir.to_str().unwrap(),
            ]);
            assert_eq!(code, 0, "stderr: {err}");
            assert!(out.contains("n_train=200 n_test=20"), "got: {out}");
            assert!(out.contains("baseline_mae="));
            out_dir
        };
        let first = run_dir("a");
        let second = run_dir("b");
        for name in ["bench_train.csv", "bench_test.csv", "bench_report.csv"] {
            let lhs = fs::read(first.join(name)).unwrap();
            let rhs = fs::read(second.join(name)).unwrap();
            assert_eq!(lhs, rhs, "{name} differs between identical runs");
        }
    }

    #[test]
    fn composite_and_diff_grid_work_on_chl_stacks() {
        let dir = tempfile::tempdir().unwrap();
        let plane = |values: Vec<f64>| {
            GeoGrid::new(1, 2, 10.0, 0.0, 0.0, 20.0, DEFAULT_FILL, values).unwrap()
        };
        let a_path = dir.path().join("a.ocg");
        let b_path = dir.path().join("b.ocg");
        write_chl_grid(&a_path, plane(vec![1.0, 2.0]), None, None).unwrap();
        write_chl_grid(&b_path, plane(vec![3.0, DEFAULT_FILL]), None, None).unwrap();

        let comp_path = dir.path().join("comp.ocg");
        let (code, out, err) = run_cli(&[
            "composite",
            "--in",
            a_path.to_str().unwrap(),
            "--in",
            b_path.to_str().unwrap(),
            "--out",
            comp_path.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "stderr: {err}");
        assert_eq!(
            out,
            format!(
                "n_grids=2 n_pixels=2 n_covered=2 out={}\n",
                comp_path.display()
            )
        );
        let comp = read_grid(&comp_path).unwrap();
        assert_eq!(comp.chl.as_ref().unwrap().values, vec![2.0, 2.0]);

        let diff_path = dir.path().join("diff.ocg");
        let (code, out, err) = run_cli(&[
            "diff-grid",
            "--pred",
            comp_path.to_str().unwrap(),
            "--truth",
            a_path.to_str().unwrap(),
            "--out",
            diff_path.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "stderr: {err}");
        assert!(out.starts_with("n_pixels=2 n_compared=2"), "got: {out}");
        let diff = read_grid(&diff_path).unwrap();
        assert_eq!(diff.chl.as_ref().unwrap().values, vec![1.0, 0.0]);
    }

    #[test]
    fn oc4_matches_the_library_baseline() {
        let dir = tempfile::tempdir().unwrap();
        let table = toy_table(4);
        let csv = dir.path().join("pixels.csv");
        write_table(&csv, &table).unwrap();
        let grid_path = dir.path().join("stack.ocg");
        let (code, _, err) = run_cli(&[
            "ingest",
            "--in",
            csv.to_str().unwrap(),
            "--out",
            grid_path.to_str().unwrap(),
            "--rows",
            "1",
            "--cols",
            "4",
            "--lat-north",
            "1.0",
            "--lat-south",
            "0.0",
            "--lon-west",
            "0.0",
            "--lon-east",
            "1.0",
        ]);
        assert_eq!(code, 0, "stderr: {err}");

        let chl_path = dir.path().join("oc4.ocg");
        let (code, out, err) = run_cli(&[
            "oc4",
            "--in",
            grid_path.to_str().unwrap(),
            "--out",
            chl_path.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "stderr: {err}");
        assert!(out.starts_with("n_pixels=4 n_valid=4"), "got: {out}");

        // The grid container stores float32 planes, so the reference values
        // are the baseline applied to the quantized bands, quantized again
        // on the way out.
        let coeffs = BandRatioCoeffs::paper();
        let stored = read_grid(&grid_path).unwrap();
        let flat = flatten_grid_stack(&stored).unwrap();
        let produced = read_grid(&chl_path).unwrap();
        for (pixel, sample) in produced
            .chl
            .as_ref()
            .unwrap()
            .values
            .iter()
            .zip(&flat.table.rows)
        {
            assert_eq!(*pixel, baseline_chl(sample, &coeffs).unwrap() as f32 as f64);
        }
    }

    #[test]
    fn train_oob_reports_coverage_for_a_forest() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("t.csv");
        write_table(&input, &toy_table(30)).unwrap();
        let model_path = dir.path().join("forest.json");
        let (code, out, err) = run_cli(&[
            "train",
            "--in",
            input.to_str().unwrap(),
            "--out",
            model_path.to_str().unwrap(),
            "--model",
            "forest",
            "--n-estimators",
            "50",
            "--oob",
        ]);
        assert_eq!(code, 0, "stderr: {err}");
        assert!(out.contains("oob_mae="), "got: {out}");
        assert!(out.contains("oob_covered="), "got: {out}");
    }

    #[test]
    fn train_from_spec_file_honours_seed_override() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("t.csv");
        write_table(&input, &toy_table(20)).unwrap();
        let spec_path = dir.path().join("spec.json");
        fs::write(
            &spec_path,
            r#"{"model": "knn", "k": 3, "aggregation": "median", "seed": 9}"#,
        )
        .unwrap();
        let model_path = dir.path().join("knn.json");
        let (code, out, err) = run_cli(&[
            "train",
            "--in",
            input.to_str().unwrap(),
            "--out",
            model_path.to_str().unwrap(),
            "--spec-file",
            spec_path.to_str().unwrap(),
            "--seed",
            "21",
        ]);
        assert_eq!(code, 0, "stderr: {err}");
        assert!(out.contains("model=knn"), "got: {out}");
        assert!(out.contains("seed=21"), "got: {out}");
        let model = read_model(&model_path).unwrap();
        assert_eq!(model.spec.seed, 21);
    }
}
