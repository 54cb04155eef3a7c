//! `ifecf` command line: `stats`, `select`, `train`, `classify`, `bench`
//! and `plot`.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 every feature
//! eliminated.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bench::{self, BenchError, EvalTarget, Metric, SelectionSpec, SweepConfig, SweepReport, Variant};
use crate::data::{self, ClassColumn, DataError, Dataset, NormalizationParams, TextFormat};
use crate::lvq::{self, LvqConfig, LvqError, LvqModel};
use crate::measures::{self, Relevance};
use crate::plot;
use crate::select::{self, Method, SelectionConfig, SelectionError, SelectionResult};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_EMPTY_SELECTION: i32 = 3;

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }

    fn data(message: impl Into<String>) -> Self {
        Self { code: EXIT_DATA, message: message.into() }
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        CliError::data(e.to_string())
    }
}

impl From<SelectionError> for CliError {
    fn from(e: SelectionError) -> Self {
        let code = match e {
            SelectionError::AllEliminated => EXIT_EMPTY_SELECTION,
            SelectionError::InvalidConfig(_) | SelectionError::TooManyFeatures { .. } => EXIT_USAGE,
            _ => EXIT_DATA,
        };
        CliError { code, message: e.to_string() }
    }
}

impl From<BenchError> for CliError {
    fn from(e: BenchError) -> Self {
        let code = match e {
            BenchError::EmptySelection { .. } => EXIT_EMPTY_SELECTION,
            BenchError::InvalidConfig(_) | BenchError::TooFewRepeats(_) => EXIT_USAGE,
            _ => EXIT_DATA,
        };
        CliError { code, message: e.to_string() }
    }
}

impl From<LvqError> for CliError {
    fn from(e: LvqError) -> Self {
        let code = match e {
            LvqError::InvalidConfig(_) => EXIT_USAGE,
            _ => EXIT_DATA,
        };
        CliError { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::data(format!("I/O error: {e}"))
    }
}

impl From<measures::MeasureError> for CliError {
    fn from(e: measures::MeasureError) -> Self {
        CliError::data(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "ifecf", version, about = "Correlation and dispersion based feature elimination with an LVQ benchmark harness")]
pub struct Cli {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Input table format.
    #[arg(long, global = true, value_enum, default_value = "csv")]
    pub format: FormatArg,
    /// Class column: header name or 0-based index (default: last column).
    #[arg(long, global = true, default_value = "last")]
    pub class_column: String,
    /// Key-value TOML file with defaults for any flag; echoed into the manifest.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Csv,
    Space,
}

impl From<FormatArg> for TextFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => TextFormat::Csv,
            FormatArg::Space => TextFormat::Space,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SortKey {
    Index,
    Dispersion,
    Ccorr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Ifecf,
    Cfs,
    Relief,
    Exhaustive,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Ifecf => Method::Ifecf,
            MethodArg::Cfs => Method::Cfs,
            MethodArg::Relief => Method::Relief,
            MethodArg::Exhaustive => Method::Exhaustive,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelevanceArg {
    Auto,
    Linear,
    Ig,
}

impl From<RelevanceArg> for Relevance {
    fn from(r: RelevanceArg) -> Self {
        match r {
            RelevanceArg::Auto => Relevance::Auto,
            RelevanceArg::Linear => Relevance::Linear,
            RelevanceArg::Ig => Relevance::InformationGain,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalArg {
    Test,
    Train,
    Whole,
}

impl From<EvalArg> for EvalTarget {
    fn from(e: EvalArg) -> Self {
        match e {
            EvalArg::Test => EvalTarget::Test,
            EvalArg::Train => EvalTarget::Train,
            EvalArg::Whole => EvalTarget::Whole,
        }
    }
}

/// Threshold flags shared by `select`, `train` and `bench`.
#[derive(Debug, Clone, Default, Args)]
pub struct SelectionArgs {
    /// Dispersion threshold δ.
    #[arg(long)]
    pub delta: Option<f64>,
    /// C-correlation floor.
    #[arg(long)]
    pub tau_c: Option<f64>,
    /// F-correlation redundancy ceiling.
    #[arg(long)]
    pub tau_f: Option<f64>,
    /// Relief sample count (default min(M, 100)).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub samples: Option<u64>,
    /// Relief weights at or below this are eliminated.
    #[arg(long)]
    pub relief_threshold: Option<f64>,
    /// Consecutive non-improving expansions before best-first search stops.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub patience: Option<u64>,
    #[arg(long, value_enum)]
    pub relevance: Option<RelevanceArg>,
    /// Equal-frequency bins for information-gain relevance.
    #[arg(long)]
    pub bins: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-feature mean, standard deviation, dispersion and C-correlation.
    Stats {
        data: PathBuf,
        #[arg(long, value_enum, default_value = "index")]
        sort: SortKey,
        #[arg(long, value_enum)]
        relevance: Option<RelevanceArg>,
    },
    /// Run a feature selection method and write its JSON report.
    Select {
        data: PathBuf,
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
        #[command(flatten)]
        thresholds: SelectionArgs,
        #[arg(long)]
        seed: Option<u64>,
        /// JSON report path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train an LVQ1 model on the whole file and write it as JSON.
    Train {
        data: PathBuf,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        prototypes: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        no_normalize: bool,
        /// Select features first with this method.
        #[arg(long, value_enum)]
        select: Option<MethodArg>,
        #[command(flatten)]
        thresholds: SelectionArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Classify a labeled file with a trained model and report accuracy.
    Classify {
        #[arg(long)]
        model: PathBuf,
        data: PathBuf,
        /// Write per-row predictions as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep train fractions × learning rates, with optional reduction.
    Bench {
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated train fractions.
        #[arg(long, value_delimiter = ',')]
        fractions: Option<Vec<f64>>,
        /// Comma-separated learning rates.
        #[arg(long, value_delimiter = ',')]
        alphas: Option<Vec<f64>>,
        #[arg(long)]
        repeats: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        prototypes: Option<usize>,
        /// Add a reduced variant selected with this method.
        #[arg(long, value_enum)]
        select: Option<MethodArg>,
        #[command(flatten)]
        thresholds: SelectionArgs,
        #[arg(long, value_enum)]
        eval: Option<EvalArg>,
        #[arg(long)]
        no_normalize: bool,
        #[arg(long)]
        stratified: bool,
        #[arg(long)]
        no_plot: bool,
        /// Re-run the sweep recorded in a previous manifest.json.
        #[arg(long)]
        from_manifest: Option<PathBuf>,
    },
    /// Regenerate SVG charts from a report.json.
    Plot {
        report: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Flat key-value defaults read from `--config`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub delta: Option<f64>,
    pub tau_c: Option<f64>,
    pub tau_f: Option<f64>,
    pub samples: Option<usize>,
    pub relief_threshold: Option<f64>,
    pub patience: Option<usize>,
    pub relevance: Option<RelevanceArg>,
    pub bins: Option<usize>,
    pub seed: Option<u64>,
    pub method: Option<MethodArg>,
    pub select: Option<MethodArg>,
    pub alpha: Option<f64>,
    pub alphas: Option<Vec<f64>>,
    pub fractions: Option<Vec<f64>>,
    pub repeats: Option<usize>,
    pub epochs: Option<usize>,
    pub prototypes: Option<usize>,
    pub eval: Option<EvalArg>,
    pub normalize: Option<bool>,
    pub stratified: Option<bool>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::usage(format!("bad config {}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    pub config: SweepConfig,
    pub class_column: ClassColumn,
    pub format: TextFormat,
    pub config_file: Option<ConfigFile>,
    pub dataset: String,
    pub dataset_sha256: String,
    pub toolkit_version: String,
    pub timestamp_unix: u64,
}

/// What a `train` run writes: everything `classify` needs to reproduce the
/// preprocessing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedArtifact {
    pub feature_names: Vec<String>,
    pub kept_features: Option<Vec<usize>>,
    pub normalizer: Option<NormalizationParams>,
    pub model: LvqModel,
}

fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn load(input: &InputArgs, path: &Path) -> Result<Dataset, CliError> {
    Ok(data::load_csv(path, &ClassColumn::parse(&input.class_column), input.format.into())?)
}

fn selection_config(args: &SelectionArgs, seed: Option<u64>, file: &ConfigFile) -> SelectionConfig {
    let d = SelectionConfig::default();
    SelectionConfig {
        delta: args.delta.or(file.delta).unwrap_or(d.delta),
        tau_c: args.tau_c.or(file.tau_c).unwrap_or(d.tau_c),
        tau_f: args.tau_f.or(file.tau_f).unwrap_or(d.tau_f),
        relief_samples: args.samples.map(|s| s as usize).or(file.samples),
        relief_threshold: args.relief_threshold.or(file.relief_threshold).unwrap_or(d.relief_threshold),
        bffs_patience: args.patience.map(|p| p as usize).or(file.patience).unwrap_or(d.bffs_patience),
        seed: seed.or(file.seed).unwrap_or(DEFAULT_SEED),
        relevance: args.relevance.or(file.relevance).map_or(d.relevance, Into::into),
        bins: args.bins.or(file.bins).unwrap_or(d.bins),
    }
}

fn fmt_num(v: f64) -> String {
    format!("{v:.4}")
}

pub fn cmd_stats(d: &Dataset, sort: SortKey, relevance: Relevance, out: &mut dyn Write) -> Result<(), CliError> {
    let stats = measures::feature_stats(d, relevance, SelectionConfig::default().bins)?;
    let mut order: Vec<usize> = (0..stats.len()).collect();
    match sort {
        SortKey::Index => {}
        SortKey::Ccorr => order.sort_by(|&a, &b| {
            stats[b].c_correlation.abs().total_cmp(&stats[a].c_correlation.abs()).then(a.cmp(&b))
        }),
        SortKey::Dispersion => order.sort_by(|&a, &b| {
            let key = |i: usize| stats[i].dispersion.unwrap_or(f64::INFINITY);
            key(a).total_cmp(&key(b)).then(a.cmp(&b))
        }),
    }
    let label = match relevance.resolve(d.class_count()) {
        Relevance::InformationGain => "ccorr(IG)",
        _ => "ccorr(r)",
    };
    writeln!(out, "{} instances, {} features, {} classes", d.n_rows(), d.n_features(), d.class_count())?;
    writeln!(out, "{:>5}  {:<24} {:>14} {:>14} {:>12} {:>10}", "index", "feature", "mean", "std", "dispersion", label)?;
    for i in order {
        let s = &stats[i];
        writeln!(
            out,
            "{:>5}  {:<24} {:>14} {:>14} {:>12} {:>10}",
            i,
            d.feature_names()[i],
            fmt_num(s.mean),
            fmt_num(s.std_dev),
            s.dispersion.map_or_else(|| "undef".to_string(), fmt_num),
            fmt_num(s.c_correlation)
        )?;
    }
    Ok(())
}

pub fn print_selection(d: &Dataset, r: &SelectionResult, cfg: &SelectionConfig, out: &mut dyn Write) -> Result<(), CliError> {
    writeln!(
        out,
        "method {:?}: kept {} of {} features (delta={}, tau_c={}, tau_f={}, patience={}, seed={})",
        r.method,
        r.kept.len(),
        r.n_features,
        cfg.delta,
        cfg.tau_c,
        cfg.tau_f,
        cfg.bffs_patience,
        cfg.seed
    )?;
    if let Some(m) = r.merit {
        writeln!(out, "merit {m:.12}")?;
    }
    writeln!(out, "kept:")?;
    for &k in &r.kept {
        writeln!(out, "  {:>5}  {}", k, d.feature_names()[k])?;
    }
    if !r.eliminated.is_empty() {
        writeln!(out, "eliminated:")?;
        for e in &r.eliminated {
            writeln!(out, "  {:>5}  {:<24} {:<22} {:.4}", e.feature, d.feature_names()[e.feature], e.reason.to_string(), e.score)?;
        }
    }
    if !r.zero_mean_exempt.is_empty() {
        writeln!(out, "zero-mean features exempt from the dispersion pass: {:?}", r.zero_mean_exempt)?;
    }
    Ok(())
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))
}

fn sweep_config_from(
    cmd: &Command,
    file: &ConfigFile,
) -> Result<SweepConfig, CliError> {
    let Command::Bench {
        fractions,
        alphas,
        repeats,
        seed,
        epochs,
        prototypes,
        select,
        thresholds,
        eval,
        no_normalize,
        stratified,
        ..
    } = cmd
    else {
        unreachable!("bench only");
    };
    let d = SweepConfig::default();
    let seed = seed.or(file.seed).unwrap_or(DEFAULT_SEED);
    let method = select.or(file.select);
    Ok(SweepConfig {
        fractions: fractions.clone().or_else(|| file.fractions.clone()).unwrap_or(d.fractions),
        alphas: alphas.clone().or_else(|| file.alphas.clone()).unwrap_or(d.alphas),
        repeats: repeats.or(file.repeats).unwrap_or(d.repeats),
        seed,
        selection: method.map(|m| SelectionSpec {
            method: m.into(),
            config: selection_config(thresholds, Some(seed), file),
        }),
        eval_target: eval.or(file.eval).map_or(d.eval_target, Into::into),
        epochs: epochs.or(file.epochs).unwrap_or(d.epochs),
        prototypes_per_class: prototypes.or(file.prototypes).unwrap_or(d.prototypes_per_class),
        normalize: !*no_normalize && file.normalize.unwrap_or(true),
        stratified: *stratified || file.stratified.unwrap_or(false),
    })
}

/// Writes every bench artifact for `report` into `dir`.
pub fn write_bench_outputs(report: &SweepReport, dir: &Path, plots: bool) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for variant in report.variants() {
        let name = variant.name();
        for (suffix, metric) in [("", Metric::Accuracy), ("_efficiency", Metric::Efficiency), ("_time", Metric::RunMs)] {
            let p = dir.join(format!("{name}{suffix}.csv"));
            write_file(&p, &bench::table_csv(report, variant, metric))?;
            written.push(p);
        }
        if plots {
            written.extend(write_plots(report, variant, dir)?);
        }
    }
    let p = dir.join("report.json");
    write_file(&p, &report.to_json())?;
    written.push(p);
    Ok(written)
}

fn write_plots(report: &SweepReport, variant: Variant, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut out = Vec::new();
    for (suffix, metric) in [("accuracy", Metric::Accuracy), ("efficiency", Metric::Efficiency), ("time", Metric::RunMs)] {
        let p = dir.join(format!("{}_{suffix}.svg", variant.name()));
        write_file(&p, &plot::sweep_chart(report, variant, metric))?;
        out.push(p);
    }
    Ok(out)
}

fn print_report_summary(report: &SweepReport, out: &mut dyn Write) -> Result<(), CliError> {
    for variant in report.variants() {
        writeln!(out, "{} data set, accuracy % (rows: train-test split, columns: alpha)", variant.name())?;
        write!(out, "{}", bench::table_csv(report, variant, Metric::Accuracy))?;
    }
    if report.variants().len() == 2 {
        let c = bench::compare_variants(report);
        writeln!(
            out,
            "reduced variant classify time <= original in {:.0}% of cells",
            100.0 * c.not_slower_fraction
        )?;
    }
    if let Ok(s) = bench::timing_stability(report) {
        writeln!(out, "{} of {} cells show timing spikes (max/min > {})", s.flagged.len(), s.cells.len(), bench::LOAD_ARTIFACT_RATIO)?;
    }
    Ok(())
}

fn now_unix() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

pub fn run(cli: Cli, argv: &[String], out: &mut dyn Write) -> Result<(), CliError> {
    let file = match &cli.input.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    match &cli.command {
        Command::Stats { data, sort, relevance } => {
            let d = load(&cli.input, data)?;
            let rel = relevance.or(file.relevance).map_or(Relevance::Auto, Into::into);
            cmd_stats(&d, *sort, rel, out)
        }
        Command::Select { data, method, thresholds, seed, out: path } => {
            let d = load(&cli.input, data)?;
            let cfg = selection_config(thresholds, *seed, &file);
            let method: Method = method.or(file.method).unwrap_or(MethodArg::Ifecf).into();
            let result = select::select(&d, method, &cfg)?;
            print_selection(&d, &result, &cfg, out)?;
            if let Some(p) = path {
                write_file(p, &result.to_json())?;
                writeln!(out, "wrote {}", p.display())?;
            }
            Ok(())
        }
        Command::Train { data, alpha, epochs, prototypes, seed, no_normalize, select: method, thresholds, out: path } => {
            let d = load(&cli.input, data)?;
            let seed = seed.or(file.seed).unwrap_or(DEFAULT_SEED);
            let kept = match method.or(file.select) {
                Some(m) => {
                    let cfg = selection_config(thresholds, Some(seed), &file);
                    Some(select::select(&d, m.into(), &cfg)?.kept)
                }
                None => None,
            };
            let projected = match &kept {
                Some(k) => d.select_columns(k)?,
                None => d.clone(),
            };
            let normalizer = (!no_normalize && file.normalize.unwrap_or(true)).then(|| data::fit_normalizer(&projected));
            let train = match &normalizer {
                Some(p) => data::apply_normalizer(&projected, p)?,
                None => projected,
            };
            let defaults = LvqConfig::default();
            let cfg = LvqConfig {
                alpha: alpha.or(file.alpha).unwrap_or(defaults.alpha),
                epochs: epochs.or(file.epochs).unwrap_or(defaults.epochs),
                prototypes_per_class: prototypes.or(file.prototypes).unwrap_or(defaults.prototypes_per_class),
                seed,
            };
            let model = lvq::fit(&train, &cfg)?;
            let fit = lvq::evaluate(&model, &train)?;
            let artifact = TrainedArtifact {
                feature_names: d.feature_names().to_vec(),
                kept_features: kept,
                normalizer,
                model,
            };
            write_file(path, &serde_json::to_string_pretty(&artifact).expect("artifact serializes"))?;
            writeln!(out, "training accuracy {:.2}% ({}/{}); wrote {}", 100.0 * fit.accuracy, fit.correct, fit.total, path.display())?;
            Ok(())
        }
        Command::Classify { model, data, out: path } => {
            let text = std::fs::read_to_string(model)
                .map_err(|e| CliError::data(format!("cannot read {}: {e}", model.display())))?;
            let artifact: TrainedArtifact =
                serde_json::from_str(&text).map_err(|e| CliError::data(format!("bad model file: {e}")))?;
            let d = load(&cli.input, data)?;
            if d.n_features() != artifact.feature_names.len() {
                return Err(DataError::DimensionMismatch { expected: artifact.feature_names.len(), found: d.n_features() }.into());
            }
            let projected = match &artifact.kept_features {
                Some(k) => d.select_columns(k)?,
                None => d.clone(),
            };
            let x = match &artifact.normalizer {
                Some(p) => data::apply_normalizer(&projected, p)?,
                None => projected,
            };
            let names = &artifact.model.class_names;
            let mut correct = 0;
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["row", "actual", "predicted"]).expect("in-memory");
            for (i, row) in x.rows().enumerate() {
                let p = artifact.model.classify(row)?;
                let actual = &d.class_names()[d.labels()[i]];
                correct += usize::from(names[p] == *actual);
                w.write_record([i.to_string(), actual.clone(), names[p].clone()]).expect("in-memory");
            }
            writeln!(out, "accuracy {:.2}% ({}/{})", 100.0 * correct as f64 / d.n_rows() as f64, correct, d.n_rows())?;
            if let Some(p) = path {
                write_file(p, &String::from_utf8(w.into_inner().expect("flush")).expect("utf-8"))?;
            }
            Ok(())
        }
        cmd @ Command::Bench { data, out: dir, no_plot, from_manifest, .. } => {
            let (cfg, class_column, format) = match from_manifest {
                Some(p) => {
                    let text = std::fs::read_to_string(p)
                        .map_err(|e| CliError::usage(format!("cannot read manifest {}: {e}", p.display())))?;
                    let m: RunManifest =
                        serde_json::from_str(&text).map_err(|e| CliError::usage(format!("bad manifest: {e}")))?;
                    (m.config, m.class_column, m.format)
                }
                None => (
                    sweep_config_from(cmd, &file)?,
                    ClassColumn::parse(&cli.input.class_column),
                    cli.input.format.into(),
                ),
            };
            cfg.validate()?;
            let d = data::load_csv(data, &class_column, format)?;
            let report = bench::run_sweep(&d, &cfg)?;
            let manifest = RunManifest {
                command_line: argv.to_vec(),
                config: cfg,
                class_column,
                format,
                config_file: cli.input.config.as_ref().map(|_| file.clone()),
                dataset: data.display().to_string(),
                dataset_sha256: sha256_file(data)?,
                toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
                timestamp_unix: now_unix(),
            };
            write_bench_outputs(&report, dir, !no_plot)?;
            write_file(&dir.join("manifest.json"), &serde_json::to_string_pretty(&manifest).expect("manifest serializes"))?;
            print_report_summary(&report, out)?;
            writeln!(out, "wrote {}", dir.display())?;
            Ok(())
        }
        Command::Plot { report, out: dir } => {
            let text = std::fs::read_to_string(report)
                .map_err(|e| CliError::data(format!("cannot read {}: {e}", report.display())))?;
            let r: SweepReport = serde_json::from_str(&text).map_err(|e| CliError::data(format!("bad report: {e}")))?;
            std::fs::create_dir_all(dir)?;
            for v in r.variants() {
                for p in write_plots(&r, v, dir)? {
                    writeln!(out, "wrote {}", p.display())?;
                }
            }
            Ok(())
        }
    }
}

/// Builds the global worker pool from `IFECF_THREADS` (0 or unset: automatic).
pub fn init_threads() {
    let n = std::env::var("IFECF_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .unwrap_or(0);
    // a second initialization (tests) is harmless
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let argv: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let sink: &mut dyn Write = if code == EXIT_OK { out } else { err };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    match run(cli, &argv, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}
