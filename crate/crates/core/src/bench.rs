//! Split × learning-rate sweep with and without feature reduction.
//!
//! Accuracy work runs in parallel and is a pure function of the dataset and
//! the [`SweepConfig`]; timing runs afterwards one cell at a time.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{self, DataError, Dataset, SplitSpec};
use crate::lvq::{self, LvqConfig, LvqError, LvqModel};
use crate::select::{self, Method, SelectionConfig, SelectionError};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid sweep config: {0}")]
    InvalidConfig(String),
    #[error("split {fraction}: {source}")]
    Split {
        fraction: f64,
        #[source]
        source: DataError,
    },
    #[error("selection eliminated every feature in cell (fraction {fraction})")]
    EmptySelection { fraction: f64 },
    #[error("selection failed in cell (fraction {fraction}): {source}")]
    Selection {
        fraction: f64,
        #[source]
        source: SelectionError,
    },
    #[error("LVQ failed in cell (fraction {fraction}, alpha {alpha}): {source}")]
    Lvq {
        fraction: f64,
        alpha: f64,
        #[source]
        source: LvqError,
    },
    #[error("report grids differ: {0}")]
    AxisMismatch(String),
    #[error("timing stability needs at least 3 repeats, report has {0}")]
    TooFewRepeats(usize),
    #[error("efficiency needs a non-empty test partition")]
    EmptyTest,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalTarget {
    #[default]
    Test,
    Train,
    Whole,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionSpec {
    pub method: Method,
    pub config: SelectionConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub fractions: Vec<f64>,
    pub alphas: Vec<f64>,
    pub repeats: usize,
    pub seed: u64,
    pub selection: Option<SelectionSpec>,
    pub eval_target: EvalTarget,
    pub epochs: usize,
    pub prototypes_per_class: usize,
    pub normalize: bool,
    pub stratified: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            fractions: (1..=9).map(|i| f64::from(i) / 10.0).collect(),
            alphas: (1..=5).map(|i| f64::from(i) / 10.0).collect(),
            repeats: 5,
            seed: 42,
            selection: Some(SelectionSpec {
                method: Method::Ifecf,
                config: SelectionConfig::default(),
            }),
            eval_target: EvalTarget::Test,
            epochs: 20,
            prototypes_per_class: 1,
            normalize: true,
            stratified: false,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |m: String| Err(BenchError::InvalidConfig(m));
        if self.fractions.is_empty() || self.alphas.is_empty() {
            return bad("fractions and alphas must be non-empty".into());
        }
        if let Some(f) = self.fractions.iter().find(|f| !(**f > 0.0 && **f < 1.0)) {
            return bad(format!("fraction {f} outside (0, 1)"));
        }
        if let Some(a) = self.alphas.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
            return bad(format!("alpha {a} outside (0, 1)"));
        }
        if self.repeats == 0 {
            return bad("repeats must be at least 1".into());
        }
        if let Some(s) = &self.selection {
            s.config
                .validate()
                .map_err(|e| BenchError::InvalidConfig(e.to_string()))?;
        }
        Ok(())
    }

    fn lvq_config(&self, alpha: f64, seed: u64) -> LvqConfig {
        LvqConfig {
            alpha,
            epochs: self.epochs,
            prototypes_per_class: self.prototypes_per_class,
            seed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Original,
    Reduced,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Original => "original",
            Variant::Reduced => "reduced",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub fraction: f64,
    pub alpha: f64,
    pub variant: Variant,
    /// Percent correct on the evaluation target.
    pub accuracy: f64,
    /// 100 · correct on the evaluation target / test partition size.
    pub efficiency: f64,
    pub correct: usize,
    pub total: usize,
    pub test_total: usize,
    pub features: usize,
    /// Medians over repeats, milliseconds.
    pub train_ms: f64,
    pub classify_ms: f64,
    pub run_ms: f64,
    /// Per-repeat train + classify time.
    pub run_ms_samples: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSelection {
    pub fraction: f64,
    pub kept: Vec<usize>,
    pub eliminated: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub config: SweepConfig,
    pub records: Vec<CellRecord>,
    pub selections: Vec<CellSelection>,
    pub environment: String,
}

impl SweepReport {
    pub fn variants(&self) -> Vec<Variant> {
        let mut v: Vec<Variant> = self.records.iter().map(|r| r.variant).collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn cell(&self, fraction: f64, alpha: f64, variant: Variant) -> Option<&CellRecord> {
        self.records
            .iter()
            .find(|r| r.fraction == fraction && r.alpha == alpha && r.variant == variant)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a master seed with grid coordinates.
pub fn derive_seed(master: u64, coords: &[u64]) -> u64 {
    coords
        .iter()
        .fold(splitmix64(master), |acc, &c| splitmix64(acc ^ splitmix64(c)))
}

const SPLIT_TAG: u64 = u64::MAX;

pub fn median(samples: &[f64]) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        s[n / 2]
    } else {
        (s[n / 2 - 1] + s[n / 2]) / 2.0
    }
}

/// "Efficiency": 100 · correct / test partition size. Exceeds
/// 100 when `correct` is counted over more rows than the test partition.
pub fn efficiency(correct: usize, test_total: usize) -> Result<f64, BenchError> {
    if test_total == 0 {
        return Err(BenchError::EmptyTest);
    }
    Ok(100.0 * correct as f64 / test_total as f64)
}

/// Per-fraction partitions for one variant, normalized when requested.
struct Prepared {
    variant: Variant,
    train: Dataset,
    eval: Dataset,
    test_total: usize,
}

struct FractionPlan {
    prepared: Vec<Prepared>,
    selection: Option<CellSelection>,
}

fn prepare_fraction(d: &Dataset, cfg: &SweepConfig, fi: usize) -> Result<FractionPlan, BenchError> {
    let fraction = cfg.fractions[fi];
    let spec = SplitSpec {
        train_fraction: fraction,
        seed: derive_seed(cfg.seed, &[fi as u64, SPLIT_TAG]),
        stratified: cfg.stratified,
    };
    let (train_idx, test_idx) =
        data::split_indices(d, &spec).map_err(|source| BenchError::Split { fraction, source })?;

    let mut variants = vec![(Variant::Original, None)];
    let mut selection = None;
    if let Some(sel) = &cfg.selection {
        let train = d.select_rows(&train_idx);
        let result = select::select(&train, sel.method, &sel.config).map_err(|e| match e {
            SelectionError::AllEliminated => BenchError::EmptySelection { fraction },
            source => BenchError::Selection { fraction, source },
        })?;
        selection = Some(CellSelection {
            fraction,
            kept: result.kept.clone(),
            eliminated: result.eliminated.len(),
        });
        variants.push((Variant::Reduced, Some(result.kept)));
    }

    let prepared = variants
        .into_iter()
        .map(|(variant, kept)| {
            let projected = match &kept {
                Some(k) => d.select_columns(k).map_err(|source| BenchError::Split { fraction, source })?,
                None => d.clone(),
            };
            let projected = if cfg.normalize {
                let params = data::fit_normalizer(&projected.select_rows(&train_idx));
                data::apply_normalizer(&projected, &params).map_err(|source| BenchError::Split { fraction, source })?
            } else {
                projected
            };
            let train = projected.select_rows(&train_idx);
            let eval = match cfg.eval_target {
                EvalTarget::Test => projected.select_rows(&test_idx),
                EvalTarget::Train => train.clone(),
                EvalTarget::Whole => projected,
            };
            Ok(Prepared {
                variant,
                train,
                eval,
                test_total: test_idx.len(),
            })
        })
        .collect::<Result<Vec<_>, BenchError>>()?;
    Ok(FractionPlan { prepared, selection })
}

fn lvq_err(fraction: f64, alpha: f64) -> impl FnOnce(LvqError) -> BenchError {
    move |source| BenchError::Lvq { fraction, alpha, source }
}

/// Runs every (fraction, alpha, variant) cell.
pub fn run_sweep(d: &Dataset, cfg: &SweepConfig) -> Result<SweepReport, BenchError> {
    cfg.validate()?;
    let plans: Vec<FractionPlan> = (0..cfg.fractions.len())
        .into_par_iter()
        .map(|fi| prepare_fraction(d, cfg, fi))
        .collect::<Result<_, _>>()?;

    struct Cell<'a> {
        fi: usize,
        ai: usize,
        prep: &'a Prepared,
    }
    let cells: Vec<Cell> = plans
        .iter()
        .enumerate()
        .flat_map(|(fi, plan)| {
            (0..cfg.alphas.len()).flat_map(move |ai| plan.prepared.iter().map(move |prep| Cell { fi, ai, prep }))
        })
        .collect();

    // untimed, parallel: accuracy
    let evaluated: Vec<(LvqModel, lvq::Evaluation)> = cells
        .par_iter()
        .map(|c| {
            let (fraction, alpha) = (cfg.fractions[c.fi], cfg.alphas[c.ai]);
            let lcfg = cfg.lvq_config(alpha, derive_seed(cfg.seed, &[c.fi as u64, c.ai as u64]));
            let init = lvq::init_codebook(&c.prep.train, &lcfg).map_err(lvq_err(fraction, alpha))?;
            let model = lvq::train(&init, &c.prep.train, &lcfg).map_err(lvq_err(fraction, alpha))?;
            let eval = lvq::evaluate(&model, &c.prep.eval).map_err(lvq_err(fraction, alpha))?;
            Ok((init, eval))
        })
        .collect::<Result<_, BenchError>>()?;

    // timed, sequential
    let mut records = Vec::with_capacity(cells.len());
    for (c, (init, eval)) in cells.iter().zip(evaluated) {
        let (fraction, alpha) = (cfg.fractions[c.fi], cfg.alphas[c.ai]);
        let lcfg = cfg.lvq_config(alpha, derive_seed(cfg.seed, &[c.fi as u64, c.ai as u64]));
        let mut train_s = Vec::with_capacity(cfg.repeats);
        let mut classify_s = Vec::with_capacity(cfg.repeats);
        // warm-up pass, not recorded
        let warm = lvq::train(&init, &c.prep.train, &lcfg).map_err(lvq_err(fraction, alpha))?;
        lvq::evaluate(&warm, &c.prep.eval).map_err(lvq_err(fraction, alpha))?;
        for _ in 0..cfg.repeats {
            let t0 = Instant::now();
            let model = lvq::train(&init, &c.prep.train, &lcfg).map_err(lvq_err(fraction, alpha))?;
            let t1 = Instant::now();
            let e = lvq::evaluate(&model, &c.prep.eval).map_err(lvq_err(fraction, alpha))?;
            let t2 = Instant::now();
            debug_assert_eq!(e.correct, eval.correct);
            train_s.push((t1 - t0).as_secs_f64() * 1e3);
            classify_s.push((t2 - t1).as_secs_f64() * 1e3);
        }
        let run_s: Vec<f64> = train_s.iter().zip(&classify_s).map(|(a, b)| a + b).collect();
        records.push(CellRecord {
            fraction,
            alpha,
            variant: c.prep.variant,
            accuracy: 100.0 * eval.accuracy,
            efficiency: efficiency(eval.correct, c.prep.test_total)?,
            correct: eval.correct,
            total: eval.total,
            test_total: c.prep.test_total,
            features: c.prep.train.n_features(),
            train_ms: median(&train_s),
            classify_ms: median(&classify_s),
            run_ms: median(&run_s),
            run_ms_samples: run_s,
        });
    }

    Ok(SweepReport {
        config: cfg.clone(),
        records,
        selections: plans.into_iter().filter_map(|p| p.selection).collect(),
        environment: environment_note(),
    })
}

fn environment_note() -> String {
    format!(
        "{} {} · {} worker threads · timings are wall-clock medians and depend on machine load",
        std::env::consts::OS,
        std::env::consts::ARCH,
        rayon::current_num_threads()
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellDelta {
    pub fraction: f64,
    pub alpha: f64,
    pub variant: Variant,
    /// b − a, percentage points.
    pub accuracy_delta: f64,
    /// b − a, milliseconds.
    pub classify_ms_delta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub cells: Vec<CellDelta>,
    /// Share of cells where b's classify time ≤ a's.
    pub not_slower_fraction: f64,
}

fn compare_records<'a>(pairs: impl Iterator<Item = (&'a CellRecord, &'a CellRecord)>) -> Comparison {
    let cells: Vec<CellDelta> = pairs
        .map(|(a, b)| CellDelta {
            fraction: a.fraction,
            alpha: a.alpha,
            variant: b.variant,
            accuracy_delta: b.accuracy - a.accuracy,
            classify_ms_delta: b.classify_ms - a.classify_ms,
        })
        .collect();
    let not_slower = cells.iter().filter(|c| c.classify_ms_delta <= 0.0).count();
    Comparison {
        not_slower_fraction: if cells.is_empty() { 0.0 } else { not_slower as f64 / cells.len() as f64 },
        cells,
    }
}

/// Cell-by-cell deltas b − a over the cells both reports share.
pub fn compare_reports(a: &SweepReport, b: &SweepReport) -> Result<Comparison, BenchError> {
    if a.config.fractions != b.config.fractions {
        return Err(BenchError::AxisMismatch("fractions differ".into()));
    }
    if a.config.alphas != b.config.alphas {
        return Err(BenchError::AxisMismatch("alphas differ".into()));
    }
    Ok(compare_records(a.records.iter().filter_map(|ra| {
        b.cell(ra.fraction, ra.alpha, ra.variant).map(|rb| (ra, rb))
    })))
}

/// Reduced minus original within one report.
pub fn compare_variants(report: &SweepReport) -> Comparison {
    compare_records(
        report
            .records
            .iter()
            .filter(|r| r.variant == Variant::Original)
            .filter_map(|o| report.cell(o.fraction, o.alpha, Variant::Reduced).map(|r| (o, r))),
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSpread {
    pub fraction: f64,
    pub alpha: f64,
    pub variant: Variant,
    /// max / min of the per-repeat run times.
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stability {
    pub cells: Vec<CellSpread>,
    /// Cells whose spread exceeds [`LOAD_ARTIFACT_RATIO`].
    pub flagged: Vec<CellSpread>,
}

pub const LOAD_ARTIFACT_RATIO: f64 = 3.0;

pub fn spread_ratio(samples: &[f64]) -> f64 {
    let lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    hi / lo.max(1e-9)
}

/// Inter-repeat timing spread per cell; spikes above 3× are flagged.
pub fn timing_stability(report: &SweepReport) -> Result<Stability, BenchError> {
    if report.config.repeats < 3 {
        return Err(BenchError::TooFewRepeats(report.config.repeats));
    }
    let cells: Vec<CellSpread> = report
        .records
        .iter()
        .map(|r| CellSpread {
            fraction: r.fraction,
            alpha: r.alpha,
            variant: r.variant,
            ratio: spread_ratio(&r.run_ms_samples),
        })
        .collect();
    let flagged = cells.iter().filter(|c| c.ratio > LOAD_ARTIFACT_RATIO).cloned().collect();
    Ok(Stability { cells, flagged })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    Accuracy,
    Efficiency,
    RunMs,
}

impl Metric {
    fn of(self, r: &CellRecord) -> f64 {
        match self {
            Metric::Accuracy => r.accuracy,
            Metric::Efficiency => r.efficiency,
            Metric::RunMs => r.run_ms,
        }
    }
}

/// "10-90" style label for a train fraction.
pub fn split_label(fraction: f64) -> String {
    let pct = (fraction * 100.0).round() as i64;
    format!("{}-{}", pct, 100 - pct)
}

/// One row per fraction, one column per alpha.
pub fn table_csv(report: &SweepReport, variant: Variant, metric: Metric) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["sl_no".to_string(), "split".to_string()];
    header.extend(report.config.alphas.iter().map(|a| format!("alpha_{a}")));
    w.write_record(&header).expect("in-memory write");
    for (i, &f) in report.config.fractions.iter().enumerate() {
        let mut row = vec![(i + 1).to_string(), split_label(f)];
        for &a in &report.config.alphas {
            row.push(match report.cell(f, a, variant) {
                Some(r) if metric == Metric::RunMs => format!("{:.4}", metric.of(r)),
                Some(r) => format!("{:.2}", metric.of(r)),
                None => String::new(),
            });
        }
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}
