//! Feature elimination strategies.
//!
//! * [`ife_cf`]: three independent filters applied in sequence: low
//!   coefficient of dispersion, low relevance to the class (C-correlation),
//!   then redundancy between surviving features (F-correlation).
//! * [`cfs_search`]: best-first forward search over subsets scored by the
//!   CFS merit `k·r_cf / √(k + k(k−1)·r_ff)`.
//! * [`exhaustive_search`]: the same merit maximized over all 2^N − 1
//!   subsets; only viable for small N and used as the search oracle.
//! * [`relief`]: nearest hit / nearest miss relevance weighting.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{DataError, Dataset};
use crate::measures::{self, MeasureError, Relevance};

#[derive(Debug, Error)]
pub enum SelectionError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error("every feature was eliminated; relax the thresholds")]
    AllEliminated,
    #[error("subset is empty")]
    EmptySubset,
    #[error("feature index {index} out of range for {n_features} features")]
    InvalidFeature { index: usize, n_features: usize },
    #[error("exhaustive search over {n} features exceeds the cap of {cap}")]
    TooManyFeatures { n: usize, cap: usize },
    #[error("class `{0}` has a single instance, so it has no nearest hit")]
    SingletonClass(String),
    #[error("relief needs at least two classes in the training data")]
    NoMisses,
    #[error("invalid selection config: {0}")]
    InvalidConfig(String),
    #[error("selection was computed for {expected} features but the dataset has {found}")]
    ArityMismatch { expected: usize, found: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionConfig {
    /// Dispersion threshold: features with CD below it are dropped.
    pub delta: f64,
    /// C-correlation floor.
    pub tau_c: f64,
    /// F-correlation redundancy ceiling.
    pub tau_f: f64,
    /// Relief sample count; `None` means min(M, 100).
    pub relief_samples: Option<usize>,
    /// Relief weights at or below this are eliminated when Relief selects.
    pub relief_threshold: f64,
    pub bffs_patience: usize,
    pub seed: u64,
    pub relevance: Relevance,
    /// Equal-frequency bins for information-gain relevance.
    pub bins: usize,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            delta: 0.05,
            tau_c: 0.1,
            tau_f: 0.9,
            relief_samples: None,
            relief_threshold: 0.0,
            bffs_patience: 5,
            seed: 42,
            relevance: Relevance::Auto,
            bins: 10,
        }
    }
}

impl SelectionConfig {
    pub fn validate(&self) -> Result<(), SelectionError> {
        let bad = |m: &str| Err(SelectionError::InvalidConfig(m.to_string()));
        if !self.delta.is_finite() || self.delta < 0.0 {
            return bad("delta must be a finite nonnegative number");
        }
        if !self.tau_c.is_finite() || self.tau_c < 0.0 {
            return bad("tau_c must be a finite nonnegative number");
        }
        if !(0.0..=1.0).contains(&self.tau_f) {
            return bad("tau_f must lie in [0, 1]");
        }
        if self.relief_samples == Some(0) {
            return bad("relief samples must be positive");
        }
        if self.bffs_patience == 0 {
            return bad("bffs patience must be positive");
        }
        if self.bins < 2 {
            return bad("bins must be at least 2");
        }
        Ok(())
    }

    pub fn relief_sample_count(&self, m: usize) -> usize {
        self.relief_samples.unwrap_or(m.min(100))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Ifecf,
    Cfs,
    Exhaustive,
    Relief,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Reason {
    LowDispersion,
    LowCCorrelation,
    RedundantWith { feature: usize },
    /// Left out of the best-merit subset found by a search.
    NotInBestSubset,
    LowReliefWeight,
}

impl std::fmt::Display for Reason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Reason::LowDispersion => write!(f, "low-dispersion"),
            Reason::LowCCorrelation => write!(f, "low-c-correlation"),
            Reason::RedundantWith { feature } => write!(f, "redundant-with({feature})"),
            Reason::NotInBestSubset => write!(f, "not-in-best-subset"),
            Reason::LowReliefWeight => write!(f, "low-relief-weight"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Elimination {
    pub feature: usize,
    pub reason: Reason,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeritStep {
    pub subset: Vec<usize>,
    pub merit: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub method: Method,
    pub n_features: usize,
    pub kept: Vec<usize>,
    pub eliminated: Vec<Elimination>,
    /// Subsets expanded by a search, in visit order.
    #[serde(default)]
    pub merit_trace: Vec<MeritStep>,
    /// Best merit for search methods.
    #[serde(default)]
    pub merit: Option<f64>,
    #[serde(default)]
    pub subsets_evaluated: usize,
    /// Zero-mean features exempted from the dispersion pass.
    #[serde(default)]
    pub zero_mean_exempt: Vec<usize>,
    /// Relief weights, when Relief produced this result.
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
}

impl SelectionResult {
    fn from_kept(method: Method, n_features: usize, kept: Vec<usize>, reason: Reason, scores: &[f64]) -> Self {
        let keep: HashSet<usize> = kept.iter().copied().collect();
        let eliminated = (0..n_features)
            .filter(|f| !keep.contains(f))
            .map(|f| Elimination {
                feature: f,
                reason,
                score: scores[f],
            })
            .collect();
        Self {
            method,
            n_features,
            kept,
            eliminated,
            merit_trace: Vec::new(),
            merit: None,
            subsets_evaluated: 0,
            zero_mean_exempt: Vec::new(),
            weights: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("selection result serializes")
    }
}

/// Outcome of the dispersion filter.
#[derive(Clone, Debug, PartialEq)]
pub struct DispersionPass {
    pub survivors: Vec<usize>,
    pub eliminated: Vec<Elimination>,
    pub zero_mean: Vec<usize>,
}

/// Drops features with CD < δ. One O(M) statistic per feature. Zero-mean
/// features have no CD; they survive and are listed in `zero_mean`.
pub fn dispersion_pass(columns: &[Vec<f64>], delta: f64) -> DispersionPass {
    let mut out = DispersionPass {
        survivors: Vec::with_capacity(columns.len()),
        eliminated: Vec::new(),
        zero_mean: Vec::new(),
    };
    for (j, col) in columns.iter().enumerate() {
        match measures::dispersion(col) {
            Ok(cd) if cd < delta => out.eliminated.push(Elimination {
                feature: j,
                reason: Reason::LowDispersion,
                score: cd,
            }),
            Ok(_) => out.survivors.push(j),
            Err(_) => {
                out.zero_mean.push(j);
                out.survivors.push(j);
            }
        }
    }
    out
}

/// |F-correlation|, with 0 for a constant column.
pub fn f_correlation(x: &[f64], y: &[f64]) -> f64 {
    measures::correlation(x, y).map_or(0.0, f64::abs)
}

/// Visits `candidates` by descending relevance (ties: lower index first);
/// every surviving feature eliminates the later ones whose |F-correlation|
/// with it exceeds τ_f. Returns (kept in ascending index order, eliminated).
pub fn redundancy_pass(
    columns: &[Vec<f64>],
    relevance: &[f64],
    candidates: &[usize],
    tau_f: f64,
) -> (Vec<usize>, Vec<Elimination>) {
    let mut order = candidates.to_vec();
    order.sort_by(|&a, &b| relevance[b].total_cmp(&relevance[a]).then(a.cmp(&b)));
    let mut alive = vec![true; order.len()];
    let mut eliminated = Vec::new();
    for i in 0..order.len() {
        if !alive[i] {
            continue;
        }
        let fi = order[i];
        for j in i + 1..order.len() {
            if !alive[j] {
                continue;
            }
            let r = f_correlation(&columns[fi], &columns[order[j]]);
            if r > tau_f {
                alive[j] = false;
                eliminated.push(Elimination {
                    feature: order[j],
                    reason: Reason::RedundantWith { feature: fi },
                    score: r,
                });
            }
        }
    }
    let mut kept: Vec<usize> = order
        .iter()
        .zip(&alive)
        .filter(|(_, &a)| a)
        .map(|(&f, _)| f)
        .collect();
    kept.sort_unstable();
    (kept, eliminated)
}

/// |C-correlation| of every feature under the configured relevance measure.
pub fn relevance_scores(train: &Dataset, cfg: &SelectionConfig) -> Result<Vec<f64>, SelectionError> {
    Ok(measures::c_correlations(train, cfg.relevance, cfg.bins)?
        .into_iter()
        .map(f64::abs)
        .collect())
}

/// Dispersion, then C-correlation, then F-correlation redundancy.
pub fn ife_cf(train: &Dataset, cfg: &SelectionConfig) -> Result<SelectionResult, SelectionError> {
    cfg.validate()?;
    let columns = train.columns();
    let n = columns.len();

    let pass1 = dispersion_pass(&columns, cfg.delta);
    let relevance = relevance_scores(train, cfg)?;

    let mut eliminated = pass1.eliminated;
    let mut candidates = Vec::with_capacity(pass1.survivors.len());
    for &j in &pass1.survivors {
        if relevance[j] < cfg.tau_c {
            eliminated.push(Elimination {
                feature: j,
                reason: Reason::LowCCorrelation,
                score: relevance[j],
            });
        } else {
            candidates.push(j);
        }
    }

    let (kept, redundant) = redundancy_pass(&columns, &relevance, &candidates, cfg.tau_f);
    eliminated.extend(redundant);
    if kept.is_empty() {
        return Err(SelectionError::AllEliminated);
    }
    Ok(SelectionResult {
        method: Method::Ifecf,
        n_features: n,
        kept,
        eliminated,
        merit_trace: Vec::new(),
        merit: None,
        subsets_evaluated: 0,
        zero_mean_exempt: pass1.zero_mean,
        weights: None,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Merit {
    pub value: f64,
    pub k: usize,
    pub r_cf: f64,
    pub r_ff: f64,
}

/// `k·r_cf / √(k + k(k−1)·r_ff)`.
pub fn merit_from_parts(k: usize, r_cf: f64, r_ff: f64) -> f64 {
    let k = k as f64;
    k * r_cf / (k + k * (k - 1.0) * r_ff).sqrt()
}

/// Cached relevance and pairwise |F-correlation| for merit evaluation.
#[derive(Clone, Debug)]
pub struct CorrelationTable {
    relevance: Vec<f64>,
    pairs: Vec<f64>,
    n: usize,
}

impl CorrelationTable {
    pub fn new(train: &Dataset, cfg: &SelectionConfig) -> Result<Self, SelectionError> {
        let relevance = relevance_scores(train, cfg)?;
        let columns = train.columns();
        let n = columns.len();
        let pairs: Vec<f64> = (0..n * n)
            .into_par_iter()
            .map(|ij| {
                let (i, j) = (ij / n, ij % n);
                match i.cmp(&j) {
                    Ordering::Less => f_correlation(&columns[i], &columns[j]),
                    Ordering::Equal => 1.0,
                    Ordering::Greater => 0.0,
                }
            })
            .collect();
        let mut table = Self { relevance, pairs, n };
        for i in 0..n {
            for j in 0..i {
                table.pairs[i * n + j] = table.pairs[j * n + i];
            }
        }
        Ok(table)
    }

    pub fn n_features(&self) -> usize {
        self.n
    }

    pub fn relevance(&self) -> &[f64] {
        &self.relevance
    }

    pub fn pair(&self, i: usize, j: usize) -> f64 {
        self.pairs[i * self.n + j]
    }

    /// Merit of a subset. The subset must be non-empty with valid indices.
    pub fn merit(&self, subset: &[usize]) -> Result<Merit, SelectionError> {
        if subset.is_empty() {
            return Err(SelectionError::EmptySubset);
        }
        if let Some(&index) = subset.iter().find(|&&f| f >= self.n) {
            return Err(SelectionError::InvalidFeature {
                index,
                n_features: self.n,
            });
        }
        let k = subset.len();
        let r_cf = subset.iter().map(|&f| self.relevance[f]).sum::<f64>() / k as f64;
        let r_ff = if k == 1 {
            0.0
        } else {
            let mut sum = 0.0;
            for (a, &i) in subset.iter().enumerate() {
                for &j in &subset[a + 1..] {
                    sum += self.pair(i, j);
                }
            }
            sum / (k * (k - 1) / 2) as f64
        };
        Ok(Merit {
            value: merit_from_parts(k, r_cf, r_ff),
            k,
            r_cf,
            r_ff,
        })
    }
}

pub fn cfs_merit(train: &Dataset, subset: &[usize]) -> Result<Merit, SelectionError> {
    cfs_merit_with(train, subset, &SelectionConfig::default())
}

pub fn cfs_merit_with(train: &Dataset, subset: &[usize], cfg: &SelectionConfig) -> Result<Merit, SelectionError> {
    let mut sorted = subset.to_vec();
    sorted.sort_unstable();
    CorrelationTable::new(train, cfg)?.merit(&sorted)
}

/// Search candidate; `Ord` ranks higher merit first, then fewer features,
/// then the lexicographically smaller subset.
#[derive(Clone, Debug)]
struct Candidate {
    merit: f64,
    subset: Vec<usize>,
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.merit
            .total_cmp(&other.merit)
            .then_with(|| other.subset.len().cmp(&self.subset.len()))
            .then_with(|| other.subset.cmp(&self.subset))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

/// Best-first forward search from the empty set. Stops after
/// `bffs_patience` consecutive expansions that fail to raise the best merit,
/// or when the open list is exhausted.
pub fn cfs_search(train: &Dataset, cfg: &SelectionConfig) -> Result<SelectionResult, SelectionError> {
    cfg.validate()?;
    let table = CorrelationTable::new(train, cfg)?;
    Ok(cfs_search_table(&table, cfg.bffs_patience))
}

pub fn cfs_search_table(table: &CorrelationTable, patience: usize) -> SelectionResult {
    let n = table.n_features();
    let mut open = BinaryHeap::new();
    let mut visited: HashSet<Vec<usize>> = HashSet::new();
    let mut trace = Vec::new();
    let mut best: Option<Candidate> = None;
    let mut evaluated = 0;
    let mut stale = 0;

    open.push(Candidate {
        merit: 0.0,
        subset: Vec::new(),
    });
    while let Some(node) = open.pop() {
        if !node.subset.is_empty() {
            trace.push(MeritStep {
                subset: node.subset.clone(),
                merit: node.merit,
            });
        }
        let mut improved = false;
        for f in 0..n {
            if node.subset.binary_search(&f).is_ok() {
                continue;
            }
            let mut child = node.subset.clone();
            let at = child.partition_point(|&x| x < f);
            child.insert(at, f);
            if !visited.insert(child.clone()) {
                continue;
            }
            let merit = table.merit(&child).expect("valid non-empty subset").value;
            evaluated += 1;
            let cand = Candidate { merit, subset: child };
            match &best {
                Some(b) if cand.merit > b.merit => {
                    improved = true;
                    best = Some(cand.clone());
                }
                Some(b) if cand > *b => best = Some(cand.clone()),
                Some(_) => {}
                None => {
                    improved = true;
                    best = Some(cand.clone());
                }
            }
            open.push(cand);
        }
        if improved {
            stale = 0;
        } else {
            stale += 1;
            if stale >= patience {
                break;
            }
        }
    }

    let best = best.expect("at least one feature");
    let mut result = SelectionResult::from_kept(Method::Cfs, n, best.subset, Reason::NotInBestSubset, table.relevance());
    result.merit = Some(best.merit);
    result.merit_trace = trace;
    result.subsets_evaluated = evaluated;
    result
}

pub const DEFAULT_EXHAUSTIVE_CAP: usize = 20;

/// Maximizes the merit over every non-empty subset. Ties go to the smaller
/// subset, then the lexicographically smaller one, so parallel evaluation
/// gives the same answer as sequential.
pub fn exhaustive_search(train: &Dataset, max_n: usize, cfg: &SelectionConfig) -> Result<SelectionResult, SelectionError> {
    cfg.validate()?;
    let n = train.n_features();
    if n > max_n || n >= usize::BITS as usize {
        return Err(SelectionError::TooManyFeatures { n, cap: max_n });
    }
    let table = CorrelationTable::new(train, cfg)?;
    Ok(exhaustive_search_table(&table))
}

pub fn exhaustive_search_table(table: &CorrelationTable) -> SelectionResult {
    let n = table.n_features();
    let total = (1usize << n) - 1;
    let best = (1..=total)
        .into_par_iter()
        .map(|mask| {
            let subset: Vec<usize> = (0..n).filter(|b| mask & (1 << b) != 0).collect();
            let merit = table.merit(&subset).expect("non-empty subset").value;
            Candidate { merit, subset }
        })
        .max()
        .expect("n >= 1");
    let mut result = SelectionResult::from_kept(Method::Exhaustive, n, best.subset, Reason::NotInBestSubset, table.relevance());
    result.merit = Some(best.merit);
    result.subsets_evaluated = total;
    result
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReliefWeights {
    pub weights: Vec<f64>,
    pub samples: usize,
}

/// Relief relevance weights. Features are range-normalized by the training
/// range for both the neighbour search and the diff; constant features
/// contribute nothing. `n` instances are drawn without replacement.
pub fn relief(train: &Dataset, cfg: &SelectionConfig) -> Result<ReliefWeights, SelectionError> {
    cfg.validate()?;
    let m = train.n_rows();
    let n_feat = train.n_features();
    let samples = cfg.relief_sample_count(m);
    if samples == 0 || samples > m {
        return Err(SelectionError::InvalidConfig(format!(
            "relief samples must lie in 1..={m}, got {samples}"
        )));
    }
    let counts = train.class_counts();
    if let Some(c) = counts.iter().position(|&c| c == 1) {
        return Err(SelectionError::SingletonClass(train.class_names()[c].clone()));
    }
    if counts.iter().filter(|&&c| c > 0).count() < 2 {
        return Err(SelectionError::NoMisses);
    }

    let columns = train.columns();
    let scaled: Vec<f64> = {
        let ranges: Vec<(f64, f64)> = columns
            .iter()
            .map(|c| {
                let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                (lo, hi - lo)
            })
            .collect();
        train
            .rows()
            .flat_map(|r| {
                r.iter()
                    .zip(&ranges)
                    .map(|(&v, &(lo, span))| if span > 0.0 { (v - lo) / span } else { 0.0 })
                    .collect::<Vec<_>>()
            })
            .collect()
    };
    let row = |i: usize| &scaled[i * n_feat..(i + 1) * n_feat];
    let labels = train.labels();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let picks = index::sample(&mut rng, m, samples);
    let mut weights = vec![0.0; n_feat];
    let n = samples as f64;
    for i in picks.iter() {
        let xi = row(i);
        let mut hit: Option<(f64, usize)> = None;
        let mut miss: Option<(f64, usize)> = None;
        for j in (0..m).filter(|&j| j != i) {
            let d: f64 = xi.iter().zip(row(j)).map(|(a, b)| (a - b) * (a - b)).sum();
            let slot = if labels[j] == labels[i] { &mut hit } else { &mut miss };
            if slot.is_none_or(|(best, _)| d < best) {
                *slot = Some((d, j));
            }
        }
        let (h, mi) = (row(hit.expect("class has two instances").1), row(miss.expect("two classes").1));
        for f in 0..n_feat {
            let dh = xi[f] - h[f];
            let dm = xi[f] - mi[f];
            weights[f] += (dm * dm - dh * dh) / n;
        }
    }
    Ok(ReliefWeights { weights, samples })
}

/// Relief weights turned into a selection: keep features weighted above
/// `relief_threshold`.
pub fn relief_select(train: &Dataset, cfg: &SelectionConfig) -> Result<SelectionResult, SelectionError> {
    let w = relief(train, cfg)?;
    let kept: Vec<usize> = (0..w.weights.len())
        .filter(|&f| w.weights[f] > cfg.relief_threshold)
        .collect();
    if kept.is_empty() {
        return Err(SelectionError::AllEliminated);
    }
    let mut result = SelectionResult::from_kept(Method::Relief, w.weights.len(), kept, Reason::LowReliefWeight, &w.weights);
    result.weights = Some(w.weights);
    Ok(result)
}

/// Runs `method` on the training data.
pub fn select(train: &Dataset, method: Method, cfg: &SelectionConfig) -> Result<SelectionResult, SelectionError> {
    match method {
        Method::Ifecf => ife_cf(train, cfg),
        Method::Cfs => cfs_search(train, cfg),
        Method::Exhaustive => exhaustive_search(train, DEFAULT_EXHAUSTIVE_CAP, cfg),
        Method::Relief => relief_select(train, cfg),
    }
}

/// Projects `d` onto the kept features, in kept order.
pub fn apply_selection(d: &Dataset, r: &SelectionResult) -> Result<Dataset, SelectionError> {
    if r.n_features != d.n_features() {
        return Err(SelectionError::ArityMismatch {
            expected: r.n_features,
            found: d.n_features(),
        });
    }
    if r.kept.is_empty() {
        return Err(SelectionError::AllEliminated);
    }
    Ok(d.select_columns(&r.kept)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg_off() -> SelectionConfig {
        SelectionConfig {
            delta: 0.0,
            tau_c: 0.0,
            tau_f: 1.0,
            ..SelectionConfig::default()
        }
    }

    fn two_class(rows: Vec<Vec<f64>>) -> Dataset {
        let labels: Vec<usize> = (0..rows.len()).map(|i| i % 2).collect();
        Dataset::from_rows(&rows, &labels).unwrap()
    }

    #[test]
    fn disabled_thresholds_keep_everything() {
        let d = two_class((0..12).map(|i| vec![i as f64 + 1.0, 5.0, (i % 3) as f64 - 1.0]).collect());
        let r = ife_cf(&d, &cfg_off()).unwrap();
        assert_eq!(r.kept, vec![0, 1, 2]);
        assert!(r.eliminated.is_empty());
        assert_eq!(r.zero_mean_exempt, vec![2]);
    }

    #[test]
    fn duplicated_column_keeps_one_copy() {
        let d = two_class((0..10).map(|i| {
            let v = (i % 2) as f64 * 3.0 + (i as f64 * 0.37).sin() + 5.0;
            vec![v, v]
        }).collect());
        let cfg = SelectionConfig { tau_f: 0.99, ..cfg_off() };
        let r = ife_cf(&d, &cfg).unwrap();
        assert_eq!(r.kept, vec![0]);
        assert_eq!(r.eliminated.len(), 1);
        assert_eq!(r.eliminated[0].feature, 1);
        assert_eq!(r.eliminated[0].reason, Reason::RedundantWith { feature: 0 });
    }

    #[test]
    fn all_eliminated_is_an_error() {
        let d = two_class((0..6).map(|_| vec![2.0, 3.0]).collect());
        let cfg = SelectionConfig { delta: 0.5, ..cfg_off() };
        assert!(matches!(ife_cf(&d, &cfg), Err(SelectionError::AllEliminated)));
    }

    #[test]
    fn merit_examples() {
        assert_eq!(merit_from_parts(1, 0.7, 0.0), 0.7);
        // 2·0.5 / √(2 + 2·0.3)
        assert!((merit_from_parts(2, 0.5, 0.3) - 0.620_173_672_946_042_2).abs() < 1e-12);
        assert!((merit_from_parts(2, 0.4, 0.0) - 2f64.sqrt() * 0.4).abs() < 1e-15);
    }

    #[test]
    fn merit_rejects_bad_subsets() {
        let d = two_class((0..6).map(|i| vec![i as f64, (i * i) as f64]).collect());
        assert!(matches!(cfs_merit(&d, &[]), Err(SelectionError::EmptySubset)));
        assert!(matches!(cfs_merit(&d, &[5]), Err(SelectionError::InvalidFeature { index: 5, .. })));
    }

    #[test]
    fn single_feature_search() {
        let d = two_class((0..8).map(|i| vec![i as f64 * 0.5 + (i % 2) as f64]).collect());
        let r = cfs_search(&d, &SelectionConfig::default()).unwrap();
        assert_eq!(r.kept, vec![0]);
        let c = relevance_scores(&d, &SelectionConfig::default()).unwrap()[0];
        assert_eq!(r.merit, Some(c));
        let e = exhaustive_search(&d, 20, &SelectionConfig::default()).unwrap();
        assert_eq!(e.kept, vec![0]);
    }

    #[test]
    fn exhaustive_counts_subsets_and_caps() {
        let d = two_class((0..10).map(|i| vec![i as f64, (i % 3) as f64, (i % 2) as f64 + 0.1 * i as f64]).collect());
        let r = exhaustive_search(&d, 20, &SelectionConfig::default()).unwrap();
        assert_eq!(r.subsets_evaluated, 7);
        assert!(matches!(
            exhaustive_search(&d, 2, &SelectionConfig::default()),
            Err(SelectionError::TooManyFeatures { n: 3, cap: 2 })
        ));
    }

    #[test]
    fn constant_feature_has_zero_relief_weight() {
        let d = two_class((0..20).map(|i| vec![(i % 2) as f64, 4.0, (i * 7 % 5) as f64]).collect());
        let w = relief(&d, &SelectionConfig::default()).unwrap();
        assert_eq!(w.weights[1], 0.0);
        assert!(w.weights[0] > w.weights[2]);
    }

    #[test]
    fn relief_is_deterministic_and_bounded() {
        let d = two_class((0..30).map(|i| vec![(i % 2) as f64 + (i as f64).cos(), (i as f64 * 1.7).sin()]).collect());
        let cfg = SelectionConfig { relief_samples: Some(30), ..SelectionConfig::default() };
        let a = relief(&d, &cfg).unwrap();
        assert_eq!(a, relief(&d, &cfg).unwrap());
        assert!(a.weights.iter().all(|w| (-1.0..=1.0).contains(w)));
    }

    #[test]
    fn relief_rejects_singleton_class() {
        let d = Dataset::from_rows(&[vec![1.0], vec![2.0], vec![3.0]], &[0, 0, 1]).unwrap();
        assert!(matches!(relief(&d, &SelectionConfig::default()), Err(SelectionError::SingletonClass(_))));
        let cfg = SelectionConfig { relief_samples: Some(0), ..SelectionConfig::default() };
        assert!(matches!(relief(&d, &cfg), Err(SelectionError::InvalidConfig(_))));
    }

    #[test]
    fn apply_selection_projects_in_kept_order() {
        let d = two_class(vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]);
        let keep_all = ife_cf(&d, &cfg_off()).unwrap();
        assert_eq!(apply_selection(&d, &keep_all).unwrap(), d);
        let mut r = keep_all.clone();
        r.kept = vec![2, 0];
        assert_eq!(apply_selection(&d, &r).unwrap().values(), &[3.0, 1.0, 6.0, 4.0]);
        r.kept.clear();
        assert!(matches!(apply_selection(&d, &r), Err(SelectionError::AllEliminated)));
        r.n_features = 4;
        assert!(matches!(apply_selection(&d, &r), Err(SelectionError::ArityMismatch { .. })));
    }

    #[test]
    fn result_json_round_trips() {
        let d = two_class((0..10).map(|i| vec![i as f64 + 1.0, (i % 2) as f64 + 1.0, 2.0]).collect());
        let r = cfs_search(&d, &SelectionConfig::default()).unwrap();
        let back: SelectionResult = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }
}
