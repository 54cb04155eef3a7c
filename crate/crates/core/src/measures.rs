//! Statistical measures behind feature elimination: linear correlation,
//! Shannon entropy (base 2), conditional entropy, information gain and the
//! coefficient of dispersion, plus the equal-frequency discretizer the
//! entropy measures need for continuous features.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::Dataset;

#[derive(Debug, Error, PartialEq)]
pub enum MeasureError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} values, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("zero variance: correlation is undefined")]
    ZeroVariance,
    #[error("negative probability {0}")]
    NegativeProbability(f64),
    #[error("probabilities sum to {0}, not 1")]
    NotNormalized(f64),
    #[error("zero mean: coefficient of dispersion is undefined")]
    ZeroMean,
    #[error("bin count must be at least 2, got {0}")]
    TooFewBins(usize),
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Pearson's r. Errors instead of returning NaN when either input is constant.
pub fn correlation(x: &[f64], y: &[f64]) -> Result<f64, MeasureError> {
    if x.len() != y.len() {
        return Err(MeasureError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(MeasureError::TooShort { needed: 2, got: x.len() });
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(MeasureError::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Entropy in bits of a probability vector; zero entries contribute nothing.
pub fn entropy(p: &[f64]) -> Result<f64, MeasureError> {
    if let Some(&neg) = p.iter().find(|&&q| q < 0.0) {
        return Err(MeasureError::NegativeProbability(neg));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(MeasureError::NotNormalized(total));
    }
    Ok(entropy_unchecked(p.iter().copied()))
}

fn entropy_unchecked(p: impl Iterator<Item = f64>) -> f64 {
    let h: f64 = p.filter(|&q| q > 0.0).map(|q| -q * q.log2()).sum();
    h.max(0.0)
}

fn entropy_of_counts<'a>(counts: impl Iterator<Item = &'a usize>, n: usize) -> f64 {
    let n = n as f64;
    entropy_unchecked(counts.map(|&c| c as f64 / n))
}

/// Empirical entropy of a discrete sample.
pub fn sample_entropy(a: &[usize]) -> f64 {
    let mut counts: HashMap<usize, usize> = HashMap::new();
    for &v in a {
        *counts.entry(v).or_default() += 1;
    }
    entropy_of_counts(counts.values(), a.len())
}

fn check_pair(a: &[usize], b: &[usize]) -> Result<(), MeasureError> {
    if a.len() != b.len() {
        return Err(MeasureError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(MeasureError::TooShort { needed: 1, got: 0 });
    }
    Ok(())
}

/// E(A|B) = Σ_j P(b_j)·E(A | B = b_j) from empirical frequencies.
pub fn conditional_entropy(a: &[usize], b: &[usize]) -> Result<f64, MeasureError> {
    check_pair(a, b)?;
    let mut groups: HashMap<usize, HashMap<usize, usize>> = HashMap::new();
    for (&av, &bv) in a.iter().zip(b) {
        *groups.entry(bv).or_default().entry(av).or_default() += 1;
    }
    let n = a.len() as f64;
    let h = groups
        .values()
        .map(|g| {
            let size: usize = g.values().sum();
            size as f64 / n * entropy_of_counts(g.values(), size)
        })
        .sum::<f64>();
    Ok(h.max(0.0))
}

/// IG(A|B) = E(A) − E(A|B), clamped at 0 against rounding.
///
/// Not normalized: with many distinct values in B the gain is biased upward.
pub fn information_gain(a: &[usize], b: &[usize]) -> Result<f64, MeasureError> {
    let h_a_given_b = conditional_entropy(a, b)?;
    Ok((sample_entropy(a) - h_a_given_b).max(0.0))
}

/// Population standard deviation √(Σ(x−x̄)²/M).
pub fn std_dev(x: &[f64]) -> f64 {
    let m = mean(x);
    (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / x.len() as f64).sqrt()
}

/// Coefficient of dispersion |σ / x̄| with the population σ.
///
/// The mean counts as zero when it is negligible against the mean absolute
/// value (|x̄| ≤ 1e-12 · mean|x|).
pub fn dispersion(x: &[f64]) -> Result<f64, MeasureError> {
    if x.is_empty() {
        return Err(MeasureError::TooShort { needed: 1, got: 0 });
    }
    let m = mean(x);
    let scale = x.iter().map(|v| v.abs()).sum::<f64>() / x.len() as f64;
    if m.abs() <= 1e-12 * scale || m == 0.0 {
        return Err(MeasureError::ZeroMean);
    }
    Ok((std_dev(x) / m).abs())
}

/// Which measure scores feature-to-class relevance.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relevance {
    /// Linear for two classes, information gain otherwise.
    #[default]
    Auto,
    /// |r| against the integer class id.
    Linear,
    /// IG of the class given the discretized feature.
    InformationGain,
}

impl Relevance {
    pub fn resolve(self, class_count: usize) -> Relevance {
        match self {
            Relevance::Auto if class_count > 2 => Relevance::InformationGain,
            Relevance::Auto => Relevance::Linear,
            other => other,
        }
    }
}

/// Equal-frequency cut points per feature, fitted on training data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Discretization {
    pub bin_count: usize,
    pub cuts: Vec<Vec<f64>>,
}

impl Discretization {
    pub fn bins_for(&self, feature: usize) -> usize {
        self.cuts[feature].len() + 1
    }

    /// Bin of one value: the number of cut points strictly below it, so a
    /// value equal to a cut goes to the lower bin and out-of-range values
    /// clamp to the first or last bin.
    pub fn bin(&self, feature: usize, v: f64) -> usize {
        self.cuts[feature].partition_point(|&c| c < v)
    }
}

/// Equal-frequency cut points for one feature's training values.
pub fn equal_frequency_cuts(values: &[f64], bin_count: usize) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len();
    let mut cuts: Vec<f64> = Vec::with_capacity(bin_count.saturating_sub(1));
    for b in 1..bin_count {
        let q = b * m / bin_count;
        if q == 0 || q >= m {
            continue;
        }
        // ties straddling a boundary all fall to the lower bin: cut above
        // the tied value, halfway to the next distinct one
        let lo = sorted[q - 1];
        let next = sorted.partition_point(|&v| v <= lo);
        if next == m {
            continue;
        }
        let cut = lo + (sorted[next] - lo) / 2.0;
        if cuts.last().is_none_or(|&last| cut > last) {
            cuts.push(cut);
        }
    }
    cuts
}

pub fn fit_discretizer(train: &Dataset, bin_count: usize) -> Result<Discretization, MeasureError> {
    if bin_count < 2 {
        return Err(MeasureError::TooFewBins(bin_count));
    }
    let cuts = train
        .columns()
        .iter()
        .map(|col| equal_frequency_cuts(col, bin_count))
        .collect();
    Ok(Discretization { bin_count, cuts })
}

pub fn discretize(x: &[f64], d: &Discretization, feature: usize) -> Vec<usize> {
    x.iter().map(|&v| d.bin(feature, v)).collect()
}

/// Per-feature summary shown by `stats` and consumed by selection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureStats {
    pub mean: f64,
    pub std_dev: f64,
    /// `None` when the mean is zero.
    pub dispersion: Option<f64>,
    /// Signed r for linear relevance, IG in bits otherwise.
    pub c_correlation: f64,
}

/// Relevance of every feature to the class under `mode`. Constant features
/// score 0.
pub fn c_correlations(d: &Dataset, mode: Relevance, bin_count: usize) -> Result<Vec<f64>, MeasureError> {
    let columns = d.columns();
    match mode.resolve(d.class_count()) {
        Relevance::InformationGain => {
            let disc = fit_discretizer(d, bin_count)?;
            columns
                .iter()
                .enumerate()
                .map(|(j, col)| information_gain(d.labels(), &discretize(col, &disc, j)))
                .collect()
        }
        _ => {
            let y = d.labels_as_f64();
            columns
                .iter()
                .map(|col| match correlation(col, &y) {
                    Err(MeasureError::ZeroVariance) => Ok(0.0),
                    other => other,
                })
                .collect()
        }
    }
}

pub fn feature_stats(d: &Dataset, mode: Relevance, bin_count: usize) -> Result<Vec<FeatureStats>, MeasureError> {
    let ccorr = c_correlations(d, mode, bin_count)?;
    Ok(d
        .columns()
        .iter()
        .zip(ccorr)
        .map(|(col, c)| FeatureStats {
            mean: mean(col),
            std_dev: std_dev(col),
            dispersion: dispersion(col).ok(),
            c_correlation: c,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const EPS: f64 = 1e-12;

    #[test]
    fn correlation_examples() {
        let x = [1.0, 2.0, 3.0, 4.5];
        assert!((correlation(&x, &x).unwrap() - 1.0).abs() < EPS);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((correlation(&x, &neg).unwrap() + 1.0).abs() < EPS);
        // sxy = 3, sxx = 2, syy = 14/3
        let r = correlation(&[1.0, 2.0, 3.0], &[1.0, 2.0, 4.0]).unwrap();
        assert!((r - 0.981_980_506_061_965_7).abs() < 1e-12);
        assert_eq!(correlation(&[5.0, 5.0, 5.0], &[1.0, 2.0, 3.0]), Err(MeasureError::ZeroVariance));
        assert!(matches!(correlation(&[1.0], &[1.0]), Err(MeasureError::TooShort { .. })));
        assert!(matches!(correlation(&[1.0, 2.0], &[1.0]), Err(MeasureError::LengthMismatch(2, 1))));
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(&[0.5, 0.5]).unwrap(), 1.0);
        assert_eq!(entropy(&[1.0]).unwrap(), 0.0);
        assert!((entropy(&[0.25, 0.75]).unwrap() - 0.811_278_124_459_132_8).abs() < EPS);
        assert_eq!(entropy(&[0.0, 1.0]).unwrap(), 0.0);
        assert!(matches!(entropy(&[-0.1, 1.1]), Err(MeasureError::NegativeProbability(_))));
        assert!(matches!(entropy(&[0.3, 0.3]), Err(MeasureError::NotNormalized(_))));
    }

    #[test]
    fn conditional_entropy_examples() {
        let a = [0, 0, 1, 1];
        assert_eq!(conditional_entropy(&a, &a).unwrap(), 0.0);
        assert!((conditional_entropy(&a, &[0, 1, 0, 1]).unwrap() - 1.0).abs() < EPS);
        // P(b=0) = 3/4 with H(1/3, 2/3), P(b=1) = 1/4 with H = 0
        let h = conditional_entropy(&a, &[0, 0, 0, 1]).unwrap();
        assert!((h - 0.688_721_875_540_867_2).abs() < EPS);
        assert!(conditional_entropy(&[], &[]).is_err());
        assert!(conditional_entropy(&[1], &[1, 2]).is_err());
    }

    #[test]
    fn information_gain_examples() {
        let a = [0, 1, 2, 2, 1, 0, 0];
        assert!((information_gain(&a, &a).unwrap() - sample_entropy(&a)).abs() < EPS);
        assert!(information_gain(&[0, 0, 1, 1], &[0, 1, 0, 1]).unwrap().abs() < EPS);
    }

    #[test]
    fn dispersion_examples() {
        assert_eq!(dispersion(&[3.0, 3.0, 3.0]).unwrap(), 0.0);
        // mean 2.5, population variance 1.25
        assert!((dispersion(&[1.0, 2.0, 3.0, 4.0]).unwrap() - 0.447_213_595_499_958).abs() < EPS);
        assert_eq!(dispersion(&[-1.0, 1.0]), Err(MeasureError::ZeroMean));
        assert_eq!(dispersion(&[-0.1, 0.2, -0.1]), Err(MeasureError::ZeroMean));
        // negative mean reports the magnitude
        assert!((dispersion(&[-1.0, -2.0, -3.0, -4.0]).unwrap() - 0.447_213_595_499_958).abs() < EPS);
    }

    #[test]
    fn discretizer_examples() {
        let x: Vec<f64> = (1..=10).map(f64::from).collect();
        let cuts = equal_frequency_cuts(&x, 2);
        assert_eq!(cuts, vec![5.5]);
        let d = Discretization { bin_count: 2, cuts: vec![cuts] };
        assert_eq!(d.bin(0, 3.0), 0);
        assert_eq!(d.bin(0, 8.0), 1);
        assert_eq!(d.bin(0, 5.5), 0);
        assert_eq!(d.bin(0, -100.0), 0);
        assert_eq!(d.bin(0, 100.0), 1);

        assert!(equal_frequency_cuts(&[4.0; 6], 3).is_empty());
        // fewer distinct values than bins: one bin per value
        let c = equal_frequency_cuts(&[1.0, 1.0, 2.0, 2.0, 3.0, 3.0], 10);
        assert_eq!(c, vec![1.5, 2.5]);
    }

    #[test]
    fn discretizer_needs_two_bins() {
        let d = Dataset::from_rows(&[vec![1.0], vec![2.0]], &[0, 1]).unwrap();
        assert_eq!(fit_discretizer(&d, 1), Err(MeasureError::TooFewBins(1)));
    }

    #[test]
    fn constant_feature_scores_zero() {
        let d = Dataset::from_rows(&[vec![1.0, 7.0], vec![2.0, 7.0], vec![3.0, 7.0]], &[0, 1, 1]).unwrap();
        let c = c_correlations(&d, Relevance::Linear, 10).unwrap();
        assert_eq!(c[1], 0.0);
        let c = c_correlations(&d, Relevance::InformationGain, 10).unwrap();
        assert_eq!(c[1], 0.0);
        assert!(c[0] > 0.0);
    }

    fn discrete_pair() -> impl Strategy<Value = (Vec<usize>, Vec<usize>)> {
        (1usize..60).prop_flat_map(|n| {
            (
                proptest::collection::vec(0usize..4, n),
                proptest::collection::vec(0usize..5, n),
            )
        })
    }

    proptest! {
        #[test]
        fn correlation_scale_shift(
            x in proptest::collection::vec(-100.0f64..100.0, 3..30),
            a in prop_oneof![-50.0f64..-0.1, 0.1f64..50.0],
            b in -100.0f64..100.0,
            seed in 0u64..1000,
        ) {
            let y: Vec<f64> = x.iter().enumerate().map(|(i, v)| v * 0.3 + ((i as u64 * 7919 + seed) % 13) as f64).collect();
            if let (Ok(r), Ok(r2)) = (correlation(&x, &y), correlation(&x.iter().map(|v| a * v + b).collect::<Vec<_>>(), &y)) {
                prop_assert!((r2 - a.signum() * r).abs() <= 1e-9);
                prop_assert!((correlation(&y, &x).unwrap() - r).abs() <= 1e-15);
            }
        }

        #[test]
        fn uniform_entropy_is_maximal(k in 1usize..64) {
            let p = vec![1.0 / k as f64; k];
            prop_assert!((entropy(&p).unwrap() - (k as f64).log2()).abs() <= 1e-9);
        }

        #[test]
        fn information_gain_bounds_and_symmetry((a, b) in discrete_pair()) {
            let ig_ab = information_gain(&a, &b).unwrap();
            let ig_ba = information_gain(&b, &a).unwrap();
            prop_assert!(ig_ab >= 0.0);
            prop_assert!(ig_ab <= sample_entropy(&a).min(sample_entropy(&b)) + 1e-9);
            prop_assert!((ig_ab - ig_ba).abs() <= 1e-9);
            prop_assert!(conditional_entropy(&a, &b).unwrap() <= sample_entropy(&a) + 1e-9);
        }

        #[test]
        fn dispersion_scale_invariant(
            x in proptest::collection::vec(0.5f64..100.0, 1..30),
            c in 0.01f64..1000.0,
        ) {
            let scaled: Vec<f64> = x.iter().map(|v| v * c).collect();
            let (d1, d2) = (dispersion(&x).unwrap(), dispersion(&scaled).unwrap());
            prop_assert!((d1 - d2).abs() <= 1e-9 * d1.max(1.0));
        }

        #[test]
        fn every_value_gets_one_bin(
            x in proptest::collection::vec(-10.0f64..10.0, 1..50),
            bins in 2usize..12,
            probe in -20.0f64..20.0,
        ) {
            let cuts = equal_frequency_cuts(&x, bins);
            prop_assert!(cuts.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(cuts.len() < bins);
            let d = Discretization { bin_count: bins, cuts: vec![cuts] };
            prop_assert!(d.bin(0, probe) < d.bins_for(0));
        }
    }
}
