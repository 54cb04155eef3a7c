#![allow(dead_code)]

//! Synthetic datasets and brute-force reference implementations shared by
//! the integration tests. The references here deliberately take different
//! algebraic routes from the library code.

use std::collections::BTreeMap;
use std::path::PathBuf;

use ifecf::Dataset;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Box-Muller standard normal.
pub fn normal(r: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = r.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = r.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn pima_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/pima-indians-diabetes.csv")
}

pub fn pima() -> Dataset {
    ifecf::data::load_csv(pima_path(), &ifecf::ClassColumn::Last, ifecf::TextFormat::Csv).expect("pima loads")
}

/// Two isotropic Gaussian classes in 2-D, means (0,0) and (1,0).
pub fn two_gaussians(seed: u64, per_class: usize, sigma: f64) -> Dataset {
    let mut r = rng(seed);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..2 * per_class {
        let class = i % 2;
        rows.push(vec![class as f64 + sigma * normal(&mut r), sigma * normal(&mut r)]);
        labels.push(class);
    }
    Dataset::from_rows(&rows, &labels).unwrap()
}

/// Two classes; feature 0 equals the class label, feature 1 is uniform noise.
pub fn label_plus_noise(seed: u64, m: usize) -> Dataset {
    let mut r = rng(seed);
    let labels: Vec<usize> = (0..m).map(|i| i % 2).collect();
    let rows: Vec<Vec<f64>> = labels.iter().map(|&l| vec![l as f64, r.gen::<f64>()]).collect();
    Dataset::from_rows(&rows, &labels).unwrap()
}

/// Random N-feature two-class set where each feature mixes the class signal,
/// a shared latent factor and private noise with random weights.
pub fn mixed_features(seed: u64, m: usize, n: usize) -> Dataset {
    let mut r = rng(seed);
    let weights: Vec<(f64, f64)> = (0..n).map(|_| (r.gen_range(0.0..1.5), r.gen_range(0.0..1.5))).collect();
    let mut rows = Vec::with_capacity(m);
    let mut labels = Vec::with_capacity(m);
    for i in 0..m {
        let class = i % 2;
        let latent = normal(&mut r);
        rows.push(
            weights
                .iter()
                .map(|&(a, b)| a * class as f64 + b * latent + normal(&mut r) + 10.0)
                .collect(),
        );
        labels.push(class);
    }
    Dataset::from_rows(&rows, &labels).unwrap()
}

/// Shape of the lung cancer benchmark: 73 instances, 325 features,
/// 3 classes. Features 0..40 carry class signal, 40..220 are near-constant
/// (coefficient of dispersion ≈ 0.01), the rest are noise.
pub fn lung_like(seed: u64) -> Dataset {
    let mut r = rng(seed);
    let m = 73;
    let labels: Vec<usize> = (0..m).map(|i| i % 3).collect();
    let rows: Vec<Vec<f64>> = labels
        .iter()
        .map(|&c| {
            (0..325)
                .map(|j| match j {
                    0..40 => 5.0 + 2.0 * c as f64 + normal(&mut r),
                    40..220 => 100.0 + normal(&mut r),
                    _ => 5.0 + 2.0 * normal(&mut r),
                })
                .collect()
        })
        .collect();
    Dataset::from_rows(&rows, &labels).unwrap()
}

/// Random wide matrix for scaling measurements.
pub fn wide(seed: u64, m: usize, n: usize) -> Dataset {
    let mut r = rng(seed);
    let rows: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| r.gen_range(1.0..2.0)).collect()).collect();
    let labels: Vec<usize> = (0..m).map(|i| i % 2).collect();
    Dataset::from_rows(&rows, &labels).unwrap()
}

pub mod oracle {
    use super::BTreeMap;

    /// Pearson r from raw moment sums.
    pub fn correlation(x: &[f64], y: &[f64]) -> Option<f64> {
        let n = x.len() as f64;
        let sx: f64 = x.iter().sum();
        let sy: f64 = y.iter().sum();
        let sxx: f64 = x.iter().map(|v| v * v).sum();
        let syy: f64 = y.iter().map(|v| v * v).sum();
        let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
        let vx = n * sxx - sx * sx;
        let vy = n * syy - sy * sy;
        if vx <= 0.0 || vy <= 0.0 {
            return None;
        }
        Some((n * sxy - sx * sy) / (vx * vy).sqrt())
    }

    /// Entropy with natural logs converted to bits.
    pub fn entropy(p: &[f64]) -> f64 {
        -p.iter().filter(|&&q| q > 0.0).map(|q| q * q.ln()).sum::<f64>() / std::f64::consts::LN_2
    }

    fn counts<K: Ord + Copy>(v: impl Iterator<Item = K>) -> (BTreeMap<K, usize>, usize) {
        let mut m = BTreeMap::new();
        let mut n = 0;
        for k in v {
            *m.entry(k).or_insert(0) += 1;
            n += 1;
        }
        (m, n)
    }

    fn count_entropy<K: Ord + Copy>(v: impl Iterator<Item = K>) -> f64 {
        let (m, n) = counts(v);
        entropy(&m.values().map(|&c| c as f64 / n as f64).collect::<Vec<_>>())
    }

    pub fn sample_entropy(a: &[usize]) -> f64 {
        count_entropy(a.iter().copied())
    }

    pub fn joint_entropy(a: &[usize], b: &[usize]) -> f64 {
        count_entropy(a.iter().copied().zip(b.iter().copied()))
    }

    /// H(A|B) = H(A,B) − H(B).
    pub fn conditional_entropy(a: &[usize], b: &[usize]) -> f64 {
        joint_entropy(a, b) - sample_entropy(b)
    }

    /// IG = H(A) + H(B) − H(A,B).
    pub fn information_gain(a: &[usize], b: &[usize]) -> f64 {
        sample_entropy(a) + sample_entropy(b) - joint_entropy(a, b)
    }

    /// √(E[x²] − E[x]²) / |E[x]|.
    pub fn dispersion(x: &[f64]) -> f64 {
        let n = x.len() as f64;
        let m = x.iter().sum::<f64>() / n;
        let m2 = x.iter().map(|v| v * v).sum::<f64>() / n;
        (m2 - m * m).max(0.0).sqrt() / m.abs()
    }

    /// Merit rearranged: r_cf·k / √(k·(1 + (k−1)·r_ff)).
    pub fn merit(k: usize, r_cf: f64, r_ff: f64) -> f64 {
        let k = k as f64;
        r_cf * k / (k * (1.0 + (k - 1.0) * r_ff)).sqrt()
    }
}
