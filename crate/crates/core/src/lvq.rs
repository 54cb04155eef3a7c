//! LVQ1: one winning prototype per presented instance, pulled towards
//! instances of its own class and pushed away from the others at a fixed
//! learning rate.

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::Dataset;

#[derive(Debug, Error, PartialEq)]
pub enum LvqError {
    #[error("invalid LVQ config: {0}")]
    InvalidConfig(String),
    #[error("class `{class}` has {found} training instances, need {needed}")]
    TooFewInstances {
        class: String,
        found: usize,
        needed: usize,
    },
    #[error("arity mismatch: model has {expected} features, input has {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("non-finite input value")]
    NonFiniteInput,
    #[error("prototype {prototype} became non-finite in epoch {epoch}")]
    Diverged { prototype: usize, epoch: usize },
    #[error("evaluation set is empty")]
    EmptyEvaluation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LvqConfig {
    /// Learning rate α, constant for the whole run.
    pub alpha: f64,
    pub epochs: usize,
    pub prototypes_per_class: usize,
    pub seed: u64,
}

impl Default for LvqConfig {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            epochs: 20,
            prototypes_per_class: 1,
            seed: 42,
        }
    }
}

impl LvqConfig {
    pub fn validate(&self) -> Result<(), LvqError> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(LvqError::InvalidConfig(format!("alpha {} outside (0, 1)", self.alpha)));
        }
        if self.epochs == 0 {
            return Err(LvqError::InvalidConfig("epochs must be positive".into()));
        }
        if self.prototypes_per_class == 0 {
            return Err(LvqError::InvalidConfig("prototypes per class must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prototype {
    pub weights: Vec<f64>,
    pub class: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LvqModel {
    pub codebook: Vec<Prototype>,
    pub n_features: usize,
    pub class_names: Vec<String>,
    pub config: LvqConfig,
    pub epochs_run: usize,
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Codebook for the classes present in `train`, in class-id order. With one
/// prototype per class each prototype is its class mean; otherwise distinct
/// instances are drawn per class with the config seed.
pub fn init_codebook(train: &Dataset, cfg: &LvqConfig) -> Result<LvqModel, LvqError> {
    cfg.validate()?;
    let n = train.n_features();
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); train.class_count()];
    for (i, &l) in train.labels().iter().enumerate() {
        by_class[l].push(i);
    }
    let ppc = cfg.prototypes_per_class;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut codebook = Vec::new();
    for (class, rows) in by_class.iter().enumerate() {
        if rows.is_empty() {
            continue;
        }
        if rows.len() < ppc {
            return Err(LvqError::TooFewInstances {
                class: train.class_names()[class].clone(),
                found: rows.len(),
                needed: ppc,
            });
        }
        if ppc == 1 {
            let mut mean = vec![0.0; n];
            for &r in rows {
                for (m, v) in mean.iter_mut().zip(train.row(r)) {
                    *m += v;
                }
            }
            mean.iter_mut().for_each(|m| *m /= rows.len() as f64);
            codebook.push(Prototype { weights: mean, class });
        } else {
            for pick in index::sample(&mut rng, rows.len(), ppc).iter() {
                codebook.push(Prototype {
                    weights: train.row(rows[pick]).to_vec(),
                    class,
                });
            }
        }
    }
    Ok(LvqModel {
        codebook,
        n_features: n,
        class_names: train.class_names().to_vec(),
        config: cfg.clone(),
        epochs_run: 0,
    })
}

/// Per-epoch visit orders over `0..m`, drawn from the config seed. Depends
/// only on (m, seed, epochs), never on row contents.
pub fn visit_order(m: usize, cfg: &LvqConfig) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_1f0c_a11e_d0e5);
    (0..cfg.epochs)
        .map(|_| {
            let mut order: Vec<usize> = (0..m).collect();
            order.shuffle(&mut rng);
            order
        })
        .collect()
}

impl LvqModel {
    /// Index of the nearest prototype; ties go to the lower index.
    pub fn winner(&self, x: &[f64]) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, p) in self.codebook.iter().enumerate() {
            let d = squared_distance(&p.weights, x);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    /// One LVQ1 update. Returns the index of the moved prototype.
    pub fn step(&mut self, x: &[f64], label: usize, alpha: f64) -> usize {
        let w = self.winner(x);
        let p = &mut self.codebook[w];
        let sign = if p.class == label { alpha } else { -alpha };
        for (wi, xi) in p.weights.iter_mut().zip(x) {
            *wi += sign * (xi - *wi);
        }
        w
    }

    fn check_arity(&self, found: usize) -> Result<(), LvqError> {
        if found != self.n_features {
            return Err(LvqError::ArityMismatch {
                expected: self.n_features,
                found,
            });
        }
        Ok(())
    }

    /// Trains with the given per-epoch visit orders.
    pub fn train_with_order(&mut self, train: &Dataset, orders: &[Vec<usize>], alpha: f64) -> Result<(), LvqError> {
        self.check_arity(train.n_features())?;
        for (epoch, order) in orders.iter().enumerate() {
            for &i in order {
                let w = self.step(train.row(i), train.labels()[i], alpha);
                if self.codebook[w].weights.iter().any(|v| !v.is_finite()) {
                    return Err(LvqError::Diverged { prototype: w, epoch });
                }
            }
            self.epochs_run += 1;
        }
        Ok(())
    }

    pub fn classify(&self, x: &[f64]) -> Result<usize, LvqError> {
        self.check_arity(x.len())?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(LvqError::NonFiniteInput);
        }
        Ok(self.codebook[self.winner(x)].class)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }
}

/// Trains a copy of `model` for `cfg.epochs` seeded shuffled passes.
pub fn train(model: &LvqModel, data: &Dataset, cfg: &LvqConfig) -> Result<LvqModel, LvqError> {
    cfg.validate()?;
    let mut m = model.clone();
    m.config = cfg.clone();
    m.train_with_order(data, &visit_order(data.n_rows(), cfg), cfg.alpha)?;
    Ok(m)
}

/// Initializes and trains in one go.
pub fn fit(data: &Dataset, cfg: &LvqConfig) -> Result<LvqModel, LvqError> {
    train(&init_codebook(data, cfg)?, data, cfg)
}

pub fn classify(model: &LvqModel, x: &[f64]) -> Result<usize, LvqError> {
    model.classify(x)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub correct: usize,
    pub total: usize,
    pub accuracy: f64,
    /// `confusion[actual][predicted]`.
    pub confusion: Vec<Vec<usize>>,
}

pub fn evaluate(model: &LvqModel, test: &Dataset) -> Result<Evaluation, LvqError> {
    if test.n_rows() == 0 {
        return Err(LvqError::EmptyEvaluation);
    }
    model.check_arity(test.n_features())?;
    let k = test.class_count().max(model.class_names.len());
    let mut confusion = vec![vec![0; k]; k];
    let mut correct = 0;
    for (row, &label) in test.rows().zip(test.labels()) {
        let p = model.classify(row)?;
        confusion[label][p] += 1;
        correct += usize::from(p == label);
    }
    Ok(Evaluation {
        correct,
        total: test.n_rows(),
        accuracy: correct as f64 / test.n_rows() as f64,
        confusion,
    })
}
