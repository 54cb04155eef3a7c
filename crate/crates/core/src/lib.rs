//! Feature elimination by coefficient of dispersion, class correlation and
//! inter-feature correlation, together with CFS merit search, Relief
//! weighting, an LVQ1 classifier and a split × learning-rate benchmark sweep.
//!
//! Modules, bottom-up:
//!
//! - [`data`]: CSV loading, seeded splits, min-max normalization
//! - [`measures`]: correlation, entropy, information gain, dispersion
//! - [`select`]: IFE-CF passes, CFS merit and search, Relief
//! - [`lvq`]: LVQ1 training and classification
//! - [`bench`]: the sweep harness and report comparison
//! - [`cli`]: the `ifecf` command line

pub mod bench;
pub mod cli;
pub mod data;
pub mod lvq;
pub mod measures;
pub mod plot;
pub mod select;

pub use data::{ClassColumn, Dataset, SplitSpec, TextFormat};
pub use lvq::{LvqConfig, LvqModel};
pub use select::{SelectionConfig, SelectionResult};
