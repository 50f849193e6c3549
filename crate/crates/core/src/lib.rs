//! Intrinsic evaluation of tokenizations through the lens of source coding.
//!
//! The crate is organised bottom-up:
//!
//! - [`corpus`] ingests tokenized text and builds unigram distributions.
//! - [`metrics`] computes entropy and efficiency predictors over those distributions.
//! - [`coding`] builds prefix-free codes (Huffman, uniform, Campbell) and checks the
//!   coding bounds that relate code lengths to Shannon and Rényi entropy.
//! - [`tokenizers`] trains temperature-annealed BPE and LZW tokenizers.
//! - [`analysis`] correlates predictors with downstream scores and runs grid searches.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases below fix it
//! to `f64`, which is what the CLI and the reference values use.

pub mod analysis;
pub mod coding;
pub mod corpus;
pub mod error;
pub mod metrics;
pub mod scalar;
pub mod tokenizers;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use analysis::{ObservationTable, PlotTable};
pub use coding::{BoundReport, CodeBook};
pub use corpus::{IngestOptions, TokenId, TokenizedCorpus, Vocabulary};
pub use metrics::{Metric, MetricParams};
pub use tokenizers::{BpeModel, LzwModel, Temperature};

/// Unigram distribution over `f64` probabilities.
pub type Distribution = corpus::UnigramDistribution<f64>;
/// Correlation coefficient with its significance, in `f64`.
pub type Correlation = analysis::CorrelationResult<f64>;
/// Coding-bound report in `f64`.
pub type Bounds = coding::BoundReport<f64>;
/// Metric evaluation result in `f64`.
pub type MetricValue = metrics::MetricValue<f64>;
/// Observation table with `f64` predictor and performance columns.
pub type Observations = analysis::ObservationTable<f64>;
