//! Scalar predictors of tokenization quality computed from unigram statistics.
//!
//! Entropies take an explicit logarithm base; efficiencies are ratios of entropies and
//! therefore base-free. Rényi orders are plain scalars with `T::infinity()` standing for
//! the min-entropy limit.

use std::fmt;
use std::str::FromStr;

use crate::corpus::{TokenizedCorpus, UnigramDistribution};
use crate::error::{Error, Result};
use crate::scalar::{stable_sum, Scalar};

pub const DEFAULT_POWER: f64 = 2.5;
pub const DEFAULT_PERC_START: f64 = 0.03;
pub const DEFAULT_PERC_END: f64 = 0.83;
pub const DEFAULT_BASE: u32 = 2;

/// Distance between consecutive percentile grid points.
pub const PERCENTILE_STEP: f64 = 0.01;

// Absorbs representation error when a grid point times V lands on an integer.
const RANK_EPS: f64 = 1e-9;

fn check_base(base: u32) -> Result<()> {
    if base < 2 {
        return Err(Error::InvalidArgument(format!(
            "logarithm base must be at least 2, got {base}"
        )));
    }
    Ok(())
}

fn check_order<T: Scalar>(alpha: T) -> Result<()> {
    if alpha.is_nan() || alpha < T::zero() {
        return Err(Error::InvalidArgument(format!(
            "Rényi order must be non-negative, got {alpha}"
        )));
    }
    Ok(())
}

/// log₂ of the base.
fn log2_base<T: Scalar>(base: u32) -> T {
    T::of(f64::from(base)).log2()
}

/// Shannon entropy in bits.
fn shannon_bits<T: Scalar>(dist: &UnigramDistribution<T>) -> T {
    T::zero() - stable_sum(dist.probs().iter().map(|&p| p * p.log2()))
}

/// Rényi entropy in bits, (1/(1−α)) log₂ Σ pᵅ. When the plain power sum underflows, the
/// largest probability is factored out first.
fn renyi_bits<T: Scalar>(dist: &UnigramDistribution<T>, alpha: T) -> T {
    let v = T::of_usize(dist.support_size());
    if alpha == T::zero() {
        return v.log2();
    }
    if alpha == T::one() {
        return shannon_bits(dist);
    }
    let p_max = dist.max_prob();
    if alpha.is_infinite() {
        return -p_max.log2();
    }
    let scale = (T::one() - alpha).recip();
    let direct = stable_sum(dist.probs().iter().map(|&p| p.powf(alpha)));
    if direct.is_normal() && direct.is_finite() {
        return scale * direct.log2();
    }
    let scaled = stable_sum(dist.probs().iter().map(|&p| (p / p_max).powf(alpha)));
    scale * (alpha * p_max.log2() + scaled.log2())
}

/// H = −Σ p log_b p.
pub fn shannon_entropy<T: Scalar>(dist: &UnigramDistribution<T>, base: u32) -> Result<T> {
    check_base(base)?;
    Ok(shannon_bits(dist) / log2_base::<T>(base))
}

/// Rényi entropy of order `alpha` in base `base`.
///
/// Order 0 gives log V, order 1 the Shannon entropy and order ∞ gives −log max p.
pub fn renyi_entropy<T: Scalar>(dist: &UnigramDistribution<T>, alpha: T, base: u32) -> Result<T> {
    check_base(base)?;
    check_order(alpha)?;
    Ok(renyi_bits(dist, alpha) / log2_base::<T>(base))
}

fn efficiency_denominator<T: Scalar>(dist: &UnigramDistribution<T>) -> Result<T> {
    let v = dist.support_size();
    if v < 2 {
        return Err(Error::DegenerateVocabulary(v));
    }
    Ok(T::of_usize(v).log2())
}

/// Shannon entropy relative to the uniform code length, H / log V.
pub fn shannon_efficiency<T: Scalar>(dist: &UnigramDistribution<T>) -> Result<T> {
    let denom = efficiency_denominator(dist)?;
    Ok(shannon_bits(dist) / denom)
}

/// Rényi entropy relative to the uniform code length, H_α / log V.
pub fn renyi_efficiency<T: Scalar>(dist: &UnigramDistribution<T>, alpha: T) -> Result<T> {
    check_order(alpha)?;
    let denom = efficiency_denominator(dist)?;
    Ok(renyi_bits(dist, alpha) / denom)
}

/// Probabilities sorted ascending.
pub(crate) fn sorted_probs<T: Scalar>(dist: &UnigramDistribution<T>) -> Vec<T> {
    let mut sorted = dist.probs().to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("probabilities are finite"));
    sorted
}

/// Nearest-rank percentile of an ascending slice: rank ⌈n·V⌉ clamped to [1, V].
pub(crate) fn nearest_rank<T: Scalar>(sorted: &[T], n: f64) -> T {
    let v = sorted.len();
    let rank = (n * v as f64 - RANK_EPS).ceil().max(1.0) as usize;
    sorted[rank.min(v) - 1]
}

/// Frequency at every point of the 1% grid, 0.00 through 1.00 (101 entries).
pub fn percentile_curve<T: Scalar>(dist: &UnigramDistribution<T>) -> Vec<T> {
    let sorted = sorted_probs(dist);
    (0..=100)
        .map(|k| nearest_rank(&sorted, k as f64 / 100.0))
        .collect()
}

/// Sum of nearest-rank percentile frequencies over the 1% grid from `start` to `end`,
/// both inclusive.
pub fn percentile_freq<T: Scalar>(dist: &UnigramDistribution<T>, start: T, end: T) -> Result<T> {
    let (start, end) = (start.as_f64(), end.as_f64());
    if !(0.0..=1.0).contains(&start) || !(0.0..=1.0).contains(&end) || start > end {
        return Err(Error::InvalidArgument(format!(
            "percentile interval must satisfy 0 <= start <= end <= 1, got [{start}, {end}]"
        )));
    }
    let sorted = sorted_probs(dist);
    let mut first = start / PERCENTILE_STEP;
    if (first - first.round()).abs() < RANK_EPS {
        first = first.round();
    }
    let last = end / PERCENTILE_STEP + RANK_EPS;
    let mut terms = Vec::new();
    let mut k = 0.0;
    while first + k <= last {
        terms.push(nearest_rank(&sorted, (first + k) * PERCENTILE_STEP));
        k += 1.0;
    }
    Ok(stable_sum(terms))
}

/// Mean number of tokens per text.
pub fn sequence_len<T: Scalar>(corpus: &TokenizedCorpus) -> T {
    corpus.expected_length()
}

/// Size of the corpus in bits under an ideal per-token Shannon code, N · H (base 2).
pub fn bits<T: Scalar>(corpus: &TokenizedCorpus) -> T {
    let dist = UnigramDistribution::<T>::from_corpus(corpus);
    let h = shannon_bits(&dist);
    T::of_usize(corpus.total_tokens()) * h
}

/// Metrics selectable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Metric {
    #[default]
    RenyiEfficiency,
    RenyiEntropy,
    ShannonEfficiency,
    ShannonEntropy,
    PercentileFreq,
    Bits,
    SequenceLen,
}

impl Metric {
    pub const ALL: [Metric; 7] = [
        Metric::RenyiEfficiency,
        Metric::RenyiEntropy,
        Metric::ShannonEfficiency,
        Metric::ShannonEntropy,
        Metric::PercentileFreq,
        Metric::Bits,
        Metric::SequenceLen,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::RenyiEfficiency => "renyi_efficiency",
            Metric::RenyiEntropy => "renyi_entropy",
            Metric::ShannonEfficiency => "shannon_efficiency",
            Metric::ShannonEntropy => "shannon_entropy",
            Metric::PercentileFreq => "percentile_freq",
            Metric::Bits => "bits",
            Metric::SequenceLen => "sequence_len",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Metric::ALL.iter().map(|m| m.name()).collect();
                Error::InvalidArgument(format!(
                    "unknown metric {s:?}; valid metrics: {}",
                    names.join(", ")
                ))
            })
    }
}

/// Parameters shared by all metrics; each metric reads the ones it needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricParams<T> {
    /// Rényi order α (`power`).
    pub power: T,
    /// γ1 (`perc_start`).
    pub perc_start: T,
    /// γ2 (`perc_end`).
    pub perc_end: T,
    /// Logarithm base for entropies (`base`).
    pub base: u32,
}

impl<T: Scalar> Default for MetricParams<T> {
    fn default() -> Self {
        Self {
            power: T::of(DEFAULT_POWER),
            perc_start: T::of(DEFAULT_PERC_START),
            perc_end: T::of(DEFAULT_PERC_END),
            base: DEFAULT_BASE,
        }
    }
}

impl<T: Scalar> MetricParams<T> {
    /// Sets a parameter from a `key=value` string. `power` accepts `inf`.
    pub fn apply_extra(&mut self, extra: &str) -> Result<()> {
        let (key, value) = extra
            .split_once('=')
            .ok_or_else(|| Error::InvalidArgument(format!("expected key=value, got {extra:?}")))?;
        let number: f64 = value.trim().parse().map_err(|_| {
            Error::InvalidArgument(format!("value of {key} is not a number: {value:?}"))
        })?;
        match key.trim() {
            "power" => self.power = T::of(number),
            "perc_start" => self.perc_start = T::of(number),
            "perc_end" => self.perc_end = T::of(number),
            "base" => {
                if number.fract() != 0.0 || number < 2.0 || number > f64::from(u32::MAX) {
                    return Err(Error::InvalidArgument(format!(
                        "base must be an integer >= 2, got {value}"
                    )));
                }
                self.base = number as u32;
            }
            other => {
                return Err(Error::InvalidArgument(format!(
                "unknown parameter {other:?}; valid parameters: power, perc_start, perc_end, base"
            )))
            }
        }
        Ok(())
    }
}

/// A computed metric together with the parameters it was evaluated at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricValue<T> {
    pub metric: Metric,
    pub value: T,
    pub params: MetricParams<T>,
}

/// Evaluates `metric` on the pooled unigram distribution of `corpus`.
pub fn evaluate<T: Scalar>(
    corpus: &TokenizedCorpus,
    metric: Metric,
    params: &MetricParams<T>,
) -> Result<MetricValue<T>> {
    let dist = || UnigramDistribution::<T>::from_corpus(corpus);
    let value = match metric {
        Metric::RenyiEfficiency => renyi_efficiency(&dist(), params.power)?,
        Metric::RenyiEntropy => renyi_entropy(&dist(), params.power, params.base)?,
        Metric::ShannonEfficiency => shannon_efficiency(&dist())?,
        Metric::ShannonEntropy => shannon_entropy(&dist(), params.base)?,
        Metric::PercentileFreq => percentile_freq(&dist(), params.perc_start, params.perc_end)?,
        Metric::Bits => bits(corpus),
        Metric::SequenceLen => sequence_len(corpus),
    };
    Ok(MetricValue {
        metric,
        value,
        params: *params,
    })
}
