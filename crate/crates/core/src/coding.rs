//! Token-level prefix-free codes and the coding bounds tied to Shannon and Rényi entropy.
//!
//! A [`CodeBook`] maps token ids to codeword lengths over a `b`-ary symbol alphabet and
//! optionally carries the codewords themselves (digits `0..b`). Three constructions are
//! provided: Huffman (optimal expected length), uniform (every codeword ⌈log_b V⌉ long)
//! and Campbell (ceil of the lengths that make the discounted length meet the Rényi
//! entropy).

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};
use std::fmt::Write as _;

use crate::corpus::{TokenId, TokenizedCorpus, UnigramDistribution};
use crate::error::{Error, Result};
use crate::metrics::{renyi_entropy, shannon_entropy};
use crate::scalar::{stable_sum, Scalar};

/// Slack used by every bound and identity check.
pub const BOUND_TOLERANCE: f64 = 1e-9;

/// Slack on the Kraft sum of constructed codes.
pub const KRAFT_TOLERANCE: f64 = 1e-12;

// Campbell ideal lengths that are integers up to rounding noise are not pushed up a symbol.
const CEIL_EPS: f64 = 1e-9;

/// Per-token codeword lengths, and optionally codewords, over a `base`-ary alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeBook {
    base: u32,
    lengths: BTreeMap<TokenId, u32>,
    codewords: Option<BTreeMap<TokenId, Vec<u8>>>,
}

impl CodeBook {
    /// A code book with lengths only. Every length must be at least 1.
    pub fn from_lengths(
        base: u32,
        lengths: impl IntoIterator<Item = (TokenId, u32)>,
    ) -> Result<Self> {
        check_base(base)?;
        let lengths: BTreeMap<_, _> = lengths.into_iter().collect();
        if lengths.is_empty() {
            return Err(Error::EmptyInput("code book has no entries".into()));
        }
        if let Some((id, _)) = lengths.iter().find(|(_, &l)| l == 0) {
            return Err(Error::InvalidArgument(format!(
                "codeword length of token #{id} is zero"
            )));
        }
        Ok(Self {
            base,
            lengths,
            codewords: None,
        })
    }

    /// Attaches canonical codewords: entries sorted by (length, id) receive consecutive
    /// `base`-ary numbers, left-aligned to their length. Requires a Kraft sum ≤ 1.
    pub fn with_canonical_codewords(mut self) -> Result<Self> {
        let mut order: Vec<(u32, TokenId)> = self.lengths.iter().map(|(&id, &l)| (l, id)).collect();
        order.sort_unstable();
        let b = self.base as u8;
        let mut next: Vec<u8> = Vec::new();
        let mut words = BTreeMap::new();
        for (i, &(len, id)) in order.iter().enumerate() {
            if i > 0 && !increment(&mut next, b) {
                return Err(Error::InvalidArgument(
                    "lengths violate the Kraft inequality; no prefix code exists".into(),
                ));
            }
            next.resize(len as usize, 0);
            words.insert(id, next.clone());
        }
        self.codewords = Some(words);
        Ok(self)
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn len(&self) -> usize {
        self.lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }

    pub fn length(&self, id: TokenId) -> Option<u32> {
        self.lengths.get(&id).copied()
    }

    pub fn lengths(&self) -> &BTreeMap<TokenId, u32> {
        &self.lengths
    }

    pub fn codewords(&self) -> Option<&BTreeMap<TokenId, Vec<u8>>> {
        self.codewords.as_ref()
    }

    pub fn max_length(&self) -> u32 {
        self.lengths.values().copied().max().unwrap_or(0)
    }

    /// Σ b^(−ℓ(δ)).
    pub fn kraft_sum<T: Scalar>(&self) -> T {
        let b = T::of(f64::from(self.base));
        stable_sum(self.lengths.values().map(|&l| b.powi(-(l as i32))))
    }

    /// True when codewords are materialized, match the lengths, use only digits below
    /// the base, and no codeword is a prefix of another.
    pub fn is_prefix_free(&self) -> bool {
        let Some(words) = &self.codewords else {
            return false;
        };
        if words.len() != self.lengths.len() {
            return false;
        }
        for (id, w) in words {
            if self.lengths.get(id).copied() != Some(w.len() as u32)
                || w.iter().any(|&d| u32::from(d) >= self.base)
            {
                return false;
            }
        }
        // In lexicographic order a prefix sorts immediately before some extension of it.
        let mut sorted: Vec<&Vec<u8>> = words.values().collect();
        sorted.sort();
        sorted.windows(2).all(|w| !w[1].starts_with(w[0]))
    }

    fn require(&self, id: TokenId, name: impl FnOnce() -> String) -> Result<u32> {
        self.length(id)
            .ok_or_else(|| Error::Coverage(format!("code book does not cover token {}", name())))
    }
}

/// Adds one to a base-`b` digit string in place; false on overflow.
fn increment(digits: &mut [u8], b: u8) -> bool {
    for d in digits.iter_mut().rev() {
        if *d + 1 < b {
            *d += 1;
            return true;
        }
        *d = 0;
    }
    false
}

fn check_base(base: u32) -> Result<()> {
    if !(2..=255).contains(&base) {
        return Err(Error::InvalidArgument(format!(
            "code base must be between 2 and 255, got {base}"
        )));
    }
    Ok(())
}

struct HeapEntry<T> {
    prob: T,
    min_id: TokenId,
    seq: usize,
}

impl<T: Scalar> Ord for HeapEntry<T> {
    // Reversed so that `BinaryHeap` pops the lowest probability first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .prob
            .partial_cmp(&self.prob)
            .expect("probabilities are finite")
            .then_with(|| other.min_id.cmp(&self.min_id))
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl<T: Scalar> PartialOrd for HeapEntry<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Scalar> PartialEq for HeapEntry<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: Scalar> Eq for HeapEntry<T> {}

/// `b`-ary Huffman code for `dist`.
///
/// The `b` lowest-probability nodes are merged at each step; ties go to the node holding
/// the smallest token id, then to the older node. For `b > 2` zero-probability
/// placeholders pad the leaf count so that every merge is full. A single-type
/// distribution receives one codeword of length 1.
pub fn huffman_code<T: Scalar>(dist: &UnigramDistribution<T>, base: u32) -> Result<CodeBook> {
    check_base(base)?;
    let ids = dist.ids();
    if ids.len() == 1 {
        let book = CodeBook::from_lengths(base, [(ids[0], 1)])?;
        return book.with_canonical_codewords();
    }

    // Arena: leaves first (real then padding), internal nodes appended as created.
    let mut leaf_of: Vec<Option<TokenId>> = ids.iter().map(|&id| Some(id)).collect();
    let b = base as usize;
    while !(leaf_of.len() - 1).is_multiple_of(b - 1) {
        leaf_of.push(None);
    }
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); leaf_of.len()];
    let mut heap = BinaryHeap::with_capacity(leaf_of.len());
    for (seq, leaf) in leaf_of.iter().enumerate() {
        let prob = if seq < ids.len() {
            dist.probs()[seq]
        } else {
            T::zero()
        };
        heap.push(HeapEntry {
            prob,
            min_id: leaf.unwrap_or(TokenId::MAX),
            seq,
        });
    }
    while heap.len() > 1 {
        let mut group = Vec::with_capacity(b);
        let mut prob = T::zero();
        let mut min_id = TokenId::MAX;
        for _ in 0..b {
            let e = heap.pop().expect("padding keeps merges full");
            prob = prob + e.prob;
            min_id = min_id.min(e.min_id);
            group.push(e.seq);
        }
        let seq = children.len();
        children.push(group);
        leaf_of.push(None);
        heap.push(HeapEntry { prob, min_id, seq });
    }

    let root = heap.pop().expect("at least one node").seq;
    let mut lengths = BTreeMap::new();
    let mut words = BTreeMap::new();
    let mut stack = vec![(root, Vec::<u8>::new())];
    while let Some((node, word)) = stack.pop() {
        if children[node].is_empty() {
            if let Some(id) = leaf_of[node] {
                lengths.insert(id, word.len() as u32);
                words.insert(id, word);
            }
            continue;
        }
        for (digit, &child) in children[node].iter().enumerate() {
            let mut w = word.clone();
            w.push(digit as u8);
            stack.push((child, w));
        }
    }
    Ok(CodeBook {
        base,
        lengths,
        codewords: Some(words),
    })
}

/// Smallest k ≥ 1 with b^k ≥ v.
fn uniform_length(v: usize, base: u32) -> u32 {
    let mut k = 1u32;
    let mut reach = u128::from(base);
    while reach < v as u128 {
        reach = reach.saturating_mul(u128::from(base));
        k += 1;
    }
    k
}

/// Code assigning every one of `v` tokens (ids `0..v`) a codeword of length ⌈log_b v⌉,
/// at least 1.
pub fn uniform_code(v: usize, base: u32) -> Result<CodeBook> {
    check_base(base)?;
    if v == 0 {
        return Err(Error::EmptyInput("uniform code over zero tokens".into()));
    }
    let k = uniform_length(v, base);
    CodeBook::from_lengths(base, (0..v).map(|id| (id, k)))?.with_canonical_codewords()
}

/// Uniform code over the support of `dist`.
pub fn uniform_code_for<T: Scalar>(dist: &UnigramDistribution<T>, base: u32) -> Result<CodeBook> {
    check_base(base)?;
    let k = uniform_length(dist.support_size(), base);
    CodeBook::from_lengths(base, dist.ids().iter().map(|&id| (id, k)))?.with_canonical_codewords()
}

/// Real-valued code lengths −α log_b p(δ) + log_b Σ p(δ')^α, at which the discounted
/// length at s = 1/α − 1 equals the Rényi entropy of order α.
pub fn campbell_ideal_lengths<T: Scalar>(
    dist: &UnigramDistribution<T>,
    alpha: T,
    base: u32,
) -> Result<Vec<T>> {
    if alpha.is_nan() || alpha <= T::zero() || alpha.is_infinite() {
        return Err(Error::InvalidArgument(format!(
            "Campbell lengths need a finite order > 0, got {alpha}; use the uniform or \
             max-probability constructions for the limits"
        )));
    }
    let ln_b = T::of(f64::from(base)).ln();
    let p_max = dist.max_prob();
    let ln_mass =
        alpha * p_max.ln() + stable_sum(dist.probs().iter().map(|&p| (p / p_max).powf(alpha))).ln();
    Ok(dist
        .probs()
        .iter()
        .map(|&p| (ln_mass - alpha * p.ln()) / ln_b)
        .collect())
}

/// Integer Campbell code lengths: the ceiling of [`campbell_ideal_lengths`], at least 1.
pub fn campbell_lengths<T: Scalar>(
    dist: &UnigramDistribution<T>,
    alpha: T,
    base: u32,
) -> Result<CodeBook> {
    check_base(base)?;
    let ideal = campbell_ideal_lengths(dist, alpha, base)?;
    let mut lengths: Vec<u32> = ideal
        .iter()
        .map(|&x| (x.as_f64() - CEIL_EPS).ceil().max(1.0) as u32)
        .collect();
    let book = |lengths: &[u32]| {
        CodeBook::from_lengths(
            base,
            dist.ids().iter().copied().zip(lengths.iter().copied()),
        )
    };
    if book(&lengths)?.kraft_sum::<f64>() > 1.0 {
        // Near-integer ideals rounded down pushed the sum over one; round those up.
        for (l, &x) in lengths.iter_mut().zip(&ideal) {
            if f64::from(*l) < x.as_f64() {
                *l += 1;
            }
        }
    }
    book(&lengths)?.with_canonical_codewords()
}

/// Expected codeword length Σ p(δ) ℓ(δ).
pub fn expected_code_length<T: Scalar>(
    dist: &UnigramDistribution<T>,
    code: &CodeBook,
) -> Result<T> {
    let terms = dist
        .iter()
        .map(|(id, p)| {
            let l = code.require(id, || dist.token_name(id))?;
            Ok(p * T::of(f64::from(l)))
        })
        .collect::<Result<Vec<T>>>()?;
    Ok(stable_sum(terms))
}

/// Discounted expected code length (1/s) log_b Σ p(δ) b^(s·ℓ(δ)).
///
/// `s = 0` is the expected code length and `s = ∞` the longest codeword used.
pub fn discounted_code_length<T: Scalar>(
    dist: &UnigramDistribution<T>,
    code: &CodeBook,
    s: T,
) -> Result<T> {
    if s.is_nan() || s <= -T::one() {
        return Err(Error::InvalidArgument(format!(
            "discount exponent must exceed -1, got {s}"
        )));
    }
    if s == T::zero() {
        return expected_code_length(dist, code);
    }
    let mut pairs = Vec::with_capacity(dist.support_size());
    for (id, p) in dist.iter() {
        let l = code.require(id, || dist.token_name(id))?;
        pairs.push((p, T::of(f64::from(l))));
    }
    if s.is_infinite() {
        return Ok(pairs.iter().map(|&(_, l)| l).fold(T::zero(), T::max));
    }
    let ln_b = T::of(f64::from(code.base())).ln();
    let exps: Vec<T> = pairs.iter().map(|&(_, l)| s * l * ln_b).collect();
    let peak = exps.iter().copied().fold(T::zero(), |a, x| a.max(x.abs()));
    let ln_mean = if peak < T::one() {
        // Small exponents: log1p of Σ p (e^x − 1) keeps the leading s-order term exact.
        stable_sum(pairs.iter().zip(&exps).map(|(&(p, _), &x)| p * x.exp_m1())).ln_1p()
    } else {
        let top = exps.iter().copied().fold(T::neg_infinity(), T::max);
        top + stable_sum(
            pairs
                .iter()
                .zip(&exps)
                .map(|(&(p, _), &x)| p * (x - top).exp()),
        )
        .ln()
    };
    Ok(ln_mean / (s * ln_b))
}

/// Codeword lengths summed per text, checked for coverage.
fn text_code_lengths<T: Scalar>(corpus: &TokenizedCorpus, code: &CodeBook) -> Result<Vec<T>> {
    corpus
        .texts()
        .iter()
        .map(|text| {
            let mut total = 0u64;
            for &id in text {
                let l = code.require(id, || {
                    corpus
                        .vocabulary()
                        .token(id)
                        .map_or_else(|| format!("#{id}"), str::to_owned)
                })?;
                total += u64::from(l);
            }
            Ok(T::from_u64(total).expect("u64 converts to Scalar"))
        })
        .collect()
}

/// Mean over texts of the concatenated code length of each text.
pub fn corpus_code_length<T: Scalar>(corpus: &TokenizedCorpus, code: &CodeBook) -> Result<T> {
    let per_text = text_code_lengths::<T>(corpus, code)?;
    Ok(stable_sum(per_text) / T::of_usize(corpus.num_texts()))
}

/// Population covariance over texts between the mean code length per token of a text
/// and the text's token count.
pub fn covariance_term<T: Scalar>(corpus: &TokenizedCorpus, code: &CodeBook) -> Result<T> {
    let per_text = text_code_lengths::<T>(corpus, code)?;
    let lengths: Vec<T> = corpus.lengths().map(T::of_usize).collect();
    let per_token: Vec<T> = per_text
        .iter()
        .zip(&lengths)
        .map(|(&c, &l)| c / l)
        .collect();
    let m = T::of_usize(corpus.num_texts());
    let mean_len = stable_sum(lengths.iter().copied()) / m;
    let mean_per_token = stable_sum(per_token.iter().copied()) / m;
    let cov = stable_sum(
        per_token
            .iter()
            .zip(&lengths)
            .map(|(&a, &l)| (a - mean_per_token) * (l - mean_len)),
    ) / m;
    Ok(cov)
}

/// Outcome of checking the coding bounds on one corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport<T> {
    pub alpha: T,
    pub base: u32,
    /// Discount exponent s = 1/α − 1.
    pub s: T,
    pub num_texts: usize,
    pub vocab_size: usize,
    /// Shannon entropy H of the text-averaged unigram distribution.
    pub entropy: T,
    /// E[L].
    pub expected_length: T,
    /// Σ p ℓ for the Huffman code.
    pub huffman_expected_code_length: T,
    /// Mean per-text code length under the Huffman code.
    pub corpus_code_length: T,
    /// Cov(mean code length per token, L) under the Huffman code.
    pub covariance: T,
    /// corpus_code_length − (E[L] · Σ p ℓ + Cov).
    pub identity_residual: T,
    /// (corpus_code_length − Cov) / E[L].
    pub middle: T,
    /// ⌈H⌉.
    pub entropy_ceil: T,
    pub huffman_kraft: T,
    pub renyi_entropy: T,
    /// Discounted length of the Campbell code at s.
    pub discounted_length: T,
    pub campbell_kraft: T,
    pub identity_holds: bool,
    /// H ≤ middle.
    pub shannon_lower: bool,
    /// middle ≤ ⌈H⌉.
    pub shannon_upper_ceil: bool,
    /// middle < H + 1.
    pub shannon_upper_strict: bool,
    /// H_α ≤ L^(s).
    pub campbell_lower: bool,
    /// L^(s) < H_α + 1.
    pub campbell_upper: bool,
    /// Both codes have Kraft sum ≤ 1 and are prefix-free.
    pub kraft: bool,
}

impl<T: Scalar> BoundReport<T> {
    pub fn all_pass(&self) -> bool {
        self.identity_holds
            && self.shannon_lower
            && self.shannon_upper_ceil
            && self.shannon_upper_strict
            && self.campbell_lower
            && self.campbell_upper
            && self.kraft
    }

    /// Flat `name<TAB>value` lines, one per field, ending with the overall verdict.
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        let mut num = |k: &str, v: T| writeln!(out, "{k}\t{v}").unwrap();
        num("alpha", self.alpha);
        num("s", self.s);
        num("entropy", self.entropy);
        num("expected_length", self.expected_length);
        num(
            "huffman_expected_code_length",
            self.huffman_expected_code_length,
        );
        num("corpus_code_length", self.corpus_code_length);
        num("covariance", self.covariance);
        num("identity_residual", self.identity_residual);
        num("lower_bound", self.entropy);
        num("middle", self.middle);
        num("upper_bound", self.entropy_ceil);
        num("huffman_kraft", self.huffman_kraft);
        num("renyi_entropy", self.renyi_entropy);
        num("discounted_length", self.discounted_length);
        num("campbell_kraft", self.campbell_kraft);
        writeln!(out, "base\t{}", self.base).unwrap();
        writeln!(out, "num_texts\t{}", self.num_texts).unwrap();
        writeln!(out, "vocab_size\t{}", self.vocab_size).unwrap();
        for (k, v) in [
            ("identity_holds", self.identity_holds),
            ("shannon_lower", self.shannon_lower),
            ("shannon_upper_ceil", self.shannon_upper_ceil),
            ("shannon_upper_strict", self.shannon_upper_strict),
            ("campbell_lower", self.campbell_lower),
            ("campbell_upper", self.campbell_upper),
            ("kraft", self.kraft),
            ("pass", self.all_pass()),
        ] {
            writeln!(out, "{k}\t{v}").unwrap();
        }
        out
    }
}

/// Builds Huffman and Campbell codes over the text-averaged unigram distribution of
/// `corpus` and checks the covariance identity, the Shannon sandwich for the Huffman
/// code and the Rényi sandwich for the Campbell code at s = 1/α − 1.
pub fn verify_bounds<T: Scalar>(
    corpus: &TokenizedCorpus,
    alpha: T,
    base: u32,
) -> Result<BoundReport<T>> {
    let dist = UnigramDistribution::<T>::text_averaged(corpus);
    let tol = T::of(BOUND_TOLERANCE);
    let kraft_tol = T::one() + T::of(KRAFT_TOLERANCE);

    let huffman = huffman_code(&dist, base)?;
    let entropy = shannon_entropy(&dist, base)?;
    let huffman_expected = expected_code_length(&dist, &huffman)?;
    let expected_length: T = corpus.expected_length();
    let lenc = corpus_code_length::<T>(corpus, &huffman)?;
    let covariance = covariance_term::<T>(corpus, &huffman)?;
    let identity_residual = lenc - (expected_length * huffman_expected + covariance);
    let middle = (lenc - covariance) / expected_length;
    let entropy_ceil = entropy.ceil();

    let campbell = campbell_lengths(&dist, alpha, base)?;
    let s = alpha.recip() - T::one();
    let h_alpha = renyi_entropy(&dist, alpha, base)?;
    let discounted = discounted_code_length(&dist, &campbell, s)?;

    let huffman_kraft = huffman.kraft_sum::<T>();
    let campbell_kraft = campbell.kraft_sum::<T>();

    Ok(BoundReport {
        alpha,
        base,
        s,
        num_texts: corpus.num_texts(),
        vocab_size: corpus.vocab_size(),
        entropy,
        expected_length,
        huffman_expected_code_length: huffman_expected,
        corpus_code_length: lenc,
        covariance,
        identity_residual,
        middle,
        entropy_ceil,
        huffman_kraft,
        renyi_entropy: h_alpha,
        discounted_length: discounted,
        campbell_kraft,
        identity_holds: identity_residual.abs() < tol,
        shannon_lower: entropy <= middle + tol,
        shannon_upper_ceil: middle <= entropy_ceil + tol,
        shannon_upper_strict: middle < entropy + T::one() + tol,
        campbell_lower: h_alpha <= discounted + tol,
        campbell_upper: discounted < h_alpha + T::one() + tol,
        kraft: huffman_kraft <= kraft_tol
            && campbell_kraft <= kraft_tol
            && huffman.is_prefix_free()
            && campbell.is_prefix_free(),
    })
}
