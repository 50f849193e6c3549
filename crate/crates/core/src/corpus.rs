//! Tokenized corpora and the unigram distributions derived from them.
//!
//! Input is plain UTF-8 text with one text per line and tokens separated by runs of
//! whitespace. Tokens are taken verbatim, so continuation markers such as `@@` are part
//! of the token type.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use indexmap::IndexSet;

use crate::error::{Error, Result};
use crate::scalar::{stable_sum, Scalar};

/// Index of a token type in a [`Vocabulary`].
pub type TokenId = usize;

/// A token type. Non-empty and free of whitespace.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Token(String);

impl Token {
    pub fn new(surface: impl Into<String>) -> Result<Self> {
        let surface = surface.into();
        if surface.is_empty() {
            return Err(Error::InvalidArgument("token is empty".into()));
        }
        if surface.chars().any(char::is_whitespace) {
            return Err(Error::InvalidArgument(format!(
                "token {surface:?} contains whitespace"
            )));
        }
        Ok(Token(surface))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl std::fmt::Display for Token {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// Token types in order of first occurrence.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    types: IndexSet<String>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the id of `surface`, inserting it if unseen.
    pub fn intern(&mut self, surface: &str) -> TokenId {
        match self.types.get_index_of(surface) {
            Some(id) => id,
            None => self.types.insert_full(surface.to_owned()).0,
        }
    }

    pub fn id(&self, surface: &str) -> Option<TokenId> {
        self.types.get_index_of(surface)
    }

    pub fn token(&self, id: TokenId) -> Option<&str> {
        self.types.get_index(id).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.types.iter().map(String::as_str)
    }
}

/// Ingest options for [`TokenizedCorpus::load`].
#[derive(Debug, Clone, Default)]
pub struct IngestOptions {
    /// Stop after this many non-empty texts (across all files).
    pub max_texts: Option<usize>,
}

/// A multiset of tokenized texts over a shared vocabulary.
///
/// Every text is non-empty and every id is below the vocabulary size.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenizedCorpus {
    texts: Vec<Vec<TokenId>>,
    vocabulary: Arc<Vocabulary>,
}

impl TokenizedCorpus {
    /// Loads and pools the given files in argument order. Empty lines are skipped.
    pub fn load<P: AsRef<Path>>(paths: &[P], opts: &IngestOptions) -> Result<Self> {
        if paths.is_empty() {
            return Err(Error::EmptyInput("no input files given".into()));
        }
        let mut builder = CorpusBuilder::default();
        for path in paths {
            let path = path.as_ref();
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let before = builder.texts.len();
            for line in text.lines() {
                if opts.max_texts.is_some_and(|max| builder.texts.len() >= max) {
                    break;
                }
                builder.push_line(line);
            }
            if builder.texts.len() == before && opts.max_texts.is_none_or(|m| before < m) {
                return Err(Error::EmptyInput(format!(
                    "{} has no non-empty lines",
                    path.display()
                )));
            }
        }
        builder.finish()
    }

    /// Builds a corpus from in-memory lines, one text per item.
    pub fn from_lines<I, S>(lines: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut builder = CorpusBuilder::default();
        for line in lines {
            builder.push_line(line.as_ref());
        }
        builder.finish()
    }

    /// Builds a corpus from id sequences over an existing vocabulary.
    pub fn from_ids(texts: Vec<Vec<TokenId>>, vocabulary: Vocabulary) -> Result<Self> {
        if texts.is_empty() {
            return Err(Error::EmptyInput("corpus has no texts".into()));
        }
        let v = vocabulary.len();
        for (i, text) in texts.iter().enumerate() {
            if text.is_empty() {
                return Err(Error::InvalidArgument(format!("text {i} is empty")));
            }
            if let Some(&bad) = text.iter().find(|&&id| id >= v) {
                return Err(Error::InvalidArgument(format!(
                    "text {i} uses id {bad} outside a vocabulary of {v}"
                )));
            }
        }
        Ok(Self {
            texts,
            vocabulary: Arc::new(vocabulary),
        })
    }

    pub fn texts(&self) -> &[Vec<TokenId>] {
        &self.texts
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn num_texts(&self) -> usize {
        self.texts.len()
    }

    pub fn vocab_size(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn lengths(&self) -> impl Iterator<Item = usize> + '_ {
        self.texts.iter().map(Vec::len)
    }

    /// Total number of tokens N.
    pub fn total_tokens(&self) -> usize {
        self.lengths().sum()
    }

    /// Occurrence count of every type, indexed by id.
    pub fn counts(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.vocab_size()];
        for &id in self.texts.iter().flatten() {
            counts[id] += 1;
        }
        counts
    }

    /// Mean number of tokens per text, E[L] under uniform text weights.
    pub fn expected_length<T: Scalar>(&self) -> T {
        T::of_usize(self.total_tokens()) / T::of_usize(self.num_texts())
    }

    /// X_δ for one text: the proportion of its tokens that are δ, indexed by id.
    pub fn unigram_proportions<T: Scalar>(&self, text: usize) -> Result<Vec<T>> {
        let ids = self.texts.get(text).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "text index {text} out of range for {} texts",
                self.num_texts()
            ))
        })?;
        let mut counts = vec![0usize; self.vocab_size()];
        for &id in ids {
            counts[id] += 1;
        }
        let len = T::of_usize(ids.len());
        Ok(counts.into_iter().map(|c| T::of_usize(c) / len).collect())
    }

    pub(crate) fn vocabulary_arc(&self) -> Arc<Vocabulary> {
        Arc::clone(&self.vocabulary)
    }
}

#[derive(Default)]
struct CorpusBuilder {
    texts: Vec<Vec<TokenId>>,
    vocabulary: Vocabulary,
}

impl CorpusBuilder {
    fn push_line(&mut self, line: &str) {
        let ids: Vec<TokenId> = line
            .split_whitespace()
            .map(|tok| self.vocabulary.intern(tok))
            .collect();
        if !ids.is_empty() {
            self.texts.push(ids);
        }
    }

    fn finish(self) -> Result<TokenizedCorpus> {
        if self.texts.is_empty() {
            return Err(Error::EmptyInput("no non-empty lines".into()));
        }
        Ok(TokenizedCorpus {
            texts: self.texts,
            vocabulary: Arc::new(self.vocabulary),
        })
    }
}

/// Empirical unigram distribution over token types.
///
/// Only types with positive probability are stored; `ids` maps each entry back to its
/// token id. Entries follow vocabulary order.
#[derive(Debug, Clone)]
pub struct UnigramDistribution<T> {
    ids: Vec<TokenId>,
    probs: Vec<T>,
    counts: Option<Vec<u64>>,
    vocabulary: Option<Arc<Vocabulary>>,
}

impl<T: Scalar> UnigramDistribution<T> {
    /// Pooled estimator: count(δ) / N over all tokens of the corpus.
    pub fn from_corpus(corpus: &TokenizedCorpus) -> Self {
        let mut dist =
            Self::from_counts(&corpus.counts()).expect("a non-empty corpus has positive counts");
        dist.vocabulary = Some(corpus.vocabulary_arc());
        dist
    }

    /// Text-averaged estimator: the mean over texts of X_δ, each text weighted 1/M.
    ///
    /// This is the distribution under which the covariance decomposition of the corpus
    /// code length is an exact identity. It coincides with [`Self::from_corpus`] when all
    /// texts have the same length.
    pub fn text_averaged(corpus: &TokenizedCorpus) -> Self {
        let v = corpus.vocab_size();
        let mut acc = vec![T::zero(); v];
        for text in corpus.texts() {
            let len = T::of_usize(text.len());
            for &id in text {
                acc[id] = acc[id] + T::one() / len;
            }
        }
        let m = T::of_usize(corpus.num_texts());
        let probs: Vec<T> = acc.into_iter().map(|x| x / m).collect();
        let mut dist = Self::from_weights(&probs).expect("a non-empty corpus has positive mass");
        dist.vocabulary = Some(corpus.vocabulary_arc());
        dist
    }

    /// Distribution proportional to integer counts. Zero counts are dropped.
    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::EmptyInput("all counts are zero".into()));
        }
        let n = T::from_u64(total).expect("u64 converts to Scalar");
        let (ids, kept): (Vec<_>, Vec<_>) = counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &c)| (i, c))
            .unzip();
        let probs = kept
            .iter()
            .map(|&c| T::from_u64(c).expect("u64 converts to Scalar") / n)
            .collect();
        Ok(Self {
            ids,
            probs,
            counts: Some(kept),
            vocabulary: None,
        })
    }

    /// Distribution proportional to non-negative weights. Zero weights are dropped.
    pub fn from_weights(weights: &[T]) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < T::zero()) {
            return Err(Error::InvalidArgument(
                "weights must be finite and non-negative".into(),
            ));
        }
        let total = stable_sum(weights.iter().copied());
        if total <= T::zero() {
            return Err(Error::EmptyInput("all weights are zero".into()));
        }
        let (ids, probs) = weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > T::zero())
            .map(|(i, &w)| (i, w / total))
            .unzip();
        Ok(Self {
            ids,
            probs,
            counts: None,
            vocabulary: None,
        })
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn ids(&self) -> &[TokenId] {
        &self.ids
    }

    /// Per-type counts, when the distribution was estimated from counts.
    pub fn counts(&self) -> Option<&[u64]> {
        self.counts.as_deref()
    }

    /// Total token count N, when the distribution was estimated from counts.
    pub fn total(&self) -> Option<u64> {
        self.counts.as_ref().map(|c| c.iter().sum())
    }

    /// Number of types with positive probability.
    pub fn support_size(&self) -> usize {
        self.probs.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (TokenId, T)> + '_ {
        self.ids.iter().copied().zip(self.probs.iter().copied())
    }

    pub fn max_prob(&self) -> T {
        self.probs.iter().copied().fold(T::zero(), T::max)
    }

    /// Human-readable name of a token id: its surface if a vocabulary is attached.
    pub fn token_name(&self, id: TokenId) -> String {
        self.vocabulary
            .as_ref()
            .and_then(|v| v.token(id))
            .map_or_else(|| format!("#{id}"), str::to_owned)
    }
}
