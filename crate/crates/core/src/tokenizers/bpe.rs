use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Temperature, END_OF_WORD};
use crate::error::{Error, Result};

type Sym = u32;

/// Ordered merge list of a trained BPE tokenizer.
#[derive(Debug, Clone)]
pub struct BpeModel {
    merges: Vec<(String, String)>,
    vocab_size: usize,
    temperature: Temperature,
    seed: u64,
    ranks: HashMap<(String, String), usize>,
}

impl PartialEq for BpeModel {
    fn eq(&self, other: &Self) -> bool {
        self.merges == other.merges
            && self.vocab_size == other.vocab_size
            && self.temperature == other.temperature
            && self.seed == other.seed
    }
}

impl BpeModel {
    pub fn new(
        merges: Vec<(String, String)>,
        vocab_size: usize,
        temperature: Temperature,
        seed: u64,
    ) -> Self {
        let mut ranks = HashMap::with_capacity(merges.len());
        for (rank, pair) in merges.iter().enumerate() {
            ranks.entry(pair.clone()).or_insert(rank);
        }
        Self {
            merges,
            vocab_size,
            temperature,
            seed,
            ranks,
        }
    }

    pub fn merges(&self) -> &[(String, String)] {
        &self.merges
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn temperature(&self) -> Temperature {
        self.temperature
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Distinct token types available when segmenting `texts`: their initial symbols
    /// plus the result of every merge.
    pub fn vocabulary<S: AsRef<str>>(&self, texts: &[S]) -> BTreeSet<String> {
        let mut vocab: BTreeSet<String> = texts
            .iter()
            .flat_map(|t| t.as_ref().split_whitespace().flat_map(word_symbols))
            .collect();
        vocab.extend(self.merges.iter().map(|(l, r)| format!("{l}{r}")));
        vocab
    }

    /// Header line followed by one `left<TAB>right` merge per line.
    pub fn serialize(&self) -> String {
        let mut out = format!(
            "bpe v1 vocab={} tau={} seed={}\n",
            self.vocab_size, self.temperature, self.seed
        );
        for (l, r) in &self.merges {
            out.push_str(l);
            out.push('\t');
            out.push_str(r);
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().unwrap_or_default();
        let mut fields = header.split(' ');
        if fields.next() != Some("bpe") || fields.next() != Some("v1") {
            return Err(Error::parse(
                1,
                format!("expected a bpe v1 header, got {header:?}"),
            ));
        }
        let (mut vocab, mut tau, mut seed) = (None, None, None);
        for field in fields {
            let (k, v) = field
                .split_once('=')
                .ok_or_else(|| Error::parse(1, format!("malformed header field {field:?}")))?;
            let bad = |_| Error::parse(1, format!("bad value for {k}: {v:?}"));
            match k {
                "vocab" => vocab = Some(v.parse::<usize>().map_err(|e| bad(e.to_string()))?),
                "tau" => tau = Some(v.parse::<Temperature>().map_err(|e| bad(e.to_string()))?),
                "seed" => seed = Some(v.parse::<u64>().map_err(|e| bad(e.to_string()))?),
                _ => return Err(Error::parse(1, format!("unknown header field {k:?}"))),
            }
        }
        let missing = |k: &str| Error::parse(1, format!("header lacks {k}="));
        let vocab = vocab.ok_or_else(|| missing("vocab"))?;
        let tau = tau.ok_or_else(|| missing("tau"))?;
        let seed = seed.ok_or_else(|| missing("seed"))?;

        let mut merges = Vec::new();
        for (i, line) in lines.enumerate() {
            let (l, r) = line
                .split_once('\t')
                .filter(|(l, r)| !l.is_empty() && !r.is_empty() && !r.contains('\t'))
                .ok_or_else(|| {
                    Error::parse(i + 2, format!("expected left<TAB>right, got {line:?}"))
                })?;
            merges.push((l.to_owned(), r.to_owned()));
        }
        Ok(Self::new(merges, vocab, tau, seed))
    }
}

fn check_input(text: &str) -> Result<()> {
    if text.contains(END_OF_WORD) {
        return Err(Error::InvalidArgument(format!(
            "input contains the reserved end-of-word character U+{:04X}",
            END_OF_WORD as u32
        )));
    }
    Ok(())
}

/// Initial symbols of a word: its characters, the last one carrying the end-of-word marker.
fn word_symbols(word: &str) -> Vec<String> {
    let mut syms: Vec<String> = word.chars().map(String::from).collect();
    if let Some(last) = syms.last_mut() {
        last.push(END_OF_WORD);
    }
    syms
}

/// Adjacent-pair counts within words, sorted by pair. Words are whitespace-separated
/// units of `texts`; the last symbol of every word carries the end-of-word marker.
pub fn pair_counts<S: AsRef<str>>(texts: &[S]) -> Vec<((String, String), u64)> {
    let mut counts: BTreeMap<(String, String), u64> = BTreeMap::new();
    for text in texts {
        for word in text.as_ref().split_whitespace() {
            let syms = word_symbols(word);
            for w in syms.windows(2) {
                *counts.entry((w[0].clone(), w[1].clone())).or_default() += 1;
            }
        }
    }
    counts.into_iter().collect()
}

/// Picks a candidate index given candidate counts in a fixed order.
///
/// Greedy returns the first maximum and antigreedy the first minimum. A finite τ samples
/// from softmax(count / (τ · max count)).
pub fn sample_pair<R: Rng + ?Sized>(
    counts: &[u64],
    temperature: Temperature,
    rng: &mut R,
) -> usize {
    assert!(!counts.is_empty(), "no candidate pairs");
    match temperature {
        Temperature::Greedy => {
            let best = *counts.iter().max().unwrap();
            counts.iter().position(|&c| c == best).unwrap()
        }
        Temperature::Antigreedy => {
            let worst = *counts.iter().min().unwrap();
            counts.iter().position(|&c| c == worst).unwrap()
        }
        Temperature::Value(tau) => {
            let top = *counts.iter().max().unwrap() as f64;
            let logits: Vec<f64> = counts.iter().map(|&c| c as f64 / top / tau).collect();
            let shift = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let weights: Vec<f64> = logits.iter().map(|&l| (l - shift).exp()).collect();
            let total: f64 = weights.iter().sum();
            let mut u = rng.gen::<f64>() * total;
            for (i, w) in weights.iter().enumerate() {
                if u < *w {
                    return i;
                }
                u -= w;
            }
            // Rounding left u just past the last bucket.
            weights.iter().rposition(|&w| w > 0.0).unwrap()
        }
    }
}

struct Trainer {
    symbols: Vec<String>,
    index: HashMap<String, Sym>,
    words: Vec<(Vec<Sym>, u64)>,
    pairs: HashMap<(Sym, Sym), u64>,
    occurs_in: HashMap<(Sym, Sym), HashSet<usize>>,
}

impl Trainer {
    fn intern(&mut self, s: &str) -> Sym {
        if let Some(&id) = self.index.get(s) {
            return id;
        }
        let id = self.symbols.len() as Sym;
        self.symbols.push(s.to_owned());
        self.index.insert(s.to_owned(), id);
        id
    }

    fn add_word_pairs(&mut self, wi: usize, sign: i64) {
        let (syms, freq) = &self.words[wi];
        for w in syms.windows(2) {
            let key = (w[0], w[1]);
            let c = self.pairs.entry(key).or_default();
            *c = c
                .checked_add_signed(sign * *freq as i64)
                .expect("pair count stays non-negative");
            if *c == 0 {
                self.pairs.remove(&key);
            } else if sign > 0 {
                self.occurs_in.entry(key).or_default().insert(wi);
            }
        }
    }

    fn merge(&mut self, pair: (Sym, Sym), merged: Sym) {
        let mut affected: Vec<usize> = self
            .occurs_in
            .remove(&pair)
            .map(|s| s.into_iter().collect())
            .unwrap_or_default();
        affected.sort_unstable();
        for wi in affected {
            if !self.words[wi].0.windows(2).any(|w| (w[0], w[1]) == pair) {
                continue;
            }
            self.add_word_pairs(wi, -1);
            let syms = &mut self.words[wi].0;
            *syms = merge_pair(syms, pair, merged);
            self.add_word_pairs(wi, 1);
        }
    }
}

/// Replaces non-overlapping occurrences of `pair`, scanning left to right.
fn merge_pair<S: PartialEq + Clone>(syms: &[S], pair: (S, S), merged: S) -> Vec<S> {
    let mut out = Vec::with_capacity(syms.len());
    let mut i = 0;
    while i < syms.len() {
        if i + 1 < syms.len() && syms[i] == pair.0 && syms[i + 1] == pair.1 {
            out.push(merged.clone());
            i += 2;
        } else {
            out.push(syms[i].clone());
            i += 1;
        }
    }
    out
}

/// Trains BPE on whitespace-split words of `texts`.
///
/// The vocabulary starts as the set of initial symbols (characters, with end-of-word
/// variants for word-final characters) and grows by one merge at a time. Only pairs
/// occurring at least twice are candidates; training stops when the vocabulary reaches
/// `vocab_size` or no candidate is left. Candidates are ordered lexicographically by
/// (left, right), which fixes greedy and antigreedy tie-breaking and the sampling order.
pub fn train_bpe<S: AsRef<str>>(
    texts: &[S],
    vocab_size: usize,
    temperature: Temperature,
    seed: u64,
) -> Result<BpeModel> {
    if let Temperature::Value(tau) = temperature {
        Temperature::value(tau)?;
    }
    let mut word_freq: BTreeMap<&str, u64> = BTreeMap::new();
    for text in texts {
        let text = text.as_ref();
        check_input(text)?;
        for word in text.split_whitespace() {
            *word_freq.entry(word).or_default() += 1;
        }
    }

    let mut trainer = Trainer {
        symbols: Vec::new(),
        index: HashMap::new(),
        words: Vec::with_capacity(word_freq.len()),
        pairs: HashMap::new(),
        occurs_in: HashMap::new(),
    };
    for (word, freq) in word_freq {
        let syms = word_symbols(word)
            .iter()
            .map(|s| trainer.intern(s))
            .collect();
        trainer.words.push((syms, freq));
    }
    let inventory = trainer.symbols.len();
    if vocab_size < inventory {
        return Err(Error::InvalidArgument(format!(
            "vocabulary size {vocab_size} is below the initial symbol inventory of {inventory}"
        )));
    }
    for wi in 0..trainer.words.len() {
        trainer.add_word_pairs(wi, 1);
    }

    let mut vocab: HashSet<Sym> = (0..inventory as Sym).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut merges = Vec::new();
    while vocab.len() < vocab_size {
        let mut candidates: Vec<((Sym, Sym), u64)> = trainer
            .pairs
            .iter()
            .filter(|(_, &c)| c >= 2)
            .map(|(&p, &c)| (p, c))
            .collect();
        if candidates.is_empty() {
            break;
        }
        let syms = &trainer.symbols;
        candidates.sort_unstable_by(|a, b| {
            (&syms[a.0 .0 as usize], &syms[a.0 .1 as usize])
                .cmp(&(&syms[b.0 .0 as usize], &syms[b.0 .1 as usize]))
        });
        let counts: Vec<u64> = candidates.iter().map(|&(_, c)| c).collect();
        let (pair, _) = candidates[sample_pair(&counts, temperature, &mut rng)];

        let left = trainer.symbols[pair.0 as usize].clone();
        let right = trainer.symbols[pair.1 as usize].clone();
        let merged = trainer.intern(&format!("{left}{right}"));
        vocab.insert(merged);
        trainer.merge(pair, merged);
        merges.push((left, right));
    }
    Ok(BpeModel::new(merges, vocab_size, temperature, seed))
}

fn apply_word(model: &BpeModel, word: &str) -> Vec<String> {
    let mut syms = word_symbols(word);
    loop {
        let best = syms
            .windows(2)
            .filter_map(|w| model.ranks.get(&(w[0].clone(), w[1].clone())))
            .min();
        let Some(&rank) = best else { break };
        let (l, r) = &model.merges[rank];
        syms = merge_pair(&syms, (l.clone(), r.clone()), format!("{l}{r}"));
    }
    syms
}

/// Segments `text` by replaying the merges in training order within every word.
///
/// Characters never seen in training stay single-character tokens. The last token of
/// every word carries [`END_OF_WORD`].
pub fn apply_bpe(model: &BpeModel, text: &str) -> Result<Vec<String>> {
    check_input(text)?;
    let mut cache: HashMap<&str, Vec<String>> = HashMap::new();
    let mut out = Vec::new();
    for word in text.split_whitespace() {
        let pieces = cache.entry(word).or_insert_with(|| apply_word(model, word));
        out.extend(pieces.iter().cloned());
    }
    Ok(out)
}

/// Concatenates BPE tokens, turning end-of-word markers back into single spaces.
pub fn detokenize_bpe(tokens: &[String]) -> Result<String> {
    let mut out = String::new();
    for (i, tok) in tokens.iter().enumerate() {
        let body = tok.strip_suffix(END_OF_WORD).unwrap_or(tok);
        if body.is_empty() || body.contains(END_OF_WORD) {
            return Err(Error::RoundTrip(format!(
                "token {i} ({tok:?}) has a misplaced end-of-word marker"
            )));
        }
        out.push_str(body);
        if body.len() < tok.len() && i + 1 < tokens.len() {
            out.push(' ');
        }
    }
    if tokens.last().is_some_and(|t| !t.ends_with(END_OF_WORD)) {
        return Err(Error::RoundTrip("last token does not end a word".into()));
    }
    Ok(out)
}
