//! Invertible tokenizers whose compression rate can be dialled: temperature-annealed BPE
//! and LZW.
//!
//! Both produce tokens that concatenate back to the input. For file output, tokens are
//! rendered space-separated with `@@` in front of every piece that does not start a word.

mod bpe;
mod lzw;

use std::fmt;
use std::str::FromStr;

pub use bpe::{apply_bpe, detokenize_bpe, pair_counts, sample_pair, train_bpe, BpeModel};
pub use lzw::{apply_lzw, detokenize_lzw, train_lzw, LzwModel};

use crate::error::{Error, Result};

/// Marks the last piece of every word inside BPE. Reserved: it may not occur in input.
pub const END_OF_WORD: char = '\u{E000}';

/// Prefix of non-word-initial pieces in rendered output.
pub const CONTINUATION_PREFIX: &str = "@@";

/// Visible stand-ins for whitespace inside rendered LZW tokens.
pub const SPACE_GLYPH: char = '\u{2581}';
pub const TAB_GLYPH: char = '\u{21E5}';

/// Merge-selection temperature for BPE training.
///
/// `Greedy` and `Antigreedy` are the τ → 0⁺ and τ → 0⁻ limits: always the most or least
/// frequent pair. Finite values sample from a softmax over normalized pair counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Temperature {
    Greedy,
    Antigreedy,
    Value(f64),
}

impl Temperature {
    /// Greedy first, then progressively less compressive settings, ending in antigreedy.
    pub const LADDER: [Temperature; 10] = [
        Temperature::Greedy,
        Temperature::Value(0.2),
        Temperature::Value(0.4),
        Temperature::Value(0.9),
        Temperature::Value(100.0),
        Temperature::Value(-100.0),
        Temperature::Value(-0.9),
        Temperature::Value(-0.4),
        Temperature::Value(-0.2),
        Temperature::Antigreedy,
    ];

    pub fn value(tau: f64) -> Result<Self> {
        if tau == 0.0 || !tau.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "temperature must be finite and non-zero, got {tau}; use greedy or antigreedy"
            )));
        }
        Ok(Temperature::Value(tau))
    }
}

impl fmt::Display for Temperature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Temperature::Greedy => f.write_str("greedy"),
            Temperature::Antigreedy => f.write_str("antigreedy"),
            Temperature::Value(t) => write!(f, "{t}"),
        }
    }
}

impl FromStr for Temperature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greedy" | "0+" => Ok(Temperature::Greedy),
            "antigreedy" | "0-" => Ok(Temperature::Antigreedy),
            other => {
                let tau: f64 = other.parse().map_err(|_| {
                    Error::InvalidArgument(format!(
                        "temperature must be a number, greedy or antigreedy, got {other:?}"
                    ))
                })?;
                Temperature::value(tau)
            }
        }
    }
}

/// A trained tokenizer of either kind, as stored in a model file.
#[derive(Debug, Clone, PartialEq)]
pub enum TokenizerModel {
    Bpe(BpeModel),
    Lzw(LzwModel),
}

impl TokenizerModel {
    /// Parses a model file, choosing the kind from its header line.
    pub fn parse(text: &str) -> Result<Self> {
        let header = text.lines().next().unwrap_or_default();
        if header.starts_with("bpe ") {
            BpeModel::parse(text).map(TokenizerModel::Bpe)
        } else if header.starts_with("lzw ") {
            LzwModel::parse(text).map(TokenizerModel::Lzw)
        } else {
            Err(Error::parse(1, format!("unknown model header {header:?}")))
        }
    }

    pub fn serialize(&self) -> String {
        match self {
            TokenizerModel::Bpe(m) => m.serialize(),
            TokenizerModel::Lzw(m) => m.serialize(),
        }
    }

    /// Tokenizes one line and renders it in the `@@` convention.
    pub fn render_line(&self, line: &str) -> Result<String> {
        match self {
            TokenizerModel::Bpe(m) => Ok(render_bpe(&apply_bpe(m, line)?)),
            TokenizerModel::Lzw(m) => Ok(render_lzw(line, &apply_lzw(m, line)?)),
        }
    }

    /// Inverts [`Self::render_line`].
    pub fn restore_line(&self, rendered: &str) -> Result<String> {
        match self {
            TokenizerModel::Bpe(_) => detokenize_bpe(&parse_bpe_rendering(rendered)),
            TokenizerModel::Lzw(_) => Ok(parse_lzw_rendering(rendered)),
        }
    }
}

/// Renders BPE tokens: end-of-word markers dropped, continuation pieces prefixed `@@`.
pub fn render_bpe(tokens: &[String]) -> String {
    let mut out = String::new();
    let mut word_start = true;
    for tok in tokens {
        if !out.is_empty() {
            out.push(' ');
        }
        if !word_start {
            out.push_str(CONTINUATION_PREFIX);
        }
        let body = tok.strip_suffix(END_OF_WORD);
        out.push_str(body.unwrap_or(tok));
        word_start = body.is_some();
    }
    out
}

/// Reverses [`render_bpe`], restoring end-of-word markers.
pub fn parse_bpe_rendering(line: &str) -> Vec<String> {
    let mut tokens: Vec<String> = Vec::new();
    for piece in line.split_whitespace() {
        match piece.strip_prefix(CONTINUATION_PREFIX) {
            Some(rest) if !tokens.is_empty() => tokens.push(rest.to_owned()),
            _ => {
                if let Some(last) = tokens.last_mut() {
                    last.push(END_OF_WORD);
                }
                tokens.push(piece.to_owned());
            }
        }
    }
    if let Some(last) = tokens.last_mut() {
        last.push(END_OF_WORD);
    }
    tokens
}

fn escape_lzw_token(tok: &str) -> String {
    tok.chars()
        .map(|c| match c {
            ' ' => SPACE_GLYPH,
            '\t' => TAB_GLYPH,
            c => c,
        })
        .collect()
}

/// Renders LZW tokens of `line`: whitespace shown as glyphs, and `@@` in front of every
/// token that neither starts the line nor follows whitespace.
pub fn render_lzw(line: &str, tokens: &[String]) -> String {
    let mut out = String::new();
    let mut prev: Option<char> = None;
    debug_assert_eq!(tokens.concat(), line);
    for tok in tokens {
        if !out.is_empty() {
            out.push(' ');
        }
        if prev.is_some_and(|c| !c.is_whitespace()) {
            out.push_str(CONTINUATION_PREFIX);
        }
        out.push_str(&escape_lzw_token(tok));
        prev = tok.chars().last().or(prev);
    }
    out
}

/// Reverses [`render_lzw`].
pub fn parse_lzw_rendering(rendered: &str) -> String {
    rendered
        .split_whitespace()
        .map(|piece| piece.strip_prefix(CONTINUATION_PREFIX).unwrap_or(piece))
        .flat_map(str::chars)
        .map(|c| match c {
            SPACE_GLYPH => ' ',
            TAB_GLYPH => '\t',
            c => c,
        })
        .collect()
}
