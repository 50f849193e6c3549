use indexmap::IndexSet;

use crate::error::{Error, Result};

/// LZW substring dictionary in insertion order.
#[derive(Debug, Clone, PartialEq)]
pub struct LzwModel {
    entries: IndexSet<String>,
    vocab_size: usize,
    max_chars: usize,
}

impl LzwModel {
    pub fn new(entries: impl IntoIterator<Item = String>, vocab_size: usize) -> Result<Self> {
        let mut set = IndexSet::new();
        for e in entries {
            if e.is_empty() {
                return Err(Error::InvalidArgument("empty dictionary entry".into()));
            }
            set.insert(e);
        }
        let max_chars = set.iter().map(|e| e.chars().count()).max().unwrap_or(0);
        Ok(Self {
            entries: set,
            vocab_size,
            max_chars,
        })
    }

    pub fn entries(&self) -> impl ExactSizeIterator<Item = &str> {
        self.entries.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, s: &str) -> bool {
        self.entries.contains(s)
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn serialize(&self) -> String {
        let mut out = format!("lzw v1 vocab={}\n", self.vocab_size);
        for e in &self.entries {
            for c in e.chars() {
                match c {
                    '\\' => out.push_str("\\\\"),
                    '\t' => out.push_str("\\t"),
                    '\n' => out.push_str("\\n"),
                    '\r' => out.push_str("\\r"),
                    c => out.push(c),
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.split('\n');
        let header = lines.next().unwrap_or_default();
        let vocab_size = header
            .strip_prefix("lzw v1 vocab=")
            .and_then(|v| v.trim_end_matches('\r').parse::<usize>().ok())
            .ok_or_else(|| Error::parse(1, format!("expected an lzw v1 header, got {header:?}")))?;
        let mut entries = Vec::new();
        let body: Vec<&str> = lines.collect();
        let body = match body.split_last() {
            Some((&"", rest)) => rest,
            _ => &body[..],
        };
        for (i, line) in body.iter().enumerate() {
            let lineno = i + 2;
            if line.is_empty() {
                return Err(Error::parse(lineno, "empty dictionary entry"));
            }
            let mut entry = String::with_capacity(line.len());
            let mut chars = line.chars();
            while let Some(c) = chars.next() {
                if c != '\\' {
                    entry.push(c);
                    continue;
                }
                match chars.next() {
                    Some('\\') => entry.push('\\'),
                    Some('t') => entry.push('\t'),
                    Some('n') => entry.push('\n'),
                    Some('r') => entry.push('\r'),
                    other => {
                        return Err(Error::parse(
                            lineno,
                            format!(
                                "bad escape \\{}",
                                other.map(String::from).unwrap_or_default()
                            ),
                        ))
                    }
                }
            }
            if entries.contains(&entry) {
                return Err(Error::parse(lineno, format!("duplicate entry {entry:?}")));
            }
            entries.push(entry);
        }
        if entries.len() > vocab_size {
            return Err(Error::parse(
                1,
                format!("{} entries exceed vocab={vocab_size}", entries.len()),
            ));
        }
        Self::new(entries, vocab_size)
    }
}

/// Builds an LZW dictionary in one pass over the texts joined by newlines.
///
/// The dictionary starts with every distinct character in order of first occurrence.
/// Each time the current phrase plus the next character is new, it is added and the
/// phrase restarts at that character. Additions stop once the dictionary holds
/// `vocab_size` entries.
pub fn train_lzw<S: AsRef<str>>(texts: &[S], vocab_size: usize) -> Result<LzwModel> {
    let joined = texts
        .iter()
        .map(AsRef::as_ref)
        .collect::<Vec<_>>()
        .join("\n");
    let mut dict: IndexSet<String> = joined.chars().map(String::from).collect();
    if vocab_size < dict.len() {
        return Err(Error::InvalidArgument(format!(
            "vocabulary size {vocab_size} is below the character inventory of {}",
            dict.len()
        )));
    }
    let mut phrase = String::new();
    for c in joined.chars() {
        if dict.len() >= vocab_size {
            break;
        }
        let mut extended = phrase.clone();
        extended.push(c);
        if dict.contains(&extended) {
            phrase = extended;
        } else {
            dict.insert(extended);
            phrase.clear();
            phrase.push(c);
        }
    }
    LzwModel::new(dict, vocab_size)
}

/// Splits `text` by greedy longest match against the dictionary.
pub fn apply_lzw(model: &LzwModel, text: &str) -> Result<Vec<String>> {
    let bounds: Vec<usize> = text
        .char_indices()
        .map(|(i, _)| i)
        .chain(std::iter::once(text.len()))
        .collect();
    let n = bounds.len() - 1;
    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        let longest = (1..=model.max_chars.min(n - i))
            .rev()
            .find(|&k| model.entries.contains(&text[bounds[i]..bounds[i + k]]));
        let Some(k) = longest else {
            let c = text[bounds[i]..].chars().next().unwrap();
            return Err(Error::Coverage(format!(
                "character {c:?} (U+{:04X}) is not in the dictionary",
                c as u32
            )));
        };
        out.push(text[bounds[i]..bounds[i + k]].to_owned());
        i += k;
    }
    Ok(out)
}

pub fn detokenize_lzw(tokens: &[String]) -> String {
    tokens.concat()
}
