use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::split_lines;
use crate::error::{Error, Result};

/// How word boundaries are marked in segmented text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryConvention {
    /// Every piece that ends inside a word carries `@@` (BPE style).
    ContinuationSuffix,
    /// The last piece of every word carries `_` (wordpiece style).
    WordEnd,
}

impl BoundaryConvention {
    pub const CONTINUATION: &'static str = "@@";
    pub const WORD_END: char = '_';

    pub fn name(self) -> &'static str {
        match self {
            BoundaryConvention::ContinuationSuffix => "continuation_suffix",
            BoundaryConvention::WordEnd => "word_end",
        }
    }

    /// Characters that must be escaped inside words under this convention.
    pub fn reserved(self) -> &'static [char] {
        match self {
            BoundaryConvention::ContinuationSuffix => &['@'],
            BoundaryConvention::WordEnd => &['_'],
        }
    }
}

impl fmt::Display for BoundaryConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundaryConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "continuation_suffix" => Ok(BoundaryConvention::ContinuationSuffix),
            "word_end" => Ok(BoundaryConvention::WordEnd),
            other => Err(Error::Vocabulary(format!("unknown boundary convention `{other}`"))),
        }
    }
}

const HEADER_PREFIX: &str = "#subvocab convention=";

/// Ordered list of distinct subword tokens. A token's index is its
/// identity, the slot an embedding row attaches to.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    /// Word-end mode only: `ab_` is stored here under `ab`.
    final_index: HashMap<String, usize>,
    convention: BoundaryConvention,
    max_chars: usize,
    alphabet: HashSet<char>,
}

impl PartialEq for Vocabulary {
    fn eq(&self, other: &Self) -> bool {
        self.convention == other.convention && self.tokens == other.tokens
    }
}

impl Eq for Vocabulary {}

impl Vocabulary {
    pub fn new(tokens: Vec<String>, convention: BoundaryConvention) -> Result<Self> {
        let mut index = HashMap::with_capacity(tokens.len());
        let mut final_index = HashMap::new();
        let mut max_chars = 0;
        let mut alphabet = HashSet::new();
        for (i, tok) in tokens.iter().enumerate() {
            if tok.is_empty() {
                return Err(Error::Vocabulary(format!("empty token at index {i}")));
            }
            if tok.chars().any(char::is_whitespace) {
                return Err(Error::Vocabulary(format!("token {tok:?} contains whitespace")));
            }
            if index.insert(tok.clone(), i).is_some() {
                return Err(Error::Vocabulary(format!("duplicate token {tok:?}")));
            }
            if convention == BoundaryConvention::WordEnd {
                if let Some(stem) = tok.strip_suffix(BoundaryConvention::WORD_END) {
                    if !stem.is_empty() {
                        final_index.insert(stem.to_string(), i);
                    }
                }
            }
            max_chars = max_chars.max(tok.chars().count());
            let body = match convention {
                BoundaryConvention::WordEnd => tok.strip_suffix(BoundaryConvention::WORD_END).unwrap_or(tok),
                BoundaryConvention::ContinuationSuffix if tok == super::END_OF_WORD => "",
                BoundaryConvention::ContinuationSuffix => tok,
            };
            alphabet.extend(body.chars());
        }
        Ok(Self {
            tokens,
            index,
            final_index,
            convention,
            max_chars,
            alphabet,
        })
    }

    pub fn from_strs<S: AsRef<str>>(tokens: &[S], convention: BoundaryConvention) -> Result<Self> {
        Self::new(tokens.iter().map(|t| t.as_ref().to_string()).collect(), convention)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn into_tokens(self) -> Vec<String> {
        self.tokens
    }

    pub fn convention(&self) -> BoundaryConvention {
        self.convention
    }

    pub fn get(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn token(&self, index: usize) -> Option<&str> {
        self.tokens.get(index).map(String::as_str)
    }

    pub(crate) fn max_token_chars(&self) -> usize {
        self.max_chars
    }

    pub(crate) fn final_piece(&self, stem: &str) -> Option<usize> {
        self.final_index.get(stem).copied()
    }

    /// Whether `ch` occurs in any token. Other characters are escaped
    /// before segmentation.
    pub fn has_char(&self, ch: char) -> bool {
        self.alphabet.contains(&ch)
    }

    /// Index of the vocabulary entry that produced an emitted token, if any.
    ///
    /// Boundary marks are stripped as the convention requires; in word-end
    /// mode `me_` resolves to `me_` when present and to `me` otherwise.
    pub fn entry_of(&self, emitted: &str) -> Option<usize> {
        match self.convention {
            BoundaryConvention::ContinuationSuffix => {
                let stem = emitted
                    .strip_suffix(BoundaryConvention::CONTINUATION)
                    .unwrap_or(emitted);
                self.get(stem)
            }
            BoundaryConvention::WordEnd => self.get(emitted).or_else(|| {
                emitted
                    .strip_suffix(BoundaryConvention::WORD_END)
                    .and_then(|stem| self.get(stem))
            }),
        }
    }

    /// Serialized form: a header line naming the convention, then one token
    /// per line. Token `i` sits on line `i + 1` of the file.
    pub fn to_text(&self) -> String {
        let mut out = format!("{HEADER_PREFIX}{}\n", self.convention);
        for tok in &self.tokens {
            out.push_str(tok);
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let lines = split_lines(text);
        let mut it = lines.into_iter();
        let header = it.next().ok_or(Error::Empty("vocabulary file"))?;
        let convention = header
            .strip_prefix(HEADER_PREFIX)
            .ok_or_else(|| Error::Parse {
                line: 1,
                reason: format!("expected header `{HEADER_PREFIX}<convention>`"),
            })?
            .trim()
            .parse()?;
        Self::new(it.collect(), convention)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_whitespace() {
        let conv = BoundaryConvention::WordEnd;
        assert!(Vocabulary::from_strs(&["a", "a"], conv).is_err());
        assert!(Vocabulary::from_strs(&["a b"], conv).is_err());
        assert!(Vocabulary::from_strs(&[""], conv).is_err());
    }

    #[test]
    fn text_round_trip() {
        let v = Vocabulary::from_strs(&["ab_", "a", "#x"], BoundaryConvention::WordEnd).unwrap();
        let text = v.to_text();
        assert!(text.starts_with("#subvocab convention=word_end\n"));
        assert_eq!(text.lines().nth(2), Some("a"));
        assert_eq!(Vocabulary::parse(&text).unwrap(), v);
    }

    #[test]
    fn missing_header_is_an_error() {
        assert!(matches!(Vocabulary::parse("a\nb\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn entry_lookup() {
        let v = Vocabulary::from_strs(&["me", "week_", "a"], BoundaryConvention::WordEnd).unwrap();
        assert_eq!(v.entry_of("me_"), Some(0));
        assert_eq!(v.entry_of("week_"), Some(1));
        assert_eq!(v.entry_of("week"), None);
        let b = Vocabulary::from_strs(&["ne", "st"], BoundaryConvention::ContinuationSuffix).unwrap();
        assert_eq!(b.entry_of("ne@@"), Some(0));
        assert_eq!(b.entry_of("st"), Some(1));
    }
}
