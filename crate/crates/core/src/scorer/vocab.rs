use std::collections::HashMap;
use std::fmt;
use std::io::{self, BufRead, Write};

use crate::TokenId;

/// Word to id bijection with three reserved entries.
///
/// Ids are dense in `[0, len)`. The end-of-sequence marker takes id 0 so
/// that it wins exact score ties against ordinary words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocab {
    words: Vec<String>,
    ids: HashMap<String, TokenId>,
}

impl Vocab {
    pub const EOS: TokenId = 0;
    pub const BOS: TokenId = 1;
    pub const UNK: TokenId = 2;

    pub const EOS_WORD: &'static str = "</s>";
    pub const BOS_WORD: &'static str = "<s>";
    pub const UNK_WORD: &'static str = "<unk>";

    pub fn new() -> Self {
        let mut v = Vocab {
            words: Vec::new(),
            ids: HashMap::new(),
        };
        for w in [Self::EOS_WORD, Self::BOS_WORD, Self::UNK_WORD] {
            v.insert(w);
        }
        v
    }

    /// Builds a vocabulary from words in first-seen order.
    pub fn from_words<'a>(words: impl IntoIterator<Item = &'a str>) -> Self {
        let mut v = Self::new();
        for w in words {
            v.insert(w);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Returns the id of `word`, adding it if absent.
    pub fn insert(&mut self, word: &str) -> TokenId {
        if let Some(&id) = self.ids.get(word) {
            return id;
        }
        let id = self.words.len() as TokenId;
        self.words.push(word.to_string());
        self.ids.insert(word.to_string(), id);
        id
    }

    pub fn id(&self, word: &str) -> Option<TokenId> {
        self.ids.get(word).copied()
    }

    pub fn word(&self, id: TokenId) -> Option<&str> {
        self.words.get(id as usize).map(String::as_str)
    }

    pub fn is_special(id: TokenId) -> bool {
        id <= Self::UNK
    }

    /// Whitespace tokenization; unknown words map to [`Vocab::UNK`].
    pub fn encode(&self, text: &str) -> Vec<TokenId> {
        text.split_whitespace()
            .map(|w| self.id(w).unwrap_or(Self::UNK))
            .collect()
    }

    /// Whitespace tokenization that grows the vocabulary.
    pub fn encode_mut(&mut self, text: &str) -> Vec<TokenId> {
        text.split_whitespace().map(|w| self.insert(w)).collect()
    }

    /// Joins words, dropping the reserved markers (except `<unk>`).
    pub fn decode(&self, tokens: &[TokenId]) -> String {
        tokens
            .iter()
            .filter(|&&t| t != Self::EOS && t != Self::BOS)
            .map(|&t| self.word(t).unwrap_or(Self::UNK_WORD))
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }

    /// One word per line, in id order.
    pub fn write_to(&self, mut w: impl Write) -> io::Result<()> {
        for word in &self.words {
            writeln!(w, "{word}")?;
        }
        Ok(())
    }

    pub fn read_from(r: impl BufRead) -> io::Result<Self> {
        let mut words = Vec::new();
        for line in r.lines() {
            let line = line?;
            let word = line.trim();
            if !word.is_empty() {
                words.push(word.to_string());
            }
        }
        let reserved = [Self::EOS_WORD, Self::BOS_WORD, Self::UNK_WORD];
        if words.len() < 3 || words[..3] != reserved {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                "vocabulary file must start with </s>, <s>, <unk>",
            ));
        }
        let mut v = Vocab {
            words: Vec::new(),
            ids: HashMap::new(),
        };
        for w in &words {
            if v.ids.contains_key(w) {
                return Err(io::Error::new(
                    io::ErrorKind::InvalidData,
                    format!("duplicate vocabulary entry {w:?}"),
                ));
            }
            v.insert(w);
        }
        Ok(v)
    }
}

impl Default for Vocab {
    fn default() -> Self {
        Self::new()
    }
}

impl fmt::Display for Vocab {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Vocab({} entries)", self.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reserved_ids_are_dense_and_distinct() {
        let v = Vocab::new();
        assert_eq!(v.len(), 3);
        assert_eq!(v.id("</s>"), Some(Vocab::EOS));
        assert_eq!(v.id("<s>"), Some(Vocab::BOS));
        assert_eq!(v.id("<unk>"), Some(Vocab::UNK));
    }

    #[test]
    fn encode_maps_unknown_words() {
        let v = Vocab::from_words(["dog", "runs"]);
        assert_eq!(v.encode("dog  sleeps runs"), vec![3, Vocab::UNK, 4]);
        assert_eq!(v.decode(&[3, 4, Vocab::EOS]), "dog runs");
    }

    #[test]
    fn file_round_trip() {
        let v = Vocab::from_words(["a", "b", "c"]);
        let mut buf = Vec::new();
        v.write_to(&mut buf).unwrap();
        let back = Vocab::read_from(&buf[..]).unwrap();
        assert_eq!(v, back);
    }

    #[test]
    fn rejects_file_without_reserved_prefix() {
        assert!(Vocab::read_from(&b"a\nb\n"[..]).is_err());
        assert!(Vocab::read_from(&b"</s>\n<s>\n<unk>\na\na\n"[..]).is_err());
    }
}
