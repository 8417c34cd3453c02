//! Propositions, labels, words and reward values.
//!
//! A [`Label`] is a subset of the atomic propositions stored as a bitmask whose
//! bit `i` is the `i`-th proposition of the owning [`AtomicPropositions`]. The
//! canonical text form of a label lists member names sorted and joined by `&`;
//! the empty label prints as `ε`.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use crate::error::{Error, Result};

/// Largest proposition set a machine may be defined over.
pub const MAX_PROPOSITIONS: usize = 16;

/// Text form of the empty label.
pub const EMPTY_LABEL: &str = "ε";
/// Shell-friendly alias for the empty label accepted on input.
pub const EMPTY_LABEL_ALIAS: &str = "~";

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AtomicPropositions {
    names: Vec<String>,
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name != EMPTY_LABEL
        && name != EMPTY_LABEL_ALIAS
        && !name
            .chars()
            .any(|c| c.is_whitespace() || ",&;/:\"".contains(c) || c == '-')
}

impl AtomicPropositions {
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.len() > MAX_PROPOSITIONS {
            return Err(Error::InvalidPropositions(format!(
                "{} propositions, at most {MAX_PROPOSITIONS} supported",
                names.len()
            )));
        }
        for (i, n) in names.iter().enumerate() {
            if !valid_name(n) {
                return Err(Error::InvalidPropositions(format!("bad name `{n}`")));
            }
            if names[..i].contains(n) {
                return Err(Error::InvalidPropositions(format!("duplicate name `{n}`")));
            }
        }
        Ok(Self { names })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Number of labels in `2^AP`.
    pub fn label_count(&self) -> usize {
        1usize << self.names.len()
    }

    /// All labels of `2^AP` in bitmask order.
    pub fn labels(&self) -> impl Iterator<Item = Label> + Clone {
        (0..self.label_count() as u32).map(Label)
    }

    pub fn contains(&self, label: Label) -> bool {
        (label.0 as usize) < self.label_count()
    }

    pub fn label<'a, I>(&self, members: I) -> Result<Label>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut bits = 0u32;
        for m in members {
            let i = self
                .index_of(m)
                .ok_or_else(|| Error::UnknownProposition(m.to_string()))?;
            bits |= 1 << i;
        }
        Ok(Label(bits))
    }

    /// Parses a canonical label (`a&b`, `ε`, `~`, or the empty string).
    pub fn parse_label(&self, text: &str) -> Result<Label> {
        let text = text.trim();
        if text.is_empty() || text == EMPTY_LABEL || text == EMPTY_LABEL_ALIAS {
            return Ok(Label::EMPTY);
        }
        self.label(text.split('&').map(str::trim))
    }

    /// Parses a `;`-separated word. The empty string is the empty word.
    pub fn parse_word(&self, text: &str) -> Result<Word> {
        let text = text.trim();
        if text.is_empty() {
            return Ok(Word::empty());
        }
        text.split(';')
            .map(|l| self.parse_label(l))
            .collect::<Result<Vec<_>>>()
            .map(Word::from)
    }

    pub fn display_label(&self, label: Label) -> String {
        let mut members: Vec<&str> = self
            .names
            .iter()
            .enumerate()
            .filter(|(i, _)| label.0 & (1 << i) != 0)
            .map(|(_, n)| n.as_str())
            .collect();
        if members.is_empty() {
            return EMPTY_LABEL.to_string();
        }
        members.sort_unstable();
        members.join("&")
    }

    pub fn display_word(&self, word: &Word) -> String {
        word.iter()
            .map(|&l| self.display_label(l))
            .collect::<Vec<_>>()
            .join(";")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Label(pub u32);

impl Label {
    pub const EMPTY: Label = Label(0);

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn contains_prop(self, prop: usize) -> bool {
        self.0 & (1 << prop) != 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(Vec<Label>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn labels(&self) -> &[Label] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Label> {
        self.0.iter()
    }

    pub fn push(&mut self, label: Label) {
        self.0.push(label);
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn with(&self, label: Label) -> Word {
        let mut v = Vec::with_capacity(self.len() + 1);
        v.extend_from_slice(&self.0);
        v.push(label);
        Word(v)
    }

    pub fn prefix(&self, len: usize) -> Word {
        Word(self.0[..len].to_vec())
    }

    pub fn suffix_from(&self, start: usize) -> Word {
        Word(self.0[start..].to_vec())
    }

    /// Non-empty prefixes, shortest first.
    pub fn prefixes(&self) -> impl Iterator<Item = Word> + '_ {
        (1..=self.len()).map(|k| self.prefix(k))
    }

    /// Shortest word first, then lexicographic on label bitmasks.
    pub fn canonical_cmp(&self, other: &Word) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl From<Vec<Label>> for Word {
    fn from(v: Vec<Label>) -> Self {
        Word(v)
    }
}

impl FromIterator<Label> for Word {
    fn from_iter<T: IntoIterator<Item = Label>>(iter: T) -> Self {
        Word(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a Word {
    type Item = &'a Label;
    type IntoIter = std::slice::Iter<'a, Label>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// A reward value compared by exact bit representation.
#[derive(Debug, Clone, Copy)]
pub struct Reward(pub f64);

impl Reward {
    pub const ZERO: Reward = Reward(0.0);
    pub const ONE: Reward = Reward(1.0);

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn parse(text: &str) -> Result<Reward> {
        let v: f64 = text.trim().parse().map_err(|_| Error::Parse {
            line: 0,
            msg: format!("bad reward `{text}`"),
        })?;
        if !v.is_finite() {
            return Err(Error::Parse {
                line: 0,
                msg: format!("non-finite reward `{text}`"),
            });
        }
        Ok(Reward(v))
    }
}

impl PartialEq for Reward {
    fn eq(&self, other: &Self) -> bool {
        self.0.to_bits() == other.0.to_bits()
    }
}

impl Eq for Reward {}

impl Hash for Reward {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.to_bits().hash(state);
    }
}

impl PartialOrd for Reward {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Reward {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl fmt::Display for Reward {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<f64> for Reward {
    fn from(v: f64) -> Self {
        Reward(v)
    }
}
