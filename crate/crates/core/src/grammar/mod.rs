//! Artificial grammars over a six-letter alphabet.
//!
//! Each [`GrammarInstance`] is a sampled grammar at one level of the
//! sub-regular / Chomsky hierarchy. Strings are sampled by templated
//! generators and every label is confirmed by [`oracle_accepts`] before it is
//! handed out.

mod corpus;
mod instance;
mod oracle;
mod sample;
mod table;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub use corpus::{build_corpus, read_corpus_csv, write_corpus_csv, CORPUS_HEADER};
pub use instance::{generate_instance, generate_instance_with, Constraint, GrammarInstance, InstanceOptions};
pub use oracle::{minimal_period, oracle_accepts};
pub use sample::{sample_string, MAX_ATTEMPTS};
pub use table::{build_transition_table, TransitionTable};

pub const ALPHABET_SIZE: usize = 6;
pub const STRING_LEN: usize = 12;

/// The fixed, ordered terminal alphabet. Letter order defines one-hot indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Alphabet {
    letters: [char; ALPHABET_SIZE],
}

impl Default for Alphabet {
    fn default() -> Self {
        Alphabet {
            letters: ['a', 'b', 'c', 'd', 'e', 'f'],
        }
    }
}

impl Alphabet {
    pub fn letters(&self) -> &[char; ALPHABET_SIZE] {
        &self.letters
    }

    pub fn index_of(&self, c: char) -> Option<u8> {
        self.letters.iter().position(|&l| l == c).map(|i| i as u8)
    }

    pub fn letter(&self, index: u8) -> char {
        self.letters[index as usize]
    }

    /// Converts text to letter indices, rejecting foreign characters.
    pub fn parse(&self, text: &str) -> Result<Vec<u8>> {
        text.chars()
            .map(|c| {
                self.index_of(c)
                    .ok_or_else(|| Error::input(format!("character {c:?} is not in the alphabet")))
            })
            .collect()
    }

    pub fn render(&self, indices: &[u8]) -> String {
        indices.iter().map(|&i| self.letter(i)).collect()
    }
}

/// Levels of the grammar hierarchy, in ascending order of complexity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Level {
    /// Strictly k-local.
    Sl,
    /// Locally k-testable.
    Lt,
    /// Locally threshold k-testable.
    Ltt,
    /// Locally threshold k-testable with order.
    Ltto,
    /// Monadic second order (mod-n counting of repetitions).
    Mso,
    /// Context free.
    Cf,
    /// Context sensitive.
    Cs,
}

impl Level {
    pub const ALL: [Level; 7] = [
        Level::Sl,
        Level::Lt,
        Level::Ltt,
        Level::Ltto,
        Level::Mso,
        Level::Cf,
        Level::Cs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Level::Sl => "SL",
            Level::Lt => "LT",
            Level::Ltt => "LTT",
            Level::Ltto => "LTTO",
            Level::Mso => "MSO",
            Level::Cf => "CF",
            Level::Cs => "CS",
        }
    }

    /// Window sizes this level accepts. CF and CS take no window and use 0.
    pub fn valid_k(self) -> &'static [usize] {
        match self {
            Level::Sl => &[1, 2, 3],
            Level::Lt | Level::Ltt | Level::Ltto | Level::Mso => &[2, 3],
            Level::Cf | Level::Cs => &[0],
        }
    }

    /// Normalizes `k`: CF/CS ignore it (stored as 0), other levels validate it.
    pub fn normalize_k(self, k: usize) -> Result<usize> {
        match self {
            Level::Cf | Level::Cs => Ok(0),
            _ if self.valid_k().contains(&k) => Ok(k),
            _ => Err(Error::param(format!(
                "k={k} is not valid for {self} (allowed: {:?})",
                self.valid_k()
            ))),
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Level::ALL
            .iter()
            .copied()
            .find(|l| l.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::param(format!("unknown grammar level {s:?}")))
    }
}

/// Context-free template family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CfVariant {
    /// Grammatical strings repeat their first half; ungrammatical ones mirror it.
    Repeated,
    /// Grammatical strings mirror their first half; ungrammatical ones repeat it.
    Mirrored,
    /// Position i+6 is a legal successor of position i.
    AnBn,
}

impl CfVariant {
    pub const ALL: [CfVariant; 3] = [CfVariant::Repeated, CfVariant::Mirrored, CfVariant::AnBn];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Grammatical,
    Ungrammatical,
}

impl Label {
    pub fn name(self) -> &'static str {
        match self {
            Label::Grammatical => "grammatical",
            Label::Ungrammatical => "ungrammatical",
        }
    }

    /// Network target: 1 means ungrammatical.
    pub fn target(self) -> f64 {
        match self {
            Label::Grammatical => 0.0,
            Label::Ungrammatical => 1.0,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "grammatical" => Ok(Label::Grammatical),
            "ungrammatical" => Ok(Label::Ungrammatical),
            other => Err(Error::param(format!("unknown label {other:?}"))),
        }
    }
}

/// A 12-letter string together with its oracle-confirmed label.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabeledString {
    pub text: String,
    pub label: Label,
}

/// Identifies the grammar a corpus or training run was built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GrammarDescriptor {
    pub level: Level,
    pub k: usize,
    pub instance_seed: u64,
}
