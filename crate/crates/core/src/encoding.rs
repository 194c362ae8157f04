//! One-hot encodings and train/test splits.

use std::io::Write;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::grammar::{Alphabet, LabeledString, ALPHABET_SIZE, STRING_LEN};
use crate::seed::rng_from_seed;

/// Network input for one string.
#[derive(Debug, Clone, PartialEq)]
pub enum Features {
    /// Whole-string one-hot vector of length 72.
    Flat(Vec<f64>),
    /// Sliding-window steps, each the one-hot of `w` consecutive letters.
    Sequence(Vec<Vec<f64>>),
}

impl Features {
    /// Step vectors as slices; the flat form is a single step.
    pub fn steps(&self) -> Vec<&[f64]> {
        match self {
            Features::Flat(v) => vec![v.as_slice()],
            Features::Sequence(steps) => steps.iter().map(Vec::as_slice).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodedExample {
    pub features: Features,
    /// 1.0 for ungrammatical, 0.0 for grammatical.
    pub target: f64,
}

/// Which encoding a network consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Encoding {
    Full,
    Windows(usize),
}

fn letters(text: &str) -> Result<Vec<u8>> {
    let letters = Alphabet::default().parse(text)?;
    if letters.len() != STRING_LEN {
        return Err(Error::input(format!(
            "expected {STRING_LEN} characters, got {} in {text:?}",
            letters.len()
        )));
    }
    Ok(letters)
}

fn one_hot(letters: &[u8]) -> Vec<f64> {
    let mut v = vec![0.0; letters.len() * ALPHABET_SIZE];
    for (i, &c) in letters.iter().enumerate() {
        v[i * ALPHABET_SIZE + c as usize] = 1.0;
    }
    v
}

/// Concatenated one-hot of all 12 letters; index `6 * i + letter_i` is set.
pub fn encode_full(text: &str) -> Result<Vec<f64>> {
    Ok(one_hot(&letters(text)?))
}

/// `12 - w + 1` steps; step `j` encodes letters `j..j + w`.
pub fn encode_windows(text: &str, w: usize) -> Result<Vec<Vec<f64>>> {
    if !(1..=STRING_LEN).contains(&w) {
        return Err(Error::param(format!("window {w} not in 1..={STRING_LEN}")));
    }
    let letters = letters(text)?;
    Ok(letters.windows(w).map(one_hot).collect())
}

pub fn encode(s: &LabeledString, encoding: Encoding) -> Result<EncodedExample> {
    let features = match encoding {
        Encoding::Full => Features::Flat(encode_full(&s.text)?),
        Encoding::Windows(w) => Features::Sequence(encode_windows(&s.text, w)?),
    };
    Ok(EncodedExample {
        features,
        target: s.label.target(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitCorpus {
    pub train: Vec<EncodedExample>,
    pub test: Vec<EncodedExample>,
    /// Corpus indices on each side, in split order.
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub split_seed: u64,
    pub train_fraction: f64,
}

/// Per-class example counts `(grammatical, ungrammatical)`.
pub fn class_counts(examples: &[EncodedExample]) -> (usize, usize) {
    let ungrammatical = examples.iter().filter(|e| e.target == 1.0).count();
    (examples.len() - ungrammatical, ungrammatical)
}

/// Uniform random partition; the train side gets `round(fraction * n)`
/// strings, kept within `1..n` so neither side is empty when `n >= 2`.
pub fn split(
    corpus: &[LabeledString],
    train_fraction: f64,
    encoding: Encoding,
    split_seed: u64,
) -> Result<SplitCorpus> {
    if corpus.is_empty() {
        return Err(Error::input("cannot split an empty corpus"));
    }
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::param(format!("train fraction {train_fraction} not in (0, 1)")));
    }
    let n = corpus.len();
    let mut n_train = (train_fraction * n as f64).round() as usize;
    if n >= 2 {
        n_train = n_train.clamp(1, n - 1);
    } else {
        n_train = n;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_from_seed(split_seed));
    let (train_idx, test_idx) = order.split_at(n_train);
    let encode_all = |idx: &[usize]| -> Result<Vec<EncodedExample>> {
        idx.iter().map(|&i| encode(&corpus[i], encoding)).collect()
    };
    Ok(SplitCorpus {
        train: encode_all(train_idx)?,
        test: encode_all(test_idx)?,
        train_indices: train_idx.to_vec(),
        test_indices: test_idx.to_vec(),
        split_seed,
        train_fraction,
    })
}

impl SplitCorpus {
    /// Writes the split for auditing:
    ///
    /// ```text
    /// split_seed=<seed> train_fraction=<f>
    /// train <g> <u>: i i i ...
    /// test <g> <u>: i i i ...
    /// ```
    /// where `<g> <u>` are grammatical / ungrammatical counts.
    pub fn write_manifest<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "split_seed={} train_fraction={}", self.split_seed, self.train_fraction)?;
        for (name, examples, idx) in [
            ("train", &self.train, &self.train_indices),
            ("test", &self.test, &self.test_indices),
        ] {
            let (g, u) = class_counts(examples);
            let list: Vec<String> = idx.iter().map(usize::to_string).collect();
            writeln!(out, "{name} {g} {u}: {}", list.join(" "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::Label;

    fn ones(v: &[f64]) -> Vec<usize> {
        v.iter().enumerate().filter(|(_, &x)| x == 1.0).map(|(i, _)| i).collect()
    }

    #[test]
    fn full_encoding_positions() {
        let v = encode_full("aaaaaaaaaaaa").unwrap();
        assert_eq!(v.len(), 72);
        assert_eq!(ones(&v), (0..12).map(|i| i * 6).collect::<Vec<_>>());
        let v = encode_full("abcdefabcdef").unwrap();
        assert_eq!(ones(&v), vec![0, 7, 14, 21, 28, 35, 36, 43, 50, 57, 64, 71]);
        assert_eq!(v.iter().sum::<f64>(), 12.0);
    }

    #[test]
    fn window_step_counts() {
        let w1 = encode_windows("abcdefabcdef", 1).unwrap();
        assert_eq!((w1.len(), w1[0].len()), (12, 6));
        let w12 = encode_windows("abcdefabcdef", 12).unwrap();
        assert_eq!((w12.len(), w12[0].len()), (1, 72));
        let w5 = encode_windows("abcdefabcdef", 5).unwrap();
        assert_eq!((w5.len(), w5[0].len()), (8, 30));
        assert!(matches!(encode_windows("abcdefabcdef", 0), Err(Error::Parameter(_))));
        assert!(matches!(encode_windows("abcdefabcdef", 13), Err(Error::Parameter(_))));
    }

    #[test]
    fn foreign_characters_rejected() {
        assert!(matches!(encode_full("abcdefabcdeg"), Err(Error::Input(_))));
    }

    fn corpus(n: usize) -> Vec<LabeledString> {
        (0..n)
            .map(|i| LabeledString {
                text: "abcdefabcdef".into(),
                label: if i % 2 == 0 { Label::Grammatical } else { Label::Ungrammatical },
            })
            .collect()
    }

    #[test]
    fn split_sizes() {
        let c = corpus(1000);
        let s = split(&c, 0.8, Encoding::Full, 1).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (800, 200));
        let s = split(&c, 0.7, Encoding::Windows(3), 1).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (700, 300));
    }

    #[test]
    fn split_errors() {
        assert!(matches!(split(&[], 0.8, Encoding::Full, 0), Err(Error::Input(_))));
        assert!(matches!(split(&corpus(4), 1.0, Encoding::Full, 0), Err(Error::Parameter(_))));
    }

    #[test]
    fn manifest_lists_indices() {
        let s = split(&corpus(10), 0.8, Encoding::Full, 4).unwrap();
        let mut buf = Vec::new();
        s.write_manifest(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "split_seed=4 train_fraction=0.8");
        assert!(lines[1].starts_with("train "));
        assert_eq!(lines[1].split(": ").nth(1).unwrap().split(' ').count(), 8);
        assert_eq!(lines[2].split(": ").nth(1).unwrap().split(' ').count(), 2);
    }
}
