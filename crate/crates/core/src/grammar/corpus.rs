use std::io::{BufRead, Write};

use rand::Rng;

use super::sample::sample_string;
use super::{GrammarDescriptor, GrammarInstance, Label, LabeledString, Level};
use crate::error::{Error, Result};

pub const CORPUS_HEADER: &str = "text,label,level,k,instance_seed";

/// `per_class` grammatical strings followed by `per_class` ungrammatical ones,
/// each in generation order.
pub fn build_corpus<R: Rng + ?Sized>(
    instance: &GrammarInstance,
    per_class: usize,
    rng: &mut R,
) -> Result<Vec<LabeledString>> {
    if per_class == 0 {
        return Err(Error::param("per_class must be at least 1"));
    }
    let mut corpus = Vec::with_capacity(2 * per_class);
    for label in [Label::Grammatical, Label::Ungrammatical] {
        for _ in 0..per_class {
            corpus.push(sample_string(instance, label, rng)?);
        }
    }
    Ok(corpus)
}

pub fn write_corpus_csv<W: Write>(
    mut out: W,
    grammar: GrammarDescriptor,
    corpus: &[LabeledString],
) -> Result<()> {
    writeln!(out, "{CORPUS_HEADER}")?;
    for s in corpus {
        writeln!(
            out,
            "{},{},{},{},{}",
            s.text, s.label, grammar.level, grammar.k, grammar.instance_seed
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a corpus file written by [`write_corpus_csv`]. The descriptor is
/// taken from the first row; `None` for an empty corpus.
pub fn read_corpus_csv<R: BufRead>(input: R) -> Result<(Option<GrammarDescriptor>, Vec<LabeledString>)> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    if reader.headers()?.iter().ne(CORPUS_HEADER.split(',')) {
        return Err(Error::Parse { line: 1, message: format!("expected header {CORPUS_HEADER:?}") });
    }
    let mut grammar = None;
    let mut corpus = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let parse_err = |e: Error| Error::Parse { line, message: e.to_string() };
        let number = |s: &str| -> Result<u64> {
            s.parse().map_err(|_| Error::Parse { line, message: format!("bad integer {s:?}") })
        };
        let descriptor = GrammarDescriptor {
            level: record[2].parse::<Level>().map_err(parse_err)?,
            k: number(&record[3])? as usize,
            instance_seed: number(&record[4])?,
        };
        grammar.get_or_insert(descriptor);
        corpus.push(LabeledString {
            text: record[0].to_string(),
            label: record[1].parse().map_err(parse_err)?,
        });
    }
    Ok((grammar, corpus))
}
