use rand::seq::index::sample;
use rand::Rng;

use super::ALPHABET_SIZE;
use crate::error::{Error, Result};

/// Adjacency matrix from a context (one letter or an ordered bigram) to the
/// letters that may follow it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TransitionTable {
    context_width: usize,
    out_degree: usize,
    rows: Vec<[bool; ALPHABET_SIZE]>,
}

/// Samples a table with exactly `out_degree` uniformly chosen successors per
/// context. Width 1 gives 6 rows; width 2 gives one row per ordered bigram (36).
pub fn build_transition_table<R: Rng + ?Sized>(
    context_width: usize,
    out_degree: usize,
    rng: &mut R,
) -> Result<TransitionTable> {
    if !(1..=2).contains(&context_width) {
        return Err(Error::param(format!("context width {context_width} not in {{1, 2}}")));
    }
    if out_degree != 3 && out_degree != 5 {
        return Err(Error::param(format!("out-degree {out_degree} not in {{3, 5}}")));
    }
    let n_rows = ALPHABET_SIZE.pow(context_width as u32);
    let rows = (0..n_rows)
        .map(|_| {
            let mut row = [false; ALPHABET_SIZE];
            for col in sample(rng, ALPHABET_SIZE, out_degree) {
                row[col] = true;
            }
            row
        })
        .collect();
    Ok(TransitionTable {
        context_width,
        out_degree,
        rows,
    })
}

impl TransitionTable {
    /// Builds a table from explicit rows; every row must have the same number
    /// of permitted letters.
    pub fn from_rows(context_width: usize, rows: Vec<[bool; ALPHABET_SIZE]>) -> Result<Self> {
        if !(1..=2).contains(&context_width) || rows.len() != ALPHABET_SIZE.pow(context_width as u32) {
            return Err(Error::param(format!(
                "{} rows do not fit context width {context_width}",
                rows.len()
            )));
        }
        let out_degree = rows[0].iter().filter(|&&b| b).count();
        if rows.iter().any(|r| r.iter().filter(|&&b| b).count() != out_degree) {
            return Err(Error::param("rows have unequal out-degree"));
        }
        Ok(TransitionTable {
            context_width,
            out_degree,
            rows,
        })
    }

    pub fn context_width(&self) -> usize {
        self.context_width
    }

    pub fn out_degree(&self) -> usize {
        self.out_degree
    }

    pub fn rows(&self) -> &[[bool; ALPHABET_SIZE]] {
        &self.rows
    }

    fn row_index(&self, context: &[u8]) -> usize {
        debug_assert_eq!(context.len(), self.context_width);
        context
            .iter()
            .fold(0usize, |acc, &c| acc * ALPHABET_SIZE + c as usize)
    }

    pub fn row(&self, context: &[u8]) -> &[bool; ALPHABET_SIZE] {
        &self.rows[self.row_index(context)]
    }

    pub fn allows(&self, context: &[u8], next: u8) -> bool {
        self.row(context)[next as usize]
    }

    /// Letters reachable from `context`; with `complement` the forbidden ones.
    pub fn successors(&self, context: &[u8], complement: bool) -> Vec<u8> {
        self.row(context)
            .iter()
            .enumerate()
            .filter(|(_, &ok)| ok != complement)
            .map(|(i, _)| i as u8)
            .collect()
    }

    /// True when every transition inside `letters` is permitted.
    pub fn accepts_walk(&self, letters: &[u8]) -> bool {
        letters
            .windows(self.context_width + 1)
            .all(|w| self.allows(&w[..self.context_width], w[self.context_width]))
    }

    /// All legal k-grams (context followed by a permitted letter), k = width + 1,
    /// in lexicographic order.
    pub fn legal_kgrams(&self) -> Vec<Vec<u8>> {
        let mut out = Vec::new();
        for (r, row) in self.rows.iter().enumerate() {
            let mut context = vec![0u8; self.context_width];
            let mut rest = r;
            for slot in context.iter_mut().rev() {
                *slot = (rest % ALPHABET_SIZE) as u8;
                rest /= ALPHABET_SIZE;
            }
            for (letter, &ok) in row.iter().enumerate() {
                if ok {
                    let mut gram = context.clone();
                    gram.push(letter as u8);
                    out.push(gram);
                }
            }
        }
        out
    }
}
