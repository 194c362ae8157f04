use rand::seq::SliceRandom;
use rand::Rng;

use super::oracle::accepts;
use super::table::TransitionTable;
use super::{Alphabet, CfVariant, GrammarInstance, Label, LabeledString, Level, ALPHABET_SIZE, STRING_LEN};
use crate::error::{Error, Result};

/// Rejection-sampling budget per string.
pub const MAX_ATTEMPTS: usize = 10_000;

/// Draws one string whose oracle verdict matches `label`.
pub fn sample_string<R: Rng + ?Sized>(
    instance: &GrammarInstance,
    label: Label,
    rng: &mut R,
) -> Result<LabeledString> {
    let want = label == Label::Grammatical;
    for _ in 0..MAX_ATTEMPTS {
        let Some(mut candidate) = propose(instance, label, rng) else {
            continue;
        };
        candidate.truncate(STRING_LEN);
        if candidate.len() == STRING_LEN && accepts(instance, &candidate) == want {
            return Ok(LabeledString {
                text: Alphabet::default().render(&candidate),
                label,
            });
        }
    }
    Err(Error::Generation {
        instance: instance.to_string(),
        reason: format!("no {label} string within {MAX_ATTEMPTS} attempts"),
    })
}

fn random_letter<R: Rng + ?Sized>(rng: &mut R) -> u8 {
    rng.gen_range(0..ALPHABET_SIZE as u8)
}

fn pick<R: Rng + ?Sized>(options: &[u8], rng: &mut R) -> Option<u8> {
    options.choose(rng).copied()
}

/// Random walk of `len` letters: the first `width` letters are uniform, every
/// later letter is a uniform successor (or non-successor, with `complement`)
/// of the preceding context.
fn walk<R: Rng + ?Sized>(table: &TransitionTable, len: usize, complement: bool, rng: &mut R) -> Option<Vec<u8>> {
    let width = table.context_width();
    let mut s = Vec::with_capacity(len);
    for i in 0..len {
        let next = if i < width {
            random_letter(rng)
        } else {
            pick(&table.successors(&s[i - width..i], complement), rng)?
        };
        s.push(next);
    }
    Some(s)
}

/// Legal walk with the given k-grams written at fixed start positions, drawn
/// uniformly among all legal walks that contain them. Returns `None` when no
/// such walk exists.
fn planted_walk<R: Rng + ?Sized>(table: &TransitionTable, plants: &[(usize, &[u8])], rng: &mut R) -> Option<Vec<u8>> {
    let width = table.context_width();
    let mut forced = [None; STRING_LEN];
    for &(start, gram) in plants {
        for (offset, &c) in gram.iter().enumerate() {
            forced[start + offset] = Some(c);
        }
    }
    let letters_at = |i: usize| -> Vec<u8> {
        match forced[i] {
            Some(c) => vec![c],
            None => (0..ALPHABET_SIZE as u8).collect(),
        }
    };
    // Contexts are the last `width` letters, encoded base 6.
    let states = ALPHABET_SIZE.pow(width as u32);
    let decode = |state: usize| -> Vec<u8> {
        (0..width).rev().map(|j| ((state / ALPHABET_SIZE.pow(j as u32)) % ALPHABET_SIZE) as u8).collect()
    };
    let shift = |state: usize, c: u8| (state * ALPHABET_SIZE + c as usize) % states;

    // completions[i][state]: legal ways to fill positions i.. after `state`.
    let mut completions = vec![vec![0u64; states]; STRING_LEN + 1];
    completions[STRING_LEN].fill(1);
    for i in (width..STRING_LEN).rev() {
        let options = letters_at(i);
        for state in 0..states {
            let context = decode(state);
            completions[i][state] = options
                .iter()
                .filter(|&&c| table.allows(&context, c))
                .map(|&c| completions[i + 1][shift(state, c)])
                .sum();
        }
    }

    let prefix_ok = |state: usize| {
        decode(state).iter().enumerate().all(|(i, c)| forced[i].is_none_or(|f| f == *c))
    };
    let weights: Vec<u64> = (0..states)
        .map(|state| if prefix_ok(state) { completions[width][state] } else { 0 })
        .collect();
    let mut state = draw_weighted(&weights, rng)?;
    let mut s = decode(state);
    for i in width..STRING_LEN {
        let context = decode(state);
        let options: Vec<u8> = letters_at(i).into_iter().filter(|&c| table.allows(&context, c)).collect();
        let weights: Vec<u64> = options.iter().map(|&c| completions[i + 1][shift(state, c)]).collect();
        let c = options[draw_weighted(&weights, rng)?];
        s.push(c);
        state = shift(state, c);
    }
    Some(s)
}

/// Index drawn with probability proportional to `weights`; `None` if all are zero.
fn draw_weighted<R: Rng + ?Sized>(weights: &[u64], rng: &mut R) -> Option<usize> {
    let total: u64 = weights.iter().sum();
    if total == 0 {
        return None;
    }
    let mut target = rng.gen_range(0..total);
    for (i, &w) in weights.iter().enumerate() {
        if target < w {
            return Some(i);
        }
        target -= w;
    }
    None
}

/// Random non-overlapping start positions for `count` grams of length `k`,
/// in ascending order.
fn disjoint_starts<R: Rng + ?Sized>(count: usize, k: usize, rng: &mut R) -> Option<Vec<usize>> {
    let mut starts: Vec<usize> = (0..count).map(|_| rng.gen_range(0..=STRING_LEN - k)).collect();
    starts.sort_unstable();
    starts.windows(2).all(|w| w[1] >= w[0] + k).then_some(starts)
}

fn propose<R: Rng + ?Sized>(g: &GrammarInstance, label: Label, rng: &mut R) -> Option<Vec<u8>> {
    let grammatical = label == Label::Grammatical;
    match g.level {
        Level::Sl => match &g.letter_subset {
            Some(subset) => {
                let pool: Vec<u8> = if grammatical {
                    subset.clone()
                } else {
                    (0..ALPHABET_SIZE as u8).filter(|c| !subset.contains(c)).collect()
                };
                (0..STRING_LEN).map(|_| pick(&pool, rng)).collect()
            }
            None => walk(&g.tables[0], STRING_LEN, !grammatical, rng),
        },
        Level::Lt | Level::Ltt | Level::Ltto => propose_testable(g, grammatical, rng),
        Level::Mso => propose_periodic(g, grammatical, rng),
        Level::Cf => propose_context_free(g, grammatical, rng),
        Level::Cs => {
            let third = STRING_LEN / 3;
            let mut s = vec![0u8; STRING_LEN];
            for i in 0..third {
                s[i] = random_letter(rng);
                s[i + third] = pick(&g.tables[0].successors(&s[i..=i], !grammatical), rng)?;
                s[i + 2 * third] = pick(&g.tables[1].successors(&s[i + third..=i + third], !grammatical), rng)?;
            }
            Some(s)
        }
    }
}

/// LT / LTT / LTTO. Grammatical strings plant each constraint once (in list
/// order when ordered). Ungrammatical strings follow legal transitions but
/// break the property that defines the level: a missing k-gram (LT), a
/// repeated one (LTT) or the reverse order (LTTO).
fn propose_testable<R: Rng + ?Sized>(g: &GrammarInstance, grammatical: bool, rng: &mut R) -> Option<Vec<u8>> {
    let table = &g.tables[0];
    let grams: Vec<&[u8]> = g.constraints.iter().map(|c| c.gram.as_slice()).collect();
    let mut order: Vec<&[u8]> = match (g.level, grammatical) {
        (Level::Lt, false) => return walk(table, STRING_LEN, false, rng),
        (Level::Ltt, false) => {
            let mut planted = grams.clone();
            planted.push(grams[rng.gen_range(0..grams.len())]);
            planted.shuffle(rng);
            planted
        }
        (Level::Ltto, true) => grams.clone(),
        (Level::Ltto, false) => grams.iter().rev().copied().collect(),
        _ => {
            let mut planted = grams.clone();
            planted.shuffle(rng);
            planted
        }
    };
    let starts = disjoint_starts(order.len(), g.k, rng)?;
    let plants: Vec<(usize, &[u8])> = starts.into_iter().zip(order.drain(..)).collect();
    planted_walk(table, &plants, rng)
}

/// MSO: a unit of length p repeated 12/p times. Grammatical periods are those
/// whose repetition count is divisible by the modulus.
fn propose_periodic<R: Rng + ?Sized>(g: &GrammarInstance, grammatical: bool, rng: &mut R) -> Option<Vec<u8>> {
    let n = g.modulus?;
    let periods: Vec<usize> = [2, 3, 4, 6]
        .into_iter()
        .filter(|p| ((STRING_LEN / p) % n == 0) == grammatical)
        .collect();
    let p = *periods.choose(rng)?;
    let unit = walk(&g.tables[0], p, false, rng)?;
    Some(unit.iter().cycle().take(STRING_LEN).copied().collect())
}

fn propose_context_free<R: Rng + ?Sized>(g: &GrammarInstance, grammatical: bool, rng: &mut R) -> Option<Vec<u8>> {
    let table = &g.tables[0];
    let half = STRING_LEN / 2;
    let variant = g.cf_variant?;
    if variant == CfVariant::AnBn {
        let mut s = vec![0u8; STRING_LEN];
        for i in 0..half {
            s[i] = random_letter(rng);
            s[i + half] = pick(&table.successors(&s[i..=i], !grammatical), rng)?;
        }
        return Some(s);
    }
    let first = walk(table, half, false, rng)?;
    // A palindromic half would make the two templates coincide.
    if first.iter().eq(first.iter().rev()) {
        return None;
    }
    let repeat = (variant == CfVariant::Repeated) == grammatical;
    let mut s = first.clone();
    if repeat {
        s.extend_from_slice(&first);
    } else {
        s.extend(first.iter().rev());
    }
    Some(s)
}
