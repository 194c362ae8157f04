use super::{Alphabet, CfVariant, GrammarInstance, Level, STRING_LEN};
use crate::error::{Error, Result};

/// Decides membership of `text` in the language of `instance`.
pub fn oracle_accepts(instance: &GrammarInstance, text: &str) -> Result<bool> {
    let letters = Alphabet::default().parse(text)?;
    if letters.len() != STRING_LEN {
        return Err(Error::input(format!(
            "expected {STRING_LEN} characters, got {}",
            letters.len()
        )));
    }
    Ok(accepts(instance, &letters))
}

pub(crate) fn accepts(g: &GrammarInstance, s: &[u8]) -> bool {
    match g.level {
        Level::Sl => match &g.letter_subset {
            Some(subset) => s.iter().all(|c| subset.contains(c)),
            None => g.tables[0].accepts_walk(s),
        },
        Level::Lt | Level::Ltt | Level::Ltto => {
            g.tables[0].accepts_walk(s) && constraints_hold(g, s)
        }
        Level::Mso => {
            let n = g.modulus.expect("MSO instance without modulus");
            let p = minimal_period(s);
            g.tables[0].accepts_walk(s) && p < s.len() && (s.len() / p) % n == 0
        }
        Level::Cf => {
            let half = s.len() / 2;
            let (first, second) = s.split_at(half);
            let table = &g.tables[0];
            match g.cf_variant.expect("CF instance without variant") {
                CfVariant::AnBn => (0..half).all(|i| table.allows(&s[i..=i], s[i + half])),
                variant => {
                    let reversed: Vec<u8> = first.iter().rev().copied().collect();
                    // A palindromic half makes the two templates coincide.
                    if reversed == first || !table.accepts_walk(first) {
                        return false;
                    }
                    match variant {
                        CfVariant::Repeated => second == first,
                        _ => second == reversed.as_slice(),
                    }
                }
            }
        }
        Level::Cs => {
            let third = s.len() / 3;
            (0..third).all(|i| {
                g.tables[0].allows(&s[i..=i], s[i + third])
                    && g.tables[1].allows(&s[i + third..=i + third], s[i + 2 * third])
            })
        }
    }
}

/// Number of overlapping occurrences of `gram` in `s`.
pub(crate) fn count_occurrences(s: &[u8], gram: &[u8]) -> usize {
    s.windows(gram.len()).filter(|w| *w == gram).count()
}

fn first_occurrence(s: &[u8], gram: &[u8]) -> Option<usize> {
    s.windows(gram.len()).position(|w| w == gram)
}

fn constraints_hold(g: &GrammarInstance, s: &[u8]) -> bool {
    if !g
        .constraints
        .iter()
        .all(|c| c.admits(count_occurrences(s, &c.gram)))
    {
        return false;
    }
    if !g.ordered {
        return true;
    }
    let starts: Vec<Option<usize>> = g
        .constraints
        .iter()
        .map(|c| first_occurrence(s, &c.gram))
        .collect();
    starts.windows(2).all(|w| match (w[0], w[1]) {
        (Some(a), Some(b)) => a < b,
        _ => false,
    })
}

/// Smallest `p` dividing `s.len()` such that `s` is `s[..p]` repeated.
///
/// Uses the prefix function: the shortest period of `s` is
/// `len - pi[len - 1]`, and it tiles `s` exactly only when it divides `len`.
pub fn minimal_period(s: &[u8]) -> usize {
    let n = s.len();
    if n == 0 {
        return 0;
    }
    let mut pi = vec![0usize; n];
    for i in 1..n {
        let mut j = pi[i - 1];
        while j > 0 && s[i] != s[j] {
            j = pi[j - 1];
        }
        if s[i] == s[j] {
            j += 1;
        }
        pi[i] = j;
    }
    let p = n - pi[n - 1];
    if n % p == 0 {
        p
    } else {
        n
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::{generate_instance, Constraint, GrammarInstance, TransitionTable};

    fn parse(s: &str) -> Vec<u8> {
        Alphabet::default().parse(s).unwrap()
    }

    fn sl1(subset: &[u8]) -> GrammarInstance {
        let mut g = generate_instance(Level::Sl, 1, 0).unwrap();
        g.letter_subset = Some(subset.to_vec());
        g
    }

    #[test]
    fn sl1_subset_membership() {
        let g = sl1(&[0, 1, 2]);
        assert!(oracle_accepts(&g, "aabbccaabbcc").unwrap());
        assert!(!oracle_accepts(&g, "aabbccaabbcd").unwrap());
    }

    #[test]
    fn foreign_characters_and_wrong_length_error() {
        let g = sl1(&[0, 1, 2]);
        assert!(matches!(oracle_accepts(&g, "aabbccaabbcx"), Err(Error::Input(_))));
        assert!(matches!(oracle_accepts(&g, "aabb"), Err(Error::Input(_))));
    }

    #[test]
    fn ltto_order_violation_is_rejected() {
        let mut g = generate_instance(Level::Ltto, 2, 0).unwrap();
        g.tables = vec![TransitionTable::from_rows(1, vec![[true; 6]; 6]).unwrap()];
        g.constraints = vec![
            Constraint { gram: parse("ab"), min_count: 1, max_count: Some(1) },
            Constraint { gram: parse("cd"), min_count: 1, max_count: Some(1) },
        ];
        let wrong = parse("cdefefefefab");
        // Positional scan: every "ab" starts after every "cd".
        let starts = |gram: &[u8]| -> Vec<usize> {
            (0..wrong.len() - 1).filter(|&i| wrong[i..i + 2] == *gram).collect()
        };
        let (ab, cd) = (starts(&[0, 1]), starts(&[2, 3]));
        assert!(!ab.is_empty() && !cd.is_empty());
        assert!(ab.iter().all(|a| cd.iter().all(|c| a > c)));
        assert!(!accepts(&g, &wrong));

        assert!(accepts(&g, &parse("abefefefefcd")));
        // Present twice violates the once-only bound even in order.
        assert!(!accepts(&g, &parse("abefabefefcd")));
    }

    #[test]
    fn occurrence_counting_overlaps() {
        assert_eq!(count_occurrences(&parse("aaaa"), &parse("aa")), 3);
        assert_eq!(count_occurrences(&parse("abab"), &parse("ab")), 2);
        assert_eq!(count_occurrences(&parse("abab"), &parse("ba")), 1);
    }

    #[test]
    fn minimal_period_examples() {
        assert_eq!(minimal_period(&parse("abababababab")), 2);
        assert_eq!(minimal_period(&parse("abcabcabcabc")), 3);
        assert_eq!(minimal_period(&parse("abcdabcdabcd")), 4);
        assert_eq!(minimal_period(&parse("abcdefabcdef")), 6);
        assert_eq!(minimal_period(&parse("aaaaaaaaaaaa")), 1);
        assert_eq!(minimal_period(&parse("abcdefabcdea")), 12);
        // Border of length 5 but 7 does not divide 12.
        assert_eq!(minimal_period(&parse("abcdeabcdeab")), 12);
    }
}
