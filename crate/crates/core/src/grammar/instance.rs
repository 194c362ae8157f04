use std::fmt;

use rand::seq::index::sample;
use rand::Rng;

use super::sample::sample_string;
use super::table::{build_transition_table, TransitionTable};
use super::{CfVariant, GrammarDescriptor, Label, Level, ALPHABET_SIZE};
use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_from_seed, Rng as SeedRng};

/// How many consecutive seeds are tried before giving up on a level/k pair.
const MAX_INSTANCE_RESAMPLES: u64 = 64;

/// A k-gram that must occur in grammatical strings, with occurrence bounds.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub gram: Vec<u8>,
    pub min_count: usize,
    pub max_count: Option<usize>,
}

impl Constraint {
    pub fn admits(&self, count: usize) -> bool {
        count >= self.min_count && self.max_count.is_none_or(|m| count <= m)
    }
}

/// One sampled grammar.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GrammarInstance {
    pub level: Level,
    /// Window size; 0 for CF and CS.
    pub k: usize,
    /// Repetition-count modulus (MSO only).
    pub modulus: Option<usize>,
    /// Transition tables. CS carries two chained tables (first→second
    /// segment, second→third segment).
    pub tables: Vec<TransitionTable>,
    /// Permitted letters (SL with k = 1 only), sorted.
    pub letter_subset: Option<Vec<u8>>,
    pub constraints: Vec<Constraint>,
    /// When set, constraint occurrences must appear in list order.
    pub ordered: bool,
    pub cf_variant: Option<CfVariant>,
    /// Seed the instance was actually built from (after any resampling).
    pub seed: u64,
}

impl GrammarInstance {
    pub fn descriptor(&self) -> GrammarDescriptor {
        GrammarDescriptor {
            level: self.level,
            k: self.k,
            instance_seed: self.seed,
        }
    }

    pub fn table(&self) -> Option<&TransitionTable> {
        self.tables.first()
    }
}

impl fmt::Display for GrammarInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} k={} seed={}", self.level, self.k, self.seed)?;
        if let Some(n) = self.modulus {
            write!(f, " mod={n}")?;
        }
        if let Some(v) = self.cf_variant {
            write!(f, " variant={v:?}")?;
        }
        Ok(())
    }
}

/// Optional overrides for the randomly chosen parts of an instance.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct InstanceOptions {
    /// MSO modulus (2 or 3); sampled uniformly when absent.
    pub modulus: Option<usize>,
    /// CF template family; sampled uniformly when absent.
    pub cf_variant: Option<CfVariant>,
}

/// Samples a grammar for `level` with window `k`. If the instance drawn from
/// `seed` cannot produce strings of both labels, `seed + 1`, `seed + 2`, ...
/// are tried in turn.
pub fn generate_instance(level: Level, k: usize, seed: u64) -> Result<GrammarInstance> {
    generate_instance_with(level, k, seed, InstanceOptions::default())
}

pub fn generate_instance_with(
    level: Level,
    k: usize,
    seed: u64,
    options: InstanceOptions,
) -> Result<GrammarInstance> {
    let k = level.normalize_k(k)?;
    if let Some(n) = options.modulus {
        if n != 2 && n != 3 {
            return Err(Error::param(format!("MSO modulus {n} not in {{2, 3}}")));
        }
    }
    let mut last_reason = String::new();
    for offset in 0..MAX_INSTANCE_RESAMPLES {
        let s = seed.wrapping_add(offset);
        let instance = draw_instance(level, k, s, options, &mut rng_from_seed(s))?;
        match check_feasible(&instance) {
            Ok(()) => return Ok(instance),
            Err(e) => last_reason = e.to_string(),
        }
    }
    Err(Error::Generation {
        instance: format!("{level} k={k} seed={seed}"),
        reason: format!("no feasible instance in {MAX_INSTANCE_RESAMPLES} seeds; last: {last_reason}"),
    })
}

fn check_feasible(instance: &GrammarInstance) -> Result<()> {
    let mut rng = rng_from_seed(derive_seed(instance.seed, "feasibility"));
    sample_string(instance, Label::Grammatical, &mut rng)?;
    sample_string(instance, Label::Ungrammatical, &mut rng)?;
    Ok(())
}

fn draw_instance(
    level: Level,
    k: usize,
    seed: u64,
    options: InstanceOptions,
    rng: &mut SeedRng,
) -> Result<GrammarInstance> {
    let mut instance = GrammarInstance {
        level,
        k,
        modulus: None,
        tables: Vec::new(),
        letter_subset: None,
        constraints: Vec::new(),
        ordered: false,
        cf_variant: None,
        seed,
    };
    match level {
        Level::Sl if k == 1 => {
            let mut subset: Vec<u8> = sample(rng, ALPHABET_SIZE, ALPHABET_SIZE / 2)
                .into_iter()
                .map(|i| i as u8)
                .collect();
            subset.sort_unstable();
            instance.letter_subset = Some(subset);
        }
        Level::Sl => instance.tables.push(build_transition_table(k - 1, 3, rng)?),
        Level::Lt | Level::Ltt | Level::Ltto => {
            let degree = if level == Level::Ltto { 5 } else { 3 };
            let table = build_transition_table(k - 1, degree, rng)?;
            let max_count = if level == Level::Lt { None } else { Some(1) };
            instance.constraints = sample_constraints(&table, 2, max_count, rng);
            instance.ordered = level == Level::Ltto;
            instance.tables.push(table);
        }
        Level::Mso => {
            instance.tables.push(build_transition_table(k - 1, 5, rng)?);
            let drawn = if rng.gen_bool(0.5) { 2 } else { 3 };
            instance.modulus = Some(options.modulus.unwrap_or(drawn));
        }
        Level::Cf => {
            instance.tables.push(build_transition_table(1, 3, rng)?);
            let drawn = CfVariant::ALL[rng.gen_range(0..CfVariant::ALL.len())];
            instance.cf_variant = Some(options.cf_variant.unwrap_or(drawn));
        }
        Level::Cs => {
            instance.tables.push(build_transition_table(1, 3, rng)?);
            instance.tables.push(build_transition_table(1, 3, rng)?);
        }
    }
    Ok(instance)
}

/// Draws `count` distinct legal k-grams in random order.
fn sample_constraints<R: Rng + ?Sized>(
    table: &TransitionTable,
    count: usize,
    max_count: Option<usize>,
    rng: &mut R,
) -> Vec<Constraint> {
    let grams = table.legal_kgrams();
    sample(rng, grams.len(), count)
        .into_iter()
        .map(|i| Constraint {
            gram: grams[i].clone(),
            min_count: 1,
            max_count,
        })
        .collect()
}
