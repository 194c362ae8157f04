use std::fmt;

use crate::error::{Error, Result};
use crate::grammar::{GrammarDescriptor, Level, STRING_LEN};
use crate::nn::{Architecture, Candidate, NetworkConfig};
use crate::seed::derive_seed;
use crate::train::{SeedBundle, TrainOptions};

/// The experiment grid. Window values are ignored for FFN, which always
/// sees the whole string.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub architectures: Vec<Architecture>,
    pub neurons: Vec<usize>,
    pub depths: Vec<usize>,
    pub laminations: Vec<usize>,
    pub windows: Vec<usize>,
    /// `(level, k)` pairs; k is 0 for CF and CS.
    pub levels: Vec<(Level, usize)>,
    pub instance_seeds: Vec<u64>,
    pub replicate_seeds: Vec<u64>,
    pub per_class: usize,
    pub train_fraction: f64,
    pub candidate: Candidate,
    pub train: TrainOptions,
}

impl Default for SweepGrid {
    fn default() -> Self {
        SweepGrid {
            architectures: Architecture::ALL.to_vec(),
            neurons: vec![64],
            depths: vec![1],
            laminations: vec![1],
            windows: vec![STRING_LEN],
            levels: vec![(Level::Sl, 2)],
            instance_seeds: vec![1],
            replicate_seeds: vec![1],
            per_class: 500,
            train_fraction: 0.8,
            candidate: Candidate::Tanh,
            train: TrainOptions::default(),
        }
    }
}

/// One training job with its derived seeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct JobSpec {
    pub grammar: GrammarDescriptor,
    pub config: NetworkConfig,
    pub replicate_seed: u64,
    pub seeds: SeedBundle,
}

/// Uniquely identifies a job: the first ten results columns.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct JobKey(pub String);

impl fmt::Display for JobKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl JobSpec {
    pub fn key(&self) -> JobKey {
        let g = &self.grammar;
        let c = &self.config;
        JobKey(format!(
            "{},{},{},{},{},{},{},{},{},{}",
            g.level,
            g.k,
            g.instance_seed,
            c.architecture,
            c.neurons,
            c.depth,
            c.laminations,
            c.window,
            self.seeds.split_seed,
            self.seeds.init_seed
        ))
    }
}

/// Split seed: shared by every network trained on the same grammar instance
/// and replicate, so architectures see identical train/test partitions.
pub fn split_seed_for(grammar: &GrammarDescriptor, replicate: u64) -> u64 {
    derive_seed(replicate, &format!("split:{}:{}:{}", grammar.level, grammar.k, grammar.instance_seed))
}

/// Initialization seed: additionally keyed on the network shape.
pub fn init_seed_for(grammar: &GrammarDescriptor, config: &NetworkConfig, replicate: u64) -> u64 {
    derive_seed(
        replicate,
        &format!(
            "init:{}:{}:{}:{}:{}:{}:{}:{}",
            grammar.level,
            grammar.k,
            grammar.instance_seed,
            config.architecture,
            config.neurons,
            config.depth,
            config.laminations,
            config.window
        ),
    )
}

/// Seed for the corpus drawn from one grammar instance.
pub fn corpus_seed_for(grammar: &GrammarDescriptor) -> u64 {
    derive_seed(grammar.instance_seed, &format!("corpus:{}:{}", grammar.level, grammar.k))
}

fn non_empty<T>(name: &str, values: &[T]) -> Result<()> {
    if values.is_empty() {
        Err(Error::param(format!("sweep grid has no {name}")))
    } else {
        Ok(())
    }
}

impl SweepGrid {
    pub fn validate(&self) -> Result<()> {
        non_empty("architectures", &self.architectures)?;
        non_empty("neuron values", &self.neurons)?;
        non_empty("depth values", &self.depths)?;
        non_empty("lamination values", &self.laminations)?;
        non_empty("window values", &self.windows)?;
        non_empty("levels", &self.levels)?;
        non_empty("instance seeds", &self.instance_seeds)?;
        non_empty("replicate seeds", &self.replicate_seeds)?;
        if self.per_class == 0 {
            return Err(Error::param("per_class must be at least 1"));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::param(format!("train fraction {} not in (0, 1)", self.train_fraction)));
        }
        for &(level, k) in &self.levels {
            level.normalize_k(k)?;
        }
        Ok(())
    }
}

/// Cartesian product in the order levels, instance seeds, architectures,
/// neurons, depths, laminations, windows, replicates. Duplicate values and
/// the FFN window collapse are removed so no job appears twice.
pub fn enumerate_grid(grid: &SweepGrid) -> Result<Vec<JobSpec>> {
    grid.validate()?;
    let mut jobs = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for &(level, k) in &grid.levels {
        let k = level.normalize_k(k)?;
        for &instance_seed in &grid.instance_seeds {
            let grammar = GrammarDescriptor { level, k, instance_seed };
            for &arch in &grid.architectures {
                for &neurons in &grid.neurons {
                    for &depth in &grid.depths {
                        for &lam in &grid.laminations {
                            let windows: &[usize] =
                                if arch == Architecture::Ffn { &[STRING_LEN] } else { &grid.windows };
                            for &window in windows {
                                let config = NetworkConfig::new(arch, neurons, depth, lam, window)?
                                    .with_candidate(grid.candidate);
                                for &replicate in &grid.replicate_seeds {
                                    let job = JobSpec {
                                        grammar,
                                        config,
                                        replicate_seed: replicate,
                                        seeds: SeedBundle {
                                            split_seed: split_seed_for(&grammar, replicate),
                                            init_seed: init_seed_for(&grammar, &config, replicate),
                                        },
                                    };
                                    if seen.insert(job.key()) {
                                        jobs.push(job);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(jobs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SweepGrid {
        SweepGrid {
            architectures: vec![Architecture::Ffn],
            neurons: vec![32, 64],
            laminations: vec![1, 2],
            ..SweepGrid::default()
        }
    }

    #[test]
    fn ffn_product() {
        assert_eq!(enumerate_grid(&small()).unwrap().len(), 4);
    }

    #[test]
    fn window_product() {
        let grid = SweepGrid {
            architectures: vec![Architecture::Rnn],
            windows: (1..=12).collect(),
            ..SweepGrid::default()
        };
        let jobs = enumerate_grid(&grid).unwrap();
        assert_eq!(jobs.len(), 12);
        assert!(jobs.iter().enumerate().all(|(i, j)| j.config.window == i + 1));
    }

    #[test]
    fn ffn_windows_collapse() {
        let grid = SweepGrid { windows: vec![1, 5, 12], ..small() };
        let jobs = enumerate_grid(&grid).unwrap();
        assert_eq!(jobs.len(), 4);
        assert!(jobs.iter().all(|j| j.config.window == 12));
    }

    #[test]
    fn deterministic() {
        assert_eq!(enumerate_grid(&small()).unwrap(), enumerate_grid(&small()).unwrap());
    }

    #[test]
    fn empty_component() {
        let grid = SweepGrid { neurons: vec![], ..small() };
        assert!(matches!(enumerate_grid(&grid), Err(Error::Parameter(_))));
    }

    #[test]
    fn off_grid_value() {
        let grid = SweepGrid { neurons: vec![48], ..small() };
        assert!(matches!(enumerate_grid(&grid), Err(Error::Parameter(_))));
    }

    #[test]
    fn seeds_stable_under_grid_growth() {
        let base = enumerate_grid(&small()).unwrap();
        let grown = SweepGrid {
            neurons: vec![32, 64, 96],
            replicate_seeds: vec![1, 2],
            levels: vec![(Level::Sl, 2), (Level::Cs, 0)],
            ..small()
        };
        let grown = enumerate_grid(&grown).unwrap();
        for job in &base {
            assert!(grown.contains(job));
        }
    }

    #[test]
    fn split_seed_shared_across_architectures() {
        let grid = SweepGrid { architectures: Architecture::ALL.to_vec(), ..SweepGrid::default() };
        let jobs = enumerate_grid(&grid).unwrap();
        assert_eq!(jobs.len(), 3);
        assert!(jobs.iter().all(|j| j.seeds.split_seed == jobs[0].seeds.split_seed));
        assert_ne!(jobs[0].seeds.init_seed, jobs[1].seeds.init_seed);
    }
}
