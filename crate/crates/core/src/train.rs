//! One training job: shuffled mini-batches, momentum updates, per-batch test
//! evaluation with early stopping at 100% test accuracy, and final metrics.

use std::fmt::Write as _;
use std::time::Instant;

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;

use crate::encoding::{EncodedExample, SplitCorpus};
use crate::error::{Error, Result};
use crate::grammar::GrammarDescriptor;
use crate::nn::{self, init_network, momentum_step, NetworkConfig, OptimizerState, Parameters};
use crate::seed::{derive_seed, rng_from_seed};

pub const RESULTS_HEADER: &str = "level,k,instance_seed,architecture,neurons,depth,laminations,window,\
split_seed,init_seed,brier,percent_correct,epochs_run,stopped_early,wall_time";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedBundle {
    /// Seeds the train/test partition and, advanced per epoch, batch order.
    pub split_seed: u64,
    pub init_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainOptions {
    pub max_epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    /// Evaluate on the test split every `n` batches and stop at 100%;
    /// `None` disables mid-training evaluation and early stopping.
    pub eval_stride: Option<usize>,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            max_epochs: 100,
            batch_size: 100,
            learning_rate: nn::DEFAULT_LEARNING_RATE,
            momentum: nn::DEFAULT_MOMENTUM,
            eval_stride: Some(1),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub config: NetworkConfig,
    pub grammar: GrammarDescriptor,
    pub split_seed: u64,
    pub init_seed: u64,
    /// Test-split Brier score.
    pub brier: f64,
    /// Test-split percentage classified correctly.
    pub percent_correct: f64,
    pub epochs_run: usize,
    pub stopped_early: bool,
    /// Seconds. Not reproducible, unlike every other field.
    pub wall_time: f64,
}

impl TrainOutcome {
    /// One results row, columns as in [`RESULTS_HEADER`].
    pub fn to_csv_row(&self) -> String {
        let mut row = String::new();
        let c = &self.config;
        let g = &self.grammar;
        write!(
            row,
            "{},{},{},{},{},{},{},{},{},{},{:?},{:?},{},{},{:.3}",
            g.level,
            g.k,
            g.instance_seed,
            c.architecture,
            c.neurons,
            c.depth,
            c.laminations,
            c.window,
            self.split_seed,
            self.init_seed,
            self.brier,
            self.percent_correct,
            self.epochs_run,
            self.stopped_early,
            self.wall_time
        )
        .expect("writing to a String");
        row
    }
}

/// Brier score and percent correct of predicted probabilities against 0/1
/// targets (1 = ungrammatical). A prediction of exactly 0.5 counts as
/// ungrammatical.
pub fn score(predictions: &[f64], targets: &[f64]) -> Result<(f64, f64)> {
    if predictions.is_empty() {
        return Err(Error::input("cannot evaluate on an empty test set"));
    }
    if predictions.len() != targets.len() {
        return Err(Error::input("prediction and target counts differ"));
    }
    let n = predictions.len() as f64;
    let brier = predictions
        .iter()
        .zip(targets)
        .map(|(p, y)| (p - y) * (p - y))
        .sum::<f64>()
        / n;
    Ok((brier, 100.0 * correct_count(predictions, targets) as f64 / n))
}

fn correct_count(predictions: &[f64], targets: &[f64]) -> usize {
    predictions
        .iter()
        .zip(targets)
        .filter(|(&p, &y)| (p >= 0.5) == (y >= 0.5))
        .count()
}

/// `(brier, percent_correct)` of `params` on `testset`.
pub fn evaluate(params: &Parameters, testset: &[EncodedExample]) -> Result<(f64, f64)> {
    if testset.is_empty() {
        return Err(Error::input("cannot evaluate on an empty test set"));
    }
    let refs: Vec<&EncodedExample> = testset.iter().collect();
    let inputs = nn::stack_inputs(&params.config, &refs)?;
    let targets: Vec<f64> = testset.iter().map(|e| e.target).collect();
    let probs = nn::predict(params, &inputs);
    score(probs.as_slice().expect("contiguous"), &targets)
}

/// Trains a freshly initialized network on `data.train`, scoring on `data.test`.
pub fn train_model(
    config: &NetworkConfig,
    data: &SplitCorpus,
    grammar: GrammarDescriptor,
    seeds: SeedBundle,
    options: &TrainOptions,
) -> Result<(TrainOutcome, Parameters)> {
    let started = Instant::now();
    if data.train.is_empty() || data.test.is_empty() {
        return Err(Error::input("train and test splits must both be non-empty"));
    }
    if options.batch_size == 0 || options.eval_stride == Some(0) {
        return Err(Error::param("batch size and evaluation stride must be positive"));
    }
    let mut params = init_network(config, seeds.init_seed)?;
    let mut state = OptimizerState::new(&params, options.learning_rate, options.momentum);

    let train_refs: Vec<&EncodedExample> = data.train.iter().collect();
    let train_inputs = nn::stack_inputs(config, &train_refs)?;
    let train_targets: Vec<f64> = data.train.iter().map(|e| e.target).collect();
    let test_refs: Vec<&EncodedExample> = data.test.iter().collect();
    let test_inputs = nn::stack_inputs(config, &test_refs)?;
    let test_targets: Vec<f64> = data.test.iter().map(|e| e.target).collect();

    let mut order: Vec<usize> = (0..data.train.len()).collect();
    let mut batches_done = 0usize;
    let mut epochs_run = 0;
    let mut stopped_early = false;
    'epochs: for epoch in 0..options.max_epochs {
        epochs_run = epoch + 1;
        order.sort_unstable();
        order.shuffle(&mut rng_from_seed(derive_seed(seeds.split_seed, &format!("epoch:{epoch}"))));
        for chunk in order.chunks(options.batch_size) {
            let inputs: Vec<Array2<f64>> = train_inputs.iter().map(|m| m.select(Axis(0), chunk)).collect();
            let targets: Vec<f64> = chunk.iter().map(|&i| train_targets[i]).collect();
            let (_, grads) = nn::loss_and_gradients(&params, &inputs, &targets);
            momentum_step(&mut params, &grads, &mut state);
            batches_done += 1;
            if let Some(stride) = options.eval_stride {
                if batches_done % stride == 0 {
                    let probs = nn::predict(&params, &test_inputs);
                    let probs = probs.as_slice().expect("contiguous");
                    if correct_count(probs, &test_targets) == test_targets.len() {
                        stopped_early = true;
                        break 'epochs;
                    }
                }
            }
        }
    }

    let probs = nn::predict(&params, &test_inputs);
    let (brier, percent_correct) = score(probs.as_slice().expect("contiguous"), &test_targets)?;
    let outcome = TrainOutcome {
        config: *config,
        grammar,
        split_seed: seeds.split_seed,
        init_seed: seeds.init_seed,
        brier,
        percent_correct,
        epochs_run,
        stopped_early,
        wall_time: started.elapsed().as_secs_f64(),
    };
    Ok((outcome, params))
}
