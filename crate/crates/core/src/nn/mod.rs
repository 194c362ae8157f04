//! Dense, simple-recurrent and gated-recurrent networks with optional
//! lamination (block-diagonal hidden connectivity), trained by plain
//! backpropagation (through time) and classical momentum.
//!
//! Activations are stored row-major, one row per example, so a layer is
//! `h = act(x · W + h_prev · U + b)` with `W: in × out`.

mod checkpoint;
mod loss;
mod model;
mod optim;
mod params;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grammar::{ALPHABET_SIZE, STRING_LEN};

pub use checkpoint::{read_checkpoint, write_checkpoint, CHECKPOINT_MAGIC};
pub use loss::{bce_mean, loss_bce, sigmoid, PROB_EPSILON};
pub use model::{backward, forward, predict, stack_inputs};
pub(crate) use model::loss_and_gradients;
pub use optim::{momentum_step, OptimizerState, DEFAULT_LEARNING_RATE, DEFAULT_MOMENTUM};
pub use params::{init_network, LayerParams, Parameters, TensorInfo};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Architecture {
    Ffn,
    Rnn,
    Gru,
}

impl Architecture {
    pub const ALL: [Architecture; 3] = [Architecture::Ffn, Architecture::Rnn, Architecture::Gru];

    pub fn name(self) -> &'static str {
        match self {
            Architecture::Ffn => "FFN",
            Architecture::Rnn => "RNN",
            Architecture::Gru => "GRU",
        }
    }

    pub fn is_recurrent(self) -> bool {
        self != Architecture::Ffn
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Architecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Architecture::ALL
            .iter()
            .copied()
            .find(|a| a.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::param(format!("unknown architecture {s:?}")))
    }
}

/// Activation of the GRU candidate state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Candidate {
    #[default]
    Tanh,
    Relu,
}

impl FromStr for Candidate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "tanh" => Ok(Candidate::Tanh),
            "relu" => Ok(Candidate::Relu),
            other => Err(Error::param(format!("unknown candidate activation {other:?}"))),
        }
    }
}

impl fmt::Display for Candidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Candidate::Tanh => "tanh",
            Candidate::Relu => "relu",
        })
    }
}

pub const NEURON_STEP: usize = 32;
pub const MAX_NEURONS: usize = 512;
pub const MAX_DEPTH: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NetworkConfig {
    pub architecture: Architecture,
    /// Hidden width of every hidden layer.
    pub neurons: usize,
    /// Number of hidden layers.
    pub depth: usize,
    /// Channel count: 1 is dense, 2 is laminated.
    pub laminations: usize,
    /// Letters per input step; always 12 for FFN.
    pub window: usize,
    pub candidate: Candidate,
}

impl NetworkConfig {
    /// Builds a config on the experiment grid: neurons in {32, 64, ..., 512},
    /// depth 1..=3, laminations 1 or 2. FFN windows are forced to 12.
    pub fn new(
        architecture: Architecture,
        neurons: usize,
        depth: usize,
        laminations: usize,
        window: usize,
    ) -> Result<Self> {
        let config = NetworkConfig::unchecked(architecture, neurons, depth, laminations, window);
        config.validate_grid()?;
        Ok(config)
    }

    /// Builds a config checked only for shape consistency; used for toy
    /// networks below the grid's minimum width.
    pub fn toy(
        architecture: Architecture,
        neurons: usize,
        depth: usize,
        laminations: usize,
        window: usize,
    ) -> Result<Self> {
        let config = NetworkConfig::unchecked(architecture, neurons, depth, laminations, window);
        config.validate_shape()?;
        Ok(config)
    }

    fn unchecked(architecture: Architecture, neurons: usize, depth: usize, laminations: usize, window: usize) -> Self {
        NetworkConfig {
            architecture,
            neurons,
            depth,
            laminations,
            window: if architecture == Architecture::Ffn { STRING_LEN } else { window },
            candidate: Candidate::Tanh,
        }
    }

    pub fn with_candidate(mut self, candidate: Candidate) -> Self {
        self.candidate = candidate;
        self
    }

    pub fn validate_shape(&self) -> Result<()> {
        if self.neurons == 0 || self.depth == 0 || self.laminations == 0 {
            return Err(Error::param("neurons, depth and laminations must be positive"));
        }
        if self.neurons % self.laminations != 0 {
            return Err(Error::param(format!(
                "{} neurons cannot be split into {} laminations",
                self.neurons, self.laminations
            )));
        }
        if !(1..=STRING_LEN).contains(&self.window) {
            return Err(Error::param(format!("window {} not in 1..={STRING_LEN}", self.window)));
        }
        if self.architecture == Architecture::Ffn && self.window != STRING_LEN {
            return Err(Error::param("feed-forward networks always see the whole string"));
        }
        Ok(())
    }

    pub fn validate_grid(&self) -> Result<()> {
        self.validate_shape()?;
        if self.neurons % NEURON_STEP != 0 || self.neurons > MAX_NEURONS {
            return Err(Error::param(format!(
                "neurons {} not in {{32, 64, ..., 512}}",
                self.neurons
            )));
        }
        if self.depth > MAX_DEPTH {
            return Err(Error::param(format!("depth {} not in 1..=3", self.depth)));
        }
        if self.laminations > 2 {
            return Err(Error::param(format!("laminations {} not in {{1, 2}}", self.laminations)));
        }
        Ok(())
    }

    /// Width of one input step.
    pub fn input_width(&self) -> usize {
        ALPHABET_SIZE * self.window
    }

    /// Number of input steps per string.
    pub fn steps(&self) -> usize {
        STRING_LEN - self.window + 1
    }

    pub fn channel_width(&self) -> usize {
        self.neurons / self.laminations
    }
}
