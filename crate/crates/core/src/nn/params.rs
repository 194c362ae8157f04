use ndarray::{Array2, Zip};
use rand::Rng;

use super::{Architecture, NetworkConfig};
use crate::error::Result;
use crate::seed::rng_from_seed;

/// Weights of one hidden layer. Biases are `1 × neurons` rows.
#[derive(Debug, Clone, PartialEq)]
pub enum LayerParams {
    Dense {
        w: Array2<f64>,
        b: Array2<f64>,
    },
    Recurrent {
        w: Array2<f64>,
        u: Array2<f64>,
        b: Array2<f64>,
    },
    /// Update gate `z`, reset gate `r` and candidate `h`.
    Gated {
        w_z: Array2<f64>,
        u_z: Array2<f64>,
        b_z: Array2<f64>,
        w_r: Array2<f64>,
        u_r: Array2<f64>,
        b_r: Array2<f64>,
        w_h: Array2<f64>,
        u_h: Array2<f64>,
        b_h: Array2<f64>,
    },
}

impl LayerParams {
    fn tensors(&self) -> Vec<&Array2<f64>> {
        match self {
            LayerParams::Dense { w, b } => vec![w, b],
            LayerParams::Recurrent { w, u, b } => vec![w, u, b],
            LayerParams::Gated { w_z, u_z, b_z, w_r, u_r, b_r, w_h, u_h, b_h } => {
                vec![w_z, u_z, b_z, w_r, u_r, b_r, w_h, u_h, b_h]
            }
        }
    }

    fn tensors_mut(&mut self) -> Vec<&mut Array2<f64>> {
        match self {
            LayerParams::Dense { w, b } => vec![w, b],
            LayerParams::Recurrent { w, u, b } => vec![w, u, b],
            LayerParams::Gated { w_z, u_z, b_z, w_r, u_r, b_r, w_h, u_h, b_h } => {
                vec![w_z, u_z, b_z, w_r, u_r, b_r, w_h, u_h, b_h]
            }
        }
    }
}

/// Static description of one parameter tensor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorInfo {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    /// Whether lamination restricts this tensor to within-channel entries.
    pub laminated: bool,
    pub is_bias: bool,
}

/// All trainable tensors of a network: hidden layers bottom-up, then the
/// read-out mapping the last hidden state to one logit.
#[derive(Debug, Clone, PartialEq)]
pub struct Parameters {
    pub config: NetworkConfig,
    pub layers: Vec<LayerParams>,
    pub readout_w: Array2<f64>,
    pub readout_b: Array2<f64>,
}

impl Parameters {
    /// Tensor layout in canonical order. This order is used by the optimizer,
    /// checkpoints and gradient checks.
    pub fn layout(config: &NetworkConfig) -> Vec<TensorInfo> {
        let h = config.neurons;
        let lam = config.laminations > 1;
        let mut out = Vec::new();
        let mut push = |name: String, rows, cols, laminated, is_bias| {
            out.push(TensorInfo { name, rows, cols, laminated: laminated && lam, is_bias })
        };
        for l in 0..config.depth {
            let input = if l == 0 { config.input_width() } else { h };
            // Inputs feed every channel; hidden-to-hidden weights stay in-channel.
            let w_lam = l > 0;
            let groups: &[&str] = match config.architecture {
                Architecture::Ffn | Architecture::Rnn => &[""],
                Architecture::Gru => &["_z", "_r", "_h"],
            };
            for g in groups {
                push(format!("layer{l}.w{g}"), input, h, w_lam, false);
                if config.architecture.is_recurrent() {
                    push(format!("layer{l}.u{g}"), h, h, true, false);
                }
                push(format!("layer{l}.b{g}"), 1, h, false, true);
            }
        }
        push("readout.w".into(), h, 1, false, false);
        push("readout.b".into(), 1, 1, false, true);
        out
    }

    pub fn zeros(config: &NetworkConfig) -> Self {
        let layout = Parameters::layout(config);
        let tensors = layout.iter().map(|t| Array2::zeros((t.rows, t.cols))).collect();
        Parameters::from_tensors(*config, tensors)
    }

    /// Reassembles parameters from tensors in [`Parameters::layout`] order.
    pub(crate) fn from_tensors(config: NetworkConfig, tensors: Vec<Array2<f64>>) -> Self {
        let mut it = tensors.into_iter();
        let mut next = || it.next().expect("tensor count matches layout");
        let layers = (0..config.depth)
            .map(|_| match config.architecture {
                Architecture::Ffn => LayerParams::Dense { w: next(), b: next() },
                Architecture::Rnn => LayerParams::Recurrent { w: next(), u: next(), b: next() },
                Architecture::Gru => LayerParams::Gated {
                    w_z: next(),
                    u_z: next(),
                    b_z: next(),
                    w_r: next(),
                    u_r: next(),
                    b_r: next(),
                    w_h: next(),
                    u_h: next(),
                    b_h: next(),
                },
            })
            .collect();
        let readout_w = next();
        let readout_b = next();
        Parameters { config, layers, readout_w, readout_b }
    }

    pub fn tensors(&self) -> Vec<&Array2<f64>> {
        let mut out: Vec<&Array2<f64>> = self.layers.iter().flat_map(LayerParams::tensors).collect();
        out.push(&self.readout_w);
        out.push(&self.readout_b);
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Array2<f64>> {
        let mut out: Vec<&mut Array2<f64>> = self.layers.iter_mut().flat_map(LayerParams::tensors_mut).collect();
        out.push(&mut self.readout_w);
        out.push(&mut self.readout_b);
        out
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    /// Zeroes every cross-channel entry of laminated tensors.
    pub fn apply_masks(&mut self) {
        let config = self.config;
        if config.laminations <= 1 {
            return;
        }
        let layout = Parameters::layout(&config);
        for (tensor, info) in self.tensors_mut().into_iter().zip(&layout) {
            if info.laminated {
                mask_block_diagonal(tensor, config.channel_width());
            }
        }
    }

    /// True when entry `(row, col)` of tensor `index` is structurally zero.
    pub fn is_masked(config: &NetworkConfig, info: &TensorInfo, row: usize, col: usize) -> bool {
        info.laminated && row / config.channel_width() != col / config.channel_width()
    }
}

fn mask_block_diagonal(t: &mut Array2<f64>, channel: usize) {
    Zip::indexed(t).for_each(|(r, c), v| {
        if r / channel != c / channel {
            *v = 0.0;
        }
    });
}

/// Weights uniform in `±sqrt(1 / fan_in)`, where fan-in counts the inputs a
/// unit actually receives after masking; biases start at zero. Every entry is
/// drawn (masked ones included) in layout order, row-major.
pub fn init_network(config: &NetworkConfig, seed: u64) -> Result<Parameters> {
    config.validate_shape()?;
    let mut rng = rng_from_seed(seed);
    let layout = Parameters::layout(config);
    let tensors = layout
        .iter()
        .map(|info| {
            if info.is_bias {
                return Array2::zeros((info.rows, info.cols));
            }
            let fan_in = if info.laminated { config.channel_width() } else { info.rows };
            let bound = (1.0 / fan_in as f64).sqrt();
            Array2::from_shape_simple_fn((info.rows, info.cols), || rng.gen_range(-bound..=bound))
        })
        .collect();
    let mut params = Parameters::from_tensors(*config, tensors);
    params.apply_masks();
    Ok(params)
}
