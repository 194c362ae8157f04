use ndarray::{Array2, Zip};

use super::params::Parameters;

pub const DEFAULT_LEARNING_RATE: f64 = 0.01;
pub const DEFAULT_MOMENTUM: f64 = 0.95;

/// Classical momentum: `v ← ρ·v + g`, `θ ← θ − η·v`.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub velocity: Vec<Array2<f64>>,
    pub learning_rate: f64,
    pub momentum: f64,
}

impl OptimizerState {
    pub fn new(params: &Parameters, learning_rate: f64, momentum: f64) -> Self {
        OptimizerState {
            velocity: params.tensors().iter().map(|t| Array2::zeros(t.raw_dim())).collect(),
            learning_rate,
            momentum,
        }
    }

    pub fn with_defaults(params: &Parameters) -> Self {
        OptimizerState::new(params, DEFAULT_LEARNING_RATE, DEFAULT_MOMENTUM)
    }
}

/// Applies one update in place and re-applies lamination masks.
pub fn momentum_step(params: &mut Parameters, grads: &Parameters, state: &mut OptimizerState) {
    let (eta, rho) = (state.learning_rate, state.momentum);
    for ((theta, g), v) in params
        .tensors_mut()
        .into_iter()
        .zip(grads.tensors())
        .zip(state.velocity.iter_mut())
    {
        assert_eq!(theta.dim(), g.dim(), "gradient shape mismatch");
        Zip::from(theta).and(v).and(g).for_each(|theta, v, &g| {
            *v = rho * *v + g;
            *theta -= eta * *v;
        });
    }
    params.apply_masks();
}
