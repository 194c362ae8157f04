//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use agl::encoding::{EncodedExample, Features};
use agl::nn::{self, Architecture, Candidate, LayerParams, NetworkConfig, Parameters};
use ndarray::Array2;
use rand::Rng;

fn sig(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn get(m: &Array2<f64>, r: usize, c: usize) -> f64 {
    m[[r, c]]
}

/// `out[j] = b[j] + Σ_i x[i]·W[i][j]`, written with plain loops.
fn lin(x: &[f64], w: &Array2<f64>, b: Option<&Array2<f64>>) -> Vec<f64> {
    let (rows, cols) = w.dim();
    assert_eq!(rows, x.len());
    (0..cols)
        .map(|j| {
            let mut s = b.map_or(0.0, |b| get(b, 0, j));
            for (i, xi) in x.iter().enumerate() {
                s += xi * get(w, i, j);
            }
            s
        })
        .collect()
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Naive single-example forward pass, written independently of the batched
/// engine: per-example loops, zero initial state.
pub fn reference_forward(p: &Parameters, ex: &EncodedExample) -> f64 {
    traced_forward(p, ex).0
}

/// Reference forward pass that also reports the smallest |pre-activation|
/// seen by any ReLU (infinity when there is none).
pub fn traced_forward(p: &Parameters, ex: &EncodedExample) -> (f64, f64) {
    let mut margin = f64::INFINITY;
    let mut relu = |v: f64| {
        margin = margin.min(v.abs());
        v.max(0.0)
    };
    let steps: Vec<Vec<f64>> = match &ex.features {
        Features::Flat(v) => vec![v.clone()],
        Features::Sequence(s) => s.clone(),
    };
    let h_size = p.config.neurons;
    let mut hidden = vec![vec![0.0; h_size]; p.layers.len()];
    let mut top = Vec::new();
    for x in &steps {
        let mut input = x.clone();
        for (l, layer) in p.layers.iter().enumerate() {
            let h_prev = hidden[l].clone();
            let h: Vec<f64> = match layer {
                LayerParams::Dense { w, b } => lin(&input, w, Some(b)).into_iter().map(&mut relu).collect(),
                LayerParams::Recurrent { w, u, b } => add(&lin(&input, w, Some(b)), &lin(&h_prev, u, None))
                    .into_iter()
                    .map(&mut relu)
                    .collect(),
                LayerParams::Gated { w_z, u_z, b_z, w_r, u_r, b_r, w_h, u_h, b_h } => {
                    let z: Vec<f64> = add(&lin(&input, w_z, Some(b_z)), &lin(&h_prev, u_z, None))
                        .into_iter()
                        .map(sig)
                        .collect();
                    let r: Vec<f64> = add(&lin(&input, w_r, Some(b_r)), &lin(&h_prev, u_r, None))
                        .into_iter()
                        .map(sig)
                        .collect();
                    let rh: Vec<f64> = r.iter().zip(&h_prev).map(|(a, b)| a * b).collect();
                    let cand: Vec<f64> = add(&lin(&input, w_h, Some(b_h)), &lin(&rh, u_h, None))
                        .into_iter()
                        .map(|v| match p.config.candidate {
                            Candidate::Tanh => v.tanh(),
                            Candidate::Relu => relu(v),
                        })
                        .collect();
                    (0..h_size).map(|j| (1.0 - z[j]) * h_prev[j] + z[j] * cand[j]).collect()
                }
            };
            if p.config.architecture == Architecture::Ffn {
                hidden[l] = vec![0.0; h_size];
            } else {
                hidden[l] = h.clone();
            }
            input = h;
        }
        top = input;
    }
    (sig(lin(&top, &p.readout_w, Some(&p.readout_b))[0]), margin)
}

/// Smallest distance of any ReLU pre-activation from its kink over a batch.
pub fn relu_margin(p: &Parameters, batch: &[EncodedExample]) -> f64 {
    batch.iter().map(|e| traced_forward(p, e).1).fold(f64::INFINITY, f64::min)
}

/// Margin required before finite differences with step 1e-5 are trusted.
pub const KINK_MARGIN: f64 = 1e-3;

/// Draws parameters and a batch whose ReLU pre-activations all stay at least
/// [`KINK_MARGIN`] away from zero, where central differences are undefined.
pub fn smooth_case<R: Rng>(config: &NetworkConfig, batch_size: usize, rng: &mut R) -> (Parameters, Vec<EncodedExample>) {
    loop {
        let seed = rng.gen();
        let p = random_parameters(config, seed, rng);
        let batch: Vec<EncodedExample> = (0..batch_size).map(|_| random_example(config, rng)).collect();
        if relu_margin(&p, &batch) > KINK_MARGIN {
            return (p, batch);
        }
    }
}

/// Random one-hot example matching `config`.
pub fn random_example<R: Rng>(config: &NetworkConfig, rng: &mut R) -> EncodedExample {
    let text: String = (0..12).map(|_| (b'a' + rng.gen_range(0..6u8)) as char).collect();
    let features = if config.architecture == Architecture::Ffn {
        Features::Flat(agl::encoding::encode_full(&text).unwrap())
    } else {
        Features::Sequence(agl::encoding::encode_windows(&text, config.window).unwrap())
    };
    EncodedExample { features, target: f64::from(rng.gen_range(0..2u8)) }
}

/// Initialized parameters with every entry (biases included) jittered, then
/// re-masked, so no pre-activation sits exactly on a ReLU kink.
pub fn random_parameters<R: Rng>(config: &NetworkConfig, seed: u64, rng: &mut R) -> Parameters {
    let mut p = nn::init_network(config, seed).unwrap();
    for t in p.tensors_mut() {
        t.mapv_inplace(|v| v + rng.gen_range(-0.3..0.3));
    }
    p.apply_masks();
    p
}

/// Mean BCE computed through the naive reference forward pass.
pub fn reference_loss(p: &Parameters, batch: &[EncodedExample]) -> f64 {
    let total: f64 = batch.iter().map(|e| nn::loss_bce(reference_forward(p, e), e.target)).sum();
    total / batch.len() as f64
}

/// Central finite differences of the reference loss for every unmasked entry.
/// Returns `(tensor index, row, col, numeric gradient)`.
pub fn finite_difference_gradients(p: &Parameters, batch: &[EncodedExample], step: f64) -> Vec<(usize, usize, usize, f64)> {
    let layout = Parameters::layout(&p.config);
    let mut out = Vec::new();
    let mut probe = p.clone();
    for (ti, info) in layout.iter().enumerate() {
        for r in 0..info.rows {
            for c in 0..info.cols {
                if Parameters::is_masked(&p.config, info, r, c) {
                    continue;
                }
                let orig = probe.tensors()[ti][[r, c]];
                probe.tensors_mut()[ti][[r, c]] = orig + step;
                let plus = reference_loss(&probe, batch);
                probe.tensors_mut()[ti][[r, c]] = orig - step;
                let minus = reference_loss(&probe, batch);
                probe.tensors_mut()[ti][[r, c]] = orig;
                out.push((ti, r, c, (plus - minus) / (2.0 * step)));
            }
        }
    }
    out
}

/// Denominator floor for relative error; below it differences are measured
/// against the floor so round-off on near-zero gradients does not dominate.
pub const RELATIVE_FLOOR: f64 = 1e-6;

/// Largest relative deviation between analytic and numeric gradients, and
/// whether all masked analytic entries are exactly zero.
pub fn gradient_check(p: &Parameters, batch: &[EncodedExample]) -> (f64, bool) {
    let analytic = nn::backward(p, batch).unwrap();
    let numeric = finite_difference_gradients(p, batch, 1e-5);
    let tensors = analytic.tensors();
    let mut worst: f64 = 0.0;
    for (ti, r, c, num) in numeric {
        let a = tensors[ti][[r, c]];
        let rel = (a - num).abs() / a.abs().max(num.abs()).max(RELATIVE_FLOOR);
        worst = worst.max(rel);
    }
    let layout = Parameters::layout(&p.config);
    let masked_zero = layout.iter().enumerate().all(|(ti, info)| {
        tensors[ti]
            .indexed_iter()
            .all(|((r, c), &v)| !Parameters::is_masked(&p.config, info, r, c) || v == 0.0)
    });
    (worst, masked_zero)
}
