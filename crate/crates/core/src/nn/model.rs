use ndarray::linalg::general_mat_mul;
use ndarray::{Array1, Array2, Axis, Zip};

use super::loss::{bce_mean, sigmoid, PROB_EPSILON};
use super::params::{LayerParams, Parameters};
use super::{Architecture, Candidate, NetworkConfig};
use crate::encoding::{EncodedExample, Features};
use crate::error::{Error, Result};

/// Intermediate values of one layer at one step, kept for backpropagation.
enum StepCache {
    Dense {
        x: Array2<f64>,
        a: Array2<f64>,
    },
    Recurrent {
        x: Array2<f64>,
        h_prev: Option<Array2<f64>>,
        a: Array2<f64>,
    },
    Gated {
        x: Array2<f64>,
        h_prev: Option<Array2<f64>>,
        z: Array2<f64>,
        r: Array2<f64>,
        cand: Array2<f64>,
    },
}

/// Packs examples into one `batch × input_width` matrix per step.
pub fn stack_inputs(config: &NetworkConfig, examples: &[&EncodedExample]) -> Result<Vec<Array2<f64>>> {
    let steps = config.steps();
    let width = config.input_width();
    let mut out = vec![Array2::zeros((examples.len(), width)); steps];
    for (row, ex) in examples.iter().enumerate() {
        let ok = match (&ex.features, config.architecture) {
            (Features::Flat(_), Architecture::Ffn) => true,
            (Features::Sequence(_), Architecture::Rnn | Architecture::Gru) => true,
            _ => false,
        };
        let ex_steps = ex.features.steps();
        if !ok || ex_steps.len() != steps || ex_steps.iter().any(|s| s.len() != width) {
            return Err(Error::input(format!(
                "example encoding does not match {} with window {} ({} steps of width {} expected)",
                config.architecture, config.window, steps, width
            )));
        }
        for (t, step) in ex_steps.iter().enumerate() {
            out[t].row_mut(row).assign(&ndarray::aview1(step));
        }
    }
    Ok(out)
}

fn affine(x: &Array2<f64>, w: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    let mut a = x.dot(w);
    a += b;
    a
}

fn relu(a: &Array2<f64>) -> Array2<f64> {
    a.mapv(|v| v.max(0.0))
}

fn accumulate(out: &mut Array2<f64>, lhs_t: &Array2<f64>, rhs: &Array2<f64>) {
    general_mat_mul(1.0, &lhs_t.t(), rhs, 1.0, out);
}

fn accumulate_bias(out: &mut Array2<f64>, da: &Array2<f64>) {
    *out += &da.sum_axis(Axis(0)).insert_axis(Axis(0));
}

fn layer_forward(
    layer: &LayerParams,
    candidate: Candidate,
    x: Array2<f64>,
    h_prev: Option<Array2<f64>>,
) -> (Array2<f64>, StepCache) {
    match layer {
        LayerParams::Dense { w, b } => {
            let a = affine(&x, w, b);
            (relu(&a), StepCache::Dense { x, a })
        }
        LayerParams::Recurrent { w, u, b } => {
            let mut a = affine(&x, w, b);
            if let Some(hp) = &h_prev {
                general_mat_mul(1.0, hp, u, 1.0, &mut a);
            }
            (relu(&a), StepCache::Recurrent { x, h_prev, a })
        }
        LayerParams::Gated { w_z, u_z, b_z, w_r, u_r, b_r, w_h, u_h, b_h } => {
            let mut az = affine(&x, w_z, b_z);
            let mut ar = affine(&x, w_r, b_r);
            let mut ah = affine(&x, w_h, b_h);
            if let Some(hp) = &h_prev {
                general_mat_mul(1.0, hp, u_z, 1.0, &mut az);
                general_mat_mul(1.0, hp, u_r, 1.0, &mut ar);
            }
            let z = az.mapv(sigmoid);
            let r = ar.mapv(sigmoid);
            if let Some(hp) = &h_prev {
                general_mat_mul(1.0, &(&r * hp), u_h, 1.0, &mut ah);
            }
            let cand = match candidate {
                Candidate::Tanh => ah.mapv(f64::tanh),
                Candidate::Relu => relu(&ah),
            };
            let h = match &h_prev {
                Some(hp) => Zip::from(&z)
                    .and(hp)
                    .and(&cand)
                    .map_collect(|&z, &hp, &c| (1.0 - z) * hp + z * c),
                None => &z * &cand,
            };
            (h, StepCache::Gated { x, h_prev, z, r, cand })
        }
    }
}

/// Runs the hidden stack over all steps. Returns the top layer's final
/// hidden state and the per-step caches indexed `[step][layer]`.
fn run_hidden(params: &Parameters, inputs: &[Array2<f64>]) -> (Array2<f64>, Vec<Vec<StepCache>>) {
    let candidate = params.config.candidate;
    let mut state: Vec<Option<Array2<f64>>> = vec![None; params.layers.len()];
    let mut caches = Vec::with_capacity(inputs.len());
    let mut top = None;
    for x in inputs {
        let mut below = x.clone();
        let mut step_caches = Vec::with_capacity(params.layers.len());
        for (l, layer) in params.layers.iter().enumerate() {
            let h_prev = if params.config.architecture.is_recurrent() {
                state[l].take()
            } else {
                None
            };
            let (h, cache) = layer_forward(layer, candidate, below, h_prev);
            step_caches.push(cache);
            state[l] = Some(h.clone());
            below = h;
        }
        top = Some(below);
        caches.push(step_caches);
    }
    (top.expect("at least one input step"), caches)
}

fn readout(params: &Parameters, top: &Array2<f64>) -> Array1<f64> {
    let logits = affine(top, &params.readout_w, &params.readout_b);
    logits
        .column(0)
        .mapv(|v| sigmoid(v).clamp(PROB_EPSILON, 1.0 - PROB_EPSILON))
}

/// Probability of "ungrammatical" for every row of the stacked inputs.
pub fn predict(params: &Parameters, inputs: &[Array2<f64>]) -> Array1<f64> {
    assert_eq!(inputs.len(), params.config.steps(), "step count mismatch");
    let (top, _) = run_hidden(params, inputs);
    readout(params, &top)
}

/// Probability that a single example is ungrammatical.
pub fn forward(params: &Parameters, example: &EncodedExample) -> Result<f64> {
    let inputs = stack_inputs(&params.config, &[example])?;
    Ok(predict(params, &inputs)[0])
}

/// Mean-over-batch gradients of the binary cross-entropy. Entries removed by
/// lamination get zero gradient.
pub fn backward(params: &Parameters, batch: &[EncodedExample]) -> Result<Parameters> {
    if batch.is_empty() {
        return Err(Error::input("backward needs a non-empty batch"));
    }
    let refs: Vec<&EncodedExample> = batch.iter().collect();
    let inputs = stack_inputs(&params.config, &refs)?;
    let targets: Vec<f64> = batch.iter().map(|e| e.target).collect();
    Ok(loss_and_gradients(params, &inputs, &targets).1)
}

pub(crate) fn loss_and_gradients(params: &Parameters, inputs: &[Array2<f64>], targets: &[f64]) -> (f64, Parameters) {
    let config: NetworkConfig = params.config;
    let batch = targets.len() as f64;
    let (top, caches) = run_hidden(params, inputs);
    let probs = readout(params, &top);
    let loss = bce_mean(probs.as_slice().expect("contiguous"), targets);

    let mut grads = Parameters::zeros(&config);
    // d loss / d logit for sigmoid + cross-entropy, averaged over the batch.
    let dlogit = Array2::from_shape_fn((targets.len(), 1), |(i, _)| (probs[i] - targets[i]) / batch);
    accumulate(&mut grads.readout_w, &top, &dlogit);
    accumulate_bias(&mut grads.readout_b, &dlogit);
    let d_top = dlogit.dot(&params.readout_w.t());

    let depth = params.layers.len();
    let mut carry: Vec<Option<Array2<f64>>> = vec![None; depth];
    let last = caches.len() - 1;
    for (t, step_caches) in caches.iter().enumerate().rev() {
        let mut from_above = (t == last).then(|| d_top.clone());
        for l in (0..depth).rev() {
            let dh = match (from_above.take(), carry[l].take()) {
                (Some(a), Some(c)) => a + c,
                (Some(a), None) => a,
                (None, Some(c)) => c,
                (None, None) => continue,
            };
            let (dx, dh_prev) = layer_backward(
                &params.layers[l],
                &mut grads.layers[l],
                &step_caches[l],
                &dh,
                config.candidate,
                l > 0,
            );
            carry[l] = dh_prev;
            from_above = dx;
        }
    }
    grads.apply_masks();
    (loss, grads)
}

fn layer_backward(
    layer: &LayerParams,
    grad: &mut LayerParams,
    cache: &StepCache,
    dh: &Array2<f64>,
    candidate: Candidate,
    need_dx: bool,
) -> (Option<Array2<f64>>, Option<Array2<f64>>) {
    match (layer, grad, cache) {
        (LayerParams::Dense { w, .. }, LayerParams::Dense { w: gw, b: gb }, StepCache::Dense { x, a }) => {
            let da = relu_grad(dh, a);
            accumulate(gw, x, &da);
            accumulate_bias(gb, &da);
            (need_dx.then(|| da.dot(&w.t())), None)
        }
        (
            LayerParams::Recurrent { w, u, .. },
            LayerParams::Recurrent { w: gw, u: gu, b: gb },
            StepCache::Recurrent { x, h_prev, a },
        ) => {
            let da = relu_grad(dh, a);
            accumulate(gw, x, &da);
            accumulate_bias(gb, &da);
            let dh_prev = h_prev.as_ref().map(|hp| {
                accumulate(gu, hp, &da);
                da.dot(&u.t())
            });
            (need_dx.then(|| da.dot(&w.t())), dh_prev)
        }
        (
            LayerParams::Gated { w_z, u_z, w_r, u_r, w_h, u_h, .. },
            LayerParams::Gated {
                w_z: gw_z,
                u_z: gu_z,
                b_z: gb_z,
                w_r: gw_r,
                u_r: gu_r,
                b_r: gb_r,
                w_h: gw_h,
                u_h: gu_h,
                b_h: gb_h,
            },
            StepCache::Gated { x, h_prev, z, r, cand },
        ) => {
            let dz_pre = match h_prev {
                Some(hp) => Zip::from(dh)
                    .and(z)
                    .and(cand)
                    .and(hp)
                    .map_collect(|&d, &z, &c, &hp| d * (c - hp) * z * (1.0 - z)),
                None => Zip::from(dh).and(z).and(cand).map_collect(|&d, &z, &c| d * c * z * (1.0 - z)),
            };
            let dh_pre = Zip::from(dh).and(z).and(cand).map_collect(|&d, &z, &c| {
                let slope = match candidate {
                    Candidate::Tanh => 1.0 - c * c,
                    Candidate::Relu => f64::from(u8::from(c > 0.0)),
                };
                d * z * slope
            });
            accumulate(gw_z, x, &dz_pre);
            accumulate_bias(gb_z, &dz_pre);
            accumulate(gw_h, x, &dh_pre);
            accumulate_bias(gb_h, &dh_pre);

            let mut dx = need_dx.then(|| dz_pre.dot(&w_z.t()) + dh_pre.dot(&w_h.t()));
            let dh_prev = h_prev.as_ref().map(|hp| {
                let d_rh = dh_pre.dot(&u_h.t());
                accumulate(gu_h, &(r * hp), &dh_pre);
                let dr_pre = Zip::from(&d_rh)
                    .and(hp)
                    .and(r)
                    .map_collect(|&d, &hp, &r| d * hp * r * (1.0 - r));
                accumulate(gw_r, x, &dr_pre);
                accumulate_bias(gb_r, &dr_pre);
                accumulate(gu_r, hp, &dr_pre);
                accumulate(gu_z, hp, &dz_pre);
                if let Some(dx) = dx.as_mut() {
                    general_mat_mul(1.0, &dr_pre, &w_r.t(), 1.0, dx);
                }
                let mut dh_prev = Zip::from(dh)
                    .and(z)
                    .and(&d_rh)
                    .and(r)
                    .map_collect(|&d, &z, &drh, &r| d * (1.0 - z) + drh * r);
                general_mat_mul(1.0, &dz_pre, &u_z.t(), 1.0, &mut dh_prev);
                general_mat_mul(1.0, &dr_pre, &u_r.t(), 1.0, &mut dh_prev);
                dh_prev
            });
            (dx, dh_prev)
        }
        _ => unreachable!("layer, gradient and cache variants always agree"),
    }
}

fn relu_grad(dh: &Array2<f64>, a: &Array2<f64>) -> Array2<f64> {
    Zip::from(dh)
        .and(a)
        .map_collect(|&d, &a| if a > 0.0 { d } else { 0.0 })
}
