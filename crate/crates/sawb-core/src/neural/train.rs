//! Mini-batch Adam training for the branch/trunk networks.

use super::{Layer, NetworkSpec, NetworkWeights, Scaling, Trace, TrainingMeta};
use crate::{mix_seed, Error, Result};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

const SEED_OFFSET_INIT: u64 = 101;
const SEED_OFFSET_SHUFFLE: u64 = 102;

/// One labeled training example: raw feature values and a physical target.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub features: Vec<f64>,
    pub target: f64,
}

/// Per-epoch loss record in standardized target units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    /// Mean of the mini-batch losses seen during the epoch.
    pub train_mse: f64,
    /// Full-pass validation MSE after the epoch, when a validation split
    /// was given.
    pub val_mse: Option<f64>,
}

/// Gradient accumulators shaped like the network parameters.
pub(crate) struct Gradients {
    pub branches: Vec<Layer>,
    pub trunk: Vec<Layer>,
}

impl Gradients {
    fn zeros_like(net: &NetworkWeights) -> Self {
        Gradients {
            branches: net
                .branches()
                .iter()
                .map(|l| Layer::zeros(l.rows, l.cols))
                .collect(),
            trunk: net
                .trunk()
                .iter()
                .map(|l| Layer::zeros(l.rows, l.cols))
                .collect(),
        }
    }

    fn reset(&mut self) {
        for layer in self.branches.iter_mut().chain(self.trunk.iter_mut()) {
            layer.w.iter_mut().for_each(|v| *v = 0.0);
            layer.b.iter_mut().for_each(|v| *v = 0.0);
        }
    }
}

/// Accumulates the loss gradient of one sample into `grads`.
///
/// `dout` is dL/d(output); pass `2 (out − y) / batch` so the accumulated
/// result is the batch-mean MSE gradient.
pub(crate) fn accumulate_gradients(
    net: &NetworkWeights,
    x: &[f64],
    trace: &Trace,
    dout: f64,
    grads: &mut Gradients,
) {
    let trunk = net.trunk();
    // Linear output node: delta is the raw loss gradient.
    let mut delta = vec![dout];
    for i in (0..trunk.len()).rev() {
        let input: &[f64] = if i == 0 {
            &trace.trunk_in
        } else {
            &trace.trunk_act[i - 1]
        };
        let g = &mut grads.trunk[i];
        for (r, &d) in delta.iter().enumerate() {
            let row = &mut g.w[r * g.cols..(r + 1) * g.cols];
            for (slot, &v) in row.iter_mut().zip(input) {
                *slot += d * v;
            }
            g.b[r] += d;
        }
        let layer = &trunk[i];
        let mut prev = vec![0.0; layer.cols];
        for (r, &d) in delta.iter().enumerate() {
            let row = &layer.w[r * layer.cols..(r + 1) * layer.cols];
            for (p, &w) in prev.iter_mut().zip(row) {
                *p += d * w;
            }
        }
        if i > 0 {
            for (p, &pre) in prev.iter_mut().zip(&trace.trunk_pre[i - 1]) {
                if pre <= 0.0 {
                    *p = 0.0;
                }
            }
            delta = prev;
        } else {
            // Trunk input gradient: branch output segments feed the branch
            // layers; the m0 and speed slots are inputs with no parameters.
            let spec = net.spec();
            let bw = spec.branch_width;
            let k2 = spec.branch_input_width();
            let block = k2 + 1;
            for (p, branch) in net.branches().iter().enumerate() {
                let seg = &prev[p * bw..(p + 1) * bw];
                let xblock = &x[p * block..p * block + k2];
                let g = &mut grads.branches[p];
                for r in 0..branch.rows {
                    let d = if trace.branch_pre[p][r] <= 0.0 {
                        0.0
                    } else {
                        seg[r]
                    };
                    if d == 0.0 {
                        continue;
                    }
                    let row = &mut g.w[r * g.cols..(r + 1) * g.cols];
                    for (slot, &v) in row.iter_mut().zip(xblock) {
                        *slot += d * v;
                    }
                    g.b[r] += d;
                }
            }
        }
    }
}

/// Adam first/second moment state for every parameter tensor.
struct AdamState {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    step: u64,
}

impl AdamState {
    fn new(net: &NetworkWeights) -> Self {
        let sizes: Vec<usize> = net
            .branches()
            .iter()
            .chain(net.trunk())
            .map(|l| l.w.len() + l.b.len())
            .collect();
        AdamState {
            m: sizes.iter().map(|&s| vec![0.0; s]).collect(),
            v: sizes.iter().map(|&s| vec![0.0; s]).collect(),
            step: 0,
        }
    }

    fn update(&mut self, net: &mut NetworkWeights, grads: &Gradients, lr: f64) {
        self.step += 1;
        let bias1 = 1.0 - ADAM_BETA1.powi(self.step as i32);
        let bias2 = 1.0 - ADAM_BETA2.powi(self.step as i32);
        let n_branches = grads.branches.len();
        for (idx, (layer, grad)) in net
            .branches_mut()
            .iter_mut()
            .zip(&grads.branches)
            .enumerate()
        {
            Self::update_tensor(layer, grad, &mut self.m[idx], &mut self.v[idx], lr, bias1, bias2);
        }
        for (idx, (layer, grad)) in net.trunk_mut().iter_mut().zip(&grads.trunk).enumerate() {
            let slot = n_branches + idx;
            Self::update_tensor(
                layer,
                grad,
                &mut self.m[slot],
                &mut self.v[slot],
                lr,
                bias1,
                bias2,
            );
        }
    }

    fn update_tensor(
        layer: &mut Layer,
        grad: &Layer,
        m: &mut [f64],
        v: &mut [f64],
        lr: f64,
        bias1: f64,
        bias2: f64,
    ) {
        let params = layer.w.iter_mut().chain(layer.b.iter_mut());
        let gradients = grad.w.iter().chain(grad.b.iter());
        for (((p, &g), mi), vi) in params.zip(gradients).zip(m.iter_mut()).zip(v.iter_mut()) {
            *mi = ADAM_BETA1 * *mi + (1.0 - ADAM_BETA1) * g;
            *vi = ADAM_BETA2 * *vi + (1.0 - ADAM_BETA2) * g * g;
            let m_hat = *mi / bias1;
            let v_hat = *vi / bias2;
            *p -= lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
        }
    }
}

fn mean_mse(net: &NetworkWeights, xs: &[Vec<f64>], ys: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let sum: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, &y)| {
            let e = net.run(x).output - y;
            e * e
        })
        .sum();
    Some(sum / xs.len() as f64)
}

/// Trains a network on raw samples with mini-batch Adam.
///
/// Feature and target standardization constants are fitted on the training
/// split only and stored with the returned weights; the loss history is in
/// standardized units. Deterministic for a fixed (spec, data order, seed).
pub fn train(
    spec: &NetworkSpec,
    train_set: &[Sample],
    val_set: &[Sample],
    seed: u64,
) -> Result<(NetworkWeights, Vec<EpochStats>)> {
    spec.validate()?;
    if train_set.is_empty() {
        return Err(Error::domain("training split is empty"));
    }
    let width = spec.feature_width();
    for s in train_set.iter().chain(val_set) {
        if s.features.len() != width {
            return Err(Error::domain(format!(
                "sample width {} does not match spec width {width}",
                s.features.len()
            )));
        }
    }

    let scaling = Scaling::fit(train_set)?;
    let scale = |set: &[Sample]| -> (Vec<Vec<f64>>, Vec<f64>) {
        let xs = set.iter().map(|s| scaling.standardize(&s.features)).collect();
        let ys = set
            .iter()
            .map(|s| scaling.standardize_target(s.target))
            .collect();
        (xs, ys)
    };
    let (train_x, train_y) = scale(train_set);
    let (val_x, val_y) = scale(val_set);

    let mut net = super::init_network(spec, mix_seed(seed, SEED_OFFSET_INIT))?;
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, SEED_OFFSET_SHUFFLE));
    let mut order: Vec<usize> = (0..train_x.len()).collect();
    let mut grads = Gradients::zeros_like(&net);
    let mut adam = AdamState::new(&net);
    let mut history = Vec::with_capacity(spec.epochs);
    let mut last_train_mse = f64::NAN;

    for epoch in 0..spec.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut epoch_loss = 0.0;
        let mut seen = 0usize;
        for (batch_idx, batch) in order.chunks(spec.batch_size).enumerate() {
            grads.reset();
            let inv = 1.0 / batch.len() as f64;
            let mut batch_loss = 0.0;
            for &i in batch {
                let trace = net.run(&train_x[i]);
                let err = trace.output - train_y[i];
                batch_loss += err * err;
                accumulate_gradients(&net, &train_x[i], &trace, 2.0 * err * inv, &mut grads);
            }
            batch_loss *= inv;
            if !batch_loss.is_finite() {
                return Err(Error::Diverged {
                    epoch,
                    batch: batch_idx,
                });
            }
            adam.update(&mut net, &grads, spec.learning_rate);
            epoch_loss += batch_loss * batch.len() as f64;
            seen += batch.len();
        }
        last_train_mse = epoch_loss / seen as f64;
        history.push(EpochStats {
            epoch,
            train_mse: last_train_mse,
            val_mse: mean_mse(&net, &val_x, &val_y),
        });
    }

    net.set_scaling(scaling);
    net.set_meta(TrainingMeta {
        seed,
        epochs_run: spec.epochs,
        final_train_mse: last_train_mse,
    });
    Ok((net, history))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::{init_network, predict, Target};
    use crate::spectral::{DofMask, FeatureVector};
    use rand::Rng;

    fn toy_samples(spec: &NetworkSpec, n: usize, seed: u64) -> Vec<Sample> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let features: Vec<f64> =
                    (0..spec.feature_width()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let target = features.iter().take(8).sum::<f64>()
                    + features[1] * features[2];
                Sample { features, target }
            })
            .collect()
    }

    #[test]
    fn training_is_deterministic() {
        let spec = NetworkSpec {
            epochs: 5,
            ..NetworkSpec::standard(DofMask::HEAVE, Target::WaveHeight)
        };
        let data = toy_samples(&spec, 64, 1);
        let (a, ha) = train(&spec, &data, &[], 7).unwrap();
        let (b, hb) = train(&spec, &data, &[], 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(ha, hb);
        let (c, _) = train(&spec, &data, &[], 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn small_network_memorizes_quickly() {
        let spec = NetworkSpec {
            epochs: 400,
            ..NetworkSpec::standard(DofMask::HEAVE, Target::WaveHeight)
        };
        let data = toy_samples(&spec, 20, 3);
        let (net, history) = train(&spec, &data, &[], 3).unwrap();
        let final_mse = history.last().unwrap().train_mse;
        assert!(final_mse < 1e-2, "final train MSE {final_mse}");
        assert!(net.all_finite());
    }

    #[test]
    fn loss_decreases_on_quadratic_target() {
        // y = xᵀx is smooth and learnable; the smoothed loss over the first
        // 20 epochs must trend down.
        let spec = NetworkSpec {
            epochs: 20,
            ..NetworkSpec::standard(DofMask::HEAVE, Target::WaveHeight)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let data: Vec<Sample> = (0..128)
            .map(|_| {
                let features: Vec<f64> =
                    (0..spec.feature_width()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let target = features.iter().map(|v| v * v).sum();
                Sample { features, target }
            })
            .collect();
        let (_, history) = train(&spec, &data, &[], 11).unwrap();
        let head: f64 = history[..5].iter().map(|e| e.train_mse).sum::<f64>() / 5.0;
        let tail: f64 = history[15..].iter().map(|e| e.train_mse).sum::<f64>() / 5.0;
        assert!(tail < head, "loss did not decrease: {head} -> {tail}");
    }

    #[test]
    fn validation_history_is_recorded() {
        let spec = NetworkSpec {
            epochs: 3,
            ..NetworkSpec::standard(DofMask::HEAVE, Target::WavePeriod)
        };
        let data = toy_samples(&spec, 40, 9);
        let (train_split, val_split) = data.split_at(30);
        let (_, history) = train(&spec, train_split, val_split, 2).unwrap();
        assert_eq!(history.len(), 3);
        assert!(history.iter().all(|e| e.val_mse.unwrap().is_finite()));
    }

    #[test]
    fn nan_sample_aborts_with_diagnostic() {
        let spec = NetworkSpec {
            epochs: 2,
            ..NetworkSpec::standard(DofMask::HEAVE, Target::WaveHeight)
        };
        let mut data = toy_samples(&spec, 16, 4);
        data[3].features[0] = f64::NAN;
        match train(&spec, &data, &[], 1) {
            Err(crate::Error::Diverged { epoch, .. }) => assert_eq!(epoch, 0),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn empty_training_split_is_rejected() {
        let spec = NetworkSpec::standard(DofMask::HEAVE, Target::WaveHeight);
        assert!(train(&spec, &[], &[], 0).is_err());
    }

    #[test]
    fn width_mismatch_is_rejected() {
        let spec = NetworkSpec::standard(DofMask::HEAVE, Target::WaveHeight);
        let bad = vec![Sample {
            features: vec![0.0; 10],
            target: 1.0,
        }];
        assert!(train(&spec, &bad, &[], 0).is_err());
    }

    #[test]
    fn analytic_gradients_match_finite_differences() {
        // Central differences with h = 1e−6 over every parameter of a small
        // network; relative error below 1e−4.
        let spec = NetworkSpec {
            mask: DofMask::parse("heave+pitch").unwrap(),
            target: Target::WaveHeight,
            k: 2,
            branch_width: 3,
            trunk: vec![4],
            batch_size: 4,
            epochs: 1,
            learning_rate: 0.001,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let net = init_network(&spec, 31).unwrap();
        let x: Vec<f64> = (0..spec.feature_width())
            .map(|_| rng.gen_range(0.2..1.0))
            .collect();
        let y = 0.7;

        let mut grads = Gradients::zeros_like(&net);
        let trace = net.run(&x);
        accumulate_gradients(&net, &x, &trace, 2.0 * (trace.output - y), &mut grads);

        let h = 1e-6;
        let loss = |n: &NetworkWeights| {
            let e = n.run(&x).output - y;
            e * e
        };
        let layer_count = net.branches().len() + net.trunk().len();
        for li in 0..layer_count {
            let (rows, cols) = {
                let l = layer_at(&net, li);
                (l.rows, l.cols)
            };
            for p in 0..rows * cols + rows {
                let mut plus = net.clone();
                let mut minus = net.clone();
                perturb(&mut plus, li, p, h);
                perturb(&mut minus, li, p, -h);
                let numeric = (loss(&plus) - loss(&minus)) / (2.0 * h);
                let analytic = grad_at(&grads, li, p);
                let denom = numeric.abs().max(analytic.abs()).max(1e-6);
                assert!(
                    (numeric - analytic).abs() / denom < 1e-4,
                    "layer {li} param {p}: numeric {numeric} vs analytic {analytic}"
                );
            }
        }
    }

    fn layer_at(net: &NetworkWeights, idx: usize) -> &Layer {
        let nb = net.branches().len();
        if idx < nb {
            &net.branches()[idx]
        } else {
            &net.trunk()[idx - nb]
        }
    }

    fn perturb(net: &mut NetworkWeights, idx: usize, param: usize, delta: f64) {
        let nb = net.branches().len();
        let layer = if idx < nb {
            &mut net.branches_mut()[idx]
        } else {
            &mut net.trunk_mut()[idx - nb]
        };
        let nw = layer.w.len();
        if param < nw {
            layer.w[param] += delta;
        } else {
            layer.b[param - nw] += delta;
        }
    }

    fn grad_at(grads: &Gradients, idx: usize, param: usize) -> f64 {
        let nb = grads.branches.len();
        let layer = if idx < nb {
            &grads.branches[idx]
        } else {
            &grads.trunk[idx - nb]
        };
        let nw = layer.w.len();
        if param < nw {
            layer.w[param]
        } else {
            layer.b[param - nw]
        }
    }

    #[test]
    fn predictions_on_training_samples_track_targets() {
        let spec = NetworkSpec {
            epochs: 300,
            ..NetworkSpec::standard(DofMask::HEAVE, Target::WaveHeight)
        };
        let data = toy_samples(&spec, 50, 13);
        let (net, history) = train(&spec, &data, &[], 17).unwrap();
        let rmse_scaled = history.last().unwrap().train_mse.sqrt();
        let rmse_physical = rmse_scaled * net.scaling().target_std;
        let mut within = 0usize;
        for s in &data {
            let fv = FeatureVector::from_parts(DofMask::HEAVE, 30, s.features.clone()).unwrap();
            let err = (predict(&net, &fv).unwrap() - s.target).abs();
            if err <= 3.0 * rmse_physical.max(1e-9) {
                within += 1;
            }
        }
        assert!(
            within * 100 >= data.len() * 99,
            "{within}/{} within 3 RMSE",
            data.len()
        );
    }
}
