//! Branch/trunk multilayer perceptrons for wave property regression.
//!
//! Each DOF's top-K spectral ordinates and frequencies feed a 16-node branch
//! layer; the branch outputs join the per-DOF total powers and the vessel
//! speed in the trunk, which passes through ReLU hidden layers into a single
//! linear output node. Training runs mini-batch Adam on a mean-square-error
//! loss; everything is 64-bit and deterministic per seed.

mod persist;
mod train;

pub use train::{train, EpochStats, Sample};

use crate::spectral::{DofMask, FeatureVector, K_HEADING, K_HEIGHT_PERIOD};
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Branch hidden layer width shared by every configuration.
pub const BRANCH_WIDTH: usize = 16;

/// Training epochs for the campaign configurations.
pub const EPOCHS: usize = 100;

/// Adam learning rate for the campaign configurations.
pub const LEARNING_RATE: f64 = 0.001;

/// The wave property a network estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Target {
    /// Significant wave height (m).
    WaveHeight,
    /// Mean wave period (s).
    WavePeriod,
    /// Relative wave heading (degrees).
    WaveHeading,
}

impl Target {
    pub const ALL: [Target; 3] = [Target::WaveHeight, Target::WavePeriod, Target::WaveHeading];

    /// Short name used in cell identifiers and report rows.
    pub fn name(self) -> &'static str {
        match self {
            Target::WaveHeight => "hs",
            Target::WavePeriod => "t1",
            Target::WaveHeading => "mu",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            Target::WaveHeight => "m",
            Target::WavePeriod => "s",
            Target::WaveHeading => "deg",
        }
    }

    /// Top-ordinate count feeding this estimator.
    pub fn k(self) -> usize {
        match self {
            Target::WaveHeight | Target::WavePeriod => K_HEIGHT_PERIOD,
            Target::WaveHeading => K_HEADING,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hs" => Ok(Target::WaveHeight),
            "t1" => Ok(Target::WavePeriod),
            "mu" => Ok(Target::WaveHeading),
            other => Err(Error::domain(format!("unknown target '{other}'"))),
        }
    }

    pub(crate) fn tag(self) -> u8 {
        match self {
            Target::WaveHeight => 0,
            Target::WavePeriod => 1,
            Target::WaveHeading => 2,
        }
    }

    pub(crate) fn from_tag(tag: u8) -> Result<Self> {
        match tag {
            0 => Ok(Target::WaveHeight),
            1 => Ok(Target::WavePeriod),
            2 => Ok(Target::WaveHeading),
            other => Err(Error::domain(format!("unknown target tag {other}"))),
        }
    }
}

/// Topology and training hyper-parameters of one estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    pub mask: DofMask,
    pub target: Target,
    /// Top ordinates (and frequencies) per DOF branch.
    pub k: usize,
    /// Nodes in each DOF's single branch hidden layer.
    pub branch_width: usize,
    /// Trunk hidden layer widths (the linear output node is implicit).
    pub trunk: Vec<usize>,
    pub batch_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
}

impl NetworkSpec {
    /// The published configuration for a (DOF set, target) cell.
    ///
    /// Height/period estimators share one table of trunk shapes and batch
    /// sizes; heading estimators use a wider alternative.
    pub fn standard(mask: DofMask, target: Target) -> Self {
        let dofs = mask.count();
        let (trunk, batch_size): (Vec<usize>, usize) = match target {
            Target::WaveHeight | Target::WavePeriod => match dofs {
                1 => (vec![16, 8], 32),
                2 => (vec![16, 8, 8], 16),
                _ => (vec![32, 32, 16], 16),
            },
            Target::WaveHeading => match dofs {
                1 => (vec![32, 16], 16),
                _ => (vec![32, 32, 16], 32),
            },
        };
        NetworkSpec {
            mask,
            target,
            k: target.k(),
            branch_width: BRANCH_WIDTH,
            trunk,
            batch_size,
            epochs: EPOCHS,
            learning_rate: LEARNING_RATE,
        }
    }

    /// Raw feature vector width this spec consumes.
    pub fn feature_width(&self) -> usize {
        FeatureVector::width(self.mask, self.k)
    }

    /// Width of each branch's input block (ordinates + frequencies).
    pub fn branch_input_width(&self) -> usize {
        2 * self.k
    }

    /// Width of the trunk input: branch outputs, per-DOF total powers, speed.
    pub fn trunk_input_width(&self) -> usize {
        self.mask.count() * (self.branch_width + 1) + 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0
            || self.branch_width == 0
            || self.trunk.iter().any(|&n| n == 0)
            || self.batch_size == 0
            || !(self.learning_rate > 0.0)
        {
            return Err(Error::domain("network spec has a non-positive dimension"));
        }
        Ok(())
    }

    /// Cell identifier like `3dof:hs` or `heave+pitch:mu`.
    pub fn cell_name(&self) -> String {
        format!("{}:{}", self.mask.name(), self.target.name())
    }
}

/// One dense layer, row-major `rows × cols` weights plus a bias per row.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Layer {
    pub rows: usize,
    pub cols: usize,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

impl Layer {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Layer {
            rows,
            cols,
            w: vec![0.0; rows * cols],
            b: vec![0.0; rows],
        }
    }

    fn glorot(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Self {
        let bound = (6.0 / (rows + cols) as f64).sqrt();
        Layer {
            rows,
            cols,
            w: (0..rows * cols).map(|_| rng.gen_range(-bound..bound)).collect(),
            b: vec![0.0; rows],
        }
    }

    /// `out = W x + b`.
    pub fn affine(&self, x: &[f64], out: &mut Vec<f64>) {
        debug_assert_eq!(x.len(), self.cols);
        out.clear();
        for r in 0..self.rows {
            let row = &self.w[r * self.cols..(r + 1) * self.cols];
            let dot: f64 = row.iter().zip(x).map(|(w, v)| w * v).sum();
            out.push(dot + self.b[r]);
        }
    }

    pub fn param_count(&self) -> usize {
        self.w.len() + self.b.len()
    }
}

fn relu(pre: &[f64]) -> Vec<f64> {
    // Written so NaN propagates instead of being clamped; a poisoned input
    // must surface as a non-finite loss, not silently zero out.
    pre.iter()
        .map(|&v| if v > 0.0 { v } else { v * 0.0 })
        .collect()
}

/// Per-feature standardization constants plus the target transform.
#[derive(Debug, Clone, PartialEq)]
pub struct Scaling {
    pub feature_mean: Vec<f64>,
    pub feature_std: Vec<f64>,
    pub target_mean: f64,
    pub target_std: f64,
}

impl Scaling {
    pub fn identity(width: usize) -> Self {
        Scaling {
            feature_mean: vec![0.0; width],
            feature_std: vec![1.0; width],
            target_mean: 0.0,
            target_std: 1.0,
        }
    }

    /// Fits means and standard deviations on a training split. Near-constant
    /// features keep a unit scale so standardization never divides by zero.
    pub fn fit(samples: &[Sample]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::domain("cannot fit scaling on an empty split"));
        }
        let width = samples[0].features.len();
        let n = samples.len() as f64;
        let mut mean = vec![0.0; width];
        for s in samples {
            for (m, v) in mean.iter_mut().zip(&s.features) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= n;
        }
        let mut std = vec![0.0; width];
        for s in samples {
            for ((sd, v), m) in std.iter_mut().zip(&s.features).zip(&mean) {
                *sd += (v - m) * (v - m);
            }
        }
        for sd in &mut std {
            *sd = (*sd / n).sqrt();
            if *sd < 1e-12 {
                *sd = 1.0;
            }
        }
        let target_mean = samples.iter().map(|s| s.target).sum::<f64>() / n;
        let mut target_std = (samples
            .iter()
            .map(|s| (s.target - target_mean).powi(2))
            .sum::<f64>()
            / n)
            .sqrt();
        if target_std < 1e-12 {
            target_std = 1.0;
        }
        Ok(Scaling {
            feature_mean: mean,
            feature_std: std,
            target_mean,
            target_std,
        })
    }

    pub fn standardize(&self, raw: &[f64]) -> Vec<f64> {
        raw.iter()
            .zip(&self.feature_mean)
            .zip(&self.feature_std)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }

    pub fn standardize_target(&self, y: f64) -> f64 {
        (y - self.target_mean) / self.target_std
    }

    pub fn destandardize_target(&self, y: f64) -> f64 {
        y * self.target_std + self.target_mean
    }
}

/// Metadata recorded with trained parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainingMeta {
    pub seed: u64,
    pub epochs_run: usize,
    /// Final running train MSE in standardized target units.
    pub final_train_mse: f64,
}

/// Trained (or freshly initialized) network parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkWeights {
    spec: NetworkSpec,
    branches: Vec<Layer>,
    trunk: Vec<Layer>,
    scaling: Scaling,
    meta: TrainingMeta,
}

/// Intermediate activations of one forward pass, kept for backpropagation.
pub(crate) struct Trace {
    pub branch_pre: Vec<Vec<f64>>,
    pub trunk_in: Vec<f64>,
    pub trunk_pre: Vec<Vec<f64>>,
    pub trunk_act: Vec<Vec<f64>>,
    pub output: f64,
}

impl NetworkWeights {
    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn scaling(&self) -> &Scaling {
        &self.scaling
    }

    pub fn meta(&self) -> &TrainingMeta {
        &self.meta
    }

    pub(crate) fn set_scaling(&mut self, scaling: Scaling) {
        self.scaling = scaling;
    }

    pub(crate) fn set_meta(&mut self, meta: TrainingMeta) {
        self.meta = meta;
    }

    pub(crate) fn branches_mut(&mut self) -> &mut Vec<Layer> {
        &mut self.branches
    }

    pub(crate) fn trunk_mut(&mut self) -> &mut Vec<Layer> {
        &mut self.trunk
    }

    pub(crate) fn branches(&self) -> &[Layer] {
        &self.branches
    }

    pub(crate) fn trunk(&self) -> &[Layer] {
        &self.trunk
    }

    pub fn param_count(&self) -> usize {
        self.branches
            .iter()
            .chain(&self.trunk)
            .map(Layer::param_count)
            .sum()
    }

    pub fn all_finite(&self) -> bool {
        self.branches
            .iter()
            .chain(&self.trunk)
            .all(|l| l.w.iter().chain(&l.b).all(|v| v.is_finite()))
    }

    /// Runs the network on an unscaled input vector of spec width.
    pub(crate) fn run(&self, x: &[f64]) -> Trace {
        let k2 = self.spec.branch_input_width();
        let block = k2 + 1;
        let dofs = self.spec.mask.count();
        let mut branch_pre = Vec::with_capacity(dofs);
        let mut trunk_in = Vec::with_capacity(self.spec.trunk_input_width());
        for (p, layer) in self.branches.iter().enumerate() {
            let mut pre = Vec::with_capacity(layer.rows);
            layer.affine(&x[p * block..p * block + k2], &mut pre);
            trunk_in.extend_from_slice(&relu(&pre));
            branch_pre.push(pre);
        }
        for p in 0..dofs {
            trunk_in.push(x[p * block + k2]);
        }
        trunk_in.push(*x.last().expect("input is non-empty"));

        let mut trunk_pre = Vec::with_capacity(self.trunk.len());
        let mut trunk_act = Vec::with_capacity(self.trunk.len());
        let last = self.trunk.len() - 1;
        let mut current = trunk_in.clone();
        for (i, layer) in self.trunk.iter().enumerate() {
            let mut pre = Vec::with_capacity(layer.rows);
            layer.affine(&current, &mut pre);
            let act = if i == last { pre.clone() } else { relu(&pre) };
            current = act.clone();
            trunk_pre.push(pre);
            trunk_act.push(act);
        }
        let output = current[0];
        Trace {
            branch_pre,
            trunk_in,
            trunk_pre,
            trunk_act,
            output,
        }
    }

    fn check_features(&self, features: &FeatureVector) -> Result<()> {
        if features.mask() != self.spec.mask || features.k() != self.spec.k {
            return Err(Error::domain(format!(
                "feature layout ({}, k={}) does not match network ({}, k={})",
                features.mask().name(),
                features.k(),
                self.spec.mask.name(),
                self.spec.k
            )));
        }
        if features.len() != self.spec.feature_width() {
            return Err(Error::domain(format!(
                "feature width {} does not match network input {}",
                features.len(),
                self.spec.feature_width()
            )));
        }
        Ok(())
    }

    /// Serializes to the versioned binary model format.
    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        persist::save(self, path)
    }

    /// Loads a model file, checking magic bytes and version.
    pub fn load(path: &std::path::Path) -> Result<Self> {
        persist::load(path)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        persist::to_bytes(self)
    }

    pub fn from_bytes(bytes: &[u8], origin: &str) -> Result<Self> {
        persist::from_bytes(bytes, origin)
    }
}

/// Initializes a network with fan-in-scaled uniform weights and zero biases.
pub fn init_network(spec: &NetworkSpec, seed: u64) -> Result<NetworkWeights> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut branches = Vec::with_capacity(spec.mask.count());
    for _ in 0..spec.mask.count() {
        branches.push(Layer::glorot(
            spec.branch_width,
            spec.branch_input_width(),
            &mut rng,
        ));
    }
    let mut trunk = Vec::with_capacity(spec.trunk.len() + 1);
    let mut input = spec.trunk_input_width();
    for &width in &spec.trunk {
        trunk.push(Layer::glorot(width, input, &mut rng));
        input = width;
    }
    trunk.push(Layer::glorot(1, input, &mut rng));
    let width = spec.feature_width();
    Ok(NetworkWeights {
        spec: spec.clone(),
        branches,
        trunk,
        scaling: Scaling::identity(width),
        meta: TrainingMeta {
            seed,
            epochs_run: 0,
            final_train_mse: 0.0,
        },
    })
}

/// Evaluates the network on a feature vector without any scaling.
pub fn forward(weights: &NetworkWeights, features: &FeatureVector) -> Result<f64> {
    weights.check_features(features)?;
    Ok(weights.run(features.values()).output)
}

/// Applies the stored feature scaling, runs the network, and returns the
/// estimate in physical units.
pub fn predict(weights: &NetworkWeights, features: &FeatureVector) -> Result<f64> {
    weights.check_features(features)?;
    let scaled = weights.scaling.standardize(features.values());
    let out = weights.run(&scaled).output;
    Ok(weights.scaling.destandardize_target(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::DofMask;

    #[test]
    fn standard_configurations_match_published_tables() {
        let hs1 = NetworkSpec::standard(DofMask::HEAVE, Target::WaveHeight);
        assert_eq!(hs1.trunk, vec![16, 8]);
        assert_eq!(hs1.batch_size, 32);
        assert_eq!(hs1.k, 30);
        let t12 = NetworkSpec::standard(DofMask::parse("heave+pitch").unwrap(), Target::WavePeriod);
        assert_eq!(t12.trunk, vec![16, 8, 8]);
        assert_eq!(t12.batch_size, 16);
        let hs3 = NetworkSpec::standard(DofMask::ALL, Target::WaveHeight);
        assert_eq!(hs3.trunk, vec![32, 32, 16]);
        assert_eq!(hs3.batch_size, 16);
        let mu1 = NetworkSpec::standard(DofMask::PITCH, Target::WaveHeading);
        assert_eq!(mu1.trunk, vec![32, 16]);
        assert_eq!(mu1.batch_size, 16);
        assert_eq!(mu1.k, 80);
        let mu3 = NetworkSpec::standard(DofMask::ALL, Target::WaveHeading);
        assert_eq!(mu3.trunk, vec![32, 32, 16]);
        assert_eq!(mu3.batch_size, 32);
        for mask in DofMask::COMBINATIONS {
            for target in Target::ALL {
                let spec = NetworkSpec::standard(mask, target);
                assert_eq!(spec.epochs, 100);
                assert!((spec.learning_rate - 0.001).abs() < 1e-15);
                assert_eq!(spec.branch_width, 16);
            }
        }
    }

    #[test]
    fn wiring_widths_from_network_diagram() {
        let spec = NetworkSpec::standard(DofMask::HEAVE, Target::WaveHeight);
        assert_eq!(spec.branch_input_width(), 60);
        assert_eq!(spec.trunk_input_width(), 18);
        assert_eq!(spec.feature_width(), 62);
        let mu3 = NetworkSpec::standard(DofMask::ALL, Target::WaveHeading);
        assert_eq!(mu3.feature_width(), 484);
        assert_eq!(mu3.trunk_input_width(), 52);
    }

    #[test]
    fn init_is_deterministic_and_bounded() {
        let spec = NetworkSpec::standard(DofMask::ALL, Target::WaveHeight);
        let a = init_network(&spec, 7).unwrap();
        let b = init_network(&spec, 7).unwrap();
        assert_eq!(a, b);
        let c = init_network(&spec, 8).unwrap();
        assert_ne!(a, c);
        for layer in a.branches().iter().chain(a.trunk()) {
            let bound = (6.0 / (layer.rows + layer.cols) as f64).sqrt();
            assert!(layer.w.iter().all(|v| v.abs() <= bound));
            assert!(layer.b.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn single_perceptron_hand_evaluation() {
        // w = [1, −2], b = 0.5, x = [2, 1] under ReLU: max(0, 2 − 2 + 0.5).
        let layer = Layer {
            rows: 1,
            cols: 2,
            w: vec![1.0, -2.0],
            b: vec![0.5],
        };
        let mut pre = Vec::new();
        layer.affine(&[2.0, 1.0], &mut pre);
        assert_eq!(relu(&pre)[0], 0.5);
        let mut neg = Vec::new();
        layer.affine(&[0.0, 1.0], &mut neg);
        assert_eq!(relu(&neg)[0], 0.0);
    }

    #[test]
    fn zero_weights_give_zero_output() {
        let spec = NetworkSpec::standard(DofMask::HEAVE, Target::WaveHeight);
        let mut net = init_network(&spec, 1).unwrap();
        for layer in net.branches_mut().iter_mut() {
            layer.w.iter_mut().for_each(|v| *v = 0.0);
        }
        for layer in net.trunk_mut().iter_mut() {
            layer.w.iter_mut().for_each(|v| *v = 0.0);
        }
        let x: Vec<f64> = (0..spec.feature_width()).map(|i| i as f64).collect();
        assert_eq!(net.run(&x).output, 0.0);
    }

    #[test]
    fn three_dof_heading_network_accepts_full_width() {
        let spec = NetworkSpec::standard(DofMask::ALL, Target::WaveHeading);
        let net = init_network(&spec, 3).unwrap();
        let x = vec![0.25; 484];
        let out = net.run(&x).output;
        assert!(out.is_finite());
    }

    #[test]
    fn hidden_activations_are_non_negative() {
        let spec = NetworkSpec::standard(DofMask::ALL, Target::WavePeriod);
        let net = init_network(&spec, 5).unwrap();
        let x: Vec<f64> = (0..spec.feature_width())
            .map(|i| ((i * 37 % 11) as f64 - 5.0) * 0.3)
            .collect();
        let trace = net.run(&x);
        let branch_act = &trace.trunk_in[..spec.mask.count() * spec.branch_width];
        assert!(branch_act.iter().all(|&v| v >= 0.0));
        for act in &trace.trunk_act[..spec.trunk.len()] {
            assert!(act.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn forward_rejects_mismatched_features() {
        use crate::spectral::FeatureVector;
        let spec = NetworkSpec::standard(DofMask::HEAVE, Target::WaveHeight);
        let net = init_network(&spec, 2).unwrap();
        let wrong =
            FeatureVector::from_parts(DofMask::PITCH, 30, vec![0.0; 62]).unwrap();
        assert!(forward(&net, &wrong).is_err());
        let wrong_k =
            FeatureVector::from_parts(DofMask::HEAVE, 80, vec![0.0; 162]).unwrap();
        assert!(forward(&net, &wrong_k).is_err());
    }

    #[test]
    fn permuting_features_changes_the_output() {
        // The fixed feature ordering is part of the model contract.
        let spec = NetworkSpec::standard(DofMask::HEAVE, Target::WaveHeight);
        let net = init_network(&spec, 9).unwrap();
        let x: Vec<f64> = (0..spec.feature_width()).map(|i| (i as f64).sin()).collect();
        let mut shuffled = x.clone();
        shuffled.swap(0, 45);
        shuffled.swap(3, 17);
        assert_ne!(net.run(&x).output, net.run(&shuffled).output);
    }

    #[test]
    fn scaling_identity_on_training_mean() {
        let samples = vec![
            Sample {
                features: vec![1.0, 4.0],
                target: 2.0,
            },
            Sample {
                features: vec![3.0, 8.0],
                target: 6.0,
            },
        ];
        let scaling = Scaling::fit(&samples).unwrap();
        let at_mean = scaling.standardize(&[2.0, 6.0]);
        assert!(at_mean.iter().all(|&v| v.abs() < 1e-12));
        let y = scaling.destandardize_target(scaling.standardize_target(5.5));
        assert!((y - 5.5).abs() < 1e-12);
    }

    #[test]
    fn scaling_guards_constant_features() {
        let samples = vec![
            Sample {
                features: vec![2.0, 1.0],
                target: 0.0,
            },
            Sample {
                features: vec![2.0, 3.0],
                target: 1.0,
            },
        ];
        let scaling = Scaling::fit(&samples).unwrap();
        assert_eq!(scaling.feature_std[0], 1.0);
        assert!(scaling.standardize(&[2.0, 2.0])[0].abs() < 1e-12);
    }
}
