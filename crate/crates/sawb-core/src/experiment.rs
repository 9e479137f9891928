//! Campaign generation, splits, cross-validation, metrics, and the
//! component study.
//!
//! Scenario parameters are drawn uniformly from the campaign ranges, each
//! scenario is simulated and featurized independently (and in parallel), and
//! estimator cells — one per (DOF set, wave property) — are trained with
//! 5-fold cross-validation on the pool that remains after a 10% test split.
//! Reported metrics cover both the fold validations and the held-out test
//! split; canonical test residuals come from the fold with the lowest
//! validation RMSE.

use crate::dataset::{Dataset, DatasetRecord, Manifest};
use crate::neural::{predict, train, NetworkSpec, NetworkWeights, Sample, Target};
use crate::simulate::{
    add_sensor_noise_with, simulate_response, NoiseSigmas, Scenario, SeaState,
    SIM_DURATION, SIM_SAMPLES,
};
use crate::spectral::{
    build_features, welch_psd, DofMask, WelchPolicy, K_HEADING, K_HEIGHT_PERIOD,
};
use crate::vessel::{roll_geometry, Dof, VesselParams};
use crate::wave::{GRID_COMPONENTS, GRID_OMEGA_MAX, GRID_OMEGA_MIN};
use crate::{mix_seed, Error, Result};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::BTreeMap;

/// Campaign sampling ranges.
pub const H_S_RANGE: (f64, f64) = (0.5, 2.5);
pub const T_1_RANGE: (f64, f64) = (4.0, 13.0);
pub const MU_H_RANGE: (f64, f64) = (0.0, 180.0);
pub const SPEED_RANGE: (f64, f64) = (0.0, 5.0);

/// Test split fraction and fold count.
pub const TEST_FRACTION: f64 = 0.10;
pub const FOLDS: usize = 5;

const SEED_OFFSET_SCENARIOS: u64 = 201;
const SEED_OFFSET_SPLIT: u64 = 202;
const SEED_OFFSET_CELL: u64 = 203;

/// Draws n scenarios with independent uniform parameters and per-scenario
/// seeds.
pub fn sample_scenarios(n: usize, seed: u64) -> Vec<Scenario> {
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, SEED_OFFSET_SCENARIOS));
    (0..n)
        .map(|_| {
            let h_s = rng.gen_range(H_S_RANGE.0..H_S_RANGE.1);
            let t_1 = rng.gen_range(T_1_RANGE.0..T_1_RANGE.1);
            let mu_h_deg = rng.gen_range(MU_H_RANGE.0..MU_H_RANGE.1);
            let speed = rng.gen_range(SPEED_RANGE.0..SPEED_RANGE.1);
            let scenario_seed = rng.next_u64();
            Scenario {
                sea: SeaState { h_s, t_1, mu_h_deg },
                speed,
                seed: scenario_seed,
            }
        })
        .collect()
}

/// Simulates and featurizes one scenario.
pub fn build_record(
    vessel: &VesselParams,
    scenario: &Scenario,
    noise: NoiseSigmas,
) -> Result<DatasetRecord> {
    let clean = simulate_response(vessel, scenario)?;
    let noisy = add_sensor_noise_with(&clean, noise, scenario.seed);
    let mut psds = BTreeMap::new();
    for dof in Dof::ALL {
        psds.insert(dof, welch_psd(noisy.series(dof), noisy.dt, dof)?);
    }
    Ok(DatasetRecord {
        scenario: *scenario,
        features_k30: build_features(&psds, scenario.speed, DofMask::ALL, K_HEIGHT_PERIOD)?,
        features_k80: build_features(&psds, scenario.speed, DofMask::ALL, K_HEADING)?,
    })
}

fn campaign_manifest(vessel: &VesselParams, n: usize, seed: u64, noise: NoiseSigmas) -> Manifest {
    let mut m = Manifest::new();
    m.set("format", "sawb-run");
    m.set("format_version", 1);
    m.set("code_version", env!("CARGO_PKG_VERSION"));
    m.set("n", n);
    m.set("master_seed", seed);
    m.set("h_s_min", H_S_RANGE.0);
    m.set("h_s_max", H_S_RANGE.1);
    m.set("t_1_min", T_1_RANGE.0);
    m.set("t_1_max", T_1_RANGE.1);
    m.set("mu_h_min", MU_H_RANGE.0);
    m.set("mu_h_max", MU_H_RANGE.1);
    m.set("speed_min", SPEED_RANGE.0);
    m.set("speed_max", SPEED_RANGE.1);
    m.set("grid_omega_min", GRID_OMEGA_MIN);
    m.set("grid_omega_max", GRID_OMEGA_MAX);
    m.set("grid_components", GRID_COMPONENTS);
    m.set("sim_samples", SIM_SAMPLES);
    m.set("sim_duration_s", SIM_DURATION);
    m.set("noise_heave_m", noise.heave_m);
    m.set("noise_pitch_rad", noise.pitch_rad);
    m.set("noise_roll_rad", noise.roll_rad);
    m.set("k_height_period", K_HEIGHT_PERIOD);
    m.set("k_heading", K_HEADING);
    m.set("vessel_length", vessel.length);
    m.set("vessel_breadth", vessel.breadth);
    m.set("vessel_draught", vessel.draught);
    m.set("vessel_c_wp", vessel.c_wp);
    m.set("vessel_c_b", vessel.c_b);
    m.set("vessel_displacement", vessel.displacement);
    m.set("vessel_gm_t", vessel.gm_t);
    if let Ok(g) = roll_geometry(vessel) {
        m.set("roll_breadth_ratio", g.breadth_ratio);
        m.set("roll_fore_length", g.fore_length);
        m.set("roll_aft_length", g.aft_length);
        m.set("roll_prism_draught", g.draught);
        m.set("roll_natural_period", g.natural_period);
    }
    for dof in Dof::ALL {
        let policy = WelchPolicy::for_dof(dof);
        m.set(&format!("welch_{}_segment", dof.name()), policy.segment_len);
        m.set(&format!("welch_{}_hop", dof.name()), policy.hop);
        m.set(
            &format!("welch_{}_segments", dof.name()),
            policy.segments(SIM_SAMPLES),
        );
        m.set(
            &format!("welch_{}_overlap", dof.name()),
            policy.overlap_fraction(),
        );
    }
    // The published pitch setting is 80%; 13 integer-sized windows over 8192
    // samples land on 75%, recorded here alongside the nominal value.
    m.set("welch_pitch_overlap_nominal", 0.8);
    m
}

/// Generates the dataset: spectrum → realization → responses → noise →
/// Welch PSDs → features, per scenario, deterministic regardless of the
/// worker count.
pub fn generate_dataset(n: usize, seed: u64, parallelism: usize) -> Result<Dataset> {
    generate_dataset_with(&VesselParams::default(), n, seed, parallelism, NoiseSigmas::imu())
}

/// As [`generate_dataset`] with explicit vessel parameters and noise levels.
pub fn generate_dataset_with(
    vessel: &VesselParams,
    n: usize,
    seed: u64,
    parallelism: usize,
    noise: NoiseSigmas,
) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::domain("campaign size must be at least 1"));
    }
    let scenarios = sample_scenarios(n, seed);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| Error::domain(format!("failed to build worker pool: {e}")))?;
    let results: Vec<Result<DatasetRecord>> = pool.install(|| {
        scenarios
            .par_iter()
            .map(|sc| build_record(vessel, sc, noise))
            .collect()
    });
    let mut records = Vec::with_capacity(n);
    for (i, r) in results.into_iter().enumerate() {
        records.push(r.map_err(|e| Error::domain(format!("scenario {i} failed: {e}")))?);
    }
    Ok(Dataset {
        records,
        manifest: campaign_manifest(vessel, n, seed, noise),
    })
}

/// Regenerates a dataset from its manifest alone.
pub fn regenerate_from_manifest(manifest: &Manifest, parallelism: usize) -> Result<Dataset> {
    let n: usize = manifest.get_parsed("n")?;
    let seed: u64 = manifest.get_parsed("master_seed")?;
    let vessel = VesselParams::new(
        manifest.get_parsed("vessel_length")?,
        manifest.get_parsed("vessel_breadth")?,
        manifest.get_parsed("vessel_draught")?,
        manifest.get_parsed("vessel_c_wp")?,
        manifest.get_parsed("vessel_c_b")?,
        manifest.get_parsed("vessel_displacement")?,
        manifest.get_parsed("vessel_gm_t")?,
    )?;
    let noise = NoiseSigmas {
        heave_m: manifest.get_parsed("noise_heave_m")?,
        pitch_rad: manifest.get_parsed("noise_pitch_rad")?,
        roll_rad: manifest.get_parsed("noise_roll_rad")?,
    };
    let grid_components: usize = manifest.get_parsed("grid_components")?;
    if grid_components != GRID_COMPONENTS {
        return Err(Error::domain(format!(
            "manifest grid ({grid_components} components) does not match this build"
        )));
    }
    generate_dataset_with(&vessel, n, seed, parallelism, noise)
}

/// Index partition: a held-out test split and validation folds over the
/// remaining pool. Each pool index appears in exactly one fold.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitPlan {
    pub test: Vec<usize>,
    pub folds: Vec<Vec<usize>>,
}

impl SplitPlan {
    /// Training indices for one fold: the pool minus that fold.
    pub fn train_of(&self, fold: usize) -> Vec<usize> {
        self.folds
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != fold)
            .flat_map(|(_, f)| f.iter().copied())
            .collect()
    }

    pub fn pool_size(&self) -> usize {
        self.folds.iter().map(Vec::len).sum()
    }
}

/// Plans the 10% test split and 5 cross-validation folds for `n` records.
///
/// The test split takes `floor(0.10 n)`; fold sizes differ by at most one
/// with the larger folds first.
pub fn split_and_fold(n: usize, seed: u64) -> Result<SplitPlan> {
    if n < 10 {
        return Err(Error::domain(format!(
            "need at least 10 records to split, got {n}"
        )));
    }
    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, SEED_OFFSET_SPLIT));
    use rand::seq::SliceRandom;
    indices.shuffle(&mut rng);
    let test_len = (TEST_FRACTION * n as f64).floor() as usize;
    let test = indices[..test_len].to_vec();
    let pool = &indices[test_len..];
    let base = pool.len() / FOLDS;
    let extra = pool.len() % FOLDS;
    let mut folds = Vec::with_capacity(FOLDS);
    let mut start = 0usize;
    for f in 0..FOLDS {
        let size = base + usize::from(f < extra);
        folds.push(pool[start..start + size].to_vec());
        start += size;
    }
    Ok(SplitPlan { test, folds })
}

/// Root mean square error `sqrt(Σ (truth − estimate)² / N)`.
pub fn rmse(estimates: &[f64], truths: &[f64]) -> Result<f64> {
    if estimates.is_empty() || estimates.len() != truths.len() {
        return Err(Error::domain(format!(
            "rmse needs equal non-empty inputs, got {} and {}",
            estimates.len(),
            truths.len()
        )));
    }
    let sum: f64 = estimates
        .iter()
        .zip(truths)
        .map(|(e, t)| (t - e) * (t - e))
        .sum();
    Ok((sum / estimates.len() as f64).sqrt())
}

/// Coefficient of determination `1 − SS_res/SS_tot`.
pub fn r_squared(estimates: &[f64], truths: &[f64]) -> Result<f64> {
    if estimates.len() != truths.len() || truths.len() < 2 {
        return Err(Error::domain(
            "r_squared needs equal inputs of length at least 2".to_string(),
        ));
    }
    let mean = truths.iter().sum::<f64>() / truths.len() as f64;
    let ss_tot: f64 = truths.iter().map(|t| (t - mean) * (t - mean)).sum();
    if ss_tot == 0.0 {
        return Err(Error::domain(
            "r_squared is undefined for identical truths".to_string(),
        ));
    }
    let ss_res: f64 = estimates
        .iter()
        .zip(truths)
        .map(|(e, t)| (t - e) * (t - e))
        .sum();
    Ok(1.0 - ss_res / ss_tot)
}

fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // Average rank across ties.
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            out[idx] = rank;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.len() < 3 {
        return Err(Error::domain(
            "spearman needs equal inputs of length at least 3".to_string(),
        ));
    }
    let ra = ranks(a);
    let rb = ranks(b);
    let n = a.len() as f64;
    let ma = ra.iter().sum::<f64>() / n;
    let mb = rb.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in ra.iter().zip(&rb) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    if va == 0.0 || vb == 0.0 {
        return Err(Error::domain(
            "spearman is undefined for constant inputs".to_string(),
        ));
    }
    Ok(cov / (va * vb).sqrt())
}

/// Metrics of one cross-validation fold, all in physical units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoldOutcome {
    pub fold: usize,
    pub val_rmse: f64,
    pub val_r2: f64,
    pub test_rmse: f64,
    pub test_r2: f64,
}

/// Trained cell: one (DOF set, target) pair across all folds.
#[derive(Debug, Clone)]
pub struct CellResult {
    pub mask: DofMask,
    pub target: Target,
    pub folds: Vec<FoldOutcome>,
    /// Fold with the lowest validation RMSE; its model is the cell's
    /// canonical estimator.
    pub best_fold: usize,
    /// Canonical model's estimates on the test split, index-aligned with
    /// `EvalReport::test_indices`.
    pub test_estimates: Vec<f64>,
    pub test_truths: Vec<f64>,
    /// Canonical model weights (best validation fold).
    pub weights: NetworkWeights,
}

impl CellResult {
    pub fn cell_name(&self) -> String {
        format!("{}:{}", self.mask.name(), self.target.name())
    }

    pub fn val_rmse_mean(&self) -> f64 {
        self.folds.iter().map(|f| f.val_rmse).sum::<f64>() / self.folds.len() as f64
    }

    /// Sample standard deviation of the validation RMSE across folds.
    pub fn val_rmse_std(&self) -> f64 {
        let mean = self.val_rmse_mean();
        let n = self.folds.len() as f64;
        (self
            .folds
            .iter()
            .map(|f| (f.val_rmse - mean) * (f.val_rmse - mean))
            .sum::<f64>()
            / (n - 1.0))
            .sqrt()
    }

    pub fn val_r2_mean(&self) -> f64 {
        self.folds.iter().map(|f| f.val_r2).sum::<f64>() / self.folds.len() as f64
    }

    pub fn test_rmse_mean(&self) -> f64 {
        self.folds.iter().map(|f| f.test_rmse).sum::<f64>() / self.folds.len() as f64
    }

    /// Test RMSE of the canonical (best validation) model.
    pub fn test_rmse(&self) -> f64 {
        self.folds[self.best_fold].test_rmse
    }

    pub fn test_r2(&self) -> f64 {
        self.folds[self.best_fold].test_r2
    }

    /// Signed residuals (estimate − truth) on the test split.
    pub fn test_residuals(&self) -> Vec<f64> {
        self.test_estimates
            .iter()
            .zip(&self.test_truths)
            .map(|(e, t)| e - t)
            .collect()
    }
}

/// Study output: trained cells plus the split that produced them.
#[derive(Debug, Clone)]
pub struct EvalReport {
    pub cells: Vec<CellResult>,
    pub split: SplitPlan,
}

impl EvalReport {
    pub fn cell(&self, mask: DofMask, target: Target) -> Option<&CellResult> {
        self.cells
            .iter()
            .find(|c| c.mask == mask && c.target == target)
    }

    pub fn test_indices(&self) -> &[usize] {
        &self.split.test
    }
}

/// Study execution knobs.
#[derive(Debug, Clone, Copy)]
pub struct StudyConfig {
    pub master_seed: u64,
    pub parallelism: usize,
    /// Test-only override of the per-spec epoch count.
    pub epochs_override: Option<usize>,
}

impl StudyConfig {
    pub fn new(master_seed: u64, parallelism: usize) -> Self {
        StudyConfig {
            master_seed,
            parallelism,
            epochs_override: None,
        }
    }
}

fn cell_seed(master: u64, mask: DofMask, target: Target, fold: usize) -> u64 {
    let tag = ((mask.bits() as u64) << 16) | ((target.tag() as u64) << 8) | fold as u64;
    mix_seed(mix_seed(master, SEED_OFFSET_CELL), tag)
}

fn cell_samples(dataset: &Dataset, indices: &[usize], mask: DofMask, target: Target) -> Vec<Sample> {
    indices
        .iter()
        .map(|&i| {
            let record = &dataset.records[i];
            let features = record
                .features_for(target)
                .select(mask)
                .expect("dataset bundles contain every DOF")
                .values()
                .to_vec();
            Sample {
                features,
                target: record.target(target),
            }
        })
        .collect()
}

/// Trains and cross-validates one cell.
pub fn run_cell(
    dataset: &Dataset,
    plan: &SplitPlan,
    mask: DofMask,
    target: Target,
    config: &StudyConfig,
) -> Result<CellResult> {
    let mut spec = NetworkSpec::standard(mask, target);
    if let Some(epochs) = config.epochs_override {
        spec.epochs = epochs;
    }
    let test_truths: Vec<f64> = plan
        .test
        .iter()
        .map(|&i| dataset.records[i].target(target))
        .collect();
    let test_samples = cell_samples(dataset, &plan.test, mask, target);

    let mut folds = Vec::with_capacity(plan.folds.len());
    let mut best: Option<(usize, f64, NetworkWeights, Vec<f64>)> = None;
    for fold in 0..plan.folds.len() {
        let train_idx = plan.train_of(fold);
        let train_samples = cell_samples(dataset, &train_idx, mask, target);
        let val_samples = cell_samples(dataset, &plan.folds[fold], mask, target);
        let seed = cell_seed(config.master_seed, mask, target, fold);
        let (weights, _history) = train(&spec, &train_samples, &val_samples, seed)?;

        let predict_set = |set: &[Sample]| -> Result<Vec<f64>> {
            set.iter()
                .map(|s| {
                    let fv = crate::spectral::FeatureVector::from_parts(
                        mask,
                        spec.k,
                        s.features.clone(),
                    )?;
                    predict(&weights, &fv)
                })
                .collect()
        };
        let val_estimates = predict_set(&val_samples)?;
        let val_truths: Vec<f64> = val_samples.iter().map(|s| s.target).collect();
        let test_estimates = predict_set(&test_samples)?;
        let outcome = FoldOutcome {
            fold,
            val_rmse: rmse(&val_estimates, &val_truths)?,
            val_r2: r_squared(&val_estimates, &val_truths)?,
            test_rmse: rmse(&test_estimates, &test_truths)?,
            test_r2: r_squared(&test_estimates, &test_truths)?,
        };
        if best.as_ref().map_or(true, |(_, v, _, _)| outcome.val_rmse < *v) {
            best = Some((fold, outcome.val_rmse, weights, test_estimates));
        }
        folds.push(outcome);
    }
    let (best_fold, _, weights, test_estimates) = best.expect("at least one fold");
    Ok(CellResult {
        mask,
        target,
        folds,
        best_fold,
        test_estimates,
        test_truths,
        weights,
    })
}

/// Trains a list of cells on one shared split, in parallel across cells.
pub fn run_cells(
    dataset: &Dataset,
    cells: &[(DofMask, Target)],
    config: &StudyConfig,
) -> Result<EvalReport> {
    let plan = split_and_fold(dataset.len(), config.master_seed)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.parallelism.max(1))
        .build()
        .map_err(|e| Error::domain(format!("failed to build worker pool: {e}")))?;
    let results: Vec<Result<CellResult>> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(mask, target)| run_cell(dataset, &plan, mask, target, config))
            .collect()
    });
    let cells = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(EvalReport { cells, split: plan })
}

/// All 21 cells: every DOF combination for every wave property.
pub fn all_cells() -> Vec<(DofMask, Target)> {
    let mut cells = Vec::with_capacity(21);
    for mask in DofMask::COMBINATIONS {
        for target in Target::ALL {
            cells.push((mask, target));
        }
    }
    cells
}

/// Trains and cross-validates the full component study.
pub fn component_study(dataset: &Dataset, config: &StudyConfig) -> Result<EvalReport> {
    run_cells(dataset, &all_cells(), config)
}

/// One (cell, response DOF) table of total power versus absolute error on
/// the test split.
#[derive(Debug, Clone)]
pub struct PowerErrorTable {
    pub cell: String,
    pub target: Target,
    pub dof: Dof,
    /// `(response m0, |estimation error|)` per test record.
    pub rows: Vec<(f64, f64)>,
}

/// Pairs each test record's response power with the cell's absolute
/// estimation error, for every cell and every DOF.
pub fn power_error_analysis(report: &EvalReport, dataset: &Dataset) -> Vec<PowerErrorTable> {
    let mut tables = Vec::with_capacity(report.cells.len() * 3);
    for cell in &report.cells {
        let abs_errors: Vec<f64> = cell.test_residuals().iter().map(|r| r.abs()).collect();
        for dof in Dof::ALL {
            let rows = report
                .split
                .test
                .iter()
                .zip(&abs_errors)
                .map(|(&i, &e)| (dataset.records[i].m0_of(dof), e))
                .collect();
            tables.push(PowerErrorTable {
                cell: cell.cell_name(),
                target: cell.target,
                dof,
                rows,
            });
        }
    }
    tables
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

/// Validation and test metric tables: `cell,fold,rmse,r2`.
pub fn metrics_csv(report: &EvalReport) -> (String, String) {
    let mut val = String::from("cell,fold,rmse,r2\n");
    let mut test = String::from("cell,fold,rmse,r2\n");
    for cell in &report.cells {
        for f in &cell.folds {
            val.push_str(&format!(
                "{},{},{},{}\n",
                cell.cell_name(),
                f.fold,
                fmt(f.val_rmse),
                fmt(f.val_r2)
            ));
            test.push_str(&format!(
                "{},{},{},{}\n",
                cell.cell_name(),
                f.fold,
                fmt(f.test_rmse),
                fmt(f.test_r2)
            ));
        }
    }
    (val, test)
}

/// Canonical test residual table:
/// `cell,record_index,truth,estimate,residual`.
pub fn residuals_csv(report: &EvalReport) -> String {
    let mut out = String::from("cell,record_index,truth,estimate,residual\n");
    for cell in &report.cells {
        for ((idx, truth), estimate) in report
            .split
            .test
            .iter()
            .zip(&cell.test_truths)
            .zip(&cell.test_estimates)
        {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                cell.cell_name(),
                idx,
                fmt(*truth),
                fmt(*estimate),
                fmt(estimate - truth)
            ));
        }
    }
    out
}

/// Power-versus-error table: `cell,dof,m0,abs_error`.
pub fn power_error_csv(tables: &[PowerErrorTable]) -> String {
    let mut out = String::from("cell,dof,m0,abs_error\n");
    for t in tables {
        for (m0, err) in &t.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                t.cell,
                t.dof.name(),
                fmt(*m0),
                fmt(*err)
            ));
        }
    }
    out
}

/// Fold-summary table:
/// `cell,val_rmse_mean,val_rmse_std,val_r2_mean,test_rmse_best,test_rmse_mean,test_r2_best`.
pub fn summary_csv(report: &EvalReport) -> String {
    let mut out = String::from(
        "cell,val_rmse_mean,val_rmse_std,val_r2_mean,test_rmse_best,test_rmse_mean,test_r2_best\n",
    );
    for cell in &report.cells {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            cell.cell_name(),
            fmt(cell.val_rmse_mean()),
            fmt(cell.val_rmse_std()),
            fmt(cell.val_r2_mean()),
            fmt(cell.test_rmse()),
            fmt(cell.test_rmse_mean()),
            fmt(cell.test_r2())
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn scenarios_respect_campaign_ranges() {
        let scenarios = sample_scenarios(2000, 3);
        assert_eq!(scenarios.len(), 2000);
        for s in &scenarios {
            assert!((H_S_RANGE.0..H_S_RANGE.1).contains(&s.sea.h_s));
            assert!((T_1_RANGE.0..T_1_RANGE.1).contains(&s.sea.t_1));
            assert!((MU_H_RANGE.0..MU_H_RANGE.1).contains(&s.sea.mu_h_deg));
            assert!((SPEED_RANGE.0..SPEED_RANGE.1).contains(&s.speed));
        }
    }

    #[test]
    fn scenario_means_match_uniform_oracle() {
        let n = 100_000;
        let scenarios = sample_scenarios(n, 17);
        let mean_hs = scenarios.iter().map(|s| s.sea.h_s).sum::<f64>() / n as f64;
        // Uniform on [0.5, 2.5]: mean 1.5, sd 2/sqrt(12).
        let se = (2.0 / 12f64.sqrt()) / (n as f64).sqrt();
        assert!(
            (mean_hs - 1.5).abs() < 3.0 * se,
            "mean {mean_hs}, se {se}"
        );
    }

    #[test]
    fn scenario_sampling_is_deterministic() {
        assert_eq!(sample_scenarios(50, 9), sample_scenarios(50, 9));
        assert_ne!(sample_scenarios(50, 9), sample_scenarios(50, 10));
    }

    #[test]
    fn split_counts_at_campaign_scale() {
        let plan = split_and_fold(48000, 1).unwrap();
        assert_eq!(plan.test.len(), 4800);
        assert!(plan.folds.iter().all(|f| f.len() == 8640));
        assert_eq!(plan.train_of(0).len(), 34560);
    }

    #[test]
    fn split_remainder_distribution() {
        let plan = split_and_fold(103, 5).unwrap();
        assert_eq!(plan.test.len(), 10);
        let sizes: Vec<usize> = plan.folds.iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![19, 19, 19, 18, 18]);
    }

    #[test]
    fn split_rejects_tiny_datasets() {
        assert!(split_and_fold(9, 0).is_err());
        assert!(split_and_fold(10, 0).is_ok());
    }

    #[test]
    fn split_is_deterministic() {
        assert_eq!(split_and_fold(500, 3).unwrap(), split_and_fold(500, 3).unwrap());
        assert_ne!(split_and_fold(500, 3).unwrap(), split_and_fold(500, 4).unwrap());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn split_partitions_exactly(n in 10usize..400, seed in any::<u64>()) {
            let plan = split_and_fold(n, seed).unwrap();
            let mut seen = vec![0u8; n];
            for &i in plan.test.iter().chain(plan.folds.iter().flatten()) {
                seen[i] += 1;
            }
            prop_assert!(seen.iter().all(|&c| c == 1), "not a partition");
            let sizes: Vec<usize> = plan.folds.iter().map(Vec::len).collect();
            let max = *sizes.iter().max().unwrap();
            let min = *sizes.iter().min().unwrap();
            prop_assert!(max - min <= 1);
            prop_assert!(sizes.windows(2).all(|w| w[0] >= w[1]), "larger folds first");
            prop_assert_eq!(plan.test.len(), (0.10 * n as f64).floor() as usize);
        }

        #[test]
        fn metric_oracles_match_brute_force(
            pairs in proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 2..50)
        ) {
            let estimates: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let truths: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            let n = pairs.len() as f64;
            let brute_rmse = (pairs.iter().map(|(e, t)| (t - e) * (t - e)).sum::<f64>() / n).sqrt();
            prop_assert!((rmse(&estimates, &truths).unwrap() - brute_rmse).abs() <= 1e-12 * brute_rmse.max(1.0));
            let mean = truths.iter().sum::<f64>() / n;
            let ss_tot: f64 = truths.iter().map(|t| (t - mean) * (t - mean)).sum();
            if ss_tot > 0.0 {
                let ss_res: f64 = pairs.iter().map(|(e, t)| (t - e) * (t - e)).sum();
                let brute = 1.0 - ss_res / ss_tot;
                prop_assert!((r_squared(&estimates, &truths).unwrap() - brute).abs() <= 1e-12 * brute.abs().max(1.0));
            }
        }
    }

    #[test]
    fn rmse_hand_values() {
        assert_eq!(rmse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert!((rmse(&[1.0, -1.0], &[0.0, 0.0]).unwrap() - 1.0).abs() < 1e-15);
        let v = rmse(&[3.0, 4.0], &[0.0, 0.0]).unwrap();
        assert!((v - (25.0f64 / 2.0).sqrt()).abs() < 1e-12);
        assert!(rmse(&[], &[]).is_err());
        assert!(rmse(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn r_squared_hand_values() {
        assert_eq!(r_squared(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 1.0);
        // Constant predictor at the mean of truths scores zero.
        assert_eq!(r_squared(&[2.0, 2.0, 2.0], &[1.0, 2.0, 3.0]).unwrap(), 0.0);
        let v = r_squared(&[1.0, 2.0, 4.0], &[1.0, 2.0, 3.0]).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
        assert!(r_squared(&[1.0, 2.0], &[5.0, 5.0]).is_err());
        assert!(r_squared(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn spearman_sign_and_ties() {
        let up = spearman(&[1.0, 2.0, 3.0, 4.0], &[2.0, 4.0, 5.0, 9.0]).unwrap();
        assert!((up - 1.0).abs() < 1e-12);
        let down = spearman(&[1.0, 2.0, 3.0, 4.0], &[9.0, 5.0, 4.0, 2.0]).unwrap();
        assert!((down + 1.0).abs() < 1e-12);
        // Monotone but nonlinear is still a perfect rank correlation.
        let mono = spearman(&[1.0, 2.0, 3.0, 4.0], &[1.0, 8.0, 27.0, 64.0]).unwrap();
        assert!((mono - 1.0).abs() < 1e-12);
        let tied = spearman(&[1.0, 1.0, 2.0, 3.0], &[4.0, 4.0, 5.0, 6.0]).unwrap();
        assert!(tied > 0.9);
        assert!(spearman(&[1.0, 1.0], &[2.0, 2.0]).is_err());
    }

    #[test]
    fn cell_seeds_are_distinct() {
        let a = cell_seed(7, DofMask::HEAVE, Target::WaveHeight, 0);
        let b = cell_seed(7, DofMask::HEAVE, Target::WaveHeight, 1);
        let c = cell_seed(7, DofMask::PITCH, Target::WaveHeight, 0);
        let d = cell_seed(7, DofMask::HEAVE, Target::WavePeriod, 0);
        let set: std::collections::HashSet<u64> = [a, b, c, d].into_iter().collect();
        assert_eq!(set.len(), 4);
        assert_eq!(a, cell_seed(7, DofMask::HEAVE, Target::WaveHeight, 0));
    }

    #[test]
    fn all_cells_enumerates_the_study() {
        let cells = all_cells();
        assert_eq!(cells.len(), 21);
        let unique: std::collections::HashSet<_> = cells.iter().collect();
        assert_eq!(unique.len(), 21);
    }
}
