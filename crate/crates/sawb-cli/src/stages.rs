//! Pipeline stages shared by the subcommands.

use crate::config::RunConfig;
use crate::svg;
use sawb_core::dataset::{self, Dataset, Manifest};
use sawb_core::experiment::{
    self, all_cells, power_error_analysis, r_squared, rmse, run_cells, EvalReport, SplitPlan,
    StudyConfig,
};
use sawb_core::neural::{predict, NetworkWeights, Target};
use sawb_core::spectral::{DofMask, FeatureVector};
use sawb_core::vessel::Dof;
use sawb_core::{Error, Result};
use std::path::{Path, PathBuf};

pub const DATASET_FILE: &str = "dataset.bin";
pub const MANIFEST_FILE: &str = "manifest.txt";
pub const MODELS_DIR: &str = "models";
pub const PLOTS_DIR: &str = "plots";

fn ensure_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

/// `generate`: dataset + manifest (+ optional CSV) into the output directory.
pub fn generate(config: &RunConfig, out: &Path) -> Result<()> {
    config.validate()?;
    ensure_dir(out)?;
    let dataset = experiment::generate_dataset_with(
        &config.vessel,
        config.n,
        config.seed,
        config.parallelism,
        config.noise_sigmas(),
    )?;
    dataset::save_records(&dataset.records, &out.join(DATASET_FILE))?;
    dataset.manifest.save(&out.join(MANIFEST_FILE))?;
    if config.csv {
        dataset::export_csv(&dataset.records, &out.join("dataset.csv"))?;
    }
    println!(
        "generated {} records into {}",
        dataset.len(),
        out.display()
    );
    Ok(())
}

/// Loads a dataset directory (records + manifest).
pub fn load_dataset(data_path: &Path) -> Result<Dataset> {
    let records = dataset::load_records(data_path)?;
    let manifest_path = data_path
        .parent()
        .unwrap_or_else(|| Path::new("."))
        .join(MANIFEST_FILE);
    let manifest = Manifest::load(&manifest_path)?;
    Ok(Dataset { records, manifest })
}

/// Master seed resolution: explicit flag wins, otherwise the dataset
/// manifest.
pub fn resolve_seed(dataset: &Dataset, flag: Option<u64>) -> Result<u64> {
    match flag {
        Some(seed) => Ok(seed),
        None => dataset.manifest.get_parsed("master_seed"),
    }
}

/// File-safe name for a cell's model.
pub fn model_file_name(mask: DofMask, target: Target) -> String {
    format!("{}_{}.sawb", mask.name(), target.name())
}

/// `train`: fits all cells (or one selected cell), saving canonical models
/// and fold metric tables.
pub fn train(
    dataset: &Dataset,
    out: &Path,
    seed: u64,
    parallelism: usize,
    cell: Option<(DofMask, Target)>,
) -> Result<EvalReport> {
    ensure_dir(out)?;
    ensure_dir(&out.join(MODELS_DIR))?;
    let cells = match cell {
        Some(pair) => vec![pair],
        None => all_cells(),
    };
    let config = StudyConfig::new(seed, parallelism);
    let report = run_cells(dataset, &cells, &config)?;
    for cell in &report.cells {
        let path = out
            .join(MODELS_DIR)
            .join(model_file_name(cell.mask, cell.target));
        cell.weights.save(&path)?;
    }
    let (val_csv, test_csv) = experiment::metrics_csv(&report);
    write_text(&out.join("metrics_validation.csv"), &val_csv)?;
    write_text(&out.join("metrics_test_folds.csv"), &test_csv)?;
    write_text(&out.join("summary.csv"), &experiment::summary_csv(&report))?;
    println!(
        "trained {} cell(s); models and fold metrics in {}",
        report.cells.len(),
        out.display()
    );
    Ok(report)
}

/// One saved model scored on the held-out test split.
pub struct TestScore {
    pub cell: String,
    pub target: Target,
    pub rmse: f64,
    pub r2: f64,
    pub truths: Vec<f64>,
    pub estimates: Vec<f64>,
}

/// Scores one loaded model on the plan's test split.
pub fn score_model(
    dataset: &Dataset,
    plan: &SplitPlan,
    weights: &NetworkWeights,
) -> Result<TestScore> {
    let spec = weights.spec();
    let mut truths = Vec::with_capacity(plan.test.len());
    let mut estimates = Vec::with_capacity(plan.test.len());
    for &i in &plan.test {
        let record = &dataset.records[i];
        let features: FeatureVector = record.features_for(spec.target).select(spec.mask)?;
        truths.push(record.target(spec.target));
        estimates.push(predict(weights, &features)?);
    }
    Ok(TestScore {
        cell: spec.cell_name(),
        target: spec.target,
        rmse: rmse(&estimates, &truths)?,
        r2: r_squared(&estimates, &truths)?,
        truths,
        estimates,
    })
}

/// `evaluate`: loads every model in the models directory and writes test
/// metrics plus the canonical residual table.
pub fn evaluate(dataset: &Dataset, models_dir: &Path, out: &Path, seed: u64) -> Result<()> {
    ensure_dir(out)?;
    let plan = experiment::split_and_fold(dataset.len(), seed)?;
    let mut entries: Vec<PathBuf> = std::fs::read_dir(models_dir)
        .map_err(|e| Error::Io {
            path: models_dir.display().to_string(),
            source: e,
        })?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "sawb"))
        .collect();
    entries.sort();
    if entries.is_empty() {
        return Err(Error::domain(format!(
            "no .sawb model files found in {}",
            models_dir.display()
        )));
    }
    let mut metrics = String::from("cell,rmse,r2\n");
    let mut residuals = String::from("cell,record_index,truth,estimate,residual\n");
    for path in &entries {
        let weights = NetworkWeights::load(path)?;
        let score = score_model(dataset, &plan, &weights)?;
        metrics.push_str(&format!("{},{},{}\n", score.cell, score.rmse, score.r2));
        for ((idx, truth), estimate) in plan
            .test
            .iter()
            .zip(&score.truths)
            .zip(&score.estimates)
        {
            residuals.push_str(&format!(
                "{},{},{},{},{}\n",
                score.cell,
                idx,
                truth,
                estimate,
                estimate - truth
            ));
        }
        println!("{}: test rmse {:.6}, r2 {:.4}", score.cell, score.rmse, score.r2);
    }
    write_text(&out.join("metrics_test.csv"), &metrics)?;
    write_text(&out.join("residuals.csv"), &residuals)?;
    Ok(())
}

/// Parsed residual row.
struct ResidualRow {
    cell: String,
    record_index: usize,
    truth: f64,
    estimate: f64,
}

fn read_residuals(path: &Path) -> Result<Vec<ResidualRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            if line != "cell,record_index,truth,estimate,residual" {
                return Err(Error::Format {
                    path: path.display().to_string(),
                    reason: "unexpected residual table header".to_string(),
                });
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(Error::Format {
                path: path.display().to_string(),
                reason: format!("line {} has {} fields", i + 1, fields.len()),
            });
        }
        let parse_f = |s: &str| {
            s.parse::<f64>().map_err(|_| Error::Format {
                path: path.display().to_string(),
                reason: format!("bad number '{s}' on line {}", i + 1),
            })
        };
        rows.push(ResidualRow {
            cell: fields[0].to_string(),
            record_index: fields[1].parse().map_err(|_| Error::Format {
                path: path.display().to_string(),
                reason: format!("bad index on line {}", i + 1),
            })?,
            truth: parse_f(fields[2])?,
            estimate: parse_f(fields[3])?,
        });
    }
    Ok(rows)
}

fn target_of_cell(cell: &str) -> Result<Target> {
    let (_, target) = cell
        .rsplit_once(':')
        .ok_or_else(|| Error::domain(format!("cell '{cell}' lacks a ':target' suffix")))?;
    Target::parse(target)
}

/// `analyze`: residual table + dataset → power-error CSV and SVG scatter
/// plots mirroring the study figures.
pub fn analyze(dataset: &Dataset, residuals_path: &Path, out: &Path) -> Result<()> {
    ensure_dir(out)?;
    ensure_dir(&out.join(PLOTS_DIR))?;
    let rows = read_residuals(residuals_path)?;
    if rows.is_empty() {
        return Err(Error::domain("residual table is empty".to_string()));
    }
    let mut power_csv = String::from("cell,dof,m0,abs_error\n");
    let mut cells: Vec<String> = Vec::new();
    for row in &rows {
        if !cells.contains(&row.cell) {
            cells.push(row.cell.clone());
        }
        if row.record_index >= dataset.len() {
            return Err(Error::domain(format!(
                "residual row references record {} outside the dataset ({} records)",
                row.record_index,
                dataset.len()
            )));
        }
    }
    for cell in &cells {
        let cell_rows: Vec<&ResidualRow> = rows.iter().filter(|r| &r.cell == cell).collect();
        let target = target_of_cell(cell)?;
        let unit = target.unit();
        // Residual scatter: estimate vs residual.
        let points: Vec<(f64, f64)> = cell_rows
            .iter()
            .map(|r| (r.estimate, r.estimate - r.truth))
            .collect();
        let stem = cell.replace(':', "_");
        svg::scatter(
            &out.join(PLOTS_DIR).join(format!("residual_{stem}.svg")),
            &format!("{cell}: estimates vs residuals"),
            &format!("estimate ({unit})"),
            &format!("residual ({unit})"),
            &points,
        )?;
        // Power vs absolute error, one panel per DOF.
        for dof in Dof::ALL {
            let pts: Vec<(f64, f64)> = cell_rows
                .iter()
                .map(|r| {
                    let m0 = dataset.records[r.record_index].m0_of(dof);
                    (m0, (r.estimate - r.truth).abs())
                })
                .collect();
            for (m0, err) in &pts {
                power_csv.push_str(&format!("{cell},{},{m0},{err}\n", dof.name()));
            }
            svg::scatter(
                &out.join(PLOTS_DIR)
                    .join(format!("power_error_{stem}_{}.svg", dof.name())),
                &format!("{cell}: {} power vs |error|", dof.name()),
                &format!("{} response m0", dof.name()),
                &format!("|error| ({unit})"),
                &pts,
            )?;
        }
    }
    write_text(&out.join("power_error.csv"), &power_csv)?;
    println!(
        "analysis for {} cell(s) written to {}",
        cells.len(),
        out.display()
    );
    Ok(())
}

/// `reproduce`: all stages at the configured scale into one directory.
pub fn reproduce(config: &RunConfig, out: &Path) -> Result<()> {
    generate(config, out)?;
    let dataset = load_dataset(&out.join(DATASET_FILE))?;
    let report = train(&dataset, out, config.seed, config.parallelism, None)?;
    evaluate(&dataset, &out.join(MODELS_DIR), out, config.seed)?;
    analyze(&dataset, &out.join("residuals.csv"), out)?;
    // The power-error tables from the full report complement the per-model
    // canonical ones with fold context.
    let tables = power_error_analysis(&report, &dataset);
    write_text(
        &out.join("power_error_folds.csv"),
        &experiment::power_error_csv(&tables),
    )?;
    Ok(())
}
