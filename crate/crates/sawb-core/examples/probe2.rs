use sawb_core::experiment::*;
use sawb_core::neural::Target;
use sawb_core::spectral::DofMask;
use sawb_core::vessel::Dof;
use std::time::Instant;

fn main() {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(12000);
    let t0 = Instant::now();
    let ds = generate_dataset(n, 20260810, 2).unwrap();
    println!("dataset n={n} in {:?}", t0.elapsed());
    let cfg = StudyConfig::new(20260810, 2);
    let cells = vec![
        (DofMask::PITCH, Target::WaveHeading),
        (DofMask::HEAVE, Target::WaveHeading),
        (DofMask::ALL, Target::WaveHeading),
        (DofMask::ALL, Target::WaveHeight),
    ];
    let report = run_cells(&ds, &cells, &cfg).unwrap();
    for c in &report.cells {
        println!(
            "{:12} val={:.3} test_best={:.3} test_mean={:.3}",
            c.cell_name(), c.val_rmse_mean(), c.test_rmse(), c.test_rmse_mean()
        );
    }
    let tables = power_error_analysis(&report, &ds);
    let find = |cell: &str, dof: Dof| tables.iter().find(|t| t.cell == cell && t.dof == dof).unwrap();
    for (cell, dof) in [("3dof:mu", Dof::Pitch), ("3dof:mu", Dof::Roll), ("3dof:hs", Dof::Heave), ("pitch:mu", Dof::Pitch)] {
        let t = find(cell, dof);
        let (m0s, errs): (Vec<f64>, Vec<f64>) = t.rows.iter().cloned().unzip();
        println!("spearman({} m0, |{} err|) = {:.3}", dof.name(), cell, spearman(&m0s, &errs).unwrap());
    }
    println!("total {:?}", t0.elapsed());
}
