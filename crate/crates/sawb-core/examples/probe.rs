use sawb_core::experiment::*;
use sawb_core::neural::Target;
use sawb_core::spectral::DofMask;
use sawb_core::vessel::Dof;
use std::time::Instant;

fn main() {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1200);
    let t0 = Instant::now();
    let ds = generate_dataset(n, 20260810, 2).unwrap();
    println!("dataset n={n} in {:?}", t0.elapsed());
    let cfg = StudyConfig::new(20260810, 2);
    let cells = vec![
        (DofMask::ALL, Target::WaveHeight),
        (DofMask::ALL, Target::WavePeriod),
        (DofMask::ALL, Target::WaveHeading),
        (DofMask::HEAVE, Target::WaveHeight),
        (DofMask::PITCH, Target::WaveHeight),
        (DofMask::ROLL, Target::WaveHeight),
        (DofMask::PITCH, Target::WaveHeading),
        (DofMask::HEAVE, Target::WaveHeading),
    ];
    let t1 = Instant::now();
    let report = run_cells(&ds, &cells, &cfg).unwrap();
    println!("trained {} cells in {:?}", cells.len(), t1.elapsed());
    for c in &report.cells {
        println!(
            "{:18} val_rmse_mean={:.4} std={:.4} r2={:.3} | test_rmse(best)={:.4} test_rmse_mean={:.4}",
            c.cell_name(), c.val_rmse_mean(), c.val_rmse_std(), c.val_r2_mean(), c.test_rmse(), c.test_rmse_mean()
        );
    }
    // criterion 9 probe
    let tables = power_error_analysis(&report, &ds);
    let find = |cell: &str, dof: Dof| tables.iter().find(|t| t.cell == cell && t.dof == dof).unwrap();
    let pm = find("3dof:mu", Dof::Pitch);
    let (m0s, errs): (Vec<f64>, Vec<f64>) = pm.rows.iter().cloned().unzip();
    let rho_pitch_mu = spearman(&m0s, &errs).unwrap();
    let hh = find("3dof:hs", Dof::Heave);
    let (m0s2, errs2): (Vec<f64>, Vec<f64>) = hh.rows.iter().cloned().unzip();
    let rho_heave_hs = spearman(&m0s2, &errs2).unwrap();
    println!("spearman(pitch m0, |mu err|) = {rho_pitch_mu:.3}  spearman(heave m0, |hs err|) = {rho_heave_hs:.3}");
    println!("total {:?}", t0.elapsed());
}
