use std::time::Instant;
fn main() {
    let t0 = Instant::now();
    let ds = sawb_core::experiment::generate_dataset(20, 7, 2).unwrap();
    println!("20 records in {:?} ({:?}/record)", t0.elapsed(), t0.elapsed() / 20);
    println!("first m0 heave: {}", ds.records[0].m0_of(sawb_core::vessel::Dof::Heave));
    println!("hs {} t1 {} mu {} u {}", ds.records[0].scenario.sea.h_s, ds.records[0].scenario.sea.t_1, ds.records[0].scenario.sea.mu_h_deg, ds.records[0].scenario.speed);
}
