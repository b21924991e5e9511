use std::time::Instant;
use wenvelope::cattle::cattle_dataset;
use wenvelope::{fit_ladder, fit_ols, residual_bootstrap, BootstrapSpec, Center, OptimizerSettings};

fn main() {
    let data = cattle_dataset().unwrap().center().unwrap();
    let ols = fit_ols(&data).unwrap();
    let opts = OptimizerSettings::default();
    let t0 = Instant::now();
    for _ in 0..20 {
        fit_ladder(&ols, &opts).unwrap();
    }
    println!("ladder: {:?}", t0.elapsed() / 20);
    let t0 = Instant::now();
    let spec = BootstrapSpec::new(200, 1, Center::Weighted);
    match residual_bootstrap(&data, &ols, &spec) {
        Ok(res) => println!(
            "weighted B=200: {:?} ({:?}/rep), failures {}, tally {:?}",
            t0.elapsed(),
            t0.elapsed() / 200,
            res.failures.len(),
            res.u_tally
        ),
        Err(e) => println!("bootstrap error: {e}"),
    }
}
