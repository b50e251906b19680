//! Prints median held-out rms over the locked seeds for the `(x1+x2+x3)^3` gap experiment.
//!
//! Usage: `cargo run --release -p equivcheck --example gap_calibration [relu|sigmoid]`

use equivcheck::approximator::{fit_seeds, median, thresholds, Activation, FitConfig};
use equivcheck::polynomials::power_of_sum;
use equivcheck::representations::{c1_family, pointnet_family};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let activation: Activation = match std::env::args().nth(1) {
        Some(a) => a.parse()?,
        None => thresholds::ACTIVATION,
    };
    let target = power_of_sum(3, 3);
    let (lo, hi) = thresholds::FAILURE_WIDTHS;
    let runs = [(pointnet_family(3)?, thresholds::SUCCESS_WIDTH), (c1_family(3)?, lo), (c1_family(3)?, hi)];
    for (family, width) in runs {
        let mut cfg = FitConfig::new(width, 3);
        cfg.activation = activation;
        let results = fit_seeds(&target, &family, &cfg, &thresholds::SEEDS)?;
        let rms: Vec<f64> = results.iter().map(|r| r.rms_error).collect();
        let (min, max) = rms.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
        println!("{activation:?} {} h={width}: median {:.3e} (min {min:.3e}, max {max:.3e})", family.name, median(&rms));
    }
    Ok(())
}
