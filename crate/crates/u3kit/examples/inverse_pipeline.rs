//! Recover a quadratic obstruction for a noisy quadratic phase on F_5^3.
//!
//! Usage: `cargo run --release --example inverse_pipeline [seed]`

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use u3kit::group::{e, GroupFunction, GroupSpec};
use u3kit::inverse_f5::{quadratic_obstruction_with, PipelineParams};

fn main() -> u3kit::Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let g = GroupSpec::fp_power(5, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eps = 0.1;
    let f = GroupFunction::from_fn(&g, |x| {
        let q = (x[0] * x[0] + 2 * x[1] * x[2] + 4 * x[2] * x[2]) % 5;
        e(q as f64 / 5.0) * (1.0 - eps)
    });
    let noise: Vec<Complex64> = (0..g.len()).map(|_| e(rng.gen::<f64>()) * eps * rng.gen::<f64>()).collect();
    let f = f.zip(&GroupFunction::new(g.clone(), noise)?, |a, b| a + b)?;

    let mut params = PipelineParams::new(0.5, seed);
    params.tie_tolerance = 0.05;
    let r = quadratic_obstruction_with(&f, &params)?;
    println!("U3 = {:.4}, dim W = {}, average bias = {:.4}", r.gowers_u3, r.w.len(), r.average_bias);
    println!("lower bound p^-n |W| max bias = {:.4} (holds: {})", r.u3_lower_bound, r.u3_lower_bound_ok);
    println!("oracle consistent: {}, graph size {}, seed {}", r.oracle_consistent, r.stats.gamma_size, r.stats.seed);
    for w in r.witnesses.iter().take(3) {
        println!("  y = {:?}: M = {:?}, xi = {:?}, bias {:.4}", w.y, w.phase.m, w.phase.xi, w.bias);
    }
    Ok(())
}
