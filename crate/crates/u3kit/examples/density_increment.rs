//! One density-increment step and the full iteration for a quadric level set in F_5^3.
//!
//! Usage: `cargo run --release --example density_increment`

use u3kit::experiments::{density_increment_f5, szemeredi_driver, IncrementParams};
use u3kit::group::GroupSpec;

fn main() -> u3kit::Result<()> {
    let g = GroupSpec::fp_power(5, 3);
    let a: Vec<usize> =
        (0..g.len()).filter(|&i| {
            let x = g.coords(i);
            (x[0] * x[0] + x[1] * x[1] + 2 * x[2] * x[2] + x[2]) % 5 == 0
        }).collect();
    let params = IncrementParams { force: true, ..IncrementParams::default() };
    let r = density_increment_f5(&g, &a, &params)?;
    println!(
        "|A| = {}: {:?} x0 = {:?}, V = {:?}, density {}/{} (increment {:+.4}, source {:?})",
        a.len(),
        r.kind,
        r.coset.x0,
        r.coset.basis,
        r.count,
        r.size,
        r.increment,
        r.trace.source
    );
    let trace = szemeredi_driver(&g, &a, &params)?;
    for s in &trace.steps {
        println!("  depth {}: F5^{} with density {:.4}", s.depth, s.dim, s.density);
    }
    println!("outcome {:?}", trace.outcome);
    Ok(())
}
