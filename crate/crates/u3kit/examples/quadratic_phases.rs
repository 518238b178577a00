//! Quadratic phases on F_5^3: recover (M, xi, c) from phase values, find an isotropic vector,
//! and a maximal subspace on which the form vanishes.
//!
//! Usage: `cargo run --release --example quadratic_phases`

use u3kit::cli::parse_phase;
use u3kit::group::GroupSpec;
use u3kit::quadratic::{classify_global_quadratic, degenerate_subspace, isotropic_vector};

fn main() -> u3kit::Result<()> {
    let g = GroupSpec::fp_power(5, 3);
    let phi = parse_phase("(x1^2 + 3*x1*x2 + 2*x3^2 + x2 + 1)/5", &g)?;
    let q = classify_global_quadratic(&phi)?;
    println!("M = {:?}, xi = {:?}, c = {}", q.m, q.xi, q.c);

    let identity: Vec<Vec<u64>> = (0..3).map(|i| (0..3).map(|j| u64::from(i == j)).collect()).collect();
    let x = isotropic_vector(5, &q.m, &identity)?;
    println!("isotropic vector x = {x:?}");
    let u = degenerate_subspace(5, &q.m, &identity)?;
    println!("degenerate subspace basis {u:?}");
    Ok(())
}
