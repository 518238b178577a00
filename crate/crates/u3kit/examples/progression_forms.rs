//! Progression counts and the generalized von Neumann inequality on Z/31.
//!
//! Usage: `cargo run --release --example progression_forms`

use u3kit::cli::parse_expr;
use u3kit::forms::{count_aps, gvn_slack, lambda_k, prog_unif_bound};
use u3kit::group::GroupSpec;

fn main() -> u3kit::Result<()> {
    let g = GroupSpec::cyclic(31);
    let a = [0usize, 1, 3, 4, 9, 10, 12, 13];
    for k in [3, 4] {
        let c = count_aps(&g, &a, k)?;
        println!("k = {k}: {} progressions, {} proper", c.total, c.proper);
    }
    let fs = ["e(x^2/31)", "e((2*x^2+x)/31)", "e(x^2/31)", "ind{0,1,2,3,4,5,6,7}"]
        .iter()
        .map(|s| parse_expr(s, &g))
        .collect::<u3kit::Result<Vec<_>>>()?;
    let lam = lambda_k(&fs)?;
    println!("Lambda_4 = {:.6} {:+.6}i, min U3 - |Lambda_4| = {:.6}", lam.re, lam.im, gvn_slack(&fs)?);
    println!("lower bound on U3 of a 4-AP-free set of density 0.3: {:.3e}", prog_unif_bound(0.3, 4));
    Ok(())
}
