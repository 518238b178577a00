//! Maximum 4-AP-free subsets of Z/N and the progression-count lower bound they must satisfy.
//!
//! Usage: `cargo run --release --example ap_free_sets`

use u3kit::experiments::{ap_free_search, SearchStrategy};
use u3kit::forms::prog_unif_slack;
use u3kit::group::GroupSpec;

fn main() -> u3kit::Result<()> {
    println!("{:>4} {:>6} {:>14}  set", "N", "size", "slack");
    for n in [11u64, 13, 17, 19, 23, 29, 31] {
        let g = GroupSpec::cyclic(n);
        let a = ap_free_search(&g, 4, SearchStrategy::Exhaustive, 0)?;
        let slack = prog_unif_slack(&g, &a, 4)?;
        println!("{n:>4} {:>6} {slack:>14.6e}  {a:?}", a.len());
    }
    Ok(())
}
