//! Large U^3 norm without quadratic correlation: the Furstenberg-Weiss function on Z/N.
//!
//! Usage: `cargo run --release --example fw_separation [N...]`

use u3kit::experiments::{fw_counterexample, quadratic_correlation_scan, ScanMode};
use u3kit::norms::{gowers_norm, Method};

fn main() -> u3kit::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let ns = if args.is_empty() { vec![1009, 2003, 4001] } else { args };
    println!("{:>6} {:>12} {:>12} {:>6} {:>6}", "N", "U3", "scan max", "a", "b");
    for n in ns {
        let f = fw_counterexample(n)?;
        let u3 = gowers_norm(&f, 3, Method::Recursive)?.value;
        let scan = quadratic_correlation_scan(&f, ScanMode::Sampled, 1)?;
        println!("{n:>6} {u3:>12.6} {:>12.6} {:>6} {:>6}", scan.max, scan.a, scan.b);
    }
    Ok(())
}
