//! Gowers norms of a few functions on Z/N: direct and recursive U^3 agree, norms increase with
//! d, and the largest Fourier coefficient sandwiches U^2.
//!
//! Usage: `cargo run --release --example gowers_norms`

use u3kit::cli::parse_expr;
use u3kit::group::GroupSpec;
use u3kit::norms::{gowers_direct, gowers_recursive, u2_bias};

fn main() -> u3kit::Result<()> {
    let g = GroupSpec::cyclic(17);
    let cases = [
        ("linear phase", "e(3*x/17)"),
        ("quadratic phase", "e((x^2+5*x)/17)"),
        ("cubic phase", "e(x^3/17)"),
        ("indicator", "ind{0,1,2,4,8,9,13,15,16}"),
        ("mixture", "0.5*e(x^2/17)+0.5*e(x/17)"),
    ];
    println!("{:<16} {:>9} {:>9} {:>9} {:>9} {:>12}", "f", "u2", "U2", "U3", "U3 direct", "U4");
    for (name, expr) in cases {
        let f = parse_expr(expr, &g)?;
        println!(
            "{name:<16} {:>9.6} {:>9.6} {:>9.6} {:>9.6} {:>12.6}",
            u2_bias(&f).value,
            gowers_recursive(&f, 2)?,
            gowers_recursive(&f, 3)?,
            gowers_direct(&f, 3, u128::MAX)?,
            gowers_recursive(&f, 4)?,
        );
    }
    Ok(())
}
