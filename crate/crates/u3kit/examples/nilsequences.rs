//! Realize a cutoff-weighted bracket quadratic as a 2-step nilsequence, check it pointwise, and
//! test the Hall-Petresco constraint on Heisenberg orbits.
//!
//! Usage: `cargo run --release --example nilsequences`

use u3kit::group::e;
use u3kit::nil::{bracket_to_nilsystem, bracket_weight, hall_petresco_check, nilsequence, Cutoff};
use u3kit::quadratic::BracketQuadratic;

fn main() -> u3kit::Result<()> {
    let mut bq = BracketQuadratic::zero(101, vec![1, 17]);
    bq.quad[0][1] = 2.5;
    bq.lin[0] = 0.25;
    let cutoff = Cutoff::default();
    let c = bracket_to_nilsystem(&bq, cutoff)?;
    println!(
        "dimension {} (per term {:?}), Lipschitz per term {:?}",
        c.system.dimension(),
        c.term_dimensions,
        c.term_lipschitz
    );
    let seq = nilsequence(&c.function, &c.system, &c.x0, 101)?;
    let err = (0..101i64)
        .map(|n| {
            let want = e(-bq.eval_real(n)) * bracket_weight(&bq, &cutoff, n);
            (seq.values[n as usize] - want).norm()
        })
        .fold(0.0, f64::max);
    println!("largest deviation from the weighted bracket phase: {err:.3e}");

    let hp = hall_petresco_check(1000, 7)?;
    println!("Hall-Petresco k = 4 on {} random orbits: max error {:.3e}", hp.samples, hp.max_error);
    Ok(())
}
