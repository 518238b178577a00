//! Bohr sets in Z/N: a regular radius, the Bogolyubov spectrum of a dense set, and a proper
//! coset progression squeezed between two Bohr sets.
//!
//! Usage: `cargo run --release --example bohr_sets`

use u3kit::bohr::{bogolyubov, bohr_set, coset_progression_in_bohr, find_regular_rho, is_regular};
use u3kit::group::GroupSpec;

fn main() -> u3kit::Result<()> {
    let g = GroupSpec::cyclic(401);
    let s = [1usize, 17, 150];
    let rho = find_regular_rho(&g, &s, 0.1)?;
    let b = bohr_set(&g, &s, rho)?;
    println!("B(S, {rho:.4}) with S = {s:?}: {} elements, regular = {}", b.len(), is_regular(&b));

    let a: Vec<usize> = (0..401).filter(|x| x % 7 < 3).collect();
    let delta = a.len() as f64 / 401.0;
    let r = bogolyubov(&g, &a, delta)?;
    println!(
        "Bogolyubov for |A| = {}: |S| = {} <= {:.2}, B(S, 1/4) has {} elements inside 2A-2A: {}",
        a.len(),
        r.s.len(),
        r.size_bound,
        r.bohr_size,
        r.inclusion
    );

    let p = coset_progression_in_bohr(&g, &s[..2], 0.2)?;
    let cp = &p.progression;
    println!(
        "coset progression in B({:?}, 0.2): generators {:?}, lengths {:?}, |H| = {}, proper = {}, inclusions = {}/{}",
        &s[..2],
        cp.generators,
        cp.lengths,
        cp.h_order,
        cp.proper,
        p.inner_inclusion,
        p.outer_inclusion
    );
    Ok(())
}
