//! The progression-counting form `Lambda_k` and the inequalities bounding it by uniformity norms.

use num_complex::Complex64;
use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{pairwise_sum_c, GroupFunction, GroupSpec};
use crate::norms::gowers_recursive;

/// Counts of `(x, r)` pairs whose progression `x, x+r, ..., x+(k-1)r` lies in a set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApCount {
    /// Pairs including `r = 0`.
    pub total: u64,
    /// Pairs with `r != 0` and `k` distinct elements.
    pub proper: u64,
    pub k: usize,
    /// Set when `gcd(N, (k-1)!) != 1`.
    pub gcd_warning: bool,
}

fn factorial(k: usize) -> u64 {
    (1..=k as u64).product()
}

/// Whether `gcd(N, (k-1)!) = 1`.
pub fn gcd_condition(g: &GroupSpec, k: usize) -> bool {
    g.order().gcd(&factorial(k.saturating_sub(1))) == 1
}

/// Multiples `0, r, 2r, ..., (k-1)r` as element indices.
fn multiples(g: &GroupSpec, r: usize, k: usize) -> Vec<usize> {
    let mut out = vec![0usize; k];
    for i in 1..k {
        out[i] = g.add(out[i - 1], r);
    }
    out
}

/// `Lambda_k(f_0, ..., f_{k-1}) = E_{x,r} prod_i f_i(x + i r)`.
pub fn lambda_k(fs: &[GroupFunction]) -> Result<Complex64> {
    let k = fs.len();
    if !(3..=5).contains(&k) {
        return Err(Error::InvalidArgument(format!("k = {k} must be 3, 4 or 5")));
    }
    let g = &fs[0].group;
    if fs.iter().any(|f| &f.group != g) {
        return Err(Error::SpecMismatch);
    }
    let n = g.len();
    let per_r: Vec<Complex64> = (0..n)
        .into_par_iter()
        .map(|r| {
            let steps = multiples(g, r, k);
            let terms: Vec<Complex64> = (0..n)
                .map(|x| {
                    fs.iter()
                        .zip(&steps)
                        .fold(Complex64::new(1.0, 0.0), |acc, (f, &s)| acc * f.values[g.add(x, s)])
                })
                .collect();
            pairwise_sum_c(&terms)
        })
        .collect();
    Ok(pairwise_sum_c(&per_r) / (n as f64 * n as f64))
}

/// Count `k`-term progressions in `A` (given as element indices).
pub fn count_aps(g: &GroupSpec, a: &[usize], k: usize) -> Result<ApCount> {
    if k < 2 {
        return Err(Error::InvalidArgument("k must be at least 2".into()));
    }
    let mut member = vec![false; g.len()];
    for &x in a {
        if x >= g.len() {
            return Err(Error::SpecMismatch);
        }
        member[x] = true;
    }
    let n = g.len();
    let counts: Vec<(u64, u64)> = (0..n)
        .into_par_iter()
        .map(|r| {
            let steps = multiples(g, r, k);
            let mut total = 0;
            let mut proper = 0;
            for x in 0..n {
                let pts: Vec<usize> = steps.iter().map(|&s| g.add(x, s)).collect();
                if pts.iter().all(|&p| member[p]) {
                    total += 1;
                    if r != 0 && distinct(&pts) {
                        proper += 1;
                    }
                }
            }
            (total, proper)
        })
        .collect();
    Ok(ApCount {
        total: counts.iter().map(|c| c.0).sum(),
        proper: counts.iter().map(|c| c.1).sum(),
        k,
        gcd_warning: !gcd_condition(g, k),
    })
}

fn distinct(pts: &[usize]) -> bool {
    (0..pts.len()).all(|i| (i + 1..pts.len()).all(|j| pts[i] != pts[j]))
}

/// `min_j ||f_j||_{U^{k-1}} - |Lambda_k(f)|`, nonnegative by the generalized von Neumann theorem.
pub fn gvn_slack(fs: &[GroupFunction]) -> Result<f64> {
    let k = fs.len();
    let lam = lambda_k(fs)?;
    let g = &fs[0].group;
    if !gcd_condition(g, k) {
        return Err(Error::BadGroupOrder { n: g.order(), k });
    }
    let mut min = f64::INFINITY;
    for f in fs {
        min = min.min(gowers_recursive(f, k - 1)?);
    }
    Ok(min - lam.norm())
}

/// The lack-of-progressions lower bound `2^{-k-1} alpha^{k-1}`.
pub fn prog_unif_bound(alpha: f64, k: usize) -> f64 {
    2f64.powi(-(k as i32) - 1) * alpha.powi(k as i32 - 1)
}

/// `||1_A - alpha||_{U^{k-1}} - 2^{-k-1} alpha^{k-1}` for a set without proper `k`-APs.
///
/// The size hypothesis `N >= 2 / alpha^{k-1}` is not enforced here; use
/// [`prog_unif_slack_checked`] for that.
pub fn prog_unif_slack(g: &GroupSpec, a: &[usize], k: usize) -> Result<f64> {
    if a.is_empty() {
        return Err(Error::InvalidArgument("A must be nonempty".into()));
    }
    if !gcd_condition(g, k) {
        return Err(Error::BadGroupOrder { n: g.order(), k });
    }
    if count_aps(g, a, k)?.proper > 0 {
        return Err(Error::HasProperAp(k));
    }
    let alpha = a.len() as f64 / g.order() as f64;
    let balanced = GroupFunction::indicator(g, a).map(|z| z - alpha);
    Ok(gowers_recursive(&balanced, k - 1)? - prog_unif_bound(alpha, k))
}

/// Whether `N >= 2 / alpha^{k-1}`.
pub fn prog_unif_size_ok(g: &GroupSpec, set_size: usize, k: usize) -> bool {
    let alpha = set_size as f64 / g.order() as f64;
    g.order() as f64 >= 2.0 / alpha.powi(k as i32 - 1)
}

/// [`prog_unif_slack`] refusing inputs that violate `N >= 2 / alpha^{k-1}`.
pub fn prog_unif_slack_checked(g: &GroupSpec, a: &[usize], k: usize) -> Result<f64> {
    if !a.is_empty() && !prog_unif_size_ok(g, a.len(), k) {
        let alpha = a.len() as f64 / g.order() as f64;
        return Err(Error::TooSmallN { n: g.order(), required: 2.0 / alpha.powi(k as i32 - 1) });
    }
    prog_unif_slack(g, a, k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ones(g: &GroupSpec) -> GroupFunction {
        GroupFunction::constant(g, Complex64::new(1.0, 0.0))
    }

    #[test]
    fn lambda_examples() {
        let g = GroupSpec::cyclic(5);
        let one = ones(&g);
        assert!((lambda_k(&vec![one.clone(); 4]).unwrap() - 1.0).norm() < 1e-12);
        let d = GroupFunction::indicator(&g, &[0]);
        assert!((lambda_k(&vec![d; 4]).unwrap() - 1.0 / 25.0).norm() < 1e-12);
        let a = GroupFunction::indicator(&g, &[0, 1]);
        assert!((lambda_k(&vec![a; 4]).unwrap() - 2.0 / 25.0).norm() < 1e-12);
    }

    #[test]
    fn ap_count_examples() {
        let g = GroupSpec::cyclic(7);
        assert!(count_aps(&g, &[0, 1, 2, 3], 4).unwrap().proper >= 2);
        let g = GroupSpec::cyclic(13);
        let c = count_aps(&g, &[0, 1, 2, 4], 4).unwrap();
        assert_eq!(c.proper, 0);
        assert_eq!(c.total, 4);
        let all: Vec<usize> = (0..13).collect();
        assert_eq!(count_aps(&g, &all, 4).unwrap().proper, 13 * 12);
        assert!(count_aps(&GroupSpec::cyclic(12), &[0], 4).unwrap().gcd_warning);
    }

    #[test]
    fn gvn_edge_cases() {
        let g = GroupSpec::cyclic(31);
        assert!(gvn_slack(&vec![ones(&g); 4]).unwrap().abs() < 1e-12);
        let mut fs = vec![ones(&g); 4];
        fs[2] = GroupFunction::constant(&g, Complex64::default());
        assert!(gvn_slack(&fs).unwrap().abs() < 1e-12);
        let g6 = GroupSpec::cyclic(6);
        assert_eq!(gvn_slack(&vec![ones(&g6); 4]), Err(Error::BadGroupOrder { n: 6, k: 4 }));
    }

    #[test]
    fn prog_unif_examples() {
        let g = GroupSpec::cyclic(13);
        assert!(prog_unif_slack(&g, &[0, 1, 2, 4], 4).unwrap() >= 0.0);
        let g = GroupSpec::cyclic(31);
        assert!(matches!(prog_unif_slack_checked(&g, &[0], 4), Err(Error::TooSmallN { .. })));
        assert!(prog_unif_slack(&g, &[0], 4).unwrap() >= 0.0);
        let g = GroupSpec::cyclic(7);
        let all: Vec<usize> = (0..7).collect();
        assert_eq!(prog_unif_slack(&g, &all, 4), Err(Error::HasProperAp(4)));
    }
}
