//! Fast invariant checks across every module, run by `u3kit selftest`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bohr::{bogolyubov, bohr_set, find_regular_rho, is_regular};
use crate::experiments::{ap_free_search, fw_counterexample, quadratic_correlation_scan, ScanMode, SearchStrategy};
use crate::forms::{count_aps, gvn_slack};
use crate::group::{GroupFunction, GroupSpec, PhaseMap, Rational};
use crate::nil::hall_petresco_check;
use crate::norms::{gowers_direct, gowers_recursive, u2_bias};
use crate::quadratic::{classify_global_quadratic, isotropic_vector, QuadraticPhase};
use crate::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
}

fn random_bounded(g: &GroupSpec, rng: &mut ChaCha8Rng) -> GroupFunction {
    let values = (0..g.len()).map(|_| Complex64::from_polar(rng.gen::<f64>(), rng.gen::<f64>() * std::f64::consts::TAU)).collect();
    GroupFunction::new(g.clone(), values).expect("matching length")
}

fn random_set(n: usize, density: f64, rng: &mut ChaCha8Rng) -> Vec<usize> {
    (0..n).filter(|_| rng.gen::<f64>() < density).collect()
}

type CheckFn = fn(&mut ChaCha8Rng) -> Result<(bool, String)>;

fn norm_identities(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for n in [7u64, 12, 15] {
        let g = GroupSpec::cyclic(n);
        let f = random_bounded(&g, rng);
        let (u1, u2, u3) = (gowers_recursive(&f, 1)?, gowers_recursive(&f, 2)?, gowers_recursive(&f, 3)?);
        let direct = gowers_direct(&f, 3, u128::MAX)?;
        let u2b = u2_bias(&f).value;
        worst = worst
            .max(u1 - u2)
            .max(u2 - u3)
            .max((direct - u3).abs() / u3.max(1e-300))
            .max(u2b - u2)
            .max(u2 - u2b.sqrt());
    }
    Ok((worst < 1e-8, format!("largest violation {worst:.3e}")))
}

fn generalized_von_neumann(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let g = GroupSpec::cyclic(31);
    let mut min = f64::INFINITY;
    for k in [3, 4] {
        for _ in 0..5 {
            let fs: Vec<GroupFunction> = (0..k).map(|_| random_bounded(&g, rng)).collect();
            min = min.min(gvn_slack(&fs)?);
        }
    }
    Ok((min >= -1e-9, format!("smallest slack {min:.3e}")))
}

fn progressions(_: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let g = GroupSpec::cyclic(13);
    let proper = count_aps(&g, &[0, 1, 2, 4], 4)?.proper;
    let free = ap_free_search(&g, 4, SearchStrategy::Exhaustive, 0)?;
    Ok((proper == 0 && free.len() == 6, format!("proper 4-APs in {{0,1,2,4}}: {proper}; maximum free set size {}", free.len())))
}

fn bogolyubov_inclusion(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let g = GroupSpec::cyclic(101);
    let mut ok = true;
    for _ in 0..5 {
        let a = random_set(101, 0.4, rng);
        let delta = a.len() as f64 / 101.0;
        let r = bogolyubov(&g, &a, delta)?;
        ok &= r.size_ok && r.inclusion;
    }
    Ok((ok, "5 random sets of density about 0.4 in Z/101".into()))
}

fn regular_bohr(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let g = GroupSpec::cyclic(211);
    let mut ok = true;
    for _ in 0..5 {
        let s: Vec<usize> = (0..2).map(|_| rng.gen_range(1..211)).collect();
        let eps = rng.gen_range(0.02..0.1);
        let rho = find_regular_rho(&g, &s, eps)?;
        ok &= rho >= eps && rho <= 2.0 * eps && is_regular(&bohr_set(&g, &s, rho)?);
    }
    Ok((ok, "5 random frequency pairs in Z/211".into()))
}

fn quadratic_round_trip(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let g = GroupSpec::fp_power(5, 2);
    let mut ok = true;
    for _ in 0..10 {
        let m = vec![vec![rng.gen_range(0..5), rng.gen_range(0..5)], vec![0, rng.gen_range(0..5)]];
        let q = QuadraticPhase::new(&g, m, vec![rng.gen_range(0..5), rng.gen_range(0..5)], Rational::new(rng.gen_range(0..5), 5))?;
        let phi = PhaseMap::from_fn(&g, |x| q.eval(x));
        ok &= classify_global_quadratic(&phi)? == q;
    }
    Ok((ok, "10 random phases on F5^2".into()))
}

fn isotropic(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut ok = true;
    for p in [5u64, 7] {
        for _ in 0..20 {
            let mut m = vec![vec![0i64; 3]; 3];
            for i in 0..3 {
                for j in i..3 {
                    m[i][j] = rng.gen_range(0..p as i64);
                    m[j][i] = m[i][j];
                }
            }
            let w: Vec<Vec<u64>> = (0..3).map(|i| (0..3).map(|j| u64::from(i == j)).collect()).collect();
            let x = isotropic_vector(p, &m, &w)?;
            ok &= x.iter().any(|&v| v != 0) && crate::fp::bilinear(&m, &x, &x, p) == 0;
        }
    }
    Ok((ok, "20 random ternary forms over F5 and F7".into()))
}

fn hall_petresco(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let r = hall_petresco_check(200, rng.gen())?;
    Ok((r.max_error < 1e-9, format!("max error {:.3e} over {} samples", r.max_error, r.samples)))
}

fn furstenberg_weiss(_: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let f = fw_counterexample(401)?;
    let u3 = gowers_recursive(&f, 3)?;
    let scan = quadratic_correlation_scan(&f, ScanMode::Exhaustive, 0)?;
    Ok((f.values[0] == Complex64::new(1.0, 0.0) && u3 > scan.max, format!("N = 401: U3 {u3:.4}, quadratic scan {:.4}", scan.max)))
}

/// Run every check; a check that errors counts as failed.
pub fn selftest(seed: u64) -> SelftestReport {
    let checks: [(&str, CheckFn); 9] = [
        ("norm identities", norm_identities),
        ("generalized von Neumann", generalized_von_neumann),
        ("progression counts", progressions),
        ("Bogolyubov inclusion", bogolyubov_inclusion),
        ("regular Bohr radius", regular_bohr),
        ("quadratic classification", quadratic_round_trip),
        ("isotropic vectors", isotropic),
        ("Hall-Petresco", hall_petresco),
        ("Furstenberg-Weiss", furstenberg_weiss),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let checks: Vec<Check> = checks
        .iter()
        .map(|(name, f)| {
            let (passed, detail) = match f(&mut rng) {
                Ok(r) => r,
                Err(e) => (false, format!("{}: {e}", e.name())),
            };
            Check { name: name.to_string(), passed, detail }
        })
        .collect();
    SelftestReport { seed, passed: checks.iter().all(|c| c.passed), checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        let r = selftest(0);
        assert!(r.passed, "{:#?}", r.checks);
    }
}
