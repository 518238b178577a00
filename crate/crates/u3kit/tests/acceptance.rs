//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
//!
//! Reference values come from brute-force oracles written here rather than from the library.

use std::f64::consts::TAU;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use u3kit::bohr::{bogolyubov, bohr_set, coset_progression_in_bohr, find_regular_rho};
use u3kit::experiments::{ap_free_search, fw_counterexample, quadratic_correlation_scan, ScanMode, SearchStrategy};
use u3kit::forms::{gvn_slack, prog_unif_slack};
use u3kit::group::{e, GroupFunction, GroupSpec, PhaseMap, Rational, Subgroup};
use u3kit::inverse_f5::{quadratic_obstruction_with, PipelineParams};
use u3kit::nil::{
    bracket_to_nilsystem, bracket_weight, hall_petresco_check, lipschitz_slack, nilsequence, Coord, Cutoff, Factor,
    NilFunction, NilSystem, Term,
};
use u3kit::norms::{gowers_direct, gowers_recursive, u2_bias, u3_oracle_bracket, u3_oracle_coset};
use u3kit::quadratic::{classify_global_quadratic, isotropic_vector, BracketQuadratic, QuadraticPhase};

const BUDGET: u128 = 1 << 40;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random function with values in the closed unit disc.
fn random_bounded(g: &GroupSpec, r: &mut ChaCha8Rng) -> GroupFunction {
    let values = (0..g.len()).map(|_| Complex64::from_polar(r.gen::<f64>(), r.gen::<f64>() * TAU)).collect();
    GroupFunction::new(g.clone(), values).unwrap()
}

/// `xi . x` as a real number in `[0, 1)`, computed from coordinates.
fn pairing(g: &GroupSpec, xi: usize, x: usize) -> f64 {
    let (a, b) = (g.coords(xi), g.coords(x));
    let t: f64 = g.orders().iter().zip(a.iter().zip(&b)).map(|(&n, (&u, &v))| ((u * v) % n) as f64 / n as f64).sum();
    t.fract()
}

/// `sum_xi |f^(xi)|^4` with the naive transform `f^(xi) = E_x f(x) e(-xi . x)`.
fn fourier_fourth_moment(f: &GroupFunction) -> f64 {
    let g = &f.group;
    let n = g.len() as f64;
    (0..g.len())
        .map(|xi| {
            let c: Complex64 = (0..g.len()).map(|x| f.values[x] * e(-pairing(g, xi, x))).sum::<Complex64>() / n;
            c.norm_sqr().powi(2)
        })
        .sum()
}

fn max_fourier(f: &GroupFunction) -> f64 {
    let g = &f.group;
    let n = g.len() as f64;
    (0..g.len())
        .map(|xi| ((0..g.len()).map(|x| f.values[x] * e(-pairing(g, xi, x))).sum::<Complex64>() / n).norm())
        .fold(0.0, f64::max)
}

fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

/// Exact `||x||_S < rho` for `Z/N`, with `rho = num/den`.
fn in_bohr_cyclic(n: u64, s: &[usize], x: usize, rho_num: u64, rho_den: u64) -> bool {
    s.iter().all(|&xi| {
        let r = (xi as u64 * x as u64) % n;
        r.min(n - r) * rho_den < rho_num * n
    })
}

/// `max_{xi in S} ||xi x / N||` as an exact fraction over `N`.
fn bohr_num(n: u64, s: &[usize], x: usize) -> u64 {
    s.iter().map(|&xi| (xi as u64 * x as u64) % n).map(|r| r.min(n - r)).max().unwrap_or(0)
}

fn random_cyclic_frequencies(n: u64, d: usize, r: &mut ChaCha8Rng) -> Vec<usize> {
    (0..d).map(|_| r.gen_range(1..n as usize)).collect()
}

fn c1_norm_identities() -> Outcome {
    let orders: Vec<Vec<u64>> = (2..=64u64)
        .map(|n| vec![n])
        .chain([vec![2, 2], vec![3, 3], vec![2, 4], vec![4, 4], vec![2, 2, 2], vec![3, 3, 3], vec![2, 3, 5], vec![5, 5], vec![7, 7], vec![8, 8], vec![2, 2, 2, 2, 2, 2], vec![4, 4, 4]])
        .collect();
    let mut r = rng(1);
    let (mut id, mut mono, mut direct) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..200 {
        let g = GroupSpec::new(orders.choose(&mut r).unwrap().clone()).unwrap();
        let f = random_bounded(&g, &mut r);
        let u: Vec<f64> = (1..=3).map(|d| gowers_recursive(&f, d).unwrap()).collect();
        id = id.max((u[1].powi(4) - fourier_fourth_moment(&f)).abs());
        mono = mono.max(u[0] - u[1]).max(u[1] - u[2]);
        if g.len() <= 20 {
            let d = gowers_direct(&f, 3, BUDGET).unwrap();
            direct = direct.max((d - u[2]).abs() / u[2].max(1e-300));
        }
    }
    outcome(id < 1e-10 && mono <= 1e-9 && direct < 1e-8, format!("identity error {id:.2e}, monotonicity violation {mono:.2e}, direct/recursive {direct:.2e}"))
}

fn c2_u2_sandwich() -> Outcome {
    let mut r = rng(2);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..500 {
        let g = GroupSpec::cyclic(r.gen_range(2..=101));
        let f = random_bounded(&g, &mut r);
        let u2 = gowers_recursive(&f, 2).unwrap();
        let bias = u2_bias(&f).value;
        let naive = max_fourier(&f);
        worst = worst.max(bias - u2).max(u2 - bias.sqrt()).max((bias - naive).abs());
    }
    outcome(worst <= 1e-9, format!("largest violation {worst:.2e}"))
}

fn c3_gvn() -> Outcome {
    let g = GroupSpec::cyclic(31);
    let mut r = rng(3);
    let mut min = f64::INFINITY;
    for i in 0..1000 {
        let k = 3 + i % 2;
        let fs: Vec<GroupFunction> = (0..k).map(|_| random_bounded(&g, &mut r)).collect();
        min = min.min(gvn_slack(&fs).unwrap());
    }
    outcome(min >= -1e-9, format!("smallest slack {min:.3e} over 1000 instances"))
}

fn has_proper_4ap(n: usize, a: &[usize]) -> bool {
    let mut member = vec![false; n];
    a.iter().for_each(|&x| member[x] = true);
    (0..n).any(|x| (1..n).any(|d| (0..4).all(|j| member[(x + j * d) % n])))
}

fn c4_prog_unif() -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;
    for n in [11u64, 13, 17, 19, 23, 29, 31] {
        let g = GroupSpec::cyclic(n);
        let a = ap_free_search(&g, 4, SearchStrategy::Exhaustive, 0).unwrap();
        let slack = prog_unif_slack(&g, &a, 4).unwrap();
        ok &= !has_proper_4ap(n as usize, &a) && slack >= -1e-9;
        details.push(format!("{n}:|A|={},slack={slack:.4}", a.len()));
    }
    outcome(ok, details.join(" "))
}

fn two_a_minus_two_a(n: usize, a: &[usize]) -> Vec<bool> {
    let mut diff = vec![false; n];
    for &x in a {
        for &y in a {
            diff[(x + n - y) % n] = true;
        }
    }
    let d: Vec<usize> = (0..n).filter(|&x| diff[x]).collect();
    let mut out = vec![false; n];
    for &x in &d {
        for &y in &d {
            out[(x + y) % n] = true;
        }
    }
    out
}

fn c5_bogolyubov() -> Outcome {
    let mut r = rng(5);
    let mut failures = 0;
    let mut done = 0;
    while done < 100 {
        let n = r.gen_range(10..=200u64);
        let p = r.gen_range(0.25..0.7);
        let a: Vec<usize> = (0..n as usize).filter(|_| r.gen::<f64>() < p).collect();
        if (a.len() as u64) * 4 < n {
            continue;
        }
        done += 1;
        let g = GroupSpec::cyclic(n);
        let delta = a.len() as f64 / n as f64;
        let rep = bogolyubov(&g, &a, delta).unwrap();
        let size_ok = (rep.s.len() as u128) * (a.len() as u128).pow(2) <= 2 * (n as u128).pow(2);
        let sums = two_a_minus_two_a(n as usize, &a);
        let inclusion = (0..n as usize).filter(|&x| in_bohr_cyclic(n, &rep.s, x, 1, 4)).all(|x| sums[x]);
        if !(size_ok && inclusion) {
            failures += 1;
        }
    }
    outcome(failures == 0, format!("{failures} failures on 100 sets"))
}

/// Regularity decided at every radius where `|B(S, r)|` changes, with exact integer norms.
fn regular_oracle(n: u64, s: &[usize], rho: f64) -> bool {
    let d = s.len() as f64;
    let k0 = 1.0 / (100.0 * d);
    let nums: Vec<u64> = (0..n as usize).map(|x| bohr_num(n, s, x)).collect();
    let count = |pred: &dyn Fn(u64) -> bool| nums.iter().filter(|&&v| pred(v)).count() as f64;
    let nf = n as f64;
    let b = count(&|v| (v as f64) < rho * nf);
    let mut ok = true;
    for &t in &nums {
        let tf = t as f64 / nf;
        let kappa = tf / rho - 1.0;
        if kappa >= 0.0 && kappa < k0 {
            ok &= count(&|v| v <= t) <= (1.0 + 100.0 * d * kappa) * b + 1e-9;
        }
        if kappa < 0.0 && -kappa < k0 {
            ok &= count(&|v| v < t) >= (1.0 + 100.0 * d * kappa) * b - 1e-9;
        }
    }
    let hi = count(&|v| (v as f64) < (1.0 + k0) * rho * nf);
    ok && hi <= 2.0 * b + 1e-9
}

fn c6_regular_rho() -> Outcome {
    let mut r = rng(6);
    let mut failures = 0;
    for _ in 0..100 {
        let n = r.gen_range(20..=500u64);
        let d = r.gen_range(1..=3);
        let s = random_cyclic_frequencies(n, d, &mut r);
        let eps = r.gen_range(0.01..0.2);
        let ok = match find_regular_rho(&GroupSpec::cyclic(n), &s, eps) {
            Ok(rho) => rho >= eps && rho <= 2.0 * eps && regular_oracle(n, &s, rho),
            Err(_) => false,
        };
        failures += usize::from(!ok);
    }
    outcome(failures == 0, format!("{failures} failures on 100 instances"))
}

fn c7_bohr_sizes() -> Outcome {
    let mut r = rng(7);
    let mut failures = 0;
    for _ in 0..200 {
        let n = r.gen_range(5..=500u64);
        let d = r.gen_range(1..=3);
        let s = random_cyclic_frequencies(n, d, &mut r);
        // rho = k / 1000 keeps both comparisons in integers.
        let k = r.gen_range(1..=240u64);
        let small = bohr_set(&GroupSpec::cyclic(n), &s, k as f64 / 1000.0).unwrap().len() as u128;
        let large = bohr_set(&GroupSpec::cyclic(n), &s, 2.0 * k as f64 / 1000.0).unwrap().len() as u128;
        let brute_small = (0..n as usize).filter(|&x| in_bohr_cyclic(n, &s, x, k, 1000)).count() as u128;
        let brute_large = (0..n as usize).filter(|&x| in_bohr_cyclic(n, &s, x, 2 * k, 1000)).count() as u128;
        let lower = small * 1000u128.pow(d as u32) >= (k as u128).pow(d as u32) * n as u128;
        let doubling = large <= 5u128.pow(d as u32) * small;
        if !(lower && doubling && small == brute_small && large == brute_large) {
            failures += 1;
        }
    }
    outcome(failures == 0, format!("{failures} failures on 200 instances"))
}

fn c8_coset_progressions() -> Outcome {
    let mut r = rng(8);
    let mut failures = 0;
    let mut composite = 0;
    let mut d_prime_holds = 0;
    for i in 0..50 {
        let n = loop {
            let n = r.gen_range(15..=500u64);
            if is_prime(n) == (i % 2 == 0) {
                break n;
            }
        };
        composite += usize::from(!is_prime(n));
        let d = r.gen_range(1..=3);
        let s = random_cyclic_frequencies(n, d, &mut r);
        let rho = r.gen_range(0.05..0.24);
        let g = GroupSpec::cyclic(n);
        let ok = match coset_progression_in_bohr(&g, &s, rho) {
            Ok(rep) => {
                let elems = rep.progression.elements().unwrap();
                let mut seen = vec![false; n as usize];
                let mut proper = elems.len() as u128 == rep.progression.nominal_size();
                for &x in &elems {
                    proper &= !seen[x];
                    seen[x] = true;
                }
                let nf = n as f64;
                let outer = elems.iter().all(|&x| (bohr_num(n, &s, x) as f64) < rho * nf);
                let covered = |k: usize| {
                    let radius = rho * (k.max(1) as f64).powi(-2 * k as i32);
                    (0..n as usize).filter(|&x| (bohr_num(n, &s, x) as f64) < radius * nf).all(|x| seen[x])
                };
                d_prime_holds += usize::from(covered(rep.d_prime));
                proper && outer && covered(d) && rep.progression.proper
            }
            Err(_) => false,
        };
        failures += usize::from(!ok);
    }
    outcome(failures == 0, format!("{failures} failures on 50 instances ({composite} composite N); inner radius d^-2d rho, the d'^-2d' rho form held in {d_prime_holds}/50"))
}

fn c9_quadratic_round_trip() -> Outcome {
    let mut checked = 0;
    let mut failures = 0;
    let mut check = |g: &GroupSpec, m: Vec<Vec<i64>>, xi: Vec<i64>, c: Rational| {
        let k = g.rank();
        let orders = g.orders().to_vec();
        // phi(x) = sum m_ij x_i x_j / gcd(n_i, n_j) + sum xi_i x_i / n_i + c, from the coordinates.
        let phi = PhaseMap::from_fn(g, |x| {
            let mut t = c;
            for i in 0..k {
                for j in 0..k {
                    let gij = num_integer::gcd(orders[i], orders[j]) as i64;
                    t += Rational::new(m[i.min(j)][i.max(j)] * x[i] as i64 * x[j] as i64, gij);
                }
                t += Rational::new(xi[i] * x[i] as i64, orders[i] as i64);
            }
            t - t.floor()
        });
        let q = classify_global_quadratic(&phi);
        let want = QuadraticPhase::new(g, m.clone(), xi.clone(), c).unwrap();
        let ok = match q {
            Ok(q) => q == want && (0..g.len()).all(|x| q.eval(&g.coords(x)) == phi.values[x]),
            Err(_) => false,
        };
        checked += 1;
        failures += usize::from(!ok);
    };
    for n in [5i64, 7, 9] {
        let g = GroupSpec::cyclic(n as u64);
        for m in 0..n {
            for xi in 0..n {
                for c in 0..n {
                    check(&g, vec![vec![m]], vec![xi], Rational::new(c, n));
                }
            }
        }
    }
    let mut r = rng(9);
    for k in [2usize, 3] {
        let g = GroupSpec::fp_power(5, k);
        for _ in 0..100 {
            let mut m = vec![vec![0i64; k]; k];
            for i in 0..k {
                for j in i..k {
                    m[i][j] = r.gen_range(0..5);
                    m[j][i] = m[i][j];
                }
            }
            let xi = (0..k).map(|_| r.gen_range(0..5)).collect();
            check(&g, m, xi, Rational::new(r.gen_range(0..5), 5));
        }
    }
    outcome(failures == 0, format!("{failures} failures among {checked} phases"))
}

fn c10_localization_chain() -> Outcome {
    let g = GroupSpec::fp_power(5, 2);
    let whole = Subgroup::whole(&g);
    let lines: Vec<Subgroup> =
        [[1u64, 0], [0, 1], [1, 1], [1, 2], [1, 3], [1, 4]].iter().map(|v| Subgroup::generated_by(&g, &[g.index(v)]).unwrap()).collect();
    let mut r = rng(10);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..50 {
        let f = random_bounded(&g, &mut r);
        let big_u3 = gowers_recursive(&f, 3).unwrap();
        let u3 = u3_oracle_coset(&f, 0, &whole, BUDGET).unwrap().value;
        worst = worst.max(u3 - big_u3);
        for w in &lines {
            for y in 0..g.len() {
                let local = u3_oracle_coset(&f, y, w, BUDGET).unwrap().value;
                worst = worst.max(5.0 / 25.0 * local - u3);
            }
        }
    }
    outcome(worst <= 1e-9, format!("largest violation {worst:.3e} (50 functions, 6 lines, all cosets)"))
}

fn planted_trial(n: usize, codim: usize, eps: f64, seed: u64) -> (f64, f64) {
    let g = GroupSpec::fp_power(5, n);
    let mut r = rng(1000 + seed);
    let mut m = vec![vec![0u64; n]; n];
    for i in 0..n {
        for j in i..n {
            m[i][j] = r.gen_range(0..5);
            m[j][i] = m[i][j];
        }
    }
    let xi: Vec<u64> = (0..n).map(|_| r.gen_range(0..5)).collect();
    let ell: Vec<u64> = loop {
        let v: Vec<u64> = (0..n).map(|_| r.gen_range(0..5)).collect();
        if v.iter().any(|&c| c != 0) {
            break v;
        }
    };
    let level = r.gen_range(0..5u64);
    let f = GroupFunction::from_fn(&g, |x| {
        let on = codim == 0 || ell.iter().zip(x).map(|(a, b)| a * b).sum::<u64>() % 5 == level;
        if !on {
            return Complex64::new(0.0, 0.0);
        }
        let q: u64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| m[i][j] * x[i] * x[j]).sum::<u64>()
            + xi.iter().zip(x).map(|(a, b)| a * b).sum::<u64>();
        e((q % 5) as f64 / 5.0)
    });
    let noise: Vec<Complex64> = (0..g.len()).map(|_| Complex64::from_polar(eps * r.gen::<f64>(), r.gen::<f64>() * TAU)).collect();
    let f = f.zip(&GroupFunction::new(g.clone(), noise).unwrap(), |a, b| a + b).unwrap();
    let planted = 5f64.powi(-(codim as i32));
    let mut params = PipelineParams::new(0.5, seed);
    params.tie_tolerance = 0.05;
    params.oracle = false;
    let got = quadratic_obstruction_with(&f, &params).map(|rep| rep.average_bias).unwrap_or(f64::NEG_INFINITY);
    (got, planted)
}

fn c11_planted_recovery() -> Outcome {
    let eps = 0.1;
    let mut passes = 0;
    let mut worst_margin = f64::INFINITY;
    for seed in 0..100u64 {
        let (n, codim) = [(2, 0), (2, 1), (3, 0), (3, 1)][seed as usize % 4];
        let (got, planted) = planted_trial(n, codim, eps, seed);
        worst_margin = worst_margin.min(got - planted);
        passes += usize::from(got >= planted - 3.0 * eps);
    }
    outcome(passes >= 95, format!("{passes}/100 trials; smallest average_bias - planted = {worst_margin:.4}"))
}

fn c12_furstenberg_weiss() -> Outcome {
    let mut u3s = Vec::new();
    let mut maxes = Vec::new();
    for n in [1009u64, 2003, 4001] {
        let f = fw_counterexample(n).unwrap();
        u3s.push(gowers_recursive(&f, 3).unwrap());
        maxes.push(quadratic_correlation_scan(&f, ScanMode::Sampled, 1).unwrap().max);
    }
    let ok = u3s.iter().all(|&u| u >= 0.05) && maxes.windows(2).all(|w| w[1] < w[0]) && maxes[2] <= 0.05;
    outcome(ok, format!("U3 {:.4?}, scan max {:.4?}", u3s, maxes))
}

fn c13_hall_petresco() -> Outcome {
    let r = hall_petresco_check(1000, 13).unwrap();
    outcome(r.max_error < 1e-9, format!("max error {:.3e} over {} samples", r.max_error, r.samples))
}

fn random_bracket(n: u64, r: &mut ChaCha8Rng, coef: impl Fn(&mut ChaCha8Rng) -> f64) -> BracketQuadratic {
    let d = r.gen_range(1..=2);
    let s: Vec<u64> = (0..d).map(|_| r.gen_range(1..n)).collect();
    let mut bq = BracketQuadratic::zero(n, s);
    for i in 0..d {
        for j in i..d {
            bq.quad[i][j] = coef(r);
            bq.quad[j][i] = bq.quad[i][j];
        }
        bq.lin[i] = coef(r);
    }
    bq
}

fn c14_bracket_factorization() -> Outcome {
    let cutoff = Cutoff::new(0.36, 0.3).unwrap();
    let mut r = rng(14);
    let (mut err, mut dim, mut lip, mut slack) = (0.0f64, 0usize, 0.0f64, f64::INFINITY);
    for i in 0..20 {
        let bq = random_bracket(101, &mut r, |r| (r.gen_range(-3.0..3.0f64) * 8.0).round() / 8.0);
        let c = bracket_to_nilsystem(&bq, cutoff).unwrap();
        let seq = nilsequence(&c.function, &c.system, &c.x0, 101).unwrap();
        for n in -50i64..=50 {
            let want = bracket_weight(&bq, &cutoff, n) * e(-bq.eval_real(n));
            err = err.max((seq.values[n.rem_euclid(101) as usize] - want).norm());
        }
        dim = dim.max(c.term_dimensions.iter().copied().max().unwrap_or(0));
        lip = c.term_lipschitz.iter().fold(lip, |a, &b| a.max(b));
        let k = c.function.lipschitz();
        slack = slack.min(lipschitz_slack(&c.function, &c.system, k, 8, 2000, i));
    }
    outcome(
        err < 1e-9 && dim <= 9 && lip <= 50.0 && slack >= -1e-9,
        format!("pointwise error {err:.2e}, term dimension <= {dim}, term Lipschitz <= {lip:.2}, slack {slack:.3e} (cutoff rho 0.36, eps 0.3)"),
    )
}

fn c15_isotropic() -> Outcome {
    let mut r = rng(15);
    let mut failures = 0;
    let identity: Vec<Vec<u64>> = (0..3).map(|i| (0..3).map(|j| u64::from(i == j)).collect()).collect();
    for p in [5i64, 7] {
        for _ in 0..500 {
            let mut m = vec![vec![0i64; 3]; 3];
            for i in 0..3 {
                for j in i..3 {
                    m[i][j] = r.gen_range(0..p);
                    m[j][i] = m[i][j];
                }
            }
            let ok = match isotropic_vector(p as u64, &m, &identity) {
                Ok(x) => {
                    let q: i64 = (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).map(|(i, j)| m[i][j] * x[i] as i64 * x[j] as i64).sum();
                    x.iter().any(|&v| v % p as u64 != 0) && q.rem_euclid(p) == 0
                }
                Err(_) => false,
            };
            failures += usize::from(!ok);
        }
    }
    outcome(failures == 0, format!("{failures} failures on 1000 forms"))
}

fn c16_bracket_u3() -> Outcome {
    let n = 101u64;
    let g = GroupSpec::cyclic(n);
    let region: Vec<usize> = (0..g.len()).collect();
    let mut r = rng(16);
    let (mut min_u3, mut min_oracle) = (f64::INFINITY, f64::INFINITY);
    for _ in 0..20 {
        let bq = random_bracket(n, &mut r, |r| r.gen_range(-4..=4) as f64 / 2.0);
        let f = GroupFunction::from_fn(&g, |x| e(bq.eval_real(x[0] as i64)));
        min_u3 = min_u3.min(gowers_recursive(&f, 3).unwrap());
        let s: Vec<u64> = bq.s.clone();
        min_oracle = min_oracle.min(u3_oracle_bracket(&f, &region, &s, 2, BUDGET).unwrap().value);
    }
    outcome(min_u3 >= 0.5, format!("smallest U3 {min_u3:.4}, smallest bracket oracle value {min_oracle:.4}"))
}

/// Fixed Heisenberg nilsequence truncated to `-N/2 < n < N/2` at growing `N`.
fn tgnx_stability() -> Outcome {
    let sys = NilSystem { factors: vec![Factor::Heisenberg { alpha: 0.0123, beta: 0.0, gamma: 0.0071 }] };
    let func = NilFunction { terms: vec![Term::Exp { at: Coord { factor: 0, coord: 1 }, scale: 1.0 }], cutoff: Cutoff::default() };
    let u3s: Vec<f64> = [101u64, 211, 401, 809]
        .iter()
        .map(|&n| gowers_recursive(&nilsequence(&func, &sys, &sys.origin(), n).unwrap(), 3).unwrap())
        .collect();
    let (lo, hi) = u3s.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &u| (a.min(u), b.max(u)));
    outcome(lo >= 0.1 && (hi - lo) / hi < 0.2, format!("U3 {u3s:.4?}"))
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome, Duration);
    let secs = Duration::from_secs;
    let criteria: [Criterion; 17] = [
        ("1 norm identities", c1_norm_identities, secs(60)),
        ("2 U2 inverse sandwich", c2_u2_sandwich, secs(30)),
        ("3 generalized von Neumann", c3_gvn, secs(60)),
        ("4 lack of progressions bound", c4_prog_unif, secs(60)),
        ("5 Bogolyubov", c5_bogolyubov, secs(120)),
        ("6 regular Bohr radius", c6_regular_rho, secs(120)),
        ("7 Bohr size bounds", c7_bohr_sizes, secs(60)),
        ("8 coset progressions", c8_coset_progressions, secs(180)),
        ("9 quadratic classification", c9_quadratic_round_trip, secs(30)),
        ("10 localization chain", c10_localization_chain, secs(120)),
        ("11 planted recovery", c11_planted_recovery, secs(600)),
        ("12 Furstenberg-Weiss separation", c12_furstenberg_weiss, secs(900)),
        ("13 Hall-Petresco k=4", c13_hall_petresco, secs(10)),
        ("14 bracket factorization", c14_bracket_factorization, secs(60)),
        ("15 isotropic vectors", c15_isotropic, secs(10)),
        ("16 bracket quadratics have large U3", c16_bracket_u3, secs(120)),
        ("nilsequence U3 stability", tgnx_stability, secs(60)),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, run, limit) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let o = run();
        let t = start.elapsed();
        let passed = o.passed && t <= limit;
        failed += usize::from(!passed);
        println!("criterion {name}: {} ({}; {:.1}s of {}s)", if passed { "PASS" } else { "FAIL" }, o.detail, t.as_secs_f64(), limit.as_secs());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
