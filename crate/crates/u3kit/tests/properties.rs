//! Property-based invariants across modules, plus end-to-end checks of the `u3kit` binary.

use std::process::Command;

use num_complex::Complex64;
use num_rational::Ratio;
use proptest::prelude::*;

use u3kit::bohr::bohr_set;
use u3kit::cli::output::format_f64;
use u3kit::cli::parse_expr;
use u3kit::forms::count_aps;
use u3kit::fourier::{dft, idft};
use u3kit::group::{e, GroupFunction, GroupSpec, PhaseMap, Rational};
use u3kit::nil::{factorization_remainder, orbit_point, Factor, NilPoint, NilSystem};
use u3kit::norms::{gowers_recursive, u2_bias};
use u3kit::quadratic::{classify_global_quadratic, QuadraticPhase};

fn group_strategy() -> impl Strategy<Value = GroupSpec> {
    prop_oneof![
        (2u64..40).prop_map(GroupSpec::cyclic),
        Just(GroupSpec::new(vec![3, 9]).unwrap()),
        Just(GroupSpec::new(vec![2, 4, 2]).unwrap()),
        Just(GroupSpec::fp_power(5, 2)),
    ]
}

fn function_strategy() -> impl Strategy<Value = GroupFunction> {
    group_strategy().prop_flat_map(|g| {
        let n = g.len();
        prop::collection::vec((0.0..1.0f64, 0.0..1.0f64), n).prop_map(move |v| {
            let values = v.into_iter().map(|(r, t)| Complex64::from_polar(r, t * std::f64::consts::TAU)).collect();
            GroupFunction::new(g.clone(), values).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norms_are_monotone_and_sandwich_u2(f in function_strategy()) {
        let u: Vec<f64> = (1..=3).map(|d| gowers_recursive(&f, d).unwrap()).collect();
        prop_assert!(u[0] <= u[1] + 1e-9 && u[1] <= u[2] + 1e-9);
        let bias = u2_bias(&f).value;
        prop_assert!(bias <= u[1] + 1e-9 && u[1] <= bias.sqrt() + 1e-9);
    }

    #[test]
    fn fourier_round_trip(f in function_strategy()) {
        prop_assert!(idft(&dft(&f)).max_abs_diff(&f) < 1e-10);
    }

    #[test]
    fn norms_are_shift_and_conjugation_invariant(f in function_strategy(), h in 0usize..1000) {
        let h = h % f.len();
        let u = gowers_recursive(&f, 3).unwrap();
        prop_assert!((gowers_recursive(&f.shift_idx(h), 3).unwrap() - u).abs() < 1e-9);
        prop_assert!((gowers_recursive(&f.conj(), 3).unwrap() - u).abs() < 1e-9);
    }

    #[test]
    fn quadratic_phases_have_unit_u3(m in 0i64..31, xi in 0i64..31, c in 0i64..31) {
        let g = GroupSpec::cyclic(31);
        let q = QuadraticPhase::new(&g, vec![vec![m]], vec![xi], Rational::new(c, 31)).unwrap();
        let phi = PhaseMap::from_fn(&g, |x| q.eval(x));
        prop_assert_eq!(classify_global_quadratic(&phi).unwrap(), q);
        prop_assert!((gowers_recursive(&phi.exp(), 3).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn expressions_match_direct_evaluation(a in 0u64..37, b in 0u64..37) {
        let g = GroupSpec::cyclic(37);
        let f = parse_expr(&format!("e(({a}*x^2+{b}*x)/37)"), &g).unwrap();
        let want = GroupFunction::from_fn(&g, |x| e(((a * x[0] * x[0] + b * x[0]) % 37) as f64 / 37.0));
        prop_assert!(f.max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn ap_counts_match_brute_force(n in 5u64..30, bits in prop::collection::vec(any::<bool>(), 30)) {
        let g = GroupSpec::cyclic(n);
        let a: Vec<usize> = (0..n as usize).filter(|&x| bits[x]).collect();
        let member = |x: usize| bits[x % n as usize];
        for k in [3usize, 4] {
            let total = (0..n as usize).flat_map(|x| (0..n as usize).map(move |r| (x, r))).filter(|&(x, r)| (0..k).all(|j| member(x + j * r))).count();
            prop_assert_eq!(count_aps(&g, &a, k).unwrap().total, total as u64);
        }
    }

    #[test]
    fn bohr_sets_are_symmetric_and_large(n in 5u64..300, xi in 1usize..300, rho in 0.01..0.49f64) {
        let g = GroupSpec::cyclic(n);
        let b = bohr_set(&g, &[xi % n as usize], rho).unwrap();
        prop_assert!(b.contains(0));
        prop_assert!(b.members.iter().all(|&x| b.contains(g.neg(x))));
        prop_assert!(b.len() as f64 >= rho * n as f64);
    }

    #[test]
    fn bracket_factorization_leaves_an_integer(q in -5i64..5, a in 0i64..101, c in 0i64..101, n in -50i64..50) {
        let r = factorization_remainder(q, Ratio::new(a, 101), Ratio::new(c, 101), n);
        prop_assert!(r.is_integer());
    }

    #[test]
    fn orbits_are_homomorphic(alpha in -0.5..0.5f64, gamma in -0.5..0.5f64, x in -0.5..0.5f64, n in -1000i64..1000, m in -1000i64..1000) {
        let sys = NilSystem { factors: vec![Factor::Heisenberg { alpha, beta: 0.0, gamma }, Factor::Circle { alpha: gamma }] };
        let x0 = NilPoint { blocks: vec![vec![x, 0.1, -0.2], vec![0.3]] };
        let direct = orbit_point(&sys, &x0, n + m).unwrap();
        let composed = orbit_point(&sys, &orbit_point(&sys, &x0, n).unwrap(), m).unwrap();
        prop_assert!(sys.distance(&direct, &composed) < 1e-9);
    }

    #[test]
    fn json_numbers_round_trip(v in prop::num::f64::NORMAL) {
        prop_assert_eq!(format_f64(v).parse::<f64>().unwrap(), v);
    }
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_u3kit")).args(args).env_remove("U3KIT_SEED").output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

fn without_wall_time(s: &str) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_str(s).unwrap();
    v["manifest"].as_object_mut().unwrap().remove("wall_time_s");
    v
}

#[test]
fn cli_is_deterministic_and_embeds_a_manifest() {
    let args = ["hp-check", "--samples", "50", "--seed", "5"];
    let (code, a, _) = run(&args);
    assert_eq!(code, 0);
    let (_, b, _) = run(&args);
    let v = without_wall_time(&a);
    assert_eq!(v, without_wall_time(&b));
    assert_eq!(v["manifest"]["seed"], 5);
    assert!(v["manifest"]["version"].is_string());
}

#[test]
fn cli_exit_codes() {
    let (code, out, _) = run(&["norm", "--group", "Z/7", "--expr", "e(x^2/7)"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!((v["result"]["value"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let (code, _, _) = run(&["norm", "--bogus"]);
    assert_eq!(code, 2);
    let (code, _, err) = run(&["norm", "--group", "Z/7", "--expr", "e(x^2/"]);
    assert_eq!(code, 3);
    let v: serde_json::Value = serde_json::from_str(&err).unwrap();
    assert_eq!(v["error"]["name"], "ParseError");
}
