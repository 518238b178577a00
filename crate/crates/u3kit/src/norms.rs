//! Gowers uniformity norms `U^d` and the local polynomial-bias oracles `u^2`, `u^3`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::FourierPlan;
use crate::group::{e, pairwise_sum, pairwise_sum_c, GroupFunction, GroupSpec, Subgroup, DEFAULT_BUDGET};
use crate::quadratic::{centered_frac, entry_modulus, BracketQuadratic, QuadraticPhase};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Direct,
    Recursive,
    Fourier,
    CosetOracle,
    BracketOracle,
}

/// Phase attaining an oracle value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// Linear phase `xi . x`.
    Linear { xi: Vec<u64> },
    /// Quadratic phase in the subgroup coordinates `x = y + sum t_i g_i`.
    Coset { base: usize, gens: Vec<usize>, phase: QuadraticPhase },
    Bracket { phase: BracketQuadratic },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub value: f64,
    pub d: usize,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

/// `||f||_{U^d}` by the requested method.
pub fn gowers_norm(f: &GroupFunction, d: usize, method: Method) -> Result<NormReport> {
    let value = match method {
        Method::Direct => gowers_direct(f, d, DEFAULT_BUDGET)?,
        _ => gowers_recursive(f, d)?,
    };
    let method = if method == Method::Direct { Method::Direct } else { Method::Recursive };
    Ok(NormReport { value, d, method, witness: None })
}

/// Average of `prod_omega C^|omega| f(x + omega.h)` over all cubes, then the `2^d`-th root.
pub fn gowers_direct(f: &GroupFunction, d: usize, cap: u128) -> Result<f64> {
    if !(1..=4).contains(&d) {
        return Err(Error::DegreeUnsupported(d));
    }
    let g = &f.group;
    let n = g.len();
    let total = (n as u128).pow(d as u32 + 1);
    if total > cap {
        return Err(Error::BudgetExceeded { needed: total, cap });
    }
    let inner = n.pow(d as u32);
    let per_x: Vec<Complex64> = (0..n)
        .into_par_iter()
        .map(|x| {
            let mut terms = Vec::with_capacity(inner);
            let mut pts = vec![0usize; 1 << d];
            for k in 0..inner {
                let mut hs = [0usize; 4];
                let mut r = k;
                for slot in hs[..d].iter_mut().rev() {
                    *slot = r % n;
                    r /= n;
                }
                pts[0] = x;
                let mut prod = f.values[x];
                for omega in 1usize..(1 << d) {
                    let low = omega.trailing_zeros() as usize;
                    pts[omega] = g.add(pts[omega & (omega - 1)], hs[low]);
                    let v = f.values[pts[omega]];
                    prod *= if omega.count_ones() % 2 == 1 { v.conj() } else { v };
                }
                terms.push(prod);
            }
            pairwise_sum_c(&terms)
        })
        .collect();
    let avg = pairwise_sum_c(&per_x).re / total as f64;
    Ok(avg.max(0.0).powf(1.0 / (1u32 << d) as f64))
}

/// `||f||_{U^d}` via `||f||^{2^d} = E_h ||Delta_h f||^{2^{d-1}}_{U^{d-1}}`, with `U^2` by Fourier.
pub fn gowers_recursive(f: &GroupFunction, d: usize) -> Result<f64> {
    if !(1..=4).contains(&d) {
        return Err(Error::DegreeUnsupported(d));
    }
    let plan = FourierPlan::new(&f.group);
    Ok(gowers_power(f, d, &plan).max(0.0).powf(1.0 / (1u32 << d) as f64))
}

/// `||f||_{U^d}^{2^d}`.
fn gowers_power(f: &GroupFunction, d: usize, plan: &FourierPlan) -> f64 {
    match d {
        1 => f.mean().norm_sqr(),
        2 => {
            let mut v = f.values.clone();
            plan.forward_in_place(&mut v);
            let fourth: Vec<f64> = v.iter().map(|z| z.norm_sqr() * z.norm_sqr()).collect();
            pairwise_sum(&fourth)
        }
        _ => {
            let n = f.len();
            let parts: Vec<f64> = (0..n)
                .into_par_iter()
                .map(|h| gowers_power(&f.mult_derivative_idx(h), d - 1, plan))
                .collect();
            pairwise_sum(&parts) / n as f64
        }
    }
}

/// `||f||_{u^2} = max_xi |f^(xi)|`, ties to the smallest dual index.
pub fn u2_bias(f: &GroupFunction) -> NormReport {
    let plan = FourierPlan::new(&f.group);
    let mut v = f.values.clone();
    plan.forward_in_place(&mut v);
    let (best, value) = argmax_first(v.iter().map(|z| z.norm()));
    NormReport {
        value,
        d: 2,
        method: Method::Fourier,
        witness: Some(Witness::Linear { xi: f.group.coords(best) }),
    }
}

/// Index of the first maximum.
pub(crate) fn argmax_first(it: impl Iterator<Item = f64>) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in it.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best
}

/// Lexicographically first index whose value is within `tol` of the maximum.
pub(crate) fn argmax_tolerant(values: &[f64], tol: f64) -> usize {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    values.iter().position(|&v| v >= max - tol).unwrap_or(0)
}

/// All self-adjoint matrices on `Z/m_1 x ... x Z/m_r`, as upper-triangle digit vectors.
pub(crate) struct SymEnumerator {
    pub pairs: Vec<(usize, usize)>,
    pub moduli: Vec<u64>,
    pub count: u128,
}

impl SymEnumerator {
    pub fn new(g: &GroupSpec) -> Self {
        let r = g.rank();
        let mut pairs = Vec::new();
        let mut moduli = Vec::new();
        for i in 0..r {
            for j in i..r {
                pairs.push((i, j));
                moduli.push(entry_modulus(g, i, j));
            }
        }
        let count = moduli.iter().map(|&m| m as u128).product();
        Self { pairs, moduli, count }
    }

    pub fn matrix(&self, mut k: u128, r: usize) -> Vec<Vec<i64>> {
        let mut m = vec![vec![0i64; r]; r];
        for (idx, &(i, j)) in self.pairs.iter().enumerate().rev() {
            let md = self.moduli[idx] as u128;
            let v = (k % md) as i64;
            k /= md;
            m[i][j] = v;
            m[j][i] = v;
        }
        m
    }
}

/// Exact `u^3` on a coset `y + H`: maximize `|E_{x in y+H} f(x) e(-(Mt.t + xi.t))|`
/// over all quadratic phases in the subgroup coordinates `t`.
pub fn u3_oracle_coset(f: &GroupFunction, y: usize, h: &Subgroup, cap: u128) -> Result<NormReport> {
    if h.group != f.group || y >= f.len() {
        return Err(Error::SpecMismatch);
    }
    if h.order() % 2 == 0 {
        return Err(Error::EvenOrder(h.order()));
    }
    let cg = h.coordinate_group();
    let pts = h.coset(y);
    let sym = SymEnumerator::new(&cg);
    let work = sym.count * pts.len() as u128;
    if work > cap {
        return Err(Error::BudgetExceeded { needed: work, cap });
    }
    let l = cg.exponent();
    let coords: Vec<Vec<u64>> = (0..cg.len()).map(|i| cg.coords(i)).collect();
    let plan = FourierPlan::new(&cg);
    let r = cg.rank();
    let best: Vec<(f64, usize)> = (0..sym.count as usize)
        .into_par_iter()
        .map(|k| {
            let m = sym.matrix(k as u128, r);
            let q = QuadraticPhase { group: cg.clone(), m, xi: vec![0; r], c: 0.into() };
            let mut buf: Vec<Complex64> = pts
                .iter()
                .zip(&coords)
                .map(|(&x, t)| f.values[x] * e(-(q.eval_num(t) as f64) / l as f64))
                .collect();
            plan.forward_in_place(&mut buf);
            let (xi, v) = argmax_first(buf.iter().map(|z| z.norm()));
            (v, xi)
        })
        .collect();
    let values: Vec<f64> = best.iter().map(|b| b.0).collect();
    let k = argmax_tolerant(&values, 1e-12);
    let phase = QuadraticPhase {
        group: cg.clone(),
        m: sym.matrix(k as u128, r),
        xi: cg.coords(best[k].1),
        c: 0.into(),
    };
    Ok(NormReport {
        value: best[k].0,
        d: 3,
        method: Method::CosetOracle,
        witness: Some(Witness::Coset { base: y, gens: h.gens.clone(), phase }),
    })
}

/// Grid values `k + j/grid` for `k in [-grid, grid]`, `j in [0, grid)`.
pub fn bracket_grid(grid: u32) -> Vec<f64> {
    let g = grid as i64;
    let mut out = Vec::with_capacity(((2 * g + 1) * g) as usize);
    for k in -g..=g {
        for j in 0..g {
            out.push(k as f64 + j as f64 / g as f64);
        }
    }
    out
}

/// Lower bound for `u^3` on a region of `Z/N`: best correlation with a bracket quadratic whose
/// frequencies lie in `s` and whose coefficients lie on the grid of [`bracket_grid`].
pub fn u3_oracle_bracket(
    f: &GroupFunction,
    region: &[usize],
    s: &[u64],
    grid: u32,
    cap: u128,
) -> Result<NormReport> {
    if f.group.rank() != 1 {
        return Err(Error::SpecMismatch);
    }
    if s.len() > 4 {
        return Err(Error::TooManyFrequencies(s.len()));
    }
    if grid == 0 || grid > 64 || region.is_empty() {
        return Err(Error::InvalidArgument("grid must be in 1..=64 and region nonempty".into()));
    }
    let n = f.group.order();
    let d = s.len();
    let mut monomials: Vec<(usize, usize)> = Vec::new();
    for i in 0..d {
        for j in i..d {
            monomials.push((i, j));
        }
    }
    let nq = monomials.len();
    let ncoef = nq + d;
    let values = bracket_grid(grid);
    let v = values.len() as u128;
    let combos = v.pow(ncoef as u32);
    let work = combos * region.len() as u128;
    if work > cap {
        return Err(Error::BudgetExceeded { needed: work, cap });
    }
    // Basis monomial values per region point.
    let basis: Vec<Vec<f64>> = region
        .iter()
        .map(|&x| {
            let u: Vec<f64> = s.iter().map(|&xi| centered_frac((xi * x as u64 % n) as i64, n as i64)).collect();
            let mut b: Vec<f64> = monomials.iter().map(|&(i, j)| u[i] * u[j]).collect();
            b.extend(u);
            b
        })
        .collect();
    let fv: Vec<Complex64> = region.iter().map(|&x| f.values[x]).collect();
    let size = region.len() as f64;
    let eval = |k: u128| -> f64 {
        let coef = decode(k, values.len(), ncoef, &values);
        let terms: Vec<Complex64> = basis
            .iter()
            .zip(&fv)
            .map(|(b, &z)| {
                let phase: f64 = b.iter().zip(&coef).map(|(x, a)| x * a).sum();
                z * e(-phase)
            })
            .collect();
        pairwise_sum_c(&terms).norm() / size
    };
    let best: Vec<f64> = if ncoef == 0 {
        vec![eval(0)]
    } else {
        let per_first = v.pow(ncoef as u32 - 1);
        (0..values.len())
            .into_par_iter()
            .map(|a| (0..per_first).map(|k| eval(a as u128 * per_first + k)).fold(f64::NEG_INFINITY, f64::max))
            .collect()
    };
    let kbest = argmax_tolerant(&best, 1e-12);
    // Recover the exact argmax within the winning block, lexicographically first.
    let (k, value) = if ncoef == 0 {
        (0u128, best[0])
    } else {
        let per_first = v.pow(ncoef as u32 - 1);
        let target = best[kbest];
        let k = (0..per_first)
            .map(|k| kbest as u128 * per_first + k)
            .find(|&k| eval(k) >= target - 1e-12)
            .unwrap_or(kbest as u128 * per_first);
        (k, target)
    };
    let coef = decode(k, values.len(), ncoef, &values);
    let mut phase = BracketQuadratic::zero(n, s.to_vec());
    for (idx, &(i, j)) in monomials.iter().enumerate() {
        phase.quad[i][j] = coef[idx];
        phase.quad[j][i] = coef[idx];
    }
    phase.lin.copy_from_slice(&coef[nq..]);
    Ok(NormReport { value, d: 3, method: Method::BracketOracle, witness: Some(Witness::Bracket { phase }) })
}

fn decode(mut k: u128, base: usize, len: usize, values: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for slot in out.iter_mut().rev() {
        *slot = values[(k % base as u128) as usize];
        k /= base as u128;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{e_rat, Rational};

    #[test]
    fn constant_has_unit_norm() {
        let g: GroupSpec = "Z/3xZ/5".parse().unwrap();
        let f = GroupFunction::constant(&g, Complex64::new(1.0, 0.0));
        for d in 1..=3 {
            assert!((gowers_norm(&f, d, Method::Direct).unwrap().value - 1.0).abs() < 1e-12);
            assert!((gowers_norm(&f, d, Method::Recursive).unwrap().value - 1.0).abs() < 1e-12);
        }
        assert!((gowers_recursive(&f, 4).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(gowers_recursive(&f, 5), Err(Error::DegreeUnsupported(5)));
    }

    #[test]
    fn point_mass_values() {
        let g = GroupSpec::cyclic(5);
        let f = GroupFunction::indicator(&g, &[0]);
        let u2 = gowers_recursive(&f, 2).unwrap();
        let u3 = gowers_recursive(&f, 3).unwrap();
        assert!((u2 - 5f64.powf(-0.75)).abs() < 1e-12);
        assert!((u3 - 5f64.powf(-0.5)).abs() < 1e-12);
        assert!((gowers_direct(&f, 3, DEFAULT_BUDGET).unwrap() - u3).abs() < 1e-12);
    }

    #[test]
    fn quadratic_phase_has_unit_u3() {
        let g = GroupSpec::cyclic(5);
        let f = GroupFunction::from_fn(&g, |c| e_rat(Rational::new((c[0] * c[0]) as i64, 5)));
        assert!((gowers_recursive(&f, 3).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn u2_bias_examples() {
        let g = GroupSpec::cyclic(7);
        let f = GroupFunction::from_fn(&g, |c| e_rat(Rational::new(3 * c[0] as i64, 7)));
        let r = u2_bias(&f);
        assert!((r.value - 1.0).abs() < 1e-12);
        assert_eq!(r.witness, Some(Witness::Linear { xi: vec![3] }));
        let r = u2_bias(&GroupFunction::indicator(&g, &[0]));
        assert!((r.value - 1.0 / 7.0).abs() < 1e-12);
        assert_eq!(r.witness, Some(Witness::Linear { xi: vec![0] }));
    }

    #[test]
    fn coset_oracle_examples() {
        let g = GroupSpec::cyclic(5);
        let whole = Subgroup::whole(&g);
        let r = u3_oracle_coset(&GroupFunction::indicator(&g, &[0]), 0, &whole, DEFAULT_BUDGET).unwrap();
        assert!((r.value - 0.2).abs() < 1e-12);
        let q = QuadraticPhase::new(&g, vec![vec![3]], vec![1], 0.into()).unwrap();
        let f = GroupFunction::from_fn(&g, |c| e_rat(q.eval(c)));
        let r = u3_oracle_coset(&f, 0, &whole, DEFAULT_BUDGET).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        match r.witness {
            Some(Witness::Coset { phase, .. }) => {
                assert_eq!(phase.m, q.m);
                assert_eq!(phase.xi, q.xi);
            }
            other => panic!("unexpected witness {other:?}"),
        }
        let zero = GroupFunction::constant(&g, Complex64::default());
        assert_eq!(u3_oracle_coset(&zero, 2, &whole, DEFAULT_BUDGET).unwrap().value, 0.0);
        let g12 = GroupSpec::cyclic(12);
        let h = Subgroup::generated_by(&g12, &[3]).unwrap();
        let f = GroupFunction::constant(&g12, Complex64::new(1.0, 0.0));
        assert_eq!(u3_oracle_coset(&f, 0, &h, DEFAULT_BUDGET), Err(Error::EvenOrder(4)));
    }

    #[test]
    fn bracket_oracle_recovers_planted() {
        let n = 31u64;
        let g = GroupSpec::cyclic(n);
        let bq = BracketQuadratic { n, s: vec![3], quad: vec![vec![1.5]], lin: vec![-0.5], c: 0.0 };
        let f = GroupFunction::from_fn(&g, |c| e(bq.eval_real(c[0] as i64)));
        let region: Vec<usize> = (0..g.len()).collect();
        let r = u3_oracle_bracket(&f, &region, &[3], 2, DEFAULT_BUDGET).unwrap();
        assert!((r.value - 1.0).abs() < 1e-9);
        let one = GroupFunction::constant(&g, Complex64::new(1.0, 0.0));
        let r = u3_oracle_bracket(&one, &region[..10], &[3], 2, DEFAULT_BUDGET).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
    }
}
