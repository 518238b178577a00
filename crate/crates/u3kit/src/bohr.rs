//! Bohr sets `B(S, rho) = {x : ||xi . x|| < rho for all xi in S}`: membership, regularity,
//! separation, Bogolyubov-type inclusions and large coset progressions inside them.

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::dft;
use crate::group::{GroupFunction, GroupSpec, Rational, Subgroup};
use crate::lattice;

/// `||xi . x||_{R/Z}` for every `xi` in `S`, maximized, as a numerator over the group exponent.
fn norm_num(g: &GroupSpec, s_coords: &[Vec<u64>], x: &[u64]) -> u64 {
    let l = g.exponent();
    s_coords
        .iter()
        .map(|xi| {
            let k = g.pair_num(xi, x);
            k.min(l - k)
        })
        .max()
        .unwrap_or(0)
}

fn coords_of(g: &GroupSpec, s: &[usize]) -> Vec<Vec<u64>> {
    s.iter().map(|&xi| g.coords(xi)).collect()
}

/// Exact `||x||_S = max_{xi in S} ||xi . x||_{R/Z}`.
pub fn bohr_norm_exact(g: &GroupSpec, x: usize, s: &[usize]) -> Rational {
    let n = norm_num(g, &coords_of(g, s), &g.coords(x));
    Rational::new(n as i64, g.exponent() as i64)
}

/// `||x||_S` as a real number.
pub fn bohr_norm(g: &GroupSpec, x: usize, s: &[usize]) -> f64 {
    crate::group::rat_f64(bohr_norm_exact(g, x, s))
}

/// Numerators of `||x||_S` over the exponent, for every `x` in index order.
pub fn norm_table(g: &GroupSpec, s: &[usize]) -> Vec<u64> {
    let sc = coords_of(g, s);
    (0..g.len()).into_par_iter().map(|x| norm_num(g, &sc, &g.coords(x))).collect()
}

/// Whether `num / l < rho`.
fn below(num: u64, l: u64, rho: f64) -> bool {
    (num as f64) < rho * l as f64
}

/// A Bohr set with its members materialized in increasing index order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BohrSet {
    pub group: GroupSpec,
    #[serde(rename = "S")]
    pub s: Vec<usize>,
    pub rho: f64,
    pub members: Vec<usize>,
}

impl BohrSet {
    pub fn dim(&self) -> usize {
        self.s.len()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.members.binary_search(&x).is_ok()
    }

    /// `|B| / N`.
    pub fn density(&self) -> f64 {
        self.len() as f64 / self.group.order() as f64
    }

    pub fn indicator(&self) -> GroupFunction {
        GroupFunction::indicator(&self.group, &self.members)
    }
}

/// `B(S, rho)` by a full scan of the group.
pub fn bohr_set(g: &GroupSpec, s: &[usize], rho: f64) -> Result<BohrSet> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::InvalidArgument(format!("rho = {rho} must lie in (0, 1)")));
    }
    if s.iter().any(|&xi| xi >= g.len()) {
        return Err(Error::SpecMismatch);
    }
    Ok(bohr_from_table(g, s, rho, &norm_table(g, s)))
}

fn bohr_from_table(g: &GroupSpec, s: &[usize], rho: f64, table: &[u64]) -> BohrSet {
    let l = g.exponent();
    let members = (0..g.len()).filter(|&x| below(table[x], l, rho)).collect();
    BohrSet { group: g.clone(), s: s.to_vec(), rho, members }
}

/// Regularity from a sorted list of norm numerators.
fn regular_sorted(sorted: &[u64], l: u64, d: usize, rho: f64) -> bool {
    if d == 0 {
        return true;
    }
    let c = 100.0 * d as f64;
    let k0 = 1.0 / c;
    let size = |r: f64| sorted.partition_point(|&v| (v as f64) < r * l as f64) as f64;
    let size_le = |t: u64| sorted.partition_point(|&v| v <= t) as f64;
    let b = size(rho);
    let (lo, hi) = ((1.0 - k0) * rho * l as f64, (1.0 + k0) * rho * l as f64);
    let rl = rho * l as f64;
    let mut prev = None;
    for &t in sorted {
        if prev == Some(t) {
            continue;
        }
        prev = Some(t);
        let tf = t as f64;
        if tf >= rl && tf < hi {
            // Just above t the count is #{<= t}; kappa tends to t/rho - 1.
            if size_le(t) > (1.0 + c * (tf / rl - 1.0)) * b + 1e-9 {
                return false;
            }
        } else if tf > lo && tf < rl {
            // At radius t the count is #{< t}; kappa = t/rho - 1 < 0.
            let below_t = sorted.partition_point(|&v| v < t) as f64;
            if below_t < (1.0 - c * (1.0 - tf / rl)) * b - 1e-9 {
                return false;
            }
        }
    }
    size((1.0 + k0) * rho) <= 2.0 * b + 1e-9 && size((1.0 - k0) * rho) >= -1e-9
}

/// Whether `(1 - 100d|k|)|B(S,rho)| <= |B(S,(1+k)rho)| <= (1 + 100d|k|)|B(S,rho)|` for all
/// `|k| <= 1/100d`, decided at every radius where the size changes.
pub fn is_regular(b: &BohrSet) -> bool {
    let mut t = norm_table(&b.group, &b.s);
    t.sort_unstable();
    regular_sorted(&t, b.group.exponent(), b.dim(), b.rho)
}

/// A regular radius in `[eps, 2 eps]`, the smallest among the candidates tried.
pub fn find_regular_rho(g: &GroupSpec, s: &[usize], eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidArgument(format!("eps = {eps} must lie in (0, 1/2)")));
    }
    if s.is_empty() {
        return Ok(eps);
    }
    let mut t = norm_table(g, s);
    t.sort_unstable();
    let l = g.exponent() as f64;
    let mut distinct: Vec<f64> = t.iter().map(|&v| v as f64 / l).filter(|&v| v >= eps && v <= 2.0 * eps).collect();
    distinct.dedup();
    let mut cands = vec![eps, 2.0 * eps];
    cands.extend(distinct.iter().copied());
    cands.extend(distinct.windows(2).map(|w| (w[0] + w[1]) / 2.0));
    cands.extend((0..=4096).map(|i| eps * (1.0 + i as f64 / 4096.0)));
    cands.sort_by(f64::total_cmp);
    cands.dedup();
    cands
        .into_iter()
        .find(|&rho| regular_sorted(&t, g.exponent(), s.len(), rho))
        .ok_or_else(|| Error::NotFound(format!("regular radius in [{eps}, {}]", 2.0 * eps)))
}

/// `||xi||_Y = max_{y in Y} ||xi . y||_{R/Z}` for a finite set `Y` (typically a Bohr set).
pub fn dual_norm(g: &GroupSpec, xi: usize, y: &[usize]) -> f64 {
    let l = g.exponent();
    let xc = g.coords(xi);
    let m = y.iter().map(|&v| {
        let k = g.pair_num(&xc, &g.coords(v));
        k.min(l - k)
    });
    m.max().unwrap_or(0) as f64 / l as f64
}

/// A set `S` with `A ∩ B(S, 1/4) = {0}` and `|S| <= 1 + ceil(log2 |A|)`.
pub fn separating_bohr(g: &GroupSpec, a: &[usize]) -> Result<Vec<usize>> {
    if !a.contains(&0) {
        return Err(Error::NoZero);
    }
    let l = g.exponent();
    let mut rest: Vec<Vec<u64>> = a.iter().filter(|&&x| x != 0).map(|&x| g.coords(x)).collect();
    rest.sort();
    rest.dedup();
    let mut s = Vec::new();
    while !rest.is_empty() {
        let inside = |xi: usize| {
            let xc = g.coords(xi);
            rest.iter()
                .filter(|x| {
                    let k = g.pair_num(&xc, x);
                    4 * k.min(l - k) < l
                })
                .count()
        };
        let counts: Vec<usize> = (0..g.len()).into_par_iter().map(inside).collect();
        let (best, &cnt) = counts.iter().enumerate().min_by_key(|&(i, c)| (*c, i)).expect("nonempty group");
        if cnt == rest.len() {
            return Err(Error::NotFound("separating character".into()));
        }
        let xc = g.coords(best);
        rest.retain(|x| {
            let k = g.pair_num(&xc, x);
            4 * k.min(l - k) < l
        });
        s.push(best);
    }
    Ok(s)
}

/// Membership mask of `2A - 2A`.
pub fn two_a_minus_two_a(g: &GroupSpec, a: &[usize]) -> Vec<bool> {
    let n = g.len();
    let mut diff = vec![false; n];
    for &x in a {
        for &y in a {
            diff[g.sub(x, y)] = true;
        }
    }
    let d: Vec<usize> = (0..n).filter(|&x| diff[x]).collect();
    let mut out = vec![false; n];
    for &x in &d {
        for &y in &d {
            out[g.add(x, y)] = true;
        }
    }
    out
}

/// Outcome of the global Bogolyubov construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BogolyubovReport {
    #[serde(rename = "S")]
    pub s: Vec<usize>,
    pub alpha: f64,
    /// `2 delta^{-2}`.
    pub size_bound: f64,
    pub size_ok: bool,
    pub bohr_size: usize,
    pub sumset_size: usize,
    /// `B(S, 1/4) ⊆ 2A - 2A`, by enumeration.
    pub inclusion: bool,
}

/// Large spectrum `{xi : |1_A^(xi)| >= threshold}` in index order.
pub fn large_spectrum(g: &GroupSpec, a: &[usize], threshold: f64) -> Vec<usize> {
    let f = dft(&GroupFunction::indicator(g, a));
    (0..g.len()).filter(|&xi| f.values[xi].norm() >= threshold - 1e-12).collect()
}

/// `S = {xi : |1_A^(xi)| >= delta^{3/2} / sqrt 2}` with `B(S, 1/4) ⊆ 2A - 2A` verified.
pub fn bogolyubov(g: &GroupSpec, a: &[usize], delta: f64) -> Result<BogolyubovReport> {
    let density = a.len() as f64 / g.order() as f64;
    if !(delta > 0.0) || density + 1e-12 < delta {
        return Err(Error::DensityTooLow { density, required: delta });
    }
    let alpha = delta.powf(1.5) / 2f64.sqrt();
    let s = large_spectrum(g, a, alpha);
    let bohr = bohr_set(g, &s, 0.25)?;
    let sum = two_a_minus_two_a(g, a);
    let size_bound = 2.0 / (delta * delta);
    Ok(BogolyubovReport {
        size_ok: s.len() as f64 <= size_bound + 1e-9,
        alpha,
        size_bound,
        bohr_size: bohr.len(),
        sumset_size: sum.iter().filter(|&&b| b).count(),
        inclusion: bohr.members.iter().all(|&x| sum[x]),
        s,
    })
}

/// Outcome of the local Bogolyubov construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalBogolyubovReport {
    #[serde(rename = "S_prime")]
    pub s_prime: Vec<usize>,
    pub delta: f64,
    pub rho_prime: f64,
    /// Translate `x` with `A' = A ∩ (x + B')`.
    pub shift: usize,
    pub a_prime_size: usize,
    /// Size of the large spectrum `R` of `A'`.
    pub spectrum_size: usize,
    /// `B(R, 1/10) ⊆ 2A - 2A`.
    pub spectrum_inclusion: bool,
    /// `2^7 delta^{-3}`.
    pub size_bound: f64,
    pub size_ok: bool,
    /// `2^{-33} delta^6 rho / d`.
    pub radius: f64,
    pub inclusion: bool,
    /// `B(S ∪ S', radius) = {0}`.
    pub trivial: bool,
    /// Inclusion `B(S ∪ S', r) ⊆ 2A - 2A` holds for every `r` up to this value.
    pub max_radius: f64,
}

/// Local Bogolyubov for `A ⊆ B` with `B` regular, following the proof step by step.
pub fn local_bogolyubov(b: &BohrSet, a: &[usize]) -> Result<LocalBogolyubovReport> {
    let g = &b.group;
    if a.iter().any(|&x| !b.contains(x)) {
        return Err(Error::InvalidArgument("A must be a subset of B".into()));
    }
    let mut a = a.to_vec();
    a.sort_unstable();
    a.dedup();
    let delta = a.len() as f64 / b.len() as f64;
    if a.is_empty() {
        return Err(Error::DensityTooLow { density: 0.0, required: f64::MIN_POSITIVE });
    }
    if !is_regular(b) {
        return Err(Error::NotRegular);
    }
    let d = b.dim().max(1) as f64;
    let eps = delta / (400.0 * d);
    let rho_prime = find_regular_rho(g, &b.s, eps * b.rho)?;
    let bp = bohr_set(g, &b.s, rho_prime)?;
    let in_a = {
        let mut m = vec![false; g.len()];
        a.iter().for_each(|&x| m[x] = true);
        m
    };
    let counts: Vec<usize> = b
        .members
        .par_iter()
        .map(|&x| bp.members.iter().filter(|&&y| in_a[g.add(x, y)]).count())
        .collect();
    let (best, _) = counts.iter().enumerate().max_by_key(|&(i, c)| (*c, std::cmp::Reverse(i))).expect("B contains 0");
    let shift = b.members[best];
    let a_prime: Vec<usize> = bp.members.iter().map(|&y| g.add(shift, y)).filter(|&z| in_a[z]).collect();

    let threshold = delta.powf(1.5) * bp.density() / 8.0;
    let r = large_spectrum(g, &a_prime, threshold);
    let sum = two_a_minus_two_a(g, &a);
    let r_bohr = bohr_set(g, &r, 0.1)?;
    let spectrum_inclusion = r_bohr.members.iter().all(|&x| sum[x]);

    let theta = 2f64.powi(-33) * delta.powi(6) / d;
    let small = bohr_set(g, &b.s, theta * b.rho)?;
    let sep = 2f64.powi(28) * delta.powi(-6) * theta * d;
    let mut s_prime: Vec<usize> = Vec::new();
    for &xi in &r {
        if s_prime.iter().all(|&c| dual_norm(g, g.sub(xi, c), &small.members) >= sep) {
            s_prime.push(xi);
        }
    }
    let mut all = b.s.clone();
    all.extend(&s_prime);
    let radius = theta * b.rho;
    let inner = bohr_set(g, &all, radius)?;
    let table = norm_table(g, &all);
    let l = g.exponent() as f64;
    let max_radius =
        (0..g.len()).filter(|&x| !sum[x]).map(|x| table[x] as f64 / l).fold(1.0, f64::min);
    let size_bound = 128.0 * delta.powi(-3);
    Ok(LocalBogolyubovReport {
        size_ok: s_prime.len() as f64 <= size_bound + 1e-9,
        s_prime,
        delta,
        rho_prime,
        shift,
        a_prime_size: a_prime.len(),
        spectrum_size: r.len(),
        spectrum_inclusion,
        size_bound,
        radius,
        inclusion: inner.members.iter().all(|&x| sum[x]),
        trivial: inner.members == [0],
        max_radius,
    })
}

/// A symmetric coset progression `a + {sum l_j v_j : |l_j| < L_j} + H`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CosetProgression {
    pub group: GroupSpec,
    pub base: usize,
    pub generators: Vec<usize>,
    pub lengths: Vec<u64>,
    /// Independent generators of `H`.
    #[serde(rename = "H")]
    pub h: Vec<usize>,
    pub h_order: u64,
    pub proper: bool,
}

impl CosetProgression {
    /// Progression coefficient vectors `l` with `|l_j| < L_j`, in lexicographic order.
    pub fn coefficients(&self) -> Vec<Vec<i64>> {
        let mut out = vec![vec![]];
        for &len in &self.lengths {
            let l = len as i64;
            out = out
                .into_iter()
                .flat_map(|c: Vec<i64>| {
                    (-(l - 1)..l).map(move |t| {
                        let mut c = c.clone();
                        c.push(t);
                        c
                    })
                })
                .collect();
        }
        out
    }

    /// `a + sum l_j v_j`.
    pub fn point(&self, l: &[i64]) -> usize {
        let g = &self.group;
        l.iter().zip(&self.generators).fold(self.base, |acc, (&c, &v)| g.add(acc, g.scale(v, c)))
    }

    pub fn subgroup(&self) -> Result<Subgroup> {
        Subgroup::generated_by(&self.group, &self.h)
    }

    /// Nominal size `|H| prod (2L_j - 1)`.
    pub fn nominal_size(&self) -> u128 {
        self.lengths.iter().fold(self.h_order as u128, |acc, &l| acc * (2 * l as u128 - 1))
    }

    /// All elements with multiplicity, as `(coefficients, element)` pairs over `P` then `H`.
    pub fn elements(&self) -> Result<Vec<usize>> {
        let h = self.subgroup()?.elements();
        let mut out = Vec::new();
        for l in self.coefficients() {
            let p = self.point(&l);
            out.extend(h.iter().map(|&y| self.group.add(p, y)));
        }
        Ok(out)
    }
}

/// Outcome of extracting a coset progression from a Bohr set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProgressionReport {
    pub progression: CosetProgression,
    pub d: usize,
    pub d_prime: usize,
    /// Reduced basis of `Gamma`, scaled by `scale` to integers.
    pub lattice_basis: Vec<Vec<i64>>,
    pub scale: u64,
    /// `prod |w_j| <= 2 d! covol(Gamma)`.
    pub basis_bound_ok: bool,
    /// `d^{-2d} rho`.
    pub inner_radius: f64,
    pub inner_inclusion: bool,
    /// Inclusion at `d'^{-2d'} rho`.
    pub inner_inclusion_d_prime: bool,
    pub outer_inclusion: bool,
    /// The images `({xi . v_j})_{xi in S}` are linearly independent.
    pub independent: bool,
    /// Which basis vectors carry a generator (`L_j >= 2`).
    pub used: Vec<bool>,
}

impl ProgressionReport {
    /// Exact images `({xi . v_j})_{xi in S}` of the generators, scaled by `scale`; each
    /// coordinate lies strictly inside `(-scale/4, scale/4)`.
    pub fn images(&self) -> Vec<Vec<i64>> {
        self.lattice_basis.iter().zip(&self.used).filter(|(_, &u)| u).map(|(w, _)| w.clone()).collect()
    }
}

/// A proper coset progression `P + H` with `B(S, d^{-2d} rho) ⊆ P + H ⊆ B(S, rho)`,
/// built from a reduced basis of `Gamma = phi(G) + Z^S` where `phi(x) = (xi . x)_{xi in S}`.
pub fn coset_progression_in_bohr(g: &GroupSpec, s: &[usize], rho: f64) -> Result<ProgressionReport> {
    if rho >= 0.25 || rho <= 0.0 {
        return Err(Error::RhoTooLarge(rho));
    }
    if s.iter().any(|&xi| xi >= g.len()) {
        return Err(Error::SpecMismatch);
    }
    let d = s.len();
    let l = g.exponent();
    let sc = coords_of(g, s);
    let phi = |x: usize| -> Vec<u64> {
        let xc = g.coords(x);
        sc.iter().map(|xi| g.pair_num(xi, &xc)).collect()
    };
    let table: Vec<Vec<u64>> = (0..g.len()).into_par_iter().map(phi).collect();

    let mut gens: Vec<Vec<i128>> = (0..d)
        .map(|i| (0..d).map(|j| if i == j { l as i128 } else { 0 }).collect())
        .collect();
    for i in 0..g.rank() {
        let mut c = vec![0u64; g.rank()];
        c[i] = 1;
        gens.push(table[g.index(&c)].iter().map(|&v| v as i128).collect());
    }
    let basis = if d == 0 { Vec::new() } else { lattice::reduced_basis(&gens) };
    let covol = lattice::det(&basis).unsigned_abs() as f64;
    let fact: f64 = (1..=d).map(|k| k as f64).product();
    let prod: f64 = basis.iter().map(|b| lattice::euclid_norm(b)).product();
    let basis_bound_ok = prod <= 2.0 * fact * covol * (1.0 + 1e-12);

    let mut generators = Vec::new();
    let mut lengths = Vec::new();
    let mut used = Vec::new();
    for b in &basis {
        let x = l as f64 * rho / (d as f64 * lattice::euclid_norm(b));
        let len = x.ceil().max(1.0) as u64;
        used.push(len >= 2);
        if len < 2 {
            continue;
        }
        let target: Vec<u64> = b.iter().map(|&v| v.rem_euclid(l as i128) as u64).collect();
        let v = (0..g.len())
            .find(|&x| table[x] == target)
            .ok_or_else(|| Error::NotFound("preimage of a lattice vector".into()))?;
        generators.push(v);
        lengths.push(len);
    }
    let d_prime = generators.len();

    let kernel: Vec<usize> = (0..g.len()).filter(|&x| table[x].iter().all(|&v| v == 0)).collect();
    let h = Subgroup::generated_by(g, &kernel)?;
    let mut prog = CosetProgression {
        group: g.clone(),
        base: 0,
        generators,
        lengths,
        h: h.gens.clone(),
        h_order: h.order(),
        proper: false,
    };
    if prog.nominal_size() > g.len() as u128 {
        return Err(Error::NotProper);
    }
    let elems = prog.elements()?;
    let mut seen = vec![false; g.len()];
    let mut proper = true;
    for &x in &elems {
        if std::mem::replace(&mut seen[x], true) {
            proper = false;
        }
    }
    prog.proper = proper;

    let norms = norm_table(g, s);
    let outer_inclusion = elems.iter().all(|&x| below(norms[x], l, rho));
    let pow = |k: usize| if k == 0 { 1.0 } else { (k as f64).powi(-2 * k as i32) };
    let inner_radius = pow(d) * rho;
    let covered = |r: f64| (0..g.len()).all(|x| !below(norms[x], l, r) || seen[x]);
    let used_basis: Vec<Vec<i128>> = basis.iter().zip(&used).filter(|(_, &u)| u).map(|(b, _)| b.clone()).collect();
    let gram: Vec<Vec<i128>> = used_basis
        .iter()
        .map(|a| used_basis.iter().map(|b| a.iter().zip(b).map(|(x, y)| x * y).sum()).collect())
        .collect();
    Ok(ProgressionReport {
        d,
        d_prime,
        lattice_basis: basis.iter().map(|b| b.iter().map(|&v| v as i64).collect()).collect(),
        scale: l,
        basis_bound_ok,
        inner_radius,
        inner_inclusion: covered(inner_radius),
        inner_inclusion_d_prime: covered(pow(d_prime) * rho),
        outer_inclusion,
        independent: lattice::det(&gram) != 0,
        progression: prog,
        used,
    })
}

/// Exact `||x||_S` for every `x` as rationals (used by oracles and tests).
pub fn norm_table_exact(g: &GroupSpec, s: &[usize]) -> Vec<Rational> {
    let l = g.exponent() as i64;
    norm_table(g, s).into_iter().map(|v| Ratio::new(v as i64, l)).collect()
}
