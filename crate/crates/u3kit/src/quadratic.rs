//! Quadratic phases `Mx.x + xi.x + c`, bracket quadratics, and the quadratic-form sublemmas.

use num_integer::Integer;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bohr::{CosetProgression, ProgressionReport};
use crate::error::{Error, Result};
use crate::fp;
use crate::group::{frac_rat, is_prime, mod_inv, rat_to_string, GroupSpec, PhaseMap, Rational, Subgroup};
use crate::norms::SymEnumerator;

/// A quadratic phase `x -> Mx.x + xi.x + c` on a product of cyclic groups.
///
/// `M` is stored as a symmetric integer matrix with `Me_i . e_j = m_ij / gcd(n_i, n_j)`,
/// so that `Mx.x = sum_{i,j} m_ij x_i x_j / gcd(n_i, n_j)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadraticPhase {
    pub group: GroupSpec,
    pub m: Vec<Vec<i64>>,
    pub xi: Vec<u64>,
    #[serde(with = "rat_serde")]
    pub c: Rational,
}

pub(crate) mod rat_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::group::{parse_rat, rat_to_string, Rational};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&rat_to_string(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rat(&s).map_err(serde::de::Error::custom)
    }
}

/// `gcd(n_i, n_j)`, the modulus of the `(i, j)` entry of a self-adjoint matrix.
pub fn entry_modulus(g: &GroupSpec, i: usize, j: usize) -> u64 {
    g.orders()[i].gcd(&g.orders()[j])
}

impl QuadraticPhase {
    pub fn zero(group: &GroupSpec) -> Self {
        let k = group.rank();
        Self { group: group.clone(), m: vec![vec![0; k]; k], xi: vec![0; k], c: Rational::from_integer(0) }
    }

    /// Build with entries reduced to their canonical ranges; `m` is symmetrized from its upper triangle.
    pub fn new(group: &GroupSpec, m: Vec<Vec<i64>>, xi: Vec<i64>, c: Rational) -> Result<Self> {
        let k = group.rank();
        if m.len() != k || m.iter().any(|r| r.len() != k) || xi.len() != k {
            return Err(Error::SpecMismatch);
        }
        let mut mm = vec![vec![0; k]; k];
        for i in 0..k {
            for j in i..k {
                let g = entry_modulus(group, i, j) as i64;
                mm[i][j] = m[i][j].rem_euclid(g);
                mm[j][i] = mm[i][j];
            }
        }
        let xi = xi.iter().zip(group.orders()).map(|(&v, &n)| v.rem_euclid(n as i64) as u64).collect();
        Ok(Self { group: group.clone(), m: mm, xi, c: frac_rat(c) })
    }

    /// `Mx.x + xi.x` as a numerator over the group exponent.
    pub fn eval_num(&self, x: &[u64]) -> u64 {
        let g = &self.group;
        let l = g.exponent() as i128;
        let k = g.rank();
        let mut acc: i128 = 0;
        for i in 0..k {
            for j in 0..k {
                let gij = entry_modulus(g, i, j) as i128;
                let t = self.m[i][j] as i128 * x[i] as i128 % gij * x[j] as i128 % gij;
                acc += t * (l / gij);
            }
            let n = g.orders()[i] as i128;
            acc += (self.xi[i] as i128 * x[i] as i128 % n) * (l / n);
        }
        acc.rem_euclid(l) as u64
    }

    /// `phi(x)` exactly, in `[0, 1)`.
    pub fn eval(&self, x: &[u64]) -> Rational {
        frac_rat(Rational::new(self.eval_num(x) as i64, self.group.exponent() as i64) + self.c)
    }

    /// `Mx . y` exactly.
    pub fn bilinear(&self, x: &[u64], y: &[u64]) -> Rational {
        let g = &self.group;
        let mut acc = Rational::from_integer(0);
        for i in 0..g.rank() {
            for j in 0..g.rank() {
                let gij = entry_modulus(g, i, j) as i64;
                acc += Rational::new(self.m[i][j] * (x[i] as i64 % gij) * (y[j] as i64 % gij) % gij, gij);
            }
        }
        frac_rat(acc)
    }
}

/// `{t}` for `t = r / n` with values in `(-1/2, 1/2]`, exact.
pub fn centered_frac(r: i64, n: i64) -> f64 {
    let mut v = r.rem_euclid(n);
    if 2 * v > n {
        v -= n;
    }
    v as f64 / n as f64
}

/// A bracket quadratic `sum_{i<=j} a_ij {xi_i x/N}{xi_j x/N} + sum_i a_i {xi_i x/N}` on `Z/N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BracketQuadratic {
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "S")]
    pub s: Vec<u64>,
    /// Symmetric coefficient matrix; only the upper triangle (with diagonal) is summed.
    pub quad: Vec<Vec<f64>>,
    pub lin: Vec<f64>,
    /// Degree-zero term.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub c: f64,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

impl BracketQuadratic {
    pub fn zero(n: u64, s: Vec<u64>) -> Self {
        let d = s.len();
        Self { n, s, quad: vec![vec![0.0; d]; d], lin: vec![0.0; d], c: 0.0 }
    }

    /// Real-valued lift of the phase at `x` (before reduction mod 1).
    pub fn eval_real(&self, x: i64) -> f64 {
        let n = self.n as i64;
        let u: Vec<f64> = self.s.iter().map(|&xi| centered_frac(xi as i64 * x % n, n)).collect();
        let mut acc = self.c;
        for i in 0..u.len() {
            for j in i..u.len() {
                acc += self.quad[i][j] * u[i] * u[j];
            }
            acc += self.lin[i] * u[i];
        }
        acc
    }

    /// `bq(x) mod 1`.
    pub fn eval(&self, x: i64) -> crate::group::TorusValue {
        crate::group::TorusValue::approx(self.eval_real(x))
    }
}

/// Divide by two modulo an odd modulus.
pub(crate) fn half_mod(v: i64, m: i64) -> i64 {
    let inv2 = mod_inv(2, m).expect("odd modulus");
    (v.rem_euclid(m) * inv2).rem_euclid(m)
}

/// `r / 2` in `R/Z`, choosing the representative in `[0, 1/2)`.
fn half_torus(r: Rational) -> Rational {
    frac_rat(r) / 2
}

/// Whether all third differences `sum_omega (-1)^|omega| phi(x + omega.h)` vanish on every
/// 3-dimensional cube contained in `domain`.
pub fn is_locally_quadratic(phi: &PhaseMap, domain: &[usize], cap: u128) -> Result<bool> {
    let g = &phi.group;
    if domain.iter().any(|&x| x >= g.len()) {
        return Err(Error::SpecMismatch);
    }
    let work = (domain.len() as u128).pow(4);
    if work > cap {
        return Err(Error::BudgetExceeded { needed: work, cap });
    }
    let mut inside = vec![false; g.len()];
    domain.iter().for_each(|&x| inside[x] = true);
    let v = &phi.values;
    let ok = domain.par_iter().all(|&x| {
        let steps: Vec<usize> = domain.iter().map(|&y| g.sub(y, x)).collect();
        for &h1 in &steps {
            let x1 = g.add(x, h1);
            for &h2 in &steps {
                let (x2, x12) = (g.add(x, h2), g.add(x1, h2));
                if !inside[x12] {
                    continue;
                }
                for &h3 in &steps {
                    let pts = [g.add(x1, h3), g.add(x2, h3), g.add(x12, h3)];
                    if pts.iter().any(|&p| !inside[p]) {
                        continue;
                    }
                    let x3 = g.add(x, h3);
                    let d = v[x] - v[x1] - v[x2] - v[x3] + v[x12] + v[pts[0]] + v[pts[1]] - v[pts[2]];
                    if !d.is_integer() {
                        return false;
                    }
                }
            }
        }
        true
    });
    Ok(ok)
}

fn unit(g: &GroupSpec, i: usize) -> Vec<u64> {
    let mut c = vec![0; g.rank()];
    c[i] = 1;
    c
}

/// Integer numerator `r * n`, failing when `r` is not a multiple of `1/n`.
fn numer_over(r: Rational, n: u64) -> Result<i64> {
    let t = frac_rat(r) * Rational::from_integer(n as i64);
    if t.is_integer() {
        Ok(t.to_integer())
    } else {
        Err(Error::NotQuadratic(format!("value {} is not a multiple of 1/{n}", rat_to_string(&r))))
    }
}

/// Parameters `(M, xi, c)` with `phi(x) = Mx.x + xi.x + c` exactly on all of `G`.
pub fn classify_global_quadratic(phi: &PhaseMap) -> Result<QuadraticPhase> {
    let g = &phi.group;
    if !g.is_odd() {
        return Err(Error::EvenOrder(g.order()));
    }
    let k = g.rank();
    let c = phi.values[0];
    let psi = |x: &[u64]| frac_rat(phi.values[g.index(x)] - c);
    let mut m = vec![vec![0i64; k]; k];
    let mut xi = vec![0i64; k];
    for i in 0..k {
        let n = g.orders()[i];
        if n == 1 {
            continue;
        }
        let ei = unit(g, i);
        let mut two = ei.clone();
        two[i] = 2 % n;
        let a1 = psi(&ei);
        let diag = numer_over(psi(&two) - a1 * 2, n)?;
        m[i][i] = half_mod(diag, n as i64);
        xi[i] = numer_over(a1, n)? - m[i][i];
        for j in i + 1..k {
            let gij = entry_modulus(g, i, j);
            if gij == 1 {
                continue;
            }
            let mut eij = ei.clone();
            eij[j] = 1;
            let cross = numer_over(psi(&eij) - a1 - psi(&unit(g, j)), gij)?;
            m[i][j] = half_mod(cross, gij as i64);
            m[j][i] = m[i][j];
        }
    }
    let q = QuadraticPhase::new(g, m, xi, c)?;
    if (0..g.len()).all(|x| q.eval(&g.coords(x)) == phi.values[x]) {
        Ok(q)
    } else {
        Err(Error::NotQuadratic("pointwise reconstruction failed".into()))
    }
}

/// A global quadratic phase agreeing with `phi` on the coset `y + H`.
///
/// The quadratic part is the first self-adjoint matrix (in enumeration order) whose form
/// restricts to that of `phi` on `H`; the linear part is the first character completing it.
/// When `H` is not a direct summand such a matrix need not exist and `NotExtendable` is returned.
pub fn extend_from_coset(phi: &PhaseMap, y: usize, h: &Subgroup, cap: u128) -> Result<QuadraticPhase> {
    let g = &phi.group;
    if &h.group != g || y >= g.len() {
        return Err(Error::SpecMismatch);
    }
    if !g.is_odd() {
        return Err(Error::EvenOrder(g.order()));
    }
    let cg = h.coordinate_group();
    let pts = h.coset(y);
    let local = PhaseMap { group: cg.clone(), values: pts.iter().map(|&x| phi.values[x]).collect() };
    let qh = classify_global_quadratic(&local)?;
    let gens: Vec<Vec<u64>> = h.gens.iter().map(|&v| g.coords(v)).collect();
    let sym = SymEnumerator::new(g);
    if sym.count > cap {
        return Err(Error::BudgetExceeded { needed: sym.count, cap });
    }
    let r = gens.len();
    let target: Vec<Vec<Rational>> = (0..r)
        .map(|a| (0..r).map(|b| qh.bilinear(&unit(&cg, a), &unit(&cg, b))).collect())
        .collect();
    let found = (0..sym.count as u64).into_par_iter().find_first(|&k| {
        let q = QuadraticPhase { group: g.clone(), m: sym.matrix(k as u128, g.rank()), xi: vec![0; g.rank()], c: 0.into() };
        (0..r).all(|a| (a..r).all(|b| q.bilinear(&gens[a], &gens[b]) == target[a][b]))
    });
    let Some(k) = found else {
        return Err(Error::NotExtendable(format!("no self-adjoint form on {g} restricts to the one on H")));
    };
    let mut q = QuadraticPhase { group: g.clone(), m: sym.matrix(k as u128, g.rank()), xi: vec![0; g.rank()], c: 0.into() };
    let yc = g.coords(y);
    // Need (2My + xi) . g_a = xi_H . e_a on each generator.
    let want: Vec<Rational> = (0..r)
        .map(|a| frac_rat(cg.pair_coords(&qh.xi, &unit(&cg, a)) - q.bilinear(&yc, &gens[a]) * 2))
        .collect();
    let xi = (0..g.len())
        .into_par_iter()
        .find_first(|&x| {
            let xc = g.coords(x);
            gens.iter().zip(&want).all(|(v, w)| g.pair_coords(&xc, v) == *w)
        })
        .ok_or_else(|| Error::NotExtendable("no character extends the linear part".into()))?;
    q.xi = g.coords(xi);
    q.c = frac_rat(phi.values[y] - q.eval(&yc));
    if pts.iter().all(|&x| q.eval(&g.coords(x)) == phi.values[x]) {
        Ok(q)
    } else {
        Err(Error::NotQuadratic("extension does not agree on the coset".into()))
    }
}

pub(crate) mod rat_vec_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::group::{parse_rat, rat_to_string, Rational};

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(rat_to_string))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter().map(|x| parse_rat(x).map_err(serde::de::Error::custom)).collect()
    }
}

pub(crate) mod rat_mat_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::group::{parse_rat, rat_to_string, Rational};

    pub fn serialize<S: Serializer>(m: &[Vec<Rational>], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(m.iter().map(|r| r.iter().map(rat_to_string).collect::<Vec<_>>()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Rational>>, D::Error> {
        let v = Vec::<Vec<String>>::deserialize(d)?;
        v.iter()
            .map(|r| r.iter().map(|x| parse_rat(x).map_err(serde::de::Error::custom)).collect())
            .collect()
    }
}

/// A quadratic phase on a coset progression `a + sum l_i v_i + h`:
/// `Mh.h + xi_0.h + c + 2 sum_i l_i xi_i.h + sum_{i,j} l_i l_j lambda_ij + sum_i l_i eta_i`,
/// with `h` in the coordinates of `H`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProgressionQuadratic {
    /// `(M, xi_0, c)` on the coordinate group of `H`.
    pub on_h: QuadraticPhase,
    /// `xi_i` in the coordinates of the dual of `H`.
    pub xi: Vec<Vec<u64>>,
    #[serde(with = "rat_mat_serde")]
    pub lambda: Vec<Vec<Rational>>,
    #[serde(with = "rat_vec_serde")]
    pub eta: Vec<Rational>,
}

impl ProgressionQuadratic {
    /// Value at coefficients `l` and subgroup coordinates `t`.
    pub fn eval(&self, l: &[i64], t: &[u64]) -> Rational {
        let cg = &self.on_h.group;
        let mut acc = self.on_h.eval(t);
        for (i, &li) in l.iter().enumerate() {
            let lr = Rational::from_integer(li);
            acc += cg.pair_coords(&self.xi[i], t) * 2 * lr + self.eta[i] * lr;
            for (j, &lj) in l.iter().enumerate() {
                acc += self.lambda[i][j] * lr * lj;
            }
        }
        frac_rat(acc)
    }
}

/// Coefficients of `phi` in the representation of [`ProgressionQuadratic`], verified on every
/// point of `P + H`.
pub fn quadratic_on_coset_progression(phi: &PhaseMap, p: &CosetProgression) -> Result<ProgressionQuadratic> {
    let g = &phi.group;
    if &p.group != g {
        return Err(Error::SpecMismatch);
    }
    if !g.is_odd() {
        return Err(Error::EvenOrder(g.order()));
    }
    if !p.proper {
        return Err(Error::NotProper);
    }
    let h = p.subgroup()?;
    let cg = h.coordinate_group();
    let at = |l: &[i64], t: &[u64]| phi.values[g.add(p.point(l), h.embed(t))];
    let d = p.generators.len();
    let zero = vec![0i64; d];
    let e = |i: usize, s: i64| {
        let mut v = zero.clone();
        v[i] = s;
        v
    };
    let on_h = classify_global_quadratic(&PhaseMap {
        group: cg.clone(),
        values: (0..cg.len()).map(|i| at(&zero, &cg.coords(i))).collect(),
    })?;
    let c = on_h.c;
    let mut xi = Vec::with_capacity(d);
    for i in 0..d {
        let vi = e(i, 1);
        let base = at(&vi, &vec![0; cg.rank()]);
        let mut chi = Vec::with_capacity(cg.rank());
        for a in 0..cg.rank() {
            let n = cg.orders()[a];
            let ta = unit(&cg, a);
            let diff = at(&vi, &ta) - base - at(&zero, &ta) + c;
            chi.push(if n == 1 { 0 } else { half_mod(numer_over(diff, n)?, n as i64) as u64 });
        }
        xi.push(chi);
    }
    let f = |l: &[i64]| frac_rat(at(l, &vec![0; cg.rank()]) - c);
    let mut lambda = vec![vec![Rational::from_integer(0); d]; d];
    let mut eta = vec![Rational::from_integer(0); d];
    for i in 0..d {
        let (fp, fm) = (f(&e(i, 1)), f(&e(i, -1)));
        lambda[i][i] = half_torus(fp + fm);
        eta[i] = frac_rat(fp - lambda[i][i]);
    }
    for i in 0..d {
        for j in i + 1..d {
            let mut l = e(i, 1);
            l[j] = 1;
            let v = half_torus(f(&l) - f(&e(i, 1)) - f(&e(j, 1)));
            lambda[i][j] = v;
            lambda[j][i] = v;
        }
    }
    let out = ProgressionQuadratic { on_h, xi, lambda, eta };
    let ok = p.coefficients().par_iter().all(|l| (0..cg.len()).all(|k| {
        let t = cg.coords(k);
        out.eval(l, &t) == at(l, &t)
    }));
    if ok {
        Ok(out)
    } else {
        Err(Error::NotQuadratic("representation fails on P + H".into()))
    }
}

type Q128 = num_rational::Ratio<i128>;

/// Solve the square system `a x = b` exactly; `None` when singular.
fn solve(mut a: Vec<Vec<Q128>>, mut b: Vec<Vec<Q128>>) -> Option<Vec<Vec<Q128>>> {
    let n = a.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        b.swap(col, piv);
        let s = a[col][col];
        a[col].iter_mut().for_each(|x| *x /= s);
        b[col].iter_mut().for_each(|x| *x /= s);
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col];
                let (ar, br) = (a[col].clone(), b[col].clone());
                a[r].iter_mut().zip(&ar).for_each(|(x, y)| *x -= f * y);
                b[r].iter_mut().zip(&br).for_each(|(x, y)| *x -= f * y);
            }
        }
    }
    Some(b)
}

/// A bracket quadratic with frequencies in `S` agreeing with `phi` on the progression `P`
/// extracted from `B(S, rho)` on `Z/N`, `N` prime.
pub fn bracket_from_progression(phi: &PhaseMap, s: &[usize], report: &ProgressionReport, rho: f64) -> Result<BracketQuadratic> {
    let g = &phi.group;
    let n = g.order();
    if g.rank() != 1 || !is_prime(n) {
        return Err(Error::NotPrime(n));
    }
    if rho >= 0.25 {
        return Err(Error::RhoTooLarge(rho));
    }
    let p = &report.progression;
    if p.h_order != 1 || p.base != 0 || s.len() != report.d {
        return Err(Error::InvalidArgument("progression must be a plain progression from B(S, rho)".into()));
    }
    let coef = quadratic_on_coset_progression(phi, p)?;
    let w: Vec<Vec<Q128>> = report
        .images()
        .iter()
        .map(|v| v.iter().map(|&x| Q128::new(x as i128, report.scale as i128)).collect())
        .collect();
    let dp = w.len();
    let d = s.len();
    let gram: Vec<Vec<Q128>> = w
        .iter()
        .map(|a| w.iter().map(|b| a.iter().zip(b).map(|(x, y)| x * y).sum()).collect())
        .collect();
    let ident: Vec<Vec<Q128>> =
        (0..dp).map(|i| (0..dp).map(|j| Q128::from_integer((i == j) as i128)).collect()).collect();
    let ginv = solve(gram, ident).ok_or(Error::DependentGenerators)?;
    // u_i = sum_k ginv[i][k] w_k, so that w_j . u_i = delta_ij.
    let u: Vec<Vec<f64>> = (0..dp)
        .map(|i| {
            (0..d)
                .map(|a| {
                    let v: Q128 = (0..dp).map(|k| ginv[i][k] * w[k][a]).sum();
                    *v.numer() as f64 / *v.denom() as f64
                })
                .collect()
        })
        .collect();
    let lam = |i: usize, j: usize| crate::group::rat_f64(coef.lambda[i][j]);
    let mut bq = BracketQuadratic::zero(n, s.iter().map(|&x| x as u64).collect());
    for a in 0..d {
        for b in a..d {
            let mut acc = 0.0;
            for i in 0..dp {
                for j in 0..dp {
                    acc += lam(i, j) * u[i][a] * u[j][b];
                }
            }
            bq.quad[a][b] = if a == b { acc } else { 2.0 * acc };
            bq.quad[b][a] = bq.quad[a][b];
        }
        bq.lin[a] = (0..dp).map(|i| crate::group::rat_f64(coef.eta[i]) * u[i][a]).sum();
    }
    bq.c = crate::group::rat_f64(coef.on_h.c);
    let ok = p.coefficients().iter().all(|l| {
        let x = p.point(l);
        let diff = bq.eval_real(x as i64) - crate::group::rat_f64(phi.values[x]);
        (diff - diff.round()).abs() < 1e-9
    });
    if ok {
        Ok(bq)
    } else {
        Err(Error::NotQuadratic("bracket quadratic disagrees on P".into()))
    }
}

fn check_field(p: u64) -> Result<()> {
    if p == 2 {
        Err(Error::EvenOrder(2))
    } else if !is_prime(p) {
        Err(Error::NotPrime(p))
    } else {
        Ok(())
    }
}

fn check_matrix(m: &[Vec<i64>], w: &[fp::Vector]) -> Result<usize> {
    let n = m.len();
    if m.iter().any(|r| r.len() != n) || w.iter().any(|v| v.len() != n) {
        return Err(Error::SpecMismatch);
    }
    Ok(n)
}

/// First nonzero `x` in `span(w)` (scanning coefficient vectors in order) with `x.Mx = 0`,
/// over `F_p`. A subspace of dimension above 3 is searched through its first three basis vectors.
pub fn isotropic_vector(p: u64, m: &[Vec<i64>], w: &[fp::Vector]) -> Result<fp::Vector> {
    check_field(p)?;
    check_matrix(m, w)?;
    let (basis, _) = fp::rref(w, p);
    let basis: Vec<fp::Vector> = basis.into_iter().take(3).collect();
    isotropic_in(p, m, &basis).ok_or_else(|| Error::NotFound("isotropic vector".into()))
}

fn isotropic_in(p: u64, m: &[Vec<i64>], basis: &[fp::Vector]) -> Option<fp::Vector> {
    let k = basis.len();
    (1..p.pow(k as u32)).find_map(|idx| {
        let x = fp::combine(&fp::coefficient(idx, k, p), basis, p);
        (fp::bilinear(m, &x, &x, p) == 0).then_some(x)
    })
}

/// A maximal subspace `U ⊆ W` on which `x.My = 0`, built by adjoining isotropic vectors of the
/// form induced on `U^perp / U` until none remain.
pub fn degenerate_subspace(p: u64, m: &[Vec<i64>], w: &[fp::Vector]) -> Result<Vec<fp::Vector>> {
    check_field(p)?;
    let n = check_matrix(m, w)?;
    let (wb, _) = fp::rref(w, p);
    let mut u: Vec<fp::Vector> = Vec::new();
    loop {
        let rows: Vec<fp::Vector> =
            u.iter().map(|uv| wb.iter().map(|wv| fp::bilinear(m, wv, uv, p)).collect()).collect();
        let perp: Vec<fp::Vector> = if rows.is_empty() {
            wb.clone()
        } else {
            fp::kernel(&rows, wb.len(), p).iter().map(|c| fp::combine(c, &wb, p)).collect()
        };
        let comp = fp::complement(&u, &perp, p);
        let next = if comp.len() > 3 { isotropic_in(p, m, &comp[..3]) } else { isotropic_in(p, m, &comp) };
        match next {
            Some(x) => u.push(x),
            None => break,
        }
        debug_assert!(u.len() <= n);
    }
    Ok(u)
}

/// `K^perp = {y in H : Mx.y = 0 for all x in K}` by a direct scan, where `M` is the quadratic
/// part of `q` on `H = q.group`.
pub fn orthogonal_complement(q: &QuadraticPhase, k: &Subgroup) -> Result<Vec<usize>> {
    let g = &q.group;
    if &k.group != g {
        return Err(Error::SpecMismatch);
    }
    let gens: Vec<Vec<u64>> = k.gens.iter().map(|&x| g.coords(x)).collect();
    Ok((0..g.len())
        .filter(|&y| {
            let yc = g.coords(y);
            gens.iter().all(|x| q.bilinear(x, &yc).is_zero())
        })
        .collect())
}
