//! Finite abelian groups `Z/n1 x ... x Z/nk`, their duals, and functions on them.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Exact rational used for torus values.
pub type Rational = Ratio<i64>;

/// Default cap on the number of items any exhaustive enumeration may visit.
pub const DEFAULT_BUDGET: u128 = 200_000_000;

/// `e(t) = exp(2 pi i t)`.
pub fn e(t: f64) -> Complex64 {
    Complex64::from_polar(1.0, std::f64::consts::TAU * t)
}

/// `e(p/q)` evaluated with the numerator reduced first, so large numerators lose no precision.
pub fn e_rat(t: Rational) -> Complex64 {
    let q = *t.denom();
    let p = t.numer().rem_euclid(q);
    e(p as f64 / q as f64)
}

pub fn rat_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Reduce a rational into `[0, 1)`.
pub fn frac_rat(t: Rational) -> Rational {
    let q = *t.denom();
    Rational::new(t.numer().rem_euclid(q), q)
}

/// Pairwise (cascade) summation of reals.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Pairwise (cascade) summation of complex numbers.
pub fn pairwise_sum_c(xs: &[Complex64]) -> Complex64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum_c(&xs[..mid]) + pairwise_sum_c(&xs[mid..])
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn mod_inv(a: i64, m: i64) -> Option<i64> {
    if m == 1 {
        return Some(0);
    }
    let g = a.rem_euclid(m).extended_gcd(&m);
    (g.gcd == 1).then(|| g.x.rem_euclid(m))
}

/// A finite abelian group given as a product of cyclic factors.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroupSpec {
    orders: Vec<u64>,
    size: u64,
}

impl GroupSpec {
    pub fn new(orders: Vec<u64>) -> Result<Self> {
        if orders.is_empty() || orders.iter().any(|&n| n == 0) {
            return Err(Error::InvalidArgument("cyclic orders must be positive".into()));
        }
        let mut size: u64 = 1;
        for &n in &orders {
            size = size
                .checked_mul(n)
                .ok_or_else(|| Error::InvalidArgument("group order overflows u64".into()))?;
        }
        if size > (1 << 40) {
            return Err(Error::InvalidArgument("group too large to materialize".into()));
        }
        Ok(Self { orders, size })
    }

    pub fn cyclic(n: u64) -> Self {
        Self::new(vec![n]).expect("positive order")
    }

    /// `F_p^n` as `Z/p x ... x Z/p`.
    pub fn fp_power(p: u64, n: usize) -> Self {
        Self::new(vec![p; n]).expect("positive order")
    }

    pub fn orders(&self) -> &[u64] {
        &self.orders
    }

    pub fn rank(&self) -> usize {
        self.orders.len()
    }

    /// `N = |G|`.
    pub fn order(&self) -> u64 {
        self.size
    }

    pub fn len(&self) -> usize {
        self.size as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_odd(&self) -> bool {
        self.size % 2 == 1
    }

    /// Least common multiple of the factor orders.
    pub fn exponent(&self) -> u64 {
        self.orders.iter().fold(1, |a, &b| a.lcm(&b))
    }

    /// `Some(p)` if this is `F_p^n` for a prime `p`.
    pub fn prime_field(&self) -> Option<u64> {
        let p = self.orders[0];
        (is_prime(p) && self.orders.iter().all(|&n| n == p)).then_some(p)
    }

    /// Row-major coordinates of the element with index `idx`.
    pub fn coords(&self, mut idx: usize) -> Vec<u64> {
        let mut c = vec![0; self.rank()];
        for i in (0..self.rank()).rev() {
            let n = self.orders[i] as usize;
            c[i] = (idx % n) as u64;
            idx /= n;
        }
        c
    }

    /// Row-major index of reduced coordinates.
    pub fn index(&self, coords: &[u64]) -> usize {
        coords
            .iter()
            .zip(&self.orders)
            .fold(0usize, |acc, (&c, &n)| acc * n as usize + c as usize)
    }

    /// Index of the element with arbitrary integer coordinates, reduced first.
    pub fn index_of_ints(&self, coords: &[i64]) -> usize {
        coords.iter().zip(&self.orders).fold(0usize, |acc, (&c, &n)| {
            acc * n as usize + c.rem_euclid(n as i64) as usize
        })
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        self.combine(a, b, |x, y, n| (x + y) % n)
    }

    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.combine(a, b, |x, y, n| (x + n - y) % n)
    }

    pub fn neg(&self, a: usize) -> usize {
        self.sub(0, a)
    }

    /// `k * a`.
    pub fn scale(&self, a: usize, k: i64) -> usize {
        let c = self.coords(a);
        let v: Vec<i64> = c.iter().map(|&x| x as i64 * k).collect();
        self.scaled_index(&v)
    }

    fn scaled_index(&self, v: &[i64]) -> usize {
        let r: Vec<i64> = v
            .iter()
            .zip(&self.orders)
            .map(|(&x, &n)| x.rem_euclid(n as i64))
            .collect();
        self.index_of_ints(&r)
    }

    fn combine(&self, a: usize, b: usize, op: impl Fn(u64, u64, u64) -> u64) -> usize {
        let (mut a, mut b) = (a, b);
        let mut out = 0usize;
        let mut stride = 1usize;
        for &n in self.orders.iter().rev() {
            let nn = n as usize;
            let r = op((a % nn) as u64, (b % nn) as u64, n) as usize;
            out += r * stride;
            stride *= nn;
            a /= nn;
            b /= nn;
        }
        out
    }

    /// Additive order of the element with index `a`.
    pub fn element_order(&self, a: usize) -> u64 {
        self.coords(a)
            .iter()
            .zip(&self.orders)
            .fold(1, |acc, (&c, &n)| acc.lcm(&(n / c.gcd(&n))))
    }

    pub fn element(&self, coords: &[i64]) -> Result<GroupElement> {
        if coords.len() != self.rank() {
            return Err(Error::SpecMismatch);
        }
        Ok(GroupElement {
            coords: coords
                .iter()
                .zip(&self.orders)
                .map(|(&c, &n)| c.rem_euclid(n as i64) as u64)
                .collect(),
        })
    }

    pub fn element_at(&self, idx: usize) -> GroupElement {
        GroupElement { coords: self.coords(idx) }
    }

    pub fn check(&self, x: &GroupElement) -> Result<()> {
        if x.coords.len() == self.rank() && x.coords.iter().zip(&self.orders).all(|(&c, &n)| c < n) {
            Ok(())
        } else {
            Err(Error::SpecMismatch)
        }
    }

    /// Exact pairing `xi . x = sum xi_i x_i / n_i mod 1` on indices.
    pub fn pair_idx(&self, xi: usize, x: usize) -> Rational {
        let a = self.coords(xi);
        let b = self.coords(x);
        self.pair_coords(&a, &b)
    }

    pub fn pair_coords(&self, xi: &[u64], x: &[u64]) -> Rational {
        let l = self.exponent() as i64;
        let mut num: i64 = 0;
        for ((&a, &b), &n) in xi.iter().zip(x).zip(&self.orders) {
            let term = ((a as i128 * b as i128) % n as i128) as i64 * (l / n as i64);
            num = (num + term) % l;
        }
        Rational::new(num, l)
    }

    /// Pairing returned as a fraction of the exponent: `xi . x = k / exponent`.
    pub fn pair_num(&self, xi: &[u64], x: &[u64]) -> u64 {
        let l = self.exponent();
        let mut num: u128 = 0;
        for ((&a, &b), &n) in xi.iter().zip(x).zip(&self.orders) {
            num += (a as u128 * b as u128 % n as u128) * (l / n) as u128;
        }
        (num % l as u128) as u64
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.rank() > 1 && self.prime_field().is_some() {
            return write!(f, "F{}^{}", self.orders[0], self.rank());
        }
        let parts: Vec<String> = self.orders.iter().map(|n| format!("Z/{n}")).collect();
        write!(f, "{}", parts.join("x"))
    }
}

impl FromStr for GroupSpec {
    type Err = Error;

    /// Grammar: `Z/101`, `F5^3`, `Z/4xZ/9`, and products of those.
    fn from_str(s: &str) -> Result<Self> {
        let mut orders = Vec::new();
        let mut pos = 0;
        for part in s.split(['x', '*']) {
            let t = part.trim();
            let bad = |msg: &str| Error::Parse { pos, msg: format!("{msg} in group spec {s:?}") };
            if let Some(n) = t.strip_prefix("Z/") {
                orders.push(n.trim().parse::<u64>().map_err(|_| bad("bad cyclic order"))?);
            } else if let Some(rest) = t.strip_prefix('F') {
                let (p, k) = rest.split_once('^').unwrap_or((rest, "1"));
                let p: u64 = p.trim().parse().map_err(|_| bad("bad field size"))?;
                let k: usize = k.trim().parse().map_err(|_| bad("bad exponent"))?;
                if !is_prime(p) || k == 0 {
                    return Err(bad("field size must be prime and exponent positive"));
                }
                orders.extend(std::iter::repeat(p).take(k));
            } else {
                return Err(bad("expected Z/n or Fp^k"));
            }
            pos += part.len() + 1;
        }
        GroupSpec::new(orders)
    }
}

impl Serialize for GroupSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for GroupSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(D::Error::custom)
    }
}

/// An element of `G`, coordinates reduced modulo the factor orders.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupElement {
    pub coords: Vec<u64>,
}

/// A character of `G`, stored in the same coordinates as group elements.
pub type DualElement = GroupElement;

/// A point of the torus `R/Z`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TorusValue {
    Exact(Rational),
    Approx(f64),
}

impl TorusValue {
    pub fn exact(t: Rational) -> Self {
        TorusValue::Exact(frac_rat(t))
    }

    pub fn approx(t: f64) -> Self {
        let r = t.rem_euclid(1.0);
        TorusValue::Approx(if r >= 1.0 { 0.0 } else { r })
    }

    /// Representative in `[0, 1)`.
    pub fn value(&self) -> f64 {
        match *self {
            TorusValue::Exact(r) => *r.numer() as f64 / *r.denom() as f64,
            TorusValue::Approx(x) => x,
        }
    }

    /// Distance to the nearest integer.
    pub fn norm(&self) -> f64 {
        let v = self.value();
        v.min(1.0 - v)
    }

    pub fn as_exact(&self) -> Option<Rational> {
        match *self {
            TorusValue::Exact(r) => Some(r),
            TorusValue::Approx(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match *self {
            TorusValue::Exact(r) => r.is_zero(),
            TorusValue::Approx(x) => x == 0.0,
        }
    }
}

impl std::ops::Add for TorusValue {
    type Output = TorusValue;
    fn add(self, o: TorusValue) -> TorusValue {
        match (self, o) {
            (TorusValue::Exact(a), TorusValue::Exact(b)) => TorusValue::exact(a + b),
            _ => TorusValue::approx(self.value() + o.value()),
        }
    }
}

impl std::ops::Sub for TorusValue {
    type Output = TorusValue;
    fn sub(self, o: TorusValue) -> TorusValue {
        match (self, o) {
            (TorusValue::Exact(a), TorusValue::Exact(b)) => TorusValue::exact(a - b),
            _ => TorusValue::approx(self.value() - o.value()),
        }
    }
}

impl fmt::Display for TorusValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TorusValue::Exact(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            TorusValue::Approx(x) => write!(f, "{x}"),
        }
    }
}

impl Serialize for TorusValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            TorusValue::Exact(_) => s.serialize_str(&self.to_string()),
            TorusValue::Approx(x) => s.serialize_f64(*x),
        }
    }
}

/// Serialize a rational as a `"p/q"` string.
pub fn rat_to_string(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_rat(s: &str) -> Result<Rational> {
    let bad = || Error::Parse { pos: 0, msg: format!("bad rational {s:?}") };
    match s.split_once('/') {
        Some((p, q)) => {
            let q: i64 = q.trim().parse().map_err(|_| bad())?;
            if q == 0 {
                return Err(bad());
            }
            Ok(Rational::new(p.trim().parse().map_err(|_| bad())?, q))
        }
        None => Ok(Rational::from_integer(s.trim().parse().map_err(|_| bad())?)),
    }
}

/// `xi . x mod 1`, exact.
pub fn pair(g: &GroupSpec, xi: &DualElement, x: &GroupElement) -> Result<TorusValue> {
    g.check(xi)?;
    g.check(x)?;
    Ok(TorusValue::Exact(g.pair_coords(&xi.coords, &x.coords)))
}

/// An exact torus-valued map on `G`, indexed in row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseMap {
    pub group: GroupSpec,
    pub values: Vec<Rational>,
}

impl PhaseMap {
    pub fn from_fn(group: &GroupSpec, f: impl Fn(&[u64]) -> Rational) -> Self {
        let values = (0..group.len()).map(|i| frac_rat(f(&group.coords(i)))).collect();
        Self { group: group.clone(), values }
    }

    /// `x -> e(phi(x))` as a bounded function.
    pub fn exp(&self) -> GroupFunction {
        GroupFunction {
            group: self.group.clone(),
            values: self.values.iter().map(|&t| e_rat(t)).collect(),
        }
    }
}

/// `(h . nabla) phi (x) = phi(x + h) - phi(x)`.
pub fn phase_difference(phi: &PhaseMap, h: &GroupElement) -> Result<PhaseMap> {
    let g = &phi.group;
    g.check(h)?;
    let hi = g.index(&h.coords);
    let values = (0..g.len())
        .map(|x| frac_rat(phi.values[g.add(x, hi)] - phi.values[x]))
        .collect();
    Ok(PhaseMap { group: g.clone(), values })
}

/// A dense complex-valued function on `G`.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupFunction {
    pub group: GroupSpec,
    pub values: Vec<Complex64>,
}

impl GroupFunction {
    pub fn new(group: GroupSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != group.len() {
            return Err(Error::SpecMismatch);
        }
        Ok(Self { group, values })
    }

    pub fn from_fn(group: &GroupSpec, f: impl Fn(&[u64]) -> Complex64) -> Self {
        let values = (0..group.len()).map(|i| f(&group.coords(i))).collect();
        Self { group: group.clone(), values }
    }

    pub fn constant(group: &GroupSpec, c: Complex64) -> Self {
        Self { group: group.clone(), values: vec![c; group.len()] }
    }

    /// `1_A` for a set of element indices.
    pub fn indicator(group: &GroupSpec, set: &[usize]) -> Self {
        let mut values = vec![Complex64::zero(); group.len()];
        for &a in set {
            values[a % group.len()] = Complex64::one();
        }
        Self { group: group.clone(), values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Whether `|f(x)| <= 1 + 1e-12` everywhere.
    pub fn is_bounded(&self) -> bool {
        self.values.iter().all(|z| z.norm() <= 1.0 + 1e-12)
    }

    pub fn mean(&self) -> Complex64 {
        pairwise_sum_c(&self.values) / self.len() as f64
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self { group: self.group.clone(), values: self.values.iter().map(|&z| f(z)).collect() }
    }

    pub fn zip(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        if self.group != other.group {
            return Err(Error::SpecMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { group: self.group.clone(), values })
    }

    /// `T^h f (x) = f(x + h)`.
    pub fn shift(&self, h: &GroupElement) -> Result<Self> {
        self.group.check(h)?;
        Ok(self.shift_idx(self.group.index(&h.coords)))
    }

    pub fn shift_idx(&self, h: usize) -> Self {
        let g = &self.group;
        let values = (0..g.len()).map(|x| self.values[g.add(x, h)]).collect();
        Self { group: g.clone(), values }
    }

    /// `x -> f(x + h) conj(f(x))`.
    pub fn mult_derivative(&self, h: &GroupElement) -> Result<Self> {
        self.group.check(h)?;
        Ok(self.mult_derivative_idx(self.group.index(&h.coords)))
    }

    pub fn mult_derivative_idx(&self, h: usize) -> Self {
        let g = &self.group;
        let values = (0..g.len())
            .map(|x| self.values[g.add(x, h)] * self.values[x].conj())
            .collect();
        Self { group: g.clone(), values }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

#[derive(Serialize, Deserialize)]
struct GroupFunctionFile {
    group: GroupSpec,
    values: Vec<[f64; 2]>,
}

impl Serialize for GroupFunction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GroupFunctionFile {
            group: self.group.clone(),
            values: self.values.iter().map(|z| [z.re, z.im]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GroupFunction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let file = GroupFunctionFile::deserialize(d)?;
        let values = file.values.iter().map(|v| Complex64::new(v[0], v[1])).collect();
        GroupFunction::new(file.group, values).map_err(D::Error::custom)
    }
}

/// A subgroup `H <= G` with an independent generating set `H = (+)_i <g_i>`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subgroup {
    pub group: GroupSpec,
    /// Independent generators (element indices).
    pub gens: Vec<usize>,
    /// Orders of the generators; `|H| = prod orders`.
    pub orders: Vec<u64>,
}

impl Subgroup {
    pub fn whole(group: &GroupSpec) -> Self {
        let k = group.rank();
        let gens = (0..k)
            .map(|i| {
                let mut c = vec![0; k];
                c[i] = 1;
                group.index(&c)
            })
            .collect();
        Self { group: group.clone(), gens, orders: group.orders().to_vec() }
    }

    pub fn trivial(group: &GroupSpec) -> Self {
        Self { group: group.clone(), gens: vec![], orders: vec![] }
    }

    /// Subgroup generated by arbitrary elements, with an independent basis found greedily
    /// (largest available order first) and verified by counting.
    pub fn generated_by(group: &GroupSpec, gens: &[usize]) -> Result<Self> {
        if gens.iter().any(|&g| g >= group.len()) {
            return Err(Error::SpecMismatch);
        }
        let members = closure(group, gens);
        let mut in_h = vec![false; group.len()];
        members.iter().for_each(|&x| in_h[x] = true);
        let mut candidates: Vec<usize> = members.clone();
        candidates.sort_by_key(|&x| (std::cmp::Reverse(group.element_order(x)), x));
        let mut in_k = vec![false; group.len()];
        in_k[0] = true;
        let mut k_list = vec![0usize];
        let (mut basis, mut orders) = (Vec::new(), Vec::new());
        while k_list.len() < members.len() {
            let pick = candidates.iter().copied().find(|&h| {
                let mut y = h;
                while y != 0 {
                    if in_k[y] {
                        return false;
                    }
                    y = group.add(y, h);
                }
                true
            });
            let Some(h) = pick else {
                return Err(Error::NotFound("independent generating set".into()));
            };
            let ord = group.element_order(h);
            let mut next = Vec::with_capacity(k_list.len() * ord as usize);
            for &k in &k_list {
                let mut y = k;
                for _ in 0..ord {
                    next.push(y);
                    y = group.add(y, h);
                }
            }
            next.iter().for_each(|&y| in_k[y] = true);
            k_list = next;
            basis.push(h);
            orders.push(ord);
        }
        Ok(Self { group: group.clone(), gens: basis, orders })
    }

    pub fn order(&self) -> u64 {
        self.orders.iter().product()
    }

    /// Abstract coordinate group `Z/m_1 x ... x Z/m_r` (`Z/1` when trivial).
    pub fn coordinate_group(&self) -> GroupSpec {
        if self.orders.is_empty() {
            GroupSpec::cyclic(1)
        } else {
            GroupSpec::new(self.orders.clone()).expect("positive orders")
        }
    }

    /// Element of `G` with the given subgroup coordinates.
    pub fn embed(&self, t: &[u64]) -> usize {
        let mut acc = 0;
        for (&g, &ti) in self.gens.iter().zip(t) {
            acc = self.group.add(acc, self.group.scale(g, ti as i64));
        }
        acc
    }

    /// Members of `y + H`, ordered by the row-major index of their subgroup coordinates.
    pub fn coset(&self, y: usize) -> Vec<usize> {
        let cg = self.coordinate_group();
        (0..cg.len())
            .map(|i| {
                if self.gens.is_empty() {
                    y
                } else {
                    self.group.add(y, self.embed(&cg.coords(i)))
                }
            })
            .collect()
    }

    pub fn elements(&self) -> Vec<usize> {
        self.coset(0)
    }
}

/// All elements of the subgroup generated by `gens`, in discovery order.
pub fn closure(group: &GroupSpec, gens: &[usize]) -> Vec<usize> {
    let mut seen = vec![false; group.len()];
    seen[0] = true;
    let mut out = vec![0usize];
    let mut i = 0;
    while i < out.len() {
        let x = out[i];
        for &g in gens {
            let y = group.add(x, g);
            if !seen[y] {
                seen[y] = true;
                out.push(y);
            }
        }
        i += 1;
    }
    out
}

/// Iterator over all cubes `(x, h_1, ..., h_d)` in row-major order of the tuple.
pub struct Cubes {
    n: usize,
    d: usize,
    next: u128,
    total: u128,
}

impl Iterator for Cubes {
    type Item = (usize, Vec<usize>);

    fn next(&mut self) -> Option<Self::Item> {
        if self.next >= self.total {
            return None;
        }
        let mut k = self.next;
        self.next += 1;
        let mut tuple = vec![0usize; self.d + 1];
        for slot in tuple.iter_mut().rev() {
            *slot = (k % self.n as u128) as usize;
            k /= self.n as u128;
        }
        let x = tuple[0];
        Some((x, tuple[1..].to_vec()))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let r = (self.total - self.next) as usize;
        (r, Some(r))
    }
}

/// All `N^(d+1)` cubes of dimension `d`, refusing when the count exceeds `cap`.
pub fn cubes(g: &GroupSpec, d: usize, cap: u128) -> Result<Cubes> {
    if !(1..=4).contains(&d) {
        return Err(Error::DegreeUnsupported(d));
    }
    let total = (g.order() as u128).pow(d as u32 + 1);
    if total > cap {
        return Err(Error::BudgetExceeded { needed: total, cap });
    }
    Ok(Cubes { n: g.len(), d, next: 0, total })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        let g: GroupSpec = "F5^3".parse().unwrap();
        assert_eq!(g.orders(), &[5, 5, 5]);
        assert_eq!(g.to_string(), "F5^3");
        let g: GroupSpec = "Z/4xZ/9".parse().unwrap();
        assert_eq!(g.order(), 36);
        assert_eq!(g.to_string(), "Z/4xZ/9");
        assert!("Q/3".parse::<GroupSpec>().is_err());
        assert!("F4^2".parse::<GroupSpec>().is_err());
    }

    #[test]
    fn pairing_examples() {
        let g = GroupSpec::cyclic(12);
        let v = pair(&g, &g.element(&[5]).unwrap(), &g.element(&[7]).unwrap()).unwrap();
        assert_eq!(v, TorusValue::Exact(Rational::new(11, 12)));
        let g = GroupSpec::fp_power(5, 3);
        let v = pair(&g, &g.element(&[1, 2, 0]).unwrap(), &g.element(&[3, 1, 4]).unwrap()).unwrap();
        assert!(v.is_zero());
        let h = GroupSpec::cyclic(5);
        assert_eq!(pair(&g, &h.element(&[1]).unwrap(), &g.element(&[0, 0, 0]).unwrap()), Err(Error::SpecMismatch));
    }

    #[test]
    fn shift_examples() {
        let g = GroupSpec::cyclic(5);
        let f = GroupFunction::indicator(&g, &[0]);
        let s = f.shift(&g.element(&[2]).unwrap()).unwrap();
        assert_eq!(s, GroupFunction::indicator(&g, &[3]));
        let back = s.shift(&g.element(&[-2]).unwrap()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn derivative_of_quadratic() {
        let g = GroupSpec::cyclic(5);
        let f = GroupFunction::from_fn(&g, |c| e_rat(Rational::new((c[0] * c[0]) as i64, 5)));
        let d = f.mult_derivative(&g.element(&[1]).unwrap()).unwrap();
        let expect = GroupFunction::from_fn(&g, |c| e_rat(Rational::new(2 * c[0] as i64 + 1, 5)));
        assert!(d.max_abs_diff(&expect) < 1e-12);
    }

    #[test]
    fn phase_difference_examples() {
        let g = GroupSpec::cyclic(5);
        let phi = PhaseMap::from_fn(&g, |c| Rational::new((c[0] * c[0]) as i64, 5));
        let d = phase_difference(&phi, &g.element(&[2]).unwrap()).unwrap();
        for x in 0..5 {
            assert_eq!(d.values[x], frac_rat(Rational::new(4 * x as i64 + 4, 5)));
        }
    }

    #[test]
    fn cube_counts() {
        assert_eq!(cubes(&GroupSpec::cyclic(2), 1, DEFAULT_BUDGET).unwrap().count(), 4);
        assert_eq!(cubes(&GroupSpec::cyclic(3), 2, DEFAULT_BUDGET).unwrap().count(), 27);
        assert_eq!(cubes(&GroupSpec::cyclic(5), 3, DEFAULT_BUDGET).unwrap().count(), 625);
        assert!(matches!(cubes(&GroupSpec::cyclic(5), 3, 100), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn index_roundtrip() {
        let g: GroupSpec = "Z/4xZ/9xZ/5".parse().unwrap();
        for i in 0..g.len() {
            assert_eq!(g.index(&g.coords(i)), i);
        }
        assert_eq!(g.index(&[1, 0, 0]), 45);
    }

    #[test]
    fn subgroup_bases() {
        let g: GroupSpec = "Z/9xZ/3".parse().unwrap();
        let h = Subgroup::generated_by(&g, &[g.index(&[3, 1]), g.index(&[0, 1])]).unwrap();
        assert_eq!(h.order(), 9);
        assert_eq!(h.elements().len(), 9);
        let w = Subgroup::generated_by(&g, &[g.index(&[1, 0]), g.index(&[0, 1])]).unwrap();
        assert_eq!(w.orders, vec![9, 3]);
        let f = GroupSpec::fp_power(5, 3);
        let h = Subgroup::generated_by(&f, &[f.index(&[1, 2, 0]), f.index(&[2, 4, 0]), f.index(&[0, 1, 1])]).unwrap();
        assert_eq!(h.orders, vec![5, 5]);
    }

    #[test]
    fn function_json_roundtrip() {
        let g: GroupSpec = "Z/3xZ/2".parse().unwrap();
        let f = GroupFunction::from_fn(&g, |c| Complex64::new(c[0] as f64, c[1] as f64));
        let s = serde_json::to_string(&f).unwrap();
        assert!(s.starts_with("{\"group\":\"Z/3xZ/2\""));
        let back: GroupFunction = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
    }
}
