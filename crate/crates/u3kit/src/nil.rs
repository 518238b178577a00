//! Elementary 2-step nilflows (circle, skew shift, Heisenberg), nilsequences on `Z/N`, delta-nets,
//! the bracket-quadratic factorization into fundamental nilsequences and the Hall-Petresco
//! constraints for `k = 3, 4`.
//!
//! Coordinates are normalized to `[-1/2, 1/2)`. A Heisenberg point `(x, y, z)` stands for the coset
//! of the matrix `[[1, z, y], [0, 1, x], [0, 0, 1]]`, with `(x, y, z) ~ (x + a, y + b + a z, z + c)`.
//! The parameters `(alpha, beta, gamma)` of a shift name the group element whose orbits are
//! `(x + n alpha, y + n beta + n gamma x + n(n+1)/2 alpha gamma, z + n gamma)`; the skew shift
//! `(m, alpha, beta)` likewise has orbits `(x + n alpha, y + n beta + m n x + m n(n+1)/2 alpha)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{e, is_prime, GroupFunction, GroupSpec};
use crate::norms::gowers_recursive;
use crate::quadratic::BracketQuadratic;

/// Representative of `x mod 1` in `[-1/2, 1/2)`.
pub fn cfrac(x: f64) -> f64 {
    let r = x - (x + 0.5).floor();
    if r >= 0.5 {
        r - 1.0
    } else {
        r
    }
}

/// Nearest integer, half-integers rounded up.
pub fn round_half_up(x: f64) -> f64 {
    (x + 0.5).floor()
}

fn tri(n: i64) -> f64 {
    (n as i128 * (n as i128 + 1) / 2) as f64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Factor {
    Circle { alpha: f64 },
    Skew { m: i64, alpha: f64, beta: f64 },
    #[serde(rename = "heis")]
    Heisenberg { alpha: f64, beta: f64, gamma: f64 },
}

impl Factor {
    pub fn dim(&self) -> usize {
        match self {
            Factor::Circle { .. } => 1,
            Factor::Skew { .. } => 2,
            Factor::Heisenberg { .. } => 3,
        }
    }

    /// Canonical coordinates of the point with lift `c`.
    pub fn normalize(&self, c: &[f64]) -> Vec<f64> {
        match self {
            Factor::Heisenberg { .. } => {
                let a = round_half_up(c[0]);
                vec![c[0] - a, cfrac(c[1] - a * c[2]), cfrac(c[2])]
            }
            _ => c.iter().map(|&v| cfrac(v)).collect(),
        }
    }

    /// `T^n c` by the closed form.
    pub fn orbit(&self, c: &[f64], n: i64) -> Vec<f64> {
        let nf = n as f64;
        let lifted = match *self {
            Factor::Circle { alpha } => vec![c[0] + nf * alpha],
            Factor::Skew { m, alpha, beta } => {
                let mf = m as f64;
                vec![c[0] + nf * alpha, c[1] + nf * beta + mf * nf * c[0] + mf * alpha * tri(n)]
            }
            Factor::Heisenberg { alpha, beta, gamma } => vec![
                c[0] + nf * alpha,
                c[1] + nf * beta + nf * gamma * c[0] + alpha * gamma * tri(n),
                c[2] + nf * gamma,
            ],
        };
        self.normalize(&lifted)
    }

    /// Distance between two points in the sup metric of the quotient.
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Factor::Heisenberg { .. } => (-1..=1)
                .map(|s| {
                    let s = s as f64;
                    let (bx, by) = (b[0] + s, b[1] + s * b[2]);
                    (a[0] - bx).abs().max(cfrac(a[1] - by).abs()).max(cfrac(a[2] - b[2]).abs())
                })
                .fold(f64::INFINITY, f64::min),
            _ => a.iter().zip(b).map(|(x, y)| cfrac(x - y).abs()).fold(0.0, f64::max),
        }
    }

    /// One step of the shift as left multiplication by the group element.
    pub fn step(&self, c: &[f64]) -> Vec<f64> {
        let lifted = match *self {
            Factor::Circle { alpha } => vec![c[0] + alpha],
            Factor::Skew { m, alpha, beta } => {
                let mf = m as f64;
                vec![c[0] + alpha, c[1] + beta + mf * alpha + mf * c[0]]
            }
            Factor::Heisenberg { alpha, beta, gamma } => {
                let g = Heis { x: alpha, y: beta + alpha * gamma, z: gamma };
                let p = g.mul(&Heis { x: c[0], y: c[1], z: c[2] });
                vec![p.x, p.y, p.z]
            }
        };
        self.normalize(&lifted)
    }
}

/// Element `[[1, z, y], [0, 1, x], [0, 0, 1]]` of the Heisenberg group.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Heis {
    x: f64,
    y: f64,
    z: f64,
}

impl Heis {
    fn mul(&self, o: &Heis) -> Heis {
        Heis { x: self.x + o.x, y: self.y + o.y + self.z * o.x, z: self.z + o.z }
    }

    fn inv(&self) -> Heis {
        Heis { x: -self.x, y: -self.y + self.z * self.x, z: -self.z }
    }

    fn pow(&self, k: i64) -> Heis {
        let b = if k < 0 { self.inv() } else { *self };
        let k = k.abs() as f64;
        Heis { x: k * b.x, y: k * b.y + b.z * b.x * k * (k - 1.0) / 2.0, z: k * b.z }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NilSystem {
    pub factors: Vec<Factor>,
}

/// Per-factor coordinate blocks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NilPoint {
    pub blocks: Vec<Vec<f64>>,
}

impl NilSystem {
    /// `n_1 + 2 n_2 + 3 n_3`.
    pub fn dimension(&self) -> usize {
        self.factors.iter().map(Factor::dim).sum()
    }

    pub fn origin(&self) -> NilPoint {
        NilPoint { blocks: self.factors.iter().map(|f| vec![0.0; f.dim()]).collect() }
    }

    fn check(&self, p: &NilPoint) -> Result<()> {
        let ok = p.blocks.len() == self.factors.len()
            && p.blocks.iter().zip(&self.factors).all(|(b, f)| b.len() == f.dim());
        if ok {
            Ok(())
        } else {
            Err(Error::SpecMismatch)
        }
    }

    pub fn normalize(&self, p: &NilPoint) -> NilPoint {
        NilPoint { blocks: self.factors.iter().zip(&p.blocks).map(|(f, b)| f.normalize(b)).collect() }
    }

    pub fn step(&self, p: &NilPoint) -> NilPoint {
        NilPoint { blocks: self.factors.iter().zip(&p.blocks).map(|(f, b)| f.step(b)).collect() }
    }

    pub fn distance(&self, p: &NilPoint, q: &NilPoint) -> f64 {
        self.factors.iter().zip(p.blocks.iter().zip(&q.blocks)).map(|(f, (a, b))| f.distance(a, b)).fold(0.0, f64::max)
    }
}

/// `T_g^n x0` in closed form.
pub fn orbit_point(sys: &NilSystem, x0: &NilPoint, n: i64) -> Result<NilPoint> {
    sys.check(x0)?;
    Ok(NilPoint { blocks: sys.factors.iter().zip(&x0.blocks).map(|(f, b)| f.orbit(b, n)).collect() })
}

/// Smoothstep cutoff: `chi = 1` on `|x| <= rho(1 - eps)`, `0` on `|x| >= rho(1 + eps)`, cubic
/// Hermite interpolation between.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cutoff {
    pub rho: f64,
    pub eps: f64,
}

impl Cutoff {
    pub fn new(rho: f64, eps: f64) -> Result<Self> {
        if !(rho > 0.0 && eps > 0.0 && eps < 1.0 && rho * (1.0 + eps) <= 0.5) {
            return Err(Error::InvalidArgument(format!("cutoff needs 0 < eps < 1, rho(1+eps) <= 1/2, got rho={rho}, eps={eps}")));
        }
        Ok(Self { rho, eps })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let t = ((cfrac(x).abs() - self.rho * (1.0 - self.eps)) / (2.0 * self.rho * self.eps)).clamp(0.0, 1.0);
        1.0 - t * t * (3.0 - 2.0 * t)
    }

    /// Largest `|chi'|`.
    pub fn slope(&self) -> f64 {
        0.75 / (self.rho * self.eps)
    }
}

impl Default for Cutoff {
    fn default() -> Self {
        Self { rho: 0.25, eps: 0.1 }
    }
}

/// Coordinate `coord` of block `factor`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coord {
    pub factor: usize,
    pub coord: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Term {
    /// `chi(c)^power`.
    Chi { at: Coord, power: u32 },
    /// `e(scale c)`.
    Exp { at: Coord, scale: f64 },
    /// `e(scale c_a c_b)`.
    ExpProduct { a: Coord, b: Coord, scale: f64 },
    /// `e(phase)`.
    Constant { phase: f64 },
}

/// Product of terms evaluated on normalized coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NilFunction {
    pub terms: Vec<Term>,
    #[serde(default)]
    pub cutoff: Cutoff,
}

impl NilFunction {
    pub fn one() -> Self {
        Self { terms: Vec::new(), cutoff: Cutoff::default() }
    }

    pub fn eval(&self, p: &NilPoint) -> Complex64 {
        let c = |at: &Coord| p.blocks[at.factor][at.coord];
        self.terms.iter().fold(Complex64::new(1.0, 0.0), |acc, t| {
            acc * match t {
                Term::Chi { at, power } => Complex64::new(self.cutoff.eval(c(at)).powi(*power as i32), 0.0),
                Term::Exp { at, scale } => e(scale * c(at)),
                Term::ExpProduct { a, b, scale } => e(scale * c(a) * c(b)),
                Term::Constant { phase } => e(*phase),
            }
        })
    }

    /// Lipschitz constant for delta-atoms: the sum over coordinates of a bound on the partial
    /// derivative (every term has modulus at most 1).
    pub fn lipschitz(&self) -> f64 {
        let mut bounds: Vec<(Coord, f64)> = Vec::new();
        let mut add = |at: Coord, v: f64| match bounds.iter_mut().find(|(c, _)| *c == at) {
            Some(b) => b.1 += v,
            None => bounds.push((at, v)),
        };
        for t in &self.terms {
            match t {
                Term::Chi { at, power } => add(*at, *power as f64 * self.cutoff.slope()),
                Term::Exp { at, scale } => add(*at, 2.0 * PI * scale.abs()),
                Term::ExpProduct { a, b, scale } => {
                    add(*a, PI * scale.abs());
                    add(*b, PI * scale.abs());
                }
                Term::Constant { .. } => {}
            }
        }
        bounds.iter().map(|b| b.1).sum()
    }

    fn shifted(&self, offset: usize) -> Self {
        let sh = |c: &Coord| Coord { factor: c.factor + offset, coord: c.coord };
        let terms = self
            .terms
            .iter()
            .map(|t| match t {
                Term::Chi { at, power } => Term::Chi { at: sh(at), power: *power },
                Term::Exp { at, scale } => Term::Exp { at: sh(at), scale: *scale },
                Term::ExpProduct { a, b, scale } => Term::ExpProduct { a: sh(a), b: sh(b), scale: *scale },
                Term::Constant { phase } => Term::Constant { phase: *phase },
            })
            .collect();
        Self { terms, cutoff: self.cutoff }
    }
}

/// `F(T_g^n x0)` at `n mod N` for `-N/2 < n < N/2`.
pub fn nilsequence(f: &NilFunction, sys: &NilSystem, x0: &NilPoint, n: u64) -> Result<GroupFunction> {
    if n % 2 == 0 {
        return Err(Error::EvenN(n));
    }
    sys.check(x0)?;
    let half = (n / 2) as i64;
    let mut values = vec![Complex64::new(0.0, 0.0); n as usize];
    let computed: Vec<(usize, Complex64)> = (-half..=half)
        .into_par_iter()
        .map(|k| {
            let p = orbit_point(sys, x0, k).expect("checked point");
            (k.rem_euclid(n as i64) as usize, f.eval(&p))
        })
        .collect();
    for (i, v) in computed {
        values[i] = v;
    }
    GroupFunction::new(GroupSpec::cyclic(n), values)
}

/// A tensor-product realization of a cutoff-weighted bracket phase.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NilConstruction {
    pub system: NilSystem,
    pub function: NilFunction,
    pub x0: NilPoint,
    /// Dimension contributed by each bracket term.
    pub term_dimensions: Vec<usize>,
    /// Lipschitz constant of each bracket term's function.
    pub term_lipschitz: Vec<f64>,
}

/// Integer and fractional parts `a = q + s` with `|s| <= 1/2`.
fn split(a: f64) -> (f64, f64) {
    let q = round_half_up(a);
    (q, a - q)
}

/// Realizes `n -> W(n) e(-bq(n))`, where `W` multiplies `chi(xi n/N)` for each linear term and
/// `chi^2(xi n/N) chi^2(xi' n/N)` for each quadratic term.
pub fn bracket_to_nilsystem(bq: &BracketQuadratic, cutoff: Cutoff) -> Result<NilConstruction> {
    if bq.s.len() > 4 {
        return Err(Error::TooManyFrequencies(bq.s.len()));
    }
    let nn = bq.n as f64;
    let mut system = NilSystem::default();
    let mut function = NilFunction { terms: Vec::new(), cutoff };
    let (mut dims, mut lips) = (Vec::new(), Vec::new());
    let mut push = |factors: Vec<Factor>, part: NilFunction, system: &mut NilSystem, function: &mut NilFunction| {
        let part = part.shifted(system.factors.len());
        dims.push(factors.iter().map(Factor::dim).sum());
        lips.push(part.lipschitz());
        system.factors.extend(factors);
        function.terms.extend(part.terms);
    };
    let at = |factor, coord| Coord { factor, coord };
    let d = bq.s.len();
    for i in 0..d {
        let a = -bq.lin[i];
        if a == 0.0 {
            continue;
        }
        let (q, s) = split(a);
        let alpha = cfrac(bq.s[i] as f64 / nn);
        let part = NilFunction {
            terms: vec![
                Term::Chi { at: at(0, 0), power: 1 },
                Term::Exp { at: at(0, 0), scale: s },
                Term::Exp { at: at(1, 0), scale: 1.0 },
            ],
            cutoff,
        };
        push(vec![Factor::Circle { alpha }, Factor::Circle { alpha: cfrac(q * alpha) }], part, &mut system, &mut function);
    }
    for i in 0..d {
        for j in i..d {
            let a = -bq.quad[i][j];
            if a == 0.0 {
                continue;
            }
            let (q, s) = split(a);
            let alpha = cfrac(bq.s[i] as f64 / nn);
            let gamma = cfrac(bq.s[j] as f64 / nn);
            // q{an}{cn} = q a c n^2 - q a n[cn] - q c n[an] mod 1; the quadratic parts of the two
            // Heisenberg orbits cancel q a c n^2 up to the linear phase -q a c n. Their parameters
            // stay unreduced: each orbit carries a c' n(n+1)/2, which is only invariant under
            // integer shifts of c' when a n(n+1)/2 is an integer.
            let factors = vec![
                Factor::Circle { alpha },
                Factor::Circle { alpha: gamma },
                Factor::Circle { alpha: cfrac(-q * alpha * gamma) },
                Factor::Heisenberg { alpha, beta: 0.0, gamma: q * gamma },
                Factor::Heisenberg { alpha: gamma, beta: 0.0, gamma: q * alpha },
            ];
            let part = NilFunction {
                terms: vec![
                    Term::Chi { at: at(0, 0), power: 1 },
                    Term::Chi { at: at(1, 0), power: 1 },
                    Term::ExpProduct { a: at(0, 0), b: at(1, 0), scale: s },
                    Term::Exp { at: at(2, 0), scale: 1.0 },
                    Term::Chi { at: at(3, 0), power: 1 },
                    Term::Exp { at: at(3, 1), scale: 1.0 },
                    Term::Chi { at: at(4, 0), power: 1 },
                    Term::Exp { at: at(4, 1), scale: 1.0 },
                ],
                cutoff,
            };
            push(factors, part, &mut system, &mut function);
        }
    }
    if bq.c != 0.0 {
        function.terms.push(Term::Constant { phase: -bq.c });
    }
    let x0 = system.origin();
    Ok(NilConstruction { system, function, x0, term_dimensions: dims, term_lipschitz: lips })
}

/// The cutoff weight `W(n)` matching [`bracket_to_nilsystem`].
pub fn bracket_weight(bq: &BracketQuadratic, cutoff: &Cutoff, n: i64) -> f64 {
    let nn = bq.n as i64;
    let u: Vec<f64> = bq.s.iter().map(|&xi| cfrac((xi as i64 * n).rem_euclid(nn) as f64 / nn as f64)).collect();
    let d = u.len();
    let mut w = 1.0;
    for i in 0..d {
        if bq.lin[i] != 0.0 {
            w *= cutoff.eval(u[i]);
        }
        for j in i..d {
            if bq.quad[i][j] != 0.0 {
                w *= cutoff.eval(u[i]).powi(2) * cutoff.eval(u[j]).powi(2);
            }
        }
    }
    w
}

/// `q [alpha n] [gamma n]`, the integer left over by the bracket factorization, exactly.
pub fn factorization_remainder(q: i64, alpha: Ratio<i64>, gamma: Ratio<i64>, n: i64) -> Ratio<i64> {
    let round = |r: Ratio<i64>| (r + Ratio::new(1, 2)).floor();
    let an = alpha * n;
    let gn = gamma * n;
    let fa = an - round(an);
    let fg = gn - round(gn);
    let lhs = fa * fg * q;
    let rhs = alpha * gamma * q * n * n - alpha * q * n * round(gn) - gamma * q * n * round(an);
    lhs - rhs
}

/// Next point of a progression on a nilmanifold from its first `k - 1` points: for `k = 3` torus
/// points `2b - a`; for `k = 4` Heisenberg points the word `a(a^-1 b)^3((a^-1 b)^-2 a^-1 c)^3`.
pub fn hall_petresco_next(points: &[Vec<f64>], k: usize) -> Result<Vec<f64>> {
    if !(3..=4).contains(&k) || points.len() != k - 1 {
        return Err(Error::BadArity { expected: k.saturating_sub(1), got: points.len() });
    }
    if k == 3 {
        let (a, b) = (&points[0], &points[1]);
        if a.len() != b.len() {
            return Err(Error::SpecMismatch);
        }
        return Ok(a.iter().zip(b).map(|(&x, &y)| cfrac(2.0 * y - x)).collect());
    }
    if points.iter().any(|p| p.len() != 3) {
        return Err(Error::BadArity { expected: 3, got: points.iter().map(Vec::len).find(|&l| l != 3).unwrap_or(0) });
    }
    let lift = |p: &[f64]| Heis { x: p[0], y: p[1], z: p[2] };
    let (a, b, c) = (lift(&points[0]), lift(&points[1]), lift(&points[2]));
    let defect = sigma_defect(&a, &b, &c);
    if defect > 1e-9 {
        return Err(Error::NotInSigma(defect));
    }
    let u = a.inv().mul(&b);
    let v = u.pow(-2).mul(&a.inv().mul(&c));
    let r = a.mul(&u.pow(3)).mul(&v.pow(3));
    Ok(Factor::Heisenberg { alpha: 0.0, beta: 0.0, gamma: 0.0 }.normalize(&[r.x, r.y, r.z]))
}

/// Outcome of checking the `k = 4` constraint on random Heisenberg orbits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HpCheck {
    pub samples: usize,
    pub seed: u64,
    /// Largest distance between the predicted and the actual fourth point.
    pub max_error: f64,
}

/// For random `g = (alpha, beta, gamma)` and `x`, compare `hall_petresco_next` on
/// `x, T_g x, T_g^2 x` with `T_g^3 x`.
pub fn hall_petresco_check(samples: usize, seed: u64) -> Result<HpCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_error: f64 = 0.0;
    for _ in 0..samples {
        let f = Factor::Heisenberg {
            alpha: rng.gen_range(-3.0..3.0),
            beta: rng.gen_range(-3.0..3.0),
            gamma: rng.gen_range(-3.0..3.0),
        };
        let x = f.normalize(&[rng.gen(), rng.gen(), rng.gen()]);
        let pts: Vec<Vec<f64>> = (0..3).map(|n| f.orbit(&x, n)).collect();
        let next = hall_petresco_next(&pts, 4)?;
        max_error = max_error.max(f.distance(&next, &f.orbit(&x, 3)));
    }
    Ok(HpCheck { samples, seed, max_error })
}

/// Distance of `c` from `a (a^-1 b)^2 G_2` in the `(x, z)` torus.
fn sigma_defect(a: &Heis, b: &Heis, c: &Heis) -> f64 {
    let pred = a.mul(&a.inv().mul(b).pow(2));
    cfrac(c.x - pred.x).abs().max(cfrac(c.z - pred.z).abs())
}

/// Index of the delta-atom (`delta = 1/m`) containing `p`.
pub fn delta_atom(sys: &NilSystem, p: &NilPoint, m: u64) -> Result<Vec<i64>> {
    sys.check(p)?;
    let q = sys.normalize(p);
    let mf = m as f64;
    Ok(q.blocks.iter().flatten().map(|&c| (((c + 0.5) * mf).floor() as i64).clamp(0, m as i64 - 1)).collect())
}

/// `min (K delta - |F(x) - F(x')|)` over sampled pairs sharing a delta-atom.
pub fn lipschitz_slack(f: &NilFunction, sys: &NilSystem, k: f64, m: u64, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let delta = 1.0 / m as f64;
    let mut slack = f64::INFINITY;
    for _ in 0..samples {
        let mut p = sys.origin();
        let mut q = sys.origin();
        for (bp, bq) in p.blocks.iter_mut().zip(q.blocks.iter_mut()) {
            for (cp, cq) in bp.iter_mut().zip(bq.iter_mut()) {
                let cell = rng.gen_range(0..m) as f64;
                *cp = -0.5 + (cell + rng.gen::<f64>()) * delta;
                *cq = -0.5 + (cell + rng.gen::<f64>()) * delta;
            }
        }
        slack = slack.min(k * delta - (f.eval(&p) - f.eval(&q)).norm());
    }
    slack
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObstructionCheck {
    pub correlation: f64,
    pub u3: f64,
}

/// `|E_n f(n) conj F(T_g^n x0)|` over `-N/2 < n < N/2`, together with `||f||_{U^3}`.
pub fn nilsequence_obstruction_check(
    f: &GroupFunction,
    func: &NilFunction,
    sys: &NilSystem,
    x0: &NilPoint,
) -> Result<ObstructionCheck> {
    let n = f.group.order();
    if f.group.rank() != 1 {
        return Err(Error::SpecMismatch);
    }
    if n % 2 == 0 {
        return Err(Error::EvenN(n));
    }
    if !is_prime(n) {
        return Err(Error::NotPrime(n));
    }
    let seq = nilsequence(func, sys, x0, n)?;
    let corr: Complex64 = f.values.iter().zip(&seq.values).map(|(a, b)| a * b.conj()).sum();
    Ok(ObstructionCheck { correlation: corr.norm() / n as f64, u3: gowers_recursive(f, 3)? })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn heis(alpha: f64, beta: f64, gamma: f64) -> NilSystem {
        NilSystem { factors: vec![Factor::Heisenberg { alpha, beta, gamma }] }
    }

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.iter().zip(b).all(|(x, y)| cfrac(x - y).abs() < 1e-9)
    }

    #[test]
    fn skew_closed_form() {
        let sys = NilSystem { factors: vec![Factor::Skew { m: 1, alpha: 0.3, beta: 0.0 }] };
        let p = orbit_point(&sys, &sys.origin(), 2).unwrap();
        assert!(close(&p.blocks[0], &[0.6, 0.9]));
        assert_eq!(orbit_point(&sys, &sys.origin(), 0).unwrap(), sys.origin());
    }

    #[test]
    fn closed_forms_match_iteration() {
        let sys = NilSystem {
            factors: vec![
                Factor::Circle { alpha: 0.137 },
                Factor::Skew { m: 3, alpha: 0.271, beta: -0.4 },
                Factor::Heisenberg { alpha: 0.318, beta: 0.22, gamma: -0.71 },
            ],
        };
        let x0 = NilPoint { blocks: vec![vec![0.1], vec![-0.2, 0.3], vec![0.45, -0.1, 0.2]] };
        let mut p = x0.clone();
        for n in 1..=1000 {
            p = sys.step(&p);
            let q = orbit_point(&sys, &x0, n).unwrap();
            assert!(sys.distance(&p, &q) < 1e-9, "n={n}: {p:?} vs {q:?}");
        }
    }

    #[test]
    fn heisenberg_identification() {
        let sys = heis(0.0, 0.0, 0.0);
        let a = NilPoint { blocks: vec![vec![-0.5, 0.1, 0.3]] };
        let b = NilPoint { blocks: vec![vec![0.5, 0.4, 0.3]] };
        assert!(sys.distance(&sys.normalize(&a), &sys.normalize(&b)) < 1e-12);
        assert_eq!(delta_atom(&sys, &a, 10).unwrap(), delta_atom(&sys, &b, 10).unwrap());
        assert_eq!(delta_atom(&sys, &sys.origin(), 10).unwrap(), vec![5, 5, 5]);
    }

    #[test]
    fn circle_character() {
        let sys = NilSystem { factors: vec![Factor::Circle { alpha: 3.0 / 101.0 }] };
        let f = NilFunction { terms: vec![Term::Exp { at: Coord { factor: 0, coord: 0 }, scale: 1.0 }], cutoff: Cutoff::default() };
        let seq = nilsequence(&f, &sys, &sys.origin(), 101).unwrap();
        for n in 0..101 {
            assert!((seq.values[n] - e(3.0 * n as f64 / 101.0)).norm() < 1e-9);
        }
        assert_eq!(nilsequence(&f, &sys, &sys.origin(), 100), Err(Error::EvenN(100)));
    }

    #[test]
    fn bracket_realization() {
        let mut bq = BracketQuadratic::zero(101, vec![17, 73]);
        bq.quad[0][1] = 1.0;
        bq.quad[1][0] = 1.0;
        bq.lin[0] = 0.7;
        bq.quad[1][1] = -2.3;
        let cutoff = Cutoff::new(0.3, 0.2).unwrap();
        let c = bracket_to_nilsystem(&bq, cutoff).unwrap();
        assert!(c.term_dimensions.iter().all(|&d| d <= 9));
        let seq = nilsequence(&c.function, &c.system, &c.x0, 101).unwrap();
        for n in -50i64..=50 {
            let want = bracket_weight(&bq, &cutoff, n) * e(-bq.eval_real(n));
            assert!((seq.values[n.rem_euclid(101) as usize] - want).norm() < 1e-9, "n={n}");
        }
        let zero = bracket_to_nilsystem(&BracketQuadratic::zero(101, vec![5]), cutoff).unwrap();
        assert_eq!(zero.system.dimension(), 0);
        assert_eq!(bracket_to_nilsystem(&BracketQuadratic::zero(101, vec![1, 2, 3, 4, 5]), cutoff), Err(Error::TooManyFrequencies(5)));
    }

    #[test]
    fn factorization_is_exact() {
        for n in -60..60 {
            let r = factorization_remainder(3, Ratio::new(17, 101), Ratio::new(-23, 101), n);
            assert!(r.is_integer());
        }
    }

    #[test]
    fn hall_petresco() {
        assert!(close(&hall_petresco_next(&[vec![0.1], vec![0.4]], 3).unwrap(), &[0.7]));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let f = Factor::Heisenberg { alpha: rng.gen_range(-3.0..3.0), beta: rng.gen_range(-3.0..3.0), gamma: rng.gen_range(-3.0..3.0) };
            let x = f.normalize(&[rng.gen(), rng.gen(), rng.gen()]);
            let pts: Vec<Vec<f64>> = (0..3).map(|n| f.orbit(&x, n)).collect();
            let next = hall_petresco_next(&pts, 4).unwrap();
            assert!(f.distance(&next, &f.orbit(&x, 3)) < 1e-9);
        }
        let f = Factor::Heisenberg { alpha: 0.3, beta: 0.1, gamma: 0.2 };
        let mut pts: Vec<Vec<f64>> = (0..3).map(|n| f.orbit(&[0.0, 0.0, 0.0], n)).collect();
        pts[2][0] += 0.1;
        assert!(matches!(hall_petresco_next(&pts, 4), Err(Error::NotInSigma(_))));
        assert!(matches!(hall_petresco_next(&pts[..1], 4), Err(Error::BadArity { .. })));
    }

    #[test]
    fn lipschitz_checks() {
        let sys = NilSystem { factors: vec![Factor::Circle { alpha: 0.1 }] };
        let ex = NilFunction { terms: vec![Term::Exp { at: Coord { factor: 0, coord: 0 }, scale: 1.0 }], cutoff: Cutoff::default() };
        assert!(lipschitz_slack(&ex, &sys, 2.0 * PI, 10, 2000, 3) >= -1e-9);
        assert!((lipschitz_slack(&NilFunction::one(), &sys, 5.0, 10, 100, 3) - 0.5).abs() < 1e-12);
        let bq = {
            let mut b = BracketQuadratic::zero(101, vec![17, 23]);
            b.quad[0][1] = 1.4;
            b
        };
        let c = bracket_to_nilsystem(&bq, Cutoff::default()).unwrap();
        let k = c.function.lipschitz();
        assert!(lipschitz_slack(&c.function, &c.system, k, 7, 5000, 9) >= -1e-9);
    }

    #[test]
    fn obstruction_of_own_nilsequence() {
        let sys = heis(0.31, 0.0, 0.17);
        let f = NilFunction { terms: vec![Term::Exp { at: Coord { factor: 0, coord: 1 }, scale: 1.0 }], cutoff: Cutoff::default() };
        let seq = nilsequence(&f, &sys, &sys.origin(), 101).unwrap();
        let r = nilsequence_obstruction_check(&seq, &f, &sys, &sys.origin()).unwrap();
        assert!((r.correlation - 1.0).abs() < 1e-9);
        assert!(r.u3 > 0.0);
    }
}
