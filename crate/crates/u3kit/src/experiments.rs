//! End-to-end drivers: the Furstenberg-Weiss function, quadratic correlation scans on `Z/N`,
//! the density-increment step and iteration on `F_5^n`, and progression-free set search.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::FourierPlan;
use crate::forms::count_aps;
use crate::fp::{self, Vector};
use crate::group::{e, is_prime, GroupFunction, GroupSpec, Subgroup, DEFAULT_BUDGET};
use crate::inverse_f5::{quadratic_obstruction_with, PipelineParams};
use crate::norms::{gowers_norm, u2_bias, u3_oracle_coset, Method, Witness};
use crate::quadratic::{degenerate_subspace, QuadraticPhase};

/// Smallest `N` for which the support `|y|, |z| <= M/10` contains more than the origin.
pub const FW_MIN_N: u64 = 101;
/// Largest `N` for the exhaustive quadratic scan.
pub const SCAN_EXHAUSTIVE_MAX: u64 = 512;
/// Number of random `(a, b)` pairs in a sampled scan.
pub const SCAN_SAMPLES: usize = 100_000;
/// Largest group order for the exhaustive progression-free search.
pub const AP_FREE_EXHAUSTIVE_MAX: usize = 32;
/// Stated with every increment report.
pub const INCREMENT_NOTE: &str =
    "the asymptotic increment constant (delta/2)^(2^20) is not asserted; densities are exact counts";

/// Parameters of the Furstenberg-Weiss function on `Z/N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FwSpec {
    #[serde(rename = "N")]
    pub n: u64,
    /// Largest integer strictly below `sqrt(N)`.
    #[serde(rename = "M")]
    pub m: u64,
}

impl FwSpec {
    pub fn new(n: u64) -> Result<Self> {
        if !is_prime(n) {
            return Err(Error::NotPrime(n));
        }
        if n < FW_MIN_N {
            return Err(Error::TooSmall { n, min: FW_MIN_N });
        }
        let mut m = (n as f64).sqrt() as u64;
        while m * m >= n {
            m -= 1;
        }
        while (m + 1) * (m + 1) < n {
            m += 1;
        }
        Ok(Self { n, m })
    }

    /// `psi(y / M)`: 1 for `|y/M| <= 1/20`, 0 for `|y/M| >= 1/10`, cubic smoothstep between.
    pub fn psi(&self, y: i64) -> f64 {
        let (a, m) = (y.unsigned_abs(), self.m);
        if 10 * a >= m {
            0.0
        } else if 20 * a <= m {
            1.0
        } else {
            let s = 2.0 - 20.0 * a as f64 / m as f64;
            s * s * (3.0 - 2.0 * s)
        }
    }

    /// `(y, z)` with `x = yM + z` and `|y|, |z| <= M/10`, if any.
    pub fn decompose(&self, x: u64) -> Option<(i64, i64)> {
        let r = (self.m / 10) as i64;
        let (n, m) = (self.n as i64, self.m as i64);
        let c = if x as i64 > n / 2 { x as i64 - n } else { x as i64 };
        let y = (c as f64 / m as f64).round() as i64;
        let z = c - y * m;
        (y.abs() <= r && z.abs() <= r).then_some((y, z))
    }

    pub fn value(&self, x: u64) -> Complex64 {
        match self.decompose(x % self.n) {
            Some((y, z)) => {
                let m = self.m as i64;
                e((y * z).rem_euclid(m) as f64 / m as f64) * self.psi(y) * self.psi(z)
            }
            None => Complex64::new(0.0, 0.0),
        }
    }
}

/// `f(yM + z) = e(yz/M) psi(y/M) psi(z/M)` on `Z/N`, zero off that grid.
pub fn fw_counterexample(n: u64) -> Result<GroupFunction> {
    let spec = FwSpec::new(n)?;
    Ok(GroupFunction::from_fn(&GroupSpec::cyclic(n), |x| spec.value(x[0])))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanMode {
    Exhaustive,
    Sampled,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub a: u64,
    pub b: u64,
    pub correlation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    #[serde(rename = "N")]
    pub n: u64,
    pub mode: ScanMode,
    pub max: f64,
    pub a: u64,
    pub b: u64,
    /// Number of `(a, b)` pairs evaluated.
    pub evaluated: u64,
    pub seed: u64,
    /// Best `b` for every evaluated `a`, in increasing `a`.
    pub rows: Vec<ScanRow>,
}

/// `max_{a,b} |E_x f(x) e(-(a x^2 + b x)/N)|` over all pairs or a seeded sample.
///
/// A sampled scan of a group with at most `SCAN_SAMPLES` pairs evaluates every pair.
/// Ties resolve to the lexicographically smallest `(a, b)`.
pub fn quadratic_correlation_scan(f: &GroupFunction, mode: ScanMode, seed: u64) -> Result<ScanReport> {
    if f.group.rank() != 1 {
        return Err(Error::InvalidArgument(format!("scan needs a cyclic group, got {}", f.group)));
    }
    let n = f.group.order();
    let full = match mode {
        ScanMode::Exhaustive => {
            if n > SCAN_EXHAUSTIVE_MAX {
                return Err(Error::BudgetExceeded {
                    needed: n as u128 * n as u128 * n as u128,
                    cap: SCAN_EXHAUSTIVE_MAX.pow(3) as u128,
                });
            }
            true
        }
        ScanMode::Sampled => (n as u128) * (n as u128) <= SCAN_SAMPLES as u128,
    };
    let rows = if full { scan_all(f) } else { scan_sampled(f, seed) };
    let evaluated = if full { n * n } else { (SCAN_SAMPLES as u64) + n };
    let best = rows
        .iter()
        .copied()
        .fold(None::<ScanRow>, |acc, r| match acc {
            Some(b) if b.correlation >= r.correlation - 1e-12 => Some(b),
            _ => Some(r),
        })
        .unwrap_or(ScanRow { a: 0, b: 0, correlation: 0.0 });
    Ok(ScanReport { n, mode, max: best.correlation, a: best.a, b: best.b, evaluated, seed, rows })
}

/// Every `a`, with all `b` at once by one transform per `a`.
fn scan_all(f: &GroupFunction) -> Vec<ScanRow> {
    let n = f.group.order();
    let plan = FourierPlan::new(&f.group);
    (0..n)
        .into_par_iter()
        .map(|a| {
            let mut buf: Vec<Complex64> = (0..n)
                .map(|x| f.values[x as usize] * e(-((a * (x * x % n) % n) as f64) / n as f64))
                .collect();
            plan.forward_in_place(&mut buf);
            let (b, c) = first_max(buf.iter().map(|z| z.norm()));
            ScanRow { a, b: b as u64, correlation: c }
        })
        .collect()
}

/// `a = 0` with every `b`, plus `SCAN_SAMPLES` seeded pairs evaluated directly on the support of `f`.
fn scan_sampled(f: &GroupFunction, seed: u64) -> Vec<ScanRow> {
    let n = f.group.order();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs: Vec<(u64, u64)> = (0..SCAN_SAMPLES).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))).collect();
    pairs.sort_unstable();
    pairs.dedup();
    let support: Vec<(u64, u64, Complex64)> = (0..n)
        .filter(|&x| f.values[x as usize] != Complex64::new(0.0, 0.0))
        .map(|x| (x, x * x % n, f.values[x as usize]))
        .collect();
    let table: Vec<Complex64> = (0..n).map(|k| e(-(k as f64) / n as f64)).collect();
    let corr: Vec<f64> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let s: Complex64 =
                support.iter().map(|&(x, sq, v)| v * table[((a * sq + b * x) % n) as usize]).sum();
            s.norm() / n as f64
        })
        .collect();
    let mut zero = f.values.clone();
    FourierPlan::new(&f.group).forward_in_place(&mut zero);
    let (b0, c0) = first_max(zero.iter().map(|z| z.norm()));
    let mut rows = vec![ScanRow { a: 0, b: b0 as u64, correlation: c0 }];
    for (&(a, b), &c) in pairs.iter().zip(&corr) {
        let last = rows.last_mut().expect("nonempty");
        if last.a == a {
            if c > last.correlation + 1e-12 {
                *last = ScanRow { a, b, correlation: c };
            }
        } else {
            rows.push(ScanRow { a, b, correlation: c });
        }
    }
    rows
}

fn first_max(values: impl Iterator<Item = f64>) -> (usize, f64) {
    values.enumerate().fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 + 1e-12 { (i, v) } else { acc })
}

/// An affine subspace `x0 + span(basis)` of `F_p^n`, in coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineSubspace {
    pub x0: Vector,
    #[serde(rename = "V")]
    pub basis: Vec<Vector>,
}

impl AffineSubspace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Element indices, ordered by the row-major index of their coefficients.
    pub fn points(&self, g: &GroupSpec, p: u64) -> Vec<usize> {
        let k = self.basis.len();
        (0..p.pow(k as u32))
            .map(|idx| {
                let v = fp::combine(&fp::coefficient(idx, k, p), &self.basis, p);
                let x: Vector = self.x0.iter().zip(&v).map(|(a, b)| (a + b) % p).collect();
                g.index(&x)
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IncrementParams {
    pub seed: u64,
    /// Pipeline `eta`; the `U^3` norm of the balanced function when absent.
    pub eta: Option<f64>,
    pub graph_threshold: Option<f64>,
    pub tie_tolerance: f64,
    /// Skip the progression check.
    pub force: bool,
    /// Also take candidates from the exact whole-group coset oracle.
    pub oracle: bool,
}

impl Default for IncrementParams {
    fn default() -> Self {
        Self { seed: 0, eta: None, graph_threshold: None, tie_tolerance: 0.05, force: false, oracle: true }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObstructionSource {
    Pipeline,
    /// Exact whole-group coset oracle.
    Oracle,
    /// Largest Fourier coefficient, a phase with zero quadratic part.
    Fourier,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateKind {
    /// A coset `y + W` of the obstruction subspace.
    ObstructionCoset,
    /// A coset `z + U` of a degenerate subspace of the phase on `y + W`.
    DegenerateCoset,
    /// A level set of the phase inside `z + U`.
    LevelSet,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IncrementTrace {
    pub u3: f64,
    pub eta: f64,
    /// Source of the returned candidate.
    pub source: ObstructionSource,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pipeline_error: Option<String>,
    pub w_dim: usize,
    pub average_bias: f64,
    /// Coset of `W` containing the returned subspace.
    pub y: Vector,
    /// Phase level (numerator over 5) of a level-set candidate.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<u64>,
    pub u_dims: Vec<usize>,
    pub candidates: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IncrementReport {
    pub group: GroupSpec,
    pub coset: AffineSubspace,
    pub kind: CandidateKind,
    /// `|A cap (x0 + V)|`.
    pub count: u64,
    /// `|x0 + V|`.
    pub size: u64,
    pub new_density: f64,
    pub old_density: f64,
    pub increment: f64,
    pub trace: IncrementTrace,
    pub note: String,
}

struct Candidate {
    coset: AffineSubspace,
    kind: CandidateKind,
    count: u64,
    size: u64,
    y: Vector,
    t: Option<u64>,
}

impl Candidate {
    fn beats(&self, other: &Candidate) -> bool {
        let (l, r) = (self.count as u128 * other.size as u128, other.count as u128 * self.size as u128);
        l > r || (l == r && self.size > other.size)
    }
}

fn f5_rank(g: &GroupSpec) -> Result<usize> {
    match g.prime_field() {
        Some(5) if (1..=3).contains(&g.rank()) => Ok(g.rank()),
        _ => Err(Error::InvalidArgument(format!("{g} is not F_5^n with 1 <= n <= 3"))),
    }
}

/// One density-increment step for `A` in `F_5^n`.
///
/// The balanced function `1_A - alpha` is handed to the inverse pipeline. On each coset `y + W`
/// of its output, a degenerate subspace `U` of the witness phase makes the phase linear on every
/// `z + U`, so its level sets there are affine subspaces of codimension at most one. The densest
/// positive-dimensional candidate among the cosets, the `z + U`, and those level sets is returned.
pub fn density_increment_f5(g: &GroupSpec, a: &[usize], params: &IncrementParams) -> Result<IncrementReport> {
    f5_rank(g)?;
    let p = 5u64;
    let mut member = vec![false; g.len()];
    for &x in a {
        if x >= g.len() {
            return Err(Error::SpecMismatch);
        }
        member[x] = true;
    }
    let size_a = member.iter().filter(|&&b| b).count();
    if size_a == 0 {
        return Err(Error::DensityTooLow { density: 0.0, required: 1.0 / g.len() as f64 });
    }
    let listed: Vec<usize> = (0..g.len()).filter(|&x| member[x]).collect();
    if !params.force && count_aps(g, &listed, 4)?.proper > 0 {
        return Err(Error::Has4Ap);
    }
    let alpha = size_a as f64 / g.len() as f64;
    let f = GroupFunction::from_fn(g, |x| Complex64::new(if member[g.index(x)] { 1.0 } else { 0.0 } - alpha, 0.0));
    let u3 = gowers_norm(&f, 3, Method::Recursive)?.value;
    let eta = params.eta.unwrap_or(u3);
    if eta <= 0.0 {
        return Err(Error::PipelineEmpty(format!("balanced function has U3 norm {u3}")));
    }
    let mut pp = PipelineParams::new(eta, params.seed);
    pp.graph_threshold = params.graph_threshold;
    pp.tie_tolerance = params.tie_tolerance;
    pp.oracle = false;
    let n = g.rank();
    let identity: Vec<Vector> = (0..n).map(|i| (0..n).map(|j| u64::from(i == j)).collect()).collect();
    let mut sources = Vec::new();
    let mut pipeline_error = None;
    match quadratic_obstruction_with(&f, &pp) {
        Ok(r) => {
            let ws = r.witnesses.into_iter().map(|w| (w.y, w.phase)).collect();
            sources.push(Obstruction { source: ObstructionSource::Pipeline, w: r.w, witnesses: ws, bias: r.average_bias });
        }
        Err(err @ (Error::EmptyGraph | Error::EmptyV | Error::SliceFailed(_))) => pipeline_error = Some(err.to_string()),
        Err(err) => return Err(err),
    }
    if params.oracle {
        let report = u3_oracle_coset(&f, 0, &Subgroup::whole(g), DEFAULT_BUDGET)?;
        if let Some(Witness::Coset { phase, .. }) = report.witness {
            let ws = vec![(vec![0; n], phase)];
            sources.push(Obstruction { source: ObstructionSource::Oracle, w: identity.clone(), witnesses: ws, bias: report.value });
        }
    }
    let u2 = u2_bias(&f);
    if let Some(Witness::Linear { xi }) = u2.witness {
        let xi = xi.iter().map(|&v| v as i64).collect();
        let phase = QuadraticPhase::new(g, vec![vec![0; n]; n], xi, 0.into())?;
        let bias = u2.value;
        sources.push(Obstruction { source: ObstructionSource::Fourier, w: identity.clone(), witnesses: vec![(vec![0; n], phase)], bias });
    }
    if sources.is_empty() {
        let why = pipeline_error.unwrap_or_else(|| "no witnesses".into());
        return Err(Error::PipelineEmpty(format!("{why}; U3 = {u3}, eta = {eta}")));
    }

    let mut best: Option<(Candidate, usize)> = None;
    let mut candidates = 0;
    let mut u_dims = Vec::new();
    for (si, src) in sources.iter().enumerate() {
        let w = &src.w;
        let k = w.len();
        let wid: Vec<Vector> = (0..k).map(|i| (0..k).map(|j| u64::from(i == j)).collect()).collect();
        let mut offer = |c: Candidate| {
            candidates += 1;
            if c.coset.dim() > 0 && best.as_ref().map_or(true, |b| c.beats(&b.0)) {
                best = Some((c, si));
            }
        };
        for (y, phase) in &src.witnesses {
            let to_group = |t: &[u64]| -> Vector {
                let v = fp::combine(t, w, p);
                y.iter().zip(&v).map(|(a, b)| (a + b) % p).collect()
            };
            let candidate = |coset: AffineSubspace, kind, t| {
                let (count, size) = density_of(g, &member, &coset, p);
                Candidate { coset, kind, count, size, y: y.clone(), t }
            };
            offer(candidate(AffineSubspace { x0: y.clone(), basis: w.clone() }, CandidateKind::ObstructionCoset, None));
            let u = degenerate_subspace(p, &phase.m, &wid)?;
            u_dims.push(u.len());
            let reps = fp::complement(&u, &wid, p);
            let u_group: Vec<Vector> = u.iter().map(|v| fp::combine(v, w, p)).collect();
            for zi in 0..p.pow(reps.len() as u32) {
                let z = if reps.is_empty() { vec![0; k] } else { fp::combine(&fp::coefficient(zi, reps.len(), p), &reps, p) };
                offer(candidate(AffineSubspace { x0: to_group(&z), basis: u_group.clone() }, CandidateKind::DegenerateCoset, None));
                for (t, level) in level_sets(phase, &z, &u, p) {
                    let basis = level.basis.iter().map(|v| fp::combine(v, w, p)).collect();
                    offer(candidate(AffineSubspace { x0: to_group(&level.x0), basis }, CandidateKind::LevelSet, Some(t)));
                }
            }
        }
    }
    let (best, si) = best.ok_or_else(|| Error::PipelineEmpty("no positive-dimensional candidate".into()))?;
    let src = &sources[si];
    let new_density = best.count as f64 / best.size as f64;
    Ok(IncrementReport {
        group: g.clone(),
        coset: best.coset,
        kind: best.kind,
        count: best.count,
        size: best.size,
        new_density,
        old_density: alpha,
        increment: new_density - alpha,
        trace: IncrementTrace {
            u3,
            eta,
            source: src.source,
            pipeline_error,
            w_dim: src.w.len(),
            average_bias: src.bias,
            y: best.y,
            t: best.t,
            u_dims,
            candidates,
        },
        note: INCREMENT_NOTE.into(),
    })
}

struct Obstruction {
    source: ObstructionSource,
    w: Vec<Vector>,
    witnesses: Vec<(Vector, QuadraticPhase)>,
    bias: f64,
}

fn density_of(g: &GroupSpec, member: &[bool], s: &AffineSubspace, p: u64) -> (u64, u64) {
    let pts = s.points(g, p);
    (pts.iter().filter(|&&x| member[x]).count() as u64, pts.len() as u64)
}

/// Nonempty sets `{z + u : u in U, phi(z + u) = t}` in the coordinates of `W`, as affine subspaces.
///
/// On a degenerate `U`, `phi(z + u) = phi(z) + l(u)` with `l(u) = 2 z.Mu + xi.u` linear.
fn level_sets(phase: &QuadraticPhase, z: &[u64], u: &[Vector], p: u64) -> Vec<(u64, AffineSubspace)> {
    let q0 = phase.eval_num(z) % p;
    let pm = p as i64;
    let l: Vector = u
        .iter()
        .map(|uv| {
            let lin: i64 = phase.xi.iter().zip(uv).map(|(&a, &b)| (a * b) as i64).sum();
            (2 * fp::bilinear(&phase.m, z, uv, p) as i64 + lin).rem_euclid(pm) as u64
        })
        .collect();
    let Some(j) = l.iter().position(|&c| c != 0) else {
        return vec![(q0, AffineSubspace { x0: z.to_vec(), basis: u.to_vec() })];
    };
    let ker: Vec<Vector> = fp::kernel(&[l.clone()], u.len(), p).iter().map(|c| fp::combine(c, u, p)).collect();
    let inv = crate::group::mod_inv(l[j] as i64, pm).expect("nonzero mod p") as u64;
    (0..p)
        .map(|t| {
            let s = (t + p - q0) % p * inv % p;
            let x0: Vector = z.iter().zip(&u[j]).map(|(&a, &b)| (a + s * b) % p).collect();
            (t, AffineSubspace { x0, basis: ker.clone() })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriverOutcome {
    /// The current set contains a proper four-term progression.
    Has4Ap,
    /// The current set fills its space.
    DensityOne,
    /// The returned subspace has dimension below one or the step could not shrink the space.
    DimensionFloor,
    PipelineEmpty,
    /// The best candidate does not raise the density.
    NoIncrement,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriverStep {
    pub depth: usize,
    pub dim: usize,
    pub size: usize,
    pub density: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<IncrementReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriverTrace {
    pub steps: Vec<DriverStep>,
    pub outcome: DriverOutcome,
    pub note: String,
}

/// Iterate `density_increment_f5`, restricting `A` to each returned coset re-coordinatized as
/// `F_5^{dim V}`, until a terminal state.
pub fn szemeredi_driver(g: &GroupSpec, a: &[usize], params: &IncrementParams) -> Result<DriverTrace> {
    f5_rank(g)?;
    let p = 5u64;
    let mut group = g.clone();
    let mut set: Vec<usize> = a.to_vec();
    set.sort_unstable();
    set.dedup();
    let mut steps = Vec::new();
    let outcome = loop {
        let depth = steps.len();
        let dim = group.rank();
        let density = set.len() as f64 / group.len() as f64;
        let mut step = DriverStep { depth, dim, size: set.len(), density, report: None, error: None };
        if set.len() == group.len() && !params.force {
            steps.push(step);
            break DriverOutcome::DensityOne;
        }
        match density_increment_f5(&group, &set, params) {
            Err(Error::Has4Ap) => {
                step.error = Some(Error::Has4Ap.to_string());
                steps.push(step);
                break DriverOutcome::Has4Ap;
            }
            Err(err @ (Error::PipelineEmpty(_) | Error::DensityTooLow { .. })) => {
                step.error = Some(err.to_string());
                steps.push(step);
                break DriverOutcome::PipelineEmpty;
            }
            Err(err) => return Err(err),
            Ok(report) => {
                let v = report.coset.clone();
                let accepted = report.increment > 0.0;
                step.report = Some(report);
                steps.push(step);
                if !accepted {
                    break DriverOutcome::NoIncrement;
                }
                if v.dim() == 0 || v.dim() >= dim {
                    break DriverOutcome::DimensionFloor;
                }
                let mut member = vec![false; group.len()];
                set.iter().for_each(|&x| member[x] = true);
                let pts = v.points(&group, p);
                set = (0..pts.len()).filter(|&i| member[pts[i]]).collect();
                group = GroupSpec::fp_power(p, v.dim());
                if set.len() == group.len() {
                    steps.push(DriverStep { depth: depth + 1, dim: v.dim(), size: set.len(), density: 1.0, report: None, error: None });
                    break DriverOutcome::DensityOne;
                }
            }
        }
    };
    Ok(DriverTrace { steps, outcome, note: INCREMENT_NOTE.into() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchStrategy {
    Greedy,
    Exhaustive,
}

/// Whether adding `x` to `member` creates a proper `k`-term progression.
fn completes_ap(g: &GroupSpec, member: &[bool], x: usize, k: usize) -> bool {
    (1..g.len()).any(|r| {
        (0..k).any(|j| {
            let pts: Vec<usize> = (0..k).map(|i| g.add(x, g.scale(r, i as i64 - j as i64))).collect();
            let distinct = (0..k).all(|i| (i + 1..k).all(|l| pts[i] != pts[l]));
            distinct && pts.iter().enumerate().all(|(i, &q)| i == j || member[q])
        })
    })
}

/// A set with no proper `k`-term progression: a maximum one by branch and bound, or a seeded
/// greedy maximal one. The result is checked with `count_aps`.
pub fn ap_free_search(g: &GroupSpec, k: usize, strategy: SearchStrategy, seed: u64) -> Result<Vec<usize>> {
    if k < 3 {
        return Err(Error::InvalidArgument("k must be at least 3".into()));
    }
    let n = g.len();
    let set = match strategy {
        SearchStrategy::Greedy => {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let mut member = vec![false; n];
            for x in order {
                if !completes_ap(g, &member, x, k) {
                    member[x] = true;
                }
            }
            (0..n).filter(|&x| member[x]).collect()
        }
        SearchStrategy::Exhaustive => {
            if n > AP_FREE_EXHAUSTIVE_MAX {
                return Err(Error::BudgetExceeded { needed: 1u128 << n.min(127), cap: 1u128 << AP_FREE_EXHAUSTIVE_MAX });
            }
            exhaustive_ap_free(g, k)
        }
    };
    let check = count_aps(g, &set, k)?;
    if check.proper != 0 {
        return Err(Error::HasProperAp(k));
    }
    Ok(set)
}

/// Maximum progression-free set containing 0, which is no restriction by translation. On a
/// cyclic group of prime order a dilation also fixes 1 when the answer has two elements.
fn exhaustive_ap_free(g: &GroupSpec, k: usize) -> Vec<usize> {
    let n = g.len();
    if n == 0 {
        return Vec::new();
    }
    struct Search<'a> {
        g: &'a GroupSpec,
        k: usize,
        member: Vec<bool>,
        current: Vec<usize>,
        best: Vec<usize>,
    }
    impl Search<'_> {
        fn run(&mut self, next: usize) {
            if self.current.len() > self.best.len() {
                self.best = self.current.clone();
            }
            let n = self.g.len();
            for x in next..n {
                if self.current.len() + (n - x) <= self.best.len() {
                    return;
                }
                if completes_ap(self.g, &self.member, x, self.k) {
                    continue;
                }
                self.member[x] = true;
                self.current.push(x);
                self.run(x + 1);
                self.current.pop();
                self.member[x] = false;
            }
        }
    }
    let mut s = Search { g, k, member: vec![false; n], current: vec![0], best: vec![0] };
    s.member[0] = true;
    if g.rank() == 1 && is_prime(n as u64) && n > 1 {
        if !completes_ap(g, &s.member, 1, k) {
            s.member[1] = true;
            s.current.push(1);
            s.run(2);
        }
    } else {
        s.run(1);
    }
    let mut best = s.best;
    best.sort_unstable();
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::e_rat;
    use crate::group::Rational;

    #[test]
    fn fw_examples() {
        let f = fw_counterexample(101).unwrap();
        assert!((f.values[0] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(f.values[1], Complex64::new(0.0, 0.0));
        assert!(f.values.iter().all(|z| z.norm() <= 1.0 + 1e-12));
        assert_eq!(fw_counterexample(100).unwrap_err(), Error::NotPrime(100));
        assert_eq!(fw_counterexample(97).unwrap_err(), Error::TooSmall { n: 97, min: FW_MIN_N });
        assert_eq!(FwSpec::new(4001).unwrap().m, 63);
        assert_eq!(FwSpec::new(401).unwrap().m, 20);
    }

    #[test]
    fn fw_support_shape() {
        let spec = FwSpec::new(1009).unwrap();
        let f = fw_counterexample(1009).unwrap();
        let r = (spec.m / 10) as i64;
        let m = spec.m as i64;
        for x in 0..1009u64 {
            let expected = (-r..=r)
                .flat_map(|y| (-r..=r).map(move |z| (y, z)))
                .find(|&(y, z)| (y * m + z).rem_euclid(1009) as u64 == x)
                .map(|(y, z)| spec.psi(y) * spec.psi(z));
            let got = f.values[x as usize].norm();
            assert!((got - expected.unwrap_or(0.0)).abs() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn scan_planted() {
        let g = GroupSpec::cyclic(101);
        let f = GroupFunction::from_fn(&g, |x| e_rat(Rational::new(((3 * x[0] * x[0] + x[0]) % 101) as i64, 101)));
        for mode in [ScanMode::Exhaustive, ScanMode::Sampled] {
            let r = quadratic_correlation_scan(&f, mode, 1).unwrap();
            assert_eq!((r.a, r.b), (3, 1));
            assert!((r.max - 1.0).abs() < 1e-9);
        }
        let zero = GroupFunction::constant(&g, Complex64::new(0.0, 0.0));
        let r = quadratic_correlation_scan(&zero, ScanMode::Exhaustive, 0).unwrap();
        assert_eq!((r.max, r.a, r.b), (0.0, 0, 0));
        let big = GroupFunction::constant(&GroupSpec::cyclic(521), Complex64::new(1.0, 0.0));
        assert!(matches!(quadratic_correlation_scan(&big, ScanMode::Exhaustive, 0), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn ap_free_small() {
        let g5 = GroupSpec::cyclic(5);
        let s = ap_free_search(&g5, 4, SearchStrategy::Exhaustive, 0).unwrap();
        assert_eq!(s.len(), 3);
        let g13 = GroupSpec::cyclic(13);
        let s = ap_free_search(&g13, 4, SearchStrategy::Exhaustive, 0).unwrap();
        let greedy = ap_free_search(&g13, 4, SearchStrategy::Greedy, 3).unwrap();
        assert!(greedy.len() <= s.len());
        assert_eq!(ap_free_search(&GroupSpec::cyclic(1), 4, SearchStrategy::Exhaustive, 0).unwrap(), vec![0]);
        let mut member = vec![false; 13];
        s.iter().for_each(|&x| member[x] = true);
        assert!((0..13).filter(|&x| !member[x]).all(|x| completes_ap(&g13, &member, x, 4)));
    }

    #[test]
    fn increment_rejects_degenerate_sets() {
        let g = GroupSpec::fp_power(5, 2);
        let all: Vec<usize> = (0..25).collect();
        assert_eq!(density_increment_f5(&g, &all, &IncrementParams::default()).unwrap_err(), Error::Has4Ap);
        assert!(matches!(density_increment_f5(&g, &[], &IncrementParams::default()), Err(Error::DensityTooLow { .. })));
        let trace = szemeredi_driver(&g, &all, &IncrementParams::default()).unwrap();
        assert_eq!(trace.outcome, DriverOutcome::DensityOne);
    }

    fn planted_quadric(seed: u64) -> (GroupSpec, Vec<usize>) {
        let g = GroupSpec::fp_power(5, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = vec![vec![0i64; 3]; 3];
        for i in 0..3 {
            for j in i..3 {
                m[i][j] = rng.gen_range(0..5);
                m[j][i] = m[i][j];
            }
        }
        let xi: Vec<i64> = (0..3).map(|_| rng.gen_range(0..5)).collect();
        let q = QuadraticPhase::new(&g, m, xi, 0.into()).unwrap();
        let a = (0..g.len()).filter(|&x| q.eval_num(&g.coords(x)) == 0).collect();
        (g, a)
    }

    #[test]
    fn increment_on_planted_quadric() {
        let params = IncrementParams { force: true, ..IncrementParams::default() };
        for seed in 0..5 {
            let (g, a) = planted_quadric(seed);
            if a.len() == g.len() {
                continue;
            }
            let r = density_increment_f5(&g, &a, &params).unwrap();
            let pts = r.coset.points(&g, 5);
            let count = pts.iter().filter(|x| a.contains(x)).count() as u64;
            assert_eq!((count, pts.len() as u64), (r.count, r.size));
            assert!(r.count * g.len() as u64 > a.len() as u64 * r.size, "seed {seed}: {r:?}");
        }
    }

    #[test]
    fn driver_densities_increase() {
        let params = IncrementParams { force: true, ..IncrementParams::default() };
        let (g, a) = planted_quadric(1);
        let trace = szemeredi_driver(&g, &a, &params).unwrap();
        let d: Vec<f64> = trace.steps.iter().map(|s| s.density).collect();
        assert!(d.windows(2).all(|w| w[1] > w[0]), "{d:?}");
    }
}
