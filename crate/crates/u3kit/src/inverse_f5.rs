//! Constructive inverse `U^3` pipeline on `F_p^n` (`p` an odd prime, typically 5): phase-derivative
//! graph, additive quadruples, random slicing, linear-component fit, symmetry subspace and the
//! per-coset quadratic obstruction.

use std::collections::HashMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bohr::bogolyubov;
use crate::error::{Error, Result};
use crate::fourier::FourierPlan;
use crate::fp::{self, Vector};
use crate::group::{e, GroupFunction, GroupSpec, Subgroup, DEFAULT_BUDGET};
use crate::norms::{argmax_tolerant, gowers_recursive, u3_oracle_coset};
use crate::quadratic::QuadraticPhase;

/// Retries allowed when sampling a slicing map.
pub const SLICE_RETRIES: usize = 100;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphEntry {
    pub h: Vec<u64>,
    pub xi: Vec<u64>,
    /// `|E_x f(x+h) conj f(x) e(-xi.x)|`.
    pub correlation: f64,
}

/// `Gamma = {(h, xi_h)}`: one frequency per retained shift, sorted by the index of `h`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseGraph {
    pub group: GroupSpec,
    pub eta: f64,
    /// Retention threshold on the squared bias.
    pub threshold: f64,
    pub entries: Vec<GraphEntry>,
}

impl PhaseGraph {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `(h, xi)` as group indices.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.entries.iter().map(|e| (self.group.index(&e.h), self.group.index(&e.xi))).collect()
    }

    fn subset(&self, keep: impl Fn(&GraphEntry) -> bool) -> Self {
        Self { entries: self.entries.iter().filter(|e| keep(e)).cloned().collect(), ..self.clone() }
    }
}

/// Tunable thresholds of the pipeline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineParams {
    pub eta: f64,
    pub seed: u64,
    /// Squared-bias threshold for the graph; `eta^8 / 2` when absent.
    pub graph_threshold: Option<f64>,
    /// Frequencies within this distance of the maximal correlation count as ties.
    pub tie_tolerance: f64,
    /// Run the exhaustive coset oracle on every coset of `W`.
    pub oracle: bool,
    pub cap: u128,
}

impl PipelineParams {
    pub fn new(eta: f64, seed: u64) -> Self {
        Self { eta, seed, graph_threshold: None, tie_tolerance: 1e-9, oracle: true, cap: DEFAULT_BUDGET }
    }

    pub fn threshold(&self) -> f64 {
        self.graph_threshold.unwrap_or(self.eta.powi(8) / 2.0)
    }
}

fn field_of(g: &GroupSpec) -> Result<u64> {
    match g.prime_field() {
        Some(p) if p % 2 == 1 => Ok(p),
        _ => Err(Error::InvalidArgument(format!("{g} is not F_p^n with p an odd prime"))),
    }
}

/// Keeps every `h` with `||T^h f conj f||_{u^2}^2 >= eta^8 / 2` together with its maximizing frequency.
pub fn phase_derivative_graph(f: &GroupFunction, eta: f64) -> Result<PhaseGraph> {
    phase_derivative_graph_with(f, &PipelineParams::new(eta, 0))
}

pub fn phase_derivative_graph_with(f: &GroupFunction, params: &PipelineParams) -> Result<PhaseGraph> {
    let g = &f.group;
    field_of(g)?;
    let threshold = params.threshold();
    let plan = FourierPlan::new(g);
    let entries: Vec<Option<GraphEntry>> = (0..g.len())
        .into_par_iter()
        .map(|h| {
            let mut v = f.mult_derivative_idx(h).values;
            plan.forward_in_place(&mut v);
            let mags: Vec<f64> = v.iter().map(|z| z.norm()).collect();
            let xi = argmax_tolerant(&mags, params.tie_tolerance);
            (mags[xi] * mags[xi] >= threshold)
                .then(|| GraphEntry { h: g.coords(h), xi: g.coords(xi), correlation: mags[xi] })
        })
        .collect();
    let entries: Vec<GraphEntry> = entries.into_iter().flatten().collect();
    if entries.is_empty() {
        return Err(Error::EmptyGraph);
    }
    Ok(PhaseGraph { group: g.clone(), eta: params.eta, threshold, entries })
}

/// `|{(z1, z2, z3, z4) in Gamma^4 : z1 + z2 = z3 + z4}|`.
pub fn additive_quadruples(gamma: &PhaseGraph) -> u128 {
    let g = &gamma.group;
    let pairs = gamma.pairs();
    let mut counts: HashMap<(usize, usize), u128> = HashMap::new();
    for &(h1, x1) in &pairs {
        for &(h2, x2) in &pairs {
            *counts.entry((g.add(h1, h2), g.add(x1, x2))).or_default() += 1;
        }
    }
    counts.values().map(|c| c * c).sum()
}

/// Subsets of `G x G^` as membership bitmaps indexed by `h * N + xi`.
struct PairSet {
    n: usize,
    list: Vec<usize>,
}

impl PairSet {
    fn origin(n: usize) -> Self {
        Self { n, list: vec![0] }
    }

    /// `self + sign * gamma`, charging the work to `spent`.
    fn step(&self, g: &GroupSpec, gamma: &[(usize, usize)], negate: bool, spent: &mut u128, cap: u128) -> Result<Self> {
        let work = self.list.len() as u128 * gamma.len() as u128;
        *spent += work;
        if *spent > cap {
            return Err(Error::BudgetExceeded { needed: *spent, cap });
        }
        let n = self.n;
        let mut mark = vec![false; n * n];
        let mut list = Vec::new();
        for &z in &self.list {
            let (h, x) = (z / n, z % n);
            for &(gh, gx) in gamma {
                let (h2, x2) = if negate { (g.sub(h, gh), g.sub(x, gx)) } else { (g.add(h, gh), g.add(x, gx)) };
                let w = h2 * n + x2;
                if !mark[w] {
                    mark[w] = true;
                    list.push(w);
                }
            }
        }
        Ok(Self { n, list })
    }
}

/// `{xi : (0, xi) in kGamma - kGamma - (kGamma - kGamma)}` for `k = fold / 4`, as sorted indices.
fn zero_fiber(g: &GroupSpec, gamma: &[(usize, usize)], fold: usize, cap: u128) -> Result<Vec<usize>> {
    let n = g.len();
    if gamma.is_empty() {
        return Ok(Vec::new());
    }
    let mut spent = 0u128;
    let mut s = PairSet::origin(n);
    for i in 0..fold / 2 {
        s = s.step(g, gamma, i >= fold / 4, &mut spent, cap)?;
    }
    let mut fibers: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &z in &s.list {
        fibers[z / n].push(z % n);
    }
    let work: u128 = fibers.iter().map(|f| (f.len() * f.len()) as u128).sum();
    if spent + work > cap {
        return Err(Error::BudgetExceeded { needed: spent + work, cap });
    }
    let mut mark = vec![false; n];
    for fib in &fibers {
        for &a in fib {
            for &b in fib {
                mark[g.sub(a, b)] = true;
            }
        }
    }
    Ok((0..n).filter(|&x| mark[x]).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceReport {
    pub graph: PhaseGraph,
    /// `|A|`.
    pub a_size: usize,
    pub m: usize,
    /// Rows of the slicing map `Psi : G^ -> F_p^m`.
    pub psi: Vec<Vector>,
    pub fiber: Vector,
    pub retries: usize,
    pub seed: u64,
    /// `A` was computed from `4 Gamma - 4 Gamma` instead of `8 Gamma - 8 Gamma`.
    pub surrogate: bool,
    /// The difference set of the sliced graph meets `{0} x G^` only at the origin.
    pub graph_verified: bool,
}

/// `A = {xi : (0, xi) in 8Gamma - 8Gamma}` (or the 4-fold surrogate when over budget), a random
/// linear `Psi` nonvanishing on `A \ {0}`, and the largest fiber `{(h, xi_h) : Psi(xi_h) = c}`.
pub fn random_slice(gamma: &PhaseGraph, seed: u64) -> Result<SliceReport> {
    random_slice_with(gamma, seed, DEFAULT_BUDGET)
}

pub fn random_slice_with(gamma: &PhaseGraph, seed: u64, cap: u128) -> Result<SliceReport> {
    let g = &gamma.group;
    let p = field_of(g)?;
    let pairs = gamma.pairs();
    let (a, fold, surrogate) = match zero_fiber(g, &pairs, 16, cap) {
        Ok(a) => (a, 16, false),
        Err(Error::BudgetExceeded { .. }) => (zero_fiber(g, &pairs, 8, cap)?, 8, true),
        Err(err) => return Err(err),
    };
    let mut m = 0usize;
    while (p as u128).pow(m as u32) < a.len() as u128 {
        m += 1;
    }
    let n = g.rank();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nonzero: Vec<Vector> = a.iter().filter(|&&x| x != 0).map(|&x| g.coords(x)).collect();
    let mut retries = 0;
    let psi = loop {
        let psi: Vec<Vector> = (0..m).map(|_| (0..n).map(|_| rng.gen_range(0..p)).collect()).collect();
        if nonzero.iter().all(|x| fp::matvec(&psi, x, p).iter().any(|&v| v != 0)) {
            break psi;
        }
        retries += 1;
        if retries >= SLICE_RETRIES {
            return Err(Error::SliceFailed(SLICE_RETRIES));
        }
    };
    let mut sizes: HashMap<Vector, usize> = HashMap::new();
    for e in &gamma.entries {
        *sizes.entry(fp::matvec(&psi, &e.xi, p)).or_default() += 1;
    }
    let fiber = sizes
        .iter()
        .max_by(|x, y| x.1.cmp(y.1).then_with(|| y.0.cmp(x.0)))
        .map(|(c, _)| c.clone())
        .unwrap_or_else(|| vec![0; m]);
    let sliced = gamma.subset(|e| fp::matvec(&psi, &e.xi, p) == fiber);
    let check = zero_fiber(g, &sliced.pairs(), fold, cap)?;
    let graph_verified = check.iter().all(|&x| x == 0);
    Ok(SliceReport { graph: sliced, a_size: a.len(), m, psi, fiber, retries, seed, surrogate, graph_verified })
}

/// Linear component of a sliced graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    /// Basis of `V`.
    #[serde(rename = "V")]
    pub v: Vec<Vector>,
    /// Matrix of `M` on `F_p^n` (zero on a fixed complement of `V`): `(Mx)_i = sum_j m_ij x_j`.
    #[serde(rename = "M")]
    pub m: Vec<Vector>,
    pub x0: Vector,
    pub xi0: Vector,
    /// `E_{h in V} 1_H(x0 + h) 1[xi_{x0+h} = 2Mh + xi0]`.
    pub agreement: f64,
    pub spectrum_size: usize,
    /// The spectrum annihilator lies in `2H - 2H`, by enumeration.
    pub bogolyubov_inclusion: bool,
    /// Every basis vector of `V` has a single frequency in `2Gamma - 2Gamma`.
    pub well_defined: bool,
}

/// `V` = annihilator of the Bogolyubov spectrum of `H`; `M` read off `2Gamma - 2Gamma` on a basis of
/// `V`; `(x0, xi0)` the coset of `{(h, 2Mh) : h in V}` containing the most graph points.
pub fn linear_component_fit(gamma: &PhaseGraph) -> Result<LinearFit> {
    let g = &gamma.group;
    let p = field_of(g)?;
    let n = g.rank();
    let pairs = gamma.pairs();
    if pairs.is_empty() {
        return Err(Error::EmptyV);
    }
    let hs: Vec<usize> = pairs.iter().map(|z| z.0).collect();
    let delta = hs.len() as f64 / g.order() as f64;
    let bog = bogolyubov(g, &hs, delta)?;
    let rows: Vec<Vector> = bog.s.iter().map(|&x| g.coords(x)).collect();
    let v = fp::rref(&fp::kernel(&rows, n, p), p).0;
    if v.is_empty() {
        return Err(Error::EmptyV);
    }
    let mut fibers: Vec<Vec<usize>> = vec![Vec::new(); g.len()];
    for &(h1, x1) in &pairs {
        for &(h2, x2) in &pairs {
            fibers[g.add(h1, h2)].push(g.add(x1, x2));
        }
    }
    for f in fibers.iter_mut() {
        f.sort_unstable();
        f.dedup();
    }
    let half = (p + 1) / 2;
    let mut well_defined = true;
    let mut images = Vec::with_capacity(v.len());
    for b in &v {
        let bi = g.index(b);
        let mut found: Vec<usize> = Vec::new();
        for h1 in 0..g.len() {
            for &s1 in &fibers[h1] {
                for &s2 in &fibers[g.sub(h1, bi)] {
                    found.push(g.sub(s1, s2));
                }
            }
        }
        found.sort_unstable();
        found.dedup();
        let Some(&zeta) = found.first() else {
            return Err(Error::NotFound("frequency for a basis vector of V in 2Gamma - 2Gamma".into()));
        };
        well_defined &= found.len() == 1;
        images.push(g.coords(zeta).iter().map(|&z| z * half % p).collect::<Vector>());
    }
    let units: Vec<Vector> = (0..n).map(|i| (0..n).map(|j| (i == j) as u64).collect()).collect();
    let comp = fp::complement(&v, &units, p);
    let mut cols = v.clone();
    cols.extend(comp.iter().cloned());
    let basis = fp::transpose(&cols);
    let pinv = fp::inverse(&basis, p).expect("V and its complement span F_p^n");
    let mut ycols = images;
    ycols.resize(n, vec![0; n]);
    let m = fp::matmul(&fp::transpose(&ycols), &pinv, p);

    let k = v.len();
    let mut counts: HashMap<(usize, usize), usize> = HashMap::new();
    for &(h, x) in &pairs {
        let coeffs = fp::matvec(&pinv, &g.coords(h), p);
        let vpart = fp::combine(&coeffs[..k], &v, p);
        let base = g.sub(h, g.index(&vpart));
        let two_mv: Vector = fp::matvec(&m, &vpart, p).iter().map(|&z| 2 * z % p).collect();
        *counts.entry((base, g.sub(x, g.index(&two_mv)))).or_default() += 1;
    }
    let (&(x0, xi0), &count) = counts
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then_with(|| b.0.cmp(a.0)))
        .expect("nonempty graph");
    Ok(LinearFit {
        agreement: count as f64 / (p as f64).powi(k as i32),
        v,
        m,
        x0: g.coords(x0),
        xi0: g.coords(xi0),
        spectrum_size: bog.s.len(),
        bogolyubov_inclusion: bog.inclusion,
        well_defined,
    })
}

/// `W = {h in V : Mx.h = Mh.x for all x in V}`, i.e. `V ∩ ker` of the form `x^T (M^T - M) h`.
pub fn symmetry_subspace(m: &[Vector], v: &[Vector], p: u64) -> Vec<Vector> {
    if v.is_empty() {
        return Vec::new();
    }
    let mt = fp::transpose(m);
    let skew: Vec<Vector> = mt
        .iter()
        .zip(m)
        .map(|(a, b)| a.iter().zip(b).map(|(&x, &y)| (x + p - y) % p).collect())
        .collect();
    let rows: Vec<Vector> = v
        .iter()
        .map(|x| v.iter().map(|h| dot(x, &fp::matvec(&skew, h, p), p)).collect())
        .collect();
    let coeffs = fp::kernel(&rows, v.len(), p);
    let w: Vec<Vector> = coeffs.iter().map(|c| fp::combine(c, v, p)).collect();
    fp::rref(&w, p).0
}

/// `Mw.w' = Mw'.w` on all pairs of basis vectors.
pub fn is_self_adjoint_on(m: &[Vector], w: &[Vector], p: u64) -> bool {
    w.iter().all(|a| w.iter().all(|b| dot(&fp::matvec(m, a, p), b, p) == dot(&fp::matvec(m, b, p), a, p)))
}

fn dot(a: &[u64], b: &[u64], p: u64) -> u64 {
    a.iter().zip(b).map(|(&x, &y)| x * y % p).sum::<u64>() % p
}

/// Quadratic witness on one coset `y + W`, in the coordinates `x = y + sum t_i w_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CosetWitness {
    pub y: Vector,
    pub phase: QuadraticPhase,
    /// `|E_t f(y + Wt) e(-phase(t))|`.
    pub bias: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineStats {
    pub quadruples: u128,
    /// `2^-8 eta^64 N^3`.
    pub quadruple_bound: f64,
    pub gamma_size: usize,
    pub gamma_sliced_size: usize,
    /// `|Gamma - Gamma| / |Gamma|`.
    pub doubling: f64,
    /// `|Gamma|^3 / quadruples`, the additive-energy constant.
    pub energy_constant: f64,
    pub a_size: usize,
    pub m: usize,
    pub surrogate: bool,
    pub graph_verified: bool,
    pub slice_retries: usize,
    pub v_dim: usize,
    pub agreement: f64,
    pub well_defined: bool,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObstructionReport {
    pub group: GroupSpec,
    pub eta: f64,
    /// Basis of `W`.
    #[serde(rename = "W")]
    pub w: Vec<Vector>,
    #[serde(rename = "M")]
    pub m: Vec<Vector>,
    pub witnesses: Vec<CosetWitness>,
    pub average_bias: f64,
    /// Every witness bias is at most its oracle value.
    pub oracle_consistent: bool,
    /// Largest gap between a stored bias and its re-evaluation.
    pub reproduction_error: f64,
    pub gowers_u3: f64,
    /// `p^-n |W| max_y bias`, a lower bound for `gowers_u3`.
    pub u3_lower_bound: f64,
    pub u3_lower_bound_ok: bool,
    pub stats: PipelineStats,
}

/// Graph, slice, linear fit, symmetry subspace and per-coset witnesses, end to end.
pub fn quadratic_obstruction(f: &GroupFunction, eta: f64) -> Result<ObstructionReport> {
    quadratic_obstruction_with(f, &PipelineParams::new(eta, 0))
}

pub fn quadratic_obstruction_with(f: &GroupFunction, params: &PipelineParams) -> Result<ObstructionReport> {
    let g = &f.group;
    let p = field_of(g)?;
    let n = g.rank();
    let gamma = phase_derivative_graph_with(f, params)?;
    let slice = random_slice_with(&gamma, params.seed, params.cap)?;
    let fit = linear_component_fit(&slice.graph)?;
    let w = symmetry_subspace(&fit.m, &fit.v, p);

    let k = w.len();
    let sub = Subgroup { group: g.clone(), gens: w.iter().map(|b| g.index(b)).collect(), orders: vec![p; k] };
    let cg = sub.coordinate_group();
    let mw: Vec<Vec<i64>> = w
        .iter()
        .map(|a| w.iter().map(|b| dot(a, &fp::matvec(&fit.m, b, p), p) as i64).collect())
        .collect();
    let mw = if k == 0 { vec![vec![0]] } else { mw };
    let units: Vec<Vector> = (0..n).map(|i| (0..n).map(|j| (i == j) as u64).collect()).collect();
    let comp = fp::complement(&w, &units, p);
    let reps: Vec<usize> = (0..(p as usize).pow(comp.len() as u32))
        .map(|i| g.index(&fp::combine(&fp::coefficient(i as u64, comp.len(), p), &comp, p)))
        .collect();
    let plan = FourierPlan::new(&cg);
    let l = cg.exponent() as f64;
    let coords: Vec<Vec<u64>> = (0..cg.len()).map(|i| cg.coords(i)).collect();
    let oracle_work = (p as u128).pow((k * (k + 1) / 2) as u32) * cg.len() as u128;
    let run_oracle = params.oracle && oracle_work <= params.cap;
    let witnesses: Vec<CosetWitness> = reps
        .par_iter()
        .map(|&y| {
            let pts = sub.coset(y);
            let quad = QuadraticPhase::new(&cg, mw.clone(), vec![0; cg.rank()], 0.into())?;
            let mut buf: Vec<Complex64> = pts
                .iter()
                .zip(&coords)
                .map(|(&x, t)| f.values[x] * e(-(quad.eval_num(t) as f64) / l))
                .collect();
            plan.forward_in_place(&mut buf);
            let mags: Vec<f64> = buf.iter().map(|z| z.norm()).collect();
            let xi = argmax_tolerant(&mags, 1e-12);
            let phase = QuadraticPhase { xi: cg.coords(xi), ..quad };
            let oracle = if run_oracle { Some(u3_oracle_coset(f, y, &sub, params.cap)?.value) } else { None };
            Ok(CosetWitness { y: g.coords(y), phase, bias: mags[xi], oracle })
        })
        .collect::<Result<_>>()?;

    let reproduction_error = witnesses
        .iter()
        .map(|wt| (witness_bias(f, &sub, wt) - wt.bias).abs())
        .fold(0.0, f64::max);
    let oracle_consistent = witnesses.iter().all(|wt| wt.oracle.map_or(true, |o| wt.bias <= o + 1e-9));
    let average_bias = witnesses.iter().map(|wt| wt.bias).sum::<f64>() / witnesses.len() as f64;
    let best = witnesses.iter().map(|wt| wt.bias).fold(0.0, f64::max);
    let gowers_u3 = gowers_recursive(f, 3)?;
    let u3_lower_bound = (p as f64).powi(-(n as i32)) * sub.order() as f64 * best;

    let quadruples = additive_quadruples(&gamma);
    let nn = g.order() as f64;
    let gp = gamma.pairs();
    let mut diffs: Vec<(usize, usize)> =
        gp.iter().flat_map(|&(h1, x1)| gp.iter().map(move |&(h2, x2)| (g.sub(h1, h2), g.sub(x1, x2)))).collect();
    diffs.sort_unstable();
    diffs.dedup();
    let size = gamma.len() as f64;
    let stats = PipelineStats {
        quadruples,
        quadruple_bound: 2f64.powi(-8) * params.eta.powi(64) * nn.powi(3),
        gamma_size: gamma.len(),
        gamma_sliced_size: slice.graph.len(),
        doubling: diffs.len() as f64 / size,
        energy_constant: size.powi(3) / quadruples as f64,
        a_size: slice.a_size,
        m: slice.m,
        surrogate: slice.surrogate,
        graph_verified: slice.graph_verified,
        slice_retries: slice.retries,
        v_dim: fit.v.len(),
        agreement: fit.agreement,
        well_defined: fit.well_defined,
        seed: params.seed,
    };
    Ok(ObstructionReport {
        group: g.clone(),
        eta: params.eta,
        w,
        m: fit.m,
        witnesses,
        average_bias,
        oracle_consistent,
        reproduction_error,
        gowers_u3,
        u3_lower_bound,
        u3_lower_bound_ok: gowers_u3 >= u3_lower_bound - 1e-9,
        stats,
    })
}

/// `|E_{x in y+W} f(x) e(-phase(t))|` evaluated pointwise.
pub fn witness_bias(f: &GroupFunction, w: &Subgroup, wt: &CosetWitness) -> f64 {
    let g = &f.group;
    let cg = &wt.phase.group;
    let pts = w.coset(g.index(&wt.y));
    let l = cg.exponent() as f64;
    let sum: Complex64 = pts
        .iter()
        .enumerate()
        .map(|(i, &x)| f.values[x] * e(-(wt.phase.eval_num(&cg.coords(i)) as f64) / l))
        .sum();
    sum.norm() / pts.len() as f64
}
