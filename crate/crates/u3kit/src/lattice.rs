//! Exact integer lattice bases: echelon reduction of generating sets and LLL reduction.

use num_rational::Ratio;
use num_traits::Zero;

type Q = Ratio<i128>;

fn dot(a: &[i128], b: &[i128]) -> i128 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A basis (as rows) of the integer lattice spanned by `gens`, in row echelon form.
pub fn basis_from_generators(gens: &[Vec<i128>]) -> Vec<Vec<i128>> {
    let mut rows: Vec<Vec<i128>> = gens.iter().filter(|r| r.iter().any(|&x| x != 0)).cloned().collect();
    let Some(dim) = rows.first().map(|r| r.len()) else {
        return Vec::new();
    };
    let mut pivot = 0;
    for col in 0..dim {
        loop {
            let best = (pivot..rows.len())
                .filter(|&r| rows[r][col] != 0)
                .min_by_key(|&r| rows[r][col].abs());
            let Some(b) = best else { break };
            rows.swap(pivot, b);
            let mut done = true;
            for r in pivot + 1..rows.len() {
                if rows[r][col] != 0 {
                    let q = rows[r][col].div_euclid(rows[pivot][col]);
                    let p = rows[pivot].clone();
                    rows[r].iter_mut().zip(&p).for_each(|(x, y)| *x -= q * y);
                    if rows[r][col] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                pivot += 1;
                break;
            }
        }
        if pivot == rows.len() {
            break;
        }
    }
    rows.truncate(pivot);
    rows.retain(|r| r.iter().any(|&x| x != 0));
    rows
}

/// Gram-Schmidt data: orthogonal squared norms and the mu coefficients.
fn gram_schmidt(b: &[Vec<i128>]) -> (Vec<Q>, Vec<Vec<Q>>) {
    let n = b.len();
    let mut star: Vec<Vec<Q>> = Vec::with_capacity(n);
    let mut norms = vec![Q::zero(); n];
    let mut mu = vec![vec![Q::zero(); n]; n];
    for i in 0..n {
        let mut v: Vec<Q> = b[i].iter().map(|&x| Q::from_integer(x)).collect();
        for j in 0..i {
            let num: Q = b[i].iter().zip(&star[j]).map(|(&x, y)| y * x).sum();
            mu[i][j] = num / norms[j];
            for (vk, sk) in v.iter_mut().zip(&star[j]) {
                *vk -= mu[i][j] * sk;
            }
        }
        norms[i] = v.iter().map(|x| x * x).sum();
        star.push(v);
    }
    (norms, mu)
}

fn round_q(x: Q) -> i128 {
    (x + Q::new(1, 2)).floor().to_integer()
}

/// LLL reduction with parameter `delta`, exact over the rationals.
pub fn lll(mut b: Vec<Vec<i128>>, delta: Q) -> Vec<Vec<i128>> {
    let n = b.len();
    if n < 2 {
        return b;
    }
    let mut k = 1;
    while k < n {
        for j in (0..k).rev() {
            let (_, mu) = gram_schmidt(&b);
            let q = round_q(mu[k][j]);
            if q != 0 {
                let bj = b[j].clone();
                b[k].iter_mut().zip(&bj).for_each(|(x, y)| *x -= q * y);
            }
        }
        let (norms, mu) = gram_schmidt(&b);
        let m = mu[k][k - 1];
        if norms[k] >= (delta - m * m) * norms[k - 1] {
            k += 1;
        } else {
            b.swap(k, k - 1);
            k = (k - 1).max(1);
        }
    }
    b
}

/// Determinant of a square integer matrix (Bareiss elimination).
pub fn det(m: &[Vec<i128>]) -> i128 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    let mut a = m.to_vec();
    let mut sign = 1;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[k][k] == 0 {
            let Some(r) = (k + 1..n).find(|&r| a[r][k] != 0) else { return 0 };
            a.swap(k, r);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

pub fn euclid_norm(v: &[i128]) -> f64 {
    (dot(v, v) as f64).sqrt()
}

/// Basis with small product of lengths: LLL, then for rank at most 3 a greedy search over
/// short lattice vectors whenever it improves the product.
pub fn reduced_basis(gens: &[Vec<i128>]) -> Vec<Vec<i128>> {
    let b = lll(basis_from_generators(gens), Q::new(99, 100));
    if b.len() > 3 || b.len() < 2 {
        return b;
    }
    let greedy = greedy_short_basis(&b, 3);
    let prod = |m: &[Vec<i128>]| m.iter().map(|v| euclid_norm(v)).product::<f64>();
    match greedy {
        Some(g) if prod(&g) < prod(&b) - 1e-12 => g,
        _ => b,
    }
}

/// Successively shortest vectors extending to a basis, searching coefficients in `[-k, k]`.
fn greedy_short_basis(b: &[Vec<i128>], k: i128) -> Option<Vec<Vec<i128>>> {
    let n = b.len();
    let mut cands: Vec<(Vec<i128>, Vec<i128>)> = Vec::new();
    let total = (2 * k + 1).pow(n as u32);
    for idx in 0..total {
        let mut r = idx;
        let coef: Vec<i128> = (0..n)
            .map(|_| {
                let c = r % (2 * k + 1) - k;
                r /= 2 * k + 1;
                c
            })
            .collect();
        if coef.iter().all(|&c| c == 0) {
            continue;
        }
        let v: Vec<i128> = (0..b[0].len()).map(|t| (0..n).map(|i| coef[i] * b[i][t]).sum()).collect();
        cands.push((coef, v));
    }
    cands.sort_by_key(|(c, v)| (dot(v, v), c.clone()));
    let mut chosen: Vec<Vec<i128>> = Vec::new();
    let mut out = Vec::new();
    for (c, v) in cands {
        let mut trial = chosen.clone();
        trial.push(c.clone());
        if primitive(&trial) {
            chosen = trial;
            out.push(v);
            if chosen.len() == n {
                return Some(out);
            }
        }
    }
    None
}

/// Whether the rows (integer coefficient vectors) span a saturated sublattice, i.e. the gcd
/// of their maximal minors is 1.
fn primitive(rows: &[Vec<i128>]) -> bool {
    let n = rows[0].len();
    let k = rows.len();
    let mut g = 0i128;
    let mut cols = Vec::new();
    subsets(n, k, 0, &mut cols, &mut |cs| {
        let m: Vec<Vec<i128>> = rows.iter().map(|r| cs.iter().map(|&c| r[c]).collect()).collect();
        g = num_integer::gcd(g, det(&m));
    });
    g == 1
}

fn subsets(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
    if cur.len() == k {
        f(cur);
        return;
    }
    for i in start..n {
        cur.push(i);
        subsets(n, k, i + 1, cur, f);
        cur.pop();
    }
}
