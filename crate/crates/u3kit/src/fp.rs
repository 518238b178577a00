//! Linear algebra over the prime field `F_p` on row vectors with entries in `[0, p)`.

use crate::group::mod_inv;

pub type Vector = Vec<u64>;

fn inv(a: u64, p: u64) -> u64 {
    mod_inv(a as i64, p as i64).expect("nonzero element of a prime field") as u64
}

/// Reduced row echelon form of `rows`, dropping zero rows; returns the pivot columns too.
pub fn rref(rows: &[Vector], p: u64) -> (Vec<Vector>, Vec<usize>) {
    let mut a: Vec<Vector> = rows.iter().map(|r| r.iter().map(|&x| x % p).collect()).collect();
    let ncols = a.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        let Some(piv) = (row..a.len()).find(|&r| a[r][col] != 0) else { continue };
        a.swap(row, piv);
        let s = inv(a[row][col], p);
        a[row].iter_mut().for_each(|x| *x = *x * s % p);
        let pr = a[row].clone();
        for (r, other) in a.iter_mut().enumerate() {
            if r != row && other[col] != 0 {
                let f = other[col];
                other.iter_mut().zip(&pr).for_each(|(x, &y)| *x = (*x + p * p - f * y % p) % p);
            }
        }
        pivots.push(col);
        row += 1;
    }
    a.truncate(row);
    (a, pivots)
}

pub fn rank(rows: &[Vector], p: u64) -> usize {
    rref(rows, p).1.len()
}

/// Basis of `{c : sum_j a[i][j] c_j = 0 for all i}` in `F_p^ncols`.
pub fn kernel(a: &[Vector], ncols: usize, p: u64) -> Vec<Vector> {
    let (r, pivots) = rref(a, p);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![0u64; ncols];
            v[f] = 1;
            for (row, &pc) in r.iter().zip(&pivots) {
                v[pc] = (p - row[f]) % p;
            }
            v
        })
        .collect()
}

/// `sum_i c_i basis_i`.
pub fn combine(c: &[u64], basis: &[Vector], p: u64) -> Vector {
    let n = basis.first().map_or(0, |b| b.len());
    let mut out = vec![0u64; n];
    for (&ci, b) in c.iter().zip(basis) {
        out.iter_mut().zip(b).for_each(|(x, &y)| *x = (*x + ci * y) % p);
    }
    out
}

/// `x . M y = sum_ij m_ij x_i y_j mod p`.
pub fn bilinear(m: &[Vec<i64>], x: &[u64], y: &[u64], p: u64) -> u64 {
    let pi = p as i64;
    let mut acc = 0i64;
    for (i, row) in m.iter().enumerate() {
        for (j, &mij) in row.iter().enumerate() {
            acc = (acc + mij.rem_euclid(pi) * (x[i] as i64) % pi * (y[j] as i64)) % pi;
        }
    }
    acc as u64
}

/// Vectors of `extra` extending a basis of `span(base)` to one of `span(base ∪ extra)`.
pub fn complement(base: &[Vector], extra: &[Vector], p: u64) -> Vec<Vector> {
    let mut cur: Vec<Vector> = base.to_vec();
    let mut r = rank(&cur, p);
    let mut out = Vec::new();
    for v in extra {
        cur.push(v.clone());
        let r2 = rank(&cur, p);
        if r2 > r {
            r = r2;
            out.push(v.clone());
        } else {
            cur.pop();
        }
    }
    out
}

/// Coefficient vectors of `F_p^k` in row-major order (first coordinate most significant).
pub fn coefficient(idx: u64, k: usize, p: u64) -> Vector {
    let mut c = vec![0u64; k];
    let mut r = idx;
    for slot in c.iter_mut().rev() {
        *slot = r % p;
        r /= p;
    }
    c
}

/// Inverse of a square matrix (rows), `None` when singular.
pub fn inverse(m: &[Vector], p: u64) -> Option<Vec<Vector>> {
    let n = m.len();
    let aug: Vec<Vector> = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row: Vector = r.iter().map(|&x| x % p).collect();
            row.extend((0..n).map(|j| (i == j) as u64));
            row
        })
        .collect();
    let (r, pivots) = rref(&aug, p);
    if pivots.len() < n || pivots[n - 1] >= n {
        return None;
    }
    Some(r.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// `a b` for matrices given as rows.
pub fn matmul(a: &[Vector], b: &[Vector], p: u64) -> Vec<Vector> {
    let k = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| (0..k).map(|j| row.iter().zip(b).map(|(&x, br)| x * br[j] % p).sum::<u64>() % p).collect())
        .collect()
}

/// `a x` for a column vector `x`.
pub fn matvec(a: &[Vector], x: &[u64], p: u64) -> Vector {
    a.iter().map(|row| row.iter().zip(x).map(|(&u, &v)| u * v % p).sum::<u64>() % p).collect()
}

pub fn transpose(a: &[Vector]) -> Vec<Vector> {
    let k = a.first().map_or(0, |r| r.len());
    (0..k).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}
