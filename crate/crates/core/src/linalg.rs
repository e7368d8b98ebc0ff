//! Exact linear algebra over the rationals: row reduction, rank, span
//! membership and solving. Matrices are lists of rows.

use num_traits::{One, Zero};

use crate::scalar::Rational;

pub type Vector = Vec<Rational>;

/// Reduced row-echelon form. Returns the nonzero rows and their pivot columns.
pub fn rref(rows: &[Vector]) -> (Vec<Vector>, Vec<usize>) {
    let mut m: Vec<Vector> = rows.to_vec();
    let ncols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = Rational::one() / m[r][c].clone();
        for x in m[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in c..ncols {
                    let d = &f * &m[r][j];
                    m[i][j] = &m[i][j] - d;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    m.truncate(r);
    (m, pivots)
}

pub fn rank(rows: &[Vector]) -> usize {
    rref(rows).1.len()
}

/// Is `v` in the row span of `basis`?
pub fn in_span(basis: &[Vector], v: &[Rational]) -> bool {
    if v.iter().all(Zero::is_zero) {
        return true;
    }
    let mut rows = basis.to_vec();
    let r = rank(&rows);
    rows.push(v.to_vec());
    rank(&rows) == r
}

/// Coefficients `a` with `Σ a_i rows[i] = v`, if any. `rows` need not be
/// independent; one particular solution is returned.
pub fn solve_combination(rows: &[Vector], v: &[Rational]) -> Option<Vector> {
    let k = rows.len();
    let n = v.len();
    // Augmented system with unknowns a_0..a_{k-1}: for each column j,
    // Σ_i a_i rows[i][j] = v[j].
    let system: Vec<Vector> = (0..n)
        .map(|j| {
            let mut row: Vector = rows.iter().map(|r| r[j].clone()).collect();
            row.push(v[j].clone());
            row
        })
        .collect();
    if system.is_empty() {
        return Some(vec![Rational::zero(); k]);
    }
    let (red, pivots) = rref(&system);
    if pivots.contains(&k) {
        return None;
    }
    let mut a = vec![Rational::zero(); k];
    for (row, &p) in red.iter().zip(&pivots) {
        a[p] = row[k].clone();
    }
    Some(a)
}

/// Basis of the null space `{a : Σ a_i rows[i] = 0}`.
pub fn left_null_space(rows: &[Vector]) -> Vec<Vector> {
    let k = rows.len();
    let n = rows.first().map_or(0, Vec::len);
    let system: Vec<Vector> = (0..n)
        .map(|j| rows.iter().map(|r| r[j].clone()).collect())
        .collect();
    let (red, pivots) = if n == 0 {
        (Vec::new(), Vec::new())
    } else {
        rref(&system)
    };
    let mut out = Vec::new();
    for free in (0..k).filter(|c| !pivots.contains(c)) {
        let mut a = vec![Rational::zero(); k];
        a[free] = Rational::one();
        for (row, &p) in red.iter().zip(&pivots) {
            a[p] = -row[free].clone();
        }
        out.push(a);
    }
    out
}

/// Inverse of a square matrix, `None` if singular.
pub fn inverse(m: &[Vector]) -> Option<Vec<Vector>> {
    let n = m.len();
    let aug: Vec<Vector> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| {
                if i == j {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            }));
            r
        })
        .collect();
    let (red, pivots) = rref(&aug);
    if pivots.len() < n || pivots[..n] != (0..n).collect::<Vec<_>>()[..] {
        return None;
    }
    Some(red.into_iter().map(|r| r[n..].to_vec()).collect())
}
