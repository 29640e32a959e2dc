//! Fraction-free linear algebra over the field of rational functions.

use crate::algebra::RationalExpr;
use crate::error::{Error, Result};

/// Multiplies each row by the product of its distinct denominators so that
/// every entry is a polynomial.
fn clear_denominators(rows: &mut [Vec<RationalExpr>]) {
    for row in rows.iter_mut() {
        let mut dens: Vec<RationalExpr> = Vec::new();
        for e in row.iter() {
            let d = RationalExpr::from_poly(e.denom().clone());
            if !d.is_one() && !dens.contains(&d) {
                dens.push(d);
            }
        }
        if dens.is_empty() {
            continue;
        }
        let scale = dens.iter().fold(RationalExpr::one(), |acc, d| &acc * d);
        for e in row.iter_mut() {
            *e = &*e * &scale;
        }
    }
}

/// Row echelon form by Bareiss elimination. Pivots are chosen as the first
/// nonzero entry of each column, scanning rows in order. Returns the pivot
/// columns.
pub fn bareiss_echelon(rows: &mut [Vec<RationalExpr>]) -> Result<Vec<usize>> {
    clear_denominators(rows);
    let m = rows.len();
    let p = rows.first().map_or(0, Vec::len);
    let mut prev = RationalExpr::one();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..p {
        if r == m {
            break;
        }
        let Some(i) = (r..m).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, i);
        let pivot = rows[r][c].clone();
        for i in r + 1..m {
            let lead = rows[i][c].clone();
            for j in c + 1..p {
                let num = &(&pivot * &rows[i][j]) - &(&lead * &rows[r][j]);
                let q = num.checked_div(&prev)?;
                if !q.is_polynomial() {
                    return Err(Error::Invalid("inexact division in Bareiss elimination".into()));
                }
                rows[i][j] = q;
            }
            rows[i][c] = RationalExpr::zero();
        }
        prev = pivot;
        pivots.push(c);
        r += 1;
    }
    Ok(pivots)
}

/// A basis of `{x : A x = 0}`, one vector per free column with that
/// coordinate set to 1.
pub fn right_kernel(matrix: &[Vec<RationalExpr>]) -> Result<Vec<Vec<RationalExpr>>> {
    let p = matrix.first().map_or(0, Vec::len);
    let mut rows = matrix.to_vec();
    let pivots = bareiss_echelon(&mut rows)?;
    let mut basis = Vec::new();
    for free in (0..p).filter(|c| !pivots.contains(c)) {
        let mut x = vec![RationalExpr::zero(); p];
        x[free] = RationalExpr::one();
        for (r, &pc) in pivots.iter().enumerate().rev() {
            let mut acc = RationalExpr::zero();
            for j in pc + 1..p {
                if !x[j].is_zero() && !rows[r][j].is_zero() {
                    acc = &acc + &(&rows[r][j] * &x[j]);
                }
            }
            x[pc] = (-acc).checked_div(&rows[r][pc])?;
        }
        basis.push(x);
    }
    Ok(basis)
}

/// A basis of `{y : y^T A = 0}`.
pub fn left_kernel(matrix: &[Vec<RationalExpr>]) -> Result<Vec<Vec<RationalExpr>>> {
    right_kernel(&transpose(matrix))
}

pub fn transpose(matrix: &[Vec<RationalExpr>]) -> Vec<Vec<RationalExpr>> {
    let p = matrix.first().map_or(0, Vec::len);
    (0..p)
        .map(|j| matrix.iter().map(|row| row[j].clone()).collect())
        .collect()
}

pub fn mat_mul(a: &[Vec<RationalExpr>], b: &[Vec<RationalExpr>]) -> Vec<Vec<RationalExpr>> {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    (0..inner).fold(RationalExpr::zero(), |acc, k| &acc + &(&row[k] * &b[k][j]))
                })
                .collect()
        })
        .collect()
}

/// Determinant by cofactor expansion along the first row.
pub fn determinant(m: &[Vec<RationalExpr>]) -> RationalExpr {
    match m.len() {
        0 => RationalExpr::one(),
        1 => m[0][0].clone(),
        n => {
            let mut acc = RationalExpr::zero();
            for j in 0..n {
                if m[0][j].is_zero() {
                    continue;
                }
                let term = &m[0][j] * &determinant(&minor(m, 0, j));
                acc = if j % 2 == 0 { &acc + &term } else { &acc - &term };
            }
            acc
        }
    }
}

fn minor(m: &[Vec<RationalExpr>], row: usize, col: usize) -> Vec<Vec<RationalExpr>> {
    m.iter()
        .enumerate()
        .filter(|(i, _)| *i != row)
        .map(|(_, r)| {
            r.iter()
                .enumerate()
                .filter(|(j, _)| *j != col)
                .map(|(_, e)| e.clone())
                .collect()
        })
        .collect()
}

/// `adj(m) / det(m)`.
pub fn inverse(m: &[Vec<RationalExpr>]) -> Result<Vec<Vec<RationalExpr>>> {
    let n = m.len();
    let det = determinant(m);
    if det.is_zero() {
        return Err(Error::DivisionByZero { op: "inverse" });
    }
    let mut out = vec![vec![RationalExpr::zero(); n]; n];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, e) in row.iter_mut().enumerate() {
            let c = if n == 1 {
                RationalExpr::one()
            } else {
                determinant(&minor(m, j, i))
            };
            let c = if (i + j) % 2 == 0 { c } else { -c };
            *e = c.checked_div(&det)?;
        }
    }
    Ok(out)
}
