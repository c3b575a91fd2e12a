//! Exact integer matrix algorithms on small dense matrices.
//!
//! Matrices are stored as `Vec<Vec<i64>>` in row-major order. Every
//! arithmetic step is checked; overflow surfaces as [`Error::Overflow`]
//! instead of wrapping.

use crate::error::{Error, Result};

pub type IntMatrix = Vec<Vec<i64>>;

fn add(a: i64, b: i64) -> Result<i64> {
    a.checked_add(b).ok_or(Error::Overflow)
}

fn mul(a: i64, b: i64) -> Result<i64> {
    a.checked_mul(b).ok_or(Error::Overflow)
}

/// `row[dst] += factor * row[src]` for every column.
fn row_axpy(m: &mut IntMatrix, dst: usize, src: usize, factor: i64) -> Result<()> {
    if factor == 0 {
        return Ok(());
    }
    for c in 0..m[dst].len() {
        let v = add(m[dst][c], mul(factor, m[src][c])?)?;
        m[dst][c] = v;
    }
    Ok(())
}

fn col_axpy(m: &mut IntMatrix, dst: usize, src: usize, factor: i64) -> Result<()> {
    if factor == 0 {
        return Ok(());
    }
    for row in m.iter_mut() {
        row[dst] = add(row[dst], mul(factor, row[src])?)?;
    }
    Ok(())
}

fn swap_cols(m: &mut IntMatrix, a: usize, b: usize) {
    for row in m.iter_mut() {
        row.swap(a, b);
    }
}

/// Invariant factors of the Smith normal form of `m`.
///
/// Only the nonzero diagonal entries are returned, positive and in
/// divisibility order, so `result.len()` is the rank of `m` over the
/// rationals.
pub fn smith_invariants(m: &IntMatrix) -> Result<Vec<i64>> {
    let mut a = m.clone();
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut factors = Vec::new();

    for t in 0..rows.min(cols) {
        // Pivot: the smallest nonzero magnitude in the trailing block.
        let mut pivot = None;
        for i in t..rows {
            for j in t..cols {
                if a[i][j] != 0 && pivot.map_or(true, |(_, _, v): (usize, usize, i64)| a[i][j].unsigned_abs() < v.unsigned_abs()) {
                    pivot = Some((i, j, a[i][j]));
                }
            }
        }
        let Some((pi, pj, _)) = pivot else { break };
        a.swap(t, pi);
        swap_cols(&mut a, t, pj);

        loop {
            let mut dirty = false;
            // Clear column t below the pivot.
            for i in (t + 1)..rows {
                if a[i][t] != 0 {
                    let q = a[i][t].div_euclid(a[t][t]);
                    row_axpy(&mut a, i, t, -q)?;
                    if a[i][t] != 0 {
                        a.swap(t, i);
                        dirty = true;
                    }
                }
            }
            // Clear row t right of the pivot.
            for j in (t + 1)..cols {
                if a[t][j] != 0 {
                    let q = a[t][j].div_euclid(a[t][t]);
                    col_axpy(&mut a, j, t, -q)?;
                    if a[t][j] != 0 {
                        swap_cols(&mut a, t, j);
                        dirty = true;
                    }
                }
            }
            if dirty {
                continue;
            }
            // Divisibility: the pivot must divide the whole trailing block.
            let p = a[t][t];
            let offender = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| a[i][j] % p != 0));
            match offender {
                Some(i) => row_axpy(&mut a, t, i, 1)?,
                None => break,
            }
        }
        factors.push(a[t][t].checked_abs().ok_or(Error::Overflow)?);
    }
    Ok(factors)
}

/// Row-style Hermite normal form: upper echelon, positive pivots, entries
/// above each pivot reduced into `[0, pivot)`. Two matrices have the same
/// form exactly when they are related by a unimodular row transformation.
pub fn hermite_normal_form(m: &IntMatrix) -> Result<IntMatrix> {
    let mut a = m.clone();
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        loop {
            let mut best: Option<usize> = None;
            for i in r..rows {
                if a[i][c] != 0 && best.map_or(true, |b| a[i][c].unsigned_abs() < a[b][c].unsigned_abs()) {
                    best = Some(i);
                }
            }
            let Some(b) = best else { break };
            a.swap(r, b);
            let mut done = true;
            for i in (r + 1)..rows {
                if a[i][c] != 0 {
                    let q = a[i][c].div_euclid(a[r][c]);
                    row_axpy(&mut a, i, r, -q)?;
                    if a[i][c] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if a[r][c] == 0 {
            continue;
        }
        if a[r][c] < 0 {
            for v in a[r].iter_mut() {
                *v = v.checked_neg().ok_or(Error::Overflow)?;
            }
        }
        let p = a[r][c];
        for i in 0..r {
            let q = a[i][c].div_euclid(p);
            row_axpy(&mut a, i, r, -q)?;
        }
        r += 1;
    }
    Ok(a)
}

pub fn transpose(m: &IntMatrix) -> IntMatrix {
    if m.is_empty() {
        return Vec::new();
    }
    (0..m[0].len()).map(|j| m.iter().map(|row| row[j]).collect()).collect()
}

/// Determinant by fraction-free (Bareiss) elimination in `i128`.
pub fn determinant(m: &IntMatrix) -> Result<i128> {
    let n = m.len();
    if n == 0 {
        return Ok(1);
    }
    let mut a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&v| v as i128).collect()).collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&i| a[i][k] != 0) {
                Some(i) => {
                    a.swap(k, i);
                    sign = -sign;
                }
                None => return Ok(0),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = a[i][j]
                    .checked_mul(a[k][k])
                    .and_then(|x| x.checked_sub(a[i][k].checked_mul(a[k][j])?))
                    .ok_or(Error::Overflow)?;
                a[i][j] = num / prev;
            }
        }
        prev = a[k][k];
    }
    Ok(sign * a[n - 1][n - 1])
}

/// Solves `a · x = b` exactly for square `a`, requiring an integral answer.
pub fn solve_integral(a: &IntMatrix, b: &[i64]) -> Result<Vec<i64>> {
    let n = a.len();
    if b.len() != n || a.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, found: b.len() });
    }
    let det = determinant(a)?;
    if det == 0 {
        return Err(Error::NonIntegral("coefficient matrix is singular".into()));
    }
    // Cramer's rule.
    (0..n)
        .map(|j| {
            let mut aj = a.clone();
            for (i, row) in aj.iter_mut().enumerate() {
                row[j] = b[i];
            }
            let dj = determinant(&aj)?;
            if dj % det != 0 {
                return Err(Error::NonIntegral(format!("component {j} is {dj}/{det}")));
            }
            i64::try_from(dj / det).map_err(|_| Error::Overflow)
        })
        .collect()
}
