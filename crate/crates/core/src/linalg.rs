//! Small dense matrices of expressions.

use crate::error::{Error, Result};
use crate::expr::Expr;

pub type Matrix = Vec<Vec<Expr>>;

pub fn identity(n: usize) -> Matrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { Expr::one() } else { Expr::zero() }).collect())
        .collect()
}

pub fn zeros(rows: usize, cols: usize) -> Matrix {
    vec![vec![Expr::zero(); cols]; rows]
}

pub fn transpose(a: &Matrix) -> Matrix {
    let cols = a.first().map_or(0, Vec::len);
    (0..cols).map(|j| a.iter().map(|r| r[j].clone()).collect()).collect()
}

pub fn mul(a: &Matrix, b: &Matrix) -> Matrix {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| (0..cols).map(|j| Expr::sum((0..inner).map(|k| &row[k] * &b[k][j]))).collect())
        .collect()
}

fn check_square(a: &Matrix) -> Result<usize> {
    let n = a.len();
    if a.iter().any(|r| r.len() != n) {
        return Err(Error::Shape("matrix is not square".into()));
    }
    Ok(n)
}

fn minor(a: &Matrix, row: usize, col: usize) -> Matrix {
    a.iter()
        .enumerate()
        .filter(|(i, _)| *i != row)
        .map(|(_, r)| r.iter().enumerate().filter(|(j, _)| *j != col).map(|(_, e)| e.clone()).collect())
        .collect()
}

/// Determinant; cofactor expansion for small sizes keeps entries polynomial.
pub fn det(a: &Matrix) -> Result<Expr> {
    let n = check_square(a)?;
    Ok(match n {
        0 => Expr::one(),
        1 => a[0][0].clone(),
        2 => &a[0][0] * &a[1][1] - &a[0][1] * &a[1][0],
        _ if n <= 5 => {
            let mut acc = Expr::zero();
            for j in 0..n {
                if a[0][j].is_zero() {
                    continue;
                }
                let c = &a[0][j] * det(&minor(a, 0, j))?;
                acc = if j % 2 == 0 { acc + c } else { acc - c };
            }
            acc
        }
        _ => det_elimination(a),
    })
}

fn det_elimination(a: &Matrix) -> Expr {
    let n = a.len();
    let mut m = a.clone();
    let mut d = Expr::one();
    for k in 0..n {
        let Some(p) = (k..n).find(|&i| !m[i][k].is_zero()) else {
            return Expr::zero();
        };
        if p != k {
            m.swap(p, k);
            d = -d;
        }
        let piv = m[k][k].clone();
        d = d * &piv;
        for i in k + 1..n {
            if m[i][k].is_zero() {
                continue;
            }
            let f = &m[i][k] / &piv;
            for j in k..n {
                let v = &m[i][j] - &f * &m[k][j];
                m[i][j] = v;
            }
        }
    }
    d
}

/// Exact inverse via the adjugate.
pub fn inverse(a: &Matrix) -> Result<Matrix> {
    let n = check_square(a)?;
    let d = det(a)?;
    if d.is_zero() {
        return Err(Error::Singular("determinant is identically zero".into()));
    }
    let dinv = d.recip();
    if n == 1 {
        return Ok(vec![vec![dinv]]);
    }
    let mut out = zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let c = det(&minor(a, j, i))?;
            let c = if (i + j) % 2 == 0 { c } else { -c };
            out[i][j] = c * &dinv;
        }
    }
    Ok(out)
}

/// Solves `a · x = b` by Cramer's rule.
pub fn solve(a: &Matrix, b: &[Expr]) -> Result<Vec<Expr>> {
    let n = check_square(a)?;
    if b.len() != n {
        return Err(Error::Shape(format!("{n}×{n} system with {} right-hand sides", b.len())));
    }
    let d = det(a)?;
    if d.is_zero() {
        return Err(Error::Singular("determinant is identically zero".into()));
    }
    (0..n)
        .map(|k| {
            let mut ak = a.clone();
            for (row, bi) in ak.iter_mut().zip(b) {
                row[k] = bi.clone();
            }
            Ok(det(&ak)? / &d)
        })
        .collect()
}

pub fn is_symmetric(a: &Matrix) -> bool {
    let n = a.len();
    (0..n).all(|i| (0..i).all(|j| a[i][j] == a[j][i]))
}
