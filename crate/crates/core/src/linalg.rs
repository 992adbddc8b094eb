//! Dense helpers over nalgebra, plus symbolic Gaussian elimination.

use nalgebra::{DMatrix, DVector};

use crate::symbolic::{simplify, Expr};

pub fn to_matrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    DMatrix::from_fn(n, m, |r, c| rows[r][c])
}

pub fn det(rows: &[Vec<f64>]) -> f64 {
    if rows.is_empty() {
        return 1.0;
    }
    to_matrix(rows).determinant()
}

/// Determinant after dividing every row by its largest absolute entry.
pub fn row_scaled_det(rows: &[Vec<f64>]) -> f64 {
    let mut scaled = Vec::with_capacity(rows.len());
    for row in rows {
        let scale = row.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        scaled.push(row.iter().map(|x| x / scale).collect::<Vec<_>>());
    }
    det(&scaled)
}

/// Solves `a x = b` by LU with partial pivoting.
pub fn solve(rows: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    if rows.is_empty() {
        return Some(Vec::new());
    }
    let lu = to_matrix(rows).lu();
    lu.solve(&DVector::from_column_slice(b))
        .map(|x| x.iter().copied().collect())
        .filter(|x: &Vec<f64>| x.iter().all(|v| v.is_finite()))
}

pub fn inverse(rows: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let inv = to_matrix(rows).try_inverse()?;
    Some(
        (0..inv.nrows())
            .map(|r| (0..inv.ncols()).map(|c| inv[(r, c)]).collect())
            .collect(),
    )
}

/// Symbolic Gaussian elimination for `a x = b`. The pivot in each column is
/// the first entry that does not simplify to zero. Returns `None` when a
/// column has no such entry.
pub fn solve_symbolic(a: &[Vec<Expr>], b: &[Expr]) -> Option<Vec<Expr>> {
    let n = a.len();
    let mut m: Vec<Vec<Expr>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r: Vec<Expr> = row.iter().map(simplify).collect();
            r.push(simplify(rhs));
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        let inv = simplify(&Expr::pow(m[col][col].clone(), -1));
        for c in col..=n {
            m[col][c] = simplify(&(&m[col][c] * &inv));
        }
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let factor = m[r][col].clone();
            for c in col..=n {
                m[r][c] = simplify(&(&m[r][c] - &(&factor * &m[col][c])));
            }
        }
    }
    Some(m.into_iter().map(|mut row| row.pop().unwrap()).collect())
}

/// Determinant by cofactor expansion along the first row.
pub fn det_symbolic(a: &[Vec<Expr>]) -> Expr {
    match a.len() {
        0 => Expr::one(),
        1 => simplify(&a[0][0]),
        n => {
            let mut terms = Vec::with_capacity(n);
            for (c, lead) in a[0].iter().enumerate() {
                if lead.is_zero() {
                    continue;
                }
                let minor: Vec<Vec<Expr>> = a[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|(j, _)| *j != c)
                            .map(|(_, x)| x.clone())
                            .collect()
                    })
                    .collect();
                let sign = Expr::int(if c % 2 == 0 { 1 } else { -1 });
                terms.push(Expr::product(vec![
                    sign,
                    lead.clone(),
                    det_symbolic(&minor),
                ]));
            }
            simplify(&Expr::sum(terms))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::{equivalent, parse};

    #[test]
    fn numeric_helpers() {
        let a = vec![vec![0.0, 2.0], vec![1.0, 1.0]];
        assert!((det(&a) + 2.0).abs() < 1e-15);
        let x = solve(&a, &[2.0, 3.0]).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
        assert!(solve(&[vec![1.0, 1.0], vec![1.0, 1.0]], &[1.0, 2.0]).is_none());
        assert_eq!(row_scaled_det(&[vec![1e-12, 0.0], vec![0.0, 1.0]]), 1.0);
        assert_eq!(row_scaled_det(&[vec![0.0, 0.0], vec![0.0, 1.0]]), 0.0);
    }

    #[test]
    fn symbolic_solve() {
        let e = |s: &str| parse(s).unwrap();
        let a = vec![vec![e("0"), e("q1_0")], vec![e("2"), e("1")]];
        let b = vec![e("p1_1"), e("p2_1")];
        let x = solve_symbolic(&a, &b).unwrap();
        assert!(equivalent(&x[1], &e("p1_1/q1_0")));
        assert!(equivalent(&x[0], &e("(p2_1 - p1_1/q1_0)/2")));
        assert!(solve_symbolic(&[vec![e("0")]], &[e("1")]).is_none());
        assert!(equivalent(&det_symbolic(&a), &e("-2*q1_0")));
    }
}
