//! Exact linear feasibility over the rationals.
//!
//! Phase one of the simplex method on a dense tableau with Bland's rule, so
//! it always terminates. Meant for the small systems left after a floating
//! point solver has picked a support.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

/// A column of the constraint matrix as `(row, coefficient)` pairs.
pub type Column = Vec<(usize, i64)>;

/// Finds `y >= 0` with `sum_j y_j * columns[j] = b`, or `None` if there is
/// none.
pub fn nonnegative_solution(rows: usize, columns: &[Column], b: &[i64]) -> Option<Vec<BigRational>> {
    assert_eq!(b.len(), rows);
    let n = columns.len();
    let width = n + rows + 1;
    let rhs = width - 1;
    let mut t = vec![vec![BigRational::zero(); width]; rows];
    for (j, col) in columns.iter().enumerate() {
        for &(i, v) in col {
            t[i][j] += BigRational::from_integer(BigInt::from(v));
        }
    }
    for i in 0..rows {
        if b[i] < 0 {
            for x in t[i].iter_mut() {
                *x = -x.clone();
            }
        }
        t[i][n + i] = BigRational::from_integer(1.into());
        t[i][rhs] = BigRational::from_integer(BigInt::from(b[i].abs()));
    }
    let mut basis: Vec<usize> = (n..n + rows).collect();
    // Reduced costs of the phase-one objective over the structural columns:
    // minus the column sums over rows whose basic variable is artificial.
    // Artificial columns never re-enter.
    loop {
        let mut cost = vec![BigRational::zero(); width];
        for (i, row) in t.iter().enumerate() {
            if basis[i] >= n {
                for (c, x) in cost.iter_mut().zip(row) {
                    *c -= x;
                }
            }
        }
        for &bv in &basis {
            cost[bv] = BigRational::zero();
        }
        let Some(enter) = (0..n).find(|&j| cost[j].is_negative()) else {
            break;
        };
        let mut leave: Option<usize> = None;
        for i in 0..rows {
            if !t[i][enter].is_positive() {
                continue;
            }
            let ratio = &t[i][rhs] / &t[i][enter];
            leave = match leave {
                None => Some(i),
                Some(l) => {
                    let best = &t[l][rhs] / &t[l][enter];
                    if ratio < best || (ratio == best && basis[i] < basis[l]) {
                        Some(i)
                    } else {
                        Some(l)
                    }
                }
            };
        }
        // Phase one is bounded below by zero, so a leaving row exists.
        let l = leave?;
        pivot(&mut t, l, enter);
        basis[l] = enter;
    }
    let mut y = vec![BigRational::zero(); n];
    for (i, &bv) in basis.iter().enumerate() {
        if bv >= n {
            if !t[i][rhs].is_zero() {
                return None;
            }
        } else {
            y[bv] = t[i][rhs].clone();
        }
    }
    Some(y)
}

/// Solves `sum_j y_j * columns[j] = b` exactly by fraction-free
/// elimination. Free columns are set to zero; `None` if inconsistent.
pub fn linear_solution(rows: usize, columns: &[Column], b: &[i64]) -> Option<Vec<BigRational>> {
    assert_eq!(b.len(), rows);
    let n = columns.len();
    let mut a = vec![vec![BigInt::zero(); n + 1]; rows];
    for (j, col) in columns.iter().enumerate() {
        for &(i, v) in col {
            a[i][j] += BigInt::from(v);
        }
    }
    for (row, &bi) in a.iter_mut().zip(b) {
        row[n] = BigInt::from(bi);
    }
    // Bareiss elimination to row echelon form.
    let mut pivots = Vec::new();
    let mut prev = BigInt::from(1);
    let mut r = 0;
    for c in 0..n {
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(r, p);
        for i in r + 1..rows {
            if a[i][c].is_zero() {
                for j in c + 1..=n {
                    if !a[i][j].is_zero() {
                        a[i][j] = &a[i][j] * &a[r][c] / &prev;
                    }
                }
                continue;
            }
            for j in c + 1..=n {
                let v = &a[i][j] * &a[r][c] - &a[i][c] * &a[r][j];
                a[i][j] = v / &prev;
            }
            a[i][c] = BigInt::zero();
        }
        prev = a[r][c].clone();
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    if (r..rows).any(|i| !a[i][n].is_zero()) {
        return None;
    }
    let mut y = vec![BigRational::zero(); n];
    for (i, &c) in pivots.iter().enumerate().rev() {
        let mut v = BigRational::from_integer(a[i][n].clone());
        for j in c + 1..n {
            if !a[i][j].is_zero() {
                v -= BigRational::from_integer(a[i][j].clone()) * &y[j];
            }
        }
        y[c] = v / BigRational::from_integer(a[i][c].clone());
    }
    Some(y)
}

fn pivot(t: &mut [Vec<BigRational>], l: usize, enter: usize) {
    let p = t[l][enter].clone();
    for x in t[l].iter_mut() {
        *x /= &p;
    }
    let pivot_row = t[l].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i == l || row[enter].is_zero() {
            continue;
        }
        let f = row[enter].clone();
        for (x, p) in row.iter_mut().zip(&pivot_row) {
            if !p.is_zero() {
                *x -= &f * p;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn check(rows: usize, cols: &[Column], b: &[i64], y: &[BigRational]) {
        let mut lhs = vec![BigRational::zero(); rows];
        for (col, yj) in cols.iter().zip(y) {
            assert!(!yj.is_negative());
            for &(i, v) in col {
                lhs[i] += yj * BigRational::from_integer(BigInt::from(v));
            }
        }
        for (l, &bi) in lhs.iter().zip(b) {
            assert_eq!(*l, BigRational::from_integer(BigInt::from(bi)));
        }
    }

    #[test]
    fn small_feasible_system() {
        // y0 - y1 = 0, y0 + y1 + y2 = 3, y2 - y0 = 0.
        let cols = vec![vec![(0, 1), (1, 1), (2, -1)], vec![(0, -1), (1, 1)], vec![(1, 1), (2, 1)]];
        let y = nonnegative_solution(3, &cols, &[0, 3, 0]).unwrap();
        check(3, &cols, &[0, 3, 0], &y);
        assert_eq!(y[0], BigRational::from_integer(1.into()));
    }

    #[test]
    fn infeasible_system() {
        // y0 + y1 = -1 has no nonnegative solution.
        assert!(nonnegative_solution(1, &[vec![(0, 1)], vec![(0, 1)]], &[-1]).is_none());
        // y0 - y1 = 0 and y0 + y1 = 1 and y0 = 1.
        assert!(nonnegative_solution(3, &[vec![(0, 1), (1, 1), (2, 1)], vec![(0, -1), (1, 1)]], &[0, 1, 1]).is_none());
    }

    #[test]
    fn linear_solution_of_square_system() {
        // 2a + b = 5, a - b = 1.
        let cols = vec![vec![(0, 2), (1, 1)], vec![(0, 1), (1, -1)]];
        let y = linear_solution(2, &cols, &[5, 1]).unwrap();
        check(2, &cols, &[5, 1], &y);
        assert!(linear_solution(2, &[vec![(0, 1), (1, 1)]], &[1, 2]).is_none());
    }

    proptest! {
        #[test]
        fn linear_solution_matches_planted(
            cols in proptest::collection::vec(proptest::collection::vec(-3i64..=3, 6), 1..6),
            planted in proptest::collection::vec(-4i64..4, 6),
        ) {
            let rows = 6;
            let columns: Vec<Column> = cols.iter().map(|c| c.iter().copied().enumerate().collect()).collect();
            let mut b = vec![0i64; rows];
            for (c, y) in cols.iter().zip(&planted) {
                for i in 0..rows {
                    b[i] += c[i] * y;
                }
            }
            let y = linear_solution(rows, &columns, &b).unwrap();
            let mut lhs = vec![BigRational::zero(); rows];
            for (col, yj) in columns.iter().zip(&y) {
                for &(i, v) in col {
                    lhs[i] += yj * BigRational::from_integer(BigInt::from(v));
                }
            }
            for (l, &bi) in lhs.iter().zip(&b) {
                prop_assert_eq!(l.clone(), BigRational::from_integer(BigInt::from(bi)));
            }
        }


        #[test]
        fn solves_systems_with_planted_solutions(
            cols in proptest::collection::vec(proptest::collection::vec(-3i64..=3, 4), 1..7),
            planted in proptest::collection::vec(0i64..4, 7),
        ) {
            let rows = 4;
            let columns: Vec<Column> = cols.iter().map(|c| c.iter().copied().enumerate().collect()).collect();
            let mut b = vec![0i64; rows];
            for (c, y) in cols.iter().zip(&planted) {
                for i in 0..rows {
                    b[i] += c[i] * y;
                }
            }
            let y = nonnegative_solution(rows, &columns, &b);
            prop_assert!(y.is_some());
            check(rows, &columns, &b, &y.unwrap());
        }
    }
}
