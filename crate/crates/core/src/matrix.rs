//! Dense rational linear algebra.

use serde::{Deserialize, Serialize};

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MatrixError {
    #[error("matrix is singular (rank {rank} < {dim})")]
    Singular { rank: usize, dim: usize },
    #[error("dimension mismatch: {0}")]
    Shape(String),
}

/// Row-major dense matrix of rationals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Rational>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix { rows, cols, entries: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self, MatrixError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(MatrixError::Shape("ragged rows".into()));
        }
        let n = rows.len();
        Ok(RatMatrix { rows: n, cols, entries: rows.into_iter().flatten().collect() })
    }

    /// Convenience constructor for integer data.
    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Self::from_rows(
            rows.iter().map(|r| r.iter().map(|&v| Rational::from_int(v)).collect()).collect(),
        )
        .expect("ragged rows")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul_vec(&self, x: &[Rational]) -> Vec<Rational> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).filter(|(a, _)| !a.is_zero()).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Select a subset of rows, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Self {
        RatMatrix {
            rows: idx.len(),
            cols: self.cols,
            entries: idx.iter().flat_map(|&i| self.row(i).iter().cloned()).collect(),
        }
    }

    /// Exact rank.
    pub fn rank(&self) -> usize {
        bareiss(integer_rows(self.to_rows())).rank
    }

    /// Solve `self * x = rhs` for square nonsingular `self`.
    pub fn solve_square(&self, rhs: &[Rational]) -> Result<Vec<Rational>, MatrixError> {
        if self.rows != self.cols {
            return Err(MatrixError::Shape(format!("{}x{} is not square", self.rows, self.cols)));
        }
        if rhs.len() != self.rows {
            return Err(MatrixError::Shape("rhs length".into()));
        }
        let n = self.rows;
        let aug: Vec<Vec<Rational>> = (0..n)
            .map(|i| {
                let mut r = self.row(i).to_vec();
                r.push(rhs[i].clone());
                r
            })
            .collect();
        let elim = bareiss(integer_rows(aug));
        // the rhs column may absorb a pivot when the matrix itself is singular
        if elim.pivots.len() < n || elim.pivots.iter().any(|&(_, c)| c >= n) {
            let rank = elim.pivots.iter().filter(|&&(_, c)| c < n).count();
            return Err(MatrixError::Singular { rank, dim: n });
        }
        let mut x = vec![Rational::zero(); n];
        for &(r, c) in elim.pivots.iter().rev() {
            let row = &elim.rows[r];
            let mut acc = row[n].clone();
            for j in c + 1..n {
                if !row[j].is_zero() {
                    acc -= &row[j] * &x[j];
                }
            }
            x[c] = acc / &row[c];
        }
        Ok(x)
    }

    /// A nonzero `p` with `selfᵀ p = 0`, i.e. a linear dependence among the
    /// rows, normalised so its first nonzero entry is 1. `None` when the rows
    /// are independent.
    pub fn nullspace_vector(&self) -> Option<Vec<Rational>> {
        let basis = self.left_nullspace();
        basis.into_iter().next()
    }

    /// Basis of `{p : selfᵀ p = 0}` from reduced row echelon form of `selfᵀ`;
    /// one vector per free row index, in increasing order.
    pub fn left_nullspace(&self) -> Vec<Vec<Rational>> {
        let t = self.transpose();
        let (rref, pivots) = rref(t.to_rows(), t.cols);
        let ncols = t.cols;
        let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
        let mut out = Vec::new();
        for free in (0..ncols).filter(|c| !pivot_cols.contains(c)) {
            let mut p = vec![Rational::zero(); ncols];
            p[free] = Rational::one();
            for &(r, c) in &pivots {
                p[c] = -&rref[r][free];
            }
            normalise_first_nonzero(&mut p);
            out.push(p);
        }
        out
    }
}

impl std::ops::Index<(usize, usize)> for RatMatrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.entries[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RatMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.entries[i * self.cols + j]
    }
}

pub fn normalise_first_nonzero(p: &mut [Rational]) {
    if let Some(lead) = p.iter().find(|v| !v.is_zero()).cloned() {
        for v in p.iter_mut() {
            *v = &*v / &lead;
        }
    }
}

/// Scale each row by the lcm of its denominators so entries are integers.
fn integer_rows(rows: Vec<Vec<Rational>>) -> Vec<Vec<Rational>> {
    rows.into_iter()
        .map(|r| {
            let l = Rational::from_bigint(crate::rational::lcm_denominators(r.iter()));
            if l.is_one() {
                r
            } else {
                r.into_iter().map(|v| v * &l).collect()
            }
        })
        .collect()
}

struct Echelon {
    rows: Vec<Vec<Rational>>,
    /// (row, column) of each pivot in elimination order.
    pivots: Vec<(usize, usize)>,
    rank: usize,
}

/// Fraction-free Gaussian elimination. Pivot choice is the first nonzero
/// entry scanning columns left to right, rows top to bottom.
fn bareiss(mut a: Vec<Vec<Rational>>) -> Echelon {
    let nrows = a.len();
    let ncols = a.first().map_or(0, Vec::len);
    let mut prev = Rational::one();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        for i in r + 1..nrows {
            let factor = a[i][c].clone();
            for j in c + 1..ncols {
                let v = &(&a[r][c] * &a[i][j]) - &(&factor * &a[r][j]);
                a[i][j] = v / &prev;
            }
            a[i][c] = Rational::zero();
        }
        prev = a[r][c].clone();
        pivots.push((r, c));
        r += 1;
    }
    Echelon { rank: pivots.len(), rows: a, pivots }
}

/// Reduced row echelon form with the same deterministic pivoting.
pub(crate) fn rref(mut a: Vec<Vec<Rational>>, ncols: usize) -> (Vec<Vec<Rational>>, Vec<(usize, usize)>) {
    let nrows = a.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = a[r][c].recip();
        for v in a[r].iter_mut() {
            *v = &*v * &inv;
        }
        for i in 0..nrows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..ncols {
                    if !a[r][j].is_zero() {
                        let d = &f * &a[r][j];
                        a[i][j] -= d;
                    }
                }
            }
        }
        pivots.push((r, c));
        r += 1;
    }
    (a, pivots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};
    use proptest::prelude::*;

    /// The six SB-L rows of the two-object 10x10 counterexample in `>=` form,
    /// columns (c1x, c2x, c1y, c2y, d12, d21).
    pub(crate) fn counterexample_rows() -> RatMatrix {
        RatMatrix::from_i64(&[
            &[0, 1, 0, 0, 2, 2],
            &[0, 0, 0, 1, -2, 2],
            &[-1, 0, 0, 0, 2, 2],
            &[0, 0, -1, 0, -2, 2],
            &[-1, 1, 0, 0, 10, 10],
            &[0, 0, -1, 1, -10, 10],
        ])
    }

    #[test]
    fn rank_small_cases() {
        assert_eq!(RatMatrix::identity(2).rank(), 2);
        assert_eq!(RatMatrix::from_i64(&[&[1, 0, 1], &[2, 0, 2]]).rank(), 1);
        assert_eq!(counterexample_rows().rank(), 6);
        assert_eq!(RatMatrix::zeros(3, 2).rank(), 0);
    }

    #[test]
    fn solve_identity_and_counterexample() {
        let x = RatMatrix::identity(2).solve_square(&[qi(3), q(-1, 2)]).unwrap();
        assert_eq!(x, vec![qi(3), q(-1, 2)]);
        let rhs: Vec<_> = [3, 1, -7, -9, 2, -8].iter().map(|&v| qi(v)).collect();
        let x = counterexample_rows().solve_square(&rhs).unwrap();
        assert_eq!(x, vec![qi(9), qi(1), qi(9), qi(1), q(1, 2), q(1, 2)]);
    }

    #[test]
    fn singular_is_reported() {
        let m = RatMatrix::from_i64(&[&[1, 2], &[1, 2]]);
        assert!(matches!(m.solve_square(&[qi(1), qi(1)]), Err(MatrixError::Singular { rank: 1, dim: 2 })));
    }

    #[test]
    fn nullspace_of_scalar_multiple() {
        let m = RatMatrix::from_i64(&[&[1, 0], &[2, 0]]);
        assert_eq!(m.nullspace_vector().unwrap(), vec![qi(1), q(-1, 2)]);
        assert!(RatMatrix::identity(3).nullspace_vector().is_none());
    }

    fn arb_matrix(max: usize) -> impl Strategy<Value = RatMatrix> {
        (1..=max, 1..=max).prop_flat_map(|(r, c)| {
            proptest::collection::vec((-4i64..=4, 1i64..=3), r * c).prop_map(move |v| {
                let rows = v.chunks(c).map(|ch| ch.iter().map(|&(n, d)| q(n, d)).collect()).collect();
                RatMatrix::from_rows(rows).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn rank_of_transpose(m in arb_matrix(5)) {
            prop_assert_eq!(m.rank(), m.transpose().rank());
        }

        #[test]
        fn solve_recovers_x(m in arb_matrix(4), xs in proptest::collection::vec((-9i64..9, 1i64..5), 4)) {
            prop_assume!(m.rows() == m.cols() && m.rank() == m.rows());
            let x: Vec<Rational> = xs.iter().take(m.cols()).map(|&(n, d)| q(n, d)).collect();
            let b = m.mul_vec(&x);
            prop_assert_eq!(m.solve_square(&b).unwrap(), x);
        }

        #[test]
        fn nullspace_annihilates(m in arb_matrix(5)) {
            match m.nullspace_vector() {
                Some(p) => {
                    prop_assert!(p.iter().any(|v| !v.is_zero()));
                    let z = m.transpose().mul_vec(&p);
                    prop_assert!(z.iter().all(Rational::is_zero));
                    prop_assert!(m.rank() < m.rows());
                }
                None => prop_assert_eq!(m.rank(), m.rows()),
            }
        }
    }
}
