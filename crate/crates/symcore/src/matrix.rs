//! Dense matrices of expressions.

use crate::error::{Result, SymError};
use crate::expr::Expr;
use std::fmt;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Expr>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        Matrix {
            rows,
            cols,
            data: vec![Expr::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Matrix {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Expr::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> Expr) -> Matrix {
        let mut f = f;
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn try_from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Result<Expr>,
    ) -> Result<Matrix> {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j)?);
            }
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<Expr>>) -> Matrix {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged matrix rows");
        Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> Vec<Expr> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn col(&self, j: usize) -> Vec<Expr> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Expr>> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn try_map(&self, f: impl Fn(&Expr) -> Result<Expr>) -> Result<Matrix> {
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect::<Result<_>>()?,
        })
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn mul(&self, o: &Matrix) -> Matrix {
        assert_eq!(self.cols, o.rows, "matrix product dimension mismatch");
        Matrix::from_fn(self.rows, o.cols, |i, j| {
            let mut acc = Expr::zero();
            for k in 0..self.cols {
                let a = &self[(i, k)];
                let b = &o[(k, j)];
                if !a.is_zero() && !b.is_zero() {
                    acc = acc.add(&a.mul(b));
                }
            }
            acc
        })
    }

    pub fn mul_vec(&self, v: &[Expr]) -> Vec<Expr> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .filter(|&k| !self[(i, k)].is_zero() && !v[k].is_zero())
                    .map(|k| self[(i, k)].mul(&v[k]))
                    .sum()
            })
            .collect()
    }

    pub fn add(&self, o: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Matrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)].add(&o[(i, j)]))
    }

    pub fn sub(&self, o: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Matrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)].sub(&o[(i, j)]))
    }

    pub fn scale(&self, c: &Expr) -> Matrix {
        self.map(|e| e.mul(c))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|e| e.is_zero())
    }

    pub fn entries(&self) -> &[Expr] {
        &self.data
    }

    fn pivot_row(&self, col: usize, from: usize) -> Option<usize> {
        (from..self.rows)
            .filter(|&r| !self[(r, col)].is_zero())
            .min_by_key(|&r| self[(r, col)].size())
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn det(&self) -> Expr {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        match n {
            0 => return Expr::one(),
            1 => return self[(0, 0)].clone(),
            2 => {
                return self[(0, 0)]
                    .mul(&self[(1, 1)])
                    .sub(&self[(0, 1)].mul(&self[(1, 0)]))
            }
            3 => {
                let m = |i, j| &self[(i, j)];
                let t1 = m(0, 0).mul(&m(1, 1).mul(m(2, 2)).sub(&m(1, 2).mul(m(2, 1))));
                let t2 = m(0, 1).mul(&m(1, 0).mul(m(2, 2)).sub(&m(1, 2).mul(m(2, 0))));
                let t3 = m(0, 2).mul(&m(1, 0).mul(m(2, 1)).sub(&m(1, 1).mul(m(2, 0))));
                return t1.sub(&t2).add(&t3);
            }
            _ => {}
        }
        let mut a = self.clone();
        let mut det = Expr::one();
        for c in 0..n {
            let p = match a.pivot_row(c, c) {
                Some(p) => p,
                None => return Expr::zero(),
            };
            if p != c {
                a.swap_rows(p, c);
                det = det.neg();
            }
            let piv = a[(c, c)].clone();
            det = det.mul(&piv);
            let inv = piv.inv().expect("pivot is nonzero");
            for r in c + 1..n {
                let f = a[(r, c)].mul(&inv);
                if f.is_zero() {
                    continue;
                }
                for j in c..n {
                    let v = a[(r, j)].sub(&f.mul(&a[(c, j)]));
                    a[(r, j)] = v;
                }
            }
        }
        det
    }

    /// Solves `self * X = rhs` by Gauss-Jordan elimination.
    pub fn solve(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.rows != self.cols || rhs.rows != self.rows {
            return Err(SymError::Dimension(format!(
                "cannot solve {}x{} system with {}x{} right-hand side",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut b = rhs.clone();
        for c in 0..n {
            let p = a.pivot_row(c, c).ok_or(SymError::SingularMatrix)?;
            a.swap_rows(p, c);
            b.swap_rows(p, c);
            let inv = a[(c, c)].inv()?;
            for j in 0..n {
                a[(c, j)] = a[(c, j)].mul(&inv);
            }
            for j in 0..b.cols {
                b[(c, j)] = b[(c, j)].mul(&inv);
            }
            for r in 0..n {
                if r == c || a[(r, c)].is_zero() {
                    continue;
                }
                let f = a[(r, c)].clone();
                for j in 0..n {
                    let v = a[(r, j)].sub(&f.mul(&a[(c, j)]));
                    a[(r, j)] = v;
                }
                for j in 0..b.cols {
                    let v = b[(r, j)].sub(&f.mul(&b[(c, j)]));
                    b[(r, j)] = v;
                }
            }
        }
        Ok(b)
    }

    pub fn inverse(&self) -> Result<Matrix> {
        self.solve(&Matrix::identity(self.rows))
    }

    /// Submatrix with row `i` and column `j` removed.
    pub fn without(&self, i: usize, j: usize) -> Matrix {
        let rows: Vec<usize> = (0..self.rows).filter(|&r| r != i).collect();
        let cols: Vec<usize> = (0..self.cols).filter(|&c| c != j).collect();
        Matrix::from_fn(rows.len(), cols.len(), |a, b| self[(rows[a], cols[b])].clone())
    }

    /// Matrix of first minors: entry `(i, j)` is the determinant with row `i` and column `j` removed.
    pub fn first_minors(&self) -> Matrix {
        Matrix::from_fn(self.rows, self.cols, |i, j| self.without(i, j).det())
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = Expr;
    fn index(&self, (i, j): (usize, usize)) -> &Expr {
        assert!(i < self.rows && j < self.cols, "matrix index out of range");
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Expr {
        assert!(i < self.rows && j < self.cols, "matrix index out of range");
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[")?;
        for i in 0..self.rows {
            let r: Vec<String> = self.row(i).iter().map(|e| e.to_string()).collect();
            writeln!(f, "  [{}]", r.join(", "))?;
        }
        write!(f, "]")
    }
}
