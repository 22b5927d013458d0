//! Small dense matrices over an exact ring.
//!
//! The entry type is generic so the same code serves boundary matrices over
//! `Q(i)` and graded-map blocks over the full coefficient ring; concrete
//! aliases live at the use sites. Dimensions here are tiny (complex
//! dimensions are single digits), so nothing is optimized.

use num_traits::{One, Zero};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Ring bound for matrix entries, satisfied by both `GaussianRational` and
/// `Scalar` through their num-traits impls.
pub trait Ring:
    Clone
    + PartialEq
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
{
}

impl<T> Ring for T where
    T: Clone
        + PartialEq
        + Zero
        + One
        + Neg<Output = T>
        + Add<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
{
}

/// Row-major dense matrix. A `rows x cols` matrix maps column vectors of
/// length `cols` to column vectors of length `rows`.
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix<R> {
    rows: usize,
    cols: usize,
    data: Vec<R>,
}

impl<R: Ring> Matrix<R> {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: (0..rows * cols).map(|_| R::zero()).collect(),
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zero(n, n);
        for i in 0..n {
            m.set(i, i, R::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<R>>) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map(Vec::len).unwrap_or(0);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::ShapeMismatch("ragged rows".into()));
        }
        Ok(Matrix {
            rows: nrows,
            cols: ncols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &R {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: R) {
        self.data[r * self.cols + c] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} + {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| -v.clone()).collect(),
        }
    }

    pub fn scale(&self, s: &R) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v.clone() * s.clone()).collect(),
        }
    }

    /// `self * other` in the linear-map sense (`other` applied first).
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out: Matrix<R> = Matrix::zero(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let b = other.get(k, c);
                    if b.is_zero() {
                        continue;
                    }
                    let cur = out.get(r, c).clone();
                    out.set(r, c, cur + a.clone() * b.clone());
                }
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> Self {
        let mut out = Matrix::zero(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c).clone());
            }
        }
        out
    }

    pub fn map<S: Ring>(&self, f: impl Fn(&R) -> S) -> Matrix<S> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl<R: Ring + Div<Output = R>> Matrix<R> {
    /// Exact Gauss-Jordan inverse; `None` for singular matrices. Requires a
    /// field entry type.
    pub fn inverse(&self) -> Option<Matrix<R>> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv: Matrix<R> = Matrix::identity(n);
        for col in 0..n {
            let pivot = (col..n).find(|&r| !a.get(r, col).is_zero())?;
            if pivot != col {
                for c in 0..n {
                    let tmp = a.get(col, c).clone();
                    a.set(col, c, a.get(pivot, c).clone());
                    a.set(pivot, c, tmp);
                    let tmp = inv.get(col, c).clone();
                    inv.set(col, c, inv.get(pivot, c).clone());
                    inv.set(pivot, c, tmp);
                }
            }
            let p = a.get(col, col).clone();
            for c in 0..n {
                a.set(col, c, a.get(col, c).clone() / p.clone());
                inv.set(col, c, inv.get(col, c).clone() / p.clone());
            }
            for r in 0..n {
                if r == col || a.get(r, col).is_zero() {
                    continue;
                }
                let factor = a.get(r, col).clone();
                for c in 0..n {
                    let v = a.get(r, c).clone() - factor.clone() * a.get(col, c).clone();
                    a.set(r, c, v);
                    let v = inv.get(r, c).clone() - factor.clone() * inv.get(col, c).clone();
                    inv.set(r, c, v);
                }
            }
        }
        Some(inv)
    }
}

impl<R> Matrix<R> {
    /// Bracketed row-major text: `[a, b; c, d]`, `[]` for empty shapes.
    /// Entries are rendered by the caller so each ring uses its canonical
    /// text form.
    pub fn render_with(&self, f: impl Fn(&R) -> String) -> String {
        if self.rows == 0 || self.cols == 0 {
            return "[]".to_string();
        }
        let rows: Vec<String> = (0..self.rows)
            .map(|r| {
                (0..self.cols)
                    .map(|c| f(&self.data[r * self.cols + c]))
                    .collect::<Vec<_>>()
                    .join(", ")
            })
            .collect();
        format!("[{}]", rows.join("; "))
    }
}

impl Matrix<crate::scalar::GaussianRational> {
    pub fn render(&self) -> String {
        self.render_with(crate::scalar::render_gaussian)
    }
}

impl Matrix<crate::scalar::Scalar> {
    pub fn render(&self) -> String {
        self.render_with(|s| s.to_string())
    }
}

impl<R: fmt::Debug> fmt::Debug for Matrix<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{} {:?}", self.rows, self.cols, self.data)
    }
}
