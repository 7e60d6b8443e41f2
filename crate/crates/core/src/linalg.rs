//! Dense exact matrices over the integers and the rationals.
//!
//! Matrices act on column vectors. Integer matrices support fraction-free
//! determinants, Hermite and Smith normal forms with transforms, integer
//! kernels, characteristic polynomials and multiplicative orders modulo `k`.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{ext_gcd, floor_div, trial_factor};
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type ZMatrix = Matrix<BigInt>;
pub type QMatrix = Matrix<BigRational>;

impl<T: fmt::Display> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.data[i * self.cols + j])?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Clone> Matrix<T> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Builds a matrix from rows. `cols` is needed for the zero-row case.
    pub fn from_rows_with_cols(rows: Vec<Vec<T>>, cols: usize) -> Result<Self> {
        let r = rows.len();
        let mut data = Vec::with_capacity(r * cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::Dimension(format!(
                    "ragged rows: expected {} columns, got {}",
                    cols,
                    row.len()
                )));
            }
            data.extend(row);
        }
        Ok(Matrix { rows: r, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        Self::from_rows_with_cols(rows, cols)
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn map<U: Clone>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// Sub-matrix with the given rows and columns.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Matrix::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])].clone())
    }

    /// Block-diagonal sum.
    pub fn block_diag(&self, other: &Self) -> Self
    where
        T: Zero,
    {
        let (r, c) = (self.rows + other.rows, self.cols + other.cols);
        Matrix::from_fn(r, c, |i, j| {
            if i < self.rows && j < self.cols {
                self[(i, j)].clone()
            } else if i >= self.rows && j >= self.cols {
                other[(i - self.rows, j - self.cols)].clone()
            } else {
                T::zero()
            }
        })
    }

    /// Vertical concatenation.
    pub fn stack(&self, other: &Self) -> Result<Self> {
        if self.cols != other.cols && self.rows > 0 && other.rows > 0 {
            return Err(Error::Dimension("stack: column counts differ".into()));
        }
        let cols = if self.rows > 0 { self.cols } else { other.cols };
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Ok(Matrix {
            rows: self.rows + other.rows,
            cols,
            data,
        })
    }
}

impl<T: Clone + Zero> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }
}

impl<T: Clone + Zero + One> Matrix<T> {
    pub fn identity(n: usize) -> Self {
        Matrix::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn is_identity(&self) -> bool
    where
        T: PartialEq,
    {
        self.is_square()
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    let x = &self[(i, j)];
                    if i == j {
                        x.is_one()
                    } else {
                        x.is_zero()
                    }
                })
            })
    }

    pub fn diagonal(entries: &[T]) -> Self {
        let n = entries.len();
        Matrix::from_fn(n, n, |i, j| if i == j { entries[i].clone() } else { T::zero() })
    }
}

impl<T> Matrix<T>
where
    T: Clone + Zero + AddAssign,
    for<'a> &'a T: Mul<&'a T, Output = T>,
{
    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = &rhs[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "mul_vec dimension mismatch");
        (0..self.rows)
            .map(|i| {
                let mut acc = T::zero();
                for (a, b) in self.row(i).iter().zip(v) {
                    if !a.is_zero() && !b.is_zero() {
                        acc += a * b;
                    }
                }
                acc
            })
            .collect()
    }

    /// `x^T M y` for a square matrix.
    pub fn bilinear(&self, x: &[T], y: &[T]) -> T {
        let my = self.mul_vec(y);
        let mut acc = T::zero();
        for (a, b) in x.iter().zip(&my) {
            if !a.is_zero() && !b.is_zero() {
                acc += a * b;
            }
        }
        acc
    }

    pub fn scale(&self, c: &T) -> Self {
        self.map(|x| x * c)
    }

    pub fn pow(&self, mut e: u64) -> Self
    where
        T: One,
    {
        assert!(self.is_square());
        let mut acc = Matrix::identity(self.rows);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.matmul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.matmul(&base);
            }
        }
        acc
    }
}

macro_rules! impl_matmul {
    ($t:ty) => {
        impl<'a> Mul<&'a Matrix<$t>> for &'a Matrix<$t> {
            type Output = Matrix<$t>;
            fn mul(self, rhs: &'a Matrix<$t>) -> Matrix<$t> {
                self.matmul(rhs)
            }
        }
    };
}

impl_matmul!(BigInt);
impl_matmul!(BigRational);
impl_matmul!(i64);

impl<'a, T> Add<&'a Matrix<T>> for &'a Matrix<T>
where
    T: Clone,
    for<'b> &'b T: Add<&'b T, Output = T>,
{
    type Output = Matrix<T>;
    fn add(self, rhs: &'a Matrix<T>) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<'a, T> Sub<&'a Matrix<T>> for &'a Matrix<T>
where
    T: Clone,
    for<'b> &'b T: Sub<&'b T, Output = T>,
{
    type Output = Matrix<T>;
    fn sub(self, rhs: &'a Matrix<T>) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl<T: Clone + Neg<Output = T>> Neg for &Matrix<T> {
    type Output = Matrix<T>;
    fn neg(self) -> Matrix<T> {
        self.map(|x| -x.clone())
    }
}

pub fn rat(n: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(n.into())
}

pub fn zmat(rows: &[&[i64]]) -> ZMatrix {
    let cols = rows.first().map_or(0, |r| r.len());
    Matrix::from_rows_with_cols(
        rows.iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect(),
        cols,
    )
    .expect("ragged literal matrix")
}

// ---------------------------------------------------------------------------
// Integer matrices
// ---------------------------------------------------------------------------

/// Result of a Smith normal form computation: `u * a * v = diag(d)`.
#[derive(Debug, Clone)]
pub struct Snf {
    pub diag: Vec<BigInt>,
    pub u: ZMatrix,
    pub v: ZMatrix,
}

/// Result of a row Hermite normal form computation: `u * a = h`.
#[derive(Debug, Clone)]
pub struct Hnf {
    pub h: ZMatrix,
    pub u: ZMatrix,
    pub rank: usize,
}

impl ZMatrix {
    pub fn to_rational(&self) -> QMatrix {
        self.map(|x| BigRational::from_integer(x.clone()))
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    /// Determinant by Bareiss fraction-free elimination.
    pub fn det(&self) -> BigInt {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[(k, k)].is_zero() {
                let Some(p) = (k + 1..n).find(|&i| !a[(i, k)].is_zero()) else {
                    return BigInt::zero();
                };
                a.swap_rows(k, p);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &a[(i, j)] * &a[(k, k)] - &a[(i, k)] * &a[(k, j)];
                    a[(i, j)] = v / &prev;
                }
            }
            prev = a[(k, k)].clone();
        }
        sign * &a[(n - 1, n - 1)]
    }

    /// Row Hermite normal form with unimodular transform.
    ///
    /// Pivots are positive; entries above a pivot are reduced into
    /// `[0, pivot)`. Zero rows are moved to the bottom.
    pub fn hnf_with_transform(&self) -> Hnf {
        let (m, n) = (self.rows, self.cols);
        let mut a = self.clone();
        let mut u = ZMatrix::identity(m);
        let mut piv = 0;
        for col in 0..n {
            if piv == m {
                break;
            }
            for r in piv + 1..m {
                if a[(r, col)].is_zero() {
                    continue;
                }
                if a[(piv, col)].is_zero() {
                    a.swap_rows(piv, r);
                    u.swap_rows(piv, r);
                    continue;
                }
                let (g, x, y) = ext_gcd(&a[(piv, col)], &a[(r, col)]);
                let p = &a[(piv, col)] / &g;
                let q = &a[(r, col)] / &g;
                combine_rows(&mut a, piv, r, &x, &y, &q, &p);
                combine_rows(&mut u, piv, r, &x, &y, &q, &p);
            }
            if a[(piv, col)].is_zero() {
                continue;
            }
            if a[(piv, col)].is_negative() {
                negate_row(&mut a, piv);
                negate_row(&mut u, piv);
            }
            for r in 0..piv {
                let q = floor_div(&a[(r, col)], &a[(piv, col)]);
                if !q.is_zero() {
                    sub_row_multiple(&mut a, r, piv, &q);
                    sub_row_multiple(&mut u, r, piv, &q);
                }
            }
            piv += 1;
        }
        Hnf { h: a, u, rank: piv }
    }

    /// Row Hermite normal form with zero rows removed: a canonical basis of
    /// the row module.
    pub fn hnf(&self) -> ZMatrix {
        let Hnf { h, rank, .. } = self.hnf_with_transform();
        let rows: Vec<usize> = (0..rank).collect();
        let cols: Vec<usize> = (0..self.cols).collect();
        h.select(&rows, &cols)
    }

    /// Z-basis (as rows) of the right kernel `{x in Z^n : A x = 0}`.
    /// The kernel of an integer matrix is automatically saturated.
    pub fn integer_kernel(&self) -> ZMatrix {
        let Hnf { u, rank, .. } = self.transpose().hnf_with_transform();
        let n = self.cols;
        let rows: Vec<usize> = (rank..n).collect();
        let cols: Vec<usize> = (0..n).collect();
        u.select(&rows, &cols)
    }

    /// Smith normal form `u * self * v = diag(d)` with `d_i | d_{i+1}` and
    /// `d_i >= 0`.
    pub fn snf(&self) -> Snf {
        let (m, n) = (self.rows, self.cols);
        let mut a = self.clone();
        let mut u = ZMatrix::identity(m);
        let mut v = ZMatrix::identity(n);
        let mut t = 0;
        while t < m.min(n) {
            // smallest nonzero entry of the trailing block becomes the pivot
            let mut best: Option<(usize, usize)> = None;
            for i in t..m {
                for j in t..n {
                    if !a[(i, j)].is_zero() && best.is_none_or(|(bi, bj)| a[(i, j)].abs() < a[(bi, bj)].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((bi, bj)) = best else { break };
            a.swap_rows(t, bi);
            u.swap_rows(t, bi);
            a.swap_cols(t, bj);
            v.swap_cols(t, bj);
            loop {
                // full pass with nearest quotients, then move the smallest
                // remainder of row and column t into the pivot position
                for i in t + 1..m {
                    if !a[(i, t)].is_zero() {
                        let q = nearest_div(&a[(i, t)], &a[(t, t)]);
                        sub_row_multiple(&mut a, i, t, &q);
                        sub_row_multiple(&mut u, i, t, &q);
                    }
                }
                for j in t + 1..n {
                    if !a[(t, j)].is_zero() {
                        let q = nearest_div(&a[(t, j)], &a[(t, t)]);
                        sub_col_multiple(&mut a, j, t, &q);
                        sub_col_multiple(&mut v, j, t, &q);
                    }
                }
                let row_min = (t + 1..m)
                    .filter(|&i| !a[(i, t)].is_zero())
                    .min_by(|&x, &y| a[(x, t)].abs().cmp(&a[(y, t)].abs()));
                let col_min = (t + 1..n)
                    .filter(|&j| !a[(t, j)].is_zero())
                    .min_by(|&x, &y| a[(t, x)].abs().cmp(&a[(t, y)].abs()));
                match (row_min, col_min) {
                    (Some(i), Some(j)) if a[(t, j)].abs() < a[(i, t)].abs() => {
                        a.swap_cols(t, j);
                        v.swap_cols(t, j);
                        continue;
                    }
                    (Some(i), _) => {
                        a.swap_rows(t, i);
                        u.swap_rows(t, i);
                        continue;
                    }
                    (None, Some(j)) => {
                        a.swap_cols(t, j);
                        v.swap_cols(t, j);
                        continue;
                    }
                    (None, None) => {}
                }
                // divisibility condition on the trailing block
                let piv = a[(t, t)].clone();
                let bad = (t + 1..m)
                    .flat_map(|i| (t + 1..n).map(move |j| (i, j)))
                    .find(|&(i, j)| !(&a[(i, j)] % &piv).is_zero());
                match bad {
                    Some((i, _)) => {
                        add_row(&mut a, t, i);
                        add_row(&mut u, t, i);
                    }
                    None => break,
                }
            }
            if a[(t, t)].is_negative() {
                negate_row(&mut a, t);
                negate_row(&mut u, t);
            }
            t += 1;
        }
        let diag = (0..m.min(n)).map(|i| a[(i, i)].clone()).collect();
        Snf { diag, u, v }
    }

    /// Characteristic polynomial `det(x I - A)`, ascending coefficients, by
    /// the Faddeev-LeVerrier recursion (all divisions are exact).
    pub fn charpoly(&self) -> Vec<BigInt> {
        assert!(self.is_square());
        let n = self.rows;
        let mut coeffs = vec![BigInt::zero(); n + 1];
        coeffs[n] = BigInt::one();
        let mut m = ZMatrix::zeros(n, n);
        for k in 1..=n {
            let mut next = self * &m;
            for i in 0..n {
                next[(i, i)] += &coeffs[n - k + 1];
            }
            m = next;
            let am = self * &m;
            let tr: BigInt = (0..n).map(|i| am[(i, i)].clone()).sum();
            coeffs[n - k] = -(tr / BigInt::from(k));
        }
        coeffs
    }

    pub fn to_i64(&self) -> Option<Matrix<i64>> {
        let data: Option<Vec<i64>> = self.data.iter().map(|x| x.to_i64()).collect();
        data.map(|data| Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// Reduction modulo `k`, entries in `[0, k)`.
    pub fn reduce_mod(&self, k: &BigInt) -> ZMatrix {
        self.map(|x| x.mod_floor(k))
    }
}

fn combine_rows(a: &mut ZMatrix, r1: usize, r2: usize, x: &BigInt, y: &BigInt, q: &BigInt, p: &BigInt) {
    // [r1; r2] <- [[x, y], [-q, p]] [r1; r2], a unimodular step
    for j in 0..a.cols {
        let a1 = a[(r1, j)].clone();
        let a2 = a[(r2, j)].clone();
        a[(r1, j)] = x * &a1 + y * &a2;
        a[(r2, j)] = p * &a2 - q * &a1;
    }
}

/// Quotient rounded to the nearest integer, so that the remainder has
/// absolute value at most `|b| / 2`.
fn nearest_div(a: &BigInt, b: &BigInt) -> BigInt {
    let two = BigInt::from(2);
    let m = b.abs();
    floor_div(&(a * &two + &m), &(&m * &two)) * b.signum()
}

fn negate_row(a: &mut ZMatrix, r: usize) {
    for j in 0..a.cols {
        let v = -&a[(r, j)];
        a[(r, j)] = v;
    }
}

fn sub_row_multiple(a: &mut ZMatrix, target: usize, src: usize, q: &BigInt) {
    for j in 0..a.cols {
        if !a[(src, j)].is_zero() {
            let v = q * &a[(src, j)];
            a[(target, j)] -= v;
        }
    }
}

fn add_row(a: &mut ZMatrix, target: usize, src: usize) {
    for j in 0..a.cols {
        let v = a[(src, j)].clone();
        a[(target, j)] += v;
    }
}

fn sub_col_multiple(a: &mut ZMatrix, target: usize, src: usize, q: &BigInt) {
    for i in 0..a.rows {
        if !a[(i, src)].is_zero() {
            let v = q * &a[(i, src)];
            a[(i, target)] -= v;
        }
    }
}

// ---------------------------------------------------------------------------
// Rational matrices
// ---------------------------------------------------------------------------

impl QMatrix {
    pub fn is_integral(&self) -> bool {
        self.data.iter().all(|x| x.is_integer())
    }

    pub fn to_integer(&self) -> Option<ZMatrix> {
        if self.is_integral() {
            Some(self.map(|x| x.to_integer()))
        } else {
            None
        }
    }

    /// Least common multiple of the entry denominators.
    pub fn denominator(&self) -> BigInt {
        self.data.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
    }

    /// Splits `self = num / den` with `num` integral.
    pub fn clear_denominators(&self) -> (ZMatrix, BigInt) {
        let den = self.denominator();
        let num = self.map(|x| (x * BigRational::from_integer(den.clone())).to_integer());
        (num, den)
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    /// Reduced row echelon form; returns the pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let (m, n) = (self.rows, self.cols);
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..n {
            if r == m {
                break;
            }
            let Some(p) = (r..m).find(|&i| !self[(i, c)].is_zero()) else {
                continue;
            };
            self.swap_rows(r, p);
            let inv = self[(r, c)].recip();
            for j in c..n {
                let v = &self[(r, j)] * &inv;
                self[(r, j)] = v;
            }
            for i in 0..m {
                if i != r && !self[(i, c)].is_zero() {
                    let f = self[(i, c)].clone();
                    for j in c..n {
                        if !self[(r, j)].is_zero() {
                            let v = &f * &self[(r, j)];
                            self[(i, j)] -= v;
                        }
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    pub fn det(&self) -> BigRational {
        let (num, den) = self.clear_denominators();
        BigRational::new(num.det(), den.pow(self.rows as u32))
    }

    pub fn inverse(&self) -> Option<QMatrix> {
        assert!(self.is_square());
        let n = self.rows;
        let mut aug = QMatrix::from_fn(n, 2 * n, |i, j| {
            if j < n {
                self[(i, j)].clone()
            } else if j - n == i {
                BigRational::one()
            } else {
                BigRational::zero()
            }
        });
        let piv = aug.rref();
        if piv.len() < n || piv[n - 1] >= n {
            return None;
        }
        let rows: Vec<usize> = (0..n).collect();
        let cols: Vec<usize> = (n..2 * n).collect();
        Some(aug.select(&rows, &cols))
    }

    /// Basis (as rows) of the right null space over Q.
    pub fn nullspace(&self) -> Vec<Vec<BigRational>> {
        let n = self.cols;
        let mut r = self.clone();
        let piv = r.rref();
        let free: Vec<usize> = (0..n).filter(|c| !piv.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![BigRational::zero(); n];
                v[f] = BigRational::one();
                for (i, &pc) in piv.iter().enumerate() {
                    v[pc] = -r[(i, f)].clone();
                }
                v
            })
            .collect()
    }

    /// Solves `self * X = rhs` for a matrix of full column rank; `None` if
    /// the system is inconsistent.
    pub fn solve(&self, rhs: &QMatrix) -> Option<QMatrix> {
        assert_eq!(self.rows, rhs.rows);
        let (m, n, k) = (self.rows, self.cols, rhs.cols);
        let mut aug = QMatrix::from_fn(m, n + k, |i, j| {
            if j < n {
                self[(i, j)].clone()
            } else {
                rhs[(i, j - n)].clone()
            }
        });
        let piv = aug.rref();
        if piv.iter().any(|&c| c >= n) || piv.len() < n {
            return None;
        }
        Some(QMatrix::from_fn(n, k, |i, j| aug[(i, n + j)].clone()))
    }

    /// Characteristic polynomial over Q, ascending coefficients.
    pub fn charpoly(&self) -> Vec<BigRational> {
        let (num, den) = self.clear_denominators();
        // det(xI - N/d) = d^{-n} det(d x I - N)
        let cp = num.charpoly();
        let n = self.rows;
        cp.into_iter()
            .enumerate()
            .map(|(i, c)| BigRational::new(c * den.pow(i as u32), den.pow(n as u32)))
            .collect()
    }
}

/// Canonical Z-basis (rows) of the module generated by rational vectors.
pub fn rational_span_basis(gens: &QMatrix) -> QMatrix {
    let (num, den) = gens.clear_denominators();
    let h = num.hnf();
    let d = BigRational::from_integer(den);
    h.map(|x| BigRational::from_integer(x.clone()) / &d)
}

// ---------------------------------------------------------------------------
// Matrices modulo k
// ---------------------------------------------------------------------------

struct ModMat {
    n: usize,
    k: u128,
    a: Vec<u128>,
}

impl ModMat {
    fn new(m: &ZMatrix, k: u64) -> Self {
        let kb = BigInt::from(k);
        ModMat {
            n: m.rows,
            k: k as u128,
            a: m.data.iter().map(|x| x.mod_floor(&kb).to_u128().unwrap()).collect(),
        }
    }

    fn identity(n: usize, k: u128) -> Self {
        let mut a = vec![0; n * n];
        for i in 0..n {
            a[i * n + i] = 1 % k;
        }
        ModMat { n, k, a }
    }

    fn mul(&self, o: &ModMat) -> ModMat {
        let n = self.n;
        let mut out = vec![0u128; n * n];
        for i in 0..n {
            for l in 0..n {
                let x = self.a[i * n + l];
                if x == 0 {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] = (out[i * n + j] + x * o.a[l * n + j]) % self.k;
                }
            }
        }
        ModMat { n, k: self.k, a: out }
    }

    fn mul_vec(&self, v: &[u128]) -> Vec<u128> {
        let n = self.n;
        (0..n)
            .map(|i| {
                let mut acc = 0u128;
                for j in 0..n {
                    acc = (acc + self.a[i * n + j] * v[j]) % self.k;
                }
                acc
            })
            .collect()
    }

    fn pow(&self, e: &BigInt) -> ModMat {
        let mut acc = ModMat::identity(self.n, self.k);
        let bits = e.bits();
        for i in (0..bits).rev() {
            acc = acc.mul(&acc);
            if e.bit(i) {
                acc = acc.mul(self);
            }
        }
        acc
    }

    fn is_identity(&self) -> bool {
        let n = self.n;
        (0..n).all(|i| (0..n).all(|j| self.a[i * n + j] == if i == j { 1 % self.k } else { 0 }))
    }
}

/// Budget (in scalar multiply-adds) for the orbit-period phase of
/// [`order_mod`] before falling back to the group-exponent bound.
const ORDER_BUDGET: u64 = 400_000_000;

/// Multiplicative order of a square integer matrix in `GL_n(Z/k)`.
///
/// The order is assembled exactly from the periods of the standard basis
/// vectors. If those periods are too long for the iteration budget, a
/// proven multiple of the order (the exponent bound
/// `lcm_{j<=n}(q^j - 1) * q^(c+e-1)` for every `q^e || k`) is refined by the
/// prime factors found with trial division; that fallback is a multiple of the
/// true order, not necessarily minimal.
pub fn order_mod(m: &ZMatrix, k: &BigInt) -> Result<BigInt> {
    assert!(m.is_square());
    if k.is_one() || m.rows == 0 {
        return Ok(BigInt::one());
    }
    let kk = k
        .to_u64()
        .filter(|&v| v < (1u64 << 62))
        .ok_or_else(|| Error::ModulusTooLarge(k.to_string()))?;
    if !m.det().gcd(k).is_one() {
        return Err(Error::Precondition(format!("matrix is not invertible modulo {k}")));
    }
    let n = m.rows;
    let a = ModMat::new(m, kk);
    let mut order = BigInt::one();
    let mut b = ModMat::new(m, kk);
    let mut spent: u64 = 0;
    for i in 0..n {
        let mut e = vec![0u128; n];
        e[i] = 1;
        let mut w = b.mul_vec(&e);
        let mut period: u64 = 1;
        while w != e {
            w = b.mul_vec(&w);
            period += 1;
            spent += (n * n) as u64;
            if spent > ORDER_BUDGET {
                return order_mod_by_exponent_bound(&a, k);
            }
        }
        if period > 1 {
            order *= period;
            b = a.pow(&order);
        }
    }
    debug_assert!(a.pow(&order).is_identity());
    Ok(order)
}

fn order_mod_by_exponent_bound(a: &ModMat, k: &BigInt) -> Result<BigInt> {
    let n = a.n;
    let (kf, rest) = trial_factor(k, 10_000_000);
    if !rest.is_one() {
        return Err(Error::SearchExhausted(format!("could not factor modulus {k}")));
    }
    let mut bound = BigInt::one();
    for (q, e) in &kf {
        let mut l = BigInt::one();
        for j in 1..=n as u32 {
            l = l.lcm(&(q.pow(j) - 1u32));
        }
        let mut c = 0u32;
        while q.pow(c) < BigInt::from(n) {
            c += 1;
        }
        l *= q.pow(c + e - 1);
        bound = bound.lcm(&l);
    }
    if !a.pow(&bound).is_identity() {
        return Err(Error::Precondition("exponent bound violated".into()));
    }
    let (factors, _) = trial_factor(&bound, 1_000_000);
    let mut order = bound;
    for (p, _) in factors {
        while (&order % &p).is_zero() {
            let cand = &order / &p;
            if a.pow(&cand).is_identity() {
                order = cand;
            } else {
                break;
            }
        }
    }
    Ok(order)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(rows: &[&[i64]]) -> ZMatrix {
        zmat(rows)
    }

    #[test]
    fn bareiss_determinants() {
        assert_eq!(z(&[&[0, 1], &[1, 0]]).det(), BigInt::from(-1));
        assert_eq!(z(&[&[2, 3], &[3, 2]]).det(), BigInt::from(-5));
        assert_eq!(z(&[&[0, 0, 1], &[0, 1, 0], &[1, 0, 0]]).det(), BigInt::from(-1));
        assert_eq!(z(&[&[1, 2], &[2, 4]]).det(), BigInt::zero());
    }

    #[test]
    fn smith_form_of_scaled_form() {
        let a = z(&[&[22, 33], &[33, 22]]);
        let s = a.snf();
        assert_eq!(s.diag, vec![BigInt::from(11), BigInt::from(55)]);
        let d = &(&s.u * &a) * &s.v;
        assert_eq!(d, ZMatrix::diagonal(&s.diag));
        assert!(s.u.det().abs().is_one() && s.v.det().abs().is_one());
    }

    #[test]
    fn hnf_and_kernel() {
        let a = z(&[&[2, 4, 6], &[1, 2, 3]]);
        let k = a.integer_kernel();
        assert_eq!(k.nrows(), 2);
        for i in 0..2 {
            assert!(a.mul_vec(k.row(i)).iter().all(|x| x.is_zero()));
        }
        let h = z(&[&[4, 6], &[2, 4]]).hnf();
        assert_eq!(h, z(&[&[2, 0], &[0, 2]]));
    }

    #[test]
    fn charpoly_of_companion() {
        // companion of x^2 - 3x + 1
        let c = z(&[&[0, -1], &[1, 3]]);
        assert_eq!(c.charpoly(), vec![BigInt::from(1), BigInt::from(-3), BigInt::from(1)]);
    }

    #[test]
    fn rational_inverse_and_solve() {
        let g = z(&[&[-2]]).to_rational();
        let inv = g.inverse().unwrap();
        assert_eq!(inv[(0, 0)], BigRational::new((-1).into(), 2.into()));
        let a = z(&[&[1, 0], &[0, 1], &[1, 1]]).to_rational();
        let b = z(&[&[2], &[3], &[5]]).to_rational();
        let x = a.solve(&b).unwrap();
        assert_eq!(x, z(&[&[2], &[3]]).to_rational());
        let bad = z(&[&[2], &[3], &[6]]).to_rational();
        assert!(a.solve(&bad).is_none());
    }

    #[test]
    fn modular_order() {
        let c = z(&[&[0, -1], &[1, 3]]);
        // [[0,1],[1,1]] mod 2 has order 3
        assert_eq!(order_mod(&c, &BigInt::from(2)).unwrap(), BigInt::from(3));
        let k = BigInt::from(11);
        let o = order_mod(&c, &k).unwrap();
        let fallback = order_mod_by_exponent_bound(&ModMat::new(&c, 11), &k).unwrap();
        assert_eq!(o, fallback);
        assert!(ModMat::new(&c, 11).pow(&o).is_identity());
    }
}
