//! Dense linear algebra over a prime field `F_p`.
//!
//! Everything here is exact. Matrices carry their field so that products,
//! eliminations and concatenations can check that both operands live in the
//! same field. Zero-dimension matrices are legal: restricted matrices become
//! empty under full-read or empty-read plans and every routine below handles
//! them without special casing at the call site.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("{0} is not a prime that fits in 32 bits")]
    NotPrime(u64),
    #[error("index {index} out of range for dimension {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("duplicate index {0} in selection")]
    DuplicateIndex(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("field mismatch: F_{0} vs F_{1}")]
    FieldMismatch(u32, u32),
    #[error("some column of the right-hand side lies outside the column space")]
    NoSolution,
}

pub type Result<T> = std::result::Result<T, LinalgError>;

/// The prime field `F_p` with `p < 2^32`.
///
/// Primality is checked once by trial division when the field is created.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeField {
    p: u32,
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self> {
        if p > u64::from(u32::MAX) || !is_prime(p) {
            return Err(LinalgError::NotPrime(p));
        }
        Ok(Self { p: p as u32 })
    }

    #[inline]
    pub fn modulus(&self) -> u32 {
        self.p
    }

    /// Reduces a signed integer into `[0, p)`.
    #[inline]
    pub fn reduce(&self, v: i64) -> u32 {
        v.rem_euclid(i64::from(self.p)) as u32
    }

    /// Lifts a residue to its symmetric representative in `(-p/2, p/2]`.
    pub fn signed(&self, v: u32) -> i64 {
        let v = i64::from(v);
        let p = i64::from(self.p);
        if v > p / 2 {
            v - p
        } else {
            v
        }
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        ((u64::from(a) + u64::from(b)) % u64::from(self.p)) as u32
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        ((u64::from(a) + u64::from(self.p) - u64::from(b)) % u64::from(self.p)) as u32
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        self.sub(0, a)
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        ((u64::from(a) * u64::from(b)) % u64::from(self.p)) as u32
    }

    pub fn pow(&self, mut base: u32, mut exp: u64) -> u32 {
        let mut acc = 1 % self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via the extended Euclidean algorithm.
    pub fn inv(&self, a: u32) -> Result<u32> {
        let a = a % self.p;
        if a == 0 {
            return Err(LinalgError::ZeroInverse);
        }
        let (mut r0, mut r1) = (i64::from(self.p), i64::from(a));
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        debug_assert_eq!(r0, 1);
        Ok(self.reduce(t0))
    }
}

/// A dense row-major matrix over a [`PrimeField`].
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    field: PrimeField,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "Matrix {}x{} over F_{}",
            self.rows, self.cols, self.field.p
        )?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        Ok(())
    }
}

/// Result of reducing a matrix to reduced row-echelon form.
#[derive(Debug, Clone)]
pub struct Echelon {
    pub reduced: Matrix,
    /// Pivot column of each nonzero row, in row order.
    pub pivots: Vec<usize>,
}

impl Echelon {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

impl Matrix {
    pub fn zeros(field: PrimeField, rows: usize, cols: usize) -> Self {
        Self {
            field,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: PrimeField, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1 % field.p;
        }
        m
    }

    /// Builds a matrix from row-major residues. Entries are reduced mod `p`.
    pub fn from_vec(field: PrimeField, rows: usize, cols: usize, data: Vec<u32>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        let data = data.into_iter().map(|v| v % field.p).collect();
        Ok(Self {
            field,
            rows,
            cols,
            data,
        })
    }

    /// Builds a matrix from signed integer rows, reducing each entry into `[0, p)`.
    ///
    /// An empty slice yields a `0x0` matrix; use [`Matrix::zeros`] for `0xN`.
    pub fn from_signed_rows(field: PrimeField, rows: &[Vec<i64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(LinalgError::DimensionMismatch(format!(
                    "row {i} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            data.extend(row.iter().map(|&v| field.reduce(v)));
        }
        Ok(Self {
            field,
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn from_fn(
        field: PrimeField,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> u32,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c) % field.p);
            }
        }
        Self {
            field,
            rows,
            cols,
            data,
        }
    }

    /// A `1 x n` matrix holding `v`.
    pub fn row_vector(field: PrimeField, v: &[u32]) -> Self {
        Self::from_fn(field, 1, v.len(), |_, c| v[c])
    }

    #[inline]
    pub fn field(&self) -> PrimeField {
        self.field
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u32) {
        self.data[r * self.cols + c] = v % self.field.p;
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn to_signed_rows(&self) -> Vec<Vec<i64>> {
        (0..self.rows)
            .map(|r| self.row(r).iter().map(|&v| self.field.signed(v)).collect())
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.field, self.cols, self.rows, |r, c| self.get(c, r))
    }

    fn check_field(&self, other: &Matrix) -> Result<()> {
        if self.field != other.field {
            return Err(LinalgError::FieldMismatch(self.field.p, other.field.p));
        }
        Ok(())
    }

    pub fn mul(&self, rhs: &Matrix) -> Result<Matrix> {
        self.check_field(rhs)?;
        if self.cols != rhs.rows {
            return Err(LinalgError::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let p = u64::from(self.field.p);
        let mut out = Matrix::zeros(self.field, self.rows, rhs.cols);
        let mut acc = vec![0u64; rhs.cols];
        for r in 0..self.rows {
            acc.iter_mut().for_each(|a| *a = 0);
            for k in 0..self.cols {
                let a = u64::from(self.get(r, k));
                if a == 0 {
                    continue;
                }
                for (c, slot) in acc.iter_mut().enumerate() {
                    *slot = (*slot + a * u64::from(rhs.get(k, c))) % p;
                }
            }
            for (c, v) in acc.iter().enumerate() {
                out.data[r * rhs.cols + c] = *v as u32;
            }
        }
        Ok(out)
    }

    pub fn add(&self, rhs: &Matrix) -> Result<Matrix> {
        self.check_field(rhs)?;
        if self.shape() != rhs.shape() {
            return Err(LinalgError::DimensionMismatch(format!(
                "cannot add {:?} and {:?}",
                self.shape(),
                rhs.shape()
            )));
        }
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(&a, &b)| self.field.add(a, b))
            .collect();
        Ok(Matrix {
            field: self.field,
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// `M[rows; cols]`, preserving the order of the given index lists.
    pub fn submatrix(&self, row_indices: &[usize], col_indices: &[usize]) -> Result<Matrix> {
        check_selection(row_indices, self.rows)?;
        check_selection(col_indices, self.cols)?;
        Ok(Matrix::from_fn(
            self.field,
            row_indices.len(),
            col_indices.len(),
            |r, c| self.get(row_indices[r], col_indices[c]),
        ))
    }

    pub fn select_rows(&self, row_indices: &[usize]) -> Result<Matrix> {
        let all: Vec<usize> = (0..self.cols).collect();
        self.submatrix(row_indices, &all)
    }

    pub fn select_cols(&self, col_indices: &[usize]) -> Result<Matrix> {
        let all: Vec<usize> = (0..self.rows).collect();
        self.submatrix(&all, col_indices)
    }

    /// `[self | rhs]`.
    pub fn hconcat(&self, rhs: &Matrix) -> Result<Matrix> {
        self.check_field(rhs)?;
        if self.rows != rhs.rows {
            return Err(LinalgError::DimensionMismatch(format!(
                "hconcat of {} rows with {} rows",
                self.rows, rhs.rows
            )));
        }
        let cols = self.cols + rhs.cols;
        Ok(Matrix::from_fn(self.field, self.rows, cols, |r, c| {
            if c < self.cols {
                self.get(r, c)
            } else {
                rhs.get(r, c - self.cols)
            }
        }))
    }

    /// `[self; rhs]`.
    pub fn vconcat(&self, rhs: &Matrix) -> Result<Matrix> {
        self.check_field(rhs)?;
        if self.cols != rhs.cols {
            return Err(LinalgError::DimensionMismatch(format!(
                "vconcat of {} cols with {} cols",
                self.cols, rhs.cols
            )));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&rhs.data);
        Ok(Matrix {
            field: self.field,
            rows: self.rows + rhs.rows,
            cols: self.cols,
            data,
        })
    }

    /// Block-diagonal matrix with the given blocks along the diagonal.
    pub fn block_diag(field: PrimeField, blocks: &[Matrix]) -> Result<Matrix> {
        let rows = blocks.iter().map(Matrix::rows).sum();
        let cols = blocks.iter().map(Matrix::cols).sum();
        let mut out = Matrix::zeros(field, rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            if b.field != field {
                return Err(LinalgError::FieldMismatch(field.p, b.field.p));
            }
            for r in 0..b.rows {
                for c in 0..b.cols {
                    out.data[(r0 + r) * cols + c0 + c] = b.get(r, c);
                }
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        Ok(out)
    }

    /// Reduced row-echelon form by Gauss-Jordan elimination.
    ///
    /// Pivots are only searched in the first `pivot_cols` columns; the
    /// remaining columns are carried along (augmented part).
    pub fn echelon_on(&self, pivot_cols: usize) -> Echelon {
        let f = self.field;
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..pivot_cols.min(self.cols) {
            if row == m.rows {
                break;
            }
            let Some(pr) = (row..m.rows).find(|&r| m.get(r, col) != 0) else {
                continue;
            };
            if pr != row {
                for c in 0..m.cols {
                    m.data.swap(pr * m.cols + c, row * m.cols + c);
                }
            }
            let inv = f.inv(m.get(row, col)).expect("pivot is nonzero");
            for c in col..m.cols {
                let v = m.get(row, c);
                m.data[row * m.cols + c] = f.mul(v, inv);
            }
            for r in 0..m.rows {
                if r == row {
                    continue;
                }
                let factor = m.get(r, col);
                if factor == 0 {
                    continue;
                }
                for c in col..m.cols {
                    let v = f.sub(m.get(r, c), f.mul(factor, m.get(row, c)));
                    m.data[r * m.cols + c] = v;
                }
            }
            pivots.push(col);
            row += 1;
        }
        Echelon { reduced: m, pivots }
    }

    pub fn echelon(&self) -> Echelon {
        self.echelon_on(self.cols)
    }

    pub fn rank(&self) -> usize {
        // eliminating along the shorter side is cheaper and gives the same rank
        if self.rows > self.cols {
            self.transpose().echelon().rank()
        } else {
            self.echelon().rank()
        }
    }

    pub fn has_full_column_rank(&self) -> bool {
        self.rank() == self.cols
    }

    /// Square with full rank. The `0x0` matrix counts as invertible.
    pub fn is_invertible(&self) -> bool {
        self.rows == self.cols && self.rank() == self.rows
    }

    pub fn inverse(&self) -> Option<Matrix> {
        if self.rows != self.cols {
            return None;
        }
        let id = Matrix::identity(self.field, self.rows);
        self.solve_right(&id).ok()
    }

    /// True iff every column of `b` lies in the column span of `self`.
    pub fn column_space_contains(&self, b: &Matrix) -> Result<bool> {
        self.check_field(b)?;
        if self.rows != b.rows {
            return Err(LinalgError::DimensionMismatch(format!(
                "column spaces of {}-row and {}-row matrices",
                self.rows, b.rows
            )));
        }
        Ok(self.rank() == self.hconcat(b)?.rank())
    }

    /// Solves `self * X = b`.
    ///
    /// Returns the canonical solution: reduce `[self | b]` to reduced
    /// row-echelon form pivoting only in `self`'s columns, then set every free
    /// variable to zero.
    pub fn solve_right(&self, b: &Matrix) -> Result<Matrix> {
        self.check_field(b)?;
        if self.rows != b.rows {
            return Err(LinalgError::DimensionMismatch(format!(
                "solve with {}-row system and {}-row right-hand side",
                self.rows, b.rows
            )));
        }
        let aug = self.hconcat(b)?;
        let ech = aug.echelon_on(self.cols);
        let red = &ech.reduced;
        let rank = ech.rank();
        for r in rank..red.rows {
            if (self.cols..red.cols).any(|c| red.get(r, c) != 0) {
                return Err(LinalgError::NoSolution);
            }
        }
        let mut x = Matrix::zeros(self.field, self.cols, b.cols);
        for (r, &pc) in ech.pivots.iter().enumerate() {
            for c in 0..b.cols {
                x.data[pc * b.cols + c] = red.get(r, self.cols + c);
            }
        }
        Ok(x)
    }
}

fn check_selection(indices: &[usize], len: usize) -> Result<()> {
    let mut seen = vec![false; len];
    for &i in indices {
        if i >= len {
            return Err(LinalgError::IndexOutOfRange { index: i, len });
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(LinalgError::DuplicateIndex(i));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f43() -> PrimeField {
        PrimeField::new(43).unwrap()
    }

    fn m(field: PrimeField, rows: &[&[i64]]) -> Matrix {
        let rows: Vec<Vec<i64>> = rows.iter().map(|r| r.to_vec()).collect();
        Matrix::from_signed_rows(field, &rows).unwrap()
    }

    #[test]
    fn field_rejects_composites() {
        assert!(PrimeField::new(43).is_ok());
        assert!(PrimeField::new(2).is_ok());
        assert_eq!(PrimeField::new(1), Err(LinalgError::NotPrime(1)));
        assert_eq!(PrimeField::new(45), Err(LinalgError::NotPrime(45)));
        assert!(PrimeField::new(1 << 33).is_err());
    }

    #[test]
    fn inverses() {
        let f = f43();
        assert_eq!(f.inv(2), Ok(22));
        assert_eq!(f.inv(1), Ok(1));
        assert_eq!(f.inv(42), Ok(42));
        assert_eq!(f.inv(0), Err(LinalgError::ZeroInverse));
        let f7 = PrimeField::new(7).unwrap();
        assert_eq!(f7.inv(1), Ok(1));
        for a in 1..43 {
            assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
            assert_eq!(f.pow(a, 42), 1);
        }
    }

    #[test]
    fn signed_reduction() {
        let f = f43();
        assert_eq!(f.reduce(-5), 38);
        assert_eq!(f.reduce(43), 0);
        assert_eq!(f.signed(38), -5);
        assert_eq!(f.signed(21), 21);
    }

    #[test]
    fn rank_examples() {
        let f = f43();
        assert_eq!(Matrix::identity(f, 4).rank(), 4);
        assert_eq!(Matrix::zeros(f, 3, 5).rank(), 0);
        assert_eq!(m(f, &[&[1, 2], &[2, 4]]).rank(), 1);
        assert_eq!(Matrix::zeros(f, 0, 5).rank(), 0);
    }

    #[test]
    fn submatrix_examples() {
        let f = f43();
        let i4 = Matrix::identity(f, 4);
        assert_eq!(
            i4.submatrix(&[0, 1], &[0, 1]).unwrap(),
            Matrix::identity(f, 2)
        );
        let empty = i4.submatrix(&[], &[0, 1, 2, 3]).unwrap();
        assert_eq!(empty.shape(), (0, 4));
        assert_eq!(
            i4.submatrix(&[4], &[0]),
            Err(LinalgError::IndexOutOfRange { index: 4, len: 4 })
        );
        assert_eq!(
            i4.submatrix(&[1, 1], &[0]),
            Err(LinalgError::DuplicateIndex(1))
        );
        // order is preserved
        let s = i4.submatrix(&[1, 0], &[0, 1]).unwrap();
        assert_eq!(s, m(f, &[&[0, 1], &[1, 0]]));
    }

    #[test]
    fn hconcat_examples() {
        let f = f43();
        let i2 = Matrix::identity(f, 2);
        let both = i2.hconcat(&i2).unwrap();
        assert_eq!(both, m(f, &[&[1, 0, 1, 0], &[0, 1, 0, 1]]));
        let a = m(f, &[&[1, 2], &[3, 4], &[5, 6]]);
        assert_eq!(a.hconcat(&Matrix::zeros(f, 3, 0)).unwrap(), a);
        let b = Matrix::zeros(f, 4, 2);
        assert!(matches!(
            a.hconcat(&b),
            Err(LinalgError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn column_space_examples() {
        let f = f43();
        let i2 = Matrix::identity(f, 2);
        let any = m(f, &[&[3, 5, -1], &[7, 0, 2]]);
        assert!(i2.column_space_contains(&any).unwrap());
        let e1 = m(f, &[&[1], &[0]]);
        let e2 = m(f, &[&[0], &[1]]);
        assert!(!e1.column_space_contains(&e2).unwrap());
        assert!(e1.column_space_contains(&Matrix::zeros(f, 2, 0)).unwrap());
        assert!(matches!(
            e1.column_space_contains(&Matrix::zeros(f, 3, 1)),
            Err(LinalgError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn solve_examples() {
        let f = f43();
        let b = m(f, &[&[1, 2], &[3, -4], &[0, 9]]);
        assert_eq!(Matrix::identity(f, 3).solve_right(&b).unwrap(), b);
        let zero_col = Matrix::zeros(f, 2, 1);
        assert_eq!(zero_col.solve_right(&e(f)), Err(LinalgError::NoSolution));

        // free variables are zero in the canonical solution
        let a = m(f, &[&[1, 1], &[0, 0]]);
        let rhs = m(f, &[&[5], &[0]]);
        assert_eq!(a.solve_right(&rhs).unwrap(), m(f, &[&[5], &[0]]));
    }

    fn e(f: PrimeField) -> Matrix {
        m(f, &[&[0], &[1]])
    }

    #[test]
    fn invertibility() {
        let f = f43();
        assert!(Matrix::identity(f, 3).is_invertible());
        assert!(!Matrix::zeros(f, 2, 3).is_invertible());
        assert!(Matrix::zeros(f, 0, 0).is_invertible());
        let a = m(f, &[&[2, 1], &[1, 1]]);
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv).unwrap(), Matrix::identity(f, 2));
    }

    #[test]
    fn field_mismatch_is_reported() {
        let a = Matrix::identity(f43(), 2);
        let b = Matrix::identity(PrimeField::new(7).unwrap(), 2);
        assert_eq!(a.mul(&b), Err(LinalgError::FieldMismatch(43, 7)));
    }
}
