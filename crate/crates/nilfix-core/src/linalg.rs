//! Exact rational arithmetic and integer lattice linear algebra.
//!
//! Everything here is exact: rationals are arbitrary-precision fractions in
//! lowest terms, determinants use fraction-free (Bareiss) elimination, and
//! Smith normal form uses deterministic row/column reduction with pivoting
//! on minimal-absolute-value entries.

use std::fmt;
use std::ops::{Add, Mul};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always in lowest terms with positive denominator.
pub type Rational = num_rational::BigRational;

pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rat_frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses "p/q" or "p"; sign allowed on the numerator only.
pub fn rat_from_str(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("invalid rational '{s}'"));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (s, None),
    };
    let numer: BigInt = num.parse().map_err(|_| bad())?;
    let denom: BigInt = match den {
        Some(d) => {
            if d.starts_with('-') || d.starts_with('+') {
                return Err(bad());
            }
            d.parse().map_err(|_| bad())?
        }
        None => BigInt::one(),
    };
    if denom.is_zero() {
        return Err(Error::Parse(format!("zero denominator in '{s}'")));
    }
    Ok(Rational::new(numer, denom))
}

/// Renders "p" when the denominator is 1, otherwise "p/q".
pub fn rat_to_string(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rat_is_integer(r: &Rational) -> bool {
    r.denom().is_one()
}

pub fn rat_pow(r: &Rational, exp: u32) -> Rational {
    let mut acc = Rational::one();
    for _ in 0..exp {
        acc *= r;
    }
    acc
}

/// Non-negative integer count extended with infinity.
///
/// Multiplication absorbs `Infinite`; the product `0 * Infinite` is not
/// defined by any formula in this crate and panics to surface logic bugs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExtendedCount {
    Finite(BigUint),
    Infinite,
}

impl ExtendedCount {
    pub fn finite(n: u64) -> Self {
        ExtendedCount::Finite(BigUint::from(n))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtendedCount::Infinite)
    }

    pub fn as_finite(&self) -> Option<&BigUint> {
        match self {
            ExtendedCount::Finite(n) => Some(n),
            ExtendedCount::Infinite => None,
        }
    }
}

impl fmt::Display for ExtendedCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedCount::Finite(n) => write!(f, "{n}"),
            ExtendedCount::Infinite => write!(f, "infinite"),
        }
    }
}

impl Mul for ExtendedCount {
    type Output = ExtendedCount;

    fn mul(self, rhs: ExtendedCount) -> ExtendedCount {
        use ExtendedCount::*;
        match (self, rhs) {
            (Finite(a), Finite(b)) => Finite(a * b),
            (Infinite, Finite(b)) | (Finite(b), Infinite) => {
                assert!(!b.is_zero(), "0 * infinite is undefined for these counts");
                Infinite
            }
            (Infinite, Infinite) => Infinite,
        }
    }
}

impl Add for ExtendedCount {
    type Output = ExtendedCount;

    fn add(self, rhs: ExtendedCount) -> ExtendedCount {
        use ExtendedCount::*;
        match (self, rhs) {
            (Finite(a), Finite(b)) => Finite(a + b),
            _ => Infinite,
        }
    }
}

impl PartialOrd for ExtendedCount {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtendedCount {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use ExtendedCount::*;
        match (self, other) {
            (Finite(a), Finite(b)) => a.cmp(b),
            (Finite(_), Infinite) => std::cmp::Ordering::Less,
            (Infinite, Finite(_)) => std::cmp::Ordering::Greater,
            (Infinite, Infinite) => std::cmp::Ordering::Equal,
        }
    }
}

/// Non-negative rational extended with infinity, the codomain of [`abs_inf`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExtendedRational {
    Finite(Rational),
    Infinite,
}

impl ExtendedRational {
    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtendedRational::Infinite)
    }
}

impl fmt::Display for ExtendedRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedRational::Finite(r) => write!(f, "{}", rat_to_string(r)),
            ExtendedRational::Infinite => write!(f, "infinite"),
        }
    }
}

/// |r| when r != 0, infinity when r = 0.
pub fn abs_inf(r: &Rational) -> ExtendedRational {
    if r.is_zero() {
        ExtendedRational::Infinite
    } else {
        ExtendedRational::Finite(r.abs())
    }
}

/// Row-major matrix with arbitrary-precision integer entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegerMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigInt>,
}

impl IntegerMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<BigInt>) -> Result<Self> {
        if rows == 0 || cols == 0 || entries.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "integer matrix {rows}x{cols} needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        Ok(IntegerMatrix { rows, cols, entries })
    }

    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map(|row| row.len()).unwrap_or(0);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rows in integer matrix".into()));
        }
        Self::new(r, c, rows.into_iter().flatten().collect())
    }

    pub fn from_i64_rows(rows: &[Vec<i64>]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|row| row.iter().map(|&v| BigInt::from(v)).collect())
                .collect(),
        )
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![BigInt::zero(); n * n];
        for i in 0..n {
            entries[i * n + i] = BigInt::one();
        }
        IntegerMatrix { rows: n, cols: n, entries }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn at(&self, i: usize, j: usize) -> &BigInt {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self.at(i, j).clone()).collect()
    }

    pub fn mul(&self, rhs: &IntegerMatrix) -> IntegerMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        let mut entries = vec![BigInt::zero(); self.rows * rhs.cols];
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    entries[i * rhs.cols + j] += a * rhs.at(k, j);
                }
            }
        }
        IntegerMatrix { rows: self.rows, cols: rhs.cols, entries }
    }

    pub fn to_rational(&self) -> RationalMatrix {
        RationalMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|e| Rational::from_integer(e.clone())).collect(),
        }
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> Result<BigInt> {
        if !self.is_square() {
            return Err(Error::Dimension(format!(
                "determinant of non-square {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        let mut m = self.entries.clone();
        let at = |m: &Vec<BigInt>, i: usize, j: usize| m[i * n + j].clone();
        let mut sign = 1i32;
        let mut prev = BigInt::one();
        for k in 0..n.saturating_sub(1) {
            if at(&m, k, k).is_zero() {
                let pivot_row = (k + 1..n).find(|&r| !at(&m, r, k).is_zero());
                match pivot_row {
                    Some(r) => {
                        for j in 0..n {
                            m.swap(k * n + j, r * n + j);
                        }
                        sign = -sign;
                    }
                    None => return Ok(BigInt::zero()),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = at(&m, i, j) * at(&m, k, k) - at(&m, i, k) * at(&m, k, j);
                    let (q, r) = num.div_rem(&prev);
                    debug_assert!(r.is_zero(), "Bareiss division must be exact");
                    m[i * n + j] = q;
                }
                m[i * n + k] = BigInt::zero();
            }
            prev = at(&m, k, k);
        }
        let d = at(&m, n - 1, n - 1);
        Ok(if sign < 0 { -d } else { d })
    }
}

/// Row-major matrix with exact rational entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Rational>,
}

impl RationalMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Rational>) -> Result<Self> {
        if rows == 0 || cols == 0 || entries.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "rational matrix {rows}x{cols} needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        Ok(RationalMatrix { rows, cols, entries })
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map(|row| row.len()).unwrap_or(0);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rows in rational matrix".into()));
        }
        Self::new(r, c, rows.into_iter().flatten().collect())
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![Rational::zero(); n * n];
        for i in 0..n {
            entries[i * n + i] = Rational::one();
        }
        RationalMatrix { rows: n, cols: n, entries }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn at(&self, i: usize, j: usize) -> &Rational {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    pub fn mul(&self, rhs: &RationalMatrix) -> RationalMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        let mut entries = vec![Rational::zero(); self.rows * rhs.cols];
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    entries[i * rhs.cols + j] += a * rhs.at(k, j);
                }
            }
        }
        RationalMatrix { rows: self.rows, cols: rhs.cols, entries }
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(self.cols, v.len(), "matrix-vector shape mismatch");
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.at(i, j) * &v[j]).sum())
            .collect()
    }

    /// I - self, for square matrices.
    pub fn i_minus(&self) -> RationalMatrix {
        assert!(self.is_square(), "I - M needs a square matrix");
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                let id = if i == j { Rational::one() } else { Rational::zero() };
                out.set(i, j, id - self.at(i, j));
            }
        }
        out
    }

    /// All entries integral?
    pub fn is_integral(&self) -> bool {
        self.entries.iter().all(rat_is_integer)
    }

    pub fn to_integer(&self) -> Option<IntegerMatrix> {
        if !self.is_integral() {
            return None;
        }
        Some(IntegerMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|e| e.numer().clone()).collect(),
        })
    }

    /// Exact determinant: clears row denominators, then Bareiss elimination.
    pub fn det(&self) -> Result<Rational> {
        if !self.is_square() {
            return Err(Error::Dimension(format!(
                "determinant of non-square {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        let mut scale = BigInt::one();
        let mut int_entries = Vec::with_capacity(n * n);
        for i in 0..n {
            let mut lcm = BigInt::one();
            for j in 0..n {
                lcm = lcm.lcm(self.at(i, j).denom());
            }
            for j in 0..n {
                let e = self.at(i, j);
                int_entries.push(e.numer() * (&lcm / e.denom()));
            }
            scale *= lcm;
        }
        let int_det = IntegerMatrix { rows: n, cols: n, entries: int_entries }.det()?;
        Ok(Rational::new(int_det, scale))
    }

    /// Exact inverse by Gauss-Jordan elimination; `None` when singular.
    pub fn inverse(&self) -> Result<Option<RationalMatrix>> {
        if !self.is_square() {
            return Err(Error::Dimension("inverse of non-square matrix".into()));
        }
        let n = self.rows;
        let mut a = self.entries.clone();
        let mut inv = RationalMatrix::identity(n).entries;
        for col in 0..n {
            let pivot_row = match (col..n).find(|&r| !a[r * n + col].is_zero()) {
                Some(r) => r,
                None => return Ok(None),
            };
            if pivot_row != col {
                for j in 0..n {
                    a.swap(col * n + j, pivot_row * n + j);
                    inv.swap(col * n + j, pivot_row * n + j);
                }
            }
            let p = a[col * n + col].clone();
            for j in 0..n {
                a[col * n + j] /= &p;
                inv[col * n + j] /= &p;
            }
            for r in 0..n {
                if r == col || a[r * n + col].is_zero() {
                    continue;
                }
                let factor = a[r * n + col].clone();
                for j in 0..n {
                    let av = &a[col * n + j] * &factor;
                    a[r * n + j] -= av;
                    let iv = &inv[col * n + j] * &factor;
                    inv[r * n + j] -= iv;
                }
            }
        }
        Ok(Some(RationalMatrix { rows: n, cols: n, entries: inv }))
    }
}

/// Exact determinant of a rational matrix.
pub fn det(m: &RationalMatrix) -> Result<Rational> {
    m.det()
}

/// Result of [`smith_normal_form`]: `u * a * v = s` with `u`, `v` unimodular
/// and `s` diagonal with non-negative entries, each dividing the next.
#[derive(Clone, Debug)]
pub struct SmithNormalForm {
    pub u: IntegerMatrix,
    pub s: IntegerMatrix,
    pub v: IntegerMatrix,
}

impl SmithNormalForm {
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.s.rows().min(self.s.cols())).map(|i| self.s.at(i, i).clone()).collect()
    }
}

fn swap_rows(m: &mut IntegerMatrix, a: usize, b: usize) {
    if a == b {
        return;
    }
    for j in 0..m.cols() {
        let x = m.at(a, j).clone();
        let y = m.at(b, j).clone();
        m.set(a, j, y);
        m.set(b, j, x);
    }
}

fn swap_cols(m: &mut IntegerMatrix, a: usize, b: usize) {
    if a == b {
        return;
    }
    for i in 0..m.rows() {
        let x = m.at(i, a).clone();
        let y = m.at(i, b).clone();
        m.set(i, a, y);
        m.set(i, b, x);
    }
}

/// row[dst] += q * row[src]
fn add_row_multiple(m: &mut IntegerMatrix, dst: usize, src: usize, q: &BigInt) {
    for j in 0..m.cols() {
        let v = m.at(dst, j) + q * m.at(src, j);
        m.set(dst, j, v);
    }
}

/// col[dst] += q * col[src]
fn add_col_multiple(m: &mut IntegerMatrix, dst: usize, src: usize, q: &BigInt) {
    for i in 0..m.rows() {
        let v = m.at(i, dst) + q * m.at(i, src);
        m.set(i, dst, v);
    }
}

fn negate_row(m: &mut IntegerMatrix, row: usize) {
    for j in 0..m.cols() {
        let v = -m.at(row, j).clone();
        m.set(row, j, v);
    }
}

/// Smith normal form of a square integer matrix.
///
/// Deterministic row/column reduction, pivoting on the entry of minimal
/// non-zero absolute value in the remaining submatrix. Row operations
/// accumulate into `u`, column operations into `v`.
pub fn smith_normal_form(a: &IntegerMatrix) -> Result<SmithNormalForm> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "Smith normal form of non-square {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    let mut m = a.clone();
    let mut u = IntegerMatrix::identity(n);
    let mut v = IntegerMatrix::identity(n);

    for t in 0..n {
        'reduce: loop {
            // Minimal |nonzero| pivot in the trailing submatrix.
            let mut pivot: Option<(usize, usize)> = None;
            for i in t..n {
                for j in t..n {
                    if m.at(i, j).is_zero() {
                        continue;
                    }
                    let better = match pivot {
                        None => true,
                        Some((pi, pj)) => m.at(i, j).abs() < m.at(pi, pj).abs(),
                    };
                    if better {
                        pivot = Some((i, j));
                    }
                }
            }
            let (pi, pj) = match pivot {
                Some(p) => p,
                None => break 'reduce, // trailing submatrix is zero
            };
            swap_rows(&mut m, t, pi);
            swap_rows(&mut u, t, pi);
            swap_cols(&mut m, t, pj);
            swap_cols(&mut v, t, pj);

            // Euclidean steps shrink the off-pivot entries of row/column t.
            let mut clean = true;
            for i in t + 1..n {
                if m.at(i, t).is_zero() {
                    continue;
                }
                let q = -(m.at(i, t) / m.at(t, t));
                add_row_multiple(&mut m, i, t, &q);
                add_row_multiple(&mut u, i, t, &q);
                if !m.at(i, t).is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..n {
                if m.at(t, j).is_zero() {
                    continue;
                }
                let q = -(m.at(t, j) / m.at(t, t));
                add_col_multiple(&mut m, j, t, &q);
                add_col_multiple(&mut v, j, t, &q);
                if !m.at(t, j).is_zero() {
                    clean = false;
                }
            }
            if !clean {
                continue 'reduce;
            }
            // Pivot must divide every remaining entry for the divisibility
            // chain; mixing in an offending row restarts the reduction.
            let mut offender = None;
            'scan: for i in t + 1..n {
                for j in t + 1..n {
                    if !(m.at(i, j) % m.at(t, t)).is_zero() {
                        offender = Some(i);
                        break 'scan;
                    }
                }
            }
            match offender {
                Some(i) => {
                    let one = BigInt::one();
                    add_row_multiple(&mut m, t, i, &one);
                    add_row_multiple(&mut u, t, i, &one);
                }
                None => break 'reduce,
            }
        }
        if m.at(t, t).is_negative() {
            negate_row(&mut m, t);
            negate_row(&mut u, t);
        }
    }
    Ok(SmithNormalForm { u, s: m, v })
}

/// Index of the sublattice a*Z^k in Z^k: product of the Smith diagonal,
/// cross-checked against the determinant; infinite when a is singular.
pub fn lattice_index(a: &IntegerMatrix) -> Result<ExtendedCount> {
    let snf = smith_normal_form(a)?;
    let mut product = BigInt::one();
    for d in snf.diagonal() {
        product *= d;
    }
    let det = a.det()?;
    assert_eq!(product, det.abs(), "Smith diagonal product must equal |det|");
    if product.is_zero() {
        Ok(ExtendedCount::Infinite)
    } else {
        Ok(ExtendedCount::Finite(product.to_biguint().expect("non-negative product")))
    }
}
