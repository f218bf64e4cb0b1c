//! Exact dense linear algebra over Q(i).
//!
//! [`ExactMatrix`] holds scalar matrices (square for most queries, rectangular
//! for block assembly); [`PolyMatrix`] holds small square matrices of
//! polynomials for symbolic determinants and adjugates.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::ser::{Serialize, SerializeStruct, Serializer};
use thiserror::Error;

use crate::exactnum::GaussianRational;
use crate::multipoly::{MultiPoly, VarUniverse};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("expected {expected} entries, got {got}")]
    EntryCount { expected: usize, got: usize },
    #[error("ragged rows: row {row} has {got} entries, expected {expected}")]
    Ragged { row: usize, expected: usize, got: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("matrix is singular")]
    Singular,
}

/// Dense matrix of Gaussian rationals in row-major order.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ExactMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<GaussianRational>,
}

impl fmt::Debug for ExactMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ExactMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(|c| c.to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

/// Square matrices serialize as `{"n", "entries"}`, others as
/// `{"rows", "cols", "entries"}`, with one list of scalars per row.
impl Serialize for ExactMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows = self.to_rows();
        if self.is_square() {
            let mut st = s.serialize_struct("ExactMatrix", 2)?;
            st.serialize_field("n", &self.rows)?;
            st.serialize_field("entries", &rows)?;
            st.end()
        } else {
            let mut st = s.serialize_struct("ExactMatrix", 3)?;
            st.serialize_field("rows", &self.rows)?;
            st.serialize_field("cols", &self.cols)?;
            st.serialize_field("entries", &rows)?;
            st.end()
        }
    }
}

impl ExactMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<GaussianRational>) -> Result<Self, LinalgError> {
        if entries.len() != rows * cols {
            return Err(LinalgError::EntryCount {
                expected: rows * cols,
                got: entries.len(),
            });
        }
        Ok(ExactMatrix { rows, cols, entries })
    }

    pub fn from_rows(rows: Vec<Vec<GaussianRational>>) -> Result<Self, LinalgError> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::with_capacity(nrows * ncols);
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != ncols {
                return Err(LinalgError::Ragged {
                    row: r,
                    expected: ncols,
                    got: row.len(),
                });
            }
            entries.extend(row);
        }
        Ok(ExactMatrix {
            rows: nrows,
            cols: ncols,
            entries,
        })
    }

    /// Square matrix from integer rows; panics on ragged input.
    pub fn from_int_rows(rows: &[&[i64]]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| GaussianRational::from_int(v)).collect())
                .collect(),
        )
        .expect("ragged integer rows")
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        ExactMatrix {
            rows,
            cols,
            entries: vec![GaussianRational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, GaussianRational::one());
        }
        m
    }

    pub fn diagonal(diag: &[GaussianRational]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, d) in diag.iter().enumerate() {
            m.set(i, i, d.clone());
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Dimension of a square matrix.
    pub fn n(&self) -> usize {
        debug_assert!(self.is_square());
        self.rows
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &GaussianRational {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: GaussianRational) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[GaussianRational] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn entries(&self) -> &[GaussianRational] {
        &self.entries
    }

    pub fn to_rows(&self) -> Vec<Vec<GaussianRational>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    pub fn is_real(&self) -> bool {
        self.entries.iter().all(GaussianRational::is_real)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c).clone());
            }
        }
        t
    }

    pub fn scale(&self, k: &GaussianRational) -> Self {
        ExactMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|e| e * k).collect(),
        }
    }

    pub fn checked_mul(&self, other: &ExactMatrix) -> Result<Self, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::Shape(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let b = other.get(k, c);
                    if !b.is_zero() {
                        out.entries[r * other.cols + c] += &(a * b);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[GaussianRational]) -> Vec<GaussianRational> {
        assert_eq!(v.len(), self.cols, "vector length mismatch");
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn pow(&self, e: u32) -> Self {
        assert!(self.is_square(), "power of a non-square matrix");
        let mut acc = Self::identity(self.rows);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Submatrix on the given row and column index lists.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut entries = Vec::with_capacity(rows.len() * cols.len());
        for &r in rows {
            for &c in cols {
                entries.push(self.get(r, c).clone());
            }
        }
        ExactMatrix {
            rows: rows.len(),
            cols: cols.len(),
            entries,
        }
    }

    /// Leading `k x k` block.
    pub fn leading_block(&self, k: usize) -> Self {
        let idx: Vec<usize> = (0..k).collect();
        self.submatrix(&idx, &idx)
    }

    /// Simultaneous row/column permutation: result[i][j] = self[p[i]][p[j]].
    pub fn permute_symmetric(&self, perm: &[usize]) -> Self {
        self.submatrix(perm, perm)
    }

    pub fn is_upper_triangular(&self) -> bool {
        (0..self.rows).all(|r| (0..r.min(self.cols)).all(|c| self.get(r, c).is_zero()))
    }

    pub fn is_lower_triangular(&self) -> bool {
        (0..self.rows).all(|r| (r + 1..self.cols).all(|c| self.get(r, c).is_zero()))
    }

    /// Determinant by fraction-free (Bareiss) elimination with row pivoting.
    ///
    /// # Panics
    /// If the matrix is not square.
    pub fn det(&self) -> GaussianRational {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return GaussianRational::one();
        }
        let mut m = self.entries.clone();
        let mut sign_negative = false;
        let mut prev = GaussianRational::one();
        for k in 0..n - 1 {
            if m[k * n + k].is_zero() {
                match (k + 1..n).find(|&r| !m[r * n + k].is_zero()) {
                    None => return GaussianRational::zero(),
                    Some(r) => {
                        for c in 0..n {
                            m.swap(k * n + c, r * n + c);
                        }
                        sign_negative = !sign_negative;
                    }
                }
            }
            let pivot = m[k * n + k].clone();
            let prev_inv = prev.inv();
            for r in k + 1..n {
                let factor = m[r * n + k].clone();
                for c in k + 1..n {
                    let v = &(&m[r * n + c] * &pivot) - &(&factor * &m[k * n + c]);
                    m[r * n + c] = &v * &prev_inv;
                }
                m[r * n + k] = GaussianRational::zero();
            }
            prev = pivot;
        }
        let d = m[n * n - 1].clone();
        if sign_negative {
            -d
        } else {
            d
        }
    }

    /// Reduced row echelon form and its pivot columns.
    pub fn rref(&self) -> (ExactMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(p) = (row..m.rows).find(|&r| !m.get(r, col).is_zero()) else {
                continue;
            };
            if p != row {
                for c in 0..m.cols {
                    m.entries.swap(p * m.cols + c, row * m.cols + c);
                }
            }
            let inv = m.get(row, col).inv();
            for c in col..m.cols {
                let v = m.get(row, c) * &inv;
                m.set(row, c, v);
            }
            for r in 0..m.rows {
                if r == row || m.get(r, col).is_zero() {
                    continue;
                }
                let factor = m.get(r, col).clone();
                for c in col..m.cols {
                    let v = m.get(r, c) - &(&factor * m.get(row, c));
                    m.set(r, c, v);
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Some `x` with `self * x = b`, if one exists.
    pub fn solve(&self, b: &[GaussianRational]) -> Option<Vec<GaussianRational>> {
        assert_eq!(b.len(), self.rows, "right-hand side length mismatch");
        let mut aug = Self::zeros(self.rows, self.cols + 1);
        for r in 0..self.rows {
            for c in 0..self.cols {
                aug.set(r, c, self.get(r, c).clone());
            }
            aug.set(r, self.cols, b[r].clone());
        }
        let (red, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![GaussianRational::zero(); self.cols];
        for (r, &c) in pivots.iter().enumerate() {
            x[c] = red.get(r, self.cols).clone();
        }
        Some(x)
    }

    pub fn in_column_space(&self, b: &[GaussianRational]) -> bool {
        self.solve(b).is_some()
    }

    pub fn inverse(&self) -> Result<Self, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::Shape("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut aug = Self::zeros(n, 2 * n);
        for r in 0..n {
            for c in 0..n {
                aug.set(r, c, self.get(r, c).clone());
            }
            aug.set(r, n + r, GaussianRational::one());
        }
        let (red, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return Err(LinalgError::Singular);
        }
        let cols: Vec<usize> = (n..2 * n).collect();
        let rows: Vec<usize> = (0..n).collect();
        Ok(red.submatrix(&rows, &cols))
    }

    /// Coefficients `c_0, ..., c_n` of `det(t*I - M)`, lowest degree first.
    ///
    /// Uses the Faddeev-LeVerrier recurrence, exact in characteristic zero.
    pub fn char_poly_coeffs(&self) -> Vec<GaussianRational> {
        assert!(self.is_square(), "characteristic polynomial of a non-square matrix");
        let n = self.rows;
        let mut coeffs = vec![GaussianRational::zero(); n + 1];
        coeffs[n] = GaussianRational::one();
        let mut acc = Self::zeros(n, n);
        for k in 1..=n {
            let mut next = self * &acc;
            for i in 0..n {
                let v = next.get(i, i) + &coeffs[n - k + 1];
                next.set(i, i, v);
            }
            let am = self * &next;
            let trace: GaussianRational = (0..n).map(|i| am.get(i, i).clone()).sum();
            coeffs[n - k] = -(trace / GaussianRational::from_int(k as i64));
            acc = next;
        }
        coeffs
    }

    /// Characteristic polynomial as a univariate polynomial in `var`.
    pub fn char_poly(&self, var: &str) -> MultiPoly {
        let universe = VarUniverse::new([var]).expect("invalid variable name");
        let t = MultiPoly::var_index(&universe, 0);
        let mut out = MultiPoly::zero(&universe);
        let mut power = MultiPoly::one(&universe);
        for c in self.char_poly_coeffs() {
            out = &out + &power.scale(&c);
            power = &power * &t;
        }
        out
    }

    pub fn is_nilpotent(&self) -> bool {
        let coeffs = self.char_poly_coeffs();
        coeffs[..coeffs.len() - 1].iter().all(Zero::is_zero)
    }

    /// Smallest `k >= 1` with `M^k = 0`, if any.
    pub fn nilpotency_index(&self) -> Option<u32> {
        if !self.is_nilpotent() {
            return None;
        }
        let mut power = self.clone();
        let mut k = 1;
        while !power.is_zero() {
            power = &power * self;
            k += 1;
        }
        Some(k)
    }

    /// Every principal minor of size `1..=r`, ordered by size and then
    /// lexicographically by the (0-based) index set.
    pub fn principal_minors_up_to(&self, r: usize) -> Vec<(Vec<usize>, GaussianRational)> {
        assert!(self.is_square(), "principal minors of a non-square matrix");
        let r = r.min(self.rows);
        let mut subsets = Vec::new();
        for size in 1..=r {
            subsets.extend(combinations(self.rows, size));
        }
        let dets: Vec<GaussianRational> = subsets
            .par_iter()
            .map(|s| self.submatrix(s, s).det())
            .collect();
        subsets.into_iter().zip(dets).collect()
    }

    /// First vanishing principal minor, by size and then lexicographically.
    /// Stops at the first size that has one.
    pub fn first_vanishing_principal_minor(&self) -> Option<Vec<usize>> {
        assert!(self.is_square(), "principal minors of a non-square matrix");
        (1..=self.rows).find_map(|size| {
            combinations(self.rows, size)
                .par_iter()
                .find_first(|s| self.submatrix(s, s).det().is_zero())
                .cloned()
        })
    }

    pub fn all_principal_minors_nonzero(&self) -> bool {
        self.first_vanishing_principal_minor().is_none()
    }
}

/// All `size`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if size > n {
        return out;
    }
    let mut current: Vec<usize> = (0..size).collect();
    loop {
        out.push(current.clone());
        let Some(pos) = (0..size).rev().find(|&i| current[i] != i + n - size) else {
            return out;
        };
        current[pos] += 1;
        for j in pos + 1..size {
            current[j] = current[j - 1] + 1;
        }
    }
}

impl Mul<&ExactMatrix> for &ExactMatrix {
    type Output = ExactMatrix;

    fn mul(self, rhs: &ExactMatrix) -> ExactMatrix {
        self.checked_mul(rhs).expect("shape mismatch in matrix product")
    }
}

impl Add<&ExactMatrix> for &ExactMatrix {
    type Output = ExactMatrix;

    fn add(self, rhs: &ExactMatrix) -> ExactMatrix {
        assert!(self.rows == rhs.rows && self.cols == rhs.cols, "shape mismatch in matrix sum");
        ExactMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub<&ExactMatrix> for &ExactMatrix {
    type Output = ExactMatrix;

    fn sub(self, rhs: &ExactMatrix) -> ExactMatrix {
        assert!(self.rows == rhs.rows && self.cols == rhs.cols, "shape mismatch in matrix difference");
        ExactMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Square matrix of polynomials over one universe.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PolyMatrix {
    n: usize,
    universe: Arc<VarUniverse>,
    entries: Vec<MultiPoly>,
}

impl PolyMatrix {
    pub fn new(n: usize, universe: &Arc<VarUniverse>, entries: Vec<MultiPoly>) -> Result<Self, LinalgError> {
        if entries.len() != n * n {
            return Err(LinalgError::EntryCount {
                expected: n * n,
                got: entries.len(),
            });
        }
        Ok(PolyMatrix {
            n,
            universe: universe.clone(),
            entries,
        })
    }

    pub fn identity(n: usize, universe: &Arc<VarUniverse>) -> Self {
        let mut entries = vec![MultiPoly::zero(universe); n * n];
        for i in 0..n {
            entries[i * n + i] = MultiPoly::one(universe);
        }
        PolyMatrix {
            n,
            universe: universe.clone(),
            entries,
        }
    }

    pub fn from_scalar(m: &ExactMatrix, universe: &Arc<VarUniverse>) -> Self {
        assert!(m.is_square(), "non-square scalar matrix");
        PolyMatrix {
            n: m.rows(),
            universe: universe.clone(),
            entries: m
                .entries()
                .iter()
                .map(|c| MultiPoly::constant(universe, c.clone()))
                .collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn universe(&self) -> &Arc<VarUniverse> {
        &self.universe
    }

    pub fn get(&self, r: usize, c: usize) -> &MultiPoly {
        &self.entries[r * self.n + c]
    }

    pub fn set(&mut self, r: usize, c: usize, p: MultiPoly) {
        self.entries[r * self.n + c] = p;
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.n, &self.universe)
    }

    /// Determinant by Laplace expansion memoized on column subsets.
    pub fn det(&self) -> MultiPoly {
        let rows: Vec<usize> = (0..self.n).collect();
        let cols: Vec<usize> = (0..self.n).collect();
        self.minor(&rows, &cols)
    }

    /// Determinant of the submatrix on `rows` x `cols` (equal lengths).
    pub fn minor(&self, rows: &[usize], cols: &[usize]) -> MultiPoly {
        assert_eq!(rows.len(), cols.len());
        assert!(cols.len() <= 64, "minor too large");
        let mut memo: HashMap<u64, MultiPoly> = HashMap::new();
        let full = if cols.len() == 64 { u64::MAX } else { (1u64 << cols.len()) - 1 };
        self.minor_rec(rows, cols, full, &mut memo)
    }

    fn minor_rec(&self, rows: &[usize], cols: &[usize], mask: u64, memo: &mut HashMap<u64, MultiPoly>) -> MultiPoly {
        let k = mask.count_ones() as usize;
        if k == 0 {
            return MultiPoly::one(&self.universe);
        }
        if let Some(v) = memo.get(&mask) {
            return v.clone();
        }
        let row = rows[rows.len() - k];
        let mut acc = MultiPoly::zero(&self.universe);
        let mut negative = false;
        for (j, &col) in cols.iter().enumerate() {
            if mask & (1 << j) == 0 {
                continue;
            }
            let entry = self.get(row, col);
            if !entry.is_zero() {
                let sub = self.minor_rec(rows, cols, mask & !(1 << j), memo);
                let term = entry * &sub;
                acc = if negative { &acc - &term } else { &acc + &term };
            }
            negative = !negative;
        }
        memo.insert(mask, acc.clone());
        acc
    }

    /// Classical adjugate: `adj[j][i] = (-1)^(i+j) * minor(i, j)`.
    pub fn adjugate(&self) -> PolyMatrix {
        let n = self.n;
        let mut out = PolyMatrix {
            n,
            universe: self.universe.clone(),
            entries: vec![MultiPoly::zero(&self.universe); n * n],
        };
        for i in 0..n {
            let rows: Vec<usize> = (0..n).filter(|&r| r != i).collect();
            for j in 0..n {
                let cols: Vec<usize> = (0..n).filter(|&c| c != j).collect();
                let m = self.minor(&rows, &cols);
                let v = if (i + j) % 2 == 1 { -m } else { m };
                out.set(j, i, v);
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[MultiPoly]) -> Vec<MultiPoly> {
        assert_eq!(v.len(), self.n);
        (0..self.n)
            .map(|r| {
                let mut acc = MultiPoly::zero(&self.universe);
                for c in 0..self.n {
                    let e = self.get(r, c);
                    if !e.is_zero() && !v[c].is_zero() {
                        acc = &acc + &(e * &v[c]);
                    }
                }
                acc
            })
            .collect()
    }
}

impl Mul<&PolyMatrix> for &PolyMatrix {
    type Output = PolyMatrix;

    fn mul(self, rhs: &PolyMatrix) -> PolyMatrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        let n = self.n;
        let mut out = PolyMatrix::identity(n, &self.universe);
        for r in 0..n {
            for c in 0..n {
                let mut acc = MultiPoly::zero(&self.universe);
                for k in 0..n {
                    let (a, b) = (self.get(r, k), rhs.get(k, c));
                    if !a.is_zero() && !b.is_zero() {
                        acc = &acc + &(a * b);
                    }
                }
                out.set(r, c, acc);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(s: &str) -> GaussianRational {
        GaussianRational::parse(s).unwrap()
    }

    fn mat(rows: &[&[&str]]) -> ExactMatrix {
        ExactMatrix::from_rows(rows.iter().map(|r| r.iter().map(|s| q(s)).collect()).collect()).unwrap()
    }

    fn a0() -> ExactMatrix {
        ExactMatrix::from_int_rows(&[&[1, -1], &[1, -1]])
    }

    fn example5() -> ExactMatrix {
        mat(&[
            &["1", "i", "1", "1"],
            &["-i", "1", "-i", "-i"],
            &["-1", "-i", "1", "-1"],
            &["-1", "-i", "1", "-1"],
        ])
    }

    #[test]
    fn determinant_examples() {
        assert_eq!(ExactMatrix::identity(3).det(), q("1"));
        assert_eq!(a0().det(), q("0"));
        assert_eq!(example5().det(), q("0"));
        assert_eq!(mat(&[&["0", "1"], &["1", "0"]]).det(), q("-1"));
        assert_eq!(mat(&[&["i", "0"], &["0", "i"]]).det(), q("-1"));
    }

    #[test]
    fn rank_and_char_poly_examples() {
        assert_eq!(ExactMatrix::zeros(4, 4).rank(), 0);
        assert_eq!(example5().rank(), 2);
        assert_eq!(a0().char_poly("t").to_string(), "t^2");
        assert_eq!(ExactMatrix::identity(2).char_poly("t").to_string(), "t^2 - 2*t + 1");
        let u = VarUniverse::new(["t"]).unwrap();
        let expected = MultiPoly::parse("t^2*(t^2 - 2*t + 4)", &u).unwrap();
        assert_eq!(example5().char_poly("t"), expected);
    }

    #[test]
    fn minors_and_nilpotency_examples() {
        let minors = a0().principal_minors_up_to(2);
        assert_eq!(
            minors,
            vec![(vec![0], q("1")), (vec![1], q("-1")), (vec![0, 1], q("0"))]
        );
        assert!(ExactMatrix::identity(2)
            .principal_minors_up_to(2)
            .iter()
            .all(|(_, m)| m == &q("1")));
        assert!(a0().is_nilpotent());
        assert_eq!(a0().nilpotency_index(), Some(2));
        assert!(!ExactMatrix::identity(2).is_nilpotent());
        assert_eq!(combinations(4, 2).len(), 6);
    }

    #[test]
    fn solve_and_inverse() {
        let a = a0();
        assert!(a.in_column_space(&[q("1"), q("1")]));
        assert!(!a.in_column_space(&[q("1"), q("0")]));
        let m = mat(&[&["2", "1"], &["1", "1"]]);
        assert_eq!(&m * &m.inverse().unwrap(), ExactMatrix::identity(2));
        assert_eq!(a.inverse(), Err(LinalgError::Singular));
    }

    fn uni() -> Arc<VarUniverse> {
        VarUniverse::new(["a", "b", "c", "d", "x", "y"]).unwrap()
    }

    fn p(s: &str) -> MultiPoly {
        MultiPoly::parse(s, &uni()).unwrap()
    }

    #[test]
    fn adjugate_examples() {
        let u = uni();
        let one = PolyMatrix::new(1, &u, vec![p("x^2+y")]).unwrap();
        assert_eq!(one.adjugate().get(0, 0), &p("1"));

        let m = PolyMatrix::new(2, &u, vec![p("a"), p("b"), p("c"), p("d")]).unwrap();
        let adj = m.adjugate();
        assert_eq!(adj, PolyMatrix::new(2, &u, vec![p("d"), p("-b"), p("-c"), p("a")]).unwrap());
        assert_eq!(m.det(), p("a*d - b*c"));

        // Jacobian-style matrix I + 3*diag((x-y)^2, (x-y)^2)*A0.
        let s = p("3*(x-y)^2");
        let jf = PolyMatrix::new(2, &u, vec![&p("1") + &s, -&s, s.clone(), &p("1") - &s]).unwrap();
        assert_eq!(jf.det(), p("1"));
        let prod = &jf * &jf.adjugate();
        let mut expected = PolyMatrix::identity(2, &u);
        for i in 0..2 {
            expected.set(i, i, jf.det());
        }
        assert_eq!(prod, expected);
    }

    fn cofactor_det(m: &ExactMatrix) -> GaussianRational {
        let n = m.rows();
        if n == 0 {
            return GaussianRational::one();
        }
        let mut acc = GaussianRational::zero();
        for j in 0..n {
            let rows: Vec<usize> = (1..n).collect();
            let cols: Vec<usize> = (0..n).filter(|&c| c != j).collect();
            let term = m.get(0, j) * &cofactor_det(&m.submatrix(&rows, &cols));
            acc = if j % 2 == 0 { &acc + &term } else { &acc - &term };
        }
        acc
    }

    fn arb_matrix(max_n: usize) -> impl Strategy<Value = ExactMatrix> {
        (1..=max_n).prop_flat_map(|n| {
            prop::collection::vec((-3i64..4, -1i64..2), n * n).prop_map(move |vals| {
                ExactMatrix::new(
                    n,
                    n,
                    vals.into_iter()
                        .map(|(a, b)| GaussianRational::from_int(a) + GaussianRational::from_int(b) * GaussianRational::i())
                        .collect(),
                )
                .unwrap()
            })
        })
    }

    fn arb_real_matrix(max_n: usize) -> impl Strategy<Value = ExactMatrix> {
        (1..=max_n).prop_flat_map(|n| {
            prop::collection::vec(prop_oneof![Just(0i64), -2i64..3], n * n)
                .prop_map(move |vals| ExactMatrix::new(n, n, vals.into_iter().map(GaussianRational::from_int).collect()).unwrap())
        })
    }

    proptest! {
        #[test]
        fn bareiss_matches_cofactor_expansion(m in arb_matrix(5)) {
            prop_assert_eq!(m.det(), cofactor_det(&m));
        }

        #[test]
        fn rank_is_largest_nonvanishing_minor(m in arb_real_matrix(4)) {
            let n = m.rows();
            let mut largest = 0;
            for size in 1..=n {
                for rows in combinations(n, size) {
                    for cols in combinations(n, size) {
                        if !m.submatrix(&rows, &cols).det().is_zero() {
                            largest = size;
                        }
                    }
                }
            }
            prop_assert_eq!(m.rank(), largest);
        }

        #[test]
        fn nilpotency_transfers_across_diagonal_products(
            m in arb_real_matrix(5),
            diag in prop::collection::vec(prop_oneof![Just(0i64), -2i64..3], 5),
        ) {
            let d = ExactMatrix::diagonal(&diag[..m.rows()].iter().map(|&v| GaussianRational::from_int(v)).collect::<Vec<_>>());
            prop_assert_eq!((&d * &m).is_nilpotent(), (&m * &d).is_nilpotent());
        }

        #[test]
        fn char_poly_constant_term_is_signed_det(m in arb_matrix(4)) {
            let coeffs = m.char_poly_coeffs();
            let det = m.det();
            let expected = if m.rows() % 2 == 0 { det } else { -det };
            prop_assert_eq!(&coeffs[0], &expected);
        }

        #[test]
        fn poly_adjugate_identity(vals in prop::collection::vec((-2i64..3, 0u16..2, 0u16..2), 9)) {
            let u = uni();
            let entries: Vec<MultiPoly> = vals
                .iter()
                .map(|&(c, ex, ey)| {
                    let m = crate::multipoly::Monomial::from_exponents(&[0, 0, 0, 0, ex, ey]);
                    &MultiPoly::term(&u, m, GaussianRational::from_int(c)) + &MultiPoly::one(&u)
                })
                .collect();
            let m = PolyMatrix::new(3, &u, entries).unwrap();
            let det = m.det();
            let prod = &m * &m.adjugate();
            for r in 0..3 {
                for c in 0..3 {
                    let expected = if r == c { det.clone() } else { MultiPoly::zero(&u) };
                    prop_assert_eq!(prod.get(r, c), &expected);
                }
            }
        }
    }
}
