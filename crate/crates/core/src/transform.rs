//! Structure-preserving transformations: the diagonal action `A -> D A D^-3`,
//! witness normalization, cubic-similarity verification, block embedding,
//! coordinate permutations and the fixed-witness image prefilter.

use std::sync::Arc;

use keller_algebra::{ExactMatrix, GaussianRational, MultiPoly, PolyMatrix, VarUniverse};
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sysbuild::{apply_matrix, indexed_names};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransformError {
    #[error("diagonal entry {0} is zero")]
    SingularDiagonal(usize),
    #[error("matrix L is singular")]
    SingularL,
    #[error("shape mismatch: {0}")]
    Shape(String),
}

/// Invertible diagonal matrix, stored by its diagonal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagonalAction {
    diag: Vec<GaussianRational>,
}

impl DiagonalAction {
    pub fn new(diag: Vec<GaussianRational>) -> Result<Self, TransformError> {
        if let Some(i) = diag.iter().position(Zero::is_zero) {
            return Err(TransformError::SingularDiagonal(i));
        }
        Ok(DiagonalAction { diag })
    }

    pub fn identity(n: usize) -> Self {
        DiagonalAction {
            diag: vec![GaussianRational::from_int(1); n],
        }
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn entries(&self) -> &[GaussianRational] {
        &self.diag
    }

    pub fn matrix(&self) -> ExactMatrix {
        ExactMatrix::diagonal(&self.diag)
    }

    /// `D^e` for any integer `e`.
    pub fn power(&self, e: i32) -> DiagonalAction {
        let diag = self
            .diag
            .iter()
            .map(|d| if e >= 0 { d.pow(e as u32) } else { d.inv().pow(e.unsigned_abs()) })
            .collect();
        DiagonalAction { diag }
    }

    /// `D v`.
    pub fn apply(&self, v: &[GaussianRational]) -> Vec<GaussianRational> {
        self.diag.iter().zip(v).map(|(d, x)| d * x).collect()
    }
}

/// `D A D^-3`, entrywise `d_i a_ij d_j^-3`.
pub fn diagonal_conjugate(a: &ExactMatrix, d: &DiagonalAction) -> Result<ExactMatrix, TransformError> {
    if !a.is_square() || a.rows() != d.n() {
        return Err(TransformError::Shape(format!(
            "{}x{} matrix with {} diagonal entries",
            a.rows(),
            a.cols(),
            d.n()
        )));
    }
    let inv_cubes = d.power(-3);
    let mut out = a.clone();
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let a_ij = a.get(i, j);
            if !a_ij.is_zero() {
                out.set(i, j, &(&d.diag[i] * a_ij) * &inv_cubes.diag[j]);
            }
        }
    }
    Ok(out)
}

/// Scales a witness so that `z' * z' = z'`: `d_i = 1/z_i` for nonzero `z_i`, else 1.
pub fn normalize_witness(z: &[GaussianRational]) -> (DiagonalAction, Vec<GaussianRational>) {
    let diag: Vec<GaussianRational> = z
        .iter()
        .map(|zi| if zi.is_zero() { GaussianRational::from_int(1) } else { zi.inv() })
        .collect();
    let d = DiagonalAction { diag };
    let normalized = d.apply(z);
    (d, normalized)
}

/// Permutation listing the nonzero coordinates of `z` first, order kept.
/// Entry `p[i]` is the old index moved to position `i`.
pub fn support_first_permutation(z: &[GaussianRational]) -> Vec<usize> {
    let (mut front, back): (Vec<usize>, Vec<usize>) = (0..z.len()).partition(|&i| !z[i].is_zero());
    front.extend(back);
    front
}

/// Applies a permutation to a vector: `out[i] = v[p[i]]`.
pub fn permute_vector<T: Clone>(v: &[T], perm: &[usize]) -> Vec<T> {
    perm.iter().map(|&p| v[p].clone()).collect()
}

/// Simultaneous row and column permutation of `A`.
pub fn permute_matrix(a: &ExactMatrix, perm: &[usize]) -> ExactMatrix {
    a.permute_symmetric(perm)
}

/// Checks `(B x)^3 = L^-1 (A L x)^3` as a polynomial identity in `x`.
pub fn verify_cubic_similar(a: &ExactMatrix, b: &ExactMatrix, l: &ExactMatrix) -> Result<bool, TransformError> {
    let n = a.rows();
    for (name, m) in [("A", a), ("B", b), ("L", l)] {
        if !m.is_square() || m.rows() != n {
            return Err(TransformError::Shape(format!("{name} is {}x{}, expected {n}x{n}", m.rows(), m.cols())));
        }
    }
    let l_inv = l.inverse().map_err(|_| TransformError::SingularL)?;
    let universe = VarUniverse::new(indexed_names("x", n)).expect("distinct names");
    let x: Vec<MultiPoly> = (0..n).map(|i| MultiPoly::var_index(&universe, i)).collect();
    let lhs: Vec<MultiPoly> = apply_matrix(b, &x, &universe).iter().map(|u| u.pow(3)).collect();
    let al = a.checked_mul(l).expect("square shapes");
    let cubes: Vec<MultiPoly> = apply_matrix(&al, &x, &universe).iter().map(|u| u.pow(3)).collect();
    Ok(lhs == apply_matrix(&l_inv, &cubes, &universe))
}

/// `[[A11, A12], [0, 0]]`.
pub fn block_embed(a11: &ExactMatrix, a12: &ExactMatrix) -> Result<ExactMatrix, TransformError> {
    let k = a11.rows();
    if !a11.is_square() || a12.rows() != k {
        return Err(TransformError::Shape(format!(
            "top-left {}x{} with top-right {}x{}",
            a11.rows(),
            a11.cols(),
            a12.rows(),
            a12.cols()
        )));
    }
    let n = k + a12.cols();
    let mut out = ExactMatrix::zeros(n, n);
    for i in 0..k {
        for j in 0..k {
            out.set(i, j, a11.get(i, j).clone());
        }
        for j in 0..a12.cols() {
            out.set(i, k + j, a12.get(i, j).clone());
        }
    }
    Ok(out)
}

/// First failed necessary condition for a witness with `z = Z_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Obstruction {
    /// The leading `k x k` block is not nilpotent.
    ObstructionNilpotency,
    /// The all-ones vector is not in the image of the leading block.
    ObstructionImage,
    NoObstruction,
}

/// Necessary conditions for `(y, Z_k, A)` to be a witness: the leading
/// `k x k` block is nilpotent and its image contains `(1, ..., 1)`.
pub fn zk_image_prefilter(a: &ExactMatrix, k: usize) -> Obstruction {
    assert!(a.is_square() && (1..=a.rows()).contains(&k), "k = {k} out of range");
    let block = a.leading_block(k);
    if !block.is_nilpotent() {
        return Obstruction::ObstructionNilpotency;
    }
    if !block.in_column_space(&vec![GaussianRational::from_int(1); k]) {
        return Obstruction::ObstructionImage;
    }
    Obstruction::NoObstruction
}

/// `det(Id + diag((s z + t y)^2) A)` as a polynomial in `s, t` for scalar
/// vectors `z, y`.
pub fn pencil_polynomial(a: &ExactMatrix, z: &[GaussianRational], y: &[GaussianRational]) -> MultiPoly {
    let n = a.rows();
    let universe: Arc<VarUniverse> = VarUniverse::new(["s", "t"]).expect("distinct names");
    let s = MultiPoly::var_index(&universe, 0);
    let t = MultiPoly::var_index(&universe, 1);
    let mut m = PolyMatrix::identity(n, &universe);
    for i in 0..n {
        let w = (&s.scale(&z[i]) + &t.scale(&y[i])).pow(2);
        for j in 0..n {
            let e = m.get(i, j) + &w.scale(a.get(i, j));
            m.set(i, j, e);
        }
    }
    m.det()
}
