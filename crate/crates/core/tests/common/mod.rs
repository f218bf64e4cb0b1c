#![allow(dead_code)]

use std::collections::HashMap;
use std::sync::Arc;
use std::time::Duration;

use keller_algebra::{ExactMatrix, GaussianRational, MultiPoly, PolyMatrix, VarUniverse};
use keller_core::checker::{c1_fast_path, check_c1, with_timeout, CheckConfig};
use keller_core::randgen::{random_dense, random_diagonal, random_structured, Family, GenSpec};
use keller_core::sysbuild::{c1_system, c2_system, indexed_names, transformed_rows};
use keller_core::transform::{block_embed, diagonal_conjugate, pencil_polynomial, DiagonalAction};
use keller_core::{FastPath, Provenance, Status};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const INSTANCES: u64 = 50;

pub type SuiteResult = Result<String, String>;

pub fn a0() -> ExactMatrix {
    ExactMatrix::from_int_rows(&[&[1, -1], &[1, -1]])
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn int(v: i64) -> GaussianRational {
    GaussianRational::from_int(v)
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize, bound: i64) -> Vec<GaussianRational> {
    (0..n).map(|_| int(rng.gen_range(-bound..=bound))).collect()
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, bound: i64) -> ExactMatrix {
    let mut m = ExactMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m.set(i, j, int(rng.gen_range(-bound..=bound)));
        }
    }
    m
}

pub fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Maps `z_i -> dz_i z_i` and `y_i -> dy_i y_i` in a polynomial over `z, y`.
pub fn scale_zy(p: &MultiPoly, dz: &[GaussianRational], dy: &[GaussianRational]) -> MultiPoly {
    let u = p.universe().clone();
    let n = dz.len();
    let mut assignment = HashMap::new();
    for i in 0..n {
        assignment.insert(i, MultiPoly::var_index(&u, i).scale(&dz[i]));
        assignment.insert(n + i, MultiPoly::var_index(&u, n + i).scale(&dy[i]));
    }
    p.substitute(&assignment, &u).expect("same universe")
}

fn status_c1(a: &ExactMatrix, cfg: &CheckConfig) -> Status {
    check_c1(a, cfg).expect("well-formed input").status
}

/// Configuration for a property suite: exact, bounded per check.
pub fn suite_config() -> CheckConfig {
    with_timeout(CheckConfig::default(), Some(Duration::from_secs(60)))
}

/// Rank one implies C1.
pub fn rank_one_suite() -> SuiteResult {
    let cfg = suite_config();
    for seed in 0..INSTANCES {
        let n = 2 + (seed % 5) as usize;
        let a = random_structured(&GenSpec::new(Family::RankR, n, 1, seed)).map_err(|e| e.to_string())?;
        ensure(a.rank() == 1, || format!("seed {seed}: rank {}", a.rank()))?;
        let v = check_c1(&a, &cfg).map_err(|e| e.to_string())?;
        ensure(v.holds(), || format!("seed {seed}: C1 {}", v.status))?;
        ensure(v.fast_path == Some(FastPath::RankAtMostOne), || format!("seed {seed}: {:?}", v.fast_path))?;
    }
    Ok(format!("{INSTANCES} rank-one matrices, n = 2..6"))
}

/// Upper and lower triangular matrices satisfy C1.
pub fn triangular_suite() -> SuiteResult {
    let cfg = suite_config();
    for seed in 0..INSTANCES {
        let n = 2 + (seed % 5) as usize;
        let upper = random_structured(&GenSpec::new(Family::Triangular, n, n, seed)).map_err(|e| e.to_string())?;
        let a = if seed % 2 == 0 { upper } else { upper.transpose() };
        ensure(a.is_upper_triangular() || a.is_lower_triangular(), || format!("seed {seed}: not triangular"))?;
        let v = check_c1(&a, &cfg).map_err(|e| e.to_string())?;
        ensure(v.holds(), || format!("seed {seed}: C1 {}", v.status))?;
        ensure(v.fast_path.is_some(), || format!("seed {seed}: no structural rule fired"))?;
    }
    Ok(format!("{INSTANCES} triangular matrices, n = 2..6"))
}

/// Dense matrices drawn until every principal minor is nonzero.
pub fn nonzero_minor_matrix(n: usize, seed: u64) -> ExactMatrix {
    (0..)
        .map(|attempt| random_dense(n, 25, seed * 1000 + attempt))
        .find(ExactMatrix::all_principal_minors_nonzero)
        .expect("unbounded search")
}

/// All principal minors nonzero implies C1.
pub fn nonzero_minors_suite() -> SuiteResult {
    let cfg = suite_config();
    for seed in 0..INSTANCES {
        let n = 2 + (seed % 5) as usize;
        let a = nonzero_minor_matrix(n, seed);
        let v = check_c1(&a, &cfg).map_err(|e| e.to_string())?;
        ensure(v.holds(), || format!("seed {seed}: C1 {}", v.status))?;
        ensure(v.fast_path.is_some(), || format!("seed {seed}: no structural rule fired"))?;
    }
    Ok(format!("{INSTANCES} dense matrices with nonzero principal minors, n = 2..6"))
}

/// `C1([[A11, A12], [0, 0]]) = C1(A11)` for 2x2 tops, decided by Groebner
/// runs on both sides.
pub fn block_suite() -> SuiteResult {
    let cfg = suite_config().without_fast_paths();
    let mut holds = 0;
    for seed in 0..INSTANCES {
        let mut r = rng(seed);
        let a11 = random_matrix(&mut r, 2, 2, 3);
        let a12 = random_matrix(&mut r, 2, 1, 3);
        let big = block_embed(&a11, &a12).map_err(|e| e.to_string())?;
        let (top, whole) = (status_c1(&a11, &cfg), status_c1(&big, &cfg));
        ensure(top != Status::Unknown && top == whole, || format!("seed {seed}: top {top}, embedded {whole}"))?;
        holds += usize::from(top == Status::Holds);
    }
    Ok(format!("{INSTANCES} pairs agree ({holds} HOLDS)"))
}

/// Substituting `z = A x` into the cubic rows gives `A (x + (Ax)^3 + (Ax) y^2)`.
pub fn transform_identity_suite() -> SuiteResult {
    for seed in 0..INSTANCES {
        let mut r = rng(seed);
        let n = 1 + (seed % 4) as usize;
        let a = random_matrix(&mut r, n, n, 9);
        let (lhs, rhs) = transformed_rows(&a).map_err(|e| e.to_string())?;
        ensure(lhs == rhs, || format!("seed {seed}: identity fails for n = {n}"))?;
    }
    Ok(format!("{INSTANCES} matrices, n = 1..4"))
}

/// The diagonal action `(y, z, A) -> (D y, D z, D A D^-3)` fixes the pencil
/// polynomial and multiplies the cubic rows by `D`.
pub fn equivariance_suite() -> SuiteResult {
    for seed in 0..INSTANCES {
        let mut r = rng(seed);
        let n = 1 + (seed % 4) as usize;
        let a = random_matrix(&mut r, n, n, 5);
        let d = random_diagonal(n, 4, seed);
        let b = diagonal_conjugate(&a, &d).map_err(|e| e.to_string())?;
        let z = random_vector(&mut r, n, 5);
        let y = random_vector(&mut r, n, 5);
        let before = pencil_polynomial(&a, &z, &y);
        let after = pencil_polynomial(&b, &d.apply(&z), &d.apply(&y));
        ensure(before == after, || format!("seed {seed}: pencil changed"))?;

        let rows_a = c1_system(&a).map_err(|e| e.to_string())?;
        let rows_b = c1_system(&b).map_err(|e| e.to_string())?;
        let dd = d.entries();
        for ((pa, pb), tag) in rows_a.generators().iter().zip(rows_b.generators()).zip(rows_a.provenance()) {
            if let Provenance::CubicRow { row } = *tag {
                let moved = scale_zy(pb, dd, dd);
                ensure(moved == pa.scale(&dd[row]), || format!("seed {seed}: row {row} not equivariant"))?;
            }
        }
    }
    Ok(format!("{INSTANCES} (A, D, z, y) samples, n = 1..4"))
}

/// `Delta[(B x)^2] B = L^-1 Delta[(A L x)^2] A L` for `B = D A D^-3`, `L = D^-3`.
pub fn jacobian_identity_suite() -> SuiteResult {
    for seed in 0..INSTANCES {
        let mut r = rng(seed);
        let n = 1 + (seed % 3) as usize;
        let a = random_matrix(&mut r, n, n, 5);
        let d = random_diagonal(n, 4, seed);
        let b = diagonal_conjugate(&a, &d).map_err(|e| e.to_string())?;
        let l = d.power(-3).matrix();
        let universe = VarUniverse::new(indexed_names("x", n)).expect("distinct names");
        let lhs = jacobian_form(&b, &ExactMatrix::identity(n), &universe);
        let l_inv = PolyMatrix::from_scalar(&l.inverse().map_err(|e| e.to_string())?, &universe);
        let rhs = &l_inv * &jacobian_form(&a, &l, &universe);
        ensure(lhs == rhs, || format!("seed {seed}: Jacobian identity fails for n = {n}"))?;
    }
    Ok(format!("{INSTANCES} (A, D) samples, n = 1..3"))
}

/// `Delta[(M L x)^2] M L` as a polynomial matrix in `x`.
fn jacobian_form(m: &ExactMatrix, l: &ExactMatrix, universe: &Arc<VarUniverse>) -> PolyMatrix {
    let n = m.rows();
    let ml = m.checked_mul(l).expect("square shapes");
    let x: Vec<MultiPoly> = (0..n).map(|i| MultiPoly::var_index(universe, i)).collect();
    let lin = PolyMatrix::from_scalar(&ml, universe).mul_vec(&x);
    let mut diag = PolyMatrix::identity(n, universe);
    for (i, li) in lin.iter().enumerate() {
        diag.set(i, i, li.pow(2));
    }
    &diag * &PolyMatrix::from_scalar(&ml, universe)
}

/// `D A` nilpotent iff `A D` nilpotent, with nilpotent cases planted.
pub fn nilpotency_transfer_suite() -> SuiteResult {
    let mut nilpotent = 0;
    for seed in 0..INSTANCES {
        let mut r = rng(seed);
        let n = 1 + (seed % 5) as usize;
        let d = random_diagonal(n, 5, seed);
        let dm = d.matrix();
        let a = if seed % 2 == 0 {
            // D^-1 N with N strictly upper triangular after a permutation.
            let mut nmat = ExactMatrix::zeros(n, n);
            for i in 0..n {
                for j in i + 1..n {
                    nmat.set(i, j, int(r.gen_range(-5..=5)));
                }
            }
            let perm: Vec<usize> = (0..n).rev().collect();
            let p = nmat.permute_symmetric(&perm);
            d.power(-1).matrix().checked_mul(&p).map_err(|e| e.to_string())?
        } else {
            random_matrix(&mut r, n, n, 5)
        };
        let da = dm.checked_mul(&a).map_err(|e| e.to_string())?.is_nilpotent();
        let ad = a.checked_mul(&dm).map_err(|e| e.to_string())?.is_nilpotent();
        ensure(da == ad, || format!("seed {seed}: DA nilpotent {da}, AD nilpotent {ad}"))?;
        nilpotent += usize::from(da);
    }
    ensure(nilpotent >= (INSTANCES / 2) as usize, || format!("only {nilpotent} nilpotent samples"))?;
    Ok(format!("{INSTANCES} (A, D) samples, n = 1..5, {nilpotent} nilpotent"))
}

/// The W_n action `(z, y, A) -> (D z, D^3 y, D A D^-3)` fixes the C2 pencil
/// and multiplies the C2 cubic rows by `D`.
pub fn w_action_suite() -> SuiteResult {
    for seed in 0..INSTANCES {
        let mut r = rng(seed);
        let n = 1 + (seed % 3) as usize;
        let a = random_matrix(&mut r, n, n, 4);
        let d = random_diagonal(n, 3, seed);
        let b = diagonal_conjugate(&a, &d).map_err(|e| e.to_string())?;
        let sys_a = c2_system(&a, false).map_err(|e| e.to_string())?;
        let sys_b = c2_system(&b, false).map_err(|e| e.to_string())?;
        ensure(sys_a.len() == sys_b.len(), || format!("seed {seed}: generator counts differ"))?;
        let dd = d.entries();
        let d3 = d.power(3);
        for ((pa, pb), tag) in sys_a.generators().iter().zip(sys_b.generators()).zip(sys_a.provenance()) {
            let moved = scale_zy(pb, dd, d3.entries());
            let expected = match *tag {
                Provenance::CubicRow { row } => pa.scale(&dd[row]),
                _ => pa.clone(),
            };
            ensure(moved == expected, || format!("seed {seed}: generator {tag} not equivariant"))?;
        }
    }
    Ok(format!("{INSTANCES} (A, D) samples, n = 1..3"))
}

pub fn diag(entries: &[i64]) -> DiagonalAction {
    DiagonalAction::new(entries.iter().map(|&v| int(v)).collect()).expect("nonzero entries")
}

pub fn fast_path_of(a: &ExactMatrix) -> Option<FastPath> {
    c1_fast_path(a)
}

pub fn names(stem: &str, n: usize) -> Vec<String> {
    indexed_names(stem, n)
}
