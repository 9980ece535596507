use super::sparse::{dot, norm2, SparseSymMatrix};
use crate::error::{Error, Result};

/// Relative residual target for every shifted or mass solve.
pub const CG_TOL: f64 = 1e-10;

/// Iteration cap used throughout: `10·n`.
pub fn default_max_iter(n: usize) -> usize {
    10 * n.max(1)
}

/// Solves `mat · x = rhs` for SPD `mat` until `‖mat·x − rhs‖₂ ≤ tol·‖rhs‖₂`.
pub fn cg_solve(mat: &SparseSymMatrix, rhs: &[f64], tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    cg_solve_observed(mat, rhs, tol, max_iter, |_| {})
}

/// Same as [`cg_solve`], calling `observe` with every iterate (the zero
/// starting guess included).
pub fn cg_solve_observed(
    mat: &SparseSymMatrix,
    rhs: &[f64],
    tol: f64,
    max_iter: usize,
    mut observe: impl FnMut(&[f64]),
) -> Result<Vec<f64>> {
    let n = mat.dim();
    if rhs.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: rhs.len(),
        });
    }
    if !(tol > 0.0) {
        return Err(Error::ParameterDomain(format!(
            "CG tolerance must be positive, got {tol}"
        )));
    }
    let mut x = vec![0.0; n];
    observe(&x);
    let bnorm = norm2(rhs);
    if bnorm == 0.0 {
        return Ok(x);
    }
    let mut r = rhs.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = dot(&r, &r);
    let target = tol * bnorm;
    for it in 0..max_iter {
        mat.mul_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::Solver {
                iterations: it,
                residual: rr.sqrt() / bnorm,
            });
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        observe(&x);
        let rr_new = dot(&r, &r);
        if rr_new.sqrt() <= target {
            // the recursive residual drifts; confirm against the true one
            let true_res = true_residual(mat, &x, rhs);
            if true_res <= target {
                return Ok(x);
            }
            r = rhs.iter().zip(mat.mul(&x)).map(|(b, ax)| b - ax).collect();
            p.copy_from_slice(&r);
            rr = dot(&r, &r);
            continue;
        }
        let beta = rr_new / rr;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_new;
    }
    Err(Error::Solver {
        iterations: max_iter,
        residual: true_residual(mat, &x, rhs) / bnorm,
    })
}

fn true_residual(mat: &SparseSymMatrix, x: &[f64], rhs: &[f64]) -> f64 {
    let ax = mat.mul(x);
    ax.iter().zip(rhs).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}
