//! Small dense routines used as oracles: Cholesky factorization and a cyclic
//! Jacobi eigensolver for the generalized symmetric problem.

use super::sparse::SparseSymMatrix;
use crate::error::{Error, Result};

/// Largest pencil the dense oracle accepts.
pub const DENSE_CAP: usize = 5000;

/// Square row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_sparse(m: &SparseSymMatrix) -> Self {
        let n = m.dim();
        let mut out = Self::zeros(n);
        for i in 0..n {
            for (j, v) in m.row(i) {
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Lower Cholesky factor `L` with `self = L·Lᵀ`.
    pub fn cholesky(&self) -> Result<DenseMatrix> {
        let n = self.n;
        let mut l = DenseMatrix::zeros(n);
        for j in 0..n {
            let mut d = self[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if !(d > 0.0) {
                return Err(Error::NotPositiveDefinite { pivot: j, value: d });
            }
            let d = d.sqrt();
            l[(j, j)] = d;
            for i in j + 1..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / d;
            }
        }
        Ok(l)
    }

    /// Solves `self·x = b` given that `self` is a lower-triangular factor.
    pub fn forward_subst(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        for i in 0..self.n {
            let mut s = x[i];
            for k in 0..i {
                s -= self[(i, k)] * x[k];
            }
            x[i] = s / self[(i, i)];
        }
        x
    }

    /// Solves `selfᵀ·x = b` for lower-triangular `self`.
    pub fn backward_subst_transposed(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        for i in (0..self.n).rev() {
            let mut s = x[i];
            for k in i + 1..self.n {
                s -= self[(k, i)] * x[k];
            }
            x[i] = s / self[(i, i)];
        }
        x
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// Direct solve of an SPD sparse system through a dense Cholesky factor.
pub fn dense_spd_solve(m: &SparseSymMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if m.dim() > DENSE_CAP {
        return Err(Error::DimensionCap {
            n: m.dim(),
            cap: DENSE_CAP,
        });
    }
    let l = DenseMatrix::from_sparse(m).cholesky()?;
    Ok(l.backward_subst_transposed(&l.forward_subst(b)))
}

/// Eigenpairs of `stiff·φ = λ·mass·φ`: eigenvalues ascending, eigenvectors
/// normalized so that `φᵢᵀ·mass·φⱼ = δᵢⱼ`.
#[derive(Debug, Clone)]
pub struct GeneralizedEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

pub fn dense_generalized_eig(stiff: &SparseSymMatrix, mass: &SparseSymMatrix) -> Result<GeneralizedEigen> {
    let n = stiff.dim();
    if n > DENSE_CAP {
        return Err(Error::DimensionCap { n, cap: DENSE_CAP });
    }
    if mass.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: mass.dim(),
        });
    }
    let l = DenseMatrix::from_sparse(mass).cholesky()?;
    let s = DenseMatrix::from_sparse(stiff);

    // C = L⁻¹ S L⁻ᵀ, built column by column then symmetrized
    let mut tmp = DenseMatrix::zeros(n); // L⁻¹ S
    for j in 0..n {
        let col: Vec<f64> = (0..n).map(|i| s[(i, j)]).collect();
        let y = l.forward_subst(&col);
        for i in 0..n {
            tmp[(i, j)] = y[i];
        }
    }
    let mut c = DenseMatrix::zeros(n); // (L⁻¹ (L⁻¹ S)ᵀ)
    for i in 0..n {
        let row: Vec<f64> = (0..n).map(|j| tmp[(i, j)]).collect();
        let y = l.forward_subst(&row);
        for j in 0..n {
            c[(j, i)] = y[j];
        }
    }
    for i in 0..n {
        for j in 0..i {
            let avg = 0.5 * (c[(i, j)] + c[(j, i)]);
            c[(i, j)] = avg;
            c[(j, i)] = avg;
        }
    }

    let (values, y) = jacobi_eigen(c)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out_values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    for k in order {
        out_values.push(values[k]);
        let col: Vec<f64> = (0..n).map(|i| y[(i, k)]).collect();
        vectors.push(l.backward_subst_transposed(&col));
    }
    Ok(GeneralizedEigen {
        values: out_values,
        vectors,
    })
}

/// Cyclic Jacobi rotations. Returns eigenvalues (unsorted) and the matrix
/// whose columns are the orthonormal eigenvectors.
fn jacobi_eigen(mut a: DenseMatrix) -> Result<(Vec<f64>, DenseMatrix)> {
    let n = a.dim();
    let mut v = DenseMatrix::zeros(n);
    for i in 0..n {
        v[(i, i)] = 1.0;
    }
    let frob: f64 = a.data.iter().map(|x| x * x).sum::<f64>().sqrt();
    if frob == 0.0 {
        return Ok((vec![0.0; n], v));
    }
    const MAX_SWEEPS: usize = 100;
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..i {
                off += a[(i, j)] * a[(i, j)];
            }
        }
        if off.sqrt() <= 1e-15 * frob {
            let vals = (0..n).map(|i| a[(i, i)]).collect();
            return Ok((vals, v));
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                // A ← Jᵀ A J on rows/columns p, q
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = cs * akp - sn * akq;
                    a[(k, q)] = sn * akp + cs * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = cs * apk - sn * aqk;
                    a[(q, k)] = sn * apk + cs * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = cs * vkp - sn * vkq;
                    v[(k, q)] = sn * vkp + cs * vkq;
                }
            }
        }
    }
    Err(Error::NumericalConstruction {
        what: "Jacobi eigendecomposition",
        residual: f64::NAN,
    })
}
