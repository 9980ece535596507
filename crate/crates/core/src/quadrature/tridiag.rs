use crate::error::{Error, Result};

/// Relative size below which an off-diagonal entry is treated as zero.
const DEFLATION_TOL: f64 = 1e-14;
const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;

/// Eigenvalues of a symmetric tridiagonal matrix together with the first
/// component of each normalized eigenvector, by implicit-shift QL.
///
/// `diag` has length n, `offdiag` length n − 1 (entry i couples i and i + 1).
/// Output is sorted by eigenvalue.
pub(crate) fn eigen_first_components(diag: &[f64], offdiag: &[f64]) -> Result<Vec<(f64, f64)>> {
    let n = diag.len();
    debug_assert_eq!(offdiag.len() + 1, n);
    let mut d = diag.to_vec();
    let mut e = offdiag.to_vec();
    e.push(0.0);
    let mut z = vec![0.0; n];
    z[0] = 1.0;

    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= DEFLATION_TOL * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_SWEEPS_PER_EIGENVALUE {
                return Err(Error::NumericalConstruction {
                    what: "tridiagonal QL iteration",
                    residual: e[l].abs(),
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let zf = z[i + 1];
                z[i + 1] = s * z[i] + c * zf;
                z[i] = c * z[i] - s * zf;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    let mut pairs: Vec<(f64, f64)> = d.into_iter().zip(z).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two() {
        // [[0,1],[1,0]] → ±1, first components ±1/√2
        let p = eigen_first_components(&[0.0, 0.0], &[1.0]).unwrap();
        assert!((p[0].0 + 1.0).abs() < 1e-15 && (p[1].0 - 1.0).abs() < 1e-15);
        for (_, z) in p {
            assert!((z * z - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn first_components_are_a_unit_vector() {
        let d = [1.0, -2.0, 0.5, 3.0, 0.0];
        let e = [0.3, 1.1, -0.7, 0.2];
        let p = eigen_first_components(&d, &e).unwrap();
        let s: f64 = p.iter().map(|(_, z)| z * z).sum();
        assert!((s - 1.0).abs() < 1e-14);
        // trace is preserved
        let tr: f64 = p.iter().map(|(l, _)| l).sum();
        assert!((tr - d.iter().sum::<f64>()).abs() < 1e-13);
    }

    #[test]
    fn single_entry() {
        assert_eq!(eigen_first_components(&[4.0], &[]).unwrap(), vec![(4.0, 1.0)]);
    }
}
