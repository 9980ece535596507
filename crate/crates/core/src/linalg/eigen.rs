//! Extreme eigenvalues of the pencil `(stiff, mass)`.

use super::cg::{cg_solve, default_max_iter};
use super::sparse::{dot, SparseSymMatrix};
use crate::error::{Error, Result};

/// Lower and upper spectrum bounds of `A = mass⁻¹·stiff`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumBounds {
    pub lower: f64,
    pub upper: f64,
}

impl SpectrumBounds {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower > 0.0 && lower <= upper && upper.is_finite()) {
            return Err(Error::ParameterDomain(format!(
                "spectrum bounds need 0 < lower <= upper, got ({lower}, {upper})"
            )));
        }
        Ok(Self { lower, upper })
    }

    /// Lower bound nudged below the computed Rayleigh quotient so that it
    /// never exceeds the smallest eigenvalue.
    pub fn safe_lower(&self) -> f64 {
        self.lower * (1.0 - 1e-8)
    }
}

const INNER_TOL: f64 = 1e-12;
const MAX_OUTER: usize = 50_000;

/// Smallest eigenvalue by inverse iteration and largest by power iteration,
/// both on the generalized problem `stiff·φ = λ·mass·φ`. Each returned value is a
/// Rayleigh quotient, so `lower ≥ λ_min` and `upper ≤ λ_max` up to round-off.
pub fn spectrum_bounds(stiff: &SparseSymMatrix, mass: &SparseSymMatrix, tol: f64) -> Result<SpectrumBounds> {
    if stiff.dim() != mass.dim() {
        return Err(Error::DimensionMismatch {
            expected: stiff.dim(),
            got: mass.dim(),
        });
    }
    let lower = smallest_eigenvalue(stiff, mass, tol)?;
    let upper = largest_eigenvalue(stiff, mass, tol)?;
    SpectrumBounds::new(lower, upper.max(lower))
}

fn rayleigh(stiff: &SparseSymMatrix, mass: &SparseSymMatrix, x: &[f64]) -> f64 {
    stiff.quad_form(x) / mass.quad_form(x)
}

fn normalize_mass(mass: &SparseSymMatrix, x: &mut [f64]) {
    let nrm = mass.quad_form(x).sqrt();
    x.iter_mut().for_each(|v| *v /= nrm);
}

pub(crate) fn smallest_eigenvalue(stiff: &SparseSymMatrix, mass: &SparseSymMatrix, tol: f64) -> Result<f64> {
    let n = stiff.dim();
    let cap = default_max_iter(n);
    let mut x = vec![1.0; n];
    normalize_mass(mass, &mut x);
    let mut lambda = rayleigh(stiff, mass, &x);
    for it in 1..=MAX_OUTER {
        let rhs = mass.mul(&x);
        x = cg_solve(stiff, &rhs, INNER_TOL, cap)?;
        normalize_mass(mass, &mut x);
        let next = rayleigh(stiff, mass, &x);
        let change = (next - lambda).abs() / next.abs();
        lambda = next;
        if change <= tol && it > 1 {
            return Ok(lambda);
        }
    }
    Err(Error::Eigensolver {
        which: "inverse",
        iterations: MAX_OUTER,
        residual: f64::NAN,
    })
}

pub(crate) fn largest_eigenvalue(stiff: &SparseSymMatrix, mass: &SparseSymMatrix, tol: f64) -> Result<f64> {
    let n = stiff.dim();
    let cap = default_max_iter(n);
    // deterministic start with energy in the oscillatory modes
    let mut x: Vec<f64> = (0..n)
        .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 } * (1.0 + 0.5 * ((i as f64) * 0.73).sin()))
        .collect();
    normalize_mass(mass, &mut x);
    let mut lambda = rayleigh(stiff, mass, &x);
    let mut change = f64::INFINITY;
    for it in 1..=MAX_OUTER {
        let rhs = stiff.mul(&x);
        x = cg_solve(mass, &rhs, INNER_TOL, cap)?;
        normalize_mass(mass, &mut x);
        let next = rayleigh(stiff, mass, &x);
        change = (next - lambda).abs() / next.abs();
        lambda = next;
        if change <= tol && it > 1 {
            return Ok(lambda);
        }
    }
    Err(Error::Eigensolver {
        which: "power",
        iterations: MAX_OUTER,
        residual: change,
    })
}

/// Mass inner product `xᵀ·mass·y`.
pub fn mass_dot(mass: &SparseSymMatrix, x: &[f64], y: &[f64]) -> f64 {
    dot(x, &mass.mul(y))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_pencil() {
        let s = SparseSymMatrix::from_diagonal(&[2.0, 8.0]).unwrap();
        let m = SparseSymMatrix::identity(2).unwrap();
        let b = spectrum_bounds(&s, &m, 1e-12).unwrap();
        assert!((b.lower - 2.0).abs() < 1e-10);
        assert!((b.upper - 8.0).abs() < 1e-10);
    }

    #[test]
    fn scalar_pencil() {
        let s = SparseSymMatrix::from_diagonal(&[4.0]).unwrap();
        let m = SparseSymMatrix::from_diagonal(&[2.0]).unwrap();
        let b = spectrum_bounds(&s, &m, 1e-12).unwrap();
        assert!((b.lower - 2.0).abs() < 1e-14 && (b.upper - 2.0).abs() < 1e-14);
        assert!(b.safe_lower() < b.lower);
    }

    #[test]
    fn bad_bounds_rejected() {
        assert!(SpectrumBounds::new(0.0, 1.0).is_err());
        assert!(SpectrumBounds::new(2.0, 1.0).is_err());
    }
}
