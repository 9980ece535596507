//! Sums of shifted resolvents `R(z) = Σ d_m / (c_m + z)` approximating
//! `z^(−β)` (negative-power form) or `1/(ν + z^α)` (resolvent form), and
//! their action on a discrete operator through shifted linear solves.
//!
//! Both forms come from the substitution `θ = μ(1 − η)/(1 + η)` in an
//! integral over `(A + θ I)^(−1)`, followed by a Gauss rule in `η`:
//!
//! ```text
//! c_m = μ (1 − η_m)/(1 + η_m),   d_m = (2 μ^(1−p) sin(πp)/π) · ω_m/(1 + η_m)
//! ```
//!
//! where `p` is β or α and `(η_m, ω_m)` is the Gauss rule for the weight
//! `(1 − η)^(−p) (1 + η)^(p−1)` (times `g(η; ν, α)` in the resolvent form).

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fem::DiscreteOperator;
use crate::linalg::{cg_solve, default_max_iter, SparseSymMatrix, CG_TOL};
use crate::quadrature::{gauss_custom, gauss_jacobi, QuadratureRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApproxKind {
    /// `R_M(z) ≈ z^(−β)`.
    NegativePower,
    /// `R_M(z; ν) ≈ (ν + z^α)^(−1)`.
    Resolvent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RationalApprox {
    shifts: Vec<f64>,
    coeffs: Vec<f64>,
    mu: f64,
    exponent: f64,
    nu: f64,
    kind: ApproxKind,
}

/// `γ̄ = Σ d_m = lim_{z→∞} z·R(z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaBound(pub f64);

impl GammaBound {
    pub fn value(self) -> f64 {
        self.0
    }

    /// Explicit-scheme step limit `2/γ̄`.
    pub fn step_limit(self) -> f64 {
        2.0 / self.0
    }
}

fn check_unit_interval(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::ParameterDomain(format!("{name} must lie in (0, 1), got {v}")))
    }
}

fn check_mu(mu: f64) -> Result<()> {
    if mu > 0.0 && mu.is_finite() {
        Ok(())
    } else {
        Err(Error::ParameterDomain(format!("mu must be positive, got {mu}")))
    }
}

impl RationalApprox {
    fn from_rule(rule: &QuadratureRule, exponent: f64, mu: f64, nu: f64, kind: ApproxKind) -> Self {
        let scale = 2.0 * mu.powf(1.0 - exponent) * (PI * exponent).sin() / PI;
        let (shifts, coeffs) = rule
            .iter()
            .map(|(eta, w)| {
                let lo = 1.0 + eta;
                (mu * (1.0 - eta) / lo, scale * w / lo)
            })
            .unzip();
        Self {
            shifts,
            coeffs,
            mu,
            exponent,
            nu,
            kind,
        }
    }

    /// Builds from explicit shifts and coefficients.
    pub fn from_parts(
        shifts: Vec<f64>,
        coeffs: Vec<f64>,
        mu: f64,
        exponent: f64,
        nu: f64,
        kind: ApproxKind,
    ) -> Result<Self> {
        if shifts.is_empty() || shifts.len() != coeffs.len() {
            return Err(Error::ParameterDomain(
                "shifts and coefficients must be non-empty and of equal length".into(),
            ));
        }
        if shifts.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(Error::ParameterDomain("shifts must be finite and >= 0".into()));
        }
        if coeffs.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
            return Err(Error::ParameterDomain("coefficients must be positive".into()));
        }
        Ok(Self {
            shifts,
            coeffs,
            mu,
            exponent,
            nu,
            kind,
        })
    }

    pub fn shifts(&self) -> &[f64] {
        &self.shifts
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn kind(&self) -> ApproxKind {
        self.kind
    }

    pub fn order(&self) -> usize {
        self.shifts.len()
    }

    /// `Σ d_m / (c_m + z)`.
    pub fn eval_scalar(&self, z: f64) -> Result<f64> {
        if !z.is_finite() || self.shifts.iter().any(|&c| c + z <= 0.0) {
            return Err(Error::ParameterDomain(format!(
                "rational approximation evaluated at a pole or non-positive point z = {z}"
            )));
        }
        Ok(self.sum_resolvents(z))
    }

    fn sum_resolvents(&self, z: f64) -> f64 {
        self.shifts.iter().zip(&self.coeffs).map(|(c, d)| d / (c + z)).sum()
    }

    /// Function being approximated: `z^(−β)` or `1/(ν + z^α)`.
    pub fn target(&self, z: f64) -> f64 {
        match self.kind {
            ApproxKind::NegativePower => z.powf(-self.exponent),
            ApproxKind::Resolvent => 1.0 / (self.nu + z.powf(self.exponent)),
        }
    }

    pub fn gamma_bar(&self) -> GammaBound {
        GammaBound(self.coeffs.iter().sum())
    }

    /// Applies `Σ d_m (c_m I + A)^(−1)` to `v`, with `A = mass⁻¹·stiff`.
    pub fn apply(&self, op: &DiscreteOperator, v: &[f64]) -> Result<Vec<f64>> {
        ShiftedSolver::new(self, op)?.apply(v)
    }
}

/// Rational approximation of `z^(−β)` from the Gauss-Jacobi rule with
/// exponents `(−β, β − 1)`.
pub fn build_negative_power(beta: f64, mu: f64, m: usize) -> Result<RationalApprox> {
    check_unit_interval("beta", beta)?;
    check_mu(mu)?;
    let rule = gauss_jacobi(m, -beta, beta - 1.0)?;
    Ok(RationalApprox::from_rule(
        &rule,
        beta,
        mu,
        0.0,
        ApproxKind::NegativePower,
    ))
}

/// Rational approximation of `(ν + z^α)^(−1)` from the Gauss rule for the
/// resolvent weight. For `ν = 0` this reproduces [`build_negative_power`]
/// with `β = α`.
pub fn build_resolvent(alpha: f64, nu: f64, mu: f64, m: usize) -> Result<RationalApprox> {
    check_unit_interval("alpha", alpha)?;
    check_mu(mu)?;
    let rule = gauss_custom(m, nu, alpha, mu)?;
    Ok(RationalApprox::from_rule(&rule, alpha, mu, nu, ApproxKind::Resolvent))
}

/// Log-spaced sample points on `[lo, hi]`, endpoints included.
pub fn log_samples(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count <= 1 || hi <= lo {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| match i {
            0 => lo,
            _ if i + 1 == count => hi,
            _ => (a + (b - a) * i as f64 / (count - 1) as f64).exp(),
        })
        .collect()
}

/// Outcome of sampling `ν·R(z; ν) ≤ 1` over a spectrum interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolventCheck {
    pub holds: bool,
    /// `max_z (ν·R(z; ν) − 1)`; non-positive when the condition holds.
    pub max_excess: f64,
    pub worst_z: f64,
}

/// Samples count points (log-spaced) of `[lower, upper]` and checks `R(z; ν) ≤ 1/ν`,
/// the scalar form of `R⁻¹(A; ν) ≥ ν I`.
pub fn check_resolvent_bound(r: &RationalApprox, lower: f64, upper: f64, count: usize) -> ResolventCheck {
    let mut worst = (f64::NEG_INFINITY, lower);
    for z in log_samples(lower, upper, count) {
        let excess = r.nu * r.sum_resolvents(z) - 1.0;
        if excess > worst.0 {
            worst = (excess, z);
        }
    }
    ResolventCheck {
        holds: worst.0 <= 1e-12,
        max_excess: worst.0,
        worst_z: worst.1,
    }
}

/// Pre-assembled shifted matrices `c_m·mass + stiff` for repeated application
/// of a rational approximation.
pub struct ShiftedSolver<'a> {
    approx: &'a RationalApprox,
    op: &'a DiscreteOperator,
    shifted: Vec<SparseSymMatrix>,
}

impl<'a> ShiftedSolver<'a> {
    pub fn new(approx: &'a RationalApprox, op: &'a DiscreteOperator) -> Result<Self> {
        let shifted = approx
            .shifts
            .iter()
            .map(|&c| op.mass().lin_comb(c, op.stiff(), 1.0))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { approx, op, shifted })
    }

    pub fn approx(&self) -> &RationalApprox {
        self.approx
    }

    /// `x_m = (c_m I + A)^(−1) v` for every m, i.e. `(c_m·mass + stiff) x_m = mass·v`.
    /// Solves run in parallel; the output order is fixed.
    pub fn solve_each(&self, v: &[f64]) -> Result<Vec<Vec<f64>>> {
        let n = self.op.dim();
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: v.len(),
            });
        }
        // the systems are linear; solving for rhs/scale keeps inner products
        // of rapidly growing iterates from overflowing
        let mut rhs = self.op.mass().mul(v);
        let scale = rhs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if !scale.is_finite() {
            return Err(Error::ParameterDomain(
                "non-finite vector passed to a shifted solve".into(),
            ));
        }
        if scale > 0.0 {
            rhs.iter_mut().for_each(|x| *x /= scale);
        }
        let cap = default_max_iter(n);
        self.shifted
            .par_iter()
            .map(|mat| {
                let mut x = cg_solve(mat, &rhs, CG_TOL, cap)?;
                if scale > 0.0 {
                    x.iter_mut().for_each(|xi| *xi *= scale);
                }
                Ok(x)
            })
            .collect()
    }

    /// `Σ d_m x_m`, summed in index order.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        let xs = self.solve_each(v)?;
        let mut out = vec![0.0; v.len()];
        for (d, x) in self.approx.coeffs.iter().zip(&xs) {
            for (o, xi) in out.iter_mut().zip(x) {
                *o += d * xi;
            }
        }
        Ok(out)
    }

    /// `A·R(A) v = Σ d_m (v − c_m x_m)`, using `A (cI + A)^(−1) = I − c (cI + A)^(−1)`.
    pub fn apply_times_operator(&self, v: &[f64]) -> Result<Vec<f64>> {
        let xs = self.solve_each(v)?;
        let mut out = vec![0.0; v.len()];
        for ((d, c), x) in self.approx.coeffs.iter().zip(&self.approx.shifts).zip(&xs) {
            for ((o, vi), xi) in out.iter_mut().zip(v).zip(x) {
                *o += d * (vi - c * xi);
            }
        }
        Ok(out)
    }
}
