//! Gauss rules on (−1, 1) built from three-term recurrence coefficients.
//!
//! Nodes and weights always come from the symmetric tridiagonal (Jacobi)
//! matrix of the recurrence: nodes are its eigenvalues and each weight is the
//! total mass of the weight function times the squared first component of
//! the matching eigenvector.

mod resolvent;
mod tridiag;

pub use resolvent::{gauss_custom, resolvent_weight};

use crate::error::{Error, Result};
use statrs::function::gamma::ln_gamma;

/// Weight function a rule was built for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightKind {
    /// `(1 − η)^a (1 + η)^b`.
    Jacobi { a: f64, b: f64 },
    /// `(1 − η)^(−α) (1 + η)^(α−1) g(η; ν, α)` with the resolvent factor `g`
    /// depending on the transform parameter `μ`.
    Resolvent { nu: f64, alpha: f64, mu: f64 },
}

impl WeightKind {
    /// Value of the weight at a point given by its distances to the
    /// endpoints, `lo = 1 + η` and `hi = 1 − η`.
    pub fn eval_offsets(&self, lo: f64, hi: f64) -> f64 {
        match *self {
            WeightKind::Jacobi { a, b } => hi.powf(a) * lo.powf(b),
            WeightKind::Resolvent { nu, alpha, mu } => resolvent_weight(lo, hi, nu, alpha, mu),
        }
    }

    pub fn eval(&self, eta: f64) -> f64 {
        self.eval_offsets(1.0 + eta, 1.0 - eta)
    }
}

/// Nodes ascending in (−1, 1) with positive weights.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    weight_kind: WeightKind,
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight_kind(&self) -> WeightKind {
        self.weight_kind
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `Σ ω_m f(η_m)`, approximating `∫ f(η) W(η) dη`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }
}

/// Monic three-term recurrence `π_{k+1} = (η − a_k) π_k − b_k π_{k−1}`,
/// with `b_0` holding the total mass.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Recurrence {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl Recurrence {
    pub fn gauss_rule(&self, weight_kind: WeightKind) -> Result<QuadratureRule> {
        let m = self.a.len();
        let off: Vec<f64> = self.b[1..m].iter().map(|b| b.sqrt()).collect();
        let pairs = tridiag::eigen_first_components(&self.a, &off)?;
        let mass = self.b[0];
        let (nodes, weights): (Vec<f64>, Vec<f64>) = pairs.into_iter().map(|(x, z)| (x, mass * z * z)).unzip();
        Ok(QuadratureRule {
            nodes,
            weights,
            weight_kind,
        })
    }
}

fn check_order(m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::ParameterDomain("quadrature order must be at least 1".into()));
    }
    Ok(())
}

/// `∫ (1 − η)^a (1 + η)^b dη` over (−1, 1).
pub fn jacobi_mass(a: f64, b: f64) -> f64 {
    ((a + b + 1.0) * std::f64::consts::LN_2 + ln_gamma(a + 1.0) + ln_gamma(b + 1.0) - ln_gamma(a + b + 2.0)).exp()
}

pub(crate) fn jacobi_recurrence(m: usize, a: f64, b: f64) -> Recurrence {
    let ab = a + b;
    let mut ra = Vec::with_capacity(m);
    let mut rb = Vec::with_capacity(m);
    for k in 0..m {
        let kf = k as f64;
        let s = 2.0 * kf + ab;
        ra.push(if k == 0 {
            (b - a) / (ab + 2.0)
        } else {
            (b * b - a * a) / (s * (s + 2.0))
        });
        rb.push(match k {
            0 => jacobi_mass(a, b),
            // the general expression is 0/0 at k = 1 when a + b = −1
            1 => 4.0 * (a + 1.0) * (b + 1.0) / ((ab + 2.0) * (ab + 2.0) * (ab + 3.0)),
            _ => 4.0 * kf * (kf + a) * (kf + b) * (kf + ab) / (s * s * (s + 1.0) * (s - 1.0)),
        });
    }
    Recurrence { a: ra, b: rb }
}

/// M-point Gauss-Jacobi rule for the weight `(1 − η)^a_exp (1 + η)^b_exp`.
pub fn gauss_jacobi(m: usize, a_exp: f64, b_exp: f64) -> Result<QuadratureRule> {
    check_order(m)?;
    if !(a_exp > -1.0 && b_exp > -1.0 && a_exp.is_finite() && b_exp.is_finite()) {
        return Err(Error::ParameterDomain(format!(
            "Jacobi exponents must exceed -1, got ({a_exp}, {b_exp})"
        )));
    }
    jacobi_recurrence(m, a_exp, b_exp).gauss_rule(WeightKind::Jacobi { a: a_exp, b: b_exp })
}
