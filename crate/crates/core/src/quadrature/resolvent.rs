//! Gauss rules for the weight of the resolvent representation,
//! `W(η) = (1 − η)^(−α) (1 + η)^(α−1) g(η; ν, α)`, with
//! `1/g = 1 + 2ν cos(πα) μ^(−α) s^α + ν² μ^(−2α) s^(2α)` and `s = (1 + η)/(1 − η)`.
//!
//! Recurrence coefficients come from a discretized Stieltjes procedure. The
//! inner products are evaluated on a composite rule graded geometrically
//! toward both endpoints: the two end panels use Gauss-Jacobi rules that
//! carry the local algebraic singularity, all other panels Gauss-Legendre.
//! Points are tracked through their distances to the endpoints so that the
//! weight can be evaluated far closer to ±1 than `η` itself resolves.

use super::{check_order, gauss_jacobi, QuadratureRule, Recurrence, WeightKind};
use crate::error::{Error, Result};

const COEFF_TOL: f64 = 1e-12;
const PANEL_POINTS: [usize; 6] = [16, 24, 32, 48, 64, 96];

/// Resolvent weight evaluated from endpoint distances `lo = 1 + η`, `hi = 1 − η`.
pub fn resolvent_weight(lo: f64, hi: f64, nu: f64, alpha: f64, mu: f64) -> f64 {
    hi.powf(-alpha) * lo.powf(alpha - 1.0) * resolvent_factor(lo, hi, nu, alpha, mu)
}

fn resolvent_factor(lo: f64, hi: f64, nu: f64, alpha: f64, mu: f64) -> f64 {
    if nu == 0.0 {
        return 1.0;
    }
    let t = nu * mu.powf(-alpha) * (lo / hi).powf(alpha);
    1.0 / (1.0 + 2.0 * (std::f64::consts::PI * alpha).cos() * t + t * t)
}

struct DiscreteMeasure {
    x: Vec<f64>,
    w: Vec<f64>,
}

/// Number of halvings toward each endpoint: the end panel's share of the
/// singular mass, `ε^min(α, 1−α)`, is pushed below 1e−10.
fn grading_depth(alpha: f64) -> usize {
    let expo = alpha.min(1.0 - alpha);
    ((10.0 * std::f64::consts::LOG2_10) / expo).ceil().clamp(40.0, 2000.0) as usize
}

fn discretize(n: usize, nu: f64, alpha: f64, mu: f64) -> Result<DiscreteMeasure> {
    let depth = grading_depth(alpha);
    let legendre = gauss_jacobi(n, 0.0, 0.0)?;
    // local (1 + x)^(α−1) at the left end, (1 + x)^(−α) at the right end
    let left_end = gauss_jacobi(n, 0.0, alpha - 1.0)?;
    let right_end = gauss_jacobi(n, 0.0, -alpha)?;
    let eps = 0.5f64.powi(depth as i32);

    let cap = 2 * (depth + 1) * n;
    let mut x = Vec::with_capacity(cap);
    let mut w = Vec::with_capacity(cap);

    // left half, points given by lo = 1 + η ∈ (0, 1]
    let scale = (0.5 * eps).powf(alpha);
    for (t, wt) in left_end.iter() {
        let lo = 0.5 * eps * (1.0 + t);
        let hi = 2.0 - lo;
        x.push(lo - 1.0);
        w.push(scale * wt * hi.powf(-alpha) * resolvent_factor(lo, hi, nu, alpha, mu));
    }
    for j in (0..depth).rev() {
        let (a, b) = (0.5f64.powi(j as i32 + 1), 0.5f64.powi(j as i32));
        for (t, wt) in legendre.iter() {
            let lo = a + 0.5 * (b - a) * (1.0 + t);
            let hi = 2.0 - lo;
            x.push(lo - 1.0);
            w.push(0.5 * (b - a) * wt * resolvent_weight(lo, hi, nu, alpha, mu));
        }
    }
    // right half, points given by hi = 1 − η ∈ (0, 1]
    for j in 0..depth {
        let (a, b) = (0.5f64.powi(j as i32 + 1), 0.5f64.powi(j as i32));
        for (t, wt) in legendre.iter() {
            let hi = a + 0.5 * (b - a) * (1.0 + t);
            let lo = 2.0 - hi;
            x.push(1.0 - hi);
            w.push(0.5 * (b - a) * wt * resolvent_weight(lo, hi, nu, alpha, mu));
        }
    }
    let scale = (0.5 * eps).powf(1.0 - alpha);
    for (t, wt) in right_end.iter() {
        let hi = 0.5 * eps * (1.0 + t);
        let lo = 2.0 - hi;
        x.push(1.0 - hi);
        w.push(scale * wt * lo.powf(alpha - 1.0) * resolvent_factor(lo, hi, nu, alpha, mu));
    }
    Ok(DiscreteMeasure { x, w })
}

/// Stieltjes procedure on a discrete measure, carried out with orthonormal
/// polynomials. Returns monic coefficients with `b[0]` the total mass.
fn stieltjes(measure: &DiscreteMeasure, m: usize) -> Recurrence {
    let DiscreteMeasure { x, w } = measure;
    let mass: f64 = w.iter().sum();
    let mut p_prev = vec![0.0; x.len()];
    let mut p = vec![1.0 / mass.sqrt(); x.len()];
    let mut a = Vec::with_capacity(m);
    let mut b = Vec::with_capacity(m);
    b.push(mass);
    let mut norm_prev = 0.0;
    for k in 0..m {
        let ak: f64 = x.iter().zip(w).zip(&p).map(|((xi, wi), pi)| wi * xi * pi * pi).sum();
        a.push(ak);
        if k + 1 == m {
            break;
        }
        let q: Vec<f64> = (0..x.len())
            .map(|i| (x[i] - ak) * p[i] - norm_prev * p_prev[i])
            .collect();
        let nrm = q.iter().zip(w).map(|(qi, wi)| wi * qi * qi).sum::<f64>().sqrt();
        b.push(nrm * nrm);
        p_prev = std::mem::replace(&mut p, q.into_iter().map(|qi| qi / nrm).collect());
        norm_prev = nrm;
    }
    Recurrence { a, b }
}

fn coefficient_change(old: &Recurrence, new: &Recurrence) -> f64 {
    let da = old.a.iter().zip(&new.a).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let db = old
        .b
        .iter()
        .zip(&new.b)
        .map(|(x, y)| (x - y).abs() / y.abs())
        .fold(0.0, f64::max);
    da.max(db)
}

/// M-point Gauss rule for the resolvent weight. For `ν = 0` the weight is the
/// Jacobi weight with exponents `(−α, α − 1)`.
pub fn gauss_custom(m: usize, nu: f64, alpha: f64, mu: f64) -> Result<QuadratureRule> {
    check_order(m)?;
    if !(nu >= 0.0 && nu.is_finite()) {
        return Err(Error::ParameterDomain(format!("nu must be finite and >= 0, got {nu}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::ParameterDomain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::ParameterDomain(format!("mu must be positive, got {mu}")));
    }
    let kind = WeightKind::Resolvent { nu, alpha, mu };
    let mut previous: Option<Recurrence> = None;
    let mut change = f64::INFINITY;
    for &n in PANEL_POINTS.iter().filter(|&&n| n >= m.min(48)) {
        let rec = stieltjes(&discretize(n, nu, alpha, mu)?, m);
        if let Some(prev) = &previous {
            change = coefficient_change(prev, &rec);
            if change < COEFF_TOL {
                return rec.gauss_rule(kind);
            }
        }
        previous = Some(rec);
    }
    Err(Error::NumericalConstruction {
        what: "discretized Stieltjes procedure",
        residual: change,
    })
}
