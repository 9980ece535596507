//! Bessel functions of orders 0 and 1, roots of the Robin eigenvalue
//! equation `−ν J₁(ν) + g J₀(ν) = 0`, and the closed-form test solution on
//! the quarter disk.

use std::f64::consts::{FRAC_PI_8, PI};

use crate::error::{Error, Result};

/// Series is used below this argument, the Hankel asymptotic expansion above.
/// Both truncation errors stay under 1e-11 at the switch.
const SERIES_LIMIT: f64 = 14.0;
/// Bracket width guaranteed by [`robin_roots`].
pub const ROOT_TOL: f64 = 1e-12;

fn series(order: u32, x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = if order == 0 { 1.0 } else { 0.5 * x };
    let mut sum = term;
    let mut k = 1.0;
    while term.abs() > 1e-17 * sum.abs().max(1e-300) || k < 4.0 {
        term *= q / (k * (k + order as f64));
        sum += term;
        k += 1.0;
        if k > 200.0 {
            break;
        }
    }
    sum
}

fn asymptotic(order: u32, x: f64) -> f64 {
    let mu = 4.0 * (order * order) as f64;
    // a_k = Π_{j=1..k} (mu − (2j−1)²) / (k! 8^k); P takes even k, Q odd k
    let (mut p, mut q) = (1.0, 0.0);
    let mut a = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        a *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        if a.abs() > last {
            break;
        }
        last = a.abs();
        match k % 4 {
            1 => q += a,
            2 => p -= a,
            3 => q -= a,
            _ => p += a,
        }
    }
    let chi = x - (0.5 * order as f64 + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// `J₀(x)`; even in `x`.
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x <= SERIES_LIMIT {
        series(0, x)
    } else {
        asymptotic(0, x)
    }
}

/// `J₁(x)`; odd in `x`.
pub fn bessel_j1(x: f64) -> f64 {
    let s = x.signum();
    let x = x.abs();
    s * if x <= SERIES_LIMIT {
        series(1, x)
    } else {
        asymptotic(1, x)
    }
}

/// `F(ν) = ν J₀′(ν) + g J₀(ν)` with `J₀′ = −J₁`.
pub fn robin_residual(nu: f64, g: f64) -> f64 {
    -nu * bessel_j1(nu) + g * bessel_j0(nu)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobinRoots {
    g: f64,
    roots: Vec<f64>,
}

impl RobinRoots {
    pub fn g(&self) -> f64 {
        self.g
    }

    /// Ascending positive roots.
    pub fn roots(&self) -> &[f64] {
        &self.roots
    }

    /// Eigenvalues `λ_k = ν_k²` of the continuous operator.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.roots.iter().map(|r| r * r).collect()
    }
}

/// First `count` positive roots of the Robin equation, bracketed on a
/// `π/8` grid and refined by bisection.
pub fn robin_roots(g: f64, count: usize) -> Result<RobinRoots> {
    if !(g > 0.0) || !g.is_finite() {
        return Err(Error::ParameterDomain(format!(
            "Robin coefficient must be > 0, got {g}"
        )));
    }
    if count == 0 {
        return Err(Error::ParameterDomain("root count must be >= 1".into()));
    }
    // each interval between consecutive zeros of J₁ holds exactly one root
    let limit = (count as f64 + 2.0) * PI + PI;
    let mut roots = Vec::with_capacity(count);
    let mut a = FRAC_PI_8 * 1e-3;
    let mut fa = robin_residual(a, g);
    while roots.len() < count {
        let b = (a + FRAC_PI_8).min(limit);
        if b <= a {
            return Err(Error::RootSearch(format!(
                "found {} of {count} roots below {limit:.3} for g={g}",
                roots.len()
            )));
        }
        let fb = robin_residual(b, g);
        if fa == 0.0 {
            roots.push(a);
        } else if fa * fb < 0.0 {
            roots.push(bisect(a, b, fa, g));
        }
        a = b;
        fa = fb;
    }
    Ok(RobinRoots { g, roots })
}

/// Bisects to floating-point resolution, well below `ROOT_TOL`, so the
/// residual stays small even when `g` makes `F` steep.
fn bisect(mut lo: f64, mut hi: f64, mut flo: f64, g: f64) -> f64 {
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = robin_residual(mid, g);
        if fm == 0.0 {
            return mid;
        }
        if flo * fm < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    0.5 * (lo + hi)
}

/// Two-mode solution `exp(−ν₁^{2α} t) J₀(ν₁ r) + 1.5 exp(−ν₃^{2α} t) J₀(ν₃ r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactSolutionSpec {
    pub g: f64,
    pub alpha: f64,
    pub nu1: f64,
    pub nu3: f64,
    pub amplitudes: (f64, f64),
    pub t_final: f64,
}

impl ExactSolutionSpec {
    pub fn new(g: f64, alpha: f64, t_final: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::ParameterDomain(format!("alpha must lie in (0, 1], got {alpha}")));
        }
        if !(t_final >= 0.0) {
            return Err(Error::ParameterDomain(format!(
                "final time must be >= 0, got {t_final}"
            )));
        }
        let r = robin_roots(g, 3)?;
        Ok(Self {
            g,
            alpha,
            nu1: r.roots[0],
            nu3: r.roots[2],
            amplitudes: (1.0, 1.5),
            t_final,
        })
    }

    /// Initial datum as a field on the plane.
    pub fn initial(&self, p: [f64; 2]) -> f64 {
        self.at_point(p, 0.0)
    }

    pub fn at_point(&self, p: [f64; 2], t: f64) -> f64 {
        exact_solution(self, p[0].hypot(p[1]), t)
    }
}

pub fn exact_solution(spec: &ExactSolutionSpec, r: f64, t: f64) -> f64 {
    let decay = |nu: f64| (-nu.powf(2.0 * spec.alpha) * t).exp();
    spec.amplitudes.0 * decay(spec.nu1) * bessel_j0(spec.nu1 * r)
        + spec.amplitudes.1 * decay(spec.nu3) * bessel_j0(spec.nu3 * r)
}
