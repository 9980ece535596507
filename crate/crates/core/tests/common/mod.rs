//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Weight `(1−η)^a (1+η)^b`, evaluated from the endpoint offsets
/// `lo = 1+η`, `hi = 1−η`.
pub fn jacobi_weight(a: f64, b: f64) -> impl Fn(f64, f64) -> f64 {
    move |lo, hi| hi.powf(a) * lo.powf(b)
}

/// `(1−η)^(−α) (1+η)^(α−1) / (1 + 2ν cos(πα) μ^(−α) s^α + ν² μ^(−2α) s^(2α))`
/// with `s = (1+η)/(1−η)`.
pub fn resolvent_weight(nu: f64, alpha: f64, mu: f64) -> impl Fn(f64, f64) -> f64 {
    move |lo, hi| {
        let sa = (lo / hi).powf(alpha) * mu.powf(-alpha);
        let ginv = 1.0 + 2.0 * nu * (PI * alpha).cos() * sa + nu * nu * sa * sa;
        hi.powf(-alpha) * lo.powf(alpha - 1.0) / ginv
    }
}

/// Tanh-sinh rule on one panel whose ends lie at offsets `near < far` from
/// the endpoint `η = −1` (`left`) or `η = 1`, accumulating `∫ η^k w dη` for
/// `k < moments.len()`. Offsets are formed directly, never as `2 − x`.
fn tanh_sinh_panel(left: bool, near: f64, far: f64, h: f64, w: &dyn Fn(f64, f64) -> f64, moments: &mut [f64]) {
    let hw = 0.5 * (far - near);
    // at t = 6 the innermost offset is about e^(−633) of the panel, so the
    // neglected tail of an (offset)^(−0.95) singularity is about 1e-13
    let t_max = 6.0;
    let steps = (t_max / h).round() as i64;
    for j in -steps..=steps {
        let t = j as f64 * h;
        let u = 0.5 * PI * t.sinh();
        let du = 0.5 * PI * t.cosh() / u.cosh().powi(2);
        // 1 + tanh u and 1 − tanh u without cancellation
        let plus = 2.0 / (1.0 + (-2.0 * u).exp());
        let minus = 2.0 / (1.0 + (2.0 * u).exp());
        let off = if plus < 1.0 { near + hw * plus } else { far - hw * minus };
        let (lo, hi) = if left { (off, 2.0 - off) } else { (2.0 - off, off) };
        if off <= 0.0 {
            continue;
        }
        let f = w(lo, hi) * hw * du * h;
        if !f.is_finite() || f == 0.0 {
            continue;
        }
        let eta = if left { off - 1.0 } else { 1.0 - off };
        let mut p = f;
        for m in moments.iter_mut() {
            *m += p;
            p *= eta;
        }
    }
}

/// Moments `∫_{−1}^{1} η^k w(η) dη`, `k = 0..count`, by tanh-sinh on panels
/// graded geometrically towards both endpoints, halving the step until the
/// moments settle to 1e-14 of the mass.
pub fn moments(w: &dyn Fn(f64, f64) -> f64, count: usize) -> Vec<f64> {
    let mut breaks: Vec<f64> = vec![0.0];
    breaks.extend((1..=14).rev().map(|k| 2.0 * 10f64.powi(-k)));
    breaks.push(1.0);
    let mut h = 0.25;
    let mut last: Option<Vec<f64>> = None;
    loop {
        let mut m = vec![0.0; count];
        for left in [true, false] {
            for p in breaks.windows(2) {
                tanh_sinh_panel(left, p[0], p[1], h, w, &mut m);
            }
        }
        if let Some(prev) = &last {
            let scale = m[0].abs();
            if m.iter().zip(prev).all(|(x, y)| (x - y).abs() <= 1e-14 * scale) || h < 1.0 / 512.0 {
                return m;
            }
        }
        last = Some(m);
        h *= 0.5;
    }
}

/// Largest `|Σ ω η^k − ∫ η^k W| / |∫ W|` over `k ≤ 2M − 1`.
pub fn exactness_defect(nodes: &[f64], weights: &[f64], w: &dyn Fn(f64, f64) -> f64) -> f64 {
    let count = 2 * nodes.len();
    let exact = moments(w, count);
    let mass = exact[0].abs();
    (0..count)
        .map(|k| {
            let s: f64 = nodes.iter().zip(weights).map(|(x, wt)| wt * x.powi(k as i32)).sum();
            (s - exact[k]).abs() / mass
        })
        .fold(0.0, f64::max)
}

/// `J_n(x) = (1/π) ∫_0^π cos(nθ − x sin θ) dθ` by the trapezoid rule, which is
/// spectrally accurate for this periodic integrand.
pub fn bessel_integral(n: i32, x: f64) -> f64 {
    let k = 400;
    let h = PI / k as f64;
    let f = |th: f64| (n as f64 * th - x * th.sin()).cos();
    let mut s = 0.5 * (f(0.0) + f(PI));
    for i in 1..k {
        s += f(i as f64 * h);
    }
    s * h / PI
}
