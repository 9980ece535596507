//! Two-level time schemes for `dw/dt + A^α w = ψ`.
//!
//! Explicit: `w^{n+1} = w^n − τ A R(A) w^n + τ ψ^n` with `R(A) ≈ A^{α−1}`.
//! Weighted implicit: `w^{n+σ} = R(A; ν)(ν w^n + ψ^{n+σ})` with
//! `R(A; ν) ≈ (ν I + A^α)^{−1}`, `ν = 1/(στ)`, then
//! `w^{n+1} = (w^{n+σ} − (1 − σ) w^n)/σ`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem::{error_norms, DiscreteOperator, ErrorNorms};
use crate::linalg::{dense_generalized_eig, mass_dot};
use crate::rational::{build_negative_power, build_resolvent, check_resolvent_bound, ResolventCheck, ShiftedSolver};

/// Samples used for the scalar form of the implicit stability condition.
pub const RESOLVENT_SAMPLES: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    Explicit,
    ImplicitWeighted,
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchemeKind::Explicit => "explicit",
            SchemeKind::ImplicitWeighted => "implicit",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    pub tau: f64,
    pub steps: usize,
    /// Ignored by the explicit scheme.
    pub sigma: f64,
    pub m: usize,
    pub alpha: f64,
    /// Expansion point; `None` means the (safe) lower spectrum bound.
    pub mu: Option<f64>,
    pub kind: SchemeKind,
}

impl SchemeConfig {
    /// Uniform steps `τ = T/N`.
    pub fn new(
        kind: SchemeKind,
        t_final: f64,
        steps: usize,
        sigma: f64,
        m: usize,
        alpha: f64,
        mu: Option<f64>,
    ) -> Result<Self> {
        if steps == 0 {
            return Err(Error::ParameterDomain("step count must be >= 1".into()));
        }
        let cfg = Self {
            tau: t_final / steps as f64,
            steps,
            sigma,
            m,
            alpha,
            mu,
            kind,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::ParameterDomain(msg));
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return bad(format!("time step must be positive, got {}", self.tau));
        }
        if self.steps == 0 {
            return bad("step count must be >= 1".into());
        }
        if self.m == 0 {
            return bad("quadrature order must be >= 1".into());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if let Some(mu) = self.mu {
            if !(mu > 0.0 && mu.is_finite()) {
                return bad(format!("mu must be positive, got {mu}"));
            }
        }
        if self.kind == SchemeKind::ImplicitWeighted && !(self.sigma >= 0.5 && self.sigma <= 1.0) {
            return bad(format!(
                "implicit weight sigma must lie in [0.5, 1], got {}",
                self.sigma
            ));
        }
        Ok(())
    }

    /// `ν = 1/(στ)`.
    pub fn nu(&self) -> f64 {
        1.0 / (self.sigma * self.tau)
    }

    pub fn t_final(&self) -> f64 {
        self.tau * self.steps as f64
    }
}

/// Right-hand side `ψ(t)`, already projected onto the element space.
#[derive(Clone)]
pub enum Source {
    Zero,
    Constant(Vec<f64>),
    TimeDependent(Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>),
}

impl fmt::Debug for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Zero => f.write_str("Zero"),
            Source::Constant(v) => f.debug_tuple("Constant").field(&v.len()).finish(),
            Source::TimeDependent(_) => f.write_str("TimeDependent"),
        }
    }
}

impl Source {
    fn at(&self, t: f64, n: usize) -> Result<Option<Vec<f64>>> {
        let v = match self {
            Source::Zero => return Ok(None),
            Source::Constant(v) => v.clone(),
            Source::TimeDependent(f) => f(t),
        };
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: v.len(),
            });
        }
        Ok(Some(v))
    }

    fn is_zero(&self) -> bool {
        matches!(self, Source::Zero)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StabilityCertificate {
    /// `τ ≤ τ₀ = 2/γ̄` with `γ̄ = Σ d_m`.
    Explicit {
        tau: f64,
        tau0: f64,
        gamma_bar: f64,
        satisfied: bool,
    },
    /// `ν·R(z; ν) ≤ 1` sampled over `[lower, upper]`, with `σ ≥ 1/2`.
    Implicit {
        sigma: f64,
        nu: f64,
        lower: f64,
        upper: f64,
        check: ResolventCheck,
        satisfied: bool,
    },
    /// Zero data: nothing was computed.
    Trivial,
}

impl StabilityCertificate {
    pub fn satisfied(&self) -> bool {
        match self {
            StabilityCertificate::Explicit { satisfied, .. } | StabilityCertificate::Implicit { satisfied, .. } => {
                *satisfied
            }
            StabilityCertificate::Trivial => true,
        }
    }

    /// Short form used in CSV output.
    pub fn summary(&self) -> String {
        match self {
            StabilityCertificate::Explicit {
                tau, tau0, satisfied, ..
            } => {
                format!(
                    "{}:tau={tau:.6e}<=tau0={tau0:.6e}",
                    if *satisfied { "stable" } else { "unverified" }
                )
            }
            StabilityCertificate::Implicit { check, satisfied, .. } => format!(
                "{}:max(nu*R-1)={:.6e}",
                if *satisfied { "stable" } else { "unverified" },
                check.max_excess
            ),
            StabilityCertificate::Trivial => "trivial".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub final_state: Vec<f64>,
    /// `‖w^n‖` in the mass norm for `n = 0..=N`.
    pub norms: Vec<f64>,
    /// `‖ψ‖` used by step `n` (old level for explicit, `n+σ` for implicit).
    pub source_norms: Vec<f64>,
    pub certificate: StabilityCertificate,
    pub warnings: Vec<String>,
    pub error: Option<ErrorNorms>,
}

impl RunResult {
    /// Fills `error` against `exact` at the vertices of the operator's mesh.
    pub fn evaluate_error(&mut self, exact: impl Fn([f64; 2]) -> f64, op: &DiscreteOperator) -> Result<ErrorNorms> {
        let mesh = op
            .mesh()
            .ok_or_else(|| Error::Validation("operator carries no mesh".into()))?;
        let e = error_norms(&self.final_state, exact, mesh, op.mass())?;
        self.error = Some(e);
        Ok(e)
    }

    /// Right-hand side of the a priori estimate `‖w^0‖ + τ Σ_{j≤n} ‖ψ^j‖`
    /// for each `n`.
    pub fn a_priori_bounds(&self, tau: f64) -> Vec<f64> {
        let mut acc = self.norms[0];
        self.source_norms
            .iter()
            .map(|s| {
                acc += tau * s;
                acc
            })
            .collect()
    }
}

fn check_input(op: &DiscreteOperator, w0: &[f64], cfg: &SchemeConfig, kind: SchemeKind) -> Result<()> {
    cfg.validate()?;
    if cfg.kind != kind {
        return Err(Error::ParameterDomain(format!(
            "configuration is for the {} scheme",
            cfg.kind
        )));
    }
    if w0.len() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            got: w0.len(),
        });
    }
    Ok(())
}

fn zero_run(n: usize, steps: usize) -> RunResult {
    RunResult {
        final_state: vec![0.0; n],
        norms: vec![0.0; steps + 1],
        source_norms: vec![0.0; steps],
        certificate: StabilityCertificate::Trivial,
        warnings: Vec::new(),
        error: None,
    }
}

fn resolve_mu(op: &DiscreteOperator, cfg: &SchemeConfig) -> Result<f64> {
    match cfg.mu {
        Some(mu) => Ok(mu),
        None => Ok(op.bounds()?.safe_lower()),
    }
}

/// Records the norm of `w` after `step`, failing once it stops being finite.
/// The norm overflows before the entries do, and later solves would then
/// fail with a less useful error.
fn push_norm(op: &DiscreteOperator, w: &[f64], norms: &mut Vec<f64>, step: usize) -> Result<()> {
    let norm = op.mass_norm(w);
    if norm.is_finite() && w.iter().all(|x| x.is_finite()) {
        norms.push(norm);
        Ok(())
    } else {
        Err(Error::Divergence { step })
    }
}

pub fn run_explicit(op: &DiscreteOperator, w0: &[f64], psi: &Source, cfg: &SchemeConfig) -> Result<RunResult> {
    check_input(op, w0, cfg, SchemeKind::Explicit)?;
    let n = op.dim();
    if psi.is_zero() && w0.iter().all(|&x| x == 0.0) {
        return Ok(zero_run(n, cfg.steps));
    }
    let mu = resolve_mu(op, cfg)?;
    let approx = build_negative_power(1.0 - cfg.alpha, mu, cfg.m)?;
    let gamma = approx.gamma_bar();
    let tau0 = gamma.step_limit();
    let satisfied = cfg.tau <= tau0;
    let mut warnings = Vec::new();
    if !satisfied {
        let msg = format!(
            "time step {:.6e} exceeds the explicit stability limit 2/gamma = {tau0:.6e}",
            cfg.tau
        );
        log::warn!("{msg}");
        warnings.push(msg);
    }
    let solver = ShiftedSolver::new(&approx, op)?;
    let mut w = w0.to_vec();
    let mut norms = Vec::with_capacity(cfg.steps + 1);
    let mut source_norms = Vec::with_capacity(cfg.steps);
    norms.push(op.mass_norm(&w));
    for step in 0..cfg.steps {
        let t = step as f64 * cfg.tau;
        let ar = solver.apply_times_operator(&w)?;
        let src = psi.at(t, n)?;
        for (wi, ai) in w.iter_mut().zip(&ar) {
            *wi -= cfg.tau * ai;
        }
        match src {
            Some(s) => {
                for (wi, si) in w.iter_mut().zip(&s) {
                    *wi += cfg.tau * si;
                }
                source_norms.push(op.mass_norm(&s));
            }
            None => source_norms.push(0.0),
        }
        push_norm(op, &w, &mut norms, step + 1)?;
    }
    Ok(RunResult {
        final_state: w,
        norms,
        source_norms,
        certificate: StabilityCertificate::Explicit {
            tau: cfg.tau,
            tau0,
            gamma_bar: gamma.value(),
            satisfied,
        },
        warnings,
        error: None,
    })
}

pub fn run_implicit(op: &DiscreteOperator, w0: &[f64], psi: &Source, cfg: &SchemeConfig) -> Result<RunResult> {
    check_input(op, w0, cfg, SchemeKind::ImplicitWeighted)?;
    let n = op.dim();
    if psi.is_zero() && w0.iter().all(|&x| x == 0.0) {
        return Ok(zero_run(n, cfg.steps));
    }
    let mu = resolve_mu(op, cfg)?;
    let nu = cfg.nu();
    let approx = build_resolvent(cfg.alpha, nu, mu, cfg.m)?;
    let bounds = op.bounds()?;
    let (lower, upper) = (bounds.safe_lower(), bounds.upper);
    let check = check_resolvent_bound(&approx, lower, upper, RESOLVENT_SAMPLES);
    let mut warnings = Vec::new();
    if !check.holds {
        let msg = format!(
            "implicit stability condition fails near z = {:.6e} (nu*R - 1 = {:.3e}); continuing",
            check.worst_z, check.max_excess
        );
        log::warn!("{msg}");
        warnings.push(msg);
    }
    let solver = ShiftedSolver::new(&approx, op)?;
    let sigma = cfg.sigma;
    let mut w = w0.to_vec();
    let mut norms = Vec::with_capacity(cfg.steps + 1);
    let mut source_norms = Vec::with_capacity(cfg.steps);
    norms.push(op.mass_norm(&w));
    for step in 0..cfg.steps {
        let t = (step as f64 + sigma) * cfg.tau;
        let mut chi: Vec<f64> = w.iter().map(|x| nu * x).collect();
        match psi.at(t, n)? {
            Some(s) => {
                for (c, si) in chi.iter_mut().zip(&s) {
                    *c += si;
                }
                source_norms.push(op.mass_norm(&s));
            }
            None => source_norms.push(0.0),
        }
        let w_sigma = solver.apply(&chi)?;
        for (wi, ws) in w.iter_mut().zip(&w_sigma) {
            *wi = (ws - (1.0 - sigma) * *wi) / sigma;
        }
        push_norm(op, &w, &mut norms, step + 1)?;
    }
    Ok(RunResult {
        final_state: w,
        norms,
        source_norms,
        certificate: StabilityCertificate::Implicit {
            sigma,
            nu,
            lower,
            upper,
            check,
            satisfied: check.holds,
        },
        warnings,
        error: None,
    })
}

/// Dispatches on `cfg.kind`.
pub fn run(op: &DiscreteOperator, w0: &[f64], psi: &Source, cfg: &SchemeConfig) -> Result<RunResult> {
    match cfg.kind {
        SchemeKind::Explicit => run_explicit(op, w0, psi, cfg),
        SchemeKind::ImplicitWeighted => run_implicit(op, w0, psi, cfg),
    }
}

/// Exact semidiscrete trajectory `w(t) = Σ_k [e^{−λ_k^α t} a_k + (1 − e^{−λ_k^α t}) b_k/λ_k^α] φ_k`
/// with `a_k = (w0, φ_k)`, `b_k = (ψ, φ_k)` in the mass inner product, from the
/// dense eigendecomposition. `α = 1` is allowed here.
pub fn spectral_reference(
    op: &DiscreteOperator,
    w0: &[f64],
    psi: &Source,
    alpha: f64,
    t_grid: &[f64],
) -> Result<Vec<Vec<f64>>> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::ParameterDomain(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    let n = op.dim();
    if w0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: w0.len(),
        });
    }
    let psi_vec = match psi {
        Source::Zero => None,
        Source::Constant(v) => {
            if v.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: v.len(),
                });
            }
            Some(v)
        }
        Source::TimeDependent(_) => {
            return Err(Error::ParameterDomain(
                "spectral reference needs a zero or time-constant source".into(),
            ))
        }
    };
    let eig = dense_generalized_eig(op.stiff(), op.mass())?;
    let a: Vec<f64> = eig.vectors.iter().map(|phi| mass_dot(op.mass(), w0, phi)).collect();
    let b: Vec<f64> = match psi_vec {
        Some(p) => eig.vectors.iter().map(|phi| mass_dot(op.mass(), p, phi)).collect(),
        None => vec![0.0; n],
    };
    let rates: Vec<f64> = eig.values.iter().map(|l| l.powf(alpha)).collect();
    Ok(t_grid
        .iter()
        .map(|&t| {
            let mut w = vec![0.0; n];
            for k in 0..n {
                let e = (-rates[k] * t).exp();
                let coef = e * a[k] + (1.0 - e) * b[k] / rates[k];
                for (wi, p) in w.iter_mut().zip(&eig.vectors[k]) {
                    *wi += coef * p;
                }
            }
            w
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SparseSymMatrix;

    fn scalar_op(lambda: f64) -> DiscreteOperator {
        DiscreteOperator::from_matrices(
            SparseSymMatrix::from_diagonal(&[lambda]).unwrap(),
            SparseSymMatrix::identity(1).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn nu_is_derived() {
        let cfg = SchemeConfig::new(SchemeKind::ImplicitWeighted, 0.25, 100, 0.5, 10, 0.5, None).unwrap();
        assert!((cfg.nu() - 800.0).abs() < 1e-9);
        assert!(SchemeConfig::new(SchemeKind::ImplicitWeighted, 0.25, 100, 0.4, 10, 0.5, None).is_err());
        assert!(SchemeConfig::new(SchemeKind::Explicit, 0.25, 0, 1.0, 10, 0.5, None).is_err());
    }

    #[test]
    fn explicit_scalar_decay() {
        let op = scalar_op(4.0);
        let cfg = SchemeConfig::new(SchemeKind::Explicit, 0.25, 100, 1.0, 20, 0.5, None).unwrap();
        let r = run_explicit(&op, &[1.0], &Source::Zero, &cfg).unwrap();
        assert_eq!(r.norms.len(), 101);
        assert!((r.final_state[0] - (-0.5f64).exp()).abs() < 2e-2);
        assert!(r.certificate.satisfied());
    }

    #[test]
    fn implicit_scalar_decay_and_order_contrast() {
        let op = scalar_op(4.0);
        let exact = (-0.5f64).exp();
        let cfg = SchemeConfig::new(SchemeKind::ImplicitWeighted, 0.25, 100, 1.0, 20, 0.5, None).unwrap();
        let e1 = (run_implicit(&op, &[1.0], &Source::Zero, &cfg).unwrap().final_state[0] - exact).abs();
        let cfg = SchemeConfig { sigma: 0.5, ..cfg };
        let e2 = (run_implicit(&op, &[1.0], &Source::Zero, &cfg).unwrap().final_state[0] - exact).abs();
        assert!(e1 < 2e-2);
        assert!(e2 < 5e-3);
        assert!(e2 < e1);
    }

    #[test]
    fn zero_data_short_circuits() {
        let op = scalar_op(4.0);
        let cfg = SchemeConfig::new(SchemeKind::Explicit, 0.25, 7, 1.0, 20, 0.5, Some(4.0)).unwrap();
        let r = run_explicit(&op, &[0.0], &Source::Zero, &cfg).unwrap();
        assert_eq!(r.norms, vec![0.0; 8]);
        assert_eq!(r.certificate, StabilityCertificate::Trivial);
    }

    #[test]
    fn wrong_kind_rejected() {
        let op = scalar_op(4.0);
        let cfg = SchemeConfig::new(SchemeKind::Explicit, 0.25, 4, 1.0, 5, 0.5, Some(4.0)).unwrap();
        assert!(run_implicit(&op, &[1.0], &Source::Zero, &cfg).is_err());
    }

    #[test]
    fn oversized_step_warns() {
        let op = scalar_op(4.0);
        let cfg = SchemeConfig::new(SchemeKind::Explicit, 10.0, 2, 1.0, 20, 0.5, Some(4.0)).unwrap();
        let r = run_explicit(&op, &[1.0], &Source::Zero, &cfg).unwrap();
        assert!(!r.certificate.satisfied());
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn reference_heat_semigroup() {
        let op = DiscreteOperator::from_matrices(
            SparseSymMatrix::from_diagonal(&[1.0, 3.0]).unwrap(),
            SparseSymMatrix::identity(2).unwrap(),
        )
        .unwrap();
        let w = spectral_reference(&op, &[1.0, 2.0], &Source::Zero, 1.0, &[0.0, 0.5]).unwrap();
        assert!((w[0][0] - 1.0).abs() < 1e-12 && (w[0][1] - 2.0).abs() < 1e-12);
        assert!((w[1][0] - (-0.5f64).exp()).abs() < 1e-12);
        assert!((w[1][1] - 2.0 * (-1.5f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn reference_with_constant_source_reaches_steady_state() {
        let op = scalar_op(4.0);
        let w = spectral_reference(&op, &[0.0], &Source::Constant(vec![2.0]), 0.5, &[1e3]).unwrap();
        assert!((w[0][0] - 1.0).abs() < 1e-12);
    }
}
