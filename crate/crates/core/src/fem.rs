//! Continuous P1 finite elements for `−div(k grad u) + c u` with the Robin
//! term `g u` on the arc `Γ3` (natural conditions on `Γ1`, `Γ2`).
//!
//! The discrete operator `A` is defined through `(A y, v) = a(y, v)` in the
//! L2 inner product of the element space, so on nodal coefficients
//! `A = mass⁻¹·stiff` and every action of `(cI + A)⁻¹` becomes a solve with
//! `c·mass + stiff`.

use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::geometry::{BoundaryLabel, Mesh};
use crate::linalg::{
    cg_solve, default_max_iter, energy_norm, spectrum_bounds, SparseSymMatrix, SpectrumBounds, SymTriplets,
};

pub type ScalarField = Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>;

/// Tolerance used when computing spectrum bounds lazily.
pub const BOUNDS_TOL: f64 = 1e-10;
const PROJECTION_TOL: f64 = 1e-12;
const MIN_AREA: f64 = 1e-14;

#[derive(Clone)]
pub struct ProblemCoefficients {
    /// Diffusion coefficient, bounded below by a positive constant.
    pub k: ScalarField,
    /// Reaction coefficient, non-negative.
    pub c: ScalarField,
    /// Robin coefficient on `Γ3`.
    pub g: f64,
}

impl fmt::Debug for ProblemCoefficients {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemCoefficients")
            .field("g", &self.g)
            .finish_non_exhaustive()
    }
}

impl ProblemCoefficients {
    pub fn constant(k: f64, c: f64, g: f64) -> Result<Self> {
        if !(k > 0.0) || !(c >= 0.0) || !(g >= 0.0) {
            return Err(Error::ParameterDomain(format!(
                "need k > 0, c >= 0, g >= 0; got k={k}, c={c}, g={g}"
            )));
        }
        Ok(Self {
            k: Arc::new(move |_| k),
            c: Arc::new(move |_| c),
            g,
        })
    }

    /// `−Δu` with Robin coefficient `g` on the arc.
    pub fn laplace_robin(g: f64) -> Result<Self> {
        Self::constant(1.0, 0.0, g)
    }
}

/// Stiffness and mass matrices of the discrete operator, with spectrum
/// bounds computed on first use.
pub struct DiscreteOperator {
    stiff: SparseSymMatrix,
    mass: SparseSymMatrix,
    bounds: OnceLock<SpectrumBounds>,
    mesh: Option<Arc<Mesh>>,
}

impl fmt::Debug for DiscreteOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiscreteOperator")
            .field("dim", &self.dim())
            .field("bounds", &self.bounds.get())
            .field("has_mesh", &self.mesh.is_some())
            .finish()
    }
}

impl DiscreteOperator {
    pub fn from_matrices(stiff: SparseSymMatrix, mass: SparseSymMatrix) -> Result<Self> {
        if stiff.dim() != mass.dim() {
            return Err(Error::DimensionMismatch {
                expected: stiff.dim(),
                got: mass.dim(),
            });
        }
        Ok(Self {
            stiff,
            mass,
            bounds: OnceLock::new(),
            mesh: None,
        })
    }

    /// Supplies known bounds instead of computing them.
    pub fn with_bounds(self, bounds: SpectrumBounds) -> Self {
        let _ = self.bounds.set(bounds);
        self
    }

    pub fn stiff(&self) -> &SparseSymMatrix {
        &self.stiff
    }

    pub fn mass(&self) -> &SparseSymMatrix {
        &self.mass
    }

    pub fn mesh(&self) -> Option<&Arc<Mesh>> {
        self.mesh.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.stiff.dim()
    }

    pub fn bounds(&self) -> Result<SpectrumBounds> {
        if let Some(b) = self.bounds.get() {
            return Ok(*b);
        }
        let b = spectrum_bounds(&self.stiff, &self.mass, BOUNDS_TOL)?;
        Ok(*self.bounds.get_or_init(|| b))
    }

    /// `sqrt(vᵀ·mass·v)`, the discrete L2 norm.
    pub fn mass_norm(&self, v: &[f64]) -> f64 {
        energy_norm(&self.mass, v)
    }
}

/// Gradients of the three barycentric functions and the (signed) area.
fn barycentric_gradients(p: [[f64; 2]; 3]) -> ([[f64; 2]; 3], f64) {
    let area = 0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]));
    let mut grads = [[0.0; 2]; 3];
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        grads[i] = [(p[j][1] - p[k][1]) / (2.0 * area), (p[k][0] - p[j][0]) / (2.0 * area)];
    }
    (grads, area)
}

/// P1 element stiffness `∫ ∇φᵢ·∇φⱼ` for unit diffusion.
pub fn element_stiffness(p: [[f64; 2]; 3]) -> [[f64; 3]; 3] {
    let (g, area) = barycentric_gradients(p);
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = area * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
        }
    }
    k
}

/// Exact P1 element mass `area/12 · [[2,1,1],[1,2,1],[1,1,2]]`.
pub fn element_mass(area: f64) -> [[f64; 3]; 3] {
    let mut m = [[area / 12.0; 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = area / 6.0;
    }
    m
}

fn centroid(p: [[f64; 2]; 3]) -> [f64; 2] {
    [(p[0][0] + p[1][0] + p[2][0]) / 3.0, (p[0][1] + p[1][1] + p[2][1]) / 3.0]
}

pub fn assemble(mesh: &Mesh, coeff: &ProblemCoefficients) -> Result<DiscreteOperator> {
    assemble_shared(Arc::new(mesh.clone()), coeff)
}

pub fn assemble_shared(mesh: Arc<Mesh>, coeff: &ProblemCoefficients) -> Result<DiscreteOperator> {
    if !(coeff.g >= 0.0) {
        return Err(Error::ParameterDomain(format!(
            "Robin coefficient must be >= 0, got {}",
            coeff.g
        )));
    }
    let n = mesh.vertex_count();
    let mut stiff = SymTriplets::new(n);
    let mut mass = SymTriplets::new(n);
    let verts = mesh.vertices();
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let p = [verts[tri[0]], verts[tri[1]], verts[tri[2]]];
        let area = mesh.triangle_area(t);
        if area < MIN_AREA {
            return Err(Error::Assembly(format!("triangle {t} is degenerate (area {area:.3e})")));
        }
        let xc = centroid(p);
        let (kc, cc) = ((coeff.k)(xc), (coeff.c)(xc));
        if !(kc > 0.0) || !(cc >= 0.0) {
            return Err(Error::ParameterDomain(format!(
                "coefficients out of range in triangle {t}: k={kc}, c={cc}"
            )));
        }
        let ke = element_stiffness(p);
        let me = element_mass(area);
        for a in 0..3 {
            for b in 0..=a {
                stiff.add(tri[a], tri[b], kc * ke[a][b] + cc * me[a][b]);
                mass.add(tri[a], tri[b], me[a][b]);
            }
        }
    }
    if coeff.g > 0.0 {
        for e in mesh
            .boundary_edges()
            .iter()
            .filter(|e| e.label == BoundaryLabel::Gamma3)
        {
            let [a, b] = e.vertices;
            let len = ((verts[a][0] - verts[b][0]).powi(2) + (verts[a][1] - verts[b][1]).powi(2)).sqrt();
            let s = coeff.g * len / 6.0;
            stiff.add(a, a, 2.0 * s);
            stiff.add(b, b, 2.0 * s);
            stiff.add(a, b, s);
        }
    }
    Ok(DiscreteOperator {
        stiff: stiff.build()?,
        mass: mass.build()?,
        bounds: OnceLock::new(),
        mesh: Some(mesh),
    })
}

/// Nodal interpolant of `f`.
pub fn interpolate(f: impl Fn([f64; 2]) -> f64, mesh: &Mesh) -> Vec<f64> {
    mesh.vertices().iter().map(|&p| f(p)).collect()
}

/// L2 projection onto the P1 space: solves `mass·x = b` with `bᵢ = ∫ f φᵢ`
/// evaluated by the edge-midpoint rule (exact for quadratics).
pub fn l2_project(f: impl Fn([f64; 2]) -> f64, mesh: &Mesh, mass: &SparseSymMatrix) -> Result<Vec<f64>> {
    let n = mesh.vertex_count();
    if mass.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: mass.dim(),
        });
    }
    let verts = mesh.vertices();
    let mut b = vec![0.0; n];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let area = mesh.triangle_area(t);
        let mid = |i: usize, j: usize| {
            let (p, q) = (verts[tri[i]], verts[tri[j]]);
            f([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])])
        };
        // midpoint opposite vertex k is where φ_k vanishes
        let m = [mid(1, 2), mid(2, 0), mid(0, 1)];
        for k in 0..3 {
            b[tri[k]] += area / 3.0 * 0.5 * (m[(k + 1) % 3] + m[(k + 2) % 3]);
        }
    }
    cg_solve(mass, &b, PROJECTION_TOL, default_max_iter(n))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    /// Mass-norm of the nodal error.
    pub eps2: f64,
    /// Largest nodal error.
    pub eps_inf: f64,
}

/// Errors of `w` against the nodal interpolant of `exact`.
pub fn error_norms(
    w: &[f64],
    exact: impl Fn([f64; 2]) -> f64,
    mesh: &Mesh,
    mass: &SparseSymMatrix,
) -> Result<ErrorNorms> {
    let n = mesh.vertex_count();
    if w.len() != n || mass.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: if w.len() != n { w.len() } else { mass.dim() },
        });
    }
    let e: Vec<f64> = w.iter().zip(mesh.vertices()).map(|(wi, &p)| wi - exact(p)).collect();
    Ok(ErrorNorms {
        eps2: energy_norm(mass, &e),
        eps_inf: e.iter().fold(0.0, |m, x| m.max(x.abs())),
    })
}
