//! Time advancement: the fully implicit scheme solved by Picard iteration and
//! its semi-implicit, explicit and pressure-correction variants.

mod assembly;
pub mod linear;
mod schemes;

pub use assembly::{
    assemble_oseen, convection_operator, leray_project, momentum_operator, solve_mass_upwind, solve_oseen_saddle,
    solve_pressure_poisson, source_field, OseenSystem,
};
pub use schemes::{step, step_explicit, step_implicit, step_projection, step_semi_implicit};

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fields::FaceVectorField;
use crate::fluxes::{derive_alpha_table, AlphaTable, FluxSet};
use crate::mesh::geometry::Point;
use crate::mesh::Mesh;
use crate::operators::{divergence_matrix, stiffness_internal, SparseOperator};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    Implicit,
    SemiImplicit,
    Explicit,
    Projection,
}

/// Face value of the transported velocity on dual faces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convection {
    Centered,
    Upwind,
}

/// Momentum source `f(x, t)`.
pub type Source = Arc<dyn Fn(Point, f64) -> [f64; 2] + Send + Sync>;

#[derive(Clone)]
pub struct SchemeParams {
    pub kind: SchemeKind,
    pub dt: f64,
    pub t_end: f64,
    pub mu: f64,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    pub cfl_safety: f64,
    pub convection: Convection,
    pub source: Option<Source>,
}

impl fmt::Debug for SchemeParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SchemeParams")
            .field("kind", &self.kind)
            .field("dt", &self.dt)
            .field("t_end", &self.t_end)
            .field("mu", &self.mu)
            .field("picard_tol", &self.picard_tol)
            .field("picard_max_iter", &self.picard_max_iter)
            .field("cfl_safety", &self.cfl_safety)
            .field("convection", &self.convection)
            .field("source", &self.source.as_ref().map(|_| "fn"))
            .finish()
    }
}

impl Default for SchemeParams {
    fn default() -> Self {
        SchemeParams {
            kind: SchemeKind::Implicit,
            dt: 0.01,
            t_end: 1.0,
            mu: 1.0,
            picard_tol: 1e-10,
            picard_max_iter: 100,
            cfl_safety: 0.5,
            convection: Convection::Centered,
            source: None,
        }
    }
}

impl SchemeParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end must be nonnegative, got {}", self.t_end));
        }
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return bad(format!("mu must be positive, got {}", self.mu));
        }
        if !(self.picard_tol > 0.0) {
            return bad(format!("picard_tol must be positive, got {}", self.picard_tol));
        }
        if self.picard_max_iter == 0 {
            return bad("picard_max_iter must be at least 1".into());
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return bad(format!("cfl_safety must lie in (0, 1], got {}", self.cfl_safety));
        }
        if self.kind == SchemeKind::Explicit && self.convection != Convection::Upwind {
            return Err(Error::ExplicitRequiresUpwind);
        }
        Ok(())
    }
}

/// Mesh with the operators every step reuses.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub mesh: Mesh,
    /// Scalar stiffness over internal faces.
    pub stiffness: SparseOperator,
    /// `B[K, 2d + c] = |sigma| n_{K,sigma,c}`.
    pub div: SparseOperator,
    pub div_t: SparseOperator,
    pub alpha: AlphaTable,
}

impl Discretization {
    pub fn new(mesh: Mesh) -> Result<Self> {
        let stiffness = stiffness_internal(&mesh);
        let div = divergence_matrix(&mesh);
        let div_t = div.transpose();
        Ok(Discretization { stiffness, div, div_t, alpha: derive_alpha_table()?, mesh })
    }
}

/// What a step used, kept for budget evaluation.
#[derive(Debug, Clone)]
pub struct StepArtifacts {
    /// Fluxes of the momentum convection term.
    pub fluxes: FluxSet,
    /// Convecting velocity of the final linear solve.
    pub u_conv: FaceVectorField,
    /// Dual-cell means of the source at the new time.
    pub source: FaceVectorField,
    pub picard_iterations: usize,
    pub residual_history: Vec<f64>,
    /// Predicted velocity of the pressure-correction scheme.
    pub u_predicted: Option<FaceVectorField>,
}

/// Width `|D_sigma| / |sigma|` of each dual cell.
pub fn dual_width(mesh: &Mesh, f: usize) -> f64 {
    mesh.dual_volumes[f] / mesh.faces[f].length
}

/// `c * min_sigma (|u_sigma| / h + mu / h^2)^{-1}` over internal faces, with
/// `h` the dual cell width, capped at `c * cap`.
pub fn cfl_dt(u: &FaceVectorField, mu: f64, mesh: &Mesh, c: f64, cap: f64) -> f64 {
    mesh.internal_faces
        .iter()
        .map(|&f| {
            let h = dual_width(mesh, f);
            let speed = u.values[f][0].hypot(u.values[f][1]);
            c / (speed / h + mu / (h * h))
        })
        .fold(c * cap, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::interpolate_face;

    #[test]
    fn params_validation() {
        assert!(SchemeParams::default().validate().is_ok());
        assert!(SchemeParams { dt: 0.0, ..Default::default() }.validate().is_err());
        assert!(SchemeParams { picard_tol: 0.0, ..Default::default() }.validate().is_err());
        let e = SchemeParams { kind: SchemeKind::Explicit, ..Default::default() }.validate();
        assert!(matches!(e, Err(Error::ExplicitRequiresUpwind)));
    }

    #[test]
    fn cfl_examples() {
        let m = Mesh::cartesian(8, 8, [0.0, 0.0], [1.0, 1.0]).unwrap();
        let zero = FaceVectorField::zeros(&m);
        let h = 1.0 / 16.0;
        assert!((cfl_dt(&zero, 1.0, &m, 0.5, 10.0) - 0.5 * h * h).abs() < 1e-15);
        assert!((cfl_dt(&zero, 2.0, &m, 0.5, 10.0) - 0.25 * h * h).abs() < 1e-15);
        assert_eq!(cfl_dt(&zero, 1e-30, &m, 0.5, 3.0), 1.5);
        // refinement ratio between 1/4 (viscous) and 1/2 (convective)
        let v = |x: [f64; 2]| [x[1] * (1.0 - x[1]) * 4.0, 0.0];
        for mu in [1.0, 1e-6] {
            let r = m.refine().unwrap();
            let a = cfl_dt(&interpolate_face(v, &m), mu, &m, 0.5, 1e9);
            let b = cfl_dt(&interpolate_face(v, &r), mu, &r, 0.5, 1e9);
            let ratio = b / a;
            assert!((0.24..=0.51).contains(&ratio), "mu {mu}: ratio {ratio}");
        }
    }
}
