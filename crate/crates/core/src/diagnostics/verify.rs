use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::budgets::energy_budget;
use super::infsup::inf_sup_constant;
use crate::error::Result;
use crate::fields::{dual_density, CellScalarField, FaceVectorField, State};
use crate::fluxes::{derive_alpha_table, mass_fluxes};
use crate::forms::{q_mass, q_mass_reordered, skew_defect};
use crate::mesh::Mesh;
use crate::operators::{divergence, gradient};
use crate::timestepping::{step, Discretization, SchemeKind, SchemeParams};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn below(name: &'static str, value: f64, tolerance: f64) -> Self {
        Check { name, value, tolerance, passed: value.is_finite() && value <= tolerance }
    }

    fn above(name: &'static str, value: f64, tolerance: f64) -> Self {
        Check { name, value, tolerance, passed: value.is_finite() && value > tolerance }
    }

    pub fn line(&self) -> String {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        format!("{tag} {:<28} {:.3e} (tol {:.1e})", self.name, self.value, self.tolerance)
    }
}

fn random_internal(mesh: &Mesh, rng: &mut ChaCha8Rng) -> FaceVectorField {
    let mut u = FaceVectorField::zeros(mesh);
    for &f in &mesh.internal_faces {
        u.values[f] = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
    }
    u
}

/// Runs the algebraic identities of the discretization on `mesh` with random
/// data drawn from `seed`. The inf-sup check is skipped above 1024 cells.
pub fn verify_suite(mesh: &Mesh, seed: u64) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let disc = Discretization::new(mesh.clone())?;
    let alpha = derive_alpha_table()?;
    let rho = CellScalarField { values: (0..mesh.n_cells()).map(|_| rng.random_range(0.5..2.0)).collect() };
    let u = random_internal(mesh, &mut rng);
    let v = random_internal(mesh, &mut rng);
    let p = CellScalarField { values: (0..mesh.n_cells()).map(|_| rng.random_range(-1.0..1.0)).collect() };
    let mut checks = Vec::new();

    let fl = mass_fluxes(&rho, &u, mesh, &alpha)?;
    checks.push(Check::below("dual flux H1 residual", fl.max_half_diamond_residual(), 1e-12));

    let div = divergence(&u, mesh);
    let grad = gradient(&p, mesh);
    let lhs: f64 = (0..mesh.n_cells()).map(|k| mesh.cells[k].volume * p.values[k] * div.values[k]).sum();
    let rhs = -grad.dual_inner(&u, mesh);
    checks.push(Check::below("div-grad duality", (lhs - rhs).abs() / (1.0 + lhs.abs()), 1e-12));

    let asym = disc.stiffness.asymmetry() / disc.stiffness.frobenius_norm();
    checks.push(Check::below("stiffness symmetry", asym, 1e-13));
    let x = u.component(0);
    let xi: Vec<f64> = mesh.internal_faces.iter().map(|&f| x[f]).collect();
    checks.push(Check::above("stiffness positivity", disc.stiffness.quadratic_form(&xi), 0.0));

    let qm = q_mass(&fl, &u, &v, mesh);
    let qr = q_mass_reordered(&fl, &u, &v, mesh);
    checks.push(Check::below("mass form reordering", (qm - qr).abs() / (1.0 + qm.abs()), 1e-12));
    let skew = skew_defect(&fl, &v, mesh) / (1.0 + q_mass(&fl, &v, &v, mesh).abs());
    checks.push(Check::below("momentum form skew part", skew.abs(), 1e-12));

    let params = SchemeParams { kind: SchemeKind::Implicit, dt: 0.01, mu: 0.05, ..Default::default() };
    let mut state = State::new(mesh, 0.0, rho.clone(), u.clone());
    state.rho_dual = dual_density(&rho, mesh);
    let (new, art) = step(&disc, &state, &params)?;
    let report = energy_budget(&state, &new, &art, &params, &disc)?;
    let scale = 1.0 + report.kinetic_energy_old;
    checks.push(Check::below("rho^2 budget residual", report.max_cell_residual(), 1e-10));
    checks.push(Check::below("kinetic energy residual", report.max_face_residual() / scale, 1e-10));
    checks.push(Check::above("rho^2 remainder sign", report.min_remainder(), -1e-12));
    let dvn = divergence(&new.u, mesh).values.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    checks.push(Check::below("discrete divergence", dvn, 1e-10));
    checks.push(Check::below("pressure mean", new.p.integral(mesh).abs(), 1e-10));

    if mesh.n_cells() <= 1024 {
        checks.push(Check::above("inf-sup constant", inf_sup_constant(&disc)?, 1e-3));
    }
    Ok(checks)
}
