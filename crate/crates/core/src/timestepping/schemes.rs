use super::assembly::{
    assemble_oseen, check_boundary, convection_operator, momentum_operator, solve_mass_upwind, solve_oseen_saddle,
    solve_pressure_poisson, source_field,
};
use super::linear::solve_sparse;
use super::{cfl_dt, Convection, Discretization, SchemeKind, SchemeParams, StepArtifacts};
use crate::error::{Error, Result};
use crate::fields::{dual_density, CellScalarField, FaceVectorField, State};
use crate::fluxes::mass_fluxes;

/// Advances one step with the scheme selected in `params`.
pub fn step(disc: &Discretization, state: &State, params: &SchemeParams) -> Result<(State, StepArtifacts)> {
    match params.kind {
        SchemeKind::Implicit => step_implicit(disc, state, params),
        SchemeKind::SemiImplicit => step_semi_implicit(disc, state, params),
        SchemeKind::Explicit => step_explicit(disc, state, params),
        SchemeKind::Projection => step_projection(disc, state, params),
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, b| a.max(b.abs()))
}

/// Largest relative residual of the mass, momentum and divergence equations
/// at `(rho, u, p)`, with fluxes rebuilt from `(rho, u)`.
fn nonlinear_residual(
    disc: &Discretization,
    old: &State,
    rho: &CellScalarField,
    u: &FaceVectorField,
    p: &CellScalarField,
    source: &FaceVectorField,
    params: &SchemeParams,
) -> Result<f64> {
    let mesh = &disc.mesh;
    let dt = params.dt;
    let fluxes = mass_fluxes(rho, u, mesh, &disc.alpha)?;
    let r_mass = fluxes.primal_mass_residual(rho, &old.rho, dt, mesh);
    let mass_scale = (0..mesh.n_cells()).map(|k| mesh.cells[k].volume * old.rho.values[k] / dt).fold(0.0, f64::max);

    let sys = assemble_oseen(disc, rho, &old.rho_dual, &old.u, &fluxes, source, params);
    let mut x = u.to_dofs(mesh);
    x.extend_from_slice(&p.values);
    x.push(0.0);
    let ax = sys.matrix.matvec(&x);
    let r: Vec<f64> = ax.iter().zip(&sys.rhs).map(|(a, b)| a - b).collect();
    let rho_dual = dual_density(rho, mesh);
    let inertia: Vec<f64> = mesh
        .internal_faces
        .iter()
        .flat_map(|&f| {
            let m = mesh.dual_volumes[f] * rho_dual.values[f] / dt;
            [m * u.values[f][0], m * u.values[f][1]]
        })
        .collect();
    let mom_scale = inf_norm(&sys.rhs[..sys.n_u]).max(inf_norm(&inertia));
    let r_mom = inf_norm(&r[..sys.n_u]);
    let r_div = inf_norm(&r[sys.n_u..]);
    let ratio = |r: f64, s: f64| if r == 0.0 { 0.0 } else { r / s.max(f64::MIN_POSITIVE) };
    Ok(ratio(inf_norm(&r_mass), mass_scale).max(ratio(r_mom, mom_scale)).max(ratio(r_div, mom_scale)))
}

fn picard(disc: &Discretization, state: &State, params: &SchemeParams, single_pass: bool) -> Result<(State, StepArtifacts)> {
    params.validate()?;
    let mesh = &disc.mesh;
    check_boundary(&state.u, mesh)?;
    let t_new = state.time + params.dt;
    let source = source_field(params, t_new, mesh);
    let mut u_prev = state.u.clone();
    let mut omega = 1.0;
    let mut history = Vec::new();
    for it in 1..=params.picard_max_iter {
        let rho = solve_mass_upwind(&state.rho, &u_prev, params.dt, mesh)?;
        let fluxes = mass_fluxes(&rho, &u_prev, mesh, &disc.alpha)?;
        let (u, p) = solve_oseen_saddle(disc, &rho, &state.rho_dual, &state.u, &fluxes, &source, params)?;
        let res = nonlinear_residual(disc, state, &rho, &u, &p, &source, params)?;
        history.push(res);
        if single_pass || res <= params.picard_tol {
            let rho_dual = dual_density(&rho, mesh);
            let new = State { time: t_new, rho, u, p, rho_dual };
            let art = StepArtifacts {
                fluxes,
                u_conv: u_prev,
                source,
                picard_iterations: it,
                residual_history: history,
                u_predicted: None,
            };
            return Ok((new, art));
        }
        if it > 1 && res >= history[it - 2] {
            omega = (omega * 0.5f64).max(1.0 / 64.0);
        }
        for (a, b) in u_prev.values.iter_mut().zip(&u.values) {
            a[0] += omega * (b[0] - a[0]);
            a[1] += omega * (b[1] - a[1]);
        }
    }
    Err(Error::PicardDivergence { iterations: params.picard_max_iter, history })
}

/// Fully implicit step: damped Picard iteration on the coupled mass and
/// momentum balances until the nonlinear residual drops below `picard_tol`.
pub fn step_implicit(disc: &Discretization, state: &State, params: &SchemeParams) -> Result<(State, StepArtifacts)> {
    picard(disc, state, params, false)
}

/// Mass and momentum convected by the old velocity: the first Picard iterate.
pub fn step_semi_implicit(disc: &Discretization, state: &State, params: &SchemeParams) -> Result<(State, StepArtifacts)> {
    picard(disc, state, params, true)
}

fn inverse_mass_weights(disc: &Discretization, rho_dual: &[f64], dt: f64) -> Vec<f64> {
    let mesh = &disc.mesh;
    (0..2 * mesh.n_internal())
        .map(|i| {
            let f = mesh.internal_faces[i / 2];
            dt / (rho_dual[f] * mesh.dual_volumes[f])
        })
        .collect()
}

/// Explicit upwind convection and diffusion, implicit pressure; refused above
/// the CFL bound.
pub fn step_explicit(disc: &Discretization, state: &State, params: &SchemeParams) -> Result<(State, StepArtifacts)> {
    if params.convection != Convection::Upwind {
        return Err(Error::ExplicitRequiresUpwind);
    }
    params.validate()?;
    let mesh = &disc.mesh;
    check_boundary(&state.u, mesh)?;
    let dt = params.dt;
    let bound = cfl_dt(&state.u, params.mu, mesh, params.cfl_safety, params.t_end);
    if dt > bound {
        return Err(Error::CflViolation { dt, bound });
    }
    let t_new = state.time + dt;
    let source = source_field(params, t_new, mesh);
    let rho = solve_mass_upwind(&state.rho, &state.u, dt, mesh)?;
    let rho_dual = dual_density(&rho, mesh);
    let fluxes = mass_fluxes(&rho, &state.u, mesh, &disc.alpha)?;
    let x = state.u.to_dofs(mesh);
    let conv = convection_operator(mesh, &fluxes, Convection::Upwind).matvec(&x);
    let mut diff = vec![0.0; x.len()];
    for (r, c, v) in disc.stiffness.triplets() {
        diff[2 * r] += params.mu * v * x[2 * c];
        diff[2 * r + 1] += params.mu * v * x[2 * c + 1];
    }
    let mut star = vec![0.0; x.len()];
    for i in 0..x.len() {
        let f = mesh.internal_faces[i / 2];
        let vol = mesh.dual_volumes[f];
        let mom = vol * state.rho_dual.values[f] * x[i] - dt * (conv[i] + diff[i] - vol * source.values[f][i % 2]);
        star[i] = mom / (vol * rho_dual.values[f]);
    }
    let w = inverse_mass_weights(disc, &rho_dual.values, dt);
    let rhs: Vec<f64> = disc.div.matvec(&star).iter().map(|v| -v).collect();
    let p = solve_pressure_poisson(disc, &w, &rhs)?;
    let btp = disc.div_t.matvec(&p.values);
    let y: Vec<f64> = (0..x.len()).map(|i| star[i] + w[i] * btp[i]).collect();
    let u = FaceVectorField::from_dofs(mesh, &y);
    let art = StepArtifacts {
        fluxes,
        u_conv: state.u.clone(),
        source,
        picard_iterations: 1,
        residual_history: Vec::new(),
        u_predicted: Some(FaceVectorField::from_dofs(mesh, &star)),
    };
    Ok((State { time: t_new, rho, u, p, rho_dual }, art))
}

/// Pressure correction: velocity prediction with the old pressure gradient
/// scaled by `sqrt(rho_D / rho_D_old)`, then a pressure equation enforcing the
/// divergence constraint.
pub fn step_projection(disc: &Discretization, state: &State, params: &SchemeParams) -> Result<(State, StepArtifacts)> {
    params.validate()?;
    let mesh = &disc.mesh;
    check_boundary(&state.u, mesh)?;
    let dt = params.dt;
    let t_new = state.time + dt;
    let source = source_field(params, t_new, mesh);
    let rho = solve_mass_upwind(&state.rho, &state.u, dt, mesh)?;
    let rho_dual = dual_density(&rho, mesh);
    let fluxes = mass_fluxes(&rho, &state.u, mesh, &disc.alpha)?;

    // scaled old gradient times |D|: s * (-B^T p_old)
    let btp_old = disc.div_t.matvec(&state.p.values);
    let scale: Vec<f64> = (0..btp_old.len())
        .map(|i| {
            let f = mesh.internal_faces[i / 2];
            (rho_dual.values[f] / state.rho_dual.values[f]).sqrt()
        })
        .collect();
    let a = momentum_operator(disc, &rho_dual, &fluxes, dt, params.mu, params.convection);
    let x_old = state.u.to_dofs(mesh);
    let rhs: Vec<f64> = (0..x_old.len())
        .map(|i| {
            let f = mesh.internal_faces[i / 2];
            let vol = mesh.dual_volumes[f];
            vol * state.rho_dual.values[f] * x_old[i] / dt + scale[i] * btp_old[i] + vol * source.values[f][i % 2]
        })
        .collect();
    let ctx = format!("velocity prediction, {} cells, dt = {dt}", mesh.n_cells());
    let pred = solve_sparse(a, &rhs, &ctx)?;

    let w = inverse_mass_weights(disc, &rho_dual.values, dt);
    // u = pred - W s B^T p_old + W B^T p
    let shifted: Vec<f64> = (0..pred.len()).map(|i| pred[i] - w[i] * scale[i] * btp_old[i]).collect();
    let prhs: Vec<f64> = disc.div.matvec(&shifted).iter().map(|v| -v).collect();
    let p = solve_pressure_poisson(disc, &w, &prhs)?;
    let btp = disc.div_t.matvec(&p.values);
    let y: Vec<f64> = (0..pred.len()).map(|i| shifted[i] + w[i] * btp[i]).collect();
    let u = FaceVectorField::from_dofs(mesh, &y);
    let art = StepArtifacts {
        fluxes,
        u_conv: state.u.clone(),
        source,
        picard_iterations: 1,
        residual_history: Vec::new(),
        u_predicted: Some(FaceVectorField::from_dofs(mesh, &pred)),
    };
    Ok((State { time: t_new, rho, u, p, rho_dual }, art))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{interpolate_face, project_cell};
    use crate::mesh::Mesh;
    use crate::operators::divergence;

    fn vortex(x: [f64; 2]) -> [f64; 2] {
        // curl of x^2 (1-x)^2 y^2 (1-y)^2, scaled
        let (a, b) = (x[0], x[1]);
        let px = 2.0 * a * (1.0 - a) * (1.0 - 2.0 * a) * (b * (1.0 - b)).powi(2);
        let py = 2.0 * b * (1.0 - b) * (1.0 - 2.0 * b) * (a * (1.0 - a)).powi(2);
        [40.0 * py, -40.0 * px]
    }

    fn lock_exchange(n: usize) -> (Discretization, State) {
        let d = Discretization::new(Mesh::cartesian(n, n, [0.0, 0.0], [1.0, 1.0]).unwrap()).unwrap();
        let rho = project_cell(|x| if x[0] < 0.5 { 3.0 } else { 1.0 }, &d.mesh);
        let u = interpolate_face(vortex, &d.mesh);
        let s = State::new(&d.mesh, 0.0, rho, u);
        (d, s)
    }

    fn kinetic(state: &State, mesh: &Mesh) -> f64 {
        0.5 * (0..mesh.n_faces())
            .map(|f| mesh.dual_volumes[f] * state.rho_dual.values[f] * (state.u.values[f][0].powi(2) + state.u.values[f][1].powi(2)))
            .sum::<f64>()
    }

    fn params(kind: SchemeKind) -> SchemeParams {
        let convection = if kind == SchemeKind::Explicit { Convection::Upwind } else { Convection::Centered };
        SchemeParams { kind, dt: 2e-3, mu: 0.01, convection, ..Default::default() }
    }

    #[test]
    fn rest_state_stays_at_rest() {
        let d = Discretization::new(Mesh::cartesian(4, 4, [0.0, 0.0], [1.0, 1.0]).unwrap().perturb(0.2, 1).unwrap()).unwrap();
        let rho = project_cell(|x| 1.0 + x[0] * x[1], &d.mesh);
        let s = State::new(&d.mesh, 0.0, rho.clone(), FaceVectorField::zeros(&d.mesh));
        for kind in [SchemeKind::Implicit, SchemeKind::SemiImplicit, SchemeKind::Explicit, SchemeKind::Projection] {
            let (n, art) = step(&d, &s, &params(kind)).unwrap();
            assert_eq!(art.picard_iterations, 1);
            assert!(n.u.values.iter().all(|v| v[0] == 0.0 && v[1] == 0.0), "{kind:?}");
            assert!(n.p.values.iter().all(|v| v.abs() < 1e-14), "{kind:?}");
            for (a, b) in n.rho.values.iter().zip(&rho.values) {
                assert!((a - b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn semi_implicit_is_first_picard_iterate() {
        let (d, s) = lock_exchange(6);
        // the loosest tolerance stops the implicit loop after its first iterate
        let loose = SchemeParams { picard_tol: f64::MAX, ..params(SchemeKind::Implicit) };
        let (first, art) = step_implicit(&d, &s, &loose).unwrap();
        assert_eq!(art.picard_iterations, 1);
        let (semi, _) = step_semi_implicit(&d, &s, &params(SchemeKind::SemiImplicit)).unwrap();
        assert_eq!(first, semi);
    }

    #[test]
    fn implicit_converges_and_tracks_residuals() {
        let (d, s) = lock_exchange(6);
        let (_, art) = step_implicit(&d, &s, &params(SchemeKind::Implicit)).unwrap();
        assert!(art.picard_iterations > 1);
        assert!(*art.residual_history.last().unwrap() <= 1e-10);
    }

    #[test]
    fn every_scheme_keeps_bounds_mass_and_constraint() {
        let (d, s0) = lock_exchange(8);
        let m = &d.mesh;
        let mass0 = s0.rho.integral(m);
        for kind in [SchemeKind::Implicit, SchemeKind::SemiImplicit, SchemeKind::Explicit, SchemeKind::Projection] {
            let mut s = s0.clone();
            for _ in 0..10 {
                s = step(&d, &s, &params(kind)).unwrap().0;
                assert!(s.rho.min() >= 1.0 - 1e-11 && s.rho.max() <= 3.0 + 1e-11, "{kind:?}");
                assert!((s.rho.integral(m) - mass0).abs() <= 1e-11 * mass0, "{kind:?}");
                assert!(divergence(&s.u, m).values.iter().all(|v| v.abs() <= 1e-11), "{kind:?}");
                assert!(s.p.integral(m).abs() < 1e-11, "{kind:?}");
            }
        }
    }

    #[test]
    fn explicit_refuses_centered_and_large_steps() {
        let (d, s) = lock_exchange(8);
        let centered = SchemeParams { convection: Convection::Centered, ..params(SchemeKind::Explicit) };
        assert!(matches!(step_explicit(&d, &s, &centered), Err(Error::ExplicitRequiresUpwind)));
        let p = params(SchemeKind::Explicit);
        let bound = cfl_dt(&s.u, p.mu, &d.mesh, p.cfl_safety, p.t_end);
        let big = SchemeParams { dt: 2.0 * bound, ..p.clone() };
        match step_explicit(&d, &s, &big) {
            Err(Error::CflViolation { dt, bound: b }) => {
                assert_eq!(dt, 2.0 * bound);
                assert_eq!(b, bound);
            }
            other => panic!("expected refusal, got {other:?}"),
        }
        assert!(step_explicit(&d, &s, &SchemeParams { dt: 0.5 * bound, ..p }).is_ok());
    }

    #[test]
    fn projection_with_constant_density_keeps_unit_scaling() {
        let d = Discretization::new(Mesh::cartesian(6, 6, [0.0, 0.0], [1.0, 1.0]).unwrap()).unwrap();
        let s = State::new(&d.mesh, 0.0, CellScalarField::constant(&d.mesh, 1.0), interpolate_face(vortex, &d.mesh));
        let (n, _) = step_projection(&d, &s, &params(SchemeKind::Projection)).unwrap();
        assert!(n.rho.values.iter().all(|&r| (r - 1.0).abs() < 1e-14));
        assert!(n.rho_dual.values.iter().zip(&s.rho_dual.values).all(|(a, b)| (a / b - 1.0).abs() < 1e-14));
    }

    #[test]
    fn projection_kinetic_energy_non_increasing() {
        let (d, mut s) = lock_exchange(8);
        let p = SchemeParams { dt: 5e-3, mu: 0.05, ..params(SchemeKind::Projection) };
        let mut ke = kinetic(&s, &d.mesh);
        for _ in 0..50 {
            s = step_projection(&d, &s, &p).unwrap().0;
            let k = kinetic(&s, &d.mesh);
            assert!(k <= ke * (1.0 + 1e-12), "{k} > {ke}");
            ke = k;
        }
    }
}
