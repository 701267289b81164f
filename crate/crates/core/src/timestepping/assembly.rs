use super::linear::{solve_sparse, SparseLu};
use super::{Convection, Discretization, SchemeParams};
use crate::error::{Error, Result};
use crate::fields::{dual_cell_average, dual_density, CellScalarField, FaceScalarField, FaceVectorField};
use crate::fluxes::FluxSet;
use crate::mesh::Mesh;
use crate::operators::SparseOperator;

/// Implicit upwind mass balance `(|K|/dt)(rho_K - rho_old_K) + sum_sigma F_{K,sigma} = 0`.
pub fn solve_mass_upwind(
    rho_old: &CellScalarField,
    u_conv: &FaceVectorField,
    dt: f64,
    mesh: &Mesh,
) -> Result<CellScalarField> {
    let n = mesh.n_cells();
    let mut trip = Vec::with_capacity(5 * n);
    let mut rhs = vec![0.0; n];
    for k in 0..n {
        let vol = mesh.cells[k].volume;
        trip.push((k, k, vol / dt));
        rhs[k] = vol / dt * rho_old.values[k];
    }
    for (f, face) in mesh.faces.iter().enumerate() {
        let Some(l) = face.neighbor else { continue };
        let k = face.owner;
        let flow = face.length * (u_conv.values[f][0] * face.normal[0] + u_conv.values[f][1] * face.normal[1]);
        if flow >= 0.0 {
            trip.push((k, k, flow));
            trip.push((l, k, -flow));
        } else {
            trip.push((k, l, flow));
            trip.push((l, l, -flow));
        }
    }
    let op = SparseOperator::from_triplets(n, n, trip, false);
    let values = solve_sparse(op, &rhs, &format!("mass balance, {n} cells, dt = {dt}"))?;
    Ok(CellScalarField { values })
}

/// Dual-face convection `sum_eps F_{sigma,eps} u_eps` as an operator on internal
/// velocity dofs.
pub fn convection_operator(mesh: &Mesh, fluxes: &FluxSet, mode: Convection) -> SparseOperator {
    let n = 2 * mesh.n_internal();
    let mut trip = Vec::with_capacity(16 * mesh.n_cells());
    for (k, cell) in mesh.cells.iter().enumerate() {
        for j in 0..4 {
            let Some(d) = mesh.face_dof[cell.faces[j]] else { continue };
            let o = fluxes.half_diamond_outflows(k, j);
            let others = [cell.faces[(j + 3) % 4], cell.faces[(j + 1) % 4]];
            for (flux, other) in o.into_iter().zip(others) {
                let od = mesh.face_dof[other];
                let (own, nb) = match mode {
                    Convection::Centered => (0.5 * flux, 0.5 * flux),
                    Convection::Upwind if flux >= 0.0 => (flux, 0.0),
                    Convection::Upwind => (0.0, flux),
                };
                for c in 0..2 {
                    trip.push((2 * d + c, 2 * d + c, own));
                    if let Some(od) = od {
                        trip.push((2 * d + c, 2 * od + c, nb));
                    }
                }
            }
        }
    }
    SparseOperator::from_triplets(n, n, trip, false)
}

fn stiffness_triplets(disc: &Discretization, mu: f64, trip: &mut Vec<(usize, usize, f64)>) {
    for (r, c, v) in disc.stiffness.triplets() {
        trip.push((2 * r, 2 * c, mu * v));
        trip.push((2 * r + 1, 2 * c + 1, mu * v));
    }
}

/// Velocity block `|D| rho_D / dt + convection + mu * stiffness` over internal dofs.
pub fn momentum_operator(
    disc: &Discretization,
    rho_dual: &FaceScalarField,
    fluxes: &FluxSet,
    dt: f64,
    mu: f64,
    mode: Convection,
) -> SparseOperator {
    let mesh = &disc.mesh;
    let n = 2 * mesh.n_internal();
    let mut trip = convection_operator(mesh, fluxes, mode).triplets();
    stiffness_triplets(disc, mu, &mut trip);
    for (d, &f) in mesh.internal_faces.iter().enumerate() {
        let m = mesh.dual_volumes[f] * rho_dual.values[f] / dt;
        trip.push((2 * d, 2 * d, m));
        trip.push((2 * d + 1, 2 * d + 1, m));
    }
    SparseOperator::from_triplets(n, n, trip, false)
}

/// Dual-cell means of the source at time `t`, zero without a source.
pub fn source_field(params: &SchemeParams, t: f64, mesh: &Mesh) -> FaceVectorField {
    match &params.source {
        Some(f) => {
            let mut s = dual_cell_average(|x| f(x, t), mesh);
            s.enforce_boundary(mesh);
            s
        }
        None => FaceVectorField::zeros(mesh),
    }
}

/// Bordered saddle-point system `[A, -B^T, 0; -B, 0, m; 0, m^T, 0]` with
/// unknowns `(u, p, lambda)`.
#[derive(Debug, Clone)]
pub struct OseenSystem {
    pub matrix: SparseOperator,
    pub rhs: Vec<f64>,
    pub n_u: usize,
    pub n_p: usize,
}

pub(crate) fn check_boundary(u: &FaceVectorField, mesh: &Mesh) -> Result<()> {
    match u.max_boundary_value(mesh) {
        Some((f, v)) if v != 0.0 => {
            Err(Error::NonzeroBoundaryVelocity { face: f, u0: u.values[f][0], u1: u.values[f][1] })
        }
        _ => Ok(()),
    }
}

fn bordered_triplets(disc: &Discretization, offset_u: usize, trip: &mut Vec<(usize, usize, f64)>) {
    let mesh = &disc.mesh;
    let n_p = mesh.n_cells();
    let lam = offset_u + n_p;
    for (r, c, v) in disc.div.triplets() {
        trip.push((c, offset_u + r, -v));
        trip.push((offset_u + r, c, -v));
    }
    for k in 0..n_p {
        trip.push((offset_u + k, lam, mesh.cells[k].volume));
        trip.push((lam, offset_u + k, mesh.cells[k].volume));
    }
}

/// Momentum and divergence equations linearized on `fluxes`.
#[allow(clippy::too_many_arguments)]
pub fn assemble_oseen(
    disc: &Discretization,
    rho_new: &CellScalarField,
    rho_old_dual: &FaceScalarField,
    u_old: &FaceVectorField,
    fluxes: &FluxSet,
    source: &FaceVectorField,
    params: &SchemeParams,
) -> OseenSystem {
    let mesh = &disc.mesh;
    let n_u = 2 * mesh.n_internal();
    let n_p = mesh.n_cells();
    let rho_dual = dual_density(rho_new, mesh);
    let mut trip = momentum_operator(disc, &rho_dual, fluxes, params.dt, params.mu, params.convection).triplets();
    bordered_triplets(disc, n_u, &mut trip);
    let mut rhs = vec![0.0; n_u + n_p + 1];
    for (d, &f) in mesh.internal_faces.iter().enumerate() {
        let vol = mesh.dual_volumes[f];
        for c in 0..2 {
            rhs[2 * d + c] = vol * rho_old_dual.values[f] * u_old.values[f][c] / params.dt + vol * source.values[f][c];
        }
    }
    let n = n_u + n_p + 1;
    OseenSystem { matrix: SparseOperator::from_triplets(n, n, trip, false), rhs, n_u, n_p }
}

/// Solves the linearized momentum and divergence equations for `(u, p)` with zero-mean `p`.
#[allow(clippy::too_many_arguments)]
pub fn solve_oseen_saddle(
    disc: &Discretization,
    rho_new: &CellScalarField,
    rho_old_dual: &FaceScalarField,
    u_old: &FaceVectorField,
    fluxes: &FluxSet,
    source: &FaceVectorField,
    params: &SchemeParams,
) -> Result<(FaceVectorField, CellScalarField)> {
    let mesh = &disc.mesh;
    check_boundary(u_old, mesh)?;
    let sys = assemble_oseen(disc, rho_new, rho_old_dual, u_old, fluxes, source, params);
    let ctx = format!("saddle point, {} cells, dt = {}", mesh.n_cells(), params.dt);
    let x = solve_sparse(sys.matrix, &sys.rhs, &ctx)?;
    let u = FaceVectorField::from_dofs(mesh, &x[..sys.n_u]);
    let p = CellScalarField { values: x[sys.n_u..sys.n_u + sys.n_p].to_vec() };
    Ok((u, p))
}

/// Solves `B W B^T p = rhs` with zero-mean `p`, `W` diagonal over velocity dofs.
pub fn solve_pressure_poisson(disc: &Discretization, w: &[f64], rhs: &[f64]) -> Result<CellScalarField> {
    let mesh = &disc.mesh;
    let n_p = mesh.n_cells();
    let mut trip = Vec::new();
    // (B W B^T)_{KL} = sum_dof B_{K,dof} w_dof B_{L,dof}
    for dof in 0..disc.div_t.n_rows {
        let col: Vec<(usize, f64)> = disc.div_t.row(dof).collect();
        for &(k, a) in &col {
            for &(l, b) in &col {
                trip.push((k, l, a * w[dof] * b));
            }
        }
    }
    for k in 0..n_p {
        trip.push((k, n_p, mesh.cells[k].volume));
        trip.push((n_p, k, mesh.cells[k].volume));
    }
    let op = SparseOperator::from_triplets(n_p + 1, n_p + 1, trip, true);
    let mut b = rhs.to_vec();
    b.push(0.0);
    let x = SparseLu::new(op, format!("pressure equation, {n_p} cells"))?.solve(&b)?;
    Ok(CellScalarField { values: x[..n_p].to_vec() })
}

/// `L^2(|D|)`-orthogonal projection onto discretely divergence-free fields.
pub fn leray_project(disc: &Discretization, u: &FaceVectorField) -> Result<FaceVectorField> {
    let mesh = &disc.mesh;
    let mut u = u.clone();
    u.enforce_boundary(mesh);
    let x = u.to_dofs(mesh);
    let w: Vec<f64> = (0..x.len()).map(|i| 1.0 / mesh.dual_volumes[mesh.internal_faces[i / 2]]).collect();
    let rhs: Vec<f64> = disc.div.matvec(&x).iter().map(|v| -v).collect();
    let p = solve_pressure_poisson(disc, &w, &rhs)?;
    let btp = disc.div_t.matvec(&p.values);
    let y: Vec<f64> = x.iter().zip(&btp).zip(&w).map(|((x, g), w)| x + w * g).collect();
    Ok(FaceVectorField::from_dofs(mesh, &y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::interpolate_face;
    use crate::fluxes::mass_fluxes;
    use crate::operators::divergence;
    use crate::testutil::{random_cells, random_velocity, rng, solenoidal};
    use nalgebra::{DMatrix, DVector};
    use proptest::{prop_assert, proptest};

    fn disc(n: usize, perturb: f64, seed: u64) -> Discretization {
        let m = Mesh::cartesian(n, n, [0.0, 0.0], [1.0, 1.0]).unwrap();
        let m = if perturb > 0.0 { m.perturb(perturb, seed).unwrap() } else { m };
        Discretization::new(m).unwrap()
    }

    #[test]
    fn mass_solve_at_rest_is_identity() {
        let d = disc(4, 0.2, 1);
        let rho = random_cells(&d.mesh, &mut rng(1), 1.0, 3.0);
        let r = solve_mass_upwind(&rho, &FaceVectorField::zeros(&d.mesh), 0.1, &d.mesh).unwrap();
        for (a, b) in r.values.iter().zip(&rho.values) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    proptest! {
        #[test]
        fn mass_solve_conserves_and_respects_bounds(seed in 0u64..300, dt in 0.01f64..10.0) {
            let d = disc(5, 0.25, seed);
            let m = &d.mesh;
            let mut r = rng(seed);
            let rho = random_cells(m, &mut r, 1.0, 3.0);
            let u = solenoidal(m, &mut r);
            let new = solve_mass_upwind(&rho, &u, dt, m).unwrap();
            prop_assert!((new.integral(m) - rho.integral(m)).abs() <= 1e-12 * rho.integral(m));
            prop_assert!(new.min() >= rho.min() - 1e-12 && new.max() <= rho.max() + 1e-12);
            let set = mass_fluxes(&new, &u, m, &d.alpha).unwrap();
            let res = set.primal_mass_residual(&new, &rho, dt, m);
            prop_assert!(res.iter().all(|x| x.abs() < 1e-11));
        }
    }

    #[test]
    fn zero_data_gives_zero_solution() {
        let d = disc(4, 0.2, 2);
        let m = &d.mesh;
        let rho = random_cells(m, &mut rng(2), 1.0, 3.0);
        let zero = FaceVectorField::zeros(m);
        let set = mass_fluxes(&rho, &zero, m, &d.alpha).unwrap();
        let (u, p) = solve_oseen_saddle(&d, &rho, &dual_density(&rho, m), &zero, &set, &zero, &SchemeParams::default()).unwrap();
        assert!(u.values.iter().all(|v| v[0].abs() < 1e-15 && v[1].abs() < 1e-15));
        assert!(p.values.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn nonzero_boundary_velocity_rejected() {
        let d = disc(2, 0.0, 0);
        let m = &d.mesh;
        let rho = CellScalarField::constant(m, 1.0);
        let mut u = FaceVectorField::zeros(m);
        let ext = (0..m.n_faces()).find(|&f| !m.faces[f].is_internal()).unwrap();
        u.values[ext] = [1.0, 0.0];
        let set = mass_fluxes(&rho, &FaceVectorField::zeros(m), m, &d.alpha).unwrap();
        let e = solve_oseen_saddle(&d, &rho, &dual_density(&rho, m), &u, &set, &FaceVectorField::zeros(m), &SchemeParams::default());
        assert!(matches!(e, Err(Error::NonzeroBoundaryVelocity { .. })));
    }

    #[test]
    fn oseen_solution_is_divergence_free_with_zero_mean_pressure() {
        let d = disc(6, 0.25, 3);
        let m = &d.mesh;
        let mut r = rng(3);
        let rho = random_cells(m, &mut r, 1.0, 3.0);
        let u_old = random_velocity(m, &mut r);
        let u_conv = solenoidal(m, &mut r);
        let set = mass_fluxes(&rho, &u_conv, m, &d.alpha).unwrap();
        let params = SchemeParams { dt: 0.05, mu: 0.1, ..Default::default() };
        let (u, p) = solve_oseen_saddle(&d, &rho, &dual_density(&rho, m), &u_old, &set, &FaceVectorField::zeros(m), &params).unwrap();
        assert!(divergence(&u, m).values.iter().all(|v| v.abs() < 1e-11));
        assert!(p.integral(m).abs() < 1e-12);
        assert!(u.max_boundary_value(m).unwrap().1 == 0.0);
    }

    #[test]
    fn large_dt_limit_matches_independent_stokes_solve() {
        // unit density, no convection, huge dt: the saddle system reduces to Stokes
        let d = disc(4, 0.2, 4);
        let m = &d.mesh;
        let rho = CellScalarField::constant(m, 1.0);
        let zero = FaceVectorField::zeros(m);
        let set = mass_fluxes(&rho, &zero, m, &d.alpha).unwrap();
        let f = interpolate_face(|x| [x[1] - 0.5, (3.0 * x[0]).sin()], m);
        let mut src = FaceVectorField::zeros(m);
        for &fc in &m.internal_faces {
            src.values[fc] = f.values[fc];
        }
        let params = SchemeParams { dt: 1e12, ..Default::default() };
        let (u, p) = solve_oseen_saddle(&d, &rho, &dual_density(&rho, m), &zero, &set, &src, &params).unwrap();

        // dense Stokes: [K (x) I, B^T-weighted gradient; B, mean row]
        let nu = 2 * m.n_internal();
        let np = m.n_cells();
        let n = nu + np + 1;
        let mut a = DMatrix::zeros(n, n);
        let mut b = DVector::zeros(n);
        let kmat = crate::operators::assemble_diffusion(m);
        for (di, &fi) in m.internal_faces.iter().enumerate() {
            for (dj, &fj) in m.internal_faces.iter().enumerate() {
                let v = kmat.get(fi, fj);
                a[(2 * di, 2 * dj)] = v;
                a[(2 * di + 1, 2 * dj + 1)] = v;
            }
            // |D| grad p = |sigma| (p_L - p_K) n_K
            let face = &m.faces[fi];
            let (k, l) = (face.owner, face.neighbor.unwrap());
            for c in 0..2 {
                a[(2 * di + c, nu + l)] += face.length * face.normal[c];
                a[(2 * di + c, nu + k)] -= face.length * face.normal[c];
                b[2 * di + c] = m.dual_volumes[fi] * src.values[fi][c];
            }
        }
        for k in 0..np {
            let cell = &m.cells[k];
            for j in 0..4 {
                let fc = cell.faces[j];
                if let Some(dd) = m.face_dof[fc] {
                    let nn = m.outward_normal(k, j);
                    for c in 0..2 {
                        a[(nu + k, 2 * dd + c)] += m.faces[fc].length * nn[c];
                    }
                }
            }
            a[(nu + k, n - 1)] = cell.volume;
            a[(n - 1, nu + k)] = cell.volume;
        }
        let x = a.lu().solve(&b).unwrap();
        let ud = u.to_dofs(m);
        for i in 0..nu {
            assert!((ud[i] - x[i]).abs() < 1e-9, "u dof {i}: {} vs {}", ud[i], x[i]);
        }
        for k in 0..np {
            assert!((p.values[k] - x[nu + k]).abs() < 1e-9);
        }
    }

    #[test]
    fn leray_projection_removes_divergence_and_is_idempotent() {
        let d = disc(5, 0.25, 6);
        let m = &d.mesh;
        let u = random_velocity(m, &mut rng(6));
        let v = leray_project(&d, &u).unwrap();
        assert!(divergence(&v, m).values.iter().all(|x| x.abs() < 1e-12));
        let w = leray_project(&d, &v).unwrap();
        for (a, b) in v.values.iter().zip(&w.values) {
            assert!((a[0] - b[0]).abs() < 1e-13 && (a[1] - b[1]).abs() < 1e-13);
        }
    }
}
