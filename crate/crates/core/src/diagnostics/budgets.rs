use std::fmt::Write;

use crate::error::{Error, Result};
use crate::fields::{norm, CellScalarField, FaceVectorField, NormKind, State};
use crate::fluxes::primal_fluxes;
use crate::mesh::Mesh;
use crate::timestepping::{Convection, Discretization, SchemeParams, StepArtifacts};

/// Terms of the discrete `rho^2` or kinetic-energy balance over one step.
/// Per-entity arrays are empty when the report does not cover that entity.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BudgetReport {
    pub cell_residual: Vec<f64>,
    pub cell_remainder: Vec<f64>,
    /// Per-face residual relative to the size of the local terms.
    pub face_residual: Vec<f64>,
    pub face_remainder: Vec<f64>,
    pub mass: f64,
    /// `1/2 sum |K| rho^2` at the new and old time.
    pub rho_square: f64,
    pub rho_square_old: f64,
    /// `1/2 sum |D| rho_D |u|^2` at the new and old time.
    pub kinetic_energy: f64,
    pub kinetic_energy_old: f64,
    /// `dt mu ||u||_b^2`.
    pub dissipation: f64,
    /// Upwind dissipation: density jumps for the `rho^2` balance, velocity jumps
    /// for the kinetic energy with upwind momentum convection.
    pub upwind_dissipation: f64,
    pub remainder_total: f64,
    /// `dt sum |D| f . u`.
    pub source_work: f64,
    /// Defect of the summed identity relative to the old total.
    pub global_residual: f64,
    pub rho_min: f64,
    pub rho_max: f64,
}

impl BudgetReport {
    pub fn max_cell_residual(&self) -> f64 {
        self.cell_residual.iter().fold(0.0, |a, b| a.max(b.abs()))
    }

    pub fn max_face_residual(&self) -> f64 {
        self.face_residual.iter().fold(0.0, |a, b| a.max(b.abs()))
    }

    /// Smallest remainder over cells and faces, `0` when none are recorded.
    pub fn min_remainder(&self) -> f64 {
        self.cell_remainder.iter().chain(&self.face_remainder).copied().fold(0.0, f64::min)
    }

    /// One CSV line with the global tallies; see [`BudgetReport::csv_header`].
    pub fn csv_row(&self, step: usize, time: f64) -> String {
        let mut s = String::new();
        let _ = write!(
            s,
            "{step},{time:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?}",
            self.mass,
            self.rho_min,
            self.rho_max,
            self.rho_square,
            self.kinetic_energy,
            self.dissipation,
            self.upwind_dissipation,
            self.remainder_total,
            self.source_work,
            self.global_residual,
            self.max_cell_residual(),
            self.max_face_residual(),
            self.min_remainder()
        );
        s
    }

    pub fn csv_header() -> &'static str {
        "step,time,mass,rho_min,rho_max,rho_square,kinetic_energy,dissipation,upwind_dissipation,remainder,source_work,global_residual,max_cell_residual,max_face_residual,min_remainder"
    }
}

/// `1/2 sum_sigma |D| rho_D |u|^2`.
pub fn kinetic_energy(state: &State, mesh: &Mesh) -> f64 {
    0.5 * (0..mesh.n_faces())
        .map(|f| {
            let u = state.u.values[f];
            mesh.dual_volumes[f] * state.rho_dual.values[f] * (u[0] * u[0] + u[1] * u[1])
        })
        .sum::<f64>()
}

/// Per-cell `rho^2` balance of one upwind mass step convected by `u_conv`:
/// `(|K|/2dt)(rho^2 - rho_old^2) + 1/2 sum |sigma| rho_sigma^2 u.n + R_K = 0`.
pub fn rho_square_budget(
    rho_old: &CellScalarField,
    rho_new: &CellScalarField,
    u_conv: &FaceVectorField,
    dt: f64,
    mesh: &Mesh,
) -> BudgetReport {
    let set = primal_fluxes(rho_new, u_conv, mesh);
    let n = mesh.n_cells();
    let mut cell_residual = vec![0.0; n];
    let mut cell_remainder = vec![0.0; n];
    for (k, cell) in mesh.cells.iter().enumerate() {
        let (r, r0) = (rho_new.values[k], rho_old.values[k]);
        let mut conv = 0.0;
        let mut jump = 0.0;
        let mut scale = cell.volume / (2.0 * dt) * (r * r + r0 * r0);
        for j in 0..4 {
            let f = cell.faces[j];
            if !mesh.faces[f].is_internal() {
                continue;
            }
            let nn = mesh.outward_normal(k, j);
            let un = u_conv.values[f][0] * nn[0] + u_conv.values[f][1] * nn[1];
            let rs = set.rho_face.values[f];
            let len = mesh.faces[f].length;
            conv += 0.5 * len * rs * rs * un;
            jump += 0.5 * len * (rs - r).powi(2) * un;
            scale += 0.5 * len * rs * rs * un.abs();
        }
        let rem = cell.volume / (2.0 * dt) * (r - r0).powi(2) - jump;
        let res = cell.volume / (2.0 * dt) * (r * r - r0 * r0) + conv + rem;
        cell_residual[k] = res / scale.max(f64::MIN_POSITIVE);
        cell_remainder[k] = rem;
    }
    let half_sq = |rho: &CellScalarField| 0.5 * (0..n).map(|k| mesh.cells[k].volume * rho.values[k].powi(2)).sum::<f64>();
    let mut upwind = 0.0;
    for (f, face) in mesh.faces.iter().enumerate() {
        if let Some(l) = face.neighbor {
            let un = u_conv.values[f][0] * face.normal[0] + u_conv.values[f][1] * face.normal[1];
            upwind += 0.5 * dt * face.length * (rho_new.values[l] - rho_new.values[face.owner]).powi(2) * un.abs();
        }
    }
    let remainder_total = 0.5 * (0..n).map(|k| mesh.cells[k].volume * (rho_new.values[k] - rho_old.values[k]).powi(2)).sum::<f64>();
    let (new, old) = (half_sq(rho_new), half_sq(rho_old));
    BudgetReport {
        cell_residual,
        cell_remainder,
        mass: rho_new.integral(mesh),
        rho_square: new,
        rho_square_old: old,
        upwind_dissipation: upwind,
        remainder_total,
        global_residual: (new + upwind + remainder_total - old) / old.max(f64::MIN_POSITIVE),
        rho_min: rho_new.min(),
        rho_max: rho_new.max(),
        ..Default::default()
    }
}

/// Per-face kinetic-energy balance of one step, evaluated with the fluxes and
/// source the step retained; also includes the `rho^2` balance of the mass step.
pub fn energy_budget(
    old: &State,
    new: &State,
    art: &StepArtifacts,
    params: &SchemeParams,
    disc: &Discretization,
) -> Result<BudgetReport> {
    let mesh = &disc.mesh;
    if art.fluxes.primal.len() != mesh.n_cells() || art.source.values.len() != mesh.n_faces() {
        return Err(Error::InvalidParameter("step artifacts do not match the mesh".into()));
    }
    let dt = params.dt;
    let fl = &art.fluxes;
    let u = &new.u.values;
    let u0 = &old.u.values;
    let dotv = |a: [f64; 2], b: [f64; 2]| a[0] * b[0] + a[1] * b[1];
    let nf = mesh.n_faces();

    let mut conv = vec![0.0; nf];
    let mut upw = vec![0.0; nf];
    for (k, cell) in mesh.cells.iter().enumerate() {
        for j in 0..4 {
            let f = cell.faces[j];
            let o = fl.half_diamond_outflows(k, j);
            for (flux, other) in o.into_iter().zip([cell.faces[(j + 3) % 4], cell.faces[(j + 1) % 4]]) {
                conv[f] += 0.5 * flux * dotv(u[f], u[other]);
                if params.convection == Convection::Upwind {
                    // upwind minus centered face value, tested against u_sigma
                    let half = 0.5 * flux.abs();
                    upw[f] += half * (dotv(u[f], u[f]) - dotv(u[other], u[f]));
                }
            }
        }
    }
    let x = new.u.to_dofs(mesh);
    let mut kx = vec![0.0; x.len()];
    for (r, c, v) in disc.stiffness.triplets() {
        kx[2 * r] += params.mu * v * x[2 * c];
        kx[2 * r + 1] += params.mu * v * x[2 * c + 1];
    }
    let btp = disc.div_t.matvec(&new.p.values);

    let mut face_residual = vec![0.0; nf];
    let mut face_remainder = vec![0.0; nf];
    let (mut rem_total, mut src_total, mut upw_total) = (0.0, 0.0, 0.0);
    for (d, &f) in mesh.internal_faces.iter().enumerate() {
        let vol = mesh.dual_volumes[f];
        let (rn, ro) = (new.rho_dual.values[f], old.rho_dual.values[f]);
        let time = vol / (2.0 * dt) * (rn * dotv(u[f], u[f]) - ro * dotv(u0[f], u0[f]));
        let diff = kx[2 * d] * x[2 * d] + kx[2 * d + 1] * x[2 * d + 1];
        let press = -(btp[2 * d] * x[2 * d] + btp[2 * d + 1] * x[2 * d + 1]);
        let du = [u[f][0] - u0[f][0], u[f][1] - u0[f][1]];
        let rem = ro / (2.0 * dt) * dotv(du, du);
        let src = vol * dotv(art.source.values[f], u[f]);
        let res = time + conv[f] + upw[f] + diff + press + vol * rem - src;
        let scale = vol / (2.0 * dt) * (rn * dotv(u[f], u[f]) + ro * dotv(u0[f], u0[f]))
            + conv[f].abs()
            + upw[f].abs()
            + diff.abs()
            + press.abs()
            + vol * rem
            + src.abs();
        face_residual[f] = if res == 0.0 { 0.0 } else { res / scale.max(f64::MIN_POSITIVE) };
        face_remainder[f] = rem;
        rem_total += dt * vol * rem;
        src_total += dt * src;
        upw_total += dt * upw[f];
    }
    let ke = kinetic_energy(new, mesh);
    let ke0 = kinetic_energy(old, mesh);
    let b = norm(&new.u, NormKind::BrokenH1, mesh)?;
    let dissipation = dt * params.mu * b * b;
    let pressure_work: f64 = dt * btp.iter().zip(&x).map(|(g, v)| g * v).sum::<f64>();
    let lhs = ke + dissipation + rem_total + upw_total - src_total - pressure_work;
    let rho_report = rho_square_budget(&old.rho, &new.rho, &art.u_conv, dt, mesh);
    Ok(BudgetReport {
        face_residual,
        face_remainder,
        kinetic_energy: ke,
        kinetic_energy_old: ke0,
        dissipation,
        upwind_dissipation: upw_total,
        remainder_total: rem_total,
        source_work: src_total,
        global_residual: (lhs - ke0) / ke0.max(lhs.abs()).max(f64::MIN_POSITIVE),
        ..rho_report
    })
}
