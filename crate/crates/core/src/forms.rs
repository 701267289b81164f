//! Convection forms built on a flux set, evaluated against test fields.

use crate::fields::FaceVectorField;
use crate::fluxes::FluxSet;
use crate::mesh::Mesh;

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn mid(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
}

/// `sum_sigma (v_sigma . w_sigma) sum_eps F_{sigma,eps}`.
pub fn q_mass(fluxes: &FluxSet, v: &FaceVectorField, w: &FaceVectorField, mesh: &Mesh) -> f64 {
    let bal = fluxes.dual_balance(mesh);
    (0..mesh.n_faces()).map(|f| dot(v.values[f], w.values[f]) * bal[f]).sum()
}

/// `q_mass` written on primal fluxes: `-1/4 sum_{sigma=K|L} F_{K,sigma} (Phi_L - Phi_K)`
/// with `Phi_K = sum_{sigma in E(K)} v_sigma . w_sigma`.
pub fn q_mass_reordered(fluxes: &FluxSet, v: &FaceVectorField, w: &FaceVectorField, mesh: &Mesh) -> f64 {
    let phi: Vec<f64> =
        mesh.cells.iter().map(|c| c.faces.iter().map(|&f| dot(v.values[f], w.values[f])).sum()).collect();
    let mut s = 0.0;
    for (f, face) in mesh.faces.iter().enumerate() {
        if let Some(l) = face.neighbor {
            let k = face.owner;
            let fk = fluxes.primal[k][mesh.local_face(k, f).expect("owner holds face")];
            s -= 0.25 * fk * (phi[l] - phi[k]);
        }
    }
    s
}

/// `sum_sigma w_sigma . sum_eps F_{sigma,eps} (v_sigma + v_sigma') / 2`.
pub fn q_mom_dual(fluxes: &FluxSet, v: &FaceVectorField, w: &FaceVectorField, mesh: &Mesh) -> f64 {
    let mut s = 0.0;
    for (k, cell) in mesh.cells.iter().enumerate() {
        let f = cell.faces;
        for j in 0..4 {
            let o = fluxes.half_diamond_outflows(k, j);
            let vj = v.values[f[j]];
            let conv = [
                o[0] * mid(vj, v.values[f[(j + 3) % 4]])[0] + o[1] * mid(vj, v.values[f[(j + 1) % 4]])[0],
                o[0] * mid(vj, v.values[f[(j + 3) % 4]])[1] + o[1] * mid(vj, v.values[f[(j + 1) % 4]])[1],
            ];
            s += dot(w.values[f[j]], conv);
        }
    }
    s
}

/// `sum_K w_K . sum_sigma F_{K,sigma} v_sigma` with `w_K` the mean of the four face values.
pub fn q_mom_primal(fluxes: &FluxSet, v: &FaceVectorField, w: &FaceVectorField, mesh: &Mesh) -> f64 {
    let mut s = 0.0;
    for (k, cell) in mesh.cells.iter().enumerate() {
        let mut wk = [0.0; 2];
        let mut conv = [0.0; 2];
        for j in 0..4 {
            let f = cell.faces[j];
            wk[0] += 0.25 * w.values[f][0];
            wk[1] += 0.25 * w.values[f][1];
            conv[0] += fluxes.primal[k][j] * v.values[f][0];
            conv[1] += fluxes.primal[k][j] * v.values[f][1];
        }
        s += dot(wk, conv);
    }
    s
}

/// Cellwise form `sum_K sum_sigma w^K_sigma . (F_{K,sigma} v_sigma + sum_{eps in K} F_{sigma,eps} v_eps)`
/// with test values given per cell and local face. Face-wise `w^K_sigma = w_sigma`
/// recovers `q_mom_dual`; cellwise constant `w^K_sigma = w_K` recovers `q_mom_primal`.
pub fn q_mom_split(fluxes: &FluxSet, v: &FaceVectorField, w_cell: &[[[f64; 2]; 4]], mesh: &Mesh) -> f64 {
    let mut s = 0.0;
    for (k, cell) in mesh.cells.iter().enumerate() {
        let f = cell.faces;
        for j in 0..4 {
            let o = fluxes.half_diamond_outflows(k, j);
            let vj = v.values[f[j]];
            let vp = mid(vj, v.values[f[(j + 3) % 4]]);
            let vn = mid(vj, v.values[f[(j + 1) % 4]]);
            let fk = fluxes.primal[k][j];
            let conv = [fk * vj[0] + o[0] * vp[0] + o[1] * vn[0], fk * vj[1] + o[0] * vp[1] + o[1] * vn[1]];
            s += dot(w_cell[k][j], conv);
        }
    }
    s
}

/// `q_mom_dual(v, v) - q_mass(v, v) / 2`, zero for any conservative dual fluxes.
pub fn skew_defect(fluxes: &FluxSet, v: &FaceVectorField, mesh: &Mesh) -> f64 {
    q_mom_dual(fluxes, v, v, mesh) - 0.5 * q_mass(fluxes, v, v, mesh)
}
