//! Discrete divergence and gradient, the rotated bilinear element and the
//! diffusion operator.

pub mod rt;
mod sparse;

pub use sparse::SparseOperator;

use crate::fields::{CellScalarField, FaceVectorField};
use crate::mesh::Mesh;
use crate::quadrature::{gauss_legendre, square_rule};

/// `(div u)_K = (1/|K|) sum_sigma |sigma| u_sigma . n_{K,sigma}`.
pub fn divergence(u: &FaceVectorField, mesh: &Mesh) -> CellScalarField {
    let values = (0..mesh.n_cells())
        .map(|k| {
            let cell = &mesh.cells[k];
            let mut s = 0.0;
            for j in 0..4 {
                let f = cell.faces[j];
                let n = mesh.outward_normal(k, j);
                let v = u.values[f];
                s += mesh.faces[f].length * (v[0] * n[0] + v[1] * n[1]);
            }
            s / cell.volume
        })
        .collect();
    CellScalarField { values }
}

/// `(grad p)_sigma = (|sigma|/|D_sigma|)(p_L - p_K) n_{K,sigma}`; zero on external faces.
pub fn gradient(p: &CellScalarField, mesh: &Mesh) -> FaceVectorField {
    let mut g = FaceVectorField::zeros(mesh);
    for (f, face) in mesh.faces.iter().enumerate() {
        if let Some(l) = face.neighbor {
            let s = face.length / mesh.dual_volumes[f] * (p.values[l] - p.values[face.owner]);
            g.values[f] = [s * face.normal[0], s * face.normal[1]];
        }
    }
    g
}

/// `B[K, 2d + c] = |sigma| n_{K,sigma,c}` over internal dofs, so that
/// `|K| (div u)_K = (B u)_K` and `|D| grad p = -B^T p`.
pub fn divergence_matrix(mesh: &Mesh) -> SparseOperator {
    let mut trip = Vec::with_capacity(8 * mesh.n_internal());
    for (d, &f) in mesh.internal_faces.iter().enumerate() {
        let face = &mesh.faces[f];
        let l = face.neighbor.expect("internal face");
        for c in 0..2 {
            let v = face.length * face.normal[c];
            trip.push((face.owner, 2 * d + c, v));
            trip.push((l, 2 * d + c, -v));
        }
    }
    SparseOperator::from_triplets(mesh.n_cells(), 2 * mesh.n_internal(), trip, false)
}

/// Scalar stiffness `int_K grad zeta_i . grad zeta_j` over internal dofs.
pub fn stiffness_internal(mesh: &Mesh) -> SparseOperator {
    let rule = square_rule(3);
    let mut trip = Vec::with_capacity(16 * mesh.n_cells());
    for k in 0..mesh.n_cells() {
        let mut local = [[0.0; 4]; 4];
        for &(x, y, w) in &rule {
            let (g, det) = rt::physical_gradients(mesh, k, x, y);
            for i in 0..4 {
                for j in 0..4 {
                    local[i][j] += w * det * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
                }
            }
        }
        let faces = mesh.cells[k].faces;
        for i in 0..4 {
            let Some(di) = mesh.face_dof[faces[i]] else { continue };
            for j in 0..4 {
                if let Some(dj) = mesh.face_dof[faces[j]] {
                    trip.push((di, dj, local[i][j]));
                }
            }
        }
    }
    let n = mesh.n_internal();
    SparseOperator::from_triplets(n, n, trip, true)
}

/// Scalar stiffness indexed by face, with identity rows on external faces.
pub fn assemble_diffusion(mesh: &Mesh) -> SparseOperator {
    let a = stiffness_internal(mesh);
    let mut trip: Vec<_> =
        a.triplets().into_iter().map(|(r, c, v)| (mesh.internal_faces[r], mesh.internal_faces[c], v)).collect();
    for (f, face) in mesh.faces.iter().enumerate() {
        if !face.is_internal() {
            trip.push((f, f, 1.0));
        }
    }
    SparseOperator::from_triplets(mesh.n_faces(), mesh.n_faces(), trip, true)
}

/// Per-face integrals of the reconstruction jump `[u]` and of `|[u]|^2`.
/// On external faces the jump is the trace from the owner.
#[derive(Debug, Clone)]
pub struct JumpIntegrals {
    pub mean: Vec<[f64; 2]>,
    pub square: Vec<f64>,
}

pub fn jump_integrals(u: &FaceVectorField, mesh: &Mesh) -> JumpIntegrals {
    let (t, w) = gauss_legendre(3);
    let mut mean = vec![[0.0; 2]; mesh.n_faces()];
    let mut square = vec![0.0; mesh.n_faces()];
    for (f, face) in mesh.faces.iter().enumerate() {
        let k = face.owner;
        let jk = mesh.local_face(k, f).expect("owner holds face");
        let other = face.neighbor.map(|l| (l, mesh.local_face(l, f).expect("neighbor holds face")));
        for q in 0..t.len() {
            let (x, y) = rt::face_point(jk, t[q]);
            let mut jump = rt::reconstruct(mesh, &u.values, k, x, y);
            if let Some((l, jl)) = other {
                let (x, y) = rt::face_point(jl, 1.0 - t[q]);
                let ul = rt::reconstruct(mesh, &u.values, l, x, y);
                jump = [jump[0] - ul[0], jump[1] - ul[1]];
            }
            let ww = w[q] * face.length;
            mean[f][0] += ww * jump[0];
            mean[f][1] += ww * jump[1];
            square[f] += ww * (jump[0] * jump[0] + jump[1] * jump[1]);
        }
    }
    JumpIntegrals { mean, square }
}
