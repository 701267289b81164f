use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fields::{CellScalarField, FaceVectorField};
use crate::mesh::Mesh;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_velocity(mesh: &Mesh, rng: &mut ChaCha8Rng) -> FaceVectorField {
    let mut u = FaceVectorField::zeros(mesh);
    for &f in &mesh.internal_faces {
        u.values[f] = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
    }
    u
}

pub fn random_cells(mesh: &Mesh, rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> CellScalarField {
    CellScalarField { values: (0..mesh.n_cells()).map(|_| rng.random_range(lo..hi)).collect() }
}

/// Normal velocities from a vertex potential vanishing on the boundary:
/// discretely divergence free on any mesh.
pub fn solenoidal(mesh: &Mesh, rng: &mut ChaCha8Rng) -> FaceVectorField {
    let mut boundary = vec![false; mesh.vertices.len()];
    for face in mesh.faces.iter().filter(|f| !f.is_internal()) {
        boundary[face.vertices[0]] = true;
        boundary[face.vertices[1]] = true;
    }
    let psi: Vec<f64> = boundary.iter().map(|&b| if b { 0.0 } else { rng.random_range(-1.0..1.0) }).collect();
    let mut u = FaceVectorField::zeros(mesh);
    for &f in &mesh.internal_faces {
        let face = &mesh.faces[f];
        let un = (psi[face.vertices[1]] - psi[face.vertices[0]]) / face.length;
        u.values[f] = [un * face.normal[0], un * face.normal[1]];
    }
    u
}
