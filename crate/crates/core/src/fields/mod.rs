//! Piecewise constant fields on cells and faces, projection of continuous
//! data, dual densities and discrete norms.

mod norms;

pub use norms::{norm, FieldRef, NormKind};

use std::fmt::Write;

use crate::mesh::geometry::Point;
use crate::mesh::Mesh;
use crate::quadrature::{gauss_legendre, square_rule, triangle_rule};

/// One value per cell (density, pressure).
#[derive(Debug, Clone, PartialEq)]
pub struct CellScalarField {
    pub values: Vec<f64>,
}

/// One value per face (dual densities, upwind face densities).
#[derive(Debug, Clone, PartialEq)]
pub struct FaceScalarField {
    pub values: Vec<f64>,
}

/// One 2-vector per face; external faces hold zero in the Dirichlet space.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceVectorField {
    pub values: Vec<[f64; 2]>,
}

impl CellScalarField {
    pub fn constant(mesh: &Mesh, c: f64) -> Self {
        CellScalarField { values: vec![c; mesh.n_cells()] }
    }

    pub fn zeros(mesh: &Mesh) -> Self {
        Self::constant(mesh, 0.0)
    }

    /// `sum_K |K| v_K`.
    pub fn integral(&self, mesh: &Mesh) -> f64 {
        mesh.cells.iter().zip(&self.values).map(|(c, v)| c.volume * v).sum()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Shifts the field to zero mean.
    pub fn remove_mean(&mut self, mesh: &Mesh) {
        let m = self.integral(mesh) / mesh.area();
        self.values.iter_mut().for_each(|v| *v -= m);
    }
}

impl FaceScalarField {
    pub fn constant(mesh: &Mesh, c: f64) -> Self {
        FaceScalarField { values: vec![c; mesh.n_faces()] }
    }
}

impl FaceVectorField {
    pub fn zeros(mesh: &Mesh) -> Self {
        FaceVectorField { values: vec![[0.0; 2]; mesh.n_faces()] }
    }

    /// Sets every external face to zero.
    pub fn enforce_boundary(&mut self, mesh: &Mesh) {
        for (f, face) in mesh.faces.iter().enumerate() {
            if !face.is_internal() {
                self.values[f] = [0.0; 2];
            }
        }
    }

    /// Largest magnitude carried by an external face, with its index.
    pub fn max_boundary_value(&self, mesh: &Mesh) -> Option<(usize, f64)> {
        mesh.faces
            .iter()
            .enumerate()
            .filter(|(_, f)| !f.is_internal())
            .map(|(i, _)| (i, self.values[i][0].abs().max(self.values[i][1].abs())))
            .max_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Interleaved internal unknowns `[u_0x, u_0y, u_1x, ...]` in dof order.
    pub fn to_dofs(&self, mesh: &Mesh) -> Vec<f64> {
        let mut x = vec![0.0; 2 * mesh.n_internal()];
        for (d, &f) in mesh.internal_faces.iter().enumerate() {
            x[2 * d] = self.values[f][0];
            x[2 * d + 1] = self.values[f][1];
        }
        x
    }

    pub fn from_dofs(mesh: &Mesh, x: &[f64]) -> Self {
        let mut u = Self::zeros(mesh);
        for (d, &f) in mesh.internal_faces.iter().enumerate() {
            u.values[f] = [x[2 * d], x[2 * d + 1]];
        }
        u
    }

    /// Component `c` as a flat per-face vector.
    pub fn component(&self, c: usize) -> Vec<f64> {
        self.values.iter().map(|v| v[c]).collect()
    }

    /// `sum_sigma |D_sigma| u_sigma . v_sigma`.
    pub fn dual_inner(&self, other: &FaceVectorField, mesh: &Mesh) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .zip(&mesh.dual_volumes)
            .map(|((a, b), d)| d * (a[0] * b[0] + a[1] * b[1]))
            .sum()
    }
}

/// Solution at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub time: f64,
    pub rho: CellScalarField,
    pub u: FaceVectorField,
    pub p: CellScalarField,
    pub rho_dual: FaceScalarField,
}

impl State {
    /// State at `time` with zero pressure and the matching dual density.
    pub fn new(mesh: &Mesh, time: f64, rho: CellScalarField, u: FaceVectorField) -> Self {
        let rho_dual = dual_density(&rho, mesh);
        State { time, rho, u, p: CellScalarField::zeros(mesh), rho_dual }
    }
}

/// Cell means of `f` by 3x3 Gauss through the bilinear cell map.
pub fn project_cell(f: impl Fn(Point) -> f64, mesh: &Mesh) -> CellScalarField {
    let rule = square_rule(3);
    let values = (0..mesh.n_cells())
        .map(|k| {
            let mut s = 0.0;
            for &(x, y, w) in &rule {
                let j = mesh.map_jacobian(k, x, y);
                let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
                s += w * det * f(mesh.map_point(k, x, y));
            }
            s / mesh.cells[k].volume
        })
        .collect();
    CellScalarField { values }
}

/// Face means of `v` by 5-point Gauss; external faces set to zero.
pub fn interpolate_face(v: impl Fn(Point) -> [f64; 2], mesh: &Mesh) -> FaceVectorField {
    let (t, w) = gauss_legendre(5);
    let mut u = FaceVectorField::zeros(mesh);
    for (f, face) in mesh.faces.iter().enumerate() {
        if !face.is_internal() {
            continue;
        }
        let a = mesh.vertices[face.vertices[0]];
        let b = mesh.vertices[face.vertices[1]];
        let mut s = [0.0; 2];
        for q in 0..t.len() {
            let p = [a[0] + t[q] * (b[0] - a[0]), a[1] + t[q] * (b[1] - a[1])];
            let val = v(p);
            s[0] += w[q] * val[0];
            s[1] += w[q] * val[1];
        }
        u.values[f] = s;
    }
    u
}

/// Means of `v` over each dual cell, integrated on its half-diamond triangles.
pub fn dual_cell_average(v: impl Fn(Point) -> [f64; 2], mesh: &Mesh) -> FaceVectorField {
    let mut acc = vec![[0.0; 2]; mesh.n_faces()];
    let mut vol = vec![0.0; mesh.n_faces()];
    for k in 0..mesh.n_cells() {
        for j in 0..4 {
            let f = mesh.cells[k].faces[j];
            for (p, w) in triangle_rule(&mesh.half_diamond(k, j), 4) {
                let val = v(p);
                acc[f][0] += w * val[0];
                acc[f][1] += w * val[1];
                vol[f] += w;
            }
        }
    }
    FaceVectorField { values: acc.iter().zip(&vol).map(|(a, v)| [a[0] / v, a[1] / v]).collect() }
}

/// `|D_sigma| rho_D = (|K| rho_K + |L| rho_L) / 4`; `rho_K` on external faces.
pub fn dual_density(rho: &CellScalarField, mesh: &Mesh) -> FaceScalarField {
    let values = mesh
        .faces
        .iter()
        .enumerate()
        .map(|(f, face)| match face.neighbor {
            None => rho.values[face.owner],
            Some(l) => {
                let k = face.owner;
                0.25 * (mesh.cells[k].volume * rho.values[k] + mesh.cells[l].volume * rho.values[l]) / mesh.dual_volumes[f]
            }
        })
        .collect();
    FaceScalarField { values }
}

/// CSV rows `entity_id,x,y,<name>` at cell centroids.
pub fn cell_csv(field: &CellScalarField, mesh: &Mesh, name: &str) -> String {
    let mut s = format!("entity_id,x,y,{name}\n");
    for (k, cell) in mesh.cells.iter().enumerate() {
        let _ = writeln!(s, "{k},{:?},{:?},{:?}", cell.centroid[0], cell.centroid[1], field.values[k]);
    }
    s
}

/// CSV rows `entity_id,x,y,<name>` at face midpoints.
pub fn face_scalar_csv(field: &FaceScalarField, mesh: &Mesh, name: &str) -> String {
    let mut s = format!("entity_id,x,y,{name}\n");
    for (f, face) in mesh.faces.iter().enumerate() {
        let _ = writeln!(s, "{f},{:?},{:?},{:?}", face.midpoint[0], face.midpoint[1], field.values[f]);
    }
    s
}

/// CSV rows `entity_id,x,y,<name>_x,<name>_y` at face midpoints.
pub fn face_vector_csv(field: &FaceVectorField, mesh: &Mesh, name: &str) -> String {
    let mut s = format!("entity_id,x,y,{name}_x,{name}_y\n");
    for (f, face) in mesh.faces.iter().enumerate() {
        let v = field.values[f];
        let _ = writeln!(s, "{f},{:?},{:?},{:?},{:?}", face.midpoint[0], face.midpoint[1], v[0], v[1]);
    }
    s
}
