//! Two-dimensional staggered discretizations on convex quadrilaterals.
//!
//! Local conventions, shared by every module of the crate:
//!
//! - cell vertices are counter-clockwise, mapped to the reference square as
//!   `0 -> (0,0)`, `1 -> (1,0)`, `2 -> (1,1)`, `3 -> (0,1)`;
//! - local face `j` joins vertex `j` to vertex `j + 1`, so faces `0, 1, 2, 3`
//!   are the reference faces `y=0`, `x=1`, `y=1`, `x=0`;
//! - local dual face `j` is the segment from the mass center to vertex `j`;
//!   it separates the half-diamonds of local faces `j - 1` and `j`.

mod build;
pub mod geometry;
mod io;
mod regularity;

pub use regularity::RegularityReport;

use std::collections::HashMap;

use crate::error::{Error, Result};
use geometry::{centroid, diameter, dist, is_strictly_convex, signed_area, Point};

#[derive(Clone, Debug, PartialEq)]
pub struct Face {
    /// Endpoints, ordered counter-clockwise with respect to the owner cell.
    pub vertices: [usize; 2],
    pub owner: usize,
    pub neighbor: Option<usize>,
    pub length: f64,
    pub midpoint: Point,
    /// Unit normal pointing out of the owner.
    pub normal: Point,
}

impl Face {
    pub fn is_internal(&self) -> bool {
        self.neighbor.is_some()
    }

    /// The cell on the other side of the face, seen from `cell`.
    pub fn other(&self, cell: usize) -> Option<usize> {
        if cell == self.owner {
            self.neighbor
        } else {
            Some(self.owner)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub vertices: [usize; 4],
    pub faces: [usize; 4],
    /// `+1` when the cell owns the face, `-1` otherwise.
    pub orientation: [f64; 4],
    pub volume: f64,
    pub centroid: Point,
    pub diameter: f64,
}

/// A dual face: the segment from a cell's mass center to one of its vertices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualFace {
    pub cell: usize,
    pub local_vertex: usize,
    /// Faces whose half-diamonds meet here: `[previous, next]` in local order.
    /// Fluxes are stored oriented from the `previous` half-diamond into the
    /// `next` one.
    pub faces: [usize; 2],
    pub measure: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<Point>,
    pub cells: Vec<Cell>,
    pub faces: Vec<Face>,
    /// `|D_sigma|`, sum of the quarter volumes of the adjacent cells.
    pub dual_volumes: Vec<f64>,
    /// Ids of internal faces, in increasing order.
    pub internal_faces: Vec<usize>,
    /// Velocity unknown index of each face (`None` on the boundary).
    pub face_dof: Vec<Option<usize>>,
}

impl Mesh {
    /// Builds the face structure and dual volumes from raw quadrilaterals.
    ///
    /// Cells must be counter-clockwise and strictly convex; every edge must
    /// be shared by at most two cells.
    pub fn from_quads(vertices: Vec<Point>, quads: Vec<[usize; 4]>) -> Result<Mesh> {
        if quads.is_empty() {
            return Err(Error::InvalidMesh("no cells".into()));
        }
        let mut faces: Vec<Face> = Vec::new();
        let mut edge_map: HashMap<(usize, usize), usize> = HashMap::new();
        let mut cells = Vec::with_capacity(quads.len());

        for (k, quad) in quads.iter().enumerate() {
            if let Some(&v) = quad.iter().find(|&&v| v >= vertices.len()) {
                return Err(Error::InvalidMesh(format!("cell {k} references missing vertex {v}")));
            }
            let poly: Vec<Point> = quad.iter().map(|&v| vertices[v]).collect();
            if signed_area(&poly) <= 0.0 || !is_strictly_convex(&poly) {
                return Err(Error::NonConvexCell { cell: k });
            }
            let mut cell_faces = [0usize; 4];
            let mut orientation = [0.0; 4];
            for j in 0..4 {
                let (a, b) = (quad[j], quad[(j + 1) % 4]);
                let key = (a.min(b), a.max(b));
                match edge_map.get(&key) {
                    Some(&f) => {
                        let face = &mut faces[f];
                        if face.neighbor.is_some() || face.vertices != [b, a] {
                            return Err(Error::InvalidMesh(format!(
                                "edge ({a}, {b}) of cell {k} is shared inconsistently"
                            )));
                        }
                        face.neighbor = Some(k);
                        cell_faces[j] = f;
                        orientation[j] = -1.0;
                    }
                    None => {
                        let (pa, pb) = (vertices[a], vertices[b]);
                        let length = dist(pa, pb);
                        let t = [(pb[0] - pa[0]) / length, (pb[1] - pa[1]) / length];
                        faces.push(Face {
                            vertices: [a, b],
                            owner: k,
                            neighbor: None,
                            length,
                            midpoint: [(pa[0] + pb[0]) / 2.0, (pa[1] + pb[1]) / 2.0],
                            normal: [t[1], -t[0]],
                        });
                        let f = faces.len() - 1;
                        edge_map.insert(key, f);
                        cell_faces[j] = f;
                        orientation[j] = 1.0;
                    }
                }
            }
            cells.push(Cell {
                vertices: *quad,
                faces: cell_faces,
                orientation,
                volume: signed_area(&poly),
                centroid: centroid(&poly),
                diameter: diameter(&poly),
            });
        }

        let mut dual_volumes = vec![0.0; faces.len()];
        for cell in &cells {
            for &f in &cell.faces {
                dual_volumes[f] += cell.volume / 4.0;
            }
        }
        let internal_faces: Vec<usize> = (0..faces.len()).filter(|&f| faces[f].is_internal()).collect();
        let mut face_dof = vec![None; faces.len()];
        for (i, &f) in internal_faces.iter().enumerate() {
            face_dof[f] = Some(i);
        }
        Ok(Mesh { vertices, cells, faces, dual_volumes, internal_faces, face_dof })
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn n_internal(&self) -> usize {
        self.internal_faces.len()
    }

    /// `n_{K,sigma}` for local face `j` of cell `k`.
    pub fn outward_normal(&self, k: usize, j: usize) -> Point {
        let cell = &self.cells[k];
        let n = self.faces[cell.faces[j]].normal;
        let s = cell.orientation[j];
        [s * n[0], s * n[1]]
    }

    /// Position of `face` in the local face list of cell `k`.
    pub fn local_face(&self, k: usize, face: usize) -> Option<usize> {
        self.cells[k].faces.iter().position(|&f| f == face)
    }

    pub fn cell_polygon(&self, k: usize) -> [Point; 4] {
        self.cells[k].vertices.map(|v| self.vertices[v])
    }

    pub fn dual_face(&self, k: usize, j: usize) -> DualFace {
        let cell = &self.cells[k];
        DualFace {
            cell: k,
            local_vertex: j,
            faces: [cell.faces[(j + 3) % 4], cell.faces[j]],
            measure: dist(cell.centroid, self.vertices[cell.vertices[j]]),
        }
    }

    /// Half-diamond `D_{K,sigma}` in its geometric realization: the triangle
    /// spanned by the face and the mass center of `K`, counter-clockwise.
    pub fn half_diamond(&self, k: usize, j: usize) -> [Point; 3] {
        let cell = &self.cells[k];
        [
            self.vertices[cell.vertices[j]],
            self.vertices[cell.vertices[(j + 1) % 4]],
            cell.centroid,
        ]
    }

    /// Total area `|Omega|`.
    pub fn area(&self) -> f64 {
        self.cells.iter().map(|c| c.volume).sum()
    }

    /// Bilinear reference map `x(xi, eta)` of cell `k`.
    pub fn map_point(&self, k: usize, xi: f64, eta: f64) -> Point {
        let p = self.cell_polygon(k);
        let w = [(1.0 - xi) * (1.0 - eta), xi * (1.0 - eta), xi * eta, (1.0 - xi) * eta];
        let mut x = [0.0, 0.0];
        for i in 0..4 {
            x[0] += w[i] * p[i][0];
            x[1] += w[i] * p[i][1];
        }
        x
    }

    /// Jacobian `[[dx/dxi, dx/deta], [dy/dxi, dy/deta]]` of the bilinear map.
    pub fn map_jacobian(&self, k: usize, xi: f64, eta: f64) -> [[f64; 2]; 2] {
        let p = self.cell_polygon(k);
        let dxi = [-(1.0 - eta), 1.0 - eta, eta, -eta];
        let deta = [-(1.0 - xi), -xi, xi, 1.0 - xi];
        let mut j = [[0.0; 2]; 2];
        for i in 0..4 {
            for c in 0..2 {
                j[c][0] += dxi[i] * p[i][c];
                j[c][1] += deta[i] * p[i][c];
            }
        }
        j
    }

    /// Checks the structural invariants; returns the first violation found.
    pub fn validate(&self) -> Result<()> {
        for (k, cell) in self.cells.iter().enumerate() {
            let perim: f64 = cell.faces.iter().map(|&f| self.faces[f].length).sum();
            let mut closure = [0.0, 0.0];
            for j in 0..4 {
                let n = self.outward_normal(k, j);
                let l = self.faces[cell.faces[j]].length;
                closure[0] += l * n[0];
                closure[1] += l * n[1];
            }
            if closure[0].hypot(closure[1]) > 1e-13 * perim {
                return Err(Error::InvalidMesh(format!("cell {k} boundary is not closed")));
            }
            if !is_strictly_convex(&self.cell_polygon(k)) {
                return Err(Error::NonConvexCell { cell: k });
            }
        }
        for (f, face) in self.faces.iter().enumerate() {
            let sides = face.neighbor.map_or(1, |_| 2);
            let count = self.cells.iter().filter(|c| c.faces.contains(&f)).count();
            if count != sides {
                return Err(Error::InvalidMesh(format!("face {f} touches {count} cells")));
            }
        }
        let total: f64 = self.dual_volumes.iter().sum();
        if (total - self.area()).abs() > 1e-13 * self.area() {
            return Err(Error::InvalidMesh("dual volumes do not partition the domain".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn two_by_two_counts() {
        let m = Mesh::cartesian(2, 2, [0.0, 0.0], [1.0, 1.0]).unwrap();
        assert_eq!(m.n_cells(), 4);
        assert_eq!(m.n_faces(), 12);
        assert_eq!(m.n_internal(), 4);
        for k in 0..4 {
            for j in 0..4 {
                // |D_{K,sigma}| = |K| / 4
                assert_relative_eq!(m.cells[k].volume / 4.0, 1.0 / 16.0, epsilon = 1e-15);
                let _ = j;
            }
        }
        m.validate().unwrap();
    }

    #[test]
    fn single_cell_has_four_external_faces_and_four_dual_faces() {
        let m = Mesh::cartesian(1, 1, [0.0, 0.0], [1.0, 1.0]).unwrap();
        assert_eq!(m.n_faces(), 4);
        assert_eq!(m.n_internal(), 0);
        let duals: Vec<_> = (0..4).map(|j| m.dual_face(0, j)).collect();
        assert_eq!(duals.len(), 4);
        for d in duals {
            assert_relative_eq!(d.measure, 0.5f64.sqrt(), epsilon = 1e-15);
        }
    }

    #[test]
    fn normals_are_opposite_across_internal_faces() {
        let m = Mesh::cartesian(3, 2, [0.0, 0.0], [3.0, 1.0]).unwrap();
        for (f, face) in m.faces.iter().enumerate() {
            if let Some(l) = face.neighbor {
                let jk = m.local_face(face.owner, f).unwrap();
                let jl = m.local_face(l, f).unwrap();
                let nk = m.outward_normal(face.owner, jk);
                let nl = m.outward_normal(l, jl);
                assert_relative_eq!(nk[0], -nl[0]);
                assert_relative_eq!(nk[1], -nl[1]);
            }
        }
    }

    #[test]
    fn rejects_clockwise_cell() {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let err = Mesh::from_quads(v, vec![[0, 3, 2, 1]]).unwrap_err();
        assert!(matches!(err, Error::NonConvexCell { cell: 0 }));
    }

    #[test]
    fn bilinear_map_hits_vertices() {
        let m = Mesh::cartesian(2, 1, [0.0, 0.0], [2.0, 1.0]).unwrap();
        assert_eq!(m.map_point(1, 0.0, 0.0), [1.0, 0.0]);
        assert_eq!(m.map_point(1, 1.0, 1.0), [2.0, 1.0]);
        let j = m.map_jacobian(1, 0.3, 0.7);
        assert_relative_eq!(j[0][0], 1.0);
        assert_relative_eq!(j[1][1], 1.0);
        assert_relative_eq!(j[0][1], 0.0);
    }
}
