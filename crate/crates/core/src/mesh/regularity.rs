use std::f64::consts::PI;

use super::geometry::{diameter, dot, inradius, is_strictly_convex, perimeter, Point};
use super::Mesh;

/// Size and shape-regularity parameters of a discretization.
///
/// All inscribed-ball quantities (`r_K`, `r_{D_sigma}`) are diameters, not radii.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegularityReport {
    pub h: f64,
    pub alpha: f64,
    pub theta_cells: f64,
    pub theta_dual_neighbors: f64,
    pub theta_dual_faces: f64,
    pub theta_quasi_uniform: f64,
    pub theta: f64,
}

impl Mesh {
    /// Deviation of cell `k` from a parallelogram: the largest departure from
    /// `pi` of the angle between outward normals of opposite faces.
    pub fn cell_alpha(&self, k: usize) -> f64 {
        [(0, 2), (1, 3)]
            .iter()
            .map(|&(a, b)| {
                let c = dot(self.outward_normal(k, a), self.outward_normal(k, b)).clamp(-1.0, 1.0);
                PI - c.acos()
            })
            .fold(0.0, f64::max)
    }

    /// Geometric realization of the diamond `D_sigma` (counter-clockwise).
    pub fn diamond_polygon(&self, f: usize) -> Vec<Point> {
        let face = &self.faces[f];
        let a = self.vertices[face.vertices[0]];
        let b = self.vertices[face.vertices[1]];
        let ck = self.cells[face.owner].centroid;
        match face.neighbor {
            Some(l) => vec![a, self.cells[l].centroid, b, ck],
            None => vec![a, b, ck],
        }
    }

    /// Diameter of the largest disc inside `D_sigma`. A diamond that is not
    /// convex (strongly distorted neighbors) falls back to the larger of its
    /// two triangular halves.
    pub fn diamond_inscribed_diameter(&self, f: usize) -> f64 {
        let poly = self.diamond_polygon(f);
        if poly.len() == 3 || is_strictly_convex(&poly) {
            return 2.0 * inradius(&poly);
        }
        let face = &self.faces[f];
        let a = self.vertices[face.vertices[0]];
        let b = self.vertices[face.vertices[1]];
        let r_k = inradius(&[a, b, self.cells[face.owner].centroid]);
        let r_l = inradius(&[b, a, self.cells[face.neighbor.unwrap()].centroid]);
        2.0 * r_k.max(r_l)
    }

    pub fn regularity(&self) -> RegularityReport {
        let h = self.cells.iter().map(|c| c.diameter).fold(0.0, f64::max);
        let alpha = (0..self.n_cells()).map(|k| self.cell_alpha(k)).fold(0.0, f64::max);
        let theta_cells = (0..self.n_cells())
            .map(|k| {
                let p = self.cell_polygon(k);
                self.cells[k].diameter / (2.0 * inradius(&p))
            })
            .fold(0.0, f64::max);

        let nf = self.n_faces();
        let h_dual: Vec<f64> = (0..nf).map(|f| diameter(&self.diamond_polygon(f))).collect();
        let r_dual: Vec<f64> = (0..nf).map(|f| self.diamond_inscribed_diameter(f)).collect();

        // diamonds touch when they share a primal vertex or a mass center
        let mut vertex_faces = vec![Vec::new(); self.vertices.len()];
        for (f, face) in self.faces.iter().enumerate() {
            for &v in &face.vertices {
                vertex_faces[v].push(f);
            }
        }
        let mut theta_dual_neighbors: f64 = 0.0;
        for (f, face) in self.faces.iter().enumerate() {
            let mut touching: Vec<usize> = face.vertices.iter().flat_map(|&v| vertex_faces[v].iter().copied()).collect();
            touching.extend(self.cells[face.owner].faces);
            if let Some(l) = face.neighbor {
                touching.extend(self.cells[l].faces);
            }
            for g in touching {
                theta_dual_neighbors = theta_dual_neighbors.max(r_dual[f] / h_dual[g]);
            }
        }

        let mut theta_dual_faces: f64 = 0.0;
        for k in 0..self.n_cells() {
            let perim_k = perimeter(&self.cell_polygon(k));
            for j in 0..4 {
                theta_dual_faces = theta_dual_faces.max(perimeter(&self.half_diamond(k, j)) / perim_k);
            }
        }
        let theta_quasi_uniform = r_dual.iter().map(|&r| h / r).fold(0.0, f64::max);
        let theta = theta_cells.max(theta_dual_neighbors).max(theta_dual_faces).max(theta_quasi_uniform);
        RegularityReport {
            h,
            alpha,
            theta_cells,
            theta_dual_neighbors,
            theta_dual_faces,
            theta_quasi_uniform,
            theta,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn unit_cell_shape_ratio() {
        let m = Mesh::cartesian(1, 1, [0.0, 0.0], [1.0, 1.0]).unwrap();
        let r = m.regularity();
        assert_relative_eq!(r.theta_cells, 2f64.sqrt(), epsilon = 1e-13);
        assert_eq!(r.alpha, 0.0);
        assert_relative_eq!(r.h, 2f64.sqrt());
    }

    #[test]
    fn cartesian_meshes_are_parallelograms_and_scale_invariant() {
        let m = Mesh::cartesian(3, 2, [0.0, 0.0], [1.5, 1.0]).unwrap();
        let r0 = m.regularity();
        let r1 = m.refine().unwrap().regularity();
        assert!(r0.alpha.abs() < 1e-15);
        assert_relative_eq!(r1.h, r0.h / 2.0, epsilon = 1e-14);
        assert_relative_eq!(r1.theta_cells, r0.theta_cells, epsilon = 1e-12);
        assert_relative_eq!(r1.theta_dual_neighbors, r0.theta_dual_neighbors, epsilon = 1e-12);
        assert_relative_eq!(r1.theta_dual_faces, r0.theta_dual_faces, epsilon = 1e-12);
        assert_relative_eq!(r1.theta_quasi_uniform, r0.theta_quasi_uniform, epsilon = 1e-12);
        assert_relative_eq!(r1.theta, r0.theta, epsilon = 1e-12);
        for v in [r0.theta_cells, r0.theta_dual_neighbors, r0.theta_dual_faces, r0.theta_quasi_uniform] {
            assert!(v.is_finite() && v > 0.0);
        }
    }

    #[test]
    fn trapezoid_alpha_matches_normal_angle() {
        // left face vertical, right face tilted by atan(0.2)
        let v = vec![[0.0, 0.0], [1.0, 0.0], [0.8, 1.0], [0.0, 1.0]];
        let m = Mesh::from_quads(v, vec![[0, 1, 2, 3]]).unwrap();
        assert_relative_eq!(m.cell_alpha(0), 0.2f64.atan(), epsilon = 1e-14);
    }

    #[test]
    fn perturbed_mesh_has_positive_alpha_decaying_under_refinement() {
        let m = Mesh::cartesian(4, 4, [0.0, 0.0], [1.0, 1.0]).unwrap().perturb(0.1, 7).unwrap();
        let mut alphas = vec![m.regularity().alpha];
        let mut cur = m;
        for _ in 0..3 {
            cur = cur.refine().unwrap();
            alphas.push(cur.regularity().alpha);
        }
        assert!(alphas[0] > 0.0);
        for w in alphas.windows(2) {
            assert!(w[1] <= w[0] + 1e-15, "{alphas:?}");
        }
        assert!(alphas[3] < 0.25 * alphas[0], "{alphas:?}");
    }
}
