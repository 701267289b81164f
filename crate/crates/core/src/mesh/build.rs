use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::geometry::Point;
use super::Mesh;
use crate::error::{Error, Result};

impl Mesh {
    /// Uniform `nx` x `ny` grid of the rectangle `[lo, hi]`.
    pub fn cartesian(nx: usize, ny: usize, lo: Point, hi: Point) -> Result<Mesh> {
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidParameter(format!("grid size {nx}x{ny}")));
        }
        let (lx, ly) = (hi[0] - lo[0], hi[1] - lo[1]);
        if !(lx > 0.0 && ly > 0.0 && lx.is_finite() && ly.is_finite()) {
            return Err(Error::DegenerateDomain(format!("[{lo:?}, {hi:?}]")));
        }
        let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            for i in 0..=nx {
                vertices.push([
                    lo[0] + lx * i as f64 / nx as f64,
                    lo[1] + ly * j as f64 / ny as f64,
                ]);
            }
        }
        let id = |i: usize, j: usize| j * (nx + 1) + i;
        let mut quads = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                quads.push([id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        Mesh::from_quads(vertices, quads)
    }

    /// Splits every cell into four along the segments joining the midpoints
    /// of opposite faces.
    pub fn refine(&self) -> Result<Mesh> {
        let mut vertices = self.vertices.clone();
        let face_mid: Vec<usize> = self
            .faces
            .iter()
            .map(|f| {
                vertices.push(f.midpoint);
                vertices.len() - 1
            })
            .collect();
        let mut quads = Vec::with_capacity(4 * self.n_cells());
        for (k, cell) in self.cells.iter().enumerate() {
            let p = self.cell_polygon(k);
            // the two midpoint segments bisect each other at the vertex average
            let center = [
                p.iter().map(|q| q[0]).sum::<f64>() / 4.0,
                p.iter().map(|q| q[1]).sum::<f64>() / 4.0,
            ];
            vertices.push(center);
            let c = vertices.len() - 1;
            for i in 0..4 {
                let m_next = face_mid[cell.faces[i]];
                let m_prev = face_mid[cell.faces[(i + 3) % 4]];
                quads.push([cell.vertices[i], m_next, c, m_prev]);
            }
        }
        Mesh::from_quads(vertices, quads)
    }

    /// Moves every interior vertex by a uniform random offset of at most
    /// `magnitude` times the shortest incident edge in each coordinate.
    /// Deterministic for a given seed.
    pub fn perturb(&self, magnitude: f64, seed: u64) -> Result<Mesh> {
        if !(0.0..0.5).contains(&magnitude) {
            return Err(Error::InvalidParameter(format!("perturbation magnitude {magnitude}")));
        }
        let nv = self.vertices.len();
        let mut on_boundary = vec![false; nv];
        let mut h_local = vec![f64::INFINITY; nv];
        for face in &self.faces {
            for &v in &face.vertices {
                h_local[v] = h_local[v].min(face.length);
                if !face.is_internal() {
                    on_boundary[v] = true;
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut vertices = self.vertices.clone();
        for v in 0..nv {
            if on_boundary[v] {
                continue;
            }
            let dx: f64 = rng.random_range(-1.0..1.0);
            let dy: f64 = rng.random_range(-1.0..1.0);
            vertices[v][0] += magnitude * h_local[v] * dx;
            vertices[v][1] += magnitude * h_local[v] * dy;
        }
        let quads = self.cells.iter().map(|c| c.vertices).collect();
        let mesh = Mesh::from_quads(vertices, quads)?;
        mesh.validate()?;
        Ok(mesh)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit(n: usize) -> Mesh {
        Mesh::cartesian(n, n, [0.0, 0.0], [1.0, 1.0]).unwrap()
    }

    #[test]
    fn degenerate_domain_rejected() {
        assert!(matches!(
            Mesh::cartesian(2, 2, [0.0, 0.0], [0.0, 1.0]),
            Err(Error::DegenerateDomain(_))
        ));
        assert!(Mesh::cartesian(0, 2, [0.0, 0.0], [1.0, 1.0]).is_err());
    }

    #[test]
    fn refine_single_cell() {
        let m = unit(1).refine().unwrap();
        assert_eq!(m.n_cells(), 4);
        for c in &m.cells {
            assert_relative_eq!(c.volume, 0.25, epsilon = 1e-15);
        }
        m.validate().unwrap();
    }

    #[test]
    fn refine_quadruples_and_preserves_area() {
        let m = unit(3).perturb(0.2, 11).unwrap();
        let r = m.refine().unwrap();
        assert_eq!(r.n_cells(), 4 * m.n_cells());
        assert_relative_eq!(r.area(), m.area(), epsilon = 1e-13);
        // no hanging nodes: every face is internal or lies on the boundary square
        for f in r.faces.iter().filter(|f| !f.is_internal()) {
            let on_edge = |x: f64| x.abs() < 1e-14 || (x - 1.0).abs() < 1e-14;
            assert!(on_edge(f.midpoint[0]) || on_edge(f.midpoint[1]));
        }
    }

    #[test]
    fn zero_perturbation_is_identity() {
        let m = unit(4);
        assert_eq!(m.perturb(0.0, 3).unwrap(), m);
    }

    #[test]
    fn perturbation_is_deterministic() {
        let m = unit(4);
        let a = m.perturb(0.1, 7).unwrap();
        let b = m.perturb(0.1, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, m.perturb(0.1, 8).unwrap());
    }
}
