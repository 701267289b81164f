//! Rotated bilinear (Rannacher-Turek) element on the reference square,
//! parametric through the Q1 cell map.
//!
//! The local space is `span{1, x, y, x^2 - y^2}` and the basis is dual to the
//! four face means, ordered like the local faces (S, E, N, W).

use std::sync::OnceLock;

use nalgebra::Matrix4;

use crate::mesh::Mesh;

fn monomials(x: f64, y: f64) -> [f64; 4] {
    [1.0, x, y, x * x - y * y]
}

fn monomial_gradients(x: f64, y: f64) -> [[f64; 2]; 4] {
    [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [2.0 * x, -2.0 * y]]
}

/// Point on local face `j` at edge parameter `t`, running from vertex `j` to `j + 1`.
pub fn face_point(j: usize, t: f64) -> (f64, f64) {
    match j {
        0 => (t, 0.0),
        1 => (1.0, t),
        2 => (1.0 - t, 1.0),
        3 => (0.0, 1.0 - t),
        _ => unreachable!("quadrilaterals have four faces"),
    }
}

/// Coefficients `c[m][i]` of basis function `i` on monomial `m`.
fn coefficients() -> &'static [[f64; 4]; 4] {
    static C: OnceLock<[[f64; 4]; 4]> = OnceLock::new();
    C.get_or_init(|| {
        // Face means of each monomial, exact with 2-point Gauss (degree 2 on an edge).
        let (t, w) = crate::quadrature::gauss_legendre(2);
        let mut m = Matrix4::zeros();
        for j in 0..4 {
            for q in 0..t.len() {
                let (x, y) = face_point(j, t[q]);
                let mono = monomials(x, y);
                for k in 0..4 {
                    m[(j, k)] += w[q] * mono[k];
                }
            }
        }
        let inv = m.try_inverse().expect("face moment matrix is invertible");
        let mut c = [[0.0; 4]; 4];
        for a in 0..4 {
            for b in 0..4 {
                c[a][b] = inv[(a, b)];
            }
        }
        c
    })
}

/// Basis values and reference gradients at `(x, y)` in the reference square.
pub fn rt_shape(x: f64, y: f64) -> ([f64; 4], [[f64; 2]; 4]) {
    let c = coefficients();
    let mono = monomials(x, y);
    let dmono = monomial_gradients(x, y);
    let mut val = [0.0; 4];
    let mut grad = [[0.0; 2]; 4];
    for i in 0..4 {
        for m in 0..4 {
            val[i] += c[m][i] * mono[m];
            grad[i][0] += c[m][i] * dmono[m][0];
            grad[i][1] += c[m][i] * dmono[m][1];
        }
    }
    (val, grad)
}

/// Physical gradients of the four basis functions of cell `k` at the reference
/// point, and the Jacobian determinant there.
pub fn physical_gradients(mesh: &Mesh, k: usize, x: f64, y: f64) -> ([[f64; 2]; 4], f64) {
    let j = mesh.map_jacobian(k, x, y);
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let (_, g) = rt_shape(x, y);
    let mut out = [[0.0; 2]; 4];
    for i in 0..4 {
        // J^{-T} g
        out[i][0] = (j[1][1] * g[i][0] - j[1][0] * g[i][1]) / det;
        out[i][1] = (-j[0][1] * g[i][0] + j[0][0] * g[i][1]) / det;
    }
    (out, det)
}

/// Value of the reconstruction of the face vector field `u` in cell `k`.
pub fn reconstruct(mesh: &Mesh, u: &[[f64; 2]], k: usize, x: f64, y: f64) -> [f64; 2] {
    let (val, _) = rt_shape(x, y);
    let faces = &mesh.cells[k].faces;
    let mut out = [0.0; 2];
    for i in 0..4 {
        out[0] += val[i] * u[faces[i]][0];
        out[1] += val[i] * u[faces[i]][1];
    }
    out
}
