//! Gauss-Legendre rules on `[0, 1]` and derived rules on squares and triangles.

use crate::mesh::geometry::{cross, sub, Point};

/// `(nodes, weights)` of the `n`-point rule on `[0, 1]`; supports 1 to 5 points.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let (t, w): (Vec<f64>, Vec<f64>) = match n {
        1 => (vec![0.0], vec![2.0]),
        2 => {
            let a = 1.0 / 3f64.sqrt();
            (vec![-a, a], vec![1.0, 1.0])
        }
        3 => {
            let a = (3.0f64 / 5.0).sqrt();
            (vec![-a, 0.0, a], vec![5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0])
        }
        4 => {
            let a = (3.0 / 7.0 - 2.0 / 7.0 * (6.0f64 / 5.0).sqrt()).sqrt();
            let b = (3.0 / 7.0 + 2.0 / 7.0 * (6.0f64 / 5.0).sqrt()).sqrt();
            let wa = (18.0 + 30f64.sqrt()) / 36.0;
            let wb = (18.0 - 30f64.sqrt()) / 36.0;
            (vec![-b, -a, a, b], vec![wb, wa, wa, wb])
        }
        5 => {
            let a = 1.0 / 3.0 * (5.0 - 2.0 * (10.0f64 / 7.0).sqrt()).sqrt();
            let b = 1.0 / 3.0 * (5.0 + 2.0 * (10.0f64 / 7.0).sqrt()).sqrt();
            let wa = (322.0 + 13.0 * 70f64.sqrt()) / 900.0;
            let wb = (322.0 - 13.0 * 70f64.sqrt()) / 900.0;
            (vec![-b, -a, 0.0, a, b], vec![wb, wa, 128.0 / 225.0, wa, wb])
        }
        _ => panic!("no {n}-point Gauss rule"),
    };
    (t.iter().map(|x| 0.5 * (x + 1.0)).collect(), w.iter().map(|x| 0.5 * x).collect())
}

/// Tensor rule on the unit square: `(xi, eta, weight)`.
pub fn square_rule(n: usize) -> Vec<(f64, f64, f64)> {
    let (x, w) = gauss_legendre(n);
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            out.push((x[i], x[j], w[i] * w[j]));
        }
    }
    out
}

/// Collapsed (Duffy) rule on a triangle: physical points and weights summing
/// to the triangle area.
pub fn triangle_rule(tri: &[Point; 3], n: usize) -> Vec<(Point, f64)> {
    let (x, w) = gauss_legendre(n);
    let e1 = sub(tri[1], tri[0]);
    let e2 = sub(tri[2], tri[0]);
    let jac = cross(e1, e2).abs();
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let s = x[i];
            let t = x[j] * (1.0 - s);
            let p = [tri[0][0] + s * e1[0] + t * e2[0], tri[0][1] + s * e1[1] + t * e2[1]];
            out.push((p, w[i] * w[j] * (1.0 - s) * jac));
        }
    }
    out
}
