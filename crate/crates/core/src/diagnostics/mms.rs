use std::sync::Arc;

use crate::fields::{interpolate_face, norm, project_cell, FaceVectorField, NormKind, State};
use crate::mesh::geometry::Point;
use crate::mesh::Mesh;
use crate::quadrature::square_rule;
use crate::timestepping::Source;

/// Decaying vortex `u = e^{-lambda t} curl psi` with
/// `psi = A x^2 (1-x)^2 y^2 (1-y)^2` on the unit square, zero pressure, and a
/// density `1 + c psi / psi_max` carried along the streamlines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedSolution {
    pub amplitude: f64,
    pub decay: f64,
    pub density_contrast: f64,
    pub mu: f64,
}

fn g(s: f64) -> [f64; 4] {
    // s^2 (1-s)^2 and its first three derivatives
    [
        s * s * (1.0 - s) * (1.0 - s),
        2.0 * s * (1.0 - s) * (1.0 - 2.0 * s),
        2.0 - 12.0 * s + 12.0 * s * s,
        -12.0 + 24.0 * s,
    ]
}

impl ManufacturedSolution {
    pub fn constant_density(mu: f64) -> Self {
        ManufacturedSolution { amplitude: 32.0, decay: 1.0, density_contrast: 0.0, mu }
    }

    pub fn transported_density(mu: f64) -> Self {
        ManufacturedSolution { amplitude: 32.0, decay: 1.0, density_contrast: 1.0, mu }
    }

    fn psi_max(&self) -> f64 {
        self.amplitude / 256.0
    }

    pub fn density(&self, x: Point, _t: f64) -> f64 {
        let psi = self.amplitude * g(x[0])[0] * g(x[1])[0];
        1.0 + self.density_contrast * psi / self.psi_max()
    }

    pub fn velocity(&self, x: Point, t: f64) -> [f64; 2] {
        let (gx, gy) = (g(x[0]), g(x[1]));
        let e = self.amplitude * (-self.decay * t).exp();
        [e * gx[0] * gy[1], -e * gx[1] * gy[0]]
    }

    /// `rho (du/dt + u . grad u) - mu Laplacian u`.
    pub fn source(&self, x: Point, t: f64) -> [f64; 2] {
        let (gx, gy) = (g(x[0]), g(x[1]));
        let e = self.amplitude * (-self.decay * t).exp();
        let u = [e * gx[0] * gy[1], -e * gx[1] * gy[0]];
        let du = [[e * gx[1] * gy[1], e * gx[0] * gy[2]], [-e * gx[2] * gy[0], -e * gx[1] * gy[1]]];
        let lap = [e * (gx[2] * gy[1] + gx[0] * gy[3]), -e * (gx[3] * gy[0] + gx[1] * gy[2])];
        let rho = self.density(x, t);
        std::array::from_fn(|c| {
            rho * (-self.decay * u[c] + u[0] * du[c][0] + u[1] * du[c][1]) - self.mu * lap[c]
        })
    }

    pub fn source_fn(&self) -> Source {
        let me = *self;
        Arc::new(move |x, t| me.source(x, t))
    }

    /// Projected density and interpolated velocity at time `t`.
    pub fn discrete_state(&self, mesh: &Mesh, t: f64) -> State {
        let rho = project_cell(|x| self.density(x, t), mesh);
        let u = interpolate_face(|x| self.velocity(x, t), mesh);
        State::new(mesh, t, rho, u)
    }
}

/// Errors of a discrete state against the manufactured solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmsError {
    /// `||rho - rho_exact||_{L2}` with the exact density integrated on each cell.
    pub rho_l2: f64,
    /// `||u - r(u_exact)||_{L2}` on dual cells.
    pub u_l2: f64,
    /// `||u - r(u_exact)||_b`.
    pub u_broken: f64,
}

pub fn mms_error(state: &State, exact: &ManufacturedSolution, mesh: &Mesh) -> MmsError {
    let rule = square_rule(3);
    let mut rho2 = 0.0;
    for k in 0..mesh.n_cells() {
        for &(x, y, w) in &rule {
            let j = mesh.map_jacobian(k, x, y);
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            let e = state.rho.values[k] - exact.density(mesh.map_point(k, x, y), state.time);
            rho2 += w * det * e * e;
        }
    }
    let r = interpolate_face(|x| exact.velocity(x, state.time), mesh);
    let diff = FaceVectorField {
        values: state.u.values.iter().zip(&r.values).map(|(a, b)| [a[0] - b[0], a[1] - b[1]]).collect(),
    };
    MmsError {
        rho_l2: rho2.sqrt(),
        u_l2: norm(&diff, NormKind::L2, mesh).expect("L2 applies to face vectors"),
        u_broken: norm(&diff, NormKind::BrokenH1, mesh).expect("broken norm applies to face vectors"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_discrete_state_has_zero_velocity_error() {
        let m = Mesh::cartesian(6, 6, [0.0, 0.0], [1.0, 1.0]).unwrap();
        let case = ManufacturedSolution::transported_density(0.1);
        let s = case.discrete_state(&m, 0.3);
        let e = mms_error(&s, &case, &m);
        assert_eq!(e.u_l2, 0.0);
        assert_eq!(e.u_broken, 0.0);
        // only the projection error of the density remains
        assert!(e.rho_l2 < 0.1);
    }

    #[test]
    fn source_matches_finite_differences() {
        let case = ManufacturedSolution { amplitude: 5.0, decay: 0.7, density_contrast: 0.5, mu: 0.3 };
        let (x, t) = ([0.31, 0.62], 0.4);
        let h = 1e-4;
        let u = |x: Point, t: f64| case.velocity(x, t);
        let d = |c: usize, dir: usize| {
            let mut a = x;
            let mut b = x;
            a[dir] += h;
            b[dir] -= h;
            (u(a, t)[c] - u(b, t)[c]) / (2.0 * h)
        };
        let lap = |c: usize| {
            let mut s = 0.0;
            for dir in 0..2 {
                let mut a = x;
                let mut b = x;
                a[dir] += h;
                b[dir] -= h;
                s += (u(a, t)[c] - 2.0 * u(x, t)[c] + u(b, t)[c]) / (h * h);
            }
            s
        };
        let f = case.source(x, t);
        let v = u(x, t);
        for c in 0..2 {
            let dudt = (u(x, t + h)[c] - u(x, t - h)[c]) / (2.0 * h);
            let want = case.density(x, t) * (dudt + v[0] * d(c, 0) + v[1] * d(c, 1)) - case.mu * lap(c);
            assert!((f[c] - want).abs() < 1e-5 * (1.0 + want.abs()), "{c}: {} vs {want}", f[c]);
        }
        // divergence free and density transported
        assert!((d(0, 0) + d(1, 1)).abs() < 1e-8);
        let r = |x: Point| case.density(x, t);
        let grad = [(r([x[0] + h, x[1]]) - r([x[0] - h, x[1]])) / (2.0 * h), (r([x[0], x[1] + h]) - r([x[0], x[1] - h])) / (2.0 * h)];
        assert!((v[0] * grad[0] + v[1] * grad[1]).abs() < 1e-7);
    }
}
