//! Upwind mass fluxes through primal faces and their redistribution onto the
//! dual faces inside each cell.
//!
//! Dual face `j` of a cell runs from its mass center to vertex `j` and
//! separates the half-diamonds of local faces `j - 1` and `j`. Dual fluxes are
//! stored per `(cell, j)` as the flux leaving the half-diamond of face `j - 1`
//! into that of face `j`, so conservativity across a dual face holds by
//! construction.

use std::fmt::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fields::{CellScalarField, FaceScalarField, FaceVectorField};
use crate::mesh::Mesh;
use crate::quadrature::gauss_legendre;

/// Coefficients with `dual[j] = sum_m alpha[j][m] * primal[m]`, local faces
/// ordered S, E, N, W.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaTable {
    pub alpha: [[f64; 4]; 4],
}

impl AlphaTable {
    pub fn apply(&self, primal: &[f64; 4]) -> [f64; 4] {
        let mut d = [0.0; 4];
        for j in 0..4 {
            for m in 0..4 {
                d[j] += self.alpha[j][m] * primal[m];
            }
        }
        d
    }

    pub fn max_abs(&self) -> f64 {
        self.alpha.iter().flatten().fold(0.0, |a, b| a.max(b.abs()))
    }
}

/// Half-diamond balance `F_j - dual_j + dual_{j+1} - sum(F)/4` for each local face.
pub fn half_diamond_residual(primal: &[f64; 4], dual: &[f64; 4]) -> [f64; 4] {
    let total: f64 = primal.iter().sum();
    std::array::from_fn(|j| primal[j] - dual[j] + dual[(j + 1) % 4] - 0.25 * total)
}

fn affine_dual_fluxes(primal: &[f64; 4]) -> [f64; 4] {
    let [fs, fe, fn_, fw] = *primal;
    let (a, b, c, d) = (-fw, fe + fw, -fs, fn_ + fs);
    let w = |x: f64, y: f64| [a + b * x, c + d * y];
    let corners = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
    let (t, wt) = gauss_legendre(2);
    std::array::from_fn(|j| {
        let v = corners[j];
        let dir = [v[0] - 0.5, v[1] - 0.5];
        // unnormalized normal into the half-diamond of face j
        let n = [-dir[1], dir[0]];
        (0..t.len())
            .map(|q| {
                let val = w(0.5 + t[q] * dir[0], 0.5 + t[q] * dir[1]);
                wt[q] * (val[0] * n[0] + val[1] * n[1])
            })
            .sum()
    })
}

/// Builds the table from the affine field `w = (a + b x, c + d y)` matching the
/// four face fluxes of the unit square, then checks the half-diamond balance
/// on random fluxes.
pub fn derive_alpha_table() -> Result<AlphaTable> {
    let mut alpha = [[0.0; 4]; 4];
    for m in 0..4 {
        let mut e = [0.0; 4];
        e[m] = 1.0;
        let d = affine_dual_fluxes(&e);
        for j in 0..4 {
            alpha[j][m] = d[j];
        }
    }
    let table = AlphaTable { alpha };
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..32 {
        let f: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let r = half_diamond_residual(&f, &table.apply(&f));
        let worst = r.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        if worst > 1e-12 {
            return Err(Error::AlphaDerivation { residual: worst });
        }
    }
    Ok(table)
}

/// Primal and dual mass fluxes of one `(rho, u)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxSet {
    /// `F_{K,sigma}` outward, per cell and local face.
    pub primal: Vec<[f64; 4]>,
    /// Per cell and local vertex, oriented from the half-diamond of face `j - 1` into face `j`.
    pub dual: Vec<[f64; 4]>,
    /// Upwind density per face.
    pub rho_face: FaceScalarField,
}

/// `F_{K,sigma} = |sigma| rho_sigma u_sigma . n_{K,sigma}` with upwind `rho_sigma`;
/// the dual part is left at zero.
pub fn primal_fluxes(rho: &CellScalarField, u: &FaceVectorField, mesh: &Mesh) -> FluxSet {
    let mut rho_face = FaceScalarField::constant(mesh, 0.0);
    let mut face_flux = vec![0.0; mesh.n_faces()];
    for (f, face) in mesh.faces.iter().enumerate() {
        let un = u.values[f][0] * face.normal[0] + u.values[f][1] * face.normal[1];
        rho_face.values[f] = match face.neighbor {
            Some(l) if un < 0.0 => rho.values[l],
            _ => rho.values[face.owner],
        };
        if face.is_internal() {
            face_flux[f] = face.length * rho_face.values[f] * un;
        }
    }
    let primal = mesh
        .cells
        .iter()
        .map(|cell| std::array::from_fn(|j| cell.orientation[j] * face_flux[cell.faces[j]]))
        .collect();
    FluxSet { primal, dual: vec![[0.0; 4]; mesh.n_cells()], rho_face }
}

/// Fills the dual part from the primal one and checks the half-diamond balance.
pub fn dual_fluxes(mut set: FluxSet, mesh: &Mesh, alpha: &AlphaTable) -> Result<FluxSet> {
    for k in 0..mesh.n_cells() {
        set.dual[k] = alpha.apply(&set.primal[k]);
        let scale = set.primal[k].iter().fold(1.0f64, |a, b| a.max(b.abs()));
        let r = half_diamond_residual(&set.primal[k], &set.dual[k]);
        let worst = r.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        if worst > 1e-12 * scale {
            return Err(Error::DualFluxOrientation { cell: k, residual: worst });
        }
    }
    Ok(set)
}

/// Primal then dual fluxes.
pub fn mass_fluxes(rho: &CellScalarField, u: &FaceVectorField, mesh: &Mesh, alpha: &AlphaTable) -> Result<FluxSet> {
    dual_fluxes(primal_fluxes(rho, u, mesh), mesh, alpha)
}

impl FluxSet {
    /// `F_{sigma,eps}` leaving the half-diamond of local face `j` of cell `k`
    /// through dual face `j` (towards face `j - 1`) and `j + 1` (towards face `j + 1`).
    pub fn half_diamond_outflows(&self, k: usize, j: usize) -> [f64; 2] {
        [-self.dual[k][j], self.dual[k][(j + 1) % 4]]
    }

    /// `sum_eps F_{sigma,eps}` for each dual cell.
    pub fn dual_balance(&self, mesh: &Mesh) -> Vec<f64> {
        let mut s = vec![0.0; mesh.n_faces()];
        for (k, cell) in mesh.cells.iter().enumerate() {
            for j in 0..4 {
                let o = self.half_diamond_outflows(k, j);
                s[cell.faces[j]] += o[0] + o[1];
            }
        }
        s
    }

    /// Largest half-diamond balance residual over all cells.
    pub fn max_half_diamond_residual(&self) -> f64 {
        self.primal
            .iter()
            .zip(&self.dual)
            .flat_map(|(p, d)| half_diamond_residual(p, d))
            .fold(0.0, |a, b| a.max(b.abs()))
    }

    /// `(|K|/dt)(rho_K - rho_old_K) + sum_sigma F_{K,sigma}`.
    pub fn primal_mass_residual(&self, rho: &CellScalarField, rho_old: &CellScalarField, dt: f64, mesh: &Mesh) -> Vec<f64> {
        (0..mesh.n_cells())
            .map(|k| mesh.cells[k].volume / dt * (rho.values[k] - rho_old.values[k]) + self.primal[k].iter().sum::<f64>())
            .collect()
    }

    /// Debug dump: `kind,cell,local,face,flux` for primal and dual entries.
    pub fn to_csv(&self, mesh: &Mesh) -> String {
        let mut s = String::from("kind,cell,local,face,flux\n");
        for (k, cell) in mesh.cells.iter().enumerate() {
            for j in 0..4 {
                let _ = writeln!(s, "primal,{k},{j},{},{:?}", cell.faces[j], self.primal[k][j]);
            }
            for j in 0..4 {
                let _ = writeln!(s, "dual,{k},{j},{},{:?}", cell.faces[j], self.dual[k][j]);
            }
        }
        s
    }
}

/// `(|D|/dt)(rho_D - rho_D_old) + sum_eps F_{sigma,eps}` for every dual cell.
pub fn dual_mass_residual(
    rho_dual_new: &FaceScalarField,
    rho_dual_old: &FaceScalarField,
    fluxes: &FluxSet,
    dt: f64,
    mesh: &Mesh,
) -> Vec<f64> {
    let bal = fluxes.dual_balance(mesh);
    (0..mesh.n_faces())
        .map(|f| mesh.dual_volumes[f] / dt * (rho_dual_new.values[f] - rho_dual_old.values[f]) + bal[f])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::dual_density;
    use crate::operators::divergence;
    use approx::assert_abs_diff_eq;
    use nalgebra::{DMatrix, DVector};
    use proptest::{prop_assert, proptest};
    use crate::testutil::{random_velocity, solenoidal};

    #[test]
    fn alpha_table_matches_hand_integration() {
        let t = derive_alpha_table().unwrap();
        // dual face 0: out of W into S
        let want = [3.0 / 8.0, 1.0 / 8.0, -1.0 / 8.0, -3.0 / 8.0];
        for m in 0..4 {
            assert_abs_diff_eq!(t.alpha[0][m], want[m], epsilon = 1e-15);
        }
        assert!(t.max_abs() <= 1.0);
        assert_eq!(t.apply(&[0.0; 4]), [0.0; 4]);
    }

    #[test]
    fn uniform_rightward_transport() {
        // w = (1, 0): F_W = -1, F_E = 1; the dual faces to the W and E vertices
        // carry the vertical extent of their segment, 1/2 each.
        let t = derive_alpha_table().unwrap();
        let d = t.apply(&[0.0, 1.0, 0.0, -1.0]);
        // vertex 0 (0,0): from W into S, segment normal (0.5,-0.5): +1/2
        assert_abs_diff_eq!(d[0], 0.5, epsilon = 1e-15);
        // vertex 1 (1,0): from S into E, normal (0.5, 0.5): +1/2
        assert_abs_diff_eq!(d[1], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(d[2], -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(d[3], -0.5, epsilon = 1e-15);
    }

    #[test]
    fn primal_flux_examples() {
        let m = Mesh::cartesian(2, 1, [0.0, 0.0], [2.0, 1.0]).unwrap();
        let rho = CellScalarField { values: vec![1.0, 3.0] };
        let f = m.internal_faces[0];
        let k = m.faces[f].owner;
        let j = m.local_face(k, f).unwrap();
        let n = m.outward_normal(k, j);
        let mut u = FaceVectorField::zeros(&m);
        u.values[f] = n;
        let set = primal_fluxes(&rho, &u, &m);
        assert_abs_diff_eq!(set.primal[k][j], rho.values[k], epsilon = 1e-15);
        u.values[f] = [-n[0], -n[1]];
        let set = primal_fluxes(&rho, &u, &m);
        assert_abs_diff_eq!(set.primal[k][j], -rho.values[1 - k], epsilon = 1e-15);
        let zero = primal_fluxes(&rho, &FaceVectorField::zeros(&m), &m);
        assert!(zero.primal.iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn steady_rest_has_zero_dual_residual() {
        let m = Mesh::cartesian(3, 3, [0.0, 0.0], [1.0, 1.0]).unwrap();
        let rho = CellScalarField::constant(&m, 2.0);
        let rd = dual_density(&rho, &m);
        let set = mass_fluxes(&rho, &FaceVectorField::zeros(&m), &m, &derive_alpha_table().unwrap()).unwrap();
        assert!(dual_mass_residual(&rd, &rd, &set, 0.1, &m).iter().all(|&r| r == 0.0));
    }

    #[test]
    fn dual_balance_after_exact_primal_mass_solve() {
        let alpha = derive_alpha_table().unwrap();
        let m = Mesh::cartesian(2, 2, [0.0, 0.0], [1.0, 1.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u = random_velocity(&m, &mut rng);
        let rho_old = CellScalarField { values: vec![1.0, 2.0, 0.5, 1.5] };
        let dt = 0.3;
        // dense implicit upwind solve of the primal mass balance
        let n = m.n_cells();
        let mut a = DMatrix::zeros(n, n);
        let mut b = DVector::zeros(n);
        for k in 0..n {
            a[(k, k)] += m.cells[k].volume / dt;
            b[k] = m.cells[k].volume / dt * rho_old.values[k];
            for j in 0..4 {
                let f = m.cells[k].faces[j];
                let Some(l) = m.faces[f].other(k) else { continue };
                let nn = m.outward_normal(k, j);
                let flow = m.faces[f].length * (u.values[f][0] * nn[0] + u.values[f][1] * nn[1]);
                if flow >= 0.0 {
                    a[(k, k)] += flow;
                } else {
                    a[(k, l)] += flow;
                }
            }
        }
        let rho = CellScalarField { values: a.lu().solve(&b).unwrap().iter().copied().collect() };
        let set = mass_fluxes(&rho, &u, &m, &alpha).unwrap();
        assert!(set.primal_mass_residual(&rho, &rho_old, dt, &m).iter().all(|r| r.abs() < 1e-12));
        let res = dual_mass_residual(&dual_density(&rho, &m), &dual_density(&rho_old, &m), &set, dt, &m);
        assert!(res.iter().all(|r| r.abs() < 1e-12), "{res:?}");
    }

    #[test]
    fn csv_dump_has_eight_rows_per_cell() {
        let m = Mesh::cartesian(2, 2, [0.0, 0.0], [1.0, 1.0]).unwrap();
        let set = primal_fluxes(&CellScalarField::constant(&m, 1.0), &FaceVectorField::zeros(&m), &m);
        assert_eq!(set.to_csv(&m).lines().count(), 1 + 8 * 4);
    }

    proptest! {
        #[test]
        fn h1_h2_h3_on_random_inputs(seed in 0u64..2000, perturb in 0.0f64..0.25) {
            let alpha = derive_alpha_table().unwrap();
            let m = Mesh::cartesian(4, 4, [0.0, 0.0], [1.0, 1.0]).unwrap().perturb(perturb, seed).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rho = crate::testutil::random_cells(&m, &mut rng, 0.1, 5.0);
            let u = random_velocity(&m, &mut rng);
            let set = mass_fluxes(&rho, &u, &m, &alpha).unwrap();
            let scale = set.primal.iter().flatten().fold(1.0f64, |a, b| a.max(b.abs()));
            prop_assert!(set.max_half_diamond_residual() <= 1e-12 * scale);
            // antisymmetry of primal fluxes and zero external fluxes
            for (f, face) in m.faces.iter().enumerate() {
                let k = face.owner;
                let fk = set.primal[k][m.local_face(k, f).unwrap()];
                match face.neighbor {
                    Some(l) => prop_assert!((fk + set.primal[l][m.local_face(l, f).unwrap()]).abs() <= 1e-14 * scale),
                    None => prop_assert!(fk == 0.0),
                }
            }
            // H3
            for k in 0..m.n_cells() {
                let pmax = set.primal[k].iter().fold(0.0f64, |a, b| a.max(b.abs()));
                for &d in &set.dual[k] {
                    prop_assert!(d.abs() <= 4.0 * alpha.max_abs() * pmax + 1e-15);
                }
            }
        }

        #[test]
        fn dual_fluxes_are_linear(seed in 0u64..1000, a in -2.0f64..2.0, b in -2.0f64..2.0) {
            let alpha = derive_alpha_table().unwrap();
            let m = Mesh::cartesian(3, 3, [0.0, 0.0], [1.0, 1.0]).unwrap().perturb(0.2, seed).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p1: Vec<[f64; 4]> = (0..m.n_cells()).map(|_| std::array::from_fn(|_| rng.random_range(-1.0..1.0))).collect();
            let p2: Vec<[f64; 4]> = (0..m.n_cells()).map(|_| std::array::from_fn(|_| rng.random_range(-1.0..1.0))).collect();
            let mk = |p: Vec<[f64; 4]>| FluxSet { primal: p, dual: vec![[0.0; 4]; m.n_cells()], rho_face: FaceScalarField::constant(&m, 1.0) };
            let comb: Vec<[f64; 4]> = p1.iter().zip(&p2).map(|(x, y)| std::array::from_fn(|j| a * x[j] + b * y[j])).collect();
            let d1 = dual_fluxes(mk(p1), &m, &alpha).unwrap();
            let d2 = dual_fluxes(mk(p2), &m, &alpha).unwrap();
            let dc = dual_fluxes(mk(comb), &m, &alpha).unwrap();
            for k in 0..m.n_cells() {
                for j in 0..4 {
                    prop_assert!((dc.dual[k][j] - a * d1.dual[k][j] - b * d2.dual[k][j]).abs() < 1e-13);
                }
            }
        }

        #[test]
        fn solenoidal_uniform_density_has_zero_dual_balance(seed in 0u64..1000) {
            let alpha = derive_alpha_table().unwrap();
            let m = Mesh::cartesian(4, 4, [0.0, 0.0], [1.0, 1.0]).unwrap().perturb(0.25, seed).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let u = solenoidal(&m, &mut rng);
            prop_assert!(divergence(&u, &m).values.iter().all(|d| d.abs() < 1e-12));
            let set = mass_fluxes(&CellScalarField::constant(&m, 1.3), &u, &m, &alpha).unwrap();
            prop_assert!(set.dual_balance(&m).iter().all(|b| b.abs() < 1e-12));
        }
    }
}
