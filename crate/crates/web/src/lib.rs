//! wasm-bindgen surface for the static page in `www/`. Each exported item is a
//! thin wrapper over a plain Rust function that native tests exercise.

use rtflow::diagnostics::{inf_sup_constant, kinetic_energy};
use rtflow::fields::{interpolate_face, project_cell, State};
use rtflow::operators::divergence;
use rtflow::timestepping::{cfl_dt, step, Convection, Discretization, SchemeKind, SchemeParams};
use rtflow::Mesh;
use wasm_bindgen::prelude::*;

fn scheme(name: &str) -> Result<SchemeKind, String> {
    match name {
        "implicit" => Ok(SchemeKind::Implicit),
        "semi_implicit" => Ok(SchemeKind::SemiImplicit),
        "explicit" => Ok(SchemeKind::Explicit),
        "projection" => Ok(SchemeKind::Projection),
        _ => Err(format!("unknown scheme {name:?}")),
    }
}

fn unit_mesh(n: usize, perturb: f64, seed: u64) -> Result<Mesh, String> {
    if !(1..=64).contains(&n) {
        return Err(format!("grid size {n} outside 1..=64"));
    }
    let m = Mesh::cartesian(n, n, [0.0, 0.0], [1.0, 1.0]).map_err(|e| e.to_string())?;
    if perturb > 0.0 {
        m.perturb(perturb, seed).map_err(|e| e.to_string())
    } else {
        Ok(m)
    }
}

fn vortex(amplitude: f64) -> impl Fn([f64; 2]) -> [f64; 2] {
    move |x| {
        let (a, b) = (x[0], x[1]);
        let px = 2.0 * a * (1.0 - a) * (1.0 - 2.0 * a) * (b * (1.0 - b)).powi(2);
        let py = 2.0 * b * (1.0 - b) * (1.0 - 2.0 * b) * (a * (1.0 - a)).powi(2);
        [amplitude * py, -amplitude * px]
    }
}

/// Heavy fluid (density 3) on the left, light (1) on the right, stirred by a vortex.
#[wasm_bindgen]
pub struct LockExchange {
    disc: Discretization,
    state: State,
    params: SchemeParams,
    steps: usize,
}

impl LockExchange {
    pub fn create(n: usize, scheme_name: &str, dt: f64, mu: f64, vortex_strength: f64) -> Result<Self, String> {
        let kind = scheme(scheme_name)?;
        let disc = Discretization::new(unit_mesh(n, 0.0, 0)?).map_err(|e| e.to_string())?;
        let rho = project_cell(|x| if x[0] < 0.5 { 3.0 } else { 1.0 }, &disc.mesh);
        let u = interpolate_face(vortex(vortex_strength), &disc.mesh);
        let state = State::new(&disc.mesh, 0.0, rho, u);
        let convection = if kind == SchemeKind::Explicit { Convection::Upwind } else { Convection::Centered };
        let params = SchemeParams { kind, dt, mu, t_end: f64::MAX / 4.0, convection, ..Default::default() };
        params.validate().map_err(|e| e.to_string())?;
        Ok(LockExchange { disc, state, params, steps: 0 })
    }

    pub fn advance_by(&mut self, count: usize) -> Result<(), String> {
        for _ in 0..count {
            let (next, _) = step(&self.disc, &self.state, &self.params).map_err(|e| e.to_string())?;
            self.state = next;
            self.steps += 1;
        }
        Ok(())
    }
}

#[wasm_bindgen]
impl LockExchange {
    #[wasm_bindgen(constructor)]
    pub fn new(n: usize, scheme_name: &str, dt: f64, mu: f64, vortex_strength: f64) -> Result<LockExchange, JsError> {
        Self::create(n, scheme_name, dt, mu, vortex_strength).map_err(|e| JsError::new(&e))
    }

    pub fn advance(&mut self, count: usize) -> Result<(), JsError> {
        self.advance_by(count).map_err(|e| JsError::new(&e))
    }

    /// Vertex coordinates, four `(x, y)` pairs per cell.
    pub fn cell_polygons(&self) -> Vec<f64> {
        let m = &self.disc.mesh;
        m.cells.iter().flat_map(|c| c.vertices.iter().flat_map(|&v| m.vertices[v])).collect()
    }

    pub fn density(&self) -> Vec<f64> {
        self.state.rho.values.clone()
    }

    pub fn pressure(&self) -> Vec<f64> {
        self.state.p.values.clone()
    }

    /// Cell centroid and face-averaged velocity, `(x, y, u, v)` per cell.
    pub fn arrows(&self) -> Vec<f64> {
        let m = &self.disc.mesh;
        m.cells
            .iter()
            .flat_map(|c| {
                let mut v = [0.0; 2];
                for &f in &c.faces {
                    v[0] += 0.25 * self.state.u.values[f][0];
                    v[1] += 0.25 * self.state.u.values[f][1];
                }
                [c.centroid[0], c.centroid[1], v[0], v[1]]
            })
            .collect()
    }

    pub fn time(&self) -> f64 {
        self.state.time
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn mass(&self) -> f64 {
        self.state.rho.integral(&self.disc.mesh)
    }

    pub fn rho_min(&self) -> f64 {
        self.state.rho.min()
    }

    pub fn rho_max(&self) -> f64 {
        self.state.rho.max()
    }

    pub fn kinetic_energy(&self) -> f64 {
        kinetic_energy(&self.state, &self.disc.mesh)
    }

    pub fn max_divergence(&self) -> f64 {
        divergence(&self.state.u, &self.disc.mesh).values.iter().fold(0.0, |a, b| a.max(b.abs()))
    }

    /// Largest stable explicit step for the current velocity.
    pub fn cfl_bound(&self) -> f64 {
        cfl_dt(&self.state.u, self.params.mu, &self.disc.mesh, self.params.cfl_safety, self.params.t_end)
    }
}

pub fn regularity_rows(n: usize, perturb: f64, seed: u64, levels: usize) -> Result<Vec<f64>, String> {
    if !(1..=5).contains(&levels) {
        return Err(format!("levels {levels} outside 1..=5"));
    }
    let mut m = unit_mesh(n, perturb, seed)?;
    let mut rows = Vec::new();
    for level in 0..levels {
        let r = m.regularity();
        rows.extend([m.n_cells() as f64, r.h, r.alpha, r.theta]);
        if level + 1 < levels {
            m = m.refine().map_err(|e| e.to_string())?;
        }
    }
    Ok(rows)
}

/// `(cells, h, alpha, theta)` per refinement level of a perturbed unit square.
#[wasm_bindgen]
pub fn regularity_study(n: usize, perturb: f64, seed: u64, levels: usize) -> Result<Vec<f64>, JsError> {
    regularity_rows(n, perturb, seed, levels).map_err(|e| JsError::new(&e))
}

pub fn inf_sup_value(n: usize, perturb: f64, seed: u64) -> Result<f64, String> {
    if n > 32 {
        return Err("inf-sup demo limited to 32 x 32".into());
    }
    let d = Discretization::new(unit_mesh(n, perturb, seed)?).map_err(|e| e.to_string())?;
    inf_sup_constant(&d).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn inf_sup(n: usize, perturb: f64, seed: u64) -> Result<f64, JsError> {
    inf_sup_value(n, perturb, seed).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lock_exchange_keeps_bounds_and_mass() {
        let mut s = LockExchange::create(8, "semi_implicit", 2e-3, 0.01, 40.0).unwrap();
        let m0 = s.mass();
        s.advance_by(10).unwrap();
        assert_eq!(s.steps(), 10);
        assert!(s.rho_min() >= 1.0 - 1e-12 && s.rho_max() <= 3.0 + 1e-12);
        assert!((s.mass() - m0).abs() < 1e-12 * m0);
        assert!(s.max_divergence() < 1e-10);
        assert_eq!(s.cell_polygons().len(), 64 * 8);
        assert_eq!(s.arrows().len(), 64 * 4);
        assert_eq!(s.density().len(), 64);
        assert!(s.kinetic_energy() > 0.0);
    }

    #[test]
    fn explicit_scheme_respects_its_bound() {
        let s = LockExchange::create(8, "explicit", 1.0, 0.01, 40.0).unwrap();
        let mut s2 = LockExchange::create(8, "explicit", 0.5 * s.cfl_bound(), 0.01, 40.0).unwrap();
        s2.advance_by(3).unwrap();
        let mut bad = s;
        assert!(bad.advance_by(1).unwrap_err().contains("CFL"));
    }

    #[test]
    fn bad_inputs_are_reported() {
        assert!(LockExchange::create(8, "leapfrog", 1e-3, 0.01, 1.0).is_err());
        assert!(LockExchange::create(0, "implicit", 1e-3, 0.01, 1.0).is_err());
        assert!(LockExchange::create(8, "implicit", -1.0, 0.01, 1.0).is_err());
        assert!(regularity_rows(4, 0.0, 0, 9).is_err());
        assert!(inf_sup_value(64, 0.0, 0).is_err());
    }

    #[test]
    fn regularity_rows_follow_refinement() {
        let rows = regularity_rows(4, 0.2, 3, 3).unwrap();
        assert_eq!(rows.len(), 12);
        assert_eq!([rows[0], rows[4], rows[8]], [16.0, 64.0, 256.0]);
        assert!(rows[9] < rows[5] && rows[5] < rows[1]);
        let cart = regularity_rows(4, 0.0, 0, 2).unwrap();
        assert!((cart[1] / cart[5] - 2.0).abs() < 1e-12);
        assert_eq!(cart[2], 0.0);
    }

    #[test]
    fn inf_sup_positive() {
        let b = inf_sup_value(6, 0.2, 1).unwrap();
        assert!(b > 0.3 && b < 1.0, "{b}");
    }
}
