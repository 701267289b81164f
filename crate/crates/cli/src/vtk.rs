//! Legacy ASCII VTK output on the primal mesh.

use std::fmt::Write;

use rtflow::fields::State;
use rtflow::Mesh;

/// Face velocities averaged to cells with equal weights.
pub fn cell_velocity(state: &State, mesh: &Mesh) -> Vec<[f64; 2]> {
    mesh.cells
        .iter()
        .map(|c| {
            let mut v = [0.0; 2];
            for &f in &c.faces {
                v[0] += 0.25 * state.u.values[f][0];
                v[1] += 0.25 * state.u.values[f][1];
            }
            v
        })
        .collect()
}

pub fn to_vtk(state: &State, mesh: &Mesh, title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0\n{title} t={:?}\nASCII\nDATASET UNSTRUCTURED_GRID", state.time);
    let _ = writeln!(s, "POINTS {} double", mesh.vertices.len());
    for v in &mesh.vertices {
        let _ = writeln!(s, "{:?} {:?} 0", v[0], v[1]);
    }
    let n = mesh.n_cells();
    let _ = writeln!(s, "CELLS {n} {}", 5 * n);
    for c in &mesh.cells {
        let v = c.vertices;
        let _ = writeln!(s, "4 {} {} {} {}", v[0], v[1], v[2], v[3]);
    }
    let _ = writeln!(s, "CELL_TYPES {n}");
    for _ in 0..n {
        s.push_str("9\n");
    }
    let _ = writeln!(s, "CELL_DATA {n}");
    for (name, field) in [("rho", &state.rho.values), ("p", &state.p.values)] {
        let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for v in field {
            // + 0.0 folds negative zero
            let _ = writeln!(s, "{:?}", v + 0.0);
        }
    }
    s.push_str("VECTORS u double\n");
    for v in cell_velocity(state, mesh) {
        let _ = writeln!(s, "{:?} {:?} 0", v[0] + 0.0, v[1] + 0.0);
    }
    s
}
