use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::operators::SparseOperator;
use crate::timestepping::linear::SparseLu;
use crate::timestepping::Discretization;

const DENSE_LIMIT: usize = 600;
const LANCZOS_MAX: usize = 150;

/// Discrete inf-sup constant: square root of the smallest nonzero eigenvalue
/// of `B A^{-1} B^T` relative to the pressure mass matrix `diag(|K|)`, with `A`
/// the broken-H1 stiffness. Dense below 600 cells, Lanczos on the inverse
/// Schur complement above.
pub fn inf_sup_constant(disc: &Discretization) -> Result<f64> {
    let mesh = &disc.mesh;
    if mesh.n_cells() < 2 || mesh.n_internal() == 0 {
        return Err(Error::Eigen("mesh needs at least two cells and one internal face".into()));
    }
    if mesh.n_cells() <= DENSE_LIMIT {
        dense(disc)
    } else {
        lanczos(disc)
    }
}

fn dense(disc: &Discretization) -> Result<f64> {
    let mesh = &disc.mesh;
    let (n_p, n_i) = (mesh.n_cells(), mesh.n_internal());
    let lu = SparseLu::new(disc.stiffness.clone(), "stiffness for inf-sup")?;
    // columns of B^T, split into the two velocity components
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(2 * n_p);
    for k in 0..n_p {
        for c in 0..2 {
            let mut b = vec![0.0; n_i];
            for (dof, v) in disc.div.row(k) {
                if dof % 2 == c {
                    b[dof / 2] = v;
                }
            }
            cols.push(b);
        }
    }
    let solved: Vec<Vec<f64>> = cols.iter().map(|b| lu.solve(b)).collect::<Result<_>>()?;
    let mut schur = DMatrix::<f64>::zeros(n_p, n_p);
    for k in 0..n_p {
        for l in k..n_p {
            let mut s = 0.0;
            for c in 0..2 {
                s += cols[2 * k + c].iter().zip(&solved[2 * l + c]).map(|(a, b)| a * b).sum::<f64>();
            }
            schur[(k, l)] = s;
            schur[(l, k)] = s;
        }
    }
    let w: Vec<f64> = mesh.cells.iter().map(|c| 1.0 / c.volume.sqrt()).collect();
    let scaled = DMatrix::from_fn(n_p, n_p, |i, j| w[i] * schur[(i, j)] * w[j]);
    let eig = SymmetricEigen::try_new(scaled, 1e-14, 10_000).ok_or_else(|| Error::Eigen("no convergence".into()))?;
    let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    let top = ev[n_p - 1];
    if ev[0].abs() > 1e-9 * top {
        return Err(Error::Eigen(format!("constant pressure mode not in the kernel: {} vs {}", ev[0], top)));
    }
    Ok(ev[1].max(0.0).sqrt())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    y.iter_mut().zip(x).for_each(|(y, x)| *y += a * x);
}

/// Largest eigenvalue of `M^{1/2} S^+ M^{1/2}` on the complement of the constants,
/// `S^+ y` obtained from one bordered saddle-point solve.
fn lanczos(disc: &Discretization) -> Result<f64> {
    let mesh = &disc.mesh;
    let (n_p, n_u) = (mesh.n_cells(), 2 * mesh.n_internal());
    let n = n_u + n_p + 1;
    let mut trip = Vec::new();
    for (r, c, v) in disc.stiffness.triplets() {
        trip.push((2 * r, 2 * c, v));
        trip.push((2 * r + 1, 2 * c + 1, v));
    }
    for (k, dof, v) in disc.div.triplets() {
        trip.push((dof, n_u + k, v));
        trip.push((n_u + k, dof, v));
    }
    for (k, cell) in mesh.cells.iter().enumerate() {
        trip.push((n_u + k, n - 1, cell.volume));
        trip.push((n - 1, n_u + k, cell.volume));
    }
    let lu = SparseLu::new(SparseOperator::from_triplets(n, n, trip, true), "saddle point for inf-sup")?;
    let sq: Vec<f64> = mesh.cells.iter().map(|c| c.volume.sqrt()).collect();
    let kernel_norm = dot(&sq, &sq).sqrt();
    let kernel: Vec<f64> = sq.iter().map(|s| s / kernel_norm).collect();
    let deflate = |x: &mut Vec<f64>| {
        let a = dot(x, &kernel);
        axpy(x, -a, &kernel);
    };
    let apply = |x: &[f64]| -> Result<Vec<f64>> {
        let mut rhs = vec![0.0; n];
        for k in 0..n_p {
            rhs[n_u + k] = -sq[k] * x[k];
        }
        let sol = lu.solve(&rhs)?;
        Ok((0..n_p).map(|k| sq[k] * sol[n_u + k]).collect())
    };

    let mut v: Vec<f64> = (0..n_p).map(|k| 1.0 + ((k * 7919) % 97) as f64 / 97.0).collect();
    deflate(&mut v);
    let nv = dot(&v, &v).sqrt();
    v.iter_mut().for_each(|x| *x /= nv);
    let mut basis = vec![v];
    let (mut alpha, mut beta) = (Vec::new(), Vec::new());
    let mut last = 0.0;
    for it in 0..LANCZOS_MAX.min(n_p - 1) {
        let mut w = apply(&basis[it])?;
        let a = dot(&w, &basis[it]);
        alpha.push(a);
        // full reorthogonalization, twice
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&w, q);
                axpy(&mut w, -c, q);
            }
            deflate(&mut w);
        }
        let m = alpha.len();
        let t = DMatrix::from_fn(m, m, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j || j + 1 == i {
                beta[i.min(j)]
            } else {
                0.0
            }
        });
        let top = SymmetricEigen::new(t).eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let b = dot(&w, &w).sqrt();
        if (top - last).abs() <= 1e-12 * top || b <= 1e-14 * top {
            last = top;
            break;
        }
        last = top;
        beta.push(b);
        basis.push(w.into_iter().map(|x| x / b).collect());
    }
    if !(last.is_finite() && last > 0.0) {
        return Err(Error::Eigen(format!("Lanczos produced {last}")));
    }
    Ok(1.0 / last.sqrt())
}
