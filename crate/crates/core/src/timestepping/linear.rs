//! Sparse direct solves backed by faer's LU.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Lu;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;

use crate::error::{Error, Result};
use crate::operators::SparseOperator;

/// LU factorization of a square sparse operator, kept for repeated solves.
pub struct SparseLu {
    op: SparseOperator,
    lu: Lu<usize, f64>,
    context: String,
}

impl SparseLu {
    pub fn new(op: SparseOperator, context: impl Into<String>) -> Result<Self> {
        let context = context.into();
        if op.n_rows != op.n_cols {
            return Err(Error::LinearSolve { context, msg: format!("matrix is {}x{}", op.n_rows, op.n_cols) });
        }
        let trip: Vec<_> = op.triplets().into_iter().map(|(r, c, v)| Triplet::new(r, c, v)).collect();
        let mat = SparseColMat::<usize, f64>::try_new_from_triplets(op.n_rows, op.n_cols, &trip)
            .map_err(|e| Error::LinearSolve { context: context.clone(), msg: format!("{e:?}") })?;
        let lu = mat.sp_lu().map_err(|e| Error::LinearSolve { context: context.clone(), msg: format!("{e:?}") })?;
        Ok(SparseLu { op, lu, context })
    }

    fn raw_solve(&self, rhs: &[f64]) -> Vec<f64> {
        let b = Mat::from_fn(rhs.len(), 1, |i, _| rhs[i]);
        let x = self.lu.solve(&b);
        (0..rhs.len()).map(|i| x[(i, 0)]).collect()
    }

    /// Solves with one step of iterative refinement; non-finite results are errors.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let mut x = self.raw_solve(rhs);
        let ax = self.op.matvec(&x);
        let r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let dx = self.raw_solve(&r);
        x.iter_mut().zip(&dx).for_each(|(x, d)| *x += d);
        if x.iter().all(|v| v.is_finite()) {
            Ok(x)
        } else {
            Err(Error::LinearSolve { context: self.context.clone(), msg: "non-finite solution (singular matrix?)".into() })
        }
    }

    pub fn operator(&self) -> &SparseOperator {
        &self.op
    }
}

/// Factorizes and solves once.
pub fn solve_sparse(op: SparseOperator, rhs: &[f64], context: &str) -> Result<Vec<f64>> {
    SparseLu::new(op, context)?.solve(rhs)
}
