use std::fmt::Write;

use super::mms::{mms_error, ManufacturedSolution};
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::timestepping::{step, Discretization, SchemeParams};

/// Refinement chain for a manufactured solution: each level refines the mesh
/// once and halves `dt`.
#[derive(Debug, Clone)]
pub struct ConvergenceConfig {
    pub base: Mesh,
    pub levels: usize,
    /// Scheme settings on the base level; `mu` and `source` are taken from `case`.
    pub params: SchemeParams,
    pub case: ManufacturedSolution,
    pub t_end: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub level: usize,
    pub cells: usize,
    pub h: f64,
    pub dt: f64,
    /// `max_n ||rho^n - rho(t_n)||_{L2}`.
    pub rho_linf_l2: f64,
    /// `max_n ||u^n - r u(t_n)||_{L2}`.
    pub u_linf_l2: f64,
    /// `(sum_n dt ||u^n - r u(t_n)||_b^2)^{1/2}`.
    pub u_l2_broken: f64,
    pub theta: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
}

fn order(e0: f64, e1: f64, h0: f64, h1: f64) -> f64 {
    (e0 / e1).ln() / (h0 / h1).ln()
}

impl ConvergenceTable {
    /// Observed orders `(rho, u_l2, u_broken)` between consecutive levels.
    pub fn orders(&self) -> Vec<[f64; 3]> {
        self.rows
            .windows(2)
            .map(|w| {
                let (a, b) = (&w[0], &w[1]);
                [
                    order(a.rho_linf_l2, b.rho_linf_l2, a.h, b.h),
                    order(a.u_linf_l2, b.u_linf_l2, a.h, b.h),
                    order(a.u_l2_broken, b.u_l2_broken, a.h, b.h),
                ]
            })
            .collect()
    }

    /// Whether every error column strictly decreases from level to level.
    pub fn strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| {
            w[1].rho_linf_l2 < w[0].rho_linf_l2 && w[1].u_linf_l2 < w[0].u_linf_l2 && w[1].u_l2_broken < w[0].u_l2_broken
        })
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("level,cells,h,dt,rho_linf_l2,u_linf_l2,u_l2_broken,order_rho,order_u_l2,order_u_broken,theta,alpha\n");
        let orders = self.orders();
        for (i, r) in self.rows.iter().enumerate() {
            let o = if i == 0 { [f64::NAN; 3] } else { orders[i - 1] };
            let _ = writeln!(
                s,
                "{},{},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?}",
                r.level, r.cells, r.h, r.dt, r.rho_linf_l2, r.u_linf_l2, r.u_l2_broken, o[0], o[1], o[2], r.theta, r.alpha
            );
        }
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "{:>5} {:>7} {:>10} {:>10} {:>12} {:>6} {:>12} {:>6} {:>12} {:>6}\n",
            "level", "cells", "h", "dt", "rho L2", "rate", "u L2", "rate", "u broken", "rate"
        );
        let orders = self.orders();
        for (i, r) in self.rows.iter().enumerate() {
            let fmt = |v: f64| if v.is_nan() { "-".to_string() } else { format!("{v:.2}") };
            let o = if i == 0 { [f64::NAN; 3] } else { orders[i - 1] };
            let _ = writeln!(
                s,
                "{:>5} {:>7} {:>10.4e} {:>10.4e} {:>12.4e} {:>6} {:>12.4e} {:>6} {:>12.4e} {:>6}",
                r.level,
                r.cells,
                r.h,
                r.dt,
                r.rho_linf_l2,
                fmt(o[0]),
                r.u_linf_l2,
                fmt(o[1]),
                r.u_l2_broken,
                fmt(o[2])
            );
        }
        s
    }
}

/// Runs the manufactured case to `t_end` on every level of the chain.
pub fn convergence_study(config: &ConvergenceConfig) -> Result<ConvergenceTable> {
    if config.levels == 0 {
        return Err(Error::InvalidParameter("convergence study needs at least one level".into()));
    }
    let mut table = ConvergenceTable::default();
    let mut mesh = config.base.clone();
    let mut dt = config.params.dt;
    for level in 0..config.levels {
        let params = SchemeParams {
            dt,
            mu: config.case.mu,
            t_end: config.t_end,
            source: Some(config.case.source_fn()),
            ..config.params.clone()
        };
        let disc = Discretization::new(mesh.clone())?;
        let mut state = config.case.discrete_state(&mesh, 0.0);
        let steps = (config.t_end / dt).round() as usize;
        let (mut rho_e, mut u_e, mut u_b2) = (0.0f64, 0.0f64, 0.0);
        for n in 0..steps {
            state = step(&disc, &state, &params)
                .map_err(|e| Error::InvalidParameter(format!("level {level}, step {}: {e}", n + 1)))?
                .0;
            let e = mms_error(&state, &config.case, &mesh);
            rho_e = rho_e.max(e.rho_l2);
            u_e = u_e.max(e.u_l2);
            u_b2 += dt * e.u_broken * e.u_broken;
        }
        let reg = mesh.regularity();
        table.rows.push(ConvergenceRow {
            level,
            cells: mesh.n_cells(),
            h: reg.h,
            dt,
            rho_linf_l2: rho_e,
            u_linf_l2: u_e,
            u_l2_broken: u_b2.sqrt(),
            theta: reg.theta,
            alpha: reg.alpha,
        });
        if level + 1 < config.levels {
            mesh = mesh.refine()?;
            dt *= 0.5;
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timestepping::SchemeKind;

    #[test]
    fn single_level_has_no_orders() {
        let cfg = ConvergenceConfig {
            base: Mesh::cartesian(4, 4, [0.0, 0.0], [1.0, 1.0]).unwrap(),
            levels: 1,
            params: SchemeParams { kind: SchemeKind::SemiImplicit, dt: 0.05, ..Default::default() },
            case: ManufacturedSolution::constant_density(0.1),
            t_end: 0.1,
        };
        let t = convergence_study(&cfg).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert!(t.orders().is_empty());
        assert_eq!(t.to_csv().lines().count(), 2);
        assert!(t.to_text().contains(" - "));
    }

    #[test]
    fn errors_decrease_on_short_chain() {
        let cfg = ConvergenceConfig {
            base: Mesh::cartesian(4, 4, [0.0, 0.0], [1.0, 1.0]).unwrap(),
            levels: 3,
            params: SchemeParams { kind: SchemeKind::SemiImplicit, dt: 0.04, ..Default::default() },
            case: ManufacturedSolution::transported_density(0.1),
            t_end: 0.16,
        };
        let t = convergence_study(&cfg).unwrap();
        assert!(t.strictly_decreasing(), "{}", t.to_text());
    }
}
