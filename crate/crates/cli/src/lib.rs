//! Batch driver: simulation with per-step invariant checks, the verification
//! suite, manufactured-solution convergence studies and inf-sup estimates.

pub mod config;
pub mod vtk;

use std::fs;
use std::io::Write;
use std::path::Path;

use rtflow::diagnostics::{
    convergence_study, energy_budget, inf_sup_constant, verify_suite, BudgetReport, ConvergenceConfig,
    ManufacturedSolution,
};
use rtflow::fields::{interpolate_face, project_cell, CellScalarField, FaceVectorField, State};
use rtflow::operators::divergence;
use rtflow::timestepping::{step, Discretization, SchemeKind};
use rtflow::Mesh;

pub use config::{Mode, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Solver(#[from] rtflow::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("step {step}: {source}")]
    Step { step: usize, source: rtflow::Error },
    #[error("step {step}: {what}")]
    Invariant { step: usize, what: String },
    #[error("{failed} of {total} verification checks failed")]
    Verify { failed: usize, total: usize },
}

impl CliError {
    /// 2 for configuration problems, 1 for everything that failed at run time.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
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

fn read_table(path: &Path, width: usize, count: usize) -> Result<Vec<Vec<f64>>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let rows: Vec<Vec<f64>> = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let row: Vec<f64> = l
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| CliError::Config(format!("{}:{}: {e}", path.display(), i + 1)))?;
            if row.len() != width {
                return Err(CliError::Config(format!("{}:{}: expected {width} values", path.display(), i + 1)));
            }
            Ok(row)
        })
        .collect::<Result<_, _>>()?;
    if rows.len() != count {
        return Err(CliError::Config(format!("{}: expected {count} rows, found {}", path.display(), rows.len())));
    }
    Ok(rows)
}

/// Initial state from the presets or tables in `config.initial`.
pub fn initial_state(config: &RunConfig, mesh: &Mesh) -> Result<State, CliError> {
    use config::{DensityPreset, VelocityPreset};
    let init = &config.initial;
    let mms = ManufacturedSolution::transported_density(config.scheme.mu);
    let rho = match &init.density_file {
        Some(path) => CellScalarField {
            values: read_table(path, 1, mesh.n_cells())?.into_iter().map(|r| r[0]).collect(),
        },
        None => match init.density {
            DensityPreset::Uniform => CellScalarField::constant(mesh, init.rho_low),
            DensityPreset::LockExchange => {
                let mid = 0.5 * (config.mesh.domain[0] + config.mesh.domain[2]);
                project_cell(|x| if x[0] < mid { init.rho_high } else { init.rho_low }, mesh)
            }
            DensityPreset::MmsTransported => project_cell(|x| mms.density(x, 0.0), mesh),
        },
    };
    if let Some(k) = rho.values.iter().position(|&r| !(r > 0.0 && r.is_finite())) {
        return Err(CliError::Config(format!("initial density in cell {k} is {}", rho.values[k])));
    }
    let mut u = match &init.velocity_file {
        Some(path) => FaceVectorField {
            values: read_table(path, 2, mesh.n_faces())?.into_iter().map(|r| [r[0], r[1]]).collect(),
        },
        None => match init.velocity {
            VelocityPreset::Rest => FaceVectorField::zeros(mesh),
            VelocityPreset::Vortex => interpolate_face(vortex(init.amplitude), mesh),
            VelocityPreset::Mms => interpolate_face(|x| mms.velocity(x, 0.0), mesh),
        },
    };
    u.enforce_boundary(mesh);
    Ok(State::new(mesh, 0.0, rho, u))
}

fn uses_mms(config: &RunConfig) -> bool {
    config.initial.velocity == config::VelocityPreset::Mms && config.initial.velocity_file.is_none()
}

fn check_step(
    config: &RunConfig,
    step_no: usize,
    state: &State,
    report: &BudgetReport,
    bounds: (f64, f64, f64),
    mesh: &Mesh,
    log: &mut dyn Write,
) -> Result<(), CliError> {
    let c = &config.checks;
    let (lo, hi, mass0) = bounds;
    let mut violations = Vec::new();
    if let Some((k, r)) = state
        .rho
        .values
        .iter()
        .enumerate()
        .find(|(_, &r)| r < lo - c.bound_tol || r > hi + c.bound_tol)
    {
        violations.push(format!("cell {k}: density {r:e} outside [{lo:e}, {hi:e}]"));
    }
    let drift = (state.rho.integral(mesh) - mass0).abs() / mass0;
    if drift > c.mass_tol {
        violations.push(format!("mass drift {drift:e} above {:e}", c.mass_tol));
    }
    let div = divergence(&state.u, mesh);
    if let Some((k, d)) = div.values.iter().enumerate().max_by(|a, b| a.1.abs().total_cmp(&b.1.abs())) {
        if d.abs() > c.divergence_tol {
            violations.push(format!("cell {k}: divergence {d:e} above {:e}", c.divergence_tol));
        }
    }
    if let Some((k, r)) = report.cell_residual.iter().enumerate().max_by(|a, b| a.1.abs().total_cmp(&b.1.abs())) {
        if r.abs() > c.energy_tol {
            violations.push(format!("cell {k}: rho^2 balance residual {r:e} above {:e}", c.energy_tol));
        }
    }
    let exact_energy = matches!(config.scheme.params().kind, SchemeKind::Implicit | SchemeKind::SemiImplicit);
    if exact_energy {
        if let Some((f, r)) = report.face_residual.iter().enumerate().max_by(|a, b| a.1.abs().total_cmp(&b.1.abs())) {
            if r.abs() > c.energy_tol {
                violations.push(format!("face {f}: kinetic energy residual {r:e} above {:e}", c.energy_tol));
            }
        }
    }
    if violations.is_empty() {
        return Ok(());
    }
    if c.hard_fail {
        return Err(CliError::Invariant { step: step_no, what: violations.join("; ") });
    }
    for v in violations {
        writeln!(log, "warning: step {step_no}: {v}")?;
    }
    Ok(())
}

fn simulate(config: &RunConfig, mesh: Mesh, log: &mut dyn Write) -> Result<(), CliError> {
    let out = &config.output.dir;
    fs::create_dir_all(out)?;
    let disc = Discretization::new(mesh)?;
    let mesh = &disc.mesh;
    let mut params = config.scheme.params();
    if uses_mms(config) {
        params.source = Some(ManufacturedSolution::transported_density(params.mu).source_fn());
    }
    let mut state = initial_state(config, mesh)?;
    let bounds = (state.rho.min(), state.rho.max(), state.rho.integral(mesh));
    let steps = (params.t_end / params.dt - 1e-9).ceil().max(0.0) as usize;
    let mut csv = String::from(BudgetReport::csv_header());
    csv.push('\n');
    let vtk_name = |n: usize| out.join(format!("fields_{n:05}.vtk"));
    fs::write(vtk_name(0), vtk::to_vtk(&state, mesh, "rtflow"))?;
    writeln!(log, "simulate: {} cells, {steps} steps of {:?} with dt = {:e}", mesh.n_cells(), params.kind, params.dt)?;
    for n in 1..=steps {
        let (new, art) = step(&disc, &state, &params).map_err(|e| CliError::Step { step: n, source: e })?;
        let report = energy_budget(&state, &new, &art, &params, &disc)?;
        csv.push_str(&report.csv_row(n, new.time));
        csv.push('\n');
        let checked = check_step(config, n, &new, &report, bounds, mesh, log);
        state = new;
        if let Err(e) = checked {
            fs::write(out.join("budgets.csv"), &csv)?;
            return Err(e);
        }
        let every = config.output.every;
        if (every > 0 && n % every == 0) || n == steps {
            fs::write(vtk_name(n), vtk::to_vtk(&state, mesh, "rtflow"))?;
        }
    }
    fs::write(out.join("budgets.csv"), &csv)?;
    writeln!(
        log,
        "done: t = {:.6}, rho in [{:.6}, {:.6}], mass {:.12e}",
        state.time,
        state.rho.min(),
        state.rho.max(),
        state.rho.integral(mesh)
    )?;
    Ok(())
}

fn verify(config: &RunConfig, mesh: Mesh, log: &mut dyn Write) -> Result<(), CliError> {
    let checks = verify_suite(&mesh, config.seed)?;
    for c in &checks {
        writeln!(log, "{}", c.line())?;
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        return Err(CliError::Verify { failed, total: checks.len() });
    }
    writeln!(log, "all {} checks passed", checks.len())?;
    Ok(())
}

fn convergence(config: &RunConfig, mesh: Mesh, log: &mut dyn Write) -> Result<(), CliError> {
    let mu = config.scheme.mu;
    let case = if config.study.transported_density {
        ManufacturedSolution::transported_density(mu)
    } else {
        ManufacturedSolution::constant_density(mu)
    };
    let cfg = ConvergenceConfig {
        base: mesh,
        levels: config.study.levels,
        params: config.scheme.params(),
        case,
        t_end: config.scheme.t_end,
    };
    let table = convergence_study(&cfg)?;
    write!(log, "{}", table.to_text())?;
    fs::create_dir_all(&config.output.dir)?;
    fs::write(config.output.dir.join("convergence.csv"), table.to_csv())?;
    Ok(())
}

fn infsup(config: &RunConfig, mut mesh: Mesh, log: &mut dyn Write) -> Result<(), CliError> {
    let mut csv = String::from("level,cells,h,beta\n");
    writeln!(log, "{:>5} {:>7} {:>10} {:>10}", "level", "cells", "h", "beta")?;
    for level in 0..config.study.levels {
        let h = mesh.regularity().h;
        let cells = mesh.n_cells();
        let beta = inf_sup_constant(&Discretization::new(mesh.clone())?)?;
        writeln!(log, "{level:>5} {cells:>7} {h:>10.4e} {beta:>10.6}")?;
        csv.push_str(&format!("{level},{cells},{h:?},{beta:?}\n"));
        if level + 1 < config.study.levels {
            mesh = mesh.refine()?;
        }
    }
    fs::create_dir_all(&config.output.dir)?;
    fs::write(config.output.dir.join("infsup.csv"), csv)?;
    Ok(())
}

/// Validates `config`, then runs its mode, writing progress to `log`.
pub fn run(config: &RunConfig, log: &mut dyn Write) -> Result<(), CliError> {
    config.validate()?;
    let mesh = config.build_mesh()?;
    match config.mode {
        Mode::Simulate => simulate(config, mesh, log),
        Mode::Verify => verify(config, mesh, log),
        Mode::Convergence => convergence(config, mesh, log),
        Mode::Infsup => infsup(config, mesh, log),
    }
}
