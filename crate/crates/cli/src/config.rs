//! Run configuration, read from TOML. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use rtflow::timestepping::{Convection, SchemeKind, SchemeParams};
use rtflow::Mesh;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Simulate,
    Verify,
    Convergence,
    Infsup,
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "simulate" => Ok(Mode::Simulate),
            "verify" => Ok(Mode::Verify),
            "convergence" => Ok(Mode::Convergence),
            "infsup" => Ok(Mode::Infsup),
            _ => Err(format!("unknown mode {s:?} (simulate, verify, convergence, infsup)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeshConfig {
    /// Cartesian grid when `file` is absent.
    pub nx: usize,
    pub ny: usize,
    /// `[x0, y0, x1, y1]`.
    pub domain: [f64; 4],
    pub file: Option<PathBuf>,
    pub perturb: f64,
    pub perturb_seed: u64,
    pub refine: usize,
}

impl Default for MeshConfig {
    fn default() -> Self {
        MeshConfig { nx: 8, ny: 8, domain: [0.0, 0.0, 1.0, 1.0], file: None, perturb: 0.0, perturb_seed: 0, refine: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeName {
    Implicit,
    SemiImplicit,
    Explicit,
    Projection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvectionName {
    Centered,
    Upwind,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SchemeConfig {
    pub kind: SchemeName,
    pub dt: f64,
    pub t_end: f64,
    pub mu: f64,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    pub cfl_safety: f64,
    pub convection: ConvectionName,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        let p = SchemeParams::default();
        SchemeConfig {
            kind: SchemeName::Implicit,
            dt: p.dt,
            t_end: p.t_end,
            mu: p.mu,
            picard_tol: p.picard_tol,
            picard_max_iter: p.picard_max_iter,
            cfl_safety: p.cfl_safety,
            convection: ConvectionName::Centered,
        }
    }
}

impl SchemeConfig {
    pub fn params(&self) -> SchemeParams {
        SchemeParams {
            kind: match self.kind {
                SchemeName::Implicit => SchemeKind::Implicit,
                SchemeName::SemiImplicit => SchemeKind::SemiImplicit,
                SchemeName::Explicit => SchemeKind::Explicit,
                SchemeName::Projection => SchemeKind::Projection,
            },
            dt: self.dt,
            t_end: self.t_end,
            mu: self.mu,
            picard_tol: self.picard_tol,
            picard_max_iter: self.picard_max_iter,
            cfl_safety: self.cfl_safety,
            convection: match self.convection {
                ConvectionName::Centered => Convection::Centered,
                ConvectionName::Upwind => Convection::Upwind,
            },
            source: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityPreset {
    Uniform,
    LockExchange,
    MmsTransported,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VelocityPreset {
    Rest,
    Vortex,
    Mms,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialConfig {
    pub density: DensityPreset,
    /// Uniform value, or the right-hand state of the lock exchange.
    pub rho_low: f64,
    /// Left-hand state of the lock exchange.
    pub rho_high: f64,
    pub velocity: VelocityPreset,
    pub amplitude: f64,
    /// One density value per cell, one per line; overrides `density`.
    pub density_file: Option<PathBuf>,
    /// `u v` per face, one face per line; overrides `velocity`.
    pub velocity_file: Option<PathBuf>,
}

impl Default for InitialConfig {
    fn default() -> Self {
        InitialConfig {
            density: DensityPreset::Uniform,
            rho_low: 1.0,
            rho_high: 3.0,
            velocity: VelocityPreset::Rest,
            amplitude: 40.0,
            density_file: None,
            velocity_file: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Write a VTK file every `every` steps; `0` writes only the initial and final states.
    pub every: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("out"), every: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CheckConfig {
    pub hard_fail: bool,
    pub bound_tol: f64,
    pub mass_tol: f64,
    pub divergence_tol: f64,
    pub energy_tol: f64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig { hard_fail: true, bound_tol: 1e-11, mass_tol: 1e-11, divergence_tol: 1e-10, energy_tol: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StudyConfig {
    /// Levels for `convergence` and `infsup`.
    pub levels: usize,
    pub transported_density: bool,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig { levels: 3, transported_density: true }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub mode: Mode,
    pub seed: u64,
    pub mesh: MeshConfig,
    pub scheme: SchemeConfig,
    pub initial: InitialConfig,
    pub output: OutputConfig,
    pub checks: CheckConfig,
    pub study: StudyConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: Mode::Simulate,
            seed: 0,
            mesh: MeshConfig::default(),
            scheme: SchemeConfig::default(),
            initial: InitialConfig::default(),
            output: OutputConfig::default(),
            checks: CheckConfig::default(),
            study: StudyConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let c: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        Ok(c)
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Checks every field before any computation starts.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        let m = &self.mesh;
        if m.file.is_none() && (m.nx == 0 || m.ny == 0) {
            return bad(format!("mesh.nx and mesh.ny must be positive, got {} x {}", m.nx, m.ny));
        }
        if !(m.domain[2] > m.domain[0] && m.domain[3] > m.domain[1]) {
            return bad(format!("mesh.domain must be [x0, y0, x1, y1] with x1 > x0, y1 > y0, got {:?}", m.domain));
        }
        if !(0.0..0.5).contains(&m.perturb) {
            return bad(format!("mesh.perturb must lie in [0, 0.5), got {}", m.perturb));
        }
        if m.refine > 8 {
            return bad(format!("mesh.refine = {} is beyond any practical size", m.refine));
        }
        self.scheme.params().validate().map_err(|e| CliError::Config(e.to_string()))?;
        let i = &self.initial;
        if !(i.rho_low > 0.0 && i.rho_high > 0.0) {
            return bad(format!("initial densities must be positive, got {} and {}", i.rho_low, i.rho_high));
        }
        if !i.amplitude.is_finite() {
            return bad("initial.amplitude must be finite".into());
        }
        let c = &self.checks;
        for (name, v) in [
            ("bound_tol", c.bound_tol),
            ("mass_tol", c.mass_tol),
            ("divergence_tol", c.divergence_tol),
            ("energy_tol", c.energy_tol),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("checks.{name} must be a nonnegative number, got {v}"));
            }
        }
        if self.study.levels == 0 {
            return bad("study.levels must be at least 1".into());
        }
        Ok(())
    }

    pub fn build_mesh(&self) -> Result<Mesh, CliError> {
        let m = &self.mesh;
        let mut mesh = match &m.file {
            Some(path) => Mesh::read_file(path)?,
            None => Mesh::cartesian(m.nx, m.ny, [m.domain[0], m.domain[1]], [m.domain[2], m.domain[3]])?,
        };
        if m.perturb > 0.0 {
            mesh = mesh.perturb(m.perturb, m.perturb_seed)?;
        }
        for _ in 0..m.refine {
            mesh = mesh.refine()?;
        }
        Ok(mesh)
    }
}
