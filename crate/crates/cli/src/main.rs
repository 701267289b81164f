use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use rtflow_cli::{run, CliError, Mode, RunConfig};

#[derive(Parser)]
#[command(name = "rtflow", about = "Variable-density incompressible flow on quadrilateral meshes")]
struct Args {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// simulate, verify, convergence or infsup.
    #[arg(long)]
    mode: Option<Mode>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of uniform refinements of the configured mesh.
    #[arg(long)]
    level: Option<usize>,
}

fn load(args: &Args) -> Result<RunConfig, CliError> {
    let mut config = match &args.config {
        Some(path) => RunConfig::read(path)?,
        None => RunConfig::default(),
    };
    if let Some(m) = args.mode {
        config.mode = m;
    }
    if let Some(out) = &args.out {
        config.output.dir = out.clone();
    }
    if let Some(level) = args.level {
        config.mesh.refine = level;
    }
    Ok(config)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = load(&args).and_then(|config| run(&config, &mut std::io::stdout()));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
