use clap::{Parser, Subcommand};
use hartree::HartreeError;
use hartree_io::{run_subcommand, RunConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "hartree", version, about = "Radial energy-critical Hartree laboratory")]
struct Cli {
    /// Flat `section.key = value` config file; HARTREE_* variables override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (defaults to output.dir from the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads, 0 for all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Calibrate W and write its profile.
    GroundState,
    /// Unstable eigenpair, null modes and coercivity constants.
    Spectrum,
    /// Fit phase, scale and α to the initial data.
    Modulate,
    /// Run the integrator with diagnostics.
    Evolve,
    /// Build threshold initial data W^±(t₀).
    ConstructWpm,
    /// Localized virial quantities of the initial data.
    Virial,
    /// Kelvin-transform and integral-system checks.
    KelvinCheck,
    /// Run all acceptance criteria.
    Acceptance,
}

impl Cmd {
    fn name(self) -> &'static str {
        match self {
            Cmd::GroundState => "ground-state",
            Cmd::Spectrum => "spectrum",
            Cmd::Modulate => "modulate",
            Cmd::Evolve => "evolve",
            Cmd::ConstructWpm => "construct-wpm",
            Cmd::Virial => "virial",
            Cmd::KelvinCheck => "kelvin-check",
            Cmd::Acceptance => "acceptance",
        }
    }
}

fn fail(e: HartreeError) -> ExitCode {
    eprintln!("error[{}]: {e}", e.code());
    match e {
        HartreeError::ConfigInvalid(_) => ExitCode::from(2),
        _ => ExitCode::from(1),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut cfg = match RunConfig::load(cli.config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            return ExitCode::from(2);
        }
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(t) = cli.threads {
        cfg.threads = t;
    }
    if cfg.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build_global() {
            eprintln!("warning: thread pool: {e}");
        }
    }
    let out = cli.out.unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
    match run_subcommand(cli.cmd.name(), &cfg, &out) {
        Ok(m) => {
            for f in &m.files {
                println!("{}  {}", f.sha256, out.join(&f.path).display());
            }
            for (k, v) in &m.derived {
                println!("{k} = {v:.12e}");
            }
            if m.derived.get("failed").copied().unwrap_or(0.0) > 0.0 {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(e),
    }
}
