mod config;
mod error;
mod output;
mod run;

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

use config::RunConfig;
use error::{CliError, CliResult};

/// Vibronic dimer energy transfer: dynamics, spectra, and four-pulse interferometry.
#[derive(Debug, Parser)]
#[command(name = "vibdimer", version)]
struct Cli {
    /// TOML run configuration; defaults are used for anything left out.
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides VIBDIMER_OUT and the config file.
    #[arg(short, long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores); never changes the output bytes.
    #[arg(short = 'j', long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Populations and mean phase-space trajectories.
    Dynamics,
    /// Spectrum and per-eigenstate momentum map.
    Eigen,
    /// (t_p, t_d) grid of the interferometric signal plus peak report.
    Interferogram,
    /// Semiclassical coincidence delays.
    Match,
    /// One-dimensional sweep of the acceptor yield.
    Scan,
    /// Structural self-checks; exits 3 if any fails.
    Validate,
    /// A named figure or table reproduction.
    Scenario { name: Scenario },
    /// Whatever `scenario` names in the config file.
    Run,
    /// Print the effective configuration as TOML.
    ShowConfig,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Scenario {
    Stepwise,
    Detuning,
    Revivals,
    Table1,
    Marcus,
    Perpendicular,
}

impl Scenario {
    fn name(self) -> &'static str {
        match self {
            Scenario::Stepwise => "stepwise",
            Scenario::Detuning => "detuning",
            Scenario::Revivals => "revivals",
            Scenario::Table1 => "table1",
            Scenario::Marcus => "marcus",
            Scenario::Perpendicular => "perpendicular",
        }
    }
}

fn effective_config(cli: &Cli) -> CliResult<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Ok(dir) = std::env::var("VIBDIMER_OUT") {
        if !dir.is_empty() {
            cfg.output_dir = dir;
        }
    }
    if let Some(dir) = &cli.out {
        cfg.output_dir = dir.to_string_lossy().into_owned();
    }
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: &Cli) -> CliResult<()> {
    let cfg = effective_config(cli)?;
    let target = match &cli.command {
        Command::ShowConfig => {
            print!("{}", cfg.to_toml());
            return Ok(());
        }
        Command::Dynamics => "dynamics",
        Command::Eigen => "eigen",
        Command::Interferogram => "interferogram",
        Command::Match => "match",
        Command::Scan => "scan",
        Command::Scenario { name } => name.name(),
        Command::Run => cfg.scenario.as_deref().ok_or_else(|| CliError::Config("`run` needs `scenario` in the config".into()))?,
        Command::Validate => "validate",
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {} workers: {e}", cfg.workers)))?;
    pool.install(|| {
        if target == "validate" {
            let (ok, lines) = run::validate(&cfg)?;
            for l in lines {
                println!("{l}");
            }
            return if ok { Ok(()) } else { Err(CliError::Numerical("validation failed".into())) };
        }
        let outcome = run::run_target(target, &cfg)?;
        let dir = PathBuf::from(&cfg.output_dir);
        for path in outcome.files.commit(&dir, target, &cfg)? {
            println!("wrote {}", path.display());
        }
        for line in outcome.summary {
            println!("{line}");
        }
        Ok(())
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
