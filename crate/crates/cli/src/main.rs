//! `cavity-qed`: mode structures, polariton spectra and coupling trends from a TOML config.

use std::path::PathBuf;
use std::process::ExitCode;

use cavity_qed::commands;
use cavity_qed::{Error, ErrorClass, RunConfig};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "cavity-qed",
    version,
    about = "Molecular polaritons in dispersive nanocavities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Purcell factor, coupling strength and resonances of a spherical cavity.
    Modes(Common),
    /// Polariton excitations and binned absorption spectrum.
    Spectrum(Common),
    /// Planar-cavity Purcell factors over a mirror-spacing sweep.
    PurcellPlanar(Common),
    /// Radius that places a resonance on the target energy.
    TuneRadius(Common),
    /// Effective coupling for each member of a molecular family.
    Geff(Common),
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long, short)]
    config: PathBuf,
    /// Output directory, overriding `output.directory`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Sampling density in points per meV, overriding `grid.points_per_mev`.
    #[arg(long)]
    density: Option<f64>,
    /// Omit the timestamp line so identical runs give identical files.
    #[arg(long)]
    no_timestamp: bool,
}

fn load(common: &Common) -> Result<RunConfig, Error> {
    let mut config = RunConfig::load(&common.config)?;
    if let Some(dir) = &common.out {
        config.output.directory = dir.clone();
    }
    if let Some(d) = common.density {
        match config.grid.as_mut() {
            Some(g) => g.points_per_mev = d,
            None => {
                return Err(Error::Config(
                    "--density given but the config has no [grid] section".into(),
                ))
            }
        }
    }
    config.validate()?;
    Ok(config)
}

fn run(cli: Cli) -> Result<i32, Error> {
    let (common, name) = match &cli.command {
        Command::Modes(c) => (c, "modes"),
        Command::Spectrum(c) => (c, "spectrum"),
        Command::PurcellPlanar(c) => (c, "purcell-planar"),
        Command::TuneRadius(c) => (c, "tune-radius"),
        Command::Geff(c) => (c, "geff"),
    };
    let config = load(common)?;
    let stamp = !common.no_timestamp;
    let (summary, files, code) = match cli.command {
        Command::Modes(_) => {
            let o = commands::cmd_modes(&config, stamp)?;
            (o.summary, o.files, 0)
        }
        Command::Spectrum(_) => {
            let o = commands::cmd_spectrum(&config, stamp)?;
            (o.summary, o.files, 0)
        }
        Command::PurcellPlanar(_) => {
            let o = commands::cmd_purcell_planar(&config, stamp)?;
            (o.summary, o.files, 0)
        }
        Command::TuneRadius(_) => {
            let o = commands::cmd_tune_radius(&config, stamp)?;
            (o.summary, o.files, 0)
        }
        Command::Geff(_) => {
            let o = commands::cmd_geff(&config, stamp)?;
            let code = if o.failures.is_empty() { 0 } else { 3 };
            (o.summary, o.files, code)
        }
    };
    print!("{summary}");
    for f in files {
        println!("wrote {}", f.display());
    }
    if code != 0 {
        eprintln!("{name}: some family members failed, see the summary above");
    }
    Ok(code)
}

fn exit_code(class: ErrorClass) -> u8 {
    match class {
        ErrorClass::Config => 2,
        ErrorClass::Numerical => 3,
        ErrorClass::Capacity => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            if e.class() == ErrorClass::Capacity {
                eprintln!("hint: narrow grid.window_ev or lower --density");
            }
            ExitCode::from(exit_code(e.class()))
        }
    }
}
