mod args;
mod error;
mod output;
mod reproduce;
mod sims;
mod spectral;
mod waves;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command, EvansCommand};
use error::CliError;
use output::Run;

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("POLARWAVE_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("POLARWAVE_THREADS must be a positive integer, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot configure {n} threads: {e}")))
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Profile(_) => "profile",
        Command::Transform(_) => "transform",
        Command::Validate(_) => "validate",
        Command::SimulateParticles(_) => "simulate-particles",
        Command::SimulatePde(_) => "simulate-pde",
        Command::ThresholdAlpha(_) => "threshold-alpha",
        Command::Spectrum(_) => "spectrum",
        Command::Evans { command: EvansCommand::Winding { .. } } => "evans winding",
        Command::Evans { command: EvansCommand::Scan { .. } } => "evans scan",
        Command::Reproduce(_) => "reproduce",
    }
}

fn run(argv: Vec<String>) -> Result<(), CliError> {
    let (argv, config) = output::expand_config(argv)?;
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // help and version requests
            print!("{e}");
            return Ok(());
        }
        Err(e) => return Err(CliError::Usage(e.render().to_string())),
    };
    configure_threads()?;
    let run = Run::new(command_name(&cli.command), &argv[1..], config);
    match &cli.command {
        Command::Profile(a) => waves::profile(a, run),
        Command::Transform(a) => waves::transform(a, run),
        Command::Validate(a) => waves::validate(a, run),
        Command::SimulateParticles(a) => sims::simulate_particles_cmd(a, run),
        Command::SimulatePde(a) => sims::simulate_pde_cmd(a, run),
        Command::ThresholdAlpha(a) => sims::threshold_cmd(a, run),
        Command::Spectrum(a) => spectral::spectrum_cmd(a, run),
        Command::Evans { command: EvansCommand::Winding { args, out } } => spectral::winding_cmd(args, out.as_deref(), run),
        Command::Evans { command: EvansCommand::Scan { args, out } } => spectral::scan_cmd(args, out, run),
        Command::Reproduce(a) => reproduce::reproduce(a, run),
    }
}

fn main() -> ExitCode {
    match run(std::env::args().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Usage(m) => eprint!("{}{}", m, if m.ends_with('\n') { "" } else { "\n" }),
                other => eprintln!("error: {other}"),
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
