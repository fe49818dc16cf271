use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use polarwave::model::WaveFamily;

use crate::output::Range;

#[derive(Debug, Parser)]
#[command(name = "polarwave", version, about = "Travelling polarisation waves in collective cell migration")]
pub struct Cli {
    /// File of `key=value` lines supplying defaults for the flags of the command.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a closed-form travelling wave: columns z, R, A, V.
    Profile(ProfileArgs),
    /// Apply T1 or the reflected T2 to a wave and sample the image.
    Transform(TransformArgs),
    /// Check whether a wave respects the impenetrability of cells.
    Validate(ValidateArgs),
    /// Integrate the spring-chain particle model.
    SimulateParticles(ParticleArgs),
    /// Integrate the continuum model on a grid.
    SimulatePde(PdeArgs),
    /// Threshold polarity separating polarisation from depolarisation.
    ThresholdAlpha(ThresholdArgs),
    /// Essential spectrum, absolute spectrum or ideal weights.
    Spectrum(SpectrumArgs),
    /// Evans function winding numbers and scans.
    Evans {
        #[command(subcommand)]
        command: EvansCommand,
    },
    /// Regenerate the data behind one figure.
    Reproduce(ReproduceArgs),
}

fn family(s: &str) -> Result<WaveFamily, String> {
    s.parse().map_err(|e: polarwave::model::ModelError| e.to_string())
}

#[derive(Debug, Clone, Args)]
pub struct WaveArgs {
    /// Wave family: S1, S2, S3 or S4.
    #[arg(long, default_value = "S1", value_parser = family)]
    pub family: WaveFamily,
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
    #[arg(long, default_value_t = 0.2)]
    pub alpha: f64,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    #[command(flatten)]
    pub wave: WaveArgs,
    /// Sampling range `start:end:step`.
    #[arg(long, default_value = "-20:20:0.01", allow_hyphen_values = true)]
    pub z: Range,
    /// Sample waves that violate the impenetrability of cells.
    #[arg(long)]
    pub allow_unphysical: bool,
    #[arg(long, default_value = "profile.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MapKind {
    T1,
    T2,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    #[command(flatten)]
    pub wave: WaveArgs,
    #[arg(long, value_enum, default_value = "t1")]
    pub map: MapKind,
    #[arg(long, default_value = "-20:20:0.01", allow_hyphen_values = true)]
    pub z: Range,
    #[arg(long, default_value = "transform.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub wave: WaveArgs,
    /// Also write the verdict as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ChainEnds {
    Free,
    Clamped,
}

#[derive(Debug, Args)]
pub struct ParticleArgs {
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
    #[arg(long, default_value_t = 0.2)]
    pub alpha: f64,
    /// Width of the smoothed motility switch.
    #[arg(long, default_value_t = 1e-3)]
    pub m_eps: f64,
    #[arg(long, default_value_t = 241)]
    pub cells: usize,
    /// Lattice spacing; the rest density is one at any spacing.
    #[arg(long, default_value_t = 0.25)]
    pub spacing: f64,
    /// Number of polarised cells at the right end; default one unit of length.
    #[arg(long)]
    pub polarised: Option<usize>,
    #[arg(long, default_value_t = 14.0)]
    pub t_end: f64,
    /// Time step; default from the stiffness of the chain.
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    pub snapshot_every: f64,
    #[arg(long, value_enum, default_value = "free")]
    pub boundary: ChainEnds,
    #[arg(long, default_value = "particles.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum IcKind {
    /// Closed-form wave with its front at zero.
    Exact,
    /// Step at zero between the far-field states of the wave.
    Step,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BcKind {
    Dirichlet,
    Neumann,
}

#[derive(Debug, Args)]
pub struct PdeArgs {
    #[command(flatten)]
    pub wave: WaveArgs,
    #[arg(long, default_value_t = 2000)]
    pub n: usize,
    #[arg(long, default_value_t = 10.0)]
    pub t_end: f64,
    #[arg(long, value_enum, default_value = "exact")]
    pub ic: IcKind,
    #[arg(long, value_enum, default_value = "dirichlet")]
    pub bc: BcKind,
    #[arg(long, default_value_t = polarwave::continuum::DEFAULT_CFL)]
    pub cfl: f64,
    /// Motility width; default from the grid.
    #[arg(long)]
    pub m_eps: Option<f64>,
    #[arg(long, default_value_t = -40.0, allow_negative_numbers = true)]
    pub x_min: f64,
    #[arg(long, default_value_t = 40.0, allow_negative_numbers = true)]
    pub x_max: f64,
    /// Snapshot interval; default `t_end / 40`.
    #[arg(long)]
    pub snapshot_every: Option<f64>,
    #[arg(long, default_value = "pde.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
    /// Grid ladder, at least three resolutions.
    #[arg(long, value_delimiter = ',', default_value = "500,1000,2000")]
    pub grids: Vec<usize>,
    #[arg(long, default_value_t = 0.5)]
    pub alpha_lo: f64,
    #[arg(long, default_value_t = 0.95)]
    pub alpha_hi: f64,
    #[arg(long, default_value_t = 0.005)]
    pub tol: f64,
    #[arg(long, default_value_t = 16.0)]
    pub t_end: f64,
    #[arg(long)]
    pub m_eps: Option<f64>,
    #[arg(long, default_value = "threshold.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SpectrumKind {
    Essential,
    Absolute,
    Weights,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(value_enum)]
    pub kind: SpectrumKind,
    /// Wave speed; default the S1 speed for `--kappa` and `--alpha`.
    #[arg(long, allow_negative_numbers = true)]
    pub s: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
    #[arg(long, default_value_t = 0.2)]
    pub alpha: f64,
    #[arg(long, default_value_t = -5.0, allow_negative_numbers = true)]
    pub mu_min: f64,
    #[arg(long, default_value_t = 5.0, allow_negative_numbers = true)]
    pub mu_max: f64,
    #[arg(long, default_value_t = 201)]
    pub samples: usize,
    /// Leftmost real part of the sampled absolute-spectrum branches.
    #[arg(long, default_value_t = -10.0, allow_negative_numbers = true)]
    pub l1_min: f64,
    /// Add the brute-force absolute spectrum as label `abs-numeric`.
    #[arg(long)]
    pub numeric: bool,
    #[arg(long, default_value = "spectrum.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ContourKind {
    C1,
    C2,
    /// Real segment `[from, to]`; scans only.
    Real,
}

#[derive(Debug, Clone, Args)]
pub struct EvansArgs {
    #[command(flatten)]
    pub wave: WaveArgs,
    #[arg(long, value_enum, default_value = "c1")]
    pub contour: ContourKind,
    #[arg(long, default_value_t = -0.05, allow_negative_numbers = true)]
    pub dl: f64,
    #[arg(long, default_value_t = 0.1)]
    pub r: f64,
    #[arg(long, default_value_t = 0.1)]
    pub ri: f64,
    #[arg(long, default_value_t = 5.0)]
    pub ro: f64,
    #[arg(long, default_value_t = 0.05, allow_negative_numbers = true)]
    pub from: f64,
    #[arg(long, default_value_t = 5.0, allow_negative_numbers = true)]
    pub to: f64,
    /// Start of the shooting; default -20 for S1 and 20 for S2.
    #[arg(long, allow_negative_numbers = true)]
    pub z_start: Option<f64>,
    #[arg(long, default_value_t = 1e-10)]
    pub rtol: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub atol: f64,
    #[arg(long, default_value_t = 1e6)]
    pub renorm: f64,
    /// Initial contour samples for winding numbers, total samples for scans.
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum EvansCommand {
    /// Print the winding number of D along a contour.
    Winding {
        #[command(flatten)]
        args: EvansArgs,
        /// Also write the winding report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample D along a contour or real segment.
    Scan {
        #[command(flatten)]
        args: EvansArgs,
        #[arg(long, default_value = "evans_scan.csv")]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "verbatim")]
pub enum Figure {
    #[value(name = "fig4")]
    Fig4,
    #[value(name = "fig5")]
    Fig5,
    #[value(name = "fig6")]
    Fig6,
    #[value(name = "fig7")]
    Fig7,
    #[value(name = "fig8")]
    Fig8,
    #[value(name = "fig10")]
    Fig10,
    #[value(name = "fig11")]
    Fig11,
    #[value(name = "fig12")]
    Fig12,
    #[value(name = "fig13")]
    Fig13,
    #[value(name = "figB1")]
    FigB1,
    #[value(name = "figB2")]
    FigB2,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    #[arg(value_enum)]
    pub figure: Figure,
    /// Output directory; default `figures/<figure>`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Grid ladder for the threshold figure.
    #[arg(long, value_delimiter = ',', default_value = "500,1000,2000")]
    pub grids: Vec<usize>,
    /// Grid size for the simulation figures.
    #[arg(long, default_value_t = 1600)]
    pub n: usize,
}
