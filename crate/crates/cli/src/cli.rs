//! Command-line grammar. Every length is in meters unless the flag name says
//! otherwise.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "gelforce",
    about = "Dense 3-axis contact force reconstruction for marker-based gel tactile sensors",
    disable_version_flag = true
)]
pub struct Cli {
    /// Print the tool and file-format schema versions.
    #[arg(short = 'V', long, global = true)]
    pub version: bool,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a single-layer Hex-8 mesh and write it in the mesh text format.
    MeshGen(MeshGenArgs),
    /// Assemble the stiffness matrix for a config and write the binary dump.
    Precompute(PrecomputeArgs),
    /// Simulate a sphere contact and write marker frames, mask and ground truth.
    Simulate(SimulateArgs),
    /// Detect and match markers between two frames.
    Track(TrackArgs),
    /// Reconstruct the force field between a reference and a current frame.
    Reconstruct(ReconstructArgs),
    /// Reconstruct every frame of a sequence against its first frame.
    Stream(StreamArgs),
    /// Draw a result file as an SVG quiver plot or heatmap.
    Plot(PlotArgs),
    /// Run a synthetic validation suite against simulator ground truth.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MeshPreset {
    /// 48 mm x 44 mm chamfered pad, 1 mm x 1 mm x 2 mm elements.
    ReferencePad,
}

#[derive(Debug, Args)]
pub struct MeshGenArgs {
    /// Output mesh file.
    #[arg(long)]
    pub out: PathBuf,
    /// Built-in mesh; overrides the grid flags.
    #[arg(long, value_enum)]
    pub preset: Option<MeshPreset>,
    /// Grid bounds `xmin,ymin,xmax,ymax` (m).
    #[arg(long, value_parser = parse_f64_list::<4>, required_unless_present = "preset")]
    pub bounds_m: Option<[f64; 4]>,
    /// In-plane element size `dx,dy` (m).
    #[arg(long, value_parser = parse_f64_list::<2>, required_unless_present = "preset")]
    pub element_m: Option<[f64; 2]>,
    /// Gel thickness (m).
    #[arg(long, required_unless_present = "preset")]
    pub thickness_m: Option<f64>,
    /// Crop polygon `x,y;x,y;...` (m); elements whose top-face centroid lies
    /// outside are dropped.
    #[arg(long, value_parser = parse_polygon)]
    pub crop_m: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Args)]
pub struct PrecomputeArgs {
    /// Pipeline config (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Output dump; defaults to the config's `stiffness_path`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Pipeline config (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Indenter center `x,y` (m).
    #[arg(long, value_parser = parse_f64_list::<2>)]
    pub center_m: [f64; 2],
    /// Indentation depth (m).
    #[arg(long)]
    pub depth_m: f64,
    /// Tangential shift `dx,dy` (m).
    #[arg(long, value_parser = parse_f64_list::<2>, default_value = "0,0")]
    pub shift_m: [f64; 2],
    /// Marker centroid noise, e.g. `0.1px`.
    #[arg(long, value_parser = parse_pixels, default_value = "0px")]
    pub noise: f64,
    /// Seed for the noise.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Also render the marker frames as PGM images.
    #[arg(long)]
    pub images: bool,
    /// Output directory (created if missing).
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrackArgs {
    /// Pipeline config (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Reference frame (.pgm image or .csv markers).
    #[arg(long = "ref")]
    pub reference: PathBuf,
    /// Current frame (.pgm image or .csv markers).
    #[arg(long = "cur")]
    pub current: PathBuf,
    /// Output correspondence table (.csv).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    /// Pipeline config (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Reference frame (.pgm image or .csv markers).
    #[arg(long = "ref")]
    pub reference: PathBuf,
    /// Current frame (.pgm image or .csv markers).
    #[arg(long = "cur")]
    pub current: PathBuf,
    /// Contact mask (.pgm or grid text); defaults to the current frame's
    /// companion `<stem>.mask.pgm` / `<stem>.mask.txt`.
    #[arg(long)]
    pub mask: Option<PathBuf>,
    /// Output result table (.csv).
    #[arg(long)]
    pub out: PathBuf,
    /// Timestamp recorded in the result (s).
    #[arg(long, default_value_t = 0.0)]
    pub timestamp: f64,
}

#[derive(Debug, Args)]
pub struct StreamArgs {
    /// Pipeline config (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Directory of frames, processed in file-name order.
    #[arg(long, conflicts_with = "frames", required_unless_present = "frames")]
    pub dir: Option<PathBuf>,
    /// Explicit frame list, processed in the given order.
    #[arg(long, num_args = 1..)]
    pub frames: Vec<PathBuf>,
    /// Output directory for one result table per frame.
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Frame rate used to stamp frames (Hz).
    #[arg(long, default_value_t = 60.0)]
    pub fps: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum StyleArg {
    Displacement,
    TangentialForce,
    NormalForceHeatmap,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Mesh the result was computed on.
    #[arg(long, conflicts_with = "config", required_unless_present = "config")]
    pub mesh: Option<PathBuf>,
    /// Pipeline config naming the mesh.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Result table written by reconstruct or stream.
    #[arg(long)]
    pub result: PathBuf,
    #[arg(long, value_enum)]
    pub style: StyleArg,
    /// Skip the contact-circle overlay.
    #[arg(long)]
    pub no_overlay: bool,
    /// Output SVG file.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Suite {
    /// Random sphere pushes with tangential shift.
    Sphere,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    /// Marker centroid noise, e.g. `0.1px`.
    #[arg(long, value_parser = parse_pixels, default_value = "0.1px")]
    pub noise: f64,
    /// Number of simulated contacts.
    #[arg(long, default_value_t = 50)]
    pub count: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Pipeline config; the built-in reference pad is used when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Exit with status 1 if any per-axis error exceeds this fraction of the
    /// load magnitude.
    #[arg(long)]
    pub max_error: Option<f64>,
}

fn parse_f64_list<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("`{t}` is not a number"))
        })
        .collect::<Result<_, _>>()?;
    if v.iter().any(|x| !x.is_finite()) {
        return Err("values must be finite".into());
    }
    let n = v.len();
    v.try_into()
        .map_err(|_| format!("expected {N} comma-separated numbers, got {n}"))
}

fn parse_polygon(s: &str) -> Result<Vec<[f64; 2]>, String> {
    s.split(';').map(parse_f64_list::<2>).collect()
}

/// Accepts `0.1px` or a bare number of pixels.
fn parse_pixels(s: &str) -> Result<f64, String> {
    let num = s.strip_suffix("px").unwrap_or(s);
    match num.trim().parse::<f64>() {
        Ok(v) if v.is_finite() && v >= 0.0 => Ok(v),
        _ => Err(format!(
            "`{s}` is not a non-negative pixel amount like `0.1px`"
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn grammar_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn reconstruct_invocation_parses() {
        let cli = Cli::try_parse_from([
            "gelforce",
            "reconstruct",
            "--config",
            "c.json",
            "--ref",
            "a.pgm",
            "--cur",
            "b.pgm",
            "--out",
            "f.csv",
        ])
        .unwrap();
        assert!(matches!(cli.command, Some(Command::Reconstruct(_))));
    }

    #[test]
    fn pixel_amounts() {
        assert_eq!(parse_pixels("0.1px").unwrap(), 0.1);
        assert_eq!(parse_pixels("2").unwrap(), 2.0);
        assert!(parse_pixels("-1px").is_err());
        assert!(parse_pixels("0.1mm").is_err());
    }
}
