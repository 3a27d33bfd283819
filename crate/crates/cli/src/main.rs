//! `lfdeblur`: synthesize, blur, analyse and deblur light fields from the
//! command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or format error, 3 solver
//! divergence. Diagnostics go to stderr; machine output is JSON.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use log::info;

use lfdeblur::fourier::{self, TextureRecoveryOptions};
use lfdeblur::io::{json, lfz, png};
use lfdeblur::lightfield::{central_view, epipolar_slice, full_aperture, refocus, rmse, subaperture};
use lfdeblur::synth::{self, make_texture, TextureKind};
use lfdeblur::{blind_deblur, blur, Dims, ExposureConfig, LfError, SolverConfig};

#[derive(Parser)]
#[command(name = "lfdeblur", version, about = "Light field camera-motion blur toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a synthetic scene of fronto-parallel planes.
    Synth(SynthArgs),
    /// Blur a light field along a camera path.
    Blur(BlurArgs),
    /// Remove a known in-plane blur by 4D Wiener deconvolution.
    DeconvInplane(DeconvArgs),
    /// Recover the texture of a single plane blurred by out-of-plane motion.
    RecoverTexture(RecoverArgs),
    /// Jointly estimate the sharp light field and the camera path.
    DeblurBlind(BlindArgs),
    /// Print the RMSE between two light fields as JSON.
    Metrics(MetricsArgs),
    /// Export a 2D view of a light field as a 16-bit PNG.
    View(ViewArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SceneKind {
    Plane,
    TwoPlane,
    CheckerScene,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, value_enum)]
    kind: SceneKind,
    #[arg(long, num_args = 4, value_names = ["NY", "NX", "NV", "NU"])]
    dims: Vec<usize>,
    /// Plane depths front to back, as epipolar slopes.
    #[arg(long, num_args = 1.., allow_negative_numbers = true)]
    depths: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Texture for plane scenes: checker, noise, blocks, smooth-noise or image-file:PATH.
    #[arg(long, default_value = "smooth-noise")]
    texture: String,
    /// Decode image-file textures from sRGB to linear values.
    #[arg(long)]
    srgb: bool,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct BlurArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long)]
    path: PathBuf,
    #[arg(long, default_value_t = lfdeblur::forward::DEFAULT_TIME_SAMPLES)]
    time_samples: usize,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct DeconvArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long)]
    path: PathBuf,
    #[arg(long, default_value_t = 1e-3)]
    wiener_eps: f64,
    #[arg(long, default_value_t = lfdeblur::forward::DEFAULT_TIME_SAMPLES)]
    time_samples: usize,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct RecoverArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    zmin: f64,
    #[arg(long, allow_negative_numbers = true)]
    zmax: f64,
    #[arg(long)]
    slopes: usize,
    /// Side of the central analysis window used to weigh slopes.
    #[arg(long)]
    window: Option<usize>,
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long)]
    weights: PathBuf,
}

#[derive(Args)]
struct BlindArgs {
    #[arg(short, long)]
    input: PathBuf,
    /// Solver settings as JSON; omitted fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long)]
    path_out: PathBuf,
    #[arg(long)]
    report: PathBuf,
}

#[derive(Args)]
struct MetricsArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    /// Compare only the central sub-aperture views.
    #[arg(long)]
    central_view: bool,
}

#[derive(Args)]
#[command(group(ArgGroup::new("view").required(true).args(["sub", "epi", "refocus", "full_aperture"])))]
struct ViewArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long, num_args = 2, value_names = ["U", "V"])]
    sub: Option<Vec<usize>>,
    #[arg(long, num_args = 2, value_names = ["Y", "V"])]
    epi: Option<Vec<usize>>,
    #[arg(long, allow_negative_numbers = true)]
    refocus: Option<f64>,
    #[arg(long)]
    full_aperture: bool,
    #[arg(short, long)]
    output: PathBuf,
}

fn exit_code(e: &LfError) -> u8 {
    match e {
        LfError::InvalidArgument(_) | LfError::UnknownTextureKind(_) | LfError::InvalidDims(_) => 1,
        LfError::OutOfBounds { .. } => 1,
        LfError::Diverged { .. } => 3,
        _ => 2,
    }
}

fn synth_cmd(a: &SynthArgs) -> Result<(), LfError> {
    let d = Dims::new(a.dims[0], a.dims[1], a.dims[2], a.dims[3], 1)?;
    let need = match a.kind {
        SceneKind::Plane => 1,
        SceneKind::TwoPlane | SceneKind::CheckerScene => 2,
    };
    if a.depths.len() != need {
        return Err(LfError::InvalidArgument(format!(
            "this scene takes {need} depth(s), got {}",
            a.depths.len()
        )));
    }
    let kind = match a.texture.parse()? {
        TextureKind::ImageFile { path, .. } => TextureKind::ImageFile { path, srgb: a.srgb },
        other => other,
    };
    let lf = match a.kind {
        SceneKind::Plane => {
            let z = a.depths[0];
            synth::plane_lightfield(&make_texture(&kind, synth::texture_size(&d, z), a.seed)?, z, d)?
        }
        SceneKind::TwoPlane => synth::two_plane_lightfield(d, a.depths[0], a.depths[1], &kind, &kind, a.seed)?,
        SceneKind::CheckerScene => synth::two_plane_lightfield(
            d,
            a.depths[0],
            a.depths[1],
            &TextureKind::Checker { period: 3 },
            &TextureKind::Checker { period: 8 },
            a.seed,
        )?,
    };
    lfz::save(&lf, &a.output)
}

fn blur_cmd(a: &BlurArgs) -> Result<(), LfError> {
    let lf = lfz::load(&a.input)?;
    let path = json::load_path(&a.path)?;
    let cfg = ExposureConfig::new(a.time_samples)?;
    lfz::save(&blur(&lf, &path, &cfg)?, &a.output)
}

fn deconv_cmd(a: &DeconvArgs) -> Result<(), LfError> {
    let lf = lfz::load(&a.input)?;
    let path = json::load_path(&a.path)?;
    let cfg = ExposureConfig::new(a.time_samples)?;
    let d = lf.dims();
    let kernel = fourier::rasterize_kernel(&path, &cfg, d.nv, d.nu)?;
    lfz::save(&fourier::deconvolve_inplane(&lf, &kernel, a.wiener_eps)?, &a.output)
}

fn recover_cmd(a: &RecoverArgs) -> Result<(), LfError> {
    let lf = lfz::load(&a.input)?;
    let slopes = fourier::slope_grid(a.zmin, a.zmax, a.slopes)?;
    let opts = TextureRecoveryOptions {
        window: a.window,
        ..TextureRecoveryOptions::default()
    };
    let rec = fourier::recover_texture(&lf, &slopes, &opts)?;
    png::write_image(&rec.texture, &a.output)?;
    let sidecar = serde_json::json!({
        "slopes": rec.slopes,
        "weights": rec.weights,
        "zeta": rec.zeta,
        "best_slope": rec.best_slope,
        "degenerate": rec.degenerate,
    });
    json::save(&sidecar, &a.weights)
}

fn write_report(report: &lfdeblur::SolverReport, a: &BlindArgs) -> Result<(), LfError> {
    lfz::save(&report.final_lf, &a.output)?;
    json::save_path(&report.final_path, &a.path_out)?;
    json::save(report, &a.report)
}

fn blind_cmd(a: &BlindArgs) -> Result<(), LfError> {
    let observed = lfz::load(&a.input)?;
    let cfg: SolverConfig = match &a.config {
        Some(p) => json::load(p)?,
        None => SolverConfig::default(),
    };
    match blind_deblur(&observed, &cfg) {
        Ok(report) => {
            info!("final objective {:.6e}", report.final_objective);
            write_report(&report, a)
        }
        Err(LfError::Diverged {
            stage,
            iteration,
            report,
        }) => {
            // Keep the diagnostic trace, then still fail.
            json::save(&*report, &a.report)?;
            Err(LfError::Diverged {
                stage,
                iteration,
                report,
            })
        }
        Err(e) => Err(e),
    }
}

fn metrics_cmd(a: &MetricsArgs) -> Result<(), LfError> {
    let (x, y) = (lfz::load(&a.a)?, lfz::load(&a.b)?);
    let value = if a.central_view {
        rmse(&central_view(&x), &central_view(&y))?
    } else {
        rmse(&x, &y)?
    };
    println!("{}", serde_json::json!({ "rmse": value }));
    Ok(())
}

fn view_cmd(a: &ViewArgs) -> Result<(), LfError> {
    let lf = lfz::load(&a.input)?;
    let img = if let Some(s) = &a.sub {
        subaperture(&lf, s[0], s[1])?
    } else if let Some(e) = &a.epi {
        epipolar_slice(&lf, e[0], e[1])?
    } else if let Some(s) = a.refocus {
        refocus(&lf, s)?
    } else {
        full_aperture(&lf)
    };
    png::write_image(&img, &a.output)
}

fn run(cli: &Cli) -> Result<(), LfError> {
    match &cli.command {
        Command::Synth(a) => synth_cmd(a),
        Command::Blur(a) => blur_cmd(a),
        Command::DeconvInplane(a) => deconv_cmd(a),
        Command::RecoverTexture(a) => recover_cmd(a),
        Command::DeblurBlind(a) => blind_cmd(a),
        Command::Metrics(a) => metrics_cmd(a),
        Command::View(a) => view_cmd(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn error_classes_map_to_exit_codes() {
        assert_eq!(exit_code(&LfError::InvalidArgument("x".into())), 1);
        assert_eq!(exit_code(&LfError::Format("x".into())), 2);
        assert_eq!(exit_code(&LfError::Io(std::io::Error::other("x"))), 2);
    }
}
