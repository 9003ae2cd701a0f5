//! Command-line driver for image segmentation by curve evolution.
//!
//! Reads one or more JSON run configurations, evolves a contour over the
//! configured image and writes the requested outputs. Exit codes: 0 on
//! success, 2 for configuration or image-format problems, 3 for numerical
//! failures during the evolution, 4 for filesystem errors.

mod config;
mod exports;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::Parser;
use thiserror::Error;

use segment_core::evolution::{run_with_observer, EvolutionError, RunOutcome};
use segment_core::force::pgm::{load_pgm, write_pgm, PgmError, PgmFormat};
use segment_core::force::synth::{apply_salt_noise, synthesize_bitmap, SynthError};
use segment_core::force::{ForceError, ForceField, IntensityGrid, OMEGA};
use segment_core::geometry::{GeometryError, PolygonalCurve, Vec2};
use segment_core::redistribution::RedistributionParams;

use config::{ConfigError, ImageSource, OutputPaths, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "segment", about = "Segment an image by evolving a closed contour")]
struct Args {
    /// Run configuration file; pass repeatedly to process a batch.
    #[arg(long, required = true)]
    config: Vec<PathBuf>,

    /// Report progress on stderr while the contour evolves.
    #[arg(long)]
    verbose: bool,

    /// Seed for synthetic image noise.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Error)]
enum RunError {
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("invalid image: {0}")]
    Pgm(#[from] PgmError),
    #[error("invalid synthetic image: {0}")]
    Synth(#[from] SynthError),
    #[error("invalid force setup: {0}")]
    Force(#[from] ForceError),
    #[error("invalid initial curve: {0}")]
    Geometry(#[from] GeometryError),
    #[error("evolution failed: {0}")]
    Evolution(#[from] EvolutionError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl RunError {
    fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_)
            | RunError::Pgm(_)
            | RunError::Synth(_)
            | RunError::Force(_)
            | RunError::Geometry(_) => 2,
            RunError::Evolution(_) => 3,
            RunError::Io { .. } => 4,
        }
    }
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn main() {
    let args = Args::parse();
    std::process::exit(run_all(&args));
}

fn run_all(args: &Args) -> i32 {
    let results = execute_batch(args);
    let mut code = 0;
    for (path, result) in results {
        match result {
            Ok(summary) => println!("{summary}"),
            Err(error) => {
                eprintln!("{}: {error}", path.display());
                code = code.max(error.exit_code());
            }
        }
    }
    code
}

type BatchResults = Vec<(PathBuf, Result<String, RunError>)>;

#[cfg(feature = "parallel")]
fn execute_batch(args: &Args) -> BatchResults {
    use rayon::prelude::*;
    if args.config.len() > 1 {
        return args
            .config
            .par_iter()
            .map(|path| (path.clone(), run_one(path, args)))
            .collect();
    }
    execute_batch_serial(args)
}

#[cfg(not(feature = "parallel"))]
fn execute_batch(args: &Args) -> BatchResults {
    execute_batch_serial(args)
}

fn execute_batch_serial(args: &Args) -> BatchResults {
    args.config
        .iter()
        .map(|path| (path.clone(), run_one(path, args)))
        .collect()
}

fn load_image(source: &ImageSource, config_path: &Path, seed: u64) -> Result<IntensityGrid, RunError> {
    match source {
        ImageSource::Pgm(path) => {
            let resolved = if path.is_relative() {
                config_path.parent().unwrap_or(Path::new(".")).join(path)
            } else {
                path.clone()
            };
            let bytes = fs::read(&resolved).map_err(io_error(&resolved))?;
            Ok(load_pgm(&bytes)?)
        }
        ImageSource::Synthetic(synthetic) => {
            let shape = synthetic.shape.to_shape();
            let mut grid = synthesize_bitmap(&shape, synthetic.width, synthetic.height, &OMEGA)?;
            if let Some(noise) = &synthetic.noise {
                apply_salt_noise(&mut grid, &noise.to_noise(), seed)?;
            }
            Ok(grid)
        }
    }
}

/// Path for an intermediate export: `contour.csv` at t = 0.5 becomes
/// `contour_t0.500000.csv`.
fn snapshot_path(path: &Path, time: f64) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut name = format!("{stem}_t{time:.6}");
    if let Some(ext) = path.extension() {
        name.push('.');
        name.push_str(&ext.to_string_lossy());
    }
    path.with_file_name(name)
}

fn write_contours(
    curve: &PolygonalCurve,
    outputs: &OutputPaths,
    time: Option<f64>,
) -> Result<(), RunError> {
    if let Some(csv_path) = &outputs.csv {
        let target = match time {
            Some(t) => snapshot_path(csv_path, t),
            None => csv_path.clone(),
        };
        fs::write(&target, exports::contour_csv(curve)).map_err(io_error(&target))?;
    }
    if let Some(svg_path) = &outputs.svg {
        let target = match time {
            Some(t) => snapshot_path(svg_path, t),
            None => svg_path.clone(),
        };
        fs::write(&target, exports::contour_svg(curve, &OMEGA)).map_err(io_error(&target))?;
    }
    Ok(())
}

fn run_one(config_path: &Path, args: &Args) -> Result<String, RunError> {
    let text = fs::read_to_string(config_path).map_err(io_error(config_path))?;
    let config = RunConfig::from_json(&text)?;

    let grid = load_image(&config.image, config_path, args.seed)?;
    let field = ForceField::new(grid, config.f_min, config.f_max)?;
    let initial = PolygonalCurve::circle(
        Vec2::new(config.initial.center[0], config.initial.center[1]),
        config.initial.radius,
        config.n_vertices,
    )?;
    let params = RedistributionParams::new(config.epsilon, config.omega)
        .map_err(|e| ConfigError::Range {
            field: "epsilon/omega".to_string(),
            message: e.to_string(),
        })?;
    let stop = config.stop.to_criterion();

    let mut snapshot_times = config.snapshot_times.clone();
    snapshot_times.sort_by(|a, b| a.partial_cmp(b).expect("validated finite"));
    let mut next_snapshot = 0usize;

    let mut log_writer = match &config.outputs.log {
        Some(path) => {
            let file = fs::File::create(path).map_err(io_error(path))?;
            Some((path.clone(), std::io::BufWriter::new(file)))
        }
        None => None,
    };

    let mut deferred: Option<RunError> = None;
    let verbose = args.verbose;
    let label = config_path.display().to_string();

    let observer = |state: &segment_core::evolution::EvolutionState,
                    diagnostics: &segment_core::evolution::StepDiagnostics| {
        if deferred.is_some() {
            return;
        }
        if let Some((path, writer)) = &mut log_writer {
            if let Err(source) = writer.write_all(exports::log_line(diagnostics).as_bytes()) {
                deferred = Some(RunError::Io {
                    path: path.clone(),
                    source,
                });
                return;
            }
        }
        while next_snapshot < snapshot_times.len() && state.time >= snapshot_times[next_snapshot] {
            let t = snapshot_times[next_snapshot];
            if let Err(error) = write_contours(&state.curve, &config.outputs, Some(t)) {
                deferred = Some(error);
                return;
            }
            next_snapshot += 1;
        }
        if verbose && diagnostics.step_index % 200 == 0 {
            eprintln!(
                "[{label}] step {} t={:.6} tau={:.3e} length={:.4} max_speed={:.3}",
                diagnostics.step_index,
                diagnostics.time,
                diagnostics.tau,
                diagnostics.length,
                diagnostics.max_speed,
            );
        }
    };

    let outcome = run_with_observer(initial, &field, Some(&params), config.lambda, &stop, observer)?;

    if let Some((path, mut writer)) = log_writer {
        writer.flush().map_err(io_error(&path))?;
    }
    if let Some(error) = deferred {
        return Err(error);
    }

    write_contours(&outcome.state.curve, &config.outputs, None)?;
    if let Some(overlay_path) = &config.outputs.overlay_pgm {
        let overlay = exports::render_overlay(&outcome.state.curve, field.grid(), &OMEGA);
        let bytes = write_pgm(&overlay, PgmFormat::Binary);
        fs::write(overlay_path, bytes).map_err(io_error(overlay_path))?;
    }

    Ok(summarize(&label, &outcome))
}

fn summarize(label: &str, outcome: &RunOutcome) -> String {
    let reason = match outcome.reason {
        segment_core::evolution::StopReason::FixedTimeReached => "reached final time",
        segment_core::evolution::StopReason::Stationary => "became stationary",
        segment_core::evolution::StopReason::StepBudgetExhausted => "hit the step budget",
    };
    let length = segment_core::geometry::compute_edge_geometry(&outcome.state.curve)
        .map(|g| g.total_length())
        .unwrap_or(f64::NAN);
    format!(
        "{label}: {reason} at t={:.6} after {} steps, contour length {:.4}",
        outcome.state.time, outcome.state.step_index, length
    )
}
