use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use sinktrack::{
    read_frames_csv, track_accel_2d_with, track_accel_3d, track_speed, Method, NoiseModel,
    OutputAxis, SolverOptions, Stage3Assoc,
};
use sinktrack_cli::config::{CliError, ExperimentConfig, SimId};
use sinktrack_cli::figures::{emit_figure, FigureKind};
use sinktrack_cli::report::{emit_csv, format_sig6, read_csv};
use sinktrack_cli::runner::run_experiment;

/// Multi-object point tracking by entropic optimal transport.
#[derive(Parser)]
#[command(name = "sinktrack", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation grid and write one CSV row per tracking run.
    Run(RunArgs),
    /// Render an SVG boxplot or lineplot from a result CSV.
    Plot(PlotArgs),
    /// Track an imported frame CSV and write the association matrix.
    Track(TrackArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Simulation protocol: 1 constant velocity, 2 t+2 comparison,
    /// 3 random walk, 4 constant velocity with noise.
    #[arg(long)]
    sim: u8,

    /// Object count; repeat for a grid sweep.
    #[arg(long = "n")]
    n: Vec<usize>,

    /// Speed multiplier; repeat for a grid sweep.
    #[arg(long = "m")]
    m: Vec<f64>,

    /// Step or noise variance; repeat for a grid sweep.
    #[arg(long = "sigma2")]
    sigma2: Vec<f64>,

    /// Comma-separated subset of speed,accel3d,accel2d.
    #[arg(long, value_delimiter = ',')]
    methods: Vec<String>,

    /// Regularization strength.
    #[arg(long, conflicts_with = "lambda_sweep")]
    lambda: Option<f64>,

    /// Comma-separated lambda values; every run is repeated per value.
    #[arg(long = "lambda-sweep", value_delimiter = ',')]
    lambda_sweep: Option<Vec<f64>>,

    /// Datasets per grid point.
    #[arg(long, default_value_t = 10)]
    replicates: usize,

    /// Base seed; replicate r uses the documented child seed split.
    #[arg(long = "base-seed", default_value_t = 0)]
    base_seed: u64,

    /// Also write every generated dataset as a frame CSV into this directory.
    #[arg(long = "dump-frames")]
    dump_frames: Option<PathBuf>,

    /// Noise model for simulation 4: accumulated or positional.
    #[arg(long = "noise-model", default_value = "accumulated")]
    noise_model: String,

    /// Third-stage association for accel2d: sinkhorn or nearest.
    #[arg(long = "accel2d-assoc", default_value = "sinkhorn")]
    accel2d_assoc: String,

    /// Solver iteration cap per run.
    #[arg(long = "max-iterations", default_value_t = 1000)]
    max_iterations: usize,

    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PlotArgs {
    /// Input result CSV (as written by `sinktrack run`).
    #[arg(long = "in")]
    input: PathBuf,

    /// boxplot or lineplot.
    #[arg(long)]
    kind: String,

    /// Comma-separated result columns; boxplots draw one box per group,
    /// lineplots use the first column as the x axis.
    #[arg(long = "group-by", value_delimiter = ',')]
    group_by: Vec<String>,

    /// Output SVG path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrackArgs {
    /// Frame CSV (columns frame,object_id,x,y).
    #[arg(long)]
    frames: PathBuf,

    /// speed, accel3d or accel2d.
    #[arg(long)]
    method: String,

    /// Regularization strength.
    #[arg(long, default_value_t = 100.0)]
    lambda: f64,

    /// Output association CSV (columns source_id,target_id,mass).
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    if let Err(message) = init_thread_pool() {
        eprintln!("error: {message}");
        return ExitCode::from(2);
    }

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };

    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Plot(args) => cmd_plot(args),
        Command::Track(args) => cmd_track(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err @ CliError::Usage(_)) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

/// `SINKTRACK_THREADS` caps worker parallelism; 0 or unset picks the default.
fn init_thread_pool() -> Result<(), String> {
    let Some(raw) = std::env::var_os("SINKTRACK_THREADS") else {
        return Ok(());
    };
    let value = raw
        .to_str()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .ok_or_else(|| format!("SINKTRACK_THREADS must be a non-negative integer, got {raw:?}"))?;
    if value == 0 {
        return Ok(());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(value)
        .build_global()
        .map_err(|e| e.to_string())
}

fn cmd_run(args: RunArgs) -> sinktrack_cli::Result<()> {
    let sim = SimId::from_number(args.sim)
        .ok_or_else(|| CliError::Usage(format!("--sim must be 1..=4, got {}", args.sim)))?;
    let mut config = ExperimentConfig::new(sim);

    if !args.n.is_empty() {
        config.n_values = args.n;
    }
    if !args.m.is_empty() {
        config.m_values = args.m;
    }
    if !args.sigma2.is_empty() {
        config.sigma2_values = args.sigma2;
    }
    if !args.methods.is_empty() {
        config.methods = args
            .methods
            .iter()
            .map(|name| {
                Method::parse(name)
                    .ok_or_else(|| CliError::Usage(format!("unknown method `{name}`")))
            })
            .collect::<sinktrack_cli::Result<Vec<_>>>()?;
    }
    if let Some(sweep) = args.lambda_sweep {
        config.lambdas = sweep;
    } else if let Some(lambda) = args.lambda {
        config.lambdas = vec![lambda];
    }
    config.replicates = args.replicates;
    config.base_seed = args.base_seed;
    config.noise_model = NoiseModel::parse(&args.noise_model)
        .ok_or_else(|| CliError::Usage(format!("unknown noise model `{}`", args.noise_model)))?;
    config.accel2d_assoc = match args.accel2d_assoc.trim().to_ascii_lowercase().as_str() {
        "sinkhorn" => Stage3Assoc::Sinkhorn,
        "nearest" => Stage3Assoc::NearestNeighbor,
        other => {
            return Err(CliError::Usage(format!(
                "unknown accel2d association `{other}`"
            )))
        }
    };
    if args.max_iterations < 1 {
        return Err(CliError::Usage("--max-iterations must be >= 1".into()));
    }
    config.max_iterations = args.max_iterations;
    config.dump_frames = args.dump_frames;

    let start = Instant::now();
    let rows = run_experiment(&config)?;
    emit_csv(&rows, &args.out)?;
    eprintln!(
        "wrote {} rows to {} in {:.1?}",
        rows.len(),
        args.out.display(),
        start.elapsed()
    );
    Ok(())
}

fn cmd_plot(args: PlotArgs) -> sinktrack_cli::Result<()> {
    let kind = FigureKind::parse(&args.kind).ok_or_else(|| {
        CliError::Usage(format!(
            "--kind must be boxplot or lineplot, got `{}`",
            args.kind
        ))
    })?;
    if args.group_by.is_empty() {
        return Err(CliError::Usage("--group-by needs at least one column".into()));
    }
    let rows = read_csv(&args.input)?;
    emit_figure(&rows, kind, &args.group_by, &args.out)?;
    eprintln!("wrote {}", args.out.display());
    Ok(())
}

fn cmd_track(args: TrackArgs) -> sinktrack_cli::Result<()> {
    let method = Method::parse(&args.method)
        .ok_or_else(|| CliError::Usage(format!("unknown method `{}`", args.method)))?;
    if !(args.lambda > 0.0 && args.lambda.is_finite()) {
        return Err(CliError::Usage(format!(
            "--lambda must be positive, got {}",
            args.lambda
        )));
    }
    let frames = read_frames_csv(&args.frames)?;
    let needed = if method == Method::Speed { 2 } else { 3 };
    if frames.len() < needed {
        return Err(CliError::Usage(format!(
            "method {method} needs at least {needed} frames, file has {}",
            frames.len()
        )));
    }

    let opts = SolverOptions {
        lambda: args.lambda,
        max_iterations: 1000,
        ..SolverOptions::default()
    };
    let result = match method {
        Method::Speed => track_speed(frames.frame(0), frames.frame(1), &opts)?,
        Method::Accel3d => track_accel_3d(
            frames.frame(0),
            frames.frame(1),
            frames.frame(2),
            &opts,
            OutputAxis::IJ,
        )?,
        Method::Accel2d => track_accel_2d_with(
            frames.frame(0),
            frames.frame(1),
            frames.frame(2),
            &opts,
            Stage3Assoc::Sinkhorn,
        )?,
    };

    let mut out = String::from("source_id,target_id,mass\n");
    let d = result.association.d();
    for i in 0..d {
        for j in 0..d {
            out.push_str(&format!(
                "{i},{j},{}\n",
                format_sig6(result.association.get(i, j))
            ));
        }
    }
    std::fs::write(&args.out, out).map_err(|source| CliError::Io {
        path: args.out.display().to_string(),
        source,
    })?;
    eprintln!(
        "tracked {} objects with {method} (performance index {}): wrote {}",
        d,
        format_sig6(result.performance_index),
        args.out.display()
    );
    Ok(())
}
