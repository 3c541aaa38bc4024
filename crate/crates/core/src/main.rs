use clap::{Args, Parser, Subcommand};
use geoimg::codec::{FillPolicy, RoundtripOptions, DEFAULT_RESOLUTION};
use geoimg::latent::{ProjectOptions, SvmOptions, DEFAULT_ITERATIONS};
use geoimg::mesh::{DEFAULT_SAMPLE_COUNT, DEFAULT_TARGET_RADIUS};
use geoimg::metrics::{EmdOptions, GroundDistance};
use geoimg::pipeline::{self, Config, GeneratorSource, OutputTargets, PipelineError, DECODE_BUDGET};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "geoimg", version, about = "Rad geometry images: encode, decode, compare and edit 3D shapes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode every mesh in a directory and write a manifest.
    Encode {
        /// Directory of .obj/.ply meshes (overrides the config).
        input: Option<PathBuf>,
        /// JSON config file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        resolution: Option<usize>,
        #[arg(long)]
        target_radius: Option<f64>,
        #[arg(long)]
        fill: Option<FillPolicy>,
        #[arg(long)]
        seed: Option<u64>,
        /// JSON labels file (id -> attribute -> value).
        #[arg(long)]
        labels: Option<PathBuf>,
    },
    /// Decode a GEOIMG01 file to OBJ or PLY.
    Decode {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Reflect and weld the half-shape into a full shape.
        #[arg(long)]
        mirror: bool,
    },
    /// Compare two meshes; prints a JSON report.
    Metrics {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SAMPLE_COUNT)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_TARGET_RADIUS)]
        target_radius: f64,
        /// EMD ground distance: l1 or l2.
        #[arg(long, default_value = "l1", value_parser = parse_ground)]
        ground: GroundDistance,
    },
    /// Encode, decode and compare one mesh; prints a JSON report.
    Roundtrip {
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
        resolution: usize,
        #[arg(long, default_value_t = DEFAULT_TARGET_RADIUS)]
        target_radius: f64,
        #[arg(long, default_value = "nearest")]
        fill: FillPolicy,
        #[arg(long, default_value_t = DEFAULT_SAMPLE_COUNT)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Latent-space tools.
    #[command(subcommand)]
    Latent(LatentCommand),
}

#[derive(Args)]
struct GeneratorArgs {
    /// Linear generator manifest written by `latent fit`.
    #[arg(long, conflicts_with = "external")]
    generator: Option<PathBuf>,
    /// Command line of an external generator process.
    #[arg(long, requires = "latent_dim")]
    external: Option<String>,
    /// Latent size of the external generator.
    #[arg(long)]
    latent_dim: Option<usize>,
}

impl GeneratorArgs {
    fn source(&self) -> Result<GeneratorSource, PipelineError> {
        match (&self.generator, &self.external, self.latent_dim) {
            (Some(p), None, _) => Ok(GeneratorSource::Linear(p.clone())),
            (None, Some(c), Some(d)) => Ok(GeneratorSource::External {
                command: c.clone(),
                latent_dim: d,
            }),
            _ => Err(PipelineError::Config("pass --generator or --external with --latent-dim".into())),
        }
    }
}

#[derive(Args)]
struct EmitArgs {
    /// Output GEOIMG01 file.
    #[arg(long)]
    out: PathBuf,
    /// Also decode to this OBJ/PLY file.
    #[arg(long)]
    mesh: Option<PathBuf>,
    #[arg(long)]
    mirror: bool,
}

impl EmitArgs {
    fn targets(&self) -> OutputTargets {
        OutputTargets {
            geoimg: self.out.clone(),
            mesh: self.mesh.clone(),
            mirror: self.mirror,
        }
    }
}

#[derive(Subcommand)]
enum LatentCommand {
    /// Fit a linear generator to the images of a manifest.
    Fit {
        #[arg(long)]
        manifest: PathBuf,
        /// Latent dimension.
        #[arg(long)]
        dim: usize,
        /// Generator manifest path (default: generator.json next to the manifest).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Optimize a latent to reproduce a target image.
    Project {
        target: PathBuf,
        #[command(flatten)]
        generator: GeneratorArgs,
        #[arg(long, default_value_t = DEFAULT_ITERATIONS)]
        iterations: usize,
        #[arg(long, default_value_t = 0.5)]
        step: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Latent JSON output.
        #[arg(long)]
        out: PathBuf,
        /// Loss curve output (default: the latent path with a .loss.csv extension).
        #[arg(long)]
        loss_curve: Option<PathBuf>,
    },
    /// Fit an SVM edit direction for one label of the manifest.
    EditDirection {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        label: String,
        /// Label value counted as positive; otherwise values must be boolean.
        #[arg(long)]
        positive: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Move a latent along an edit direction and generate.
    Edit {
        #[command(flatten)]
        generator: GeneratorArgs,
        #[arg(long)]
        latent: PathBuf,
        #[arg(long)]
        direction: PathBuf,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        #[command(flatten)]
        emit: EmitArgs,
    },
    /// Blend two latents and generate.
    Interp {
        #[command(flatten)]
        generator: GeneratorArgs,
        w1: PathBuf,
        w2: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        s: f64,
        #[command(flatten)]
        emit: EmitArgs,
    },
}

fn parse_ground(s: &str) -> Result<GroundDistance, String> {
    match s {
        "l1" => Ok(GroundDistance::L1),
        "l2" => Ok(GroundDistance::L2),
        other => Err(format!("unknown ground distance `{other}` (l1|l2)")),
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<(), PipelineError> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn encode_config(
    input: Option<PathBuf>,
    config: Option<PathBuf>,
    out: Option<PathBuf>,
    resolution: Option<usize>,
    target_radius: Option<f64>,
    fill: Option<FillPolicy>,
    seed: Option<u64>,
    labels: Option<PathBuf>,
) -> Result<Config, PipelineError> {
    let mut cfg = match &config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if config.is_none() && input.is_none() {
        return Err(PipelineError::Config("pass an input directory or --config".into()));
    }
    if let Some(v) = input {
        cfg.input_dir = v;
    }
    if let Some(v) = out {
        cfg.output_dir = v;
    }
    if let Some(v) = resolution {
        cfg.resolution = v;
    }
    if let Some(v) = target_radius {
        cfg.target_radius = v;
    }
    if let Some(v) = fill {
        cfg.fill = v;
    }
    if let Some(v) = seed {
        cfg.seed = v;
    }
    if labels.is_some() {
        cfg.labels = labels;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<bool, PipelineError> {
    match cli.command {
        Command::Encode {
            input,
            config,
            out,
            resolution,
            target_radius,
            fill,
            seed,
            labels,
        } => {
            let cfg = encode_config(input, config, out, resolution, target_radius, fill, seed, labels)?;
            let s = pipeline::cmd_encode(&cfg)?;
            for e in s.manifest.entries.iter().filter(|e| e.error.is_some()) {
                eprintln!("failed: {} ({})", e.id, e.error.as_deref().unwrap_or_default());
            }
            println!(
                "encoded {} of {} shapes; manifest {}",
                s.encoded(),
                s.manifest.entries.len(),
                s.manifest_path.display()
            );
            Ok(s.failed() == 0)
        }
        Command::Decode { input, out, mirror } => {
            let d = pipeline::cmd_decode(&input, mirror, &out)?;
            println!(
                "decoded {} vertices, {} faces in {:.2} ms (budget {} ms, {}); grid setup {:.2} ms; total {:.2} ms",
                d.vertices,
                d.faces,
                d.decode_time.as_secs_f64() * 1e3,
                DECODE_BUDGET.as_millis(),
                if d.within_budget() { "within" } else { "over" },
                d.grid_time.as_secs_f64() * 1e3,
                d.total_time.as_secs_f64() * 1e3
            );
            Ok(true)
        }
        Command::Metrics {
            a,
            b,
            samples,
            seed,
            target_radius,
            ground,
        } => {
            let opts = EmdOptions {
                ground,
                ..Default::default()
            };
            let r = pipeline::cmd_metrics(&a, &b, samples, seed, target_radius, opts)?;
            print_json(&r)?;
            eprintln!("chamfer_scaled = chamfer x 1e3, emd_scaled = emd x 1e2");
            Ok(true)
        }
        Command::Roundtrip {
            input,
            resolution,
            target_radius,
            fill,
            samples,
            seed,
        } => {
            let opts = RoundtripOptions {
                target_radius,
                fill,
                samples,
                seed,
                ..Default::default()
            };
            print_json(&pipeline::cmd_roundtrip(&input, resolution, &opts)?)?;
            Ok(true)
        }
        Command::Latent(cmd) => run_latent(cmd),
    }
}

fn run_latent(cmd: LatentCommand) -> Result<bool, PipelineError> {
    match cmd {
        LatentCommand::Fit { manifest, dim, out } => {
            let s = pipeline::cmd_latent_fit(&manifest, dim, out.as_deref())?;
            println!(
                "fitted d={} generator on {} images: {}",
                s.latent_dim,
                s.images,
                s.generator_path.display()
            );
        }
        LatentCommand::Project {
            target,
            generator,
            iterations,
            step,
            seed,
            out,
            loss_curve,
        } => {
            let opts = ProjectOptions {
                iterations,
                step,
                seed,
                ..Default::default()
            };
            let curve = loss_curve.unwrap_or_else(|| out.with_extension("loss.csv"));
            let s = pipeline::cmd_latent_project(&target, &generator.source()?, &opts, &out, &curve)?;
            println!(
                "loss {:.6e} -> {:.6e}; latent {}, curve {}",
                s.projection.initial_loss,
                s.final_loss(),
                s.latent_path.display(),
                s.loss_curve_path.display()
            );
        }
        LatentCommand::EditDirection {
            manifest,
            label,
            positive,
            out,
        } => {
            let d = pipeline::cmd_latent_edit_direction(
                &manifest,
                &label,
                positive.as_deref(),
                SvmOptions::default(),
                &out,
            )?;
            println!(
                "direction for `{}` (training accuracy {:.3}): {}",
                d.label,
                d.margin_accuracy.unwrap_or(f64::NAN),
                out.display()
            );
        }
        LatentCommand::Edit {
            generator,
            latent,
            direction,
            alpha,
            t,
            emit,
        } => {
            pipeline::cmd_latent_edit(&generator.source()?, &latent, &direction, alpha, t, &emit.targets())?;
            report_written(&emit);
        }
        LatentCommand::Interp {
            generator,
            w1,
            w2,
            s,
            emit,
        } => {
            pipeline::cmd_latent_interp(&generator.source()?, &w1, &w2, s, &emit.targets())?;
            report_written(&emit);
        }
    }
    Ok(true)
}

fn report_written(emit: &EmitArgs) {
    let mesh = emit.mesh.as_deref().map(Path::display);
    match mesh {
        Some(m) => println!("wrote {} and {m}", emit.out.display()),
        None => println!("wrote {}", emit.out.display()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
