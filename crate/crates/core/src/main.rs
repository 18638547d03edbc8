//! `pif` command-line interface.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pif::analyze::{
    classical_mds, distance_matrix, kmeans, similarity_from_distance, spectral_embed, DistanceMatrix, Embedding,
    EmbeddingMethod, SpectralOptions,
};
use pif::experiment::{self, ExperimentConfig, ExperimentKind};
use pif::field::{default_density_grid, distance_grid, kde_grid, DEFAULT_RESOLUTION};
use pif::inference::{bootstrap_zscore, mise_study, permutation_test, power_study, MiseConfig, PowerConfig};
use pif::intensity::{average_intensity, smooth_diagram, LifetimeTransform};
use pif::persistence::compute_persistence;
use pif::synth::Population;
use pif::{io, Direction, Error, FieldKind, GridField, GridSpec, IntensityGrid, PersistenceDiagram, PointCloud, Result, RngSeed, WeightSpec};

#[derive(Parser)]
#[command(name = "pif", version, about = "Persistence intensity functions for 2D grid data")]
struct Cli {
    /// Seed for stochastic commands (master seed for `run`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory for `run`; relative `--out` paths resolve against it.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a synthetic point cloud.
    Synth(SynthArgs),
    /// Evaluate a KDE or distance function on a grid.
    Field(FieldArgs),
    /// Persistence diagram of a grid function.
    Persist(PersistArgs),
    /// Smooth a diagram into an intensity, or average intensities.
    Intensity(IntensityArgs),
    /// Distances, embeddings and clustering of intensities.
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
    /// Two-sample tests and estimator studies.
    #[command(subcommand)]
    Infer(InferCommand),
    /// Run a whole experiment (desk-scale defaults without `--config`).
    Run(RunArgs),
    /// Check an experiment configuration file.
    Validate {
        /// Configuration file.
        #[arg(long = "config", value_name = "FILE")]
        config: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PopArg {
    Circle,
    ThreeCircles,
    Gauss3,
    Uniform,
    Contaminated,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, value_enum)]
    pop: PopArg,
    #[arg(long)]
    n: usize,
    /// Contamination proportion (contaminated population only).
    #[arg(long, default_value_t = 0.0)]
    q: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum FieldMode {
    Kde,
    Dist,
}

#[derive(Args)]
struct FieldArgs {
    #[arg(long, value_enum)]
    mode: FieldMode,
    /// KDE bandwidth.
    #[arg(long)]
    h: Option<f64>,
    #[arg(long, num_args = 2, value_names = ["NX", "NY"])]
    grid: Option<Vec<usize>>,
    #[arg(long, num_args = 4, value_names = ["XLO", "XHI", "YLO", "YHI"], allow_negative_numbers = true)]
    bounds: Option<Vec<f64>>,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PersistArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Filtration direction; defaults to super for densities, sub for distances.
    #[arg(long)]
    direction: Option<Direction>,
    #[arg(long, default_value_t = 1)]
    maxdim: u8,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
#[command(args_conflicts_with_subcommands = true, subcommand_negates_reqs = true)]
struct IntensityArgs {
    #[command(subcommand)]
    avg: Option<IntensitySub>,
    #[arg(long = "in", required = true)]
    input: Option<PathBuf>,
    #[arg(long, required = true)]
    tau: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    g0: f64,
    #[arg(long, default_value_t = 1.0)]
    g1: f64,
    /// Lifetime transform for dimension 0: `identity` or `power:EXP`.
    #[arg(long, default_value = "identity")]
    l0: String,
    #[arg(long, default_value = "identity")]
    l1: String,
    #[arg(long, num_args = 2, value_names = ["NX", "NY"])]
    grid: Option<Vec<usize>>,
    #[arg(long, num_args = 4, value_names = ["XLO", "XHI", "YLO", "YHI"], allow_negative_numbers = true)]
    bounds: Option<Vec<f64>>,
    #[arg(long, required = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum IntensitySub {
    /// Pointwise mean of intensities on a shared grid.
    Avg {
        #[arg(long = "in", num_args = 1.., required = true)]
        input: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum AnalyzeCommand {
    /// Pairwise L1 distance matrix.
    Dist {
        #[arg(long = "in", num_args = 1.., required = true)]
        input: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Classical multidimensional scaling of a distance matrix.
    Mds {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Normalized-Laplacian spectral embedding followed by k-means.
    Spectral {
        #[arg(long = "in")]
        input: PathBuf,
        /// Gaussian similarity scale.
        #[arg(long)]
        scale: f64,
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Number of k-means clusters.
        #[arg(long = "kmeans")]
        clusters: usize,
        #[arg(long)]
        skip_trivial: bool,
        #[arg(long)]
        degree_rescale: bool,
        #[arg(long)]
        row_normalize: bool,
        /// Also write the embedding coordinates here.
        #[arg(long)]
        coords: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// k-means on an embedding file (`id,c1,...`).
    Kmeans {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum InferCommand {
    /// Permutation test between two directories of intensity CSVs.
    Test {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, default_value_t = 1000)]
        perms: usize,
        /// Also report a bootstrap z-score with this many resamples.
        #[arg(long)]
        bootstrap: Option<usize>,
        #[arg(long)]
        json: PathBuf,
    },
    /// Power curve of the two-sample test (config: power-study JSON).
    Power {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// MISE of the averaged intensity over an N sweep (config: MISE JSON).
    Mise {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RunKind {
    Fig2,
    Fig4,
    Mise,
    Custom,
}

#[derive(Args)]
struct RunArgs {
    #[arg(value_enum)]
    kind: RunKind,
    #[arg(long)]
    config: Option<PathBuf>,
}

struct Ctx {
    seed: Option<u64>,
    out_dir: Option<PathBuf>,
}

impl Ctx {
    fn out(&self, p: &Path) -> PathBuf {
        match &self.out_dir {
            Some(d) if p.is_relative() => d.join(p),
            _ => p.to_path_buf(),
        }
    }

    fn seed(&self) -> RngSeed {
        RngSeed(self.seed.unwrap_or(experiment::DEFAULT_MASTER_SEED))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if t == 0 || rayon::ThreadPoolBuilder::new().num_threads(t).build_global().is_err() {
            eprintln!("error: invalid --threads {t}");
            return ExitCode::from(2);
        }
    }
    let ctx = Ctx { seed: cli.seed, out_dir: cli.out_dir };
    match dispatch(cli.command, &ctx) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                if !e.to_string().contains(&s.to_string()) {
                    eprintln!("  caused by: {s}");
                }
                src = s.source();
            }
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidConfig(_) | Error::InvalidParameter { .. } => 2,
        _ => 3,
    }
}

fn grid_dims(grid: &Option<Vec<usize>>) -> (usize, usize) {
    grid.as_ref().map_or((DEFAULT_RESOLUTION, DEFAULT_RESOLUTION), |g| (g[0], g[1]))
}

fn spec_from(bounds: &[f64], (nx, ny): (usize, usize)) -> Result<GridSpec> {
    GridSpec::new(bounds[0], bounds[1], bounds[2], bounds[3], nx, ny)
}

fn dispatch(cmd: Command, ctx: &Ctx) -> Result<()> {
    match cmd {
        Command::Synth(a) => {
            let pop = match a.pop {
                PopArg::Circle => Population::Circle,
                PopArg::ThreeCircles => Population::ThreeCircles,
                PopArg::Gauss3 => Population::Gauss3,
                PopArg::Uniform => Population::Uniform,
                PopArg::Contaminated => Population::Contaminated { q: a.q },
            };
            pop.sample(a.n, ctx.seed())?.write_csv(&ctx.out(&a.out))
        }
        Command::Field(a) => {
            let cloud = PointCloud::read_csv(&a.input)?;
            let dims = grid_dims(&a.grid);
            let field = match a.mode {
                FieldMode::Kde => {
                    let h = a.h.ok_or_else(|| Error::InvalidParameter { name: "h", reason: "required for --mode kde".into() })?;
                    let spec = match &a.bounds {
                        Some(b) => spec_from(b, dims)?,
                        None if dims.0 == dims.1 => default_density_grid(&cloud, h, dims.0)?,
                        None => GridSpec::around(bbox(&cloud)?, 4.0 * h, dims.0, dims.1)?,
                    };
                    kde_grid(&cloud, h, &spec)?
                }
                FieldMode::Dist => {
                    let spec = match &a.bounds {
                        Some(b) => spec_from(b, dims)?,
                        None => {
                            let bb = bbox(&cloud)?;
                            let margin = 0.1 * (bb.1 - bb.0).max(bb.3 - bb.2).max(f64::MIN_POSITIVE);
                            GridSpec::around(bb, margin, dims.0, dims.1)?
                        }
                    };
                    distance_grid(&cloud, &spec)?
                }
            };
            field.write_csv(&ctx.out(&a.out))
        }
        Command::Persist(a) => {
            let field = GridField::read_csv(&a.input)?;
            let dir = a.direction.unwrap_or(match field.kind {
                FieldKind::Density => Direction::Superlevel,
                FieldKind::Distance => Direction::Sublevel,
            });
            compute_persistence(&field, dir, a.maxdim)?.write_csv(&ctx.out(&a.out))
        }
        Command::Intensity(a) => intensity(a, ctx),
        Command::Analyze(a) => analyze(a, ctx),
        Command::Infer(a) => infer(a, ctx),
        Command::Run(a) => run(a, ctx),
        Command::Validate { config } => match experiment::validate_config(&config) {
            Ok(mut cfg) => {
                let seeds = cfg.resolve_seeds(ctx.seed);
                println!("ok: {} configuration", cfg.kind.name());
                println!("{}", serde_json::to_string_pretty(&seeds)?);
                Ok(())
            }
            Err(issues) => {
                for i in &issues {
                    eprintln!("{}: {i}", config.display());
                }
                Err(experiment::issues_to_error(&issues))
            }
        },
    }
}

fn bbox(cloud: &PointCloud) -> Result<(f64, f64, f64, f64)> {
    cloud.bounding_box().ok_or_else(|| Error::InvalidInput("empty point cloud".into()))
}

fn intensity(a: IntensityArgs, ctx: &Ctx) -> Result<()> {
    if let Some(IntensitySub::Avg { input, out }) = a.avg {
        let grids = input.iter().map(|p| IntensityGrid::read_csv(p)).collect::<Result<Vec<_>>>()?;
        return average_intensity(&grids)?.write_csv(&ctx.out(&out));
    }
    let (input, tau, out) = (a.input.expect("required"), a.tau.expect("required"), a.out.expect("required"));
    let mut w = WeightSpec::with_g(a.g0, a.g1)?;
    let transform = |name: &'static str, raw: &str| {
        LifetimeTransform::parse(raw)
            .ok_or_else(|| Error::InvalidParameter { name, reason: format!("expected `identity` or `power:EXP`, got `{raw}`") })
    };
    w.lifetime = [transform("l0", &a.l0)?, transform("l1", &a.l1)?];
    w.validate()?;
    let diagram = PersistenceDiagram::read_csv(&input)?;
    let dims = grid_dims(&a.grid);
    let spec = match &a.bounds {
        Some(b) => spec_from(b, dims)?,
        None => {
            let bb = diagram
                .bounding_box()
                .ok_or_else(|| Error::InvalidInput("diagram is empty; pass --bounds to place the grid".into()))?;
            GridSpec::around(bb, 4.0 * tau, dims.0, dims.1)?
        }
    };
    smooth_diagram(&diagram, tau, &w, &spec)?.write_csv(&ctx.out(&out))
}

fn write_labels(path: &Path, labels: &[usize]) -> Result<()> {
    let mut text = String::from("id,cluster\n");
    for (id, c) in labels.iter().enumerate() {
        text.push_str(&format!("{id},{c}\n"));
    }
    io::write_string(path, &text)
}

fn analyze(cmd: AnalyzeCommand, ctx: &Ctx) -> Result<()> {
    match cmd {
        AnalyzeCommand::Dist { input, out } => {
            let grids = input.iter().map(|p| IntensityGrid::read_csv(p)).collect::<Result<Vec<_>>>()?;
            distance_matrix(&grids)?.write_csv(&ctx.out(&out))
        }
        AnalyzeCommand::Mds { input, k, out } => classical_mds(&DistanceMatrix::read_csv(&input)?, k)?.write_csv(&ctx.out(&out)),
        AnalyzeCommand::Spectral { input, scale, k, clusters, skip_trivial, degree_rescale, row_normalize, coords, out } => {
            let s = similarity_from_distance(&DistanceMatrix::read_csv(&input)?, scale)?;
            let e = spectral_embed(&s, k, SpectralOptions { skip_trivial, degree_rescale, row_normalize })?;
            if let Some(c) = coords {
                e.write_csv(&ctx.out(&c))?;
            }
            write_labels(&ctx.out(&out), &kmeans(&e, clusters, ctx.seed())?.labels)
        }
        AnalyzeCommand::Kmeans { input, k, out } => {
            let e: Embedding = Embedding::read_csv(&input, EmbeddingMethod::Mds)?;
            write_labels(&ctx.out(&out), &kmeans(&e, k, ctx.seed())?.labels)
        }
    }
}

fn read_dir_grids(dir: &Path) -> Result<Vec<IntensityGrid>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::Io { path: dir.to_path_buf(), source: e })?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    paths.sort();
    paths.iter().map(|p| IntensityGrid::read_csv(p)).collect()
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = io::read_to_string(path)?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de)
        .map_err(|e| Error::InvalidConfig(format!("{}: {}: {}", path.display(), e.path(), e.inner())))
}

fn infer(cmd: InferCommand, ctx: &Ctx) -> Result<()> {
    match cmd {
        InferCommand::Test { a, b, perms, bootstrap, json } => {
            let (ga, gb) = (read_dir_grids(&a)?, read_dir_grids(&b)?);
            let result = permutation_test(&ga, &gb, perms, ctx.seed())?;
            let mut value = serde_json::to_value(&result)?;
            if let Some(nb) = bootstrap {
                value["z"] = serde_json::json!(bootstrap_zscore(&ga, &gb, nb, ctx.seed().child(1))?);
            }
            let text = serde_json::to_string_pretty(&value)? + "\n";
            print!("{text}");
            io::write_string(&ctx.out(&json), &text)
        }
        InferCommand::Power { config, out } => {
            let cfg: PowerConfig = read_json(&config)?;
            let curve = power_study(&cfg, ctx.seed())?;
            io::write_string(&ctx.out(&out), &experiment::power_curve_csv(&curve))
        }
        InferCommand::Mise { config, out } => {
            let cfg: MiseConfig = read_json(&config)?;
            let curve = mise_study(&cfg, ctx.seed())?;
            match curve.slope {
                Some(s) => println!("log-log slope: {s}"),
                None => println!("log-log slope: undefined (single N)"),
            }
            io::write_string(&ctx.out(&out), &experiment::mise_curve_csv(&curve))
        }
    }
}

fn run(a: RunArgs, ctx: &Ctx) -> Result<()> {
    let kind = match a.kind {
        RunKind::Fig2 => ExperimentKind::Fig2,
        RunKind::Fig4 => ExperimentKind::Fig4,
        RunKind::Mise => ExperimentKind::Mise,
        RunKind::Custom => ExperimentKind::Custom,
    };
    let config = match &a.config {
        Some(p) => experiment::validate_config(p).map_err(|issues| experiment::issues_to_error(&issues))?,
        None => match kind {
            ExperimentKind::Fig2 => ExperimentConfig::new_fig2(experiment::ClusterConfig::desk()),
            ExperimentKind::Fig4 => ExperimentConfig::new_fig4(PowerConfig::desk()),
            ExperimentKind::Mise => ExperimentConfig::new_mise(MiseConfig::desk()),
            ExperimentKind::Custom => {
                return Err(Error::InvalidConfig("`run custom` needs --config".into()));
            }
        },
    };
    if config.kind != kind {
        return Err(Error::InvalidConfig(format!("kind: file is `{}`, command asked for `{}`", config.kind.name(), kind.name())));
    }
    let out_dir = ctx
        .out_dir
        .clone()
        .or_else(|| config.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from(format!("out/{}", kind.name())));
    let manifest = experiment::run_experiment(&config, ctx.seed, &out_dir)?;
    println!("wrote {} files to {}", manifest.outputs.len(), out_dir.display());
    println!("{}", serde_json::to_string_pretty(&manifest.summary)?);
    Ok(())
}
