use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ngg::engine::{GameMode, GameParams};
use ngg::harness::{load_config, run_experiment, ExperimentConfig, Report, Sweep};
use ngg::netgen::{compute_stats, generate, Attachment, NetworkSpec, StatsRecord};
use ngg::plot::{load, render_svg, PlotKind, PlotSpec, SummaryMetric};
use ngg::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const EXIT_IO: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_GENERATION: u8 = 3;
const EXIT_NOT_CONVERGED: u8 = 4;

/// Naming Game in Groups simulator.
///
/// Exit codes: 0 success, 1 output I/O failure, 2 invalid flags, config or
/// input files, 3 network generation failure, 4 some run hit the iteration
/// cap (artifacts are still written).
#[derive(Parser, Debug)]
#[command(name = "ngg", version)]
struct Cli {
    /// Random seed: the network seed for `net`, the master seed for `run` and `sweep`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for `net`, `run` and `sweep`; the SVG file for `plot`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// JSON experiment config for `run` and `sweep`.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a network, write its edge list and statistics.
    Net(NetFlags),
    /// Run the base point of an experiment (any sweep block is ignored).
    Run(RunFlags),
    /// Run every point of a parameter sweep.
    Sweep(SweepFlags),
    /// Draw an SVG line chart from trace or summary CSV files.
    Plot(PlotFlags),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Model {
    Rg,
    Ws,
    Ba,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AttachmentArg {
    Distinct,
    Merged,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Ngg,
    Ngmh,
    MinimalNg,
}

impl From<ModeArg> for GameMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Ngg => GameMode::Ngg,
            ModeArg::Ngmh => GameMode::Ngmh,
            ModeArg::MinimalNg => GameMode::MinimalNg,
        }
    }
}

#[derive(Args, Debug)]
struct NetFlags {
    /// Reference configuration such as RG-0.05, WS-20-0.2 or BA-50.
    #[arg(long, conflicts_with = "model")]
    preset: Option<String>,
    #[arg(long, value_enum)]
    model: Option<Model>,
    /// Number of nodes.
    #[arg(long)]
    m: Option<usize>,
    /// Edge probability of a random graph.
    #[arg(long)]
    p: Option<f64>,
    /// Ring neighbors on each side in a small-world lattice.
    #[arg(long)]
    k: Option<usize>,
    /// Rewiring probability of a small-world lattice.
    #[arg(long)]
    rp: Option<f64>,
    /// Complete seed size of a scale-free network.
    #[arg(long)]
    n0: Option<usize>,
    /// Edges added with each new scale-free node.
    #[arg(long)]
    e: Option<usize>,
    #[arg(long, value_enum, default_value = "distinct")]
    attachment: AttachmentArg,
}

#[derive(Args, Clone, Debug)]
struct GameFlags {
    /// Group size.
    #[arg(long)]
    n: Option<usize>,
    /// Fraction of the group size transmitted per round.
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long)]
    repetitions: Option<usize>,
    #[arg(long)]
    max_iterations: Option<u64>,
    /// Reuse one network for every repetition.
    #[arg(long)]
    fixed_network: bool,
}

#[derive(Args, Debug)]
struct RunFlags {
    #[command(flatten)]
    net: NetFlags,
    #[command(flatten)]
    game: GameFlags,
}

#[derive(Args, Debug)]
struct SweepFlags {
    #[command(flatten)]
    net: NetFlags,
    #[command(flatten)]
    game: GameFlags,
    #[arg(long, value_delimiter = ',')]
    betas: Option<Vec<f64>>,
    #[arg(long = "ns", value_delimiter = ',')]
    group_sizes: Option<Vec<usize>>,
    #[arg(long, value_enum, value_delimiter = ',')]
    modes: Option<Vec<ModeArg>>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    TraceNTotal,
    TraceNDiff,
    TraceSr,
    NTotalMax,
    NDiffMax,
    NIterCvg,
}

impl From<KindArg> for PlotKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::TraceNTotal => PlotKind::TraceNTotal,
            KindArg::TraceNDiff => PlotKind::TraceNDiff,
            KindArg::TraceSr => PlotKind::TraceSr,
            KindArg::NTotalMax => PlotKind::MetricVsBeta(SummaryMetric::NTotalMax),
            KindArg::NDiffMax => PlotKind::MetricVsBeta(SummaryMetric::NDiffMax),
            KindArg::NIterCvg => PlotKind::MetricVsBeta(SummaryMetric::NIterCvg),
        }
    }
}

#[derive(Args, Debug)]
struct PlotFlags {
    /// Trace kinds read trace CSVs; metric kinds read summary.csv files.
    #[arg(long, value_enum)]
    kind: KindArg,
    #[arg(long = "input", required = true)]
    inputs: Vec<PathBuf>,
    /// One per input; defaults to the file names.
    #[arg(long = "label")]
    labels: Vec<String>,
}

/// An error with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn invalid(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INVALID,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParam { .. } | Error::Parse { .. } | Error::Schema { .. } => EXIT_INVALID,
            Error::ConnectivityFailure { .. } | Error::Disconnected => EXIT_GENERATION,
            Error::Io { .. } | Error::UnknownSource(_) | Error::EmptyTrace => EXIT_IO,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

/// Errors while reading inputs are input errors, whatever their kind.
fn reading(e: Error) -> Failure {
    let mut f = Failure::from(e);
    if f.code == EXIT_IO {
        f.code = EXIT_INVALID;
    }
    f
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<u8, Failure> {
    match &cli.command {
        Command::Net(flags) => cmd_net(cli, flags),
        Command::Run(flags) => {
            let mut cfg = experiment_config(cli, &flags.net, &flags.game)?;
            cfg.sweep = None;
            execute(&cfg)
        }
        Command::Sweep(flags) => {
            // A swept value needs no base value of its own.
            let mut game = flags.game.clone();
            game.beta = game
                .beta
                .or(flags.betas.as_ref().and_then(|b| b.first().copied()));
            game.n = game
                .n
                .or(flags.group_sizes.as_ref().and_then(|n| n.first().copied()));
            let mut cfg = experiment_config(cli, &flags.net, &game)?;
            let mut sweep = cfg.sweep.take().unwrap_or_default();
            if flags.betas.is_some() {
                sweep.betas.clone_from(&flags.betas);
            }
            if flags.group_sizes.is_some() {
                sweep.group_sizes.clone_from(&flags.group_sizes);
            }
            if let Some(modes) = &flags.modes {
                sweep.modes = Some(modes.iter().map(|&m| m.into()).collect());
            }
            if sweep == Sweep::default() {
                return Err(Failure::invalid(
                    "sweep needs a `sweep` block in the config or --betas, --ns or --modes",
                ));
            }
            cfg.sweep = Some(sweep);
            execute(&cfg)
        }
        Command::Plot(flags) => cmd_plot(cli, flags),
    }
}

fn required<T: Copy>(value: Option<T>, flag: &str) -> Result<T, Failure> {
    value.ok_or_else(|| Failure::invalid(format!("missing --{flag}")))
}

/// The network described by the flags, or `None` when no network flag was given.
fn network_spec(flags: &NetFlags) -> Result<Option<NetworkSpec>, Failure> {
    if let Some(label) = &flags.preset {
        return NetworkSpec::preset(label)
            .map(Some)
            .ok_or_else(|| Failure::invalid(format!("unknown preset `{label}`")));
    }
    let Some(model) = flags.model else {
        return Ok(None);
    };
    let m = required(flags.m, "m")?;
    let spec = match model {
        Model::Rg => NetworkSpec::RandomGraph {
            m,
            p: required(flags.p, "p")?,
        },
        Model::Ws => NetworkSpec::SmallWorld {
            m,
            k: required(flags.k, "k")?,
            rp: required(flags.rp, "rp")?,
        },
        Model::Ba => NetworkSpec::ScaleFree {
            m,
            n0: required(flags.n0, "n0")?,
            e: required(flags.e, "e")?,
            attachment: match flags.attachment {
                AttachmentArg::Distinct => Attachment::Distinct,
                AttachmentArg::Merged => Attachment::Merged,
            },
        },
    };
    spec.validate()?;
    Ok(Some(spec))
}

fn cmd_net(cli: &Cli, flags: &NetFlags) -> Result<u8, Failure> {
    let spec =
        network_spec(flags)?.ok_or_else(|| Failure::invalid("net needs --preset or --model"))?;
    let seed = cli.seed.unwrap_or(1);
    let net = generate(&spec, &mut ChaCha8Rng::seed_from_u64(seed))?;
    let stats = compute_stats(&net)?;

    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    create_dir(&out)?;
    let label = spec.label();
    net.save_edge_list(&out.join(format!("{label}.edges")))?;
    let record = StatsRecord::new(&spec, &stats, seed);
    let stats_path = out.join(format!("{label}.stats.json"));
    let json = serde_json::to_string_pretty(&record).expect("stats serialize");
    std::fs::write(&stats_path, json + "\n").map_err(|e| io_failure(&stats_path, e))?;

    println!(
        "{:<12} {:>7} {:>8} {:>8} {:>8}",
        "Network", "#Nodes", "<D>", "<PL>", "CC"
    );
    println!(
        "{:<12} {:>7} {:>8.1} {:>8.4} {:>8.4}",
        label,
        net.node_count(),
        stats.avg_degree,
        stats.avg_path_length,
        stats.clustering_coefficient
    );
    Ok(0)
}

fn experiment_config(
    cli: &Cli,
    net: &NetFlags,
    game: &GameFlags,
) -> Result<ExperimentConfig, Failure> {
    let spec = network_spec(net)?;
    let mut cfg = match &cli.config {
        Some(path) => load_config(path).map_err(reading)?,
        None => {
            let spec = spec
                .clone()
                .ok_or_else(|| Failure::invalid("need --config, --preset or --model"))?;
            let params = GameParams::new(required(game.n, "n")?, required(game.beta, "beta")?);
            ExperimentConfig::new(spec, params, 0)
        }
    };
    if let Some(spec) = spec {
        cfg.network = spec;
    }
    if let Some(n) = game.n {
        cfg.game.n = n;
    }
    if let Some(beta) = game.beta {
        cfg.game.beta = beta;
    }
    if let Some(mode) = game.mode {
        cfg.game.mode = mode.into();
    }
    if let Some(reps) = game.repetitions {
        cfg.repetitions = reps;
    }
    if let Some(cap) = game.max_iterations {
        cfg.game.max_iterations = cap;
    }
    cfg.fixed_network |= game.fixed_network;
    if let Some(seed) = cli.seed {
        cfg.master_seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cfg: &ExperimentConfig) -> Result<u8, Failure> {
    let report: Report = run_experiment(cfg)?;
    for point in &report.points {
        println!("{}", point.summary_line());
    }
    if report.any_non_converged() {
        let stuck: usize = report.points.iter().map(|p| p.non_converged).sum();
        eprintln!(
            "warning: {stuck} run(s) stopped at the iteration cap; see {}",
            cfg.output_dir.join("report.json").display()
        );
        return Ok(EXIT_NOT_CONVERGED);
    }
    Ok(0)
}

fn cmd_plot(cli: &Cli, flags: &PlotFlags) -> Result<u8, Failure> {
    let labels = if flags.labels.is_empty() {
        flags
            .inputs
            .iter()
            .map(|p| {
                p.file_stem().map_or_else(
                    || p.display().to_string(),
                    |s| s.to_string_lossy().into_owned(),
                )
            })
            .collect()
    } else {
        flags.labels.clone()
    };
    let spec = PlotSpec {
        kind: flags.kind.into(),
        inputs: flags.inputs.clone(),
        labels,
        output: cli.out.clone().unwrap_or_else(|| PathBuf::from("plot.svg")),
    };
    let series = load(&spec).map_err(reading)?;
    let svg = render_svg(spec.kind, &series);
    std::fs::write(&spec.output, svg).map_err(|e| io_failure(&spec.output, e))?;
    println!("wrote {}", spec.output.display());
    Ok(0)
}

fn create_dir(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: EXIT_IO,
        message: format!("I/O error on {}: {e}", path.display()),
    }
}
