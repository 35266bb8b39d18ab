use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use clusterscope::clustering::SweepConfig;
use clusterscope::compactness::{EpsilonMode, EpsilonRule, EpsilonScope, FilterMode, DEFAULT_ETA};
use clusterscope::dataset::{generate_mixture, load_points, normalize, preset, MixtureSpec, Normalization};
use clusterscope::error::{Error, Result};
use clusterscope::pipeline::IndexParams;
use clusterscope::run::{
    write_file, RunManifest, RunOutput, RunResult, Task, CLUSTERS_CSV, DECISION_SVG, REPORT_JSON,
    TABLE_CSV,
};
use clusterscope::selection::Coordinate;
use clusterscope::separability::DEFAULT_MU;

const EXIT_USAGE: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_INTERNAL: u8 = 4;

const AFTER_HELP: &str = "\
Output files (written with --out-dir):
  report.json     full report, \"schema\": \"clusterscope/1\", with the run manifest embedded
  manifest.json   resolved parameters and sha256 of every input; replay with `clusterscope replay`
  analyze:
    clusters.csv  cluster,size,radius,average_radius,epsilon,shells,orphans,dropped,compactness,cluster_margin
    margins_<filter>.csv, margins_<filter>_scaled.csv
                  k x k margin matrix; header row `cluster,0,1,...`
    adjacency.csv point,cluster,adjacent_to (`;`-separated cluster ids)
  sweep:
    table.csv     k,T_k,S_av,DB,XB,Dn,CH  (CH unscaled; unbounded values print as `inf`)
    decision.csv  k,compactness,separability_raw,separability_scaled,t_raw,t_scaled
    decision.svg  decision-space plot; filled = non-dominated, star = selected k
    labels_k<k>.txt  one label per line for every k in the sweep

Exit codes: 0 success, 2 usage error, 3 data error, 4 internal error.";

/// Cluster validity by compactness and separability.
#[derive(Parser)]
#[command(name = "clusterscope", version, after_help = AFTER_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score a given partition (points plus one label per point).
    Analyze(AnalyzeArgs),
    /// Cluster for a range of k, score every partition and select k.
    Sweep(SweepArgs),
    /// Re-run from a manifest (or a report that embeds one).
    Replay {
        manifest: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Sample a Gaussian mixture from a preset or a JSON spec.
    Generate(GenerateArgs),
    /// Rescale attributes as a pre-processing pass.
    Normalize {
        input: PathBuf,
        #[arg(long, value_enum)]
        method: NormArg,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FilterArg {
    Full,
    Ms,
    Med,
}

impl From<FilterArg> for FilterMode {
    fn from(f: FilterArg) -> Self {
        match f {
            FilterArg::Full => FilterMode::Full,
            FilterArg::Ms => FilterMode::Ms,
            FilterArg::Med => FilterMode::Med,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleArg {
    RadiusOverP,
    MedianGap,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScopeArg {
    Cluster,
    Dataset,
}

#[derive(Clone, Copy, ValueEnum)]
enum CoordinateArg {
    Scaled,
    Raw,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormArg {
    Minmax,
    Zscore,
}

impl From<NormArg> for Normalization {
    fn from(n: NormArg) -> Self {
        match n {
            NormArg::Minmax => Normalization::MinMax,
            NormArg::Zscore => Normalization::ZScore,
        }
    }
}

#[derive(Args)]
struct IndexArgs {
    /// `auto`, or a fixed epsilon >= 0 shared by all clusters.
    #[arg(long, default_value = "auto")]
    epsilon: String,
    /// Rule for `--epsilon auto`.
    #[arg(long, value_enum, default_value = "radius-over-p")]
    epsilon_rule: RuleArg,
    /// Derive auto epsilon per cluster, or once from the whole data set.
    #[arg(long, value_enum, default_value = "cluster")]
    epsilon_scope: ScopeArg,
    /// Cosine threshold for direction coverage.
    #[arg(long, default_value_t = DEFAULT_ETA)]
    eta: f64,
    /// Cosine threshold for neighbor occlusion.
    #[arg(long, default_value_t = DEFAULT_MU)]
    mu: f64,
    /// Distance filter for compactness and margins.
    #[arg(long, value_enum, default_value = "ms")]
    filter: FilterArg,
    /// Total-margin coordinate used for T_k and the decision plot.
    #[arg(long, value_enum, default_value = "scaled")]
    coordinate: CoordinateArg,
    /// File of probe directions, one comma-separated unit vector per line (default: +-axes).
    #[arg(long)]
    directions: Option<String>,
    /// Normalize attributes before scoring.
    #[arg(long, value_enum)]
    normalize: Option<NormArg>,
}

impl IndexArgs {
    fn params(&self) -> Result<IndexParams> {
        let rule = match self.epsilon_rule {
            RuleArg::RadiusOverP => EpsilonRule::RadiusOverP,
            RuleArg::MedianGap => EpsilonRule::MedianGap,
        };
        let scope = match self.epsilon_scope {
            ScopeArg::Cluster => EpsilonScope::Cluster,
            ScopeArg::Dataset => EpsilonScope::Dataset,
        };
        let epsilon = if self.epsilon == "auto" {
            EpsilonMode::Auto { rule, scope }
        } else {
            let value: f64 = self.epsilon.parse().map_err(|_| {
                Error::InvalidParameter(format!(
                    "--epsilon must be `auto` or a number, got {:?}",
                    self.epsilon
                ))
            })?;
            if !(value >= 0.0 && value.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "--epsilon must be finite and >= 0, got {value}"
                )));
            }
            EpsilonMode::Fixed { value }
        };
        for (name, v) in [("--eta", self.eta), ("--mu", self.mu)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::InvalidParameter(format!("{name} must lie in (0, 1], got {v}")));
            }
        }
        Ok(IndexParams {
            epsilon,
            eta: self.eta,
            mu: self.mu,
            filter: self.filter.into(),
            coordinate: match self.coordinate {
                CoordinateArg::Scaled => Coordinate::Scaled,
                CoordinateArg::Raw => Coordinate::Raw,
            },
        })
    }
}

#[derive(Args)]
struct OutputArgs {
    /// Write every output file into this directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Write the JSON report here.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Write the main CSV table here (sweep: table.csv; analyze: clusters.csv).
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write the decision-space SVG here (sweep only).
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    points: String,
    labels: String,
    #[command(flatten)]
    index: IndexArgs,
    /// Extra filters whose margin matrices are also reported.
    #[arg(long, value_enum, value_delimiter = ',')]
    margins: Vec<FilterArg>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SweepArgs {
    points: String,
    #[command(flatten)]
    index: IndexArgs,
    #[arg(long, default_value_t = 2)]
    kmin: usize,
    #[arg(long, default_value_t = 10)]
    kmax: usize,
    /// Independent k-means++ restarts per k.
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 300)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct GenerateArgs {
    /// Built-in layout (see the error message of an unknown name for the list).
    #[arg(long, conflicts_with = "spec", required_unless_present = "spec")]
    preset: Option<String>,
    /// JSON mixture spec: {"components":[{"center":[..],"std_dev":..,"count":..}],"seed":..}.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Overrides the seed of a preset or spec.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    labels_out: Option<PathBuf>,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidParameter(_) => EXIT_USAGE,
        e if e.is_internal() => EXIT_INTERNAL,
        _ => EXIT_DATA,
    }
}

fn main() -> ExitCode {
    std::panic::set_hook(Box::new(|info| {
        eprintln!("internal error: {info}");
        std::process::exit(EXIT_INTERNAL as i32);
    }));
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Analyze(a) => {
            let params = a.index.params()?;
            let task = Task::Analyze {
                data: a.points,
                labels: a.labels,
                directions: a.index.directions,
                normalization: a.index.normalize.map(Into::into),
                params,
                margin_filters: a.margins.into_iter().map(Into::into).collect(),
            };
            if a.output.svg.is_some() {
                return Err(Error::InvalidParameter("--svg applies to sweep only".into()));
            }
            let output = RunManifest::new(task)?.compute()?;
            emit(&output, &a.output, CLUSTERS_CSV)
        }
        Command::Sweep(s) => {
            let params = s.index.params()?;
            let sweep = SweepConfig {
                k_min: s.kmin,
                k_max: s.kmax,
                restarts: s.restarts,
                seed: s.seed,
                max_iters: s.max_iters,
                tol: s.tol,
            };
            let task = Task::Sweep {
                data: s.points,
                directions: s.index.directions,
                normalization: s.index.normalize.map(Into::into),
                params,
                sweep,
            };
            let output = RunManifest::new(task)?.compute()?;
            emit(&output, &s.output, TABLE_CSV)
        }
        Command::Replay { manifest, out_dir } => {
            let output = RunManifest::load(&manifest)?.execute(&out_dir)?;
            summarize(&output);
            Ok(())
        }
        Command::Generate(g) => {
            let mut spec = match (&g.preset, &g.spec) {
                (Some(name), _) => preset(name, 0)?,
                (None, Some(path)) => {
                    let raw = std::fs::read_to_string(path).map_err(|e| Error::Io {
                        path: path.clone(),
                        source: e,
                    })?;
                    serde_json::from_str::<MixtureSpec>(&raw)
                        .map_err(|e| Error::InvalidSpec(format!("{}: {e}", path.display())))?
                }
                (None, None) => unreachable!("clap requires one of --preset/--spec"),
            };
            if let Some(seed) = g.seed {
                spec.seed = seed;
            }
            let (points, labels) = generate_mixture(&spec)?;
            write_file(&g.out, &points.to_csv())?;
            if let Some(path) = &g.labels_out {
                write_file(path, &labels.to_text())?;
            }
            eprintln!(
                "wrote {} points in {} dimensions, {} components",
                points.len(),
                points.dim(),
                labels.k
            );
            Ok(())
        }
        Command::Normalize { input, method, out } => {
            let points = load_points(&input)?;
            write_file(&out, &normalize(&points, method.into())?.to_csv())
        }
    }
}

fn emit(output: &RunOutput, args: &OutputArgs, csv_name: &str) -> Result<()> {
    if let Some(dir) = &args.out_dir {
        output.write_all(dir)?;
    }
    let single: [(&Option<PathBuf>, &str); 3] = [
        (&args.json, REPORT_JSON),
        (&args.csv, csv_name),
        (&args.svg, DECISION_SVG),
    ];
    for (target, name) in single {
        if let Some(path) = target {
            write_one(output, path, name)?;
        }
    }
    summarize(output);
    Ok(())
}

fn write_one(output: &RunOutput, path: &Path, name: &str) -> Result<()> {
    let body = output
        .file(name)
        .ok_or_else(|| Error::InvalidParameter(format!("this command produces no {name}")))?;
    write_file(path, body)
}

/// Human-readable result on stdout.
fn summarize(output: &RunOutput) {
    match &output.result {
        RunResult::Sweep(report) => {
            print!("{}", report.table_csv());
            let sel = &report.selection;
            println!(
                "selected k = {} (T = {}){}",
                sel.k,
                sel.t_value,
                if sel.ambiguous {
                    "; ambiguous: runner-up within 1e-3"
                } else {
                    ""
                }
            );
        }
        RunResult::Analyze(a) => {
            print!("{}", a.clusters_csv());
            println!("C_k = {}", a.compactness.value);
            match &a.separability {
                Some(s) => {
                    let r = &s.report;
                    println!(
                        "s_k = {} ({}/{} neighbor relations separated)",
                        r.ratio, r.n_separated, r.n_total
                    );
                    println!("s_bar_k = {}", r.distribution_margin);
                    println!("s_hat_k raw = {}, scaled = {}", r.total_margin_raw, r.total_margin_scaled);
                }
                None => println!("separability: not applicable (single cluster)"),
            }
        }
    }
}
