//! `mirate` command line.
//!
//! Every command validates its inputs before anything is written. With
//! `--out DIR` the outputs go to files in `DIR` next to a `manifest.json`
//! that `mirate rerun` replays byte-identically; without it the primary
//! output goes to standard output.
//!
//! Exit codes: 0 success, 2 validation, 3 mathematical precondition
//! (e.g. non-ergodic chain), 4 internal numeric failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::bottleneck::{bottleneck_experiment, GraphEncoderKind, TargetRule};
use crate::error::{Error, Result};
use crate::estimators::{
    aep_log_ratio_trace, convergence_study, estimate_amir_single_sequence, estimate_mi_continuous, BinCount,
    EstimatorConfig,
};
use crate::exact::{exact_amir_hidden_pair, exact_amir_joint, exact_mir_hidden_pair, exact_rates_joint_markov};
use crate::processes::{
    load_process, sample_gaussian_pair, sample_graph_process, sample_hidden_pair, sample_joint_pair, sample_markov,
    substream_seed, Process, ToyGraphProcess,
};
use crate::svg::line_chart;
use crate::types::ConvergenceTrace;

pub const DEFAULT_SEED: u64 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Parser)]
#[command(name = "mirate", version, about = "Mutual information rates of paired stochastic processes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Exact (or sandwich-bounded) rates of a markov-pair or hmm definition, as JSON.
    Exact(ExactArgs),
    /// Convergence trace of an estimator over sequence length, as CSV (and optional SVG).
    Estimate(EstimateArgs),
    /// Per-step log-likelihood ratio trace of an hmm definition, as CSV.
    Aep(AepArgs),
    /// Bottleneck scores of a graph reader on the toy graph process, as JSON.
    Bottleneck(BottleneckArgs),
    /// Dump a sampled realization as CSV.
    Sample(SampleArgs),
    /// Replay a run manifest.
    Rerun(RerunArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Exact(_) => "exact",
            Command::Estimate(_) => "estimate",
            Command::Aep(_) => "aep",
            Command::Bottleneck(_) => "bottleneck",
            Command::Sample(_) => "sample",
            Command::Rerun(_) => "rerun",
        }
    }

    fn out(&self) -> Option<&Path> {
        match self {
            Command::Exact(a) => a.out.as_deref(),
            Command::Estimate(a) => a.out.as_deref(),
            Command::Aep(a) => a.out.as_deref(),
            Command::Bottleneck(a) => a.out.as_deref(),
            Command::Sample(a) => a.out.as_deref(),
            Command::Rerun(a) => a.out.as_deref(),
        }
    }

    fn set_out(&mut self, out: Option<PathBuf>) {
        match self {
            Command::Exact(a) => a.out = out,
            Command::Estimate(a) => a.out = out,
            Command::Aep(a) => a.out = out,
            Command::Bottleneck(a) => a.out = out,
            Command::Sample(a) => a.out = out,
            Command::Rerun(a) => a.out = out,
        }
    }

    fn process_file(&self) -> Option<&Path> {
        match self {
            Command::Exact(a) => Some(&a.process),
            Command::Estimate(a) => Some(&a.process),
            Command::Aep(a) => Some(&a.process),
            Command::Sample(a) => Some(&a.process),
            Command::Bottleneck(_) | Command::Rerun(_) => None,
        }
    }

    fn set_process_file(&mut self, path: PathBuf) {
        match self {
            Command::Exact(a) => a.process = path,
            Command::Estimate(a) => a.process = path,
            Command::Aep(a) => a.process = path,
            Command::Sample(a) => a.process = path,
            Command::Bottleneck(_) | Command::Rerun(_) => {}
        }
    }

    fn seed(&self) -> Option<u64> {
        match self {
            Command::Estimate(a) => Some(a.seed),
            Command::Aep(a) => Some(a.seed),
            Command::Bottleneck(a) => Some(a.seed),
            Command::Sample(a) => Some(a.seed),
            Command::Exact(_) | Command::Rerun(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ExactArgs {
    /// Process definition (JSON)
    pub process: PathBuf,
    /// Target gap between the output entropy-rate bounds (hmm only)
    #[arg(long, default_value_t = 0.001)]
    pub gap_tolerance: f64,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorArg {
    Plugin,
    Knn,
    Binned,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct EstimateArgs {
    pub process: PathBuf,
    /// Longest sequence length (last grid point)
    #[arg(long, default_value_t = 4000)]
    pub n: usize,
    /// Comma-separated increasing lengths; defaults to a geometric grid ending at --n
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<usize>>,
    /// Number of independent realizations
    #[arg(long, default_value_t = 20)]
    pub seeds: usize,
    /// Master seed; realization i uses substream i
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// History depth C of the plug-in AMIR estimator
    #[arg(long, default_value_t = 1)]
    pub memory: usize,
    /// Defaults to plugin for discrete processes and knn for gaussian ones
    #[arg(long, value_enum)]
    pub estimator: Option<EstimatorArg>,
    #[arg(long, default_value_t = 4)]
    pub knn_k: usize,
    /// Bins per axis for the binned estimator (default ceil(sqrt(n)))
    #[arg(long)]
    pub bins: Option<usize>,
    /// Also write an SVG line chart (requires --out)
    #[arg(long)]
    pub svg: bool,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct AepArgs {
    pub process: PathBuf,
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EncoderArg {
    EdgeCountBucket,
    FixedEdgeProbe,
    IdentityHash,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct BottleneckArgs {
    #[arg(long, default_value_t = 4)]
    pub nodes: usize,
    #[arg(long, default_value_t = 0.1)]
    pub flip_p: f64,
    #[arg(long, value_enum, default_value_t = EncoderArg::EdgeCountBucket)]
    pub encoder: EncoderArg,
    /// Edge read by the fixed-edge-probe encoder
    #[arg(long, default_value_t = 0)]
    pub probe_edge: usize,
    /// Edge whose presence is the target Y
    #[arg(long, default_value_t = 0)]
    pub target_edge: usize,
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Accuracy threshold to report against
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub memory: usize,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SampleArgs {
    pub process: PathBuf,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct RerunArgs {
    pub manifest: PathBuf,
    /// Output directory (defaults to the manifest's own)
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

/// Written next to every file output; replaying it reproduces the outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub process_file: Option<PathBuf>,
    pub seed: Option<u64>,
    pub output_dir: PathBuf,
    pub parameters: Command,
}

/// Files produced by a command; the first one is the primary output.
struct Outputs {
    files: Vec<(&'static str, String)>,
}

fn read_process(path: &Path) -> Result<Process> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    load_process(&text)
}

fn run_exact(args: &ExactArgs) -> Result<Outputs> {
    let report = match read_process(&args.process)? {
        Process::Hmm(model) => exact_mir_hidden_pair(&model, args.gap_tolerance)?,
        Process::MarkovPair(pair) => exact_rates_joint_markov(&pair)?,
        other => {
            return Err(Error::InvalidInput(format!(
                "exact needs a markov-pair or hmm definition, got {}",
                other.kind()
            )))
        }
    };
    Ok(Outputs { files: vec![("report.json", report.to_json() + "\n")] })
}

fn geometric_grid(lo: usize, hi: usize, points: usize) -> Vec<usize> {
    if hi <= lo {
        return vec![hi];
    }
    let ratio = hi as f64 / lo as f64;
    let mut grid: Vec<usize> =
        (0..points).map(|i| (lo as f64 * ratio.powf(i as f64 / (points - 1) as f64)).round() as usize).collect();
    *grid.last_mut().expect("points > 0") = hi;
    grid.dedup();
    grid
}

fn run_estimate(args: &EstimateArgs) -> Result<Outputs> {
    let process = read_process(&args.process)?;
    if args.svg && args.out.is_none() {
        return Err(Error::InvalidInput("--svg requires --out".into()));
    }
    if args.seeds == 0 {
        return Err(Error::InvalidInput("--seeds must be at least 1".into()));
    }
    let discrete = matches!(process, Process::Hmm(_) | Process::MarkovPair(_));
    let estimator = args.estimator.unwrap_or(if discrete { EstimatorArg::Plugin } else { EstimatorArg::Knn });
    let lo = match estimator {
        EstimatorArg::Plugin => (args.memory + 2).max(10),
        EstimatorArg::Knn | EstimatorArg::Binned => 100,
    };
    let grid = args.grid.clone().unwrap_or_else(|| geometric_grid(lo, args.n, 12));
    if args.n < args.memory + 2 || grid.iter().any(|&n| n < args.memory + 2) {
        return Err(Error::InvalidInput(format!("sequence lengths must be at least memory + 2 = {}", args.memory + 2)));
    }
    let seeds: Vec<u64> = (0..args.seeds as u64).map(|i| substream_seed(args.seed, i)).collect();
    let plugin = EstimatorConfig::plugin(args.memory);

    let (trace, title) = match (&process, estimator) {
        (Process::Hmm(model), EstimatorArg::Plugin) => {
            let reference = exact_amir_hidden_pair(model)?;
            let study = convergence_study(
                |n, s| sample_hidden_pair(model, n, s),
                |seq, m| Ok(estimate_amir_single_sequence(&seq.truncated(m), &plugin)?.value),
                &grid,
                &seeds,
                Some(reference),
            )?;
            (study.median, "AMIR estimate of an HMM pair")
        }
        (Process::MarkovPair(pair), EstimatorArg::Plugin) => {
            let reference = exact_amir_joint(pair)?;
            let study = convergence_study(
                |n, s| sample_joint_pair(pair, n, s),
                |seq, m| Ok(estimate_amir_single_sequence(&seq.truncated(m), &plugin)?.value),
                &grid,
                &seeds,
                Some(reference),
            )?;
            (study.median, "AMIR estimate of a jointly Markov pair")
        }
        (Process::Gaussian(g), EstimatorArg::Knn | EstimatorArg::Binned) => {
            let config = match estimator {
                EstimatorArg::Knn => EstimatorConfig::knn(args.knn_k),
                _ => EstimatorConfig::binned(args.bins.map_or(BinCount::Auto, BinCount::Fixed)),
            };
            let study = convergence_study(
                |n, s| sample_gaussian_pair(g, n, s),
                |seq, m| Ok(estimate_mi_continuous(&seq.truncated(m), &config)?.value),
                &grid,
                &seeds,
                Some(g.mutual_information_bits()),
            )?;
            (study.median, "MIR / AMIR estimate of a Gaussian pair")
        }
        (p, e) => return Err(Error::InvalidInput(format!("estimator {e:?} does not apply to {} processes", p.kind()))),
    };
    let mut files = vec![("trace.csv", trace.to_csv())];
    if args.svg {
        files.push(("trace.svg", line_chart(&trace, title)));
    }
    Ok(Outputs { files })
}

fn run_aep(args: &AepArgs) -> Result<Outputs> {
    let Process::Hmm(model) = read_process(&args.process)? else {
        return Err(Error::InvalidInput("aep needs an hmm definition".into()));
    };
    let trace: ConvergenceTrace = aep_log_ratio_trace(&model, args.n, args.seed)?;
    Ok(Outputs { files: vec![("aep.csv", trace.to_csv())] })
}

fn run_bottleneck(args: &BottleneckArgs) -> Result<Outputs> {
    let process = ToyGraphProcess::new(args.nodes, args.flip_p)?;
    let kind = match args.encoder {
        EncoderArg::EdgeCountBucket => GraphEncoderKind::EdgeCountBucket,
        EncoderArg::FixedEdgeProbe => GraphEncoderKind::FixedEdgeProbe(args.probe_edge),
        EncoderArg::IdentityHash => GraphEncoderKind::IdentityHash,
    };
    if let Some(a) = args.alpha {
        if !a.is_finite() {
            return Err(Error::InvalidInput(format!("alpha must be finite, got {a}")));
        }
    }
    let edges = process.edge_count();
    if args.target_edge >= edges {
        return Err(Error::InvalidInput(format!("target edge {} outside 0..{edges}", args.target_edge)));
    }
    let report = bottleneck_experiment(
        &process,
        TargetRule::EdgeIndicator(args.target_edge),
        kind,
        args.n,
        args.seed,
        &EstimatorConfig::plugin(args.memory),
    )?
    .with_alpha(args.alpha);
    Ok(Outputs { files: vec![("report.json", report.to_json() + "\n")] })
}

fn run_sample(args: &SampleArgs) -> Result<Outputs> {
    let process = read_process(&args.process)?;
    let mut csv = String::new();
    match &process {
        Process::Markov(chain) => {
            let s = sample_markov(chain, args.n, args.seed)?;
            csv.push_str("t,x\n");
            for (t, x) in s.values().iter().enumerate() {
                csv.push_str(&format!("{},{x}\n", t + 1));
            }
        }
        Process::MarkovPair(_) | Process::Hmm(_) => {
            let s = match &process {
                Process::MarkovPair(pair) => sample_joint_pair(pair, args.n, args.seed)?,
                Process::Hmm(model) => sample_hidden_pair(model, args.n, args.seed)?,
                _ => unreachable!(),
            };
            csv.push_str("t,x,y\n");
            for (t, (x, y)) in s.x().values().iter().zip(s.y().values()).enumerate() {
                csv.push_str(&format!("{},{x},{y}\n", t + 1));
            }
        }
        Process::Gaussian(g) => {
            let s = sample_gaussian_pair(g, args.n, args.seed)?;
            csv.push_str("t,x,y\n");
            for (t, (x, y)) in s.x().iter().zip(s.y()).enumerate() {
                csv.push_str(&format!("{},{x},{y}\n", t + 1));
            }
        }
        Process::Graph(g) => {
            let s = sample_graph_process(g, args.n, args.seed)?;
            csv.push_str("t,edges\n");
            for (t, e) in s.iter().enumerate() {
                csv.push_str(&format!("{},{}\n", t + 1, e.to_bit_string()));
            }
        }
    }
    Ok(Outputs { files: vec![("sample.csv", csv)] })
}

fn load_manifest(path: &Path) -> Result<RunManifest> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read manifest {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::InvalidInput(format!("manifest {}: {e}", path.display())))
}

fn produce(command: &Command) -> Result<Outputs> {
    match command {
        Command::Exact(a) => run_exact(a),
        Command::Estimate(a) => run_estimate(a),
        Command::Aep(a) => run_aep(a),
        Command::Bottleneck(a) => run_bottleneck(a),
        Command::Sample(a) => run_sample(a),
        Command::Rerun(_) => Err(Error::InvalidInput("a manifest cannot replay another rerun".into())),
    }
}

/// Runs one parsed command, writing primary output to `stdout` when no `--out` is given.
pub fn execute(command: Command, stdout: &mut dyn Write) -> Result<()> {
    let mut command = match command {
        Command::Rerun(r) => {
            let manifest = load_manifest(&r.manifest)?;
            let mut replay = manifest.parameters;
            replay.set_out(Some(r.out.unwrap_or(manifest.output_dir)));
            replay
        }
        other => other,
    };
    if let Some(path) = command.process_file() {
        let absolute = std::fs::canonicalize(path)
            .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
        command.set_process_file(absolute);
    }
    let outputs = produce(&command)?;
    match command.out().map(Path::to_path_buf) {
        None => {
            stdout.write_all(outputs.files[0].1.as_bytes())?;
        }
        Some(dir) => {
            std::fs::create_dir_all(&dir)?;
            for (name, content) in &outputs.files {
                std::fs::write(dir.join(name), content)?;
            }
            let manifest = RunManifest {
                command: command.name().to_string(),
                process_file: command.process_file().map(Path::to_path_buf),
                seed: command.seed(),
                output_dir: dir.clone(),
                parameters: command.clone(),
            };
            let text = serde_json::to_string_pretty(&manifest)? + "\n";
            std::fs::write(dir.join(MANIFEST_FILE), text)?;
            for (name, _) in &outputs.files {
                writeln!(stdout, "{}", dir.join(name).display())?;
            }
        }
    }
    Ok(())
}

/// Parses `args` (including the program name), runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match execute(cli.command, &mut lock) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_increasing_and_ends_at_n() {
        let g = geometric_grid(10, 4000, 12);
        assert_eq!(g.first(), Some(&10));
        assert_eq!(g.last(), Some(&4000));
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(geometric_grid(100, 50, 12), vec![50]);
    }

    #[test]
    fn cli_parses_all_subcommands() {
        for argv in [
            vec!["mirate", "exact", "p.json", "--gap-tolerance", "0.01"],
            vec!["mirate", "estimate", "p.json", "--n", "100", "--grid", "10,50,100", "--estimator", "plugin"],
            vec!["mirate", "aep", "p.json", "--n", "10", "--seed", "3"],
            vec!["mirate", "bottleneck", "--encoder", "fixed-edge-probe", "--probe-edge", "2", "--alpha", "0.1"],
            vec!["mirate", "sample", "p.json", "--out", "d"],
            vec!["mirate", "rerun", "d/manifest.json"],
        ] {
            Cli::try_parse_from(&argv).unwrap_or_else(|e| panic!("{argv:?}: {e}"));
        }
    }

    #[test]
    fn manifest_roundtrip() {
        let Cli { command } = Cli::try_parse_from(["mirate", "estimate", "p.json", "--svg", "--out", "d"]).unwrap();
        let m = RunManifest {
            command: command.name().into(),
            process_file: command.process_file().map(Path::to_path_buf),
            seed: command.seed(),
            output_dir: "d".into(),
            parameters: command.clone(),
        };
        let back: RunManifest = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        let mut expected = command;
        expected.set_out(None);
        assert_eq!(back.parameters, expected);
        assert_eq!(back.seed, Some(DEFAULT_SEED));
    }
}
