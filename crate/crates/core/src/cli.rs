//! Command-line front end.
//!
//! Exit codes are stable:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 2 | usage error |
//! | 3 | I/O, parse or invalid-instance error |
//! | 4 | no flow of the target value exists |
//! | 5 | no flow survives the loss of the failable edge |
//! | 6 | a solver node, time or iteration limit was hit |
//! | 7 | verification found a failed check |
//! | 8 | the instance is too large for the oracle |
//! | 9 | internal inconsistency between solver stages |

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use thiserror::Error;

use crate::ccs::{
    annualize_costs, nevada_like, parse_cid, random_cid, reduce_cid_to_fcnf, NevadaLikeParams, RandomCidParams,
};
use crate::formulation::{base_fcnf_model, PairedModelOptions, RepairLink};
use crate::generate::{demo_network, random_network, RandomNetworkParams};
use crate::milp::{export_lp, solve, SolveStatus, SolverConfig};
use crate::network::FlowNetwork;
use crate::oracle::{OracleError, DEFAULT_EDGE_CAP};
use crate::pareto::{pareto_front, ParetoError, ParetoFront, ParetoSettings};
use crate::verify::verify_front;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_NO_FLOW: i32 = 4;
pub const EXIT_NO_REPAIR: i32 = 5;
pub const EXIT_LIMIT: i32 = 6;
pub const EXIT_VERIFY_FAILED: i32 = 7;
pub const EXIT_ORACLE_REFUSED: i32 = 8;
pub const EXIT_INTERNAL: i32 = 9;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{0}")]
    Usage(String),
    #[error("no flow of the target value exists")]
    Infeasible,
    #[error("solver limit reached: {0}")]
    Limit(String),
    #[error(transparent)]
    Pareto(#[from] ParetoError),
    #[error("{0} verification check(s) failed")]
    VerifyFailed(usize),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Parse { .. } => EXIT_IO,
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Infeasible | CliError::Pareto(ParetoError::NoFlow) => EXIT_NO_FLOW,
            CliError::Pareto(ParetoError::NoRepair) => EXIT_NO_REPAIR,
            CliError::Limit(_) | CliError::Pareto(ParetoError::Limit { .. } | ParetoError::IterationCap(_)) => {
                EXIT_LIMIT
            }
            CliError::Pareto(ParetoError::BadEpsilon(_)) => EXIT_USAGE,
            CliError::Pareto(_) | CliError::Internal(_) => EXIT_INTERNAL,
            CliError::VerifyFailed(_) => EXIT_VERIFY_FAILED,
            CliError::Oracle(OracleError::TooLarge { .. }) => EXIT_ORACLE_REFUSED,
            CliError::Oracle(_) => EXIT_IO,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

/// Everything one command needs, after merging flags with the optional
/// config file.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input: PathBuf,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
    pub epsilon: Option<f64>,
    pub solver: SolverConfig,
    pub seed: u64,
    pub lock_capture: bool,
    pub repair_link: RepairLink,
}

impl RunConfig {
    pub fn new(input: impl Into<PathBuf>) -> Self {
        Self {
            input: input.into(),
            output: None,
            format: OutputFormat::Json,
            epsilon: None,
            solver: SolverConfig::default(),
            seed: 0,
            lock_capture: false,
            repair_link: RepairLink::default(),
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if let Some(e) = self.epsilon {
            if !(e.is_finite() && e > 0.0) {
                return Err(CliError::Usage(format!("--epsilon must be finite and > 0, got {e}")));
            }
        }
        if self.solver.node_limit == 0 {
            return Err(CliError::Usage("--node-limit must be positive".into()));
        }
        if let Some(t) = self.solver.time_limit {
            if !(t.is_finite() && t > 0.0) {
                return Err(CliError::Usage(format!("--time-limit must be finite and > 0, got {t}")));
            }
        }
        Ok(())
    }

    fn settings(&self) -> ParetoSettings {
        ParetoSettings {
            epsilon: self.epsilon,
            link: self.repair_link,
            solver: self.solver.clone(),
            ..ParetoSettings::default()
        }
    }
}

/// Contents of a `--config` file (TOML, or JSON when the name ends in
/// `.json`). Command-line flags take precedence.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub solver: SolverConfig,
    pub epsilon: Option<f64>,
    pub repair_link: Option<RepairLink>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = read(path)?;
        let parsed = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| e.to_string())
        } else {
            toml::from_str(&text).map_err(|e| e.to_string())
        };
        parsed.map_err(|message| CliError::Parse {
            path: path.to_path_buf(),
            message,
        })
    }
}

#[derive(Debug, Parser)]
#[command(name = "fcnf-failure", version, about = "Fixed-charge flow networks under a single edge failure")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Minimum-cost flow of a network.
    Solve(SolveArgs),
    /// Pareto front between initial flow cost and repaired flow cost.
    Pareto(ParetoArgs),
    /// Reduce a capture-and-storage instance to a flow network.
    Reduce(ReduceArgs),
    /// Cross-check a front against the brute-force oracle.
    #[command(alias = "oracle-check")]
    Verify(VerifyArgs),
    /// Write a seeded synthetic instance.
    Gen(GenArgs),
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// TOML or JSON file with a `[solver]` block, `epsilon` and `repair_link`.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Branch-and-bound node cap per MILP solve.
    #[arg(long)]
    pub node_limit: Option<usize>,
    /// Seconds per MILP solve.
    #[arg(long)]
    pub time_limit: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Network JSON.
    #[arg(long, short)]
    pub input: PathBuf,
    /// Where to write the optimal flow as JSON.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Also write the model in LP format.
    #[arg(long)]
    pub export_lp: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct ParetoArgs {
    /// Network JSON.
    #[arg(long, short)]
    pub input: PathBuf,
    /// Front file to write; standard output when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
    /// Also write the plot-ready CSV here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Minimum drop in repaired cost between points.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Keep initial and repaired flow equal on capture edges: the edges
    /// listed in `--locked-edges`, or else every edge leaving the source.
    #[arg(long)]
    pub lock_capture: bool,
    /// JSON list of edge ids to lock, as written by `reduce --lock-capture`.
    #[arg(long, requires = "lock_capture")]
    pub locked_edges: Option<PathBuf>,
    /// Whether the second stage pins the repaired cost to the first stage's value (equal) or caps it there (at-most, the default).
    #[arg(long, value_enum)]
    pub repair_link: Option<LinkArg>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LinkArg {
    Equal,
    AtMost,
}

impl From<LinkArg> for RepairLink {
    fn from(l: LinkArg) -> Self {
        match l {
            LinkArg::Equal => RepairLink::Equal,
            LinkArg::AtMost => RepairLink::AtMost,
        }
    }
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    /// Capture-and-storage instance JSON.
    #[arg(long, short)]
    pub input: PathBuf,
    /// Network JSON to write.
    #[arg(long, short)]
    pub output: PathBuf,
    /// Also write the capture edge ids next to the output as
    /// `<output>.locked.json`.
    #[arg(long)]
    pub lock_capture: bool,
    /// Multiply variable costs by the project length first.
    #[arg(long)]
    pub annualize: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Network JSON.
    #[arg(long, short)]
    pub input: PathBuf,
    /// Check this front instead of computing one.
    #[arg(long)]
    pub check_file: Option<PathBuf>,
    /// Step size; defaults to 1e-4 of the failure-free cost.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Largest edge count the oracle accepts.
    #[arg(long, default_value_t = DEFAULT_EDGE_CAP)]
    pub oracle_cap: usize,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    /// Small random network.
    Network,
    /// The built-in demo network.
    Demo,
    /// Small random capture-and-storage instance.
    Cid,
    /// Synthetic regional capture-and-storage instance.
    Regional,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum, default_value_t = GenKind::Network)]
    pub kind: GenKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Capture sources of a regional instance.
    #[arg(long, default_value_t = 21)]
    pub sources: usize,
    /// Defaults to standard output.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load_network(path: &Path) -> Result<FlowNetwork, CliError> {
    FlowNetwork::from_json_str(&read(path)?).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn base_config(input: &Path, solver: &SolverArgs) -> Result<RunConfig, CliError> {
    let file = match &solver.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let mut config = RunConfig::new(input);
    config.solver = file.solver;
    config.epsilon = file.epsilon;
    if let Some(link) = file.repair_link {
        config.repair_link = link;
    }
    if let Some(n) = solver.node_limit {
        config.solver.node_limit = n;
    }
    if solver.time_limit.is_some() {
        config.solver.time_limit = solver.time_limit;
    }
    Ok(config)
}

fn fmt6(x: f64) -> String {
    format!("{x:.6}")
}

/// Solves the base model of the input network. Writes the optimal flow as
/// JSON when `config.output` is set, and the model in LP format to
/// `export_lp`.
pub fn cmd_solve(config: &RunConfig, export: Option<&Path>, out: &mut dyn Write) -> Result<(), CliError> {
    config.validate()?;
    let net = load_network(&config.input)?;
    let m = base_fcnf_model(&net).map_err(|e| CliError::Internal(e.to_string()))?;
    if let Some(path) = export {
        write_file(path, &export_lp(&m.model))?;
    }
    let r = solve(&m.model, &config.solver);
    match r.status {
        SolveStatus::Optimal => {}
        SolveStatus::Infeasible => return Err(CliError::Infeasible),
        SolveStatus::IterationLimit => return Err(CliError::Limit("base model".into())),
        SolveStatus::Unbounded => return Err(CliError::Internal("base model reported unbounded".into())),
    }
    let sol = m.vars.extract(&net, r.values.as_deref().expect("optimal has values"));
    if let Some(path) = &config.output {
        let text = serde_json::to_string_pretty(&sol).expect("flow serialization cannot fail") + "\n";
        write_file(path, &text)?;
    }
    let _ = writeln!(out, "status optimal");
    let _ = writeln!(out, "objective {}", fmt6(sol.cost));
    let _ = writeln!(out, "open edges {}", sol.open.len());
    Ok(())
}

fn locked_options(net: &FlowNetwork, lock: bool, list: Option<&Path>) -> Result<PairedModelOptions, CliError> {
    if !lock {
        return Ok(PairedModelOptions::default());
    }
    let edges: BTreeSet<String> = match list {
        Some(path) => serde_json::from_str(&read(path)?).map_err(|e| CliError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?,
        None => {
            let s = net.source_index();
            net.endpoints()
                .iter()
                .zip(net.edges())
                .filter(|((tail, _), _)| *tail == s)
                .map(|(_, e)| e.id.clone())
                .collect()
        }
    };
    Ok(PairedModelOptions::locked(edges))
}

fn render(front: &ParetoFront, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => front.to_json_string(),
        OutputFormat::Csv => front.to_csv(),
    }
}

/// Computes the front of the input network and writes it to
/// `config.output` in `config.format`, plus CSV to `csv` if given.
pub fn cmd_pareto(
    config: &RunConfig,
    locked_edges: Option<&Path>,
    csv: Option<&Path>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    config.validate()?;
    let net = load_network(&config.input)?;
    let opts = locked_options(&net, config.lock_capture, locked_edges)?;
    let front = pareto_front(&net, &opts, &config.settings())?;
    if let Some(path) = &config.output {
        write_file(path, &render(&front, config.format))?;
    }
    if let Some(path) = csv {
        write_file(path, &front.to_csv())?;
    }
    let first = front.points.first().expect("front is nonempty");
    let last = front.points.last().expect("front is nonempty");
    let _ = writeln!(out, "points {}", front.points.len());
    let _ = writeln!(out, "epsilon {}", fmt6(front.epsilon));
    let _ = writeln!(out, "first initial {} repaired {}", fmt6(first.initial_cost), fmt6(first.repaired_cost));
    let _ = writeln!(out, "last initial {} repaired {}", fmt6(last.initial_cost), fmt6(last.repaired_cost));
    Ok(())
}

/// Path of the locked-edge list written next to a reduced network.
pub fn locked_list_path(output: &Path) -> PathBuf {
    let mut name = output.file_stem().unwrap_or_default().to_os_string();
    name.push(".locked.json");
    output.with_file_name(name)
}

/// Reduces a capture-and-storage instance to a network file.
pub fn cmd_reduce(args: &ReduceArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cid = parse_cid(&read(&args.input)?).map_err(|e| CliError::Parse {
        path: args.input.clone(),
        message: e.to_string(),
    })?;
    let cid = if args.annualize { annualize_costs(&cid) } else { cid };
    let r = reduce_cid_to_fcnf(&cid);
    write_file(&args.output, &(r.network.to_json_string() + "\n"))?;
    if args.lock_capture {
        let path = locked_list_path(&args.output);
        let text = serde_json::to_string_pretty(&r.capture_edges).expect("id list serializes") + "\n";
        write_file(&path, &text)?;
        let _ = writeln!(out, "locked edges {} -> {}", r.capture_edges.len(), path.display());
    }
    let _ = writeln!(
        out,
        "vertices {} edges {} failable {}",
        r.network.vertices().len(),
        r.network.edges().len(),
        r.network.failable_edge()
    );
    Ok(())
}

/// Runs every oracle cross-check on a computed or supplied front.
pub fn cmd_verify(
    config: &RunConfig,
    check_file: Option<&Path>,
    oracle_cap: usize,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    config.validate()?;
    let net = load_network(&config.input)?;
    if net.edges().len() > oracle_cap {
        return Err(OracleError::TooLarge {
            edges: net.edges().len(),
            cap: oracle_cap,
        }
        .into());
    }
    let front = match check_file {
        Some(path) => ParetoFront::from_json_str(&read(path)?).map_err(|e| CliError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?,
        None => pareto_front(&net, &PairedModelOptions::default(), &config.settings())?,
    };
    let report = verify_front(&net, &front, oracle_cap)?;
    for c in &report.checks {
        if c.passed {
            let _ = writeln!(out, "PASS {}", c.name);
        } else {
            let _ = writeln!(out, "FAIL {}: {}", c.name, c.detail);
        }
    }
    match report.failed().count() {
        0 => Ok(()),
        n => Err(CliError::VerifyFailed(n)),
    }
}

/// Writes a synthetic instance; all randomness comes from `args.seed`.
pub fn cmd_gen(args: &GenArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let text = match args.kind {
        GenKind::Network => random_network(&mut rng, &RandomNetworkParams::default()).to_json_string(),
        GenKind::Demo => demo_network().to_json_string(),
        GenKind::Cid => random_cid(&mut rng, &RandomCidParams::default()).to_json_string(),
        GenKind::Regional => {
            if args.sources == 0 {
                return Err(CliError::Usage("--sources must be positive".into()));
            }
            let p = NevadaLikeParams {
                sources: args.sources,
                ..NevadaLikeParams::default()
            };
            nevada_like(args.seed, &p).to_json_string()
        }
    } + "\n";
    match &args.output {
        Some(path) => write_file(path, &text),
        None => {
            let _ = out.write_all(text.as_bytes());
            Ok(())
        }
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Solve(a) => {
            let mut config = base_config(&a.input, &a.solver)?;
            config.output = a.output;
            cmd_solve(&config, a.export_lp.as_deref(), out)
        }
        Command::Pareto(a) => {
            let mut config = base_config(&a.input, &a.solver)?;
            config.output = a.output;
            config.format = a.format;
            config.lock_capture = a.lock_capture;
            if a.epsilon.is_some() {
                config.epsilon = a.epsilon;
            }
            if let Some(link) = a.repair_link {
                config.repair_link = link.into();
            }
            cmd_pareto(&config, a.locked_edges.as_deref(), a.csv.as_deref(), out)
        }
        Command::Reduce(a) => cmd_reduce(&a, out),
        Command::Verify(a) => {
            let mut config = base_config(&a.input, &a.solver)?;
            if a.epsilon.is_some() {
                config.epsilon = a.epsilon;
            }
            cmd_verify(&config, a.check_file.as_deref(), a.oracle_cap, out)
        }
        Command::Gen(a) => cmd_gen(&a, out),
    }
}

/// Parses `args` (program name first), runs the command and returns its
/// exit code. Results go to `out`, diagnostics to `err`.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            if code == 0 {
                let _ = write!(out, "{}", e.render());
                return EXIT_OK;
            }
            let _ = write!(err, "{}", e.render());
            return EXIT_USAGE;
        }
    };
    match dispatch(cli, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

/// [`run_with`] on the process's standard streams.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
