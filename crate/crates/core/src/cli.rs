//! Command-line front end: `gen`, `bound`, `rihaczek` and `oracle`.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 numerical failure
//! (non-convergence, failed invariant, bound violation).

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::bounds::{BoundError, SortedMagnitudes, Variant};
use crate::graph::{random_graph, ring_graph, Graph, GraphError};
use crate::oracle::{exhaustive_report, randomized_report, OracleError, MAX_EXHAUSTIVE_N};
use crate::rihaczek::{rihaczek, Convention, RihaczekError};
use crate::spectral::{dft_basis, eig_sym, GraphSignal, SpectralBasis, SpectralError};

/// Largest dimension processed without `--allow-slow`.
pub const DEFAULT_SIZE_CAP: usize = 2000;
/// Tolerance of the energy check in `rihaczek`.
pub const ENERGY_CHECK_TOL: f64 = 1e-8;

#[derive(Debug, Parser)]
#[command(name = "graph-uncertainty", version, about = "Support uncertainty bounds and Rihaczek distributions for graph signals")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalOpts {
    /// Edge-list file
    #[arg(long, global = true, value_name = "PATH", conflicts_with_all = ["gen", "dft"])]
    graph: Option<PathBuf>,
    /// Generator spec: ring:N, ring:N:chord=U,V,W or random:N,P,SEED
    #[arg(long, global = true, value_name = "SPEC", conflicts_with = "dft")]
    gen: Option<String>,
    /// Use the N-point DFT basis instead of a graph
    #[arg(long, global = true, value_name = "N")]
    dft: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = VariantArg::Both)]
    variant: VariantArg,
    /// Output file (standard output when omitted)
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long = "eig-tol", global = true, default_value_t = crate::spectral::DEFAULT_EIG_TOL)]
    eig_tol: f64,
    #[arg(long = "rank-tol", global = true, default_value_t = crate::oracle::DEFAULT_RANK_TOL)]
    rank_tol: f64,
    /// Permit dimensions above the default size cap
    #[arg(long = "allow-slow", global = true)]
    allow_slow: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    Squared,
    Linear,
    Both,
}

impl VariantArg {
    fn variants(self) -> Vec<Variant> {
        match self {
            VariantArg::Squared => vec![Variant::Squared],
            VariantArg::Linear => vec![Variant::Linear],
            VariantArg::Both => Variant::BOTH.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ConventionArg {
    Graph,
    Classical,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a generated graph as an edge list
    Gen { spec: String },
    /// Classical and improved support bounds as JSON
    Bound,
    /// Rihaczek distribution of a signal as CSV
    Rihaczek {
        /// Signal file: one real value per vertex, whitespace separated
        #[arg(long, value_name = "PATH")]
        signal: PathBuf,
        #[arg(long, value_enum, default_value_t = ConventionArg::Graph)]
        convention: ConventionArg,
        /// JSON report with energy and marginals
        #[arg(long, value_name = "PATH")]
        report: Option<PathBuf>,
    },
    /// Brute-force verification of the bounds
    Oracle {
        /// Enumerate all support pairs (dimension at most 8)
        #[arg(long, conflicts_with = "trials")]
        exhaustive: bool,
        /// Number of random sparse signals
        #[arg(long)]
        trials: Option<usize>,
    },
}

/// Command failures, each mapped to an exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<SpectralError> for CliError {
    fn from(e: SpectralError) -> Self {
        match e {
            SpectralError::NoConvergence { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<BoundError> for CliError {
    fn from(e: BoundError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<RihaczekError> for CliError {
    fn from(e: RihaczekError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Bound(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

/// Parses a generator spec: `ring:N`, `ring:N:chord=U,V,W` or `random:N,P,SEED`.
pub fn parse_gen_spec(spec: &str) -> Result<Graph, CliError> {
    let bad = |why: &str| CliError::Usage(format!("malformed generator spec {spec:?}: {why}"));
    let (kind, rest) = spec.split_once(':').ok_or_else(|| bad("missing ':'"))?;
    match kind {
        "ring" => {
            let mut parts = rest.splitn(2, ':');
            let n: usize = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad("expected ring:N"))?;
            let ring = ring_graph(n, false)?;
            match parts.next() {
                None => Ok(ring),
                Some(chord) => {
                    let fields = chord
                        .strip_prefix("chord=")
                        .ok_or_else(|| bad("expected chord=U,V,W"))?;
                    let f: Vec<&str> = fields.split(',').collect();
                    if f.len() != 3 {
                        return Err(bad("chord needs U,V,W"));
                    }
                    let u = f[0].parse().map_err(|_| bad("bad chord vertex"))?;
                    let v = f[1].parse().map_err(|_| bad("bad chord vertex"))?;
                    let w = f[2].parse().map_err(|_| bad("bad chord weight"))?;
                    Ok(ring.add_chord(u, v, w)?)
                }
            }
        }
        "random" => {
            let f: Vec<&str> = rest.split(',').collect();
            if f.len() != 3 {
                return Err(bad("expected random:N,P,SEED"));
            }
            let n = f[0].parse().map_err(|_| bad("bad vertex count"))?;
            let p = f[1].parse().map_err(|_| bad("bad probability"))?;
            let seed = f[2].parse().map_err(|_| bad("bad seed"))?;
            Ok(random_graph(n, p, seed)?)
        }
        _ => Err(bad("unknown generator")),
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

/// Reads a real-valued signal: whitespace-separated numbers, `#` starts a comment.
pub fn parse_signal(text: &str) -> Result<GraphSignal, CliError> {
    let mut values = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let content = line.split('#').next().unwrap_or("");
        for token in content.split_whitespace() {
            let v: f64 = token
                .parse()
                .map_err(|_| CliError::Usage(format!("signal line {}: bad value {token:?}", idx + 1)))?;
            values.push(v);
        }
    }
    Ok(GraphSignal::from_real(&values))
}

fn check_size(n: usize, opts: &GlobalOpts) -> Result<(), CliError> {
    if n > DEFAULT_SIZE_CAP && !opts.allow_slow {
        return Err(CliError::Usage(format!(
            "dimension {n} exceeds the default cap of {DEFAULT_SIZE_CAP}; pass --allow-slow"
        )));
    }
    Ok(())
}

fn load_basis(opts: &GlobalOpts) -> Result<SpectralBasis, CliError> {
    if [opts.eig_tol, opts.rank_tol].iter().any(|t| t.is_nan() || *t <= 0.0) {
        return Err(CliError::Usage("tolerances must be positive".into()));
    }
    let graph = match (&opts.graph, &opts.gen, opts.dft) {
        (_, _, Some(n)) => {
            check_size(n, opts)?;
            return Ok(dft_basis(n)?);
        }
        (Some(path), _, _) => {
            Graph::from_edge_list(&read_file(path)?).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?
        }
        (_, Some(spec), _) => parse_gen_spec(spec)?,
        _ => return Err(CliError::Usage("one of --graph, --gen or --dft is required".into())),
    };
    check_size(graph.n(), opts)?;
    if graph.is_directed() {
        return Err(CliError::Usage(
            "directed graphs have no symmetric Laplacian; use --dft for the directed ring".into(),
        ));
    }
    Ok(eig_sym(&graph.laplacian(), opts.eig_tol)?)
}

fn emit(out: &Option<PathBuf>, stdout: &mut dyn Write, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display()))),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Usage(format!("cannot write output: {e}"))),
    }
}

fn with_newline(mut s: String) -> String {
    s.push('\n');
    s
}

fn cmd_gen(spec: &str, opts: &GlobalOpts, stdout: &mut dyn Write) -> Result<(), CliError> {
    let g = parse_gen_spec(spec)?;
    emit(&opts.out, stdout, &g.to_edge_list())
}

fn cmd_bound(opts: &GlobalOpts, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let basis = load_basis(opts)?;
    let sorted = SortedMagnitudes::from_basis(&basis)?;
    let mut reports = Vec::new();
    for variant in opts.variant.variants() {
        let r = sorted.report(basis.n(), variant)?;
        if !r.terminated {
            return Err(CliError::Numerical(format!("{} iteration did not reach a fixed point", variant.name())));
        }
        let _ = writeln!(
            stderr,
            "n={} classical_q={:.10} ({:.4}) improved_q[{}]={:.10} ({:.4}) sum_bound={:.10} iterations={}",
            r.n,
            r.classical_q,
            r.classical_q,
            variant.name(),
            r.improved_q,
            r.improved_q,
            r.sum_bound,
            r.iterations.len()
        );
        reports.push(r.to_json_value());
    }
    let doc = if reports.len() == 1 {
        reports.pop().expect("one report")
    } else {
        serde_json::Value::Array(reports)
    };
    emit(&opts.out, stdout, &with_newline(serde_json::to_string_pretty(&doc).expect("json")))
}

#[derive(Serialize)]
struct RihaczekReport {
    n: usize,
    convention: Convention,
    scale: f64,
    energy: f64,
    energy_imag: f64,
    vertex_marginal_residual: f64,
    spectral_marginal_residual: f64,
    l1_norm: f64,
    l1_upper_bound: f64,
    vertex_marginal: Vec<f64>,
    spectral_marginal: Vec<f64>,
}

fn cmd_rihaczek(
    opts: &GlobalOpts,
    signal: &Path,
    convention: ConventionArg,
    report: &Option<PathBuf>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), CliError> {
    let basis = load_basis(opts)?;
    let x = parse_signal(&read_file(signal)?)?;
    if x.len() != basis.n() {
        return Err(CliError::Usage(format!(
            "signal has {} values but the basis has dimension {}",
            x.len(),
            basis.n()
        )));
    }
    let convention = match convention {
        ConventionArg::Graph => Convention::Graph,
        ConventionArg::Classical => Convention::Classical,
    };
    let d = rihaczek(&basis, &x, convention)?;
    let total = d.total();
    let (vres, sres) = d.marginal_residuals();
    let summary = RihaczekReport {
        n: d.n(),
        convention,
        scale: d.scale(),
        energy: total.re,
        energy_imag: total.im,
        vertex_marginal_residual: vres,
        spectral_marginal_residual: sres,
        l1_norm: d.l1_norm(),
        l1_upper_bound: d.l1_upper_bound(),
        vertex_marginal: d.vertex_marginal().0.iter().map(|z| z.re).collect(),
        spectral_marginal: d.spectral_marginal().0.iter().map(|z| z.re).collect(),
    };
    emit(&opts.out, stdout, &d.to_csv())?;
    if let Some(path) = report {
        let json = with_newline(serde_json::to_string_pretty(&summary).expect("json"));
        fs::write(path, json).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
    }
    let _ = writeln!(
        stderr,
        "energy {:.10} marginal residuals {:.3e} {:.3e} l1 {:.10}",
        summary.energy, vres, sres, summary.l1_norm
    );
    if (total - 1.0).norm() > ENERGY_CHECK_TOL {
        return Err(CliError::Numerical(format!(
            "energy check failed: total {:.10}{:+.10}i",
            total.re, total.im
        )));
    }
    Ok(())
}

fn cmd_oracle(
    opts: &GlobalOpts,
    exhaustive: bool,
    trials: Option<usize>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), CliError> {
    let basis = load_basis(opts)?;
    let report = if exhaustive {
        if basis.n() > MAX_EXHAUSTIVE_N {
            return Err(CliError::Usage(format!(
                "exhaustive mode supports dimension at most {MAX_EXHAUSTIVE_N}, got {}",
                basis.n()
            )));
        }
        exhaustive_report(&basis, opts.rank_tol, opts.seed)?
    } else {
        randomized_report(&basis, trials.unwrap_or(1000), opts.seed)?
    };
    emit(
        &opts.out,
        stdout,
        &with_newline(serde_json::to_string_pretty(&report).expect("json")),
    )?;
    let _ = writeln!(
        stderr,
        "n={} min_product={} bound_squared={:.10} bound_linear={:.10} violations={}",
        report.n, report.min_feasible_product, report.bound_squared, report.bound_linear, report.violations
    );
    if report.violations > 0 {
        return Err(CliError::Numerical(format!("{} bound violations", report.violations)));
    }
    Ok(())
}

/// Runs the tool on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    1
                }
            };
        }
    };
    let opts = &cli.global;
    let result = match &cli.command {
        Command::Gen { spec } => cmd_gen(spec, opts, stdout),
        Command::Bound => cmd_bound(opts, stdout, stderr),
        Command::Rihaczek {
            signal,
            convention,
            report,
        } => cmd_rihaczek(opts, signal, *convention, report, stdout, stderr),
        Command::Oracle { exhaustive, trials } => cmd_oracle(opts, *exhaustive, *trials, stdout, stderr),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gen_specs() {
        assert_eq!(parse_gen_spec("ring:4").unwrap().edges().len(), 4);
        let g = parse_gen_spec("ring:10:chord=4,9,0.5").unwrap();
        assert_eq!(g.edges().len(), 11);
        assert!(g.has_edge(9, 4));
        assert_eq!(parse_gen_spec("random:8,1.0,1").unwrap().edges().len(), 28);
        for bad in ["ring", "ring:x", "ring:4:chord=1,2", "ring:4:cord=0,2,1", "random:8,0.5", "star:4", "ring:2"] {
            assert!(matches!(parse_gen_spec(bad), Err(CliError::Usage(_))), "{bad}");
        }
    }

    #[test]
    fn signal_parsing() {
        let s = parse_signal("1 2.5\n# note\n-3 # tail\n").unwrap();
        assert_eq!(s, GraphSignal::from_real(&[1.0, 2.5, -3.0]));
        assert!(parse_signal("1 x").is_err());
    }

    #[test]
    fn usage_errors_exit_one() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(run(["gu", "bound"], &mut out, &mut err), 1);
        assert_eq!(run(["gu", "bogus"], &mut out, &mut err), 1);
        assert_eq!(run(["gu", "bound", "--dft", "4", "--gen", "ring:4"], &mut out, &mut err), 1);
        assert_eq!(run(["gu", "bound", "--dft", "2001"], &mut out, &mut err), 1);
        assert_eq!(run(["gu", "oracle", "--dft", "9", "--exhaustive"], &mut out, &mut err), 1);
        assert_eq!(run(["gu", "--help"], &mut out, &mut err), 0);
    }
}
