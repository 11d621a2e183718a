//! Command-line front end.
//!
//! Exit codes: 0 success, 1 argument/parse/IO problem, 2 not
//! distance-regular, 3 no Q-polynomial ordering, 4 not q-Racah, 5 non-thin
//! module, 6 certification residual over tolerance.  Multi-attempt runs that
//! never fully succeed exit with the code of the attempt that got furthest.

use anyhow::{bail, Context, Result};
use awgraph::graph::{generate_family, load_graph, Family, Graph, InputFormat};
use awgraph::pipeline::{
    analyze, modules_run, qracah_run, spectrum_run, PipelineConfig, StageFailure,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::io::{self, Write};
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Parser)]
#[command(
    name = "awgraph",
    version,
    about = "Certify the Askey-Wilson algebra structure carried by a distance-regular graph of q-Racah type"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline and emit certification reports
    Analyze(RunArgs),
    /// Eigenvalues, multiplicities, Krein check, and Q-polynomial orderings
    Spectrum(RunArgs),
    /// Irreducible module inventory at the base vertex
    Modules(RunArgs),
    /// q-Racah parameterization of the eigenvalue sequences
    Qracah(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Generate a built-in family graph
    #[arg(long, value_enum, requires = "size", conflicts_with = "input")]
    family: Option<FamilyArg>,
    /// Size parameter of the family (vertex count for cycles, half-size for
    /// crowns, matrix order for hadamard, dimension for hypercube)
    #[arg(long)]
    size: Option<usize>,
    /// Read the graph from a file instead
    #[arg(long)]
    input: Option<PathBuf>,
    /// Format of the input file
    #[arg(long, value_enum, default_value_t = FormatInArg::Edgelist)]
    format_in: FormatInArg,
    /// Base vertex, or "all" to sweep every vertex
    #[arg(long, default_value = "0")]
    vertex: VertexArg,
    /// Relative residual tolerance (default 1e-8; env AWGRAPH_TOL overrides
    /// the default, the flag overrides both)
    #[arg(long)]
    tol: Option<f64>,
    /// Seed for the randomized module decomposition
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output format
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
    /// Which branch of the base q to use
    #[arg(long, value_enum, default_value_t = QBranchArg::Canonical)]
    q_branch: QBranchArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Cycle,
    Crown,
    Hadamard,
    Hypercube,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Family {
        match f {
            FamilyArg::Cycle => Family::Cycle,
            FamilyArg::Crown => Family::Crown,
            FamilyArg::Hadamard => Family::Hadamard,
            FamilyArg::Hypercube => Family::Hypercube,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatInArg {
    Edgelist,
    Dense,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum FormatArg {
    Json,
    Text,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum QBranchArg {
    Canonical,
    All,
}

#[derive(Clone, Copy)]
enum VertexArg {
    All,
    One(usize),
}

impl FromStr for VertexArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("all") {
            Ok(VertexArg::All)
        } else {
            s.parse::<usize>()
                .map(VertexArg::One)
                .map_err(|_| format!("expected a vertex index or \"all\", got {s:?}"))
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<i32> {
    let args = match &cli.command {
        Command::Analyze(a) | Command::Spectrum(a) | Command::Modules(a) | Command::Qracah(a) => a,
    };
    let graph = build_graph(args)?;
    let cfg = PipelineConfig {
        tol: resolve_tol(args.tol)?,
        seed: args.seed,
        q_branch_all: args.q_branch == QBranchArg::All,
    };
    let vertices = resolve_vertices(args.vertex, graph.n())?;

    match cli.command {
        Command::Analyze(ref a) => {
            let outcome = analyze(&graph, &vertices, &cfg);
            print_failures(&outcome.failures);
            match a.format {
                FormatArg::Json => emit(serde_json::to_string_pretty(&outcome.reports)?),
                FormatArg::Text => {
                    for r in &outcome.reports {
                        emit(r.to_text());
                    }
                }
            }
            Ok(outcome.exit_code())
        }
        Command::Spectrum(ref a) => match spectrum_run(&graph, cfg.tol) {
            Ok(report) => {
                match a.format {
                    FormatArg::Json => emit(report.to_json()),
                    FormatArg::Text => emit(report.to_text()),
                }
                Ok(0)
            }
            Err(f) => {
                eprintln!("{f}");
                Ok(f.exit_code)
            }
        },
        Command::Modules(ref a) => {
            let (reports, failures) = modules_run(&graph, &vertices, &cfg);
            print_failures(&failures);
            match a.format {
                FormatArg::Json => emit(serde_json::to_string_pretty(&reports)?),
                FormatArg::Text => {
                    for r in &reports {
                        emit(r.to_text());
                    }
                }
            }
            Ok(exit_of(!reports.is_empty(), &failures))
        }
        Command::Qracah(ref a) => {
            let (reports, failures) = qracah_run(&graph, &vertices, &cfg);
            print_failures(&failures);
            match a.format {
                FormatArg::Json => emit(serde_json::to_string_pretty(&reports)?),
                FormatArg::Text => {
                    for r in &reports {
                        emit(r.to_text());
                    }
                }
            }
            Ok(exit_of(!reports.is_empty(), &failures))
        }
    }
}

fn exit_of(succeeded: bool, failures: &[StageFailure]) -> i32 {
    if succeeded {
        0
    } else {
        failures.iter().map(|f| f.exit_code).max().unwrap_or(0)
    }
}

fn print_failures(failures: &[StageFailure]) {
    for f in failures {
        eprintln!("{f}");
    }
}

/// Writes one line of report output, exiting quietly when the consumer has
/// closed the pipe (`awgraph ... | head` must not panic).
fn emit(text: impl std::fmt::Display) {
    let mut out = io::stdout().lock();
    if let Err(e) = writeln!(out, "{text}") {
        if e.kind() == io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("error: cannot write to stdout: {e}");
        std::process::exit(1);
    }
}

fn build_graph(args: &RunArgs) -> Result<Graph> {
    match (&args.family, &args.input) {
        (Some(family), None) => {
            let size = args.size.context("--family requires --size")?;
            generate_family((*family).into(), size).map_err(|e| anyhow::anyhow!("{e}"))
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let format = match args.format_in {
                FormatInArg::Edgelist => InputFormat::EdgeList,
                FormatInArg::Dense => InputFormat::Dense,
            };
            let mut graph = load_graph(&text, format)
                .with_context(|| format!("parsing {}", path.display()))?;
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string());
            graph.set_name(name);
            Ok(graph)
        }
        (None, None) => bail!("provide either --family with --size, or --input"),
        (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
    }
}

// negated comparison so that a NaN tolerance is rejected too
#[allow(clippy::neg_cmp_op_on_partial_ord)]
fn resolve_tol(flag: Option<f64>) -> Result<f64> {
    let tol = match flag {
        Some(t) => t,
        None => match std::env::var("AWGRAPH_TOL") {
            Ok(s) => s
                .trim()
                .parse::<f64>()
                .with_context(|| format!("AWGRAPH_TOL={s:?} is not a number"))?,
            Err(_) => 1e-8,
        },
    };
    if !(tol > 0.0) {
        bail!("tolerance must be positive, got {tol}");
    }
    Ok(tol)
}

fn resolve_vertices(vertex: VertexArg, n: usize) -> Result<Vec<usize>> {
    match vertex {
        VertexArg::All => Ok((0..n).collect()),
        VertexArg::One(v) => {
            if v >= n {
                bail!("vertex {v} out of range for a graph on {n} vertices");
            }
            Ok(vec![v])
        }
    }
}
