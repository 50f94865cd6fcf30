//! `sparsify` command-line tool.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 disconnected input,
//! 3 numerical infeasibility in the selection loop, 4 verification found a
//! rank-deficient sparsifier.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use sparsify_core::graph::generators;
use sparsify_core::select::SelectionTrace;
use sparsify_core::verify::{self, ResistanceOracle};
use sparsify_core::{
    parse_graph, sparsify_graph, sparsify_per_component, Error, Execution, Preset, SelectionOptions,
    WeightedGraph,
};

#[derive(Parser, Debug)]
#[command(name = "sparsify", version, about = "Deterministic spectral sparsification of weighted graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a generated graph in edge-list format.
    Gen {
        #[arg(long = "type", value_enum)]
        kind: GraphKind,
        #[arg(long)]
        n: usize,
        /// Edge probability for random-gnp.
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sparsify a graph and print a metadata record.
    Sparsify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        d: f64,
        #[arg(long, value_enum, default_value_t = PresetArg::Standard)]
        preset: PresetArg,
        #[arg(long)]
        output: PathBuf,
        /// Per-step trace file; enables per-step eigenvalue tracking.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        per_component: bool,
    },
    /// Measure how well SPARSE approximates ORIGINAL.
    Verify {
        #[arg(long)]
        original: PathBuf,
        #[arg(long)]
        sparse: PathBuf,
        /// Random disjoint (S, T) pairs for the mixing check on complete graphs.
        #[arg(long, default_value_t = 100)]
        pairs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print effective resistances.
    Resist {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, num_args = 2, value_names = ["U", "V"])]
        edge: Option<Vec<usize>>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GraphKind {
    Complete,
    RandomGnp,
    Path,
    Star,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PresetArg {
    Standard,
    Simple,
}

impl From<PresetArg> for Preset {
    fn from(p: PresetArg) -> Self {
        match p {
            PresetArg::Standard => Preset::Standard,
            PresetArg::Simple => Preset::Simple,
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Disconnected { .. } => 2,
            Error::Infeasible { .. }
            | Error::BarrierViolation(_)
            | Error::Degenerate(_)
            | Error::ContractViolation(_)
            | Error::NoConvergence { .. }
            | Error::SingularUpdate { .. }
            | Error::NotPositiveDefinite { .. }
            | Error::NotIsotropic { .. } => 3,
            _ => 1,
        };
        Failure::new(code, e.to_string())
    }
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure::new(1, format!("{}: {e}", path.display()))
}

fn read_graph(path: &Path) -> Result<WeightedGraph, Failure> {
    let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
    parse_graph(&text).map_err(|e| Failure::new(1, format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| io_failure(path, e))
}

fn write_trace(path: &Path, trace: &SelectionTrace) -> Result<(), Failure> {
    let file = File::create(path).map_err(|e| io_failure(path, e))?;
    let mut out = BufWriter::new(file);
    trace.write_records(&mut out).map_err(|e| io_failure(path, e))?;
    out.flush().map_err(|e| io_failure(path, e))
}

fn print_records<'a>(records: impl IntoIterator<Item = (&'a str, String)>) {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    for (k, v) in records {
        let _ = writeln!(out, "{k}: {v}");
    }
}

fn run_gen(kind: GraphKind, n: usize, p: Option<f64>, seed: u64, out: &Path) -> Result<(), Failure> {
    if n < 2 {
        return Err(Failure::new(1, "--n must be at least 2"));
    }
    let g = match kind {
        GraphKind::Complete => generators::complete(n),
        GraphKind::Path => generators::path(n),
        GraphKind::Star => generators::star(n),
        GraphKind::RandomGnp => {
            let p = p.ok_or_else(|| Failure::new(1, "--p is required for random-gnp"))?;
            generators::random_gnp(n, p, None, seed)?
        }
    };
    write_file(out, g.to_edge_list().as_bytes())
}

fn run_sparsify(
    input: &Path,
    d: f64,
    preset: Preset,
    output: &Path,
    trace: Option<&Path>,
    per_component: bool,
) -> Result<(), Failure> {
    let g = read_graph(input)?;
    let options = SelectionOptions {
        execution: Execution::Parallel,
        observe_spectrum: trace.is_some(),
    };
    let result = if per_component {
        sparsify_per_component(&g, d, preset, options)
    } else {
        sparsify_graph(&g, d, preset, options)
    };
    let result = match result {
        Ok(r) => r,
        Err(Error::Infeasible { step, trace: partial }) => {
            if let Some(path) = trace {
                write_trace(path, &partial)?;
            }
            return Err(Failure::new(
                3,
                format!("selection became infeasible at step {step}"),
            ));
        }
        Err(Error::Disconnected { components }) => {
            return Err(Failure::new(
                2,
                format!("input graph has {components} connected components; rerun with --per-component"),
            ))
        }
        Err(e) => return Err(e.into()),
    };
    write_file(output, result.graph.to_edge_list().as_bytes())?;
    if let Some(path) = trace {
        write_trace(path, &result.trace)?;
    }
    print_records(result.metadata(&g));
    Ok(())
}

fn run_verify(original: &Path, sparse: &Path, pairs: usize, seed: u64) -> Result<(), Failure> {
    let g = read_graph(original)?;
    let h = read_graph(sparse)?;
    if g.n() != h.n() {
        return Err(Failure::new(
            1,
            format!("vertex counts differ: {} vs {}", g.n(), h.n()),
        ));
    }
    if !g.is_connected() {
        return Err(Failure::new(2, "original graph is disconnected"));
    }
    let report = verify::approximation_ratio_sampled(&g.laplacian(), &h.laplacian(), verify::DEFAULT_SAMPLES, seed)?;
    print_records(report.records());
    if report.kernel_mismatch {
        return Err(Failure::new(4, "sparse graph is rank deficient on the complement of the constant vector"));
    }

    if let Some(c) = g.uniform_complete_weight() {
        // Normalize so that K_n ⪯ H ⪯ κ K_n and use ε = κ − 1.
        let normalized = h.scaled(1.0 / (c * report.lambda_min))?;
        let eps = report.kappa - 1.0;
        let reports = verify::mixing_sample(&normalized, eps, pairs, seed)?;
        let passed = reports.iter().filter(|r| r.ok).count();
        let worst = reports
            .iter()
            .map(|r| if r.bound > 0.0 { r.discrepancy() / r.bound } else { 0.0 })
            .fold(0.0, f64::max);
        let degrees = h.degrees();
        let (v0, min_degree) = degrees
            .iter()
            .copied()
            .enumerate()
            .min_by_key(|&(_, deg)| deg)
            .expect("at least two vertices");
        let bound = verify::degree_lower_bound(&h, v0)?;
        print_records([
            ("mixing_eps", eps.to_string()),
            ("mixing_pairs", reports.len().to_string()),
            ("mixing_passed", passed.to_string()),
            ("mixing_worst_ratio", worst.to_string()),
            ("min_degree_vertex", v0.to_string()),
            ("min_degree", min_degree.to_string()),
            ("degree_lower_bound", bound.to_string()),
        ]);
    }
    Ok(())
}

fn run_resist(input: &Path, edge: Option<&[usize]>) -> Result<(), Failure> {
    let g = read_graph(input)?;
    let oracle = ResistanceOracle::new(&g)?;
    match edge {
        Some(&[u, v]) => {
            let r = oracle.pair(u, v)?;
            print_records([("effective_resistance", r.to_string())]);
        }
        Some(_) => return Err(Failure::new(1, "--edge takes exactly two vertex ids")),
        None => {
            let stdout = io::stdout();
            let mut out = stdout.lock();
            let mut total = 0.0;
            for e in g.edges() {
                let r = oracle.pair(e.u, e.v)?;
                total += e.w * r;
                let _ = writeln!(out, "{} {} {} {} {}", e.u, e.v, e.w, r, e.w * r);
            }
            let _ = writeln!(out, "total: {total}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Gen { kind, n, p, seed, out } => run_gen(*kind, *n, *p, *seed, out),
        Command::Sparsify {
            input,
            d,
            preset,
            output,
            trace,
            per_component,
        } => run_sparsify(input, *d, (*preset).into(), output, trace.as_deref(), *per_component),
        Command::Verify {
            original,
            sparse,
            pairs,
            seed,
        } => run_verify(original, sparse, *pairs, *seed),
        Command::Resist { input, edge } => run_resist(input, edge.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
