//! `pnets`: catalog, evaluate, optimize, classify and verify periodic
//! networks from the command line.
//!
//! Exit codes: 0 success, 1 validation failure (bad input file, invalid
//! network, violated bound), 2 usage error.

use std::fmt::Write as _;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use periodic_nets::balance::forces;
use periodic_nets::bounds::verify;
use periodic_nets::construct::{catalog, summary_table, CatalogParams, CATALOG_NAMES};
use periodic_nets::graph::Multigraph;
use periodic_nets::io::{format_sig, network_from_json, network_to_json, network_to_value, to_json_string};
use periodic_nets::network::PeriodicNetwork;
use periodic_nets::obj::export_obj;
use periodic_nets::optimize::{minimize_topology, OptimizeConfig};
use periodic_nets::topology::{circuit_rank, classify, min_vertex_count, TopologyTag};
use periodic_nets::Error;

#[derive(Parser)]
#[command(name = "pnets", version, about = "Length-minimizing periodic networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print a catalog network as JSON, or list the catalog.
    Catalog {
        #[arg(long)]
        name: Option<String>,
        /// Family parameter (t for cds).
        #[arg(long)]
        param: Option<f64>,
        /// Dimension for pcu, cube_net and simplex_net.
        #[arg(long)]
        dim: Option<usize>,
    },
    /// Length, volume, quotient, forces and validity of a network file.
    Eval { file: PathBuf },
    /// Multistart minimization over all shift labelings of a quotient type.
    Optimize {
        #[arg(long)]
        topology: String,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        restarts: usize,
        #[arg(long, default_value_t = 1)]
        smax: usize,
        #[arg(long, default_value_t = 50_000)]
        max_iter: usize,
        /// Where the best network is written.
        #[arg(long, default_value = "best.json")]
        out: PathBuf,
    },
    /// Quotient type, circuit rank and irreducibility of a network file.
    Classify { file: PathBuf },
    /// Compare a network with the strongest applicable lower bound.
    Verify {
        file: PathBuf,
        /// Print the full report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Length quotients of the minimizers in dimension `dim`.
    Table {
        #[arg(long, default_value_t = 3)]
        dim: usize,
    },
    /// Write a network as Wavefront OBJ and/or JSON.
    Export {
        file: PathBuf,
        #[arg(long)]
        obj: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        cells: usize,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

/// A failed command: usage errors exit with 2, everything else with 1.
enum Failure {
    Usage(String),
    Invalid(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Invalid(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Invalid(e.into())
    }
}

/// Errors caused by option values rather than input data.
fn usage(e: Error) -> Failure {
    match e {
        Error::InvalidParameter(_) | Error::UnknownCatalogName(_) | Error::Unsupported(_) | Error::EnumerationTooLarge(_) => {
            Failure::Usage(e.to_string())
        }
        other => other.into(),
    }
}

fn num(x: f64) -> String {
    format_sig(x, 10)
}

fn read_network(path: &Path) -> anyhow::Result<PeriodicNetwork> {
    let mut text = String::new();
    if path == Path::new("-") {
        std::io::stdin().read_to_string(&mut text).context("reading stdin")?;
    } else {
        text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    }
    network_from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write_file(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn run_catalog(name: Option<String>, param: Option<f64>, dim: Option<usize>) -> Result<String, Failure> {
    let Some(name) = name else {
        let mut out = String::new();
        for name in CATALOG_NAMES {
            let (_, entry) = catalog(name, CatalogParams::default())?;
            let v = &entry.expected_quotient;
            writeln!(out, "{name}\tn={}\td={}\t{}\t{} = {}", entry.dim, entry.degree, entry.topology, v.expr, num(v.value)).unwrap();
        }
        return Ok(out);
    };
    let (net, entry) = catalog(&name, CatalogParams { t: param, dim }).map_err(usage)?;
    let mut doc = network_to_value(&net)?;
    doc["catalog"] = serde_json::to_value(&entry).map_err(Error::from)?;
    Ok(to_json_string(&doc, true)? + "\n")
}

fn run_eval(file: &Path) -> Result<String, Failure> {
    let net = read_network(file)?;
    let report = net.validate();
    let mut out = String::new();
    let n = net.dim();
    writeln!(out, "dim: {n}").unwrap();
    writeln!(out, "vertices: {}", net.graph().vertex_count()).unwrap();
    writeln!(out, "edges: {}", net.graph().edge_count()).unwrap();
    match (net.length(), net.volume()) {
        (Ok(l), Ok(v)) => {
            writeln!(out, "L: {}", num(l)).unwrap();
            writeln!(out, "V: {}", num(v)).unwrap();
            writeln!(out, "L^{n}/V: {}", num(l.powi(n as i32) / v)).unwrap();
        }
        (l, v) => {
            let e = l.err().or(v.err()).expect("one measure failed");
            writeln!(out, "measures: {e}").unwrap();
        }
    }
    if let Ok(f) = forces(&net) {
        for (i, x) in f.forces.iter().enumerate() {
            writeln!(out, "force[{i}]: {}", num(x.norm())).unwrap();
        }
    }
    writeln!(out, "degree: {}", report.degree.map_or("irregular".into(), |d| d.to_string())).unwrap();
    writeln!(out, "lattice rank: {}", report.lattice_rank).unwrap();
    writeln!(out, "invariant factors: {:?}", report.invariant_factors).unwrap();
    writeln!(out, "valid: {}", report.is_valid()).unwrap();
    for v in &report.violations {
        writeln!(out, "violation: {v}").unwrap();
    }
    if !report.is_valid() {
        print!("{out}");
        return Err(Failure::Invalid(anyhow::anyhow!("network is not valid")));
    }
    Ok(out)
}

struct OptimizeArgs {
    topology: String,
    dim: usize,
    seed: u64,
    restarts: usize,
    smax: usize,
    max_iter: usize,
    out: PathBuf,
}

fn run_optimize(a: OptimizeArgs) -> Result<String, Failure> {
    let tag: TopologyTag = a.topology.parse().map_err(usage)?;
    let cfg = OptimizeConfig { seed: a.seed, restarts: a.restarts, s_max: a.smax, max_iter: a.max_iter, ..Default::default() };
    cfg.check().map_err(usage)?;
    let r = minimize_topology(tag, a.dim, &cfg).map_err(usage)?;
    write_file(&a.out, &(network_to_json(&r.best)? + "\n"))?;
    let trace = &r.traces[r.best_index];
    let mut out = String::new();
    writeln!(out, "topology: {}", tag.normalized()).unwrap();
    writeln!(out, "dim: {}", a.dim).unwrap();
    writeln!(out, "classes: {}", r.classes).unwrap();
    writeln!(out, "runs: {}", r.traces.len()).unwrap();
    writeln!(out, "best value: {}", num(r.best_value)).unwrap();
    writeln!(out, "best run: class {} restart {}", trace.class, trace.restart).unwrap();
    writeln!(out, "termination: {}", serde_json::to_value(r.best_termination).map_err(Error::from)?.as_str().unwrap_or("")).unwrap();
    writeln!(out, "iterations: {}", trace.iterations).unwrap();
    writeln!(out, "network: {}", a.out.display()).unwrap();
    Ok(out)
}

fn run_classify(file: &Path) -> Result<String, Failure> {
    let net = read_network(file)?;
    let g = net.graph();
    let class = classify(g)?;
    let n = net.dim();
    let mut out = String::new();
    writeln!(out, "topology: {}", class.tag).unwrap();
    writeln!(out, "vertices: {}", class.vertex_count).unwrap();
    writeln!(out, "degree: {}", class.degree).unwrap();
    writeln!(out, "circuit rank: {}", circuit_rank(g)?).unwrap();
    writeln!(out, "lattice rank: {}", g.lattice_rank()?).unwrap();
    if class.degree > n {
        let (count, admissible) = min_vertex_count(n, class.degree)?;
        let tags: Vec<String> = admissible.iter().map(|c| c.tag.to_string()).collect();
        writeln!(out, "minimum vertex count: {count}").unwrap();
        writeln!(out, "irreducible types: {}", tags.join(" ")).unwrap();
        let irreducible = class.vertex_count == count && admissible.iter().any(|c| c.tag == class.tag);
        writeln!(out, "irreducible: {irreducible}").unwrap();
    } else {
        writeln!(out, "irreducible: no types for degree {} <= dimension {n}", class.degree).unwrap();
    }
    Ok(out)
}

fn run_verify(file: &Path, json: bool) -> Result<String, Failure> {
    let net = read_network(file)?;
    let r = verify(&net)?;
    let out = if json {
        to_json_string(&r, true)? + "\n"
    } else {
        let mut out = String::new();
        writeln!(out, "topology: {}", r.topology).unwrap();
        writeln!(out, "measured: {}", num(r.measured)).unwrap();
        if let (Some(th), Some(b), Some(s)) = (&r.theorem, &r.bound, r.slack) {
            writeln!(out, "bound: {} = {} ({})", b.expr, num(b.value), th).unwrap();
            writeln!(out, "strict: {}", r.strict).unwrap();
            writeln!(out, "slack: {}", num(s)).unwrap();
        }
        if let Some(c) = &r.equality_certificate {
            writeln!(out, "certificate: {} {}", c.kind, if c.passed { "passed" } else { "failed" }).unwrap();
            for check in &c.checks {
                writeln!(out, "  {}: {}", check.name, num(check.residual)).unwrap();
            }
        }
        if let Some(note) = &r.note {
            writeln!(out, "note: {note}").unwrap();
        }
        writeln!(out, "violation: {}", r.violation).unwrap();
        out
    };
    if r.violation {
        print!("{out}");
        return Err(Failure::Invalid(anyhow::anyhow!("measured value contradicts the bound")));
    }
    Ok(out)
}

fn run_table(dim: usize) -> Result<String, Failure> {
    let rows = summary_table(dim).map_err(usage)?;
    let mut out = String::from("name\td\ttopology\tquotient\troot\tpercent\n");
    for r in rows {
        writeln!(out, "{}\t{}\t{}\t{}\t{}\t{}", r.name, r.degree, r.topology, num(r.quotient), num(r.root), num(r.percent)).unwrap();
    }
    Ok(out)
}

fn run_export(file: &Path, obj: Option<PathBuf>, cells: usize, json: Option<PathBuf>) -> Result<String, Failure> {
    if obj.is_none() && json.is_none() {
        return Err(Failure::Usage("export needs --obj and/or --json".into()));
    }
    let net = read_network(file)?;
    let mut out = String::new();
    if let Some(path) = obj {
        let text = export_obj(&net, cells).map_err(usage)?;
        write_file(&path, &text)?;
        writeln!(out, "obj: {}", path.display()).unwrap();
    }
    if let Some(path) = json {
        write_file(&path, &(network_to_json(&net)? + "\n"))?;
        writeln!(out, "json: {}", path.display()).unwrap();
    }
    Ok(out)
}

fn run(cmd: Command) -> Result<String, Failure> {
    match cmd {
        Command::Catalog { name, param, dim } => run_catalog(name, param, dim),
        Command::Eval { file } => run_eval(&file),
        Command::Optimize { topology, dim, seed, restarts, smax, max_iter, out } => {
            run_optimize(OptimizeArgs { topology, dim, seed, restarts, smax, max_iter, out })
        }
        Command::Classify { file } => run_classify(&file),
        Command::Verify { file, json } => run_verify(&file, json),
        Command::Table { dim } => run_table(dim),
        Command::Export { file, obj, cells, json } => run_export(&file, obj, cells, json),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Invalid(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
