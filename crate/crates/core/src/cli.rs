//! The `fmatch` command line.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::blocking::{certify, solve_from, Certificate, PhaseStats, SolveOptions};
use crate::blossom::Report;
use crate::eg::{expected_cross_trail, generate_eg, verify_eg};
use crate::graph::{parse_graph, parse_matching, write_graph, write_matching, DegreeBound, Matching, Multigraph};
use crate::oracle::{
    bipartite_flow_oracle, bound_check, brute_force_max_f_matching, check_sat_monotonicity,
    remaining_augmentations_check,
};
use crate::petalevel::{audit_phase, PhaseAudit};
use crate::random::{random_instance, RandomParams};
use crate::search::{debug_assert_env, f_matching_search, SearchOptions};

#[derive(Parser, Debug)]
#[command(name = "fmatch", version, about = "Maximum cardinality f-matching on multigraphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve an instance and report phase statistics.
    Solve {
        file: PathBuf,
        /// Start from this matching instead of the empty one.
        #[arg(long)]
        initial: Option<PathBuf>,
        /// Ignore a `<stem>.m0` file next to the graph.
        #[arg(long)]
        no_initial: bool,
        #[arg(long)]
        stats: Option<PathBuf>,
        #[arg(long)]
        certify: bool,
        #[arg(long)]
        matching: Option<PathBuf>,
        /// Write the step log of the first search as JSON.
        #[arg(long)]
        trace_search: Option<PathBuf>,
    },
    /// Maximum cardinality by an independent method, compared to the solver.
    Oracle {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Brute)]
        method: Method,
    },
    /// Check that a matching is feasible for a graph.
    Verify { graph: PathBuf, matching: PathBuf },
    /// Write EG(b) with its initial matching and a JSON layout.
    GenEg {
        b: usize,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Per-phase level graphs and tracked trails as JSON.
    Trace {
        file: PathBuf,
        #[arg(long)]
        initial: Option<PathBuf>,
        #[arg(long)]
        no_initial: bool,
        #[arg(long)]
        levels: PathBuf,
    },
    /// Phase counts over a random family, as CSV.
    Bench {
        #[arg(long, value_enum)]
        family: Family,
        /// Sizes `lo..hi`, doubling from lo.
        #[arg(long, default_value = "64..1024")]
        n: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Instances per size.
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 4)]
        avg_degree: usize,
        #[arg(long, default_value_t = 2)]
        f_max: u32,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Brute,
    Flow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    RandomSimple,
    RandomMulti,
    RandomBipartite,
}

fn read_instance(path: &Path) -> anyhow::Result<(Multigraph, DegreeBound)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_graph(&text).with_context(|| format!("parsing {}", path.display()))
}

fn read_matching(path: &Path, g: &Multigraph, f: &DegreeBound) -> anyhow::Result<Matching> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_matching(&text, g, f).with_context(|| format!("parsing {}", path.display()))
}

fn initial_matching(
    file: &Path,
    initial: Option<&Path>,
    no_initial: bool,
    g: &Multigraph,
    f: &DegreeBound,
) -> anyhow::Result<Matching> {
    if let Some(p) = initial {
        return read_matching(p, g, f);
    }
    let side = file.with_extension("m0");
    if !no_initial && side.is_file() {
        eprintln!("fmatch: starting from {}", side.display());
        return read_matching(&side, g, f);
    }
    Ok(Matching::empty(g))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

#[derive(Serialize)]
struct SolveReport<'a> {
    n: usize,
    m: usize,
    f_total: u64,
    initial_cardinality: usize,
    stats: &'a PhaseStats,
    monotonicity: Report,
    bounds: Report,
    remaining: Option<Report>,
    certificate: Option<Certificate>,
}

fn solve(
    file: &Path,
    initial: Option<&Path>,
    no_initial: bool,
    stats_path: Option<&Path>,
    want_cert: bool,
    matching_path: Option<&Path>,
    trace_path: Option<&Path>,
) -> anyhow::Result<bool> {
    let (g, f) = read_instance(file)?;
    let m0 = initial_matching(file, initial, no_initial, &g, &f)?;
    if let Some(p) = trace_path {
        let opts = SearchOptions {
            trace: true,
            ..SearchOptions::from_env()
        };
        let out = f_matching_search(&g, &f, &m0, &opts)?;
        write_json(p, &out.trace)?;
    }
    let sol = solve_from(
        &g,
        &f,
        &m0,
        SolveOptions {
            record: false,
            debug_validate: debug_assert_env(),
        },
    )?;
    let simple = g.is_simple() && !g.has_loops();
    let rep = SolveReport {
        n: g.vertex_count(),
        m: g.edge_count(),
        f_total: f.total(),
        initial_cardinality: m0.len(),
        stats: &sol.stats,
        monotonicity: check_sat_monotonicity(&sol.stats.sat_lengths()),
        bounds: if m0.is_empty() {
            bound_check(&sol.stats, g.vertex_count(), f.total(), simple)
        } else {
            Report::default()
        },
        remaining: (simple && m0.is_empty()).then(|| remaining_augmentations_check(&sol.stats, g.vertex_count())),
        certificate: want_cert.then(|| certify(&g, &f, &sol.matching, &sol.final_search)),
    };
    println!(
        "cardinality {} phases {} sat lengths {:?}",
        sol.matching.len(),
        sol.stats.phase_count,
        sol.stats.sat_lengths()
    );
    let mut ok = rep.monotonicity.is_ok() && rep.bounds.is_ok();
    ok &= rep.remaining.as_ref().is_none_or(Report::is_ok);
    for r in [&rep.monotonicity, &rep.bounds] {
        if !r.is_ok() {
            eprintln!("violation: {r}");
        }
    }
    if let Some(c) = &rep.certificate {
        println!("certificate {}", if c.is_valid() { "valid" } else { "INVALID" });
        ok &= c.is_valid();
    }
    if let Some(p) = matching_path {
        fs::write(p, write_matching(&sol.matching)).with_context(|| format!("writing {}", p.display()))?;
    }
    if let Some(p) = stats_path {
        write_json(p, &rep)?;
    }
    Ok(ok)
}

fn oracle(file: &Path, method: Method) -> anyhow::Result<bool> {
    let (g, f) = read_instance(file)?;
    let r = match method {
        Method::Brute => brute_force_max_f_matching(&g, &f)?,
        Method::Flow => bipartite_flow_oracle(&g, &f)?,
    };
    let sol = solve_from(&g, &f, &Matching::empty(&g), SolveOptions::default())?;
    println!("{} {} solver {}", r.method, r.max_cardinality, sol.matching.len());
    Ok(r.max_cardinality == sol.matching.len())
}

fn verify(graph: &Path, matching: &Path) -> anyhow::Result<bool> {
    let (g, f) = read_instance(graph)?;
    match read_matching(matching, &g, &f) {
        Ok(m) => {
            println!("feasible, {} edges", m.len());
            Ok(true)
        }
        Err(e) => {
            println!("infeasible: {e:#}");
            Ok(false)
        }
    }
}

#[derive(Serialize)]
struct Sidecar<'a> {
    #[serde(flatten)]
    layout: &'a crate::eg::EgLayout,
    /// Vertex sequences of the expected cross-edge sats.
    expected_trails: Vec<Vec<usize>>,
}

fn gen_eg(b: usize, output: &Path) -> anyhow::Result<bool> {
    let inst = generate_eg(b)?;
    fs::write(output, write_graph(&inst.graph, &inst.f)).with_context(|| format!("writing {}", output.display()))?;
    fs::write(output.with_extension("m0"), write_matching(&inst.m0))?;
    let expected_trails = (1..=b)
        .map(|i| expected_cross_trail(&inst, i).map(|t| t.vertices()))
        .collect::<crate::Result<Vec<_>>>()?;
    write_json(
        &output.with_extension("json"),
        &Sidecar {
            layout: &inst.layout,
            expected_trails,
        },
    )?;
    let rep = verify_eg(&inst)?;
    println!(
        "EG({b}): n {} m {} s {:?} distinct petalevels {}",
        rep.n, rep.m, rep.solver_s, rep.distinct_pairs
    );
    if !rep.report.is_ok() {
        eprintln!("violation: {}", rep.report);
    }
    Ok(rep.report.is_ok())
}

#[derive(Serialize)]
struct TracePhase {
    phase: usize,
    #[serde(flatten)]
    audit: PhaseAudit,
}

fn trace(file: &Path, initial: Option<&Path>, no_initial: bool, levels: &Path) -> anyhow::Result<bool> {
    let (g, f) = read_instance(file)?;
    let m0 = initial_matching(file, initial, no_initial, &g, &f)?;
    let sol = solve_from(
        &g,
        &f,
        &m0,
        SolveOptions {
            record: true,
            debug_validate: debug_assert_env(),
        },
    )?;
    let mut ok = true;
    let mut phases = Vec::new();
    for (k, r) in sol.records.iter().enumerate() {
        let audit = audit_phase(&g, &r.outcome, &r.blocking.trails)?;
        if !audit.report.is_ok() {
            eprintln!("phase {}: {}", k + 1, audit.report);
            ok = false;
        }
        println!(
            "phase {} s {} trails {} LG* nodes {} bottleneck layer {} ({} nodes)",
            k + 1,
            audit.s,
            r.blocking.trails.len(),
            audit.level_graph.node_count(),
            audit.bottleneck.layer,
            audit.bottleneck.node_count
        );
        phases.push(TracePhase { phase: k + 1, audit });
    }
    write_json(levels, &phases)?;
    Ok(ok)
}

/// Parses `lo..hi` into lo, 2lo, 4lo, … up to hi.
pub fn parse_sizes(s: &str) -> anyhow::Result<Vec<usize>> {
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (a.trim().parse::<usize>()?, b.trim().parse::<usize>()?),
        None => {
            let x = s.trim().parse::<usize>()?;
            (x, x)
        }
    };
    if lo == 0 || lo > hi {
        bail!("bad size range {s:?}");
    }
    let mut out = Vec::new();
    let mut n = lo;
    while n <= hi {
        out.push(n);
        n *= 2;
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    pub f_total: u64,
    pub phases: usize,
    pub bound_4n23: f64,
    pub bound_2sqrtf: f64,
    pub max_s: usize,
}

pub fn bench_rows(family: Family, sizes: &[usize], seed: u64, count: usize, avg_degree: usize, f_max: u32) -> anyhow::Result<Vec<BenchRow>> {
    let jobs: Vec<(usize, u64)> = sizes
        .iter()
        .flat_map(|&n| (0..count as u64).map(move |k| (n, seed + k)))
        .collect();
    let results: Vec<anyhow::Result<BenchRow>> = std::thread::scope(|sc| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|&(n, sd)| {
                sc.spawn(move || {
                    let m = n * avg_degree / 2;
                    let p = match family {
                        Family::RandomSimple => RandomParams::simple(n, m, f_max),
                        Family::RandomMulti => RandomParams::multigraph(n, m, f_max),
                        Family::RandomBipartite => RandomParams::bipartite(n, m, f_max),
                    };
                    let (g, f) = random_instance(&p, sd);
                    let sol = solve_from(&g, &f, &Matching::empty(&g), SolveOptions::default())?;
                    Ok(BenchRow {
                        n,
                        m: g.edge_count(),
                        seed: sd,
                        f_total: f.total(),
                        phases: sol.stats.phase_count,
                        bound_4n23: 4.0 * (n as f64).powf(2.0 / 3.0),
                        bound_2sqrtf: 2.0 * (f.total() as f64).sqrt() + 1.0,
                        max_s: sol.stats.sat_lengths().into_iter().max().unwrap_or(0),
                    })
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("bench worker panicked")).collect()
    });
    results.into_iter().collect()
}

fn bench(
    family: Family,
    sizes: &str,
    seed: u64,
    count: usize,
    avg_degree: usize,
    f_max: u32,
    output: Option<&Path>,
) -> anyhow::Result<bool> {
    let rows = bench_rows(family, &parse_sizes(sizes)?, seed, count, avg_degree, f_max)?;
    let sink: Box<dyn Write> = match output {
        Some(p) => Box::new(fs::File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(std::io::stdout()),
    };
    let mut w = csv::Writer::from_writer(sink);
    let mut ok = true;
    for r in &rows {
        w.serialize(r)?;
        let simple = family != Family::RandomMulti;
        if (simple && r.phases as f64 >= r.bound_4n23) || r.phases as f64 > r.bound_2sqrtf {
            eprintln!("violation: n {} seed {} has {} phases", r.n, r.seed, r.phases);
            ok = false;
        }
    }
    w.flush()?;
    Ok(ok)
}

pub fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Solve {
            file,
            initial,
            no_initial,
            stats,
            certify,
            matching,
            trace_search,
        } => solve(
            &file,
            initial.as_deref(),
            no_initial,
            stats.as_deref(),
            certify,
            matching.as_deref(),
            trace_search.as_deref(),
        ),
        Command::Oracle { file, method } => oracle(&file, method),
        Command::Verify { graph, matching } => verify(&graph, &matching),
        Command::GenEg { b, output } => gen_eg(b, &output),
        Command::Trace {
            file,
            initial,
            no_initial,
            levels,
        } => trace(&file, initial.as_deref(), no_initial, &levels),
        Command::Bench {
            family,
            n,
            seed,
            count,
            avg_degree,
            f_max,
            output,
        } => bench(family, &n, seed, count, avg_degree, f_max, output.as_deref()),
    }
}

/// Entry point of the binary: 0 on success, 1 on a violated check, 2 on
/// an error.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("fmatch: {e:#}");
            ExitCode::from(2)
        }
    }
}
