//! `wrp` subcommands. Reports are `key=value` lines on stdout; errors go to stderr with a
//! distinct exit code per failure class.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wrp_core::optics::{path_bends, path_cost, BendKind};
use wrp_core::oracle::{oracle_auto, oracle_shortest, build_steiner_graph, OracleError, OracleResult};
use wrp_core::wavefront::{
    self, build_sssp_map, compute_params, query_sssp, DiscretizationParams, Mode, PathResult, RunError, RunOptions,
};
use wrp_core::{compute_stats, Point2, WeightedMesh};

use crate::eventlog::{parse_log, EventLog};
use crate::format::{load_map, load_mesh, save_map, save_mesh, write_mesh, FormatError};
use crate::gen::{generate, FixtureKind, GenOptions};
use crate::svg::{render, Overlay};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_ALGORITHM: i32 = 3;
pub const EXIT_ACCEPTANCE: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "wrp", version, about = "Approximate weighted-region shortest paths")]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Shortest path between two vertices.
    Solve(SolveArgs),
    /// Wavefront against the Steiner-graph oracle; exit 4 when outside the band.
    Compare(CompareArgs),
    /// Steiner-graph distance only.
    Oracle(OracleArgs),
    /// Single-source map: build once, query points.
    Sssp {
        #[command(subcommand)]
        cmd: SsspCmd,
    },
    /// Draw a mesh (optionally with a solved path or an event log) as SVG.
    Render(RenderArgs),
    /// Write a fixture mesh.
    Gen(GenArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Strict,
    Practical,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Strict => Mode::Strict,
            ModeArg::Practical => Mode::Practical,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    #[arg(long)]
    pub mesh: PathBuf,
    #[arg(long)]
    pub source: usize,
    #[arg(long)]
    pub target: usize,
    #[arg(long, default_value_t = 0.1, allow_hyphen_values = true)]
    pub epsilon: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Practical)]
    pub mode: ModeArg,
    /// Maximum number of popped events.
    #[arg(long, default_value_t = 2_000_000)]
    pub budget: usize,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[arg(long)]
    pub event_log: Option<PathBuf>,
    /// Sample bundle divergence after each extension and report violations.
    #[arg(long)]
    pub check: bool,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Fixed Steiner points per edge; default doubles m until slack ≤ --slack-target · cost.
    #[arg(long)]
    pub steiner_m: Option<usize>,
    #[arg(long, default_value_t = 0.01)]
    pub slack_target: f64,
    #[arg(long, default_value_t = 2048)]
    pub max_m: usize,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[arg(long)]
    pub mesh: PathBuf,
    #[arg(long)]
    pub source: usize,
    #[arg(long)]
    pub target: usize,
    #[arg(long)]
    pub steiner_m: Option<usize>,
    #[arg(long, default_value_t = 0.01)]
    pub slack_target: f64,
    #[arg(long, default_value_t = 2048)]
    pub max_m: usize,
}

#[derive(Subcommand, Debug)]
pub enum SsspCmd {
    Build {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        source: usize,
        #[arg(long, default_value_t = 0.1, allow_hyphen_values = true)]
        epsilon: f64,
        #[arg(long, value_enum, default_value_t = ModeArg::Practical)]
        mode: ModeArg,
        #[arg(long, default_value_t = 2_000_000)]
        budget: usize,
        #[arg(long)]
        map: PathBuf,
    },
    Query {
        #[arg(long)]
        map: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, allow_hyphen_values = true)]
        y: f64,
    },
}

#[derive(Args, Debug)]
pub struct RenderArgs {
    #[arg(long)]
    pub mesh: PathBuf,
    #[arg(long)]
    pub svg: PathBuf,
    /// Solve and draw the path from --source to --target.
    #[arg(long, requires = "target")]
    pub source: Option<usize>,
    #[arg(long, requires = "source")]
    pub target: Option<usize>,
    #[arg(long, default_value_t = 0.1, allow_hyphen_values = true)]
    pub epsilon: f64,
    /// Overlay sibling strikes and vertex strikes from a log written by `solve --event-log`.
    #[arg(long)]
    pub event_log: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(value_enum)]
    pub kind: FixtureKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 20)]
    pub size: usize,
    #[arg(long, default_value_t = 8)]
    pub max_weight: u32,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub msg: String,
}

impl CliError {
    fn new(code: i32, msg: impl Into<String>) -> Self {
        CliError { code, msg: msg.into() }
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        let code = match e {
            FormatError::Io { .. } => EXIT_USAGE,
            _ => EXIT_VALIDATION,
        };
        CliError::new(code, e.to_string())
    }
}

fn run_error(e: RunError) -> CliError {
    match e {
        RunError::NoSuchVertex(_) | RunError::SameVertex => CliError::new(EXIT_VALIDATION, e.to_string()),
        RunError::Unreachable { .. } => CliError::new(EXIT_ALGORITHM, format!("error: {e}")),
        RunError::EventBudget { .. } => CliError::new(EXIT_ALGORITHM, e.to_string()),
    }
}

fn oracle_error(e: OracleError) -> CliError {
    match e {
        OracleError::Unreachable => CliError::new(EXIT_ALGORITHM, "oracle: target unreachable"),
        other => CliError::new(EXIT_VALIDATION, format!("oracle: {other}")),
    }
}

fn params_for(mesh: &WeightedMesh, epsilon: f64, mode: ModeArg) -> Result<DiscretizationParams, CliError> {
    compute_params(&compute_stats(mesh), epsilon, mode.into()).map_err(|e| CliError::new(EXIT_VALIDATION, e.to_string()))
}

fn check_vertex(mesh: &WeightedMesh, v: usize, what: &str) -> Result<(), CliError> {
    if v >= mesh.vertices().len() {
        return Err(CliError::new(EXIT_VALIDATION, format!("{what} {v} is not a vertex (mesh has {})", mesh.vertices().len())));
    }
    Ok(())
}

fn fmt_pt(p: Point2) -> String {
    format!("{},{}", p.x, p.y)
}

type Out<'a> = &'a mut dyn Write;

fn line(out: Out, s: impl AsRef<str>) -> Result<(), CliError> {
    writeln!(out, "{}", s.as_ref()).map_err(|e| CliError::new(EXIT_USAGE, e.to_string()))
}

fn solve_path(
    mesh: &WeightedMesh,
    r: &RunArgs,
    log: Option<&mut EventLog<fs::File>>,
    check: bool,
) -> Result<(PathResult, DiscretizationParams), CliError> {
    check_vertex(mesh, r.source, "source")?;
    check_vertex(mesh, r.target, "target")?;
    if r.budget == 0 {
        return Err(CliError::new(EXIT_VALIDATION, "budget must be positive"));
    }
    let params = params_for(mesh, r.epsilon, r.mode)?;
    let opts = RunOptions { event_budget: r.budget, check_invariants: check, ..RunOptions::default() };
    let res = match log {
        Some(l) => wavefront::run_observed(mesh, r.source, r.target, &params, &opts, l),
        None => wavefront::run(mesh, r.source, r.target, &params, &opts),
    };
    Ok((res.map_err(run_error)?, params))
}

fn cmd_solve(a: &SolveArgs, out: Out) -> Result<i32, CliError> {
    let mesh = load_mesh(&a.run.mesh)?;
    let t0 = Instant::now();
    let mut log = match &a.event_log {
        Some(p) => Some(EventLog::new(
            fs::File::create(p).map_err(|e| CliError::new(EXIT_USAGE, format!("{}: {e}", p.display())))?,
        )),
        None => None,
    };
    let (res, params) = solve_path(&mesh, &a.run, log.as_mut(), a.check)?;
    let ms = t0.elapsed().as_secs_f64() * 1e3;
    if let Some(l) = log {
        l.finish().map_err(|e| CliError::new(EXIT_USAGE, e.to_string()))?;
    }
    line(out, "status=ok")?;
    line(out, format!("cost={}", res.cost))?;
    if let Ok(pc) = path_cost(&mesh, &res.polyline) {
        line(out, format!("path_cost={pc}"))?;
    }
    line(out, format!("events={}", res.events))?;
    line(out, format!("epsilon={}", params.epsilon))?;
    line(out, format!("mode={}", if params.mode == Mode::Strict { "strict" } else { "practical" }))?;
    line(out, format!("delta={}", params.delta))?;
    line(out, format!("points={}", res.polyline.len()))?;
    for p in &res.polyline {
        line(out, format!("point={}", fmt_pt(*p)))?;
    }
    for b in path_bends(&mesh, &res.polyline) {
        match b.kind {
            BendKind::Vertex => line(out, format!("via_vertex={}", b.vertex.unwrap()))?,
            BendKind::Refraction => line(
                out,
                format!(
                    "refraction={} edge={} w_in={} w_out={} theta_in={} theta_out={} residual={:e}",
                    fmt_pt(b.point),
                    b.edge.unwrap(),
                    b.w_in,
                    b.w_out,
                    b.theta_in,
                    b.theta_out,
                    b.residual
                ),
            )?,
            BendKind::AlongEdge => line(
                out,
                format!("critical={} edge={} residual={:e}", fmt_pt(b.point), b.edge.unwrap(), b.residual),
            )?,
        }
    }
    let d = res.diagnostics;
    line(out, format!("splits={}", d.splits))?;
    line(out, format!("bundles={}", d.bundles))?;
    line(out, format!("eliminated={}", d.eliminated))?;
    line(out, format!("critical_sources={}", d.critical_sources))?;
    line(out, format!("heap_violations={}", d.heap_violations))?;
    if a.check {
        line(out, format!("divergence_checks={}", d.divergence_checks))?;
        line(out, format!("divergence_violations={}", d.divergence_violations))?;
    }
    line(out, format!("time_ms={ms:.3}"))?;
    if let Some(p) = &a.svg {
        let svg = render(&mesh, &Overlay { path: Some(&res.polyline), ..Default::default() });
        fs::write(p, svg).map_err(|e| CliError::new(EXIT_USAGE, format!("{}: {e}", p.display())))?;
    }
    Ok(EXIT_OK)
}

fn oracle_for(mesh: &WeightedMesh, s: usize, t: usize, m: Option<usize>, rel: f64, max_m: usize) -> Result<OracleResult, CliError> {
    check_vertex(mesh, s, "source")?;
    check_vertex(mesh, t, "target")?;
    match m {
        Some(m) => oracle_shortest(&build_steiner_graph(mesh, m), s, t),
        None => oracle_auto(mesh, s, t, rel, max_m),
    }
    .map_err(oracle_error)
}

fn cmd_compare(a: &CompareArgs, out: Out) -> Result<i32, CliError> {
    let mesh = load_mesh(&a.run.mesh)?;
    let (res, params) = solve_path(&mesh, &a.run, None, false)?;
    let or = oracle_for(&mesh, a.run.source, a.run.target, a.steiner_m, a.slack_target, a.max_m)?;
    let lo = or.cost - or.slack;
    let hi = (1.0 + params.epsilon) * (or.cost + or.slack);
    let ok = res.cost >= lo && res.cost <= hi;
    line(out, format!("status={}", if ok { "ok" } else { "violation" }))?;
    line(out, format!("wavefront={}", res.cost))?;
    line(out, format!("oracle={}", or.cost))?;
    line(out, format!("slack={}", or.slack))?;
    line(out, format!("m={}", or.m))?;
    line(out, format!("ratio={}", res.cost / or.cost))?;
    line(out, format!("band_lo={lo}"))?;
    line(out, format!("band_hi={hi}"))?;
    Ok(if ok { EXIT_OK } else { EXIT_ACCEPTANCE })
}

fn cmd_oracle(a: &OracleArgs, out: Out) -> Result<i32, CliError> {
    let mesh = load_mesh(&a.mesh)?;
    let or = oracle_for(&mesh, a.source, a.target, a.steiner_m, a.slack_target, a.max_m)?;
    line(out, "status=ok")?;
    line(out, format!("cost={}", or.cost))?;
    line(out, format!("slack={}", or.slack))?;
    line(out, format!("m={}", or.m))?;
    for p in &or.polyline {
        line(out, format!("point={}", fmt_pt(*p)))?;
    }
    Ok(EXIT_OK)
}

fn cmd_sssp(c: &SsspCmd, out: Out) -> Result<i32, CliError> {
    match c {
        SsspCmd::Build { mesh, source, epsilon, mode, budget, map } => {
            let mesh = load_mesh(mesh)?;
            check_vertex(&mesh, *source, "source")?;
            let params = params_for(&mesh, *epsilon, *mode)?;
            let opts = RunOptions { event_budget: *budget, ..RunOptions::default() };
            let t0 = Instant::now();
            let m = build_sssp_map(&mesh, *source, &params, &opts).map_err(run_error)?;
            save_map(map, &mesh, &m)?;
            line(out, "status=ok")?;
            line(out, format!("reached={}", m.dist.iter().filter(|d| d.is_some()).count()))?;
            line(out, format!("snapshots={}", m.snapshots.len()))?;
            line(out, format!("pieces={}", m.envelope.iter().map(|g| g.pieces.len()).sum::<usize>()))?;
            line(out, format!("events={}", m.diagnostics.events))?;
            line(out, format!("time_ms={:.3}", t0.elapsed().as_secs_f64() * 1e3))?;
            Ok(EXIT_OK)
        }
        SsspCmd::Query { map, x, y } => {
            let (mesh, m) = load_map(map)?;
            let q = Point2::new(*x, *y);
            let r = query_sssp(&mesh, &m, q).map_err(|e| CliError::new(EXIT_VALIDATION, e.to_string()))?;
            line(out, "status=ok")?;
            line(out, format!("cost={}", r.cost))?;
            for p in &r.polyline {
                line(out, format!("point={}", fmt_pt(*p)))?;
            }
            Ok(EXIT_OK)
        }
    }
}

fn cmd_render(a: &RenderArgs, out: Out) -> Result<i32, CliError> {
    let mesh = load_mesh(&a.mesh)?;
    let path = match (a.source, a.target) {
        (Some(s), Some(t)) => {
            let r = RunArgs {
                mesh: a.mesh.clone(),
                source: s,
                target: t,
                epsilon: a.epsilon,
                mode: ModeArg::Practical,
                budget: 2_000_000,
            };
            Some(solve_path(&mesh, &r, None, false)?.0.polyline)
        }
        _ => None,
    };
    let (mut chords, mut marks) = (Vec::new(), Vec::new());
    if let Some(p) = &a.event_log {
        let text = fs::read_to_string(p).map_err(|e| CliError::new(EXIT_USAGE, format!("{}: {e}", p.display())))?;
        for ev in parse_log(&text) {
            match ev.points.as_slice() {
                [a, b] => chords.push((*a, *b)),
                [a] => marks.push(*a),
                _ => {}
            }
        }
    }
    let svg = render(&mesh, &Overlay { path: path.as_deref(), chords: &chords, marks: &marks });
    fs::write(&a.svg, &svg).map_err(|e| CliError::new(EXIT_USAGE, format!("{}: {e}", a.svg.display())))?;
    line(out, "status=ok")?;
    line(out, format!("polygons={}", mesh.faces().len()))?;
    line(out, format!("bytes={}", svg.len()))?;
    Ok(EXIT_OK)
}

fn cmd_gen(a: &GenArgs, out: Out) -> Result<i32, CliError> {
    if a.max_weight == 0 {
        return Err(CliError::new(EXIT_VALIDATION, "max-weight must be at least 1"));
    }
    let mesh = generate(a.kind, &GenOptions { seed: a.seed, size: a.size, max_weight: a.max_weight });
    match &a.out {
        Some(p) => {
            save_mesh(p, &mesh)?;
            line(out, "status=ok")?;
            line(out, format!("vertices={}", mesh.vertices().len()))?;
            line(out, format!("faces={}", mesh.faces().len()))?;
        }
        None => write!(out, "{}", write_mesh(&mesh)).map_err(|e| CliError::new(EXIT_USAGE, e.to_string()))?,
    }
    Ok(EXIT_OK)
}

pub fn execute(cli: &Cli, out: Out) -> Result<i32, CliError> {
    match &cli.cmd {
        Command::Solve(a) => cmd_solve(a, out),
        Command::Compare(a) => cmd_compare(a, out),
        Command::Oracle(a) => cmd_oracle(a, out),
        Command::Sssp { cmd } => cmd_sssp(cmd, out),
        Command::Render(a) => cmd_render(a, out),
        Command::Gen(a) => cmd_gen(a, out),
    }
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn main_with<I, T>(args: I, out: Out, err: Out) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{}", e.render()) } else { write!(out, "{}", e.render()) };
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "wrp: {}", e.msg);
            e.code
        }
    }
}
