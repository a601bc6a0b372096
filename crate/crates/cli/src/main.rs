//! Deterministic command-line front end for the duality experiments:
//! instance generation, Beckmann solves, flow decomposition, equivalence
//! verification, and report aggregation.
//!
//! Exit codes follow a CI-friendly contract:
//!
//! * 0 — every requested computation ran and every verdict passed,
//! * 1 — computations ran but a verdict or convergence target failed,
//! * 2 — usage, I/O, or malformed-input errors.
//!
//! All outputs are byte-identical for identical inputs and seeds. JSON
//! floats use shortest round-trip decimals; aggregated CSV uses 12
//! significant digits.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use sdl_core::beckmann::solve_beckmann;
use sdl_core::currents::Current1;
use sdl_core::exact::{parse_exact_str, rat_from_json, Rat};
use sdl_core::sobolev::{equivalence_report, EquivalenceReport, ReportConfig};
use sdl_core::space::{build_instance, GeneratorSpec, Instance, ScalarField, Topology};
use sdl_core::superposition::decompose_acyclic;
use sdl_core::Error;

/// Errors carry the exit code they map to plus a message for stderr.
type CliResult<T> = Result<T, (u8, String)>;

#[derive(Parser)]
#[command(
    name = "sdl",
    version,
    about = "Sobolev duality experiments on weighted metric graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance file from a named topology.
    Gen(GenArgs),
    /// Solve one Beckmann problem d*L = g and write the minimal flow.
    Beckmann(BeckmannArgs),
    /// Split a flow into its cycle part plus a weighted path plan.
    Decompose(DecomposeArgs),
    /// Run the energy-equivalence experiment and check its verdicts.
    Verify(VerifyArgs),
    /// Aggregate verification reports from a directory.
    Report(ReportArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TopologyKind {
    Path,
    Grid,
    Star,
    Tree,
    RandomGeometric,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct GenArgs {
    /// Topology family.
    #[arg(long, value_enum, default_value_t = TopologyKind::Path)]
    topology: TopologyKind,
    /// Vertex count (path, tree, random-geometric).
    #[arg(long, default_value_t = 8)]
    n: usize,
    /// Grid rows.
    #[arg(long, default_value_t = 3)]
    rows: usize,
    /// Grid columns.
    #[arg(long, default_value_t = 3)]
    cols: usize,
    /// Leaf count (star).
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Connection radius (random-geometric).
    #[arg(long, default_value_t = 0.6)]
    radius: f64,
    /// Seed for randomized topologies.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Uniform vertex atom mass, as a decimal or "p/q".
    #[arg(long, default_value = "1")]
    atom: String,
    /// Uniform edge measure density, as a decimal or "p/q".
    #[arg(long, default_value = "1")]
    density: String,
    /// Output path; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BeckmannArgs {
    /// Instance file.
    #[arg(long)]
    instance: PathBuf,
    /// Divergence data g as {"values":[...]} over vertices.
    #[arg(long)]
    data: PathBuf,
    /// Dual exponent q in (1, inf).
    #[arg(long, default_value_t = 2.0)]
    q: f64,
    /// Residual/gap tolerance; defaults to 1e-10 for q = 2 and 1e-8 otherwise.
    #[arg(long)]
    tol: Option<f64>,
    /// Output path; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct DecomposeArgs {
    /// Instance file.
    #[arg(long)]
    instance: PathBuf,
    /// Flow file {"J":[...]} in canonical edge order; entries may be exact.
    #[arg(long)]
    flow: PathBuf,
    /// Output path for the plan; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Instance file.
    #[arg(long)]
    instance: PathBuf,
    /// Scalar field file {"values":[...]} over vertices; repeatable.
    #[arg(long = "field")]
    field: Vec<PathBuf>,
    /// Generate this many random fields instead of reading files.
    #[arg(long, conflicts_with = "field")]
    random_fields: Option<usize>,
    /// Seed for random field generation.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Primal exponent p in (1, inf).
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// Subdivision levels for the relaxation sequence.
    #[arg(long, value_delimiter = ',', default_value = "3,4,8,16,32")]
    levels: Vec<usize>,
    /// Relative verdict tolerance; the solver tolerance is derived from it.
    #[arg(long)]
    tol: Option<f64>,
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Output path; stdout when omitted. The report is written even when
    /// verdicts fail.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Directory containing verification reports (*.json).
    #[arg(long)]
    dir: PathBuf,
    /// Aggregate format.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output path; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

/// Resolved verification run: exponent pair, tolerances, levels, format.
/// q is derived from p through 1/p + 1/q = 1. Tolerances stay `None` when
/// not given on the command line so the library defaults apply.
struct RunConfig {
    p: f64,
    q: f64,
    seed: u64,
    rel_tol: Option<f64>,
    solver_tol: Option<f64>,
    levels: Vec<usize>,
    format: Format,
}

impl RunConfig {
    fn from_args(args: &VerifyArgs) -> CliResult<RunConfig> {
        if !args.p.is_finite() || args.p <= 1.0 {
            return Err(usage(format!("p must lie in (1, inf), got {}", args.p)));
        }
        let q = args.p / (args.p - 1.0);
        let (rel_tol, solver_tol) = match args.tol {
            Some(t) if t.is_finite() && t > 0.0 => {
                // The verdict tolerance is taken literally; the solver
                // tolerance follows it but never leaves [1e-12, default] —
                // below 1e-12 Newton cannot certify in f64, above the
                // default the verdicts would inherit needless solver error.
                let default_solver = if q == 2.0 { 1e-10 } else { 1e-8 };
                (Some(t), Some(t.clamp(1e-12, default_solver)))
            }
            Some(t) => return Err(usage(format!("tolerance must be positive, got {t}"))),
            None => (None, None),
        };
        Ok(RunConfig {
            p: args.p,
            q,
            seed: args.seed,
            rel_tol,
            solver_tol,
            levels: args.levels.clone(),
            format: args.format,
        })
    }

    fn report_config(&self) -> ReportConfig {
        ReportConfig {
            rel_tol: self.rel_tol,
            solver_tol: self.solver_tol,
            levels: self.levels.clone(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Beckmann(args) => cmd_beckmann(args),
        Command::Decompose(args) => cmd_decompose(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Report(args) => cmd_report(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, message)) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}

fn cmd_gen(args: &GenArgs) -> CliResult<()> {
    let topology = match args.topology {
        TopologyKind::Path => Topology::Path { n: args.n },
        TopologyKind::Grid => Topology::Grid { rows: args.rows, cols: args.cols },
        TopologyKind::Star => Topology::Star { k: args.k },
        TopologyKind::Tree => Topology::Tree { n: args.n },
        TopologyKind::RandomGeometric => {
            Topology::RandomGeometric { n: args.n, radius: args.radius }
        }
    };
    let spec = GeneratorSpec {
        topology,
        seed: args.seed,
        norm: None,
        atom: parse_exact_arg(&args.atom, "--atom")?,
        density: parse_exact_arg(&args.density, "--density")?,
    };
    let inst = build_instance(&spec).map_err(|e| usage(e.to_string()))?;
    write_output(args.output.as_deref(), &inst.to_json_string())
}

fn cmd_beckmann(args: &BeckmannArgs) -> CliResult<()> {
    let inst = load_instance(&args.instance)?;
    let g = load_values(&args.data, inst.n_vertices(), "vertex")?;
    let tol = match args.tol {
        Some(t) if t.is_finite() && t > 0.0 => t,
        Some(t) => return Err(usage(format!("tolerance must be positive, got {t}"))),
        None => {
            if args.q == 2.0 {
                1e-10
            } else {
                1e-8
            }
        }
    };
    let sol = solve_beckmann(&inst, &g, args.q, tol).map_err(computation)?;
    eprintln!(
        "value {} (residual {:e}, gap {:e}, {} iterations)",
        sol.value, sol.residual, sol.gap, sol.iterations
    );
    write_output(args.output.as_deref(), &to_pretty(&sol)?)
}

fn cmd_decompose(args: &DecomposeArgs) -> CliResult<()> {
    let inst = Arc::new(load_instance(&args.instance)?);
    let j = load_flow(&args.flow, inst.n_edges())?;
    let t = Current1::new(inst, j).map_err(|e| usage(e.to_string()))?;
    let (cycles, acyclic) = t.remove_cycles();
    let plan = decompose_acyclic(&acyclic).map_err(computation)?;
    eprintln!(
        "{} path(s), mass {}, cycle mass removed {}",
        plan.n_paths(),
        plan.mass(),
        cycles.mass_f64()
    );
    write_output(args.output.as_deref(), &plan.to_json_string())
}

fn cmd_verify(args: &VerifyArgs) -> CliResult<()> {
    let cfg = RunConfig::from_args(args)?;
    let inst = Arc::new(load_instance(&args.instance)?);
    let fields = collect_fields(args, &cfg, inst.n_vertices())?;
    eprintln!("verify: p = {}, q = {}, {} field(s)", cfg.p, cfg.q, fields.len());
    let reports = run_reports(&inst, &fields, &cfg)?;

    let text = match cfg.format {
        Format::Json if reports.len() == 1 => to_pretty(&reports[0])?,
        Format::Json => to_pretty(&reports)?,
        Format::Csv => {
            let rows: Vec<(String, &EquivalenceReport)> = fields
                .iter()
                .zip(&reports)
                .map(|((label, _), r)| (label.clone(), r))
                .collect();
            csv_table(&rows)
        }
    };
    write_output(args.output.as_deref(), &text)?;

    let mut failed = 0usize;
    for ((label, _), report) in fields.iter().zip(&reports) {
        if report.passed {
            eprintln!("{label}: passed");
        } else {
            failed += 1;
            eprintln!("{label}: failing verdicts: {}", report.verdicts.failures().join(", "));
        }
    }
    if failed > 0 {
        return Err((1, format!("{failed} of {} field(s) failed verification", fields.len())));
    }
    Ok(())
}

fn cmd_report(args: &ReportArgs) -> CliResult<()> {
    let entries = fs::read_dir(&args.dir)
        .map_err(|e| (2, format!("{}: {e}", args.dir.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|path| path.extension().is_some_and(|ext| ext == "json"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err((1, format!("no report files in {}", args.dir.display())));
    }

    let mut rows: Vec<(String, EquivalenceReport)> = Vec::new();
    for path in &files {
        let stem = path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
        let text = read_file(path)?;
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| (2, format!("{}: {e}", path.display())))?;
        let bad_schema =
            |e: serde_json::Error| (2, format!("{}: not a verification report: {e}", path.display()));
        match value {
            serde_json::Value::Array(items) => {
                for (i, item) in items.into_iter().enumerate() {
                    let report = serde_json::from_value(item).map_err(bad_schema)?;
                    rows.push((format!("{stem}[{i}]"), report));
                }
            }
            other => {
                let report = serde_json::from_value(other).map_err(bad_schema)?;
                rows.push((stem, report));
            }
        }
    }

    let text = match args.format {
        Format::Csv => {
            let refs: Vec<(String, &EquivalenceReport)> =
                rows.iter().map(|(label, r)| (label.clone(), r)).collect();
            csv_table(&refs)
        }
        Format::Json => {
            let records: Vec<&EquivalenceReport> = rows.iter().map(|(_, r)| r).collect();
            to_pretty(&records)?
        }
    };
    write_output(args.output.as_deref(), &text)?;

    let failed = rows.iter().filter(|(_, r)| !r.passed).count();
    eprintln!("{} run(s), {failed} failed", rows.len());
    if failed > 0 {
        return Err((1, format!("{failed} of {} run(s) failed verification", rows.len())));
    }
    Ok(())
}

/// Field sources for one verify run: labelled files, or seeded random
/// fields with uniform entries in [-1, 1].
fn collect_fields(
    args: &VerifyArgs,
    cfg: &RunConfig,
    n_vertices: usize,
) -> CliResult<Vec<(String, ScalarField)>> {
    if let Some(count) = args.random_fields {
        if count == 0 {
            return Err(usage("--random-fields needs at least one field".into()));
        }
        return Ok((0..count)
            .map(|i| (format!("random{i}"), random_field(n_vertices, cfg.seed, i)))
            .collect());
    }
    if args.field.is_empty() {
        return Err(usage("supply --field or --random-fields".into()));
    }
    args.field
        .iter()
        .map(|path| {
            let label = path
                .file_stem()
                .map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
            Ok((label, load_values(path, n_vertices, "vertex")?))
        })
        .collect()
}

fn random_field(n: usize, seed: u64, index: usize) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(index as u64));
    (0..n).map(|_| 2.0 * unit(&mut rng) - 1.0).collect()
}

/// Uniform in [0, 1) from the top 53 bits, identical on every platform.
fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

/// Evaluate one report per field, ordered by field index regardless of the
/// number of workers. SDL_THREADS caps the worker count (default: available
/// parallelism).
fn run_reports(
    inst: &Arc<Instance>,
    fields: &[(String, ScalarField)],
    cfg: &RunConfig,
) -> CliResult<Vec<EquivalenceReport>> {
    let report_cfg = cfg.report_config();
    let workers = worker_count(fields.len());
    let results: Mutex<Vec<Option<sdl_core::Result<EquivalenceReport>>>> =
        Mutex::new((0..fields.len()).map(|_| None).collect());
    if workers <= 1 {
        let mut slots = results.into_inner().expect("unshared mutex");
        for (i, (_, f)) in fields.iter().enumerate() {
            slots[i] = Some(equivalence_report(inst, f, cfg.p, &report_cfg));
        }
        return collect_reports(slots, fields);
    }
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= fields.len() {
                    break;
                }
                let report = equivalence_report(inst, &fields[i].1, cfg.p, &report_cfg);
                results.lock().expect("no poisoned workers")[i] = Some(report);
            });
        }
    });
    let slots = results.into_inner().expect("workers joined");
    collect_reports(slots, fields)
}

/// Unwrap worker slots in index order; the first error (by field index) wins
/// so concurrent runs fail deterministically.
fn collect_reports(
    slots: Vec<Option<sdl_core::Result<EquivalenceReport>>>,
    fields: &[(String, ScalarField)],
) -> CliResult<Vec<EquivalenceReport>> {
    let mut reports = Vec::with_capacity(slots.len());
    for (slot, (label, _)) in slots.into_iter().zip(fields) {
        let result = slot.expect("every slot written");
        reports.push(result.map_err(|e| {
            let (code, message) = computation(e);
            (code, format!("{label}: {message}"))
        })?);
    }
    Ok(reports)
}

fn worker_count(jobs: usize) -> usize {
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    let cap = std::env::var("SDL_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or(available);
    cap.min(jobs).max(1)
}

const CSV_HEADER: &str = "source,p,q,F,E_lip,E_H,E_W,chain_plan,chain_conjugate,\
                          chain_cylinder,chain_weak,cycle_mass,iterations,passed";

fn csv_table(rows: &[(String, &EquivalenceReport)]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for (label, r) in rows {
        out.push_str(&csv_escape(label));
        for v in [
            r.p,
            r.q,
            r.f_energy,
            r.e_lip,
            r.e_h,
            r.e_w,
            r.chain[0],
            r.chain[1],
            r.chain[2],
            r.chain[3],
            r.cycle_mass,
        ] {
            out.push(',');
            out.push_str(&sig12(v));
        }
        out.push_str(&format!(",{},{}\n", r.iterations, r.passed));
    }
    out
}

/// 12 significant digits, scientific notation.
fn sig12(v: f64) -> String {
    format!("{v:.11e}")
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn usage(message: String) -> (u8, String) {
    (2, message)
}

/// Failed computations exit 1 (the run was well-posed but did not certify);
/// everything else is an input problem and exits 2.
fn computation(err: Error) -> (u8, String) {
    match &err {
        Error::NonConvergence { .. } => (1, err.to_string()),
        _ => (2, err.to_string()),
    }
}

fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| (2, format!("{}: {e}", path.display())))
}

fn load_instance(path: &Path) -> CliResult<Instance> {
    let text = read_file(path)?;
    Instance::from_json_str(&text).map_err(|e| (2, format!("{}: {e}", path.display())))
}

#[derive(serde::Deserialize)]
struct ValuesFile {
    values: Vec<f64>,
}

fn load_values(path: &Path, expected: usize, kind: &str) -> CliResult<Vec<f64>> {
    let text = read_file(path)?;
    let file: ValuesFile =
        serde_json::from_str(&text).map_err(|e| (2, format!("{}: {e}", path.display())))?;
    if file.values.len() != expected {
        return Err((
            2,
            format!("{}: expected {expected} {kind} values, got {}", path.display(), file.values.len()),
        ));
    }
    Ok(file.values)
}

#[derive(serde::Deserialize)]
struct FlowFile {
    #[serde(rename = "J")]
    j: Vec<serde_json::Value>,
}

fn load_flow(path: &Path, expected: usize) -> CliResult<Vec<Rat>> {
    let text = read_file(path)?;
    let file: FlowFile =
        serde_json::from_str(&text).map_err(|e| (2, format!("{}: {e}", path.display())))?;
    if file.j.len() != expected {
        return Err((
            2,
            format!("{}: expected {expected} edge flows, got {}", path.display(), file.j.len()),
        ));
    }
    file.j
        .iter()
        .map(|v| rat_from_json(v).map_err(|e| (2, format!("{}: {e}", path.display()))))
        .collect()
}

fn parse_exact_arg(text: &str, flag: &str) -> CliResult<Rat> {
    parse_exact_str(text).map_err(|e| usage(format!("{flag}: {e}")))
}

fn to_pretty<T: serde::Serialize>(value: &T) -> CliResult<String> {
    serde_json::to_string_pretty(value).map_err(|e| (2, format!("serialization failed: {e}")))
}

/// Write newline-terminated text to the path, or stdout when absent.
fn write_output(path: Option<&Path>, text: &str) -> CliResult<()> {
    let text = if text.ends_with('\n') { text.to_string() } else { format!("{text}\n") };
    match path {
        Some(p) => fs::write(p, text).map_err(|e| (2, format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
