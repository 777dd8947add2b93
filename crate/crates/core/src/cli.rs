//! Command-line front end.
//!
//! Stdout carries only deterministic results; timings and diagnostics go to
//! stderr. Exit codes: 0 success, 1 a negative answer (no solution,
//! infeasible embedding, profile mismatch), 2 an error.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::embedding::{parse_solutions, write_solutions, Solution};
use crate::instance::{generate_random_yes, read_instance, reduce_subset_sum, write_instance, DgpInstance, PruningSpec, SubsetSumInstance};
use crate::oracle::{brute_force_embeddings, reduction_count_oracle, subset_sum_solutions, MAX_BRUTE_FORCE_DEPTH};
use crate::solver::{solve, verify_embedding, SearchMode, SolverOptions};
use crate::symmetry::{chirality, GeneratorWindow};
use crate::tolerance::ToleranceConfig;
use crate::width::{classify, crosscheck, predict_profile, WidthProfile};

#[derive(Parser, Debug)]
#[command(name = "dmdgp", version, about = "Branch-and-Prune solver and symmetry analysis for discretizable distance geometry")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Enumerate embeddings with Branch-and-Prune.
    Solve(SolveArgs),
    /// Predict per-level tree width and classify the instance.
    Analyze(AnalyzeArgs),
    /// Build the instance encoding a Subset-Sum problem.
    Reduce(ReduceArgs),
    /// Generate a random YES instance and its ground-truth embedding.
    Generate(GenerateArgs),
    /// Check embeddings against an instance.
    Verify(VerifyArgs),
    /// Exhaustive reference answers.
    #[command(hide = true)]
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
enum Format {
    #[default]
    Text,
    Csv,
}

#[derive(Args, Debug)]
struct ToleranceArgs {
    /// Absolute pruning tolerance.
    #[arg(long)]
    tol_prune: Option<f64>,
    /// Relative pruning tolerance (scaled by the edge distance).
    #[arg(long)]
    tol_prune_rel: Option<f64>,
    /// Geometric residual tolerance.
    #[arg(long)]
    tol_geom: Option<f64>,
}

impl ToleranceArgs {
    fn config(&self) -> Result<ToleranceConfig, String> {
        let mut tol = ToleranceConfig::default();
        for (name, value, slot) in [
            ("--tol-prune", self.tol_prune, &mut tol.prune_abs),
            ("--tol-prune-rel", self.tol_prune_rel, &mut tol.prune_rel),
            ("--tol-geom", self.tol_geom, &mut tol.geometry),
        ] {
            if let Some(v) = value {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(format!("{name} must be a nonnegative number, got {v}"));
                }
                *slot = v;
            }
        }
        Ok(tol)
    }
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Instance file.
    instance: PathBuf,
    /// Enumerate every embedding (default).
    #[arg(long, group = "mode")]
    all: bool,
    /// Stop at the first embedding.
    #[arg(long, group = "mode")]
    first: bool,
    /// Count embeddings without storing them.
    #[arg(long, group = "mode")]
    count: bool,
    #[command(flatten)]
    tol: ToleranceArgs,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Write solutions here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Write per-level node statistics as CSV.
    #[arg(long)]
    stats: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    instance: PathBuf,
    /// Also run the solver and compare measured to predicted widths.
    #[arg(long)]
    crosscheck: bool,
    /// Use the uncorrected generator window `[u+K, v]`.
    #[arg(long = "paper-window", alias = "literal-window")]
    literal_window: bool,
    #[command(flatten)]
    tol: ToleranceArgs,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Args, Debug)]
struct ReduceArgs {
    /// Comma-separated positive integers.
    #[arg(long)]
    subset_sum: String,
    #[arg(long = "K", short = 'k')]
    k: usize,
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long = "K", short = 'k')]
    k: usize,
    /// none, density:<p>, prop1:<v0>, prop2:<v0> or prop3:<v0>.
    #[arg(long, default_value = "none")]
    pruning: PruningSpec,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Write the ground-truth embedding here.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    instance: PathBuf,
    /// Solution file (every SOL block is checked).
    embedding: PathBuf,
    #[command(flatten)]
    tol: ToleranceArgs,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Args, Debug)]
struct OracleArgs {
    /// Brute-force every branch of this instance.
    #[arg(long, conflicts_with = "subset_sum")]
    instance: Option<PathBuf>,
    /// Enumerate zero-sum sign vectors and the reduced solution count.
    #[arg(long, requires = "k")]
    subset_sum: Option<String>,
    #[arg(long = "K", short = 'k')]
    k: Option<usize>,
}

/// A failure that maps to exit code 2.
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type CmdResult = Result<i32, Failure>;

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

/// Like [`run`] with explicit output streams.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 { out.write_all(rendered.as_bytes()) } else { err.write_all(rendered.as_bytes()) };
            return code;
        }
    };
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(&a, out, err),
        Command::Analyze(a) => cmd_analyze(&a, out),
        Command::Reduce(a) => cmd_reduce(&a, out),
        Command::Generate(a) => cmd_generate(&a, out),
        Command::Verify(a) => cmd_verify(&a, out),
        Command::Oracle(a) => cmd_oracle(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(Failure(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
    }
}

fn load_valid(path: &Path, tol: &ToleranceConfig) -> Result<DgpInstance, Failure> {
    let inst = read_instance(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    let report = inst.validate(tol);
    if !report.passed() {
        return Err(Failure(format!("{}: invalid instance\n{report}", path.display())));
    }
    Ok(inst)
}

/// Writes to `path` when given, otherwise to `out`.
fn emit(path: Option<&Path>, out: &mut dyn Write, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<(), Failure> {
    match path {
        Some(p) => {
            let mut buf = Vec::new();
            f(&mut buf)?;
            fs::write(p, buf).map_err(|e| Failure(format!("{}: {e}", p.display())))
        }
        None => Ok(f(out)?),
    }
}

fn cmd_solve(a: &SolveArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let tol = a.tol.config()?;
    if a.threads == 0 {
        return Err(Failure("--threads must be at least 1".into()));
    }
    let inst = load_valid(&a.instance, &tol)?;
    let mode = if a.first {
        SearchMode::First
    } else if a.count {
        SearchMode::Count
    } else {
        SearchMode::All
    };
    let opts = SolverOptions {
        mode,
        tol,
        threads: a.threads,
        ..Default::default()
    };
    let outcome = solve(&inst, &opts)?;
    writeln!(err, "solved in {:.3} s", outcome.stats.wall_time.as_secs_f64())?;

    if let Some(p) = &a.stats {
        emit(Some(p), out, |w| outcome.stats.write_csv(w))?;
    }
    match a.format {
        Format::Text => {
            writeln!(out, "solutions {}", outcome.count)?;
            writeln!(out, "max_width {}", outcome.stats.max_width())?;
            if mode != SearchMode::Count {
                emit(a.output.as_deref(), out, |w| write_solutions(w, &outcome.solutions))?;
            }
        }
        Format::Csv => {
            if mode != SearchMode::Count {
                emit(a.output.as_deref(), out, |w| solutions_csv(w, &outcome.solutions))?;
            } else {
                writeln!(out, "solutions\n{}", outcome.count)?;
            }
        }
    }
    Ok(if outcome.count > 0 { 0 } else { 1 })
}

fn solutions_csv(w: &mut dyn Write, solutions: &[Solution]) -> io::Result<()> {
    let k = solutions.first().map_or(0, |s| s.embedding.point(1).dim());
    write!(w, "solution,chirality,vertex")?;
    for j in 1..=k {
        write!(w, ",x{j}")?;
    }
    writeln!(w)?;
    for (i, s) in solutions.iter().enumerate() {
        for (v, p) in s.embedding.points().iter().enumerate() {
            write!(w, "{i},{},{}", s.chirality, v + 1)?;
            for c in p.coords() {
                write!(w, ",{c:.16e}")?;
            }
            writeln!(w)?;
        }
    }
    Ok(())
}

fn print_profile_text(out: &mut dyn Write, p: &WidthProfile) -> io::Result<()> {
    writeln!(out, "{:>6} {:>12} {:>12}", "level", "predicted", "measured")?;
    for l in &p.levels {
        let predicted = l.predicted().map_or_else(|| format!("2^{}", l.predicted_log2), |c| c.to_string());
        let measured = l.measured.map_or("-".to_string(), |m| m.to_string());
        writeln!(out, "{:>6} {predicted:>12} {measured:>12}", l.level)?;
    }
    Ok(())
}

fn cmd_analyze(a: &AnalyzeArgs, out: &mut dyn Write) -> CmdResult {
    let tol = a.tol.config()?;
    let inst = load_valid(&a.instance, &tol)?;
    let window = if a.literal_window {
        GeneratorWindow::Literal
    } else {
        GeneratorWindow::Corrected
    };
    let class = classify(&inst);
    let (profile, code, notes) = if a.crosscheck {
        let report = crosscheck(&inst, window, &tol)?;
        let mut notes = Vec::new();
        if !report.matches() {
            let levels: Vec<String> = report.mismatches.iter().map(usize::to_string).collect();
            notes.push(format!("mismatch at levels {}", levels.join(",")));
        }
        if let Some(v) = report.collapsed_at {
            notes.push(format!("no embedding: tree empty from level {v}"));
        }
        let code = if report.matches() { 0 } else { 1 };
        (report.profile, code, notes)
    } else {
        (predict_profile(&inst, window), 0, Vec::new())
    };
    match a.format {
        Format::Text => {
            writeln!(out, "{class}")?;
            print_profile_text(out, &profile)?;
            for n in &notes {
                writeln!(out, "{n}")?;
            }
        }
        Format::Csv => {
            writeln!(out, "# {class}")?;
            for n in &notes {
                writeln!(out, "# {n}")?;
            }
            profile.write_csv(&mut *out)?;
        }
    }
    Ok(code)
}

fn edges_csv(w: &mut dyn Write, inst: &DgpInstance) -> io::Result<()> {
    writeln!(w, "u,v,distance")?;
    for (u, v, d) in inst.edges() {
        writeln!(w, "{u},{v},{d:.16e}")?;
    }
    Ok(())
}

fn write_in_format(w: &mut dyn Write, inst: &DgpInstance, format: Format) -> io::Result<()> {
    match format {
        Format::Text => write_instance(inst, w),
        Format::Csv => edges_csv(w, inst),
    }
}

fn cmd_reduce(a: &ReduceArgs, out: &mut dyn Write) -> CmdResult {
    let ss: SubsetSumInstance = a.subset_sum.parse()?;
    let inst = reduce_subset_sum(&ss, a.k)?;
    emit(a.output.as_deref(), out, |w| write_in_format(w, &inst, a.format))?;
    Ok(0)
}

fn cmd_generate(a: &GenerateArgs, out: &mut dyn Write) -> CmdResult {
    let g = generate_random_yes(a.n, a.k, &a.pruning, a.seed)?;
    emit(a.output.as_deref(), out, |w| write_in_format(w, &g.instance, a.format))?;
    if let Some(p) = &a.truth {
        let chi = chirality(&g.instance, &g.ground_truth, &ToleranceConfig::default())?;
        let truth = [Solution {
            chirality: chi,
            embedding: g.ground_truth,
        }];
        emit(Some(p), out, |w| write_solutions(w, &truth))?;
    }
    Ok(0)
}

fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write) -> CmdResult {
    let tol = a.tol.config()?;
    let inst = read_instance(&a.instance).map_err(|e| Failure(format!("{}: {e}", a.instance.display())))?;
    let text = fs::read_to_string(&a.embedding).map_err(|e| Failure(format!("{}: {e}", a.embedding.display())))?;
    let solutions = parse_solutions(&text).map_err(|e| Failure(format!("{}: {e}", a.embedding.display())))?;
    if solutions.is_empty() {
        return Err(Failure(format!("{}: no SOL blocks", a.embedding.display())));
    }
    let mut all_ok = true;
    if a.format == Format::Csv {
        writeln!(out, "solution,u,v,expected,actual,residual")?;
    }
    for (i, s) in solutions.iter().enumerate() {
        let report = verify_embedding(&inst, &s.embedding, &tol)?;
        all_ok &= report.is_feasible();
        match a.format {
            Format::Text => {
                let status = if report.is_feasible() { "feasible" } else { "infeasible" };
                writeln!(
                    out,
                    "solution {i}: {status}, {} edges, {} violations, max residual {:.3e}",
                    report.edges_checked,
                    report.violations.len(),
                    report.max_residual
                )?;
                for e in &report.violations {
                    writeln!(out, "  edge {{{},{}}}: expected {:.9} actual {:.9} residual {:.3e}", e.u, e.v, e.expected, e.actual, e.residual())?;
                }
            }
            Format::Csv => {
                for e in &report.violations {
                    writeln!(out, "{i},{},{},{:.16e},{:.16e},{:.16e}", e.u, e.v, e.expected, e.actual, e.residual())?;
                }
            }
        }
    }
    Ok(if all_ok { 0 } else { 1 })
}

fn cmd_oracle(a: &OracleArgs, out: &mut dyn Write) -> CmdResult {
    if let Some(path) = &a.instance {
        let tol = ToleranceConfig::default();
        let inst = load_valid(path, &tol)?;
        let found = brute_force_embeddings(&inst, &tol, MAX_BRUTE_FORCE_DEPTH)?;
        writeln!(out, "solutions {}", found.len())?;
        for s in &found {
            writeln!(out, "{}", s.chirality)?;
        }
        return Ok(if found.is_empty() { 1 } else { 0 });
    }
    match (&a.subset_sum, a.k) {
        (Some(values), Some(k)) => {
            let ss: SubsetSumInstance = values.parse()?;
            let zero_sums = subset_sum_solutions(ss.values(), false)?;
            for s in &zero_sums {
                let line: String = s.iter().map(|&x| if x > 0 { '+' } else { '-' }).collect();
                writeln!(out, "{line}")?;
            }
            let count = reduction_count_oracle(ss.values(), k)?;
            writeln!(out, "reduced_solutions {count}")?;
            Ok(if count > 0 { 0 } else { 1 })
        }
        _ => Err(Failure("oracle needs --instance or --subset-sum with --K".into())),
    }
}
