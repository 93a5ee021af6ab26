//! The `mrc` command line.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::desugar::{normalize, normalize_rule, render_trace, DesugarOptions, Strategy};
use crate::diagnostic::{has_errors, Diagnostic, DiagnosticSet};
use crate::evaluator::{Budget, Evaluator};
use crate::rulesys::{emit, parse_rules, print_rules, PrintMode, RuleSystem};
use crate::sexpr::parse_sexprs;
use crate::surface::{parse_spec, parse_term, precheck, ParsedSpec, SymbolTable, Term};

pub const EXIT_OK: i32 = 0;
pub const EXIT_SPEC_ERROR: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

const EVAL_STACK: usize = 1 << 30;

#[derive(Parser, Debug)]
#[command(name = "mrc", version, about = "Compile macro-rule specifications into conditional rewrite rules")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Desugar a specification and print its rule system.
    Compile {
        file: PathBuf,
        /// Write rules here instead of standard output.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Print `lhs = rhs <== conditions` instead of canonical S-expressions.
        #[arg(long)]
        pretty: bool,
        /// Print every rewrite step to standard error.
        #[arg(long)]
        trace: bool,
        /// Pick redexes at random with this seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Report diagnostics without desugaring.
    Check { file: PathBuf },
    /// Evaluate a ground term.
    Run {
        file: PathBuf,
        #[arg(long)]
        term: String,
        #[arg(long)]
        max_steps: Option<usize>,
        /// Deepest nesting of condition evaluation before a condition counts as unknown.
        #[arg(long)]
        max_depth: Option<usize>,
        /// FILE is a canonical rule file rather than a specification.
        #[arg(long)]
        rules: bool,
    },
    /// Show the deterministic derivation of one macro-rule.
    Expand {
        file: PathBuf,
        #[arg(long)]
        rule_index: usize,
    },
}

struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Io<'_> {
    fn diagnostics(&mut self, ds: &[Diagnostic]) {
        for d in ds {
            let _ = writeln!(self.err, "{d}");
        }
    }

    fn fail(&mut self, msg: impl std::fmt::Display) -> i32 {
        let _ = writeln!(self.err, "mrc: {msg}");
        EXIT_USAGE
    }
}

fn read(io: &mut Io<'_>, file: &PathBuf) -> Result<String, i32> {
    fs::read_to_string(file).map_err(|e| io.fail(format!("cannot read {}: {e}", file.display())))
}

fn load(io: &mut Io<'_>, file: &PathBuf) -> Result<ParsedSpec, i32> {
    let text = read(io, file)?;
    parse_spec(&text, &file.display().to_string()).map_err(|e| {
        io.diagnostics(&[e.to_diagnostic()]);
        EXIT_SPEC_ERROR
    })
}

fn status(ds: &[Diagnostic]) -> i32 {
    if has_errors(ds) {
        EXIT_SPEC_ERROR
    } else {
        EXIT_OK
    }
}

/// Load, desugar and emit. Returns the rule system and every diagnostic.
fn compile_spec(parsed: &ParsedSpec, strategy: Strategy, opts: &DesugarOptions) -> (RuleSystem, Vec<Diagnostic>, String) {
    let d = normalize(&parsed.spec, strategy, opts);
    let mut all = DiagnosticSet::new();
    all.extend(parsed.diagnostics.iter().cloned());
    all.extend(d.diagnostics.iter().cloned());
    let rs = emit(&d.rules, &parsed.spec.symbols).expect("normal forms are elementary");
    let trace = d.trace.as_deref().map(render_trace).unwrap_or_default();
    (rs, all.into_vec(), trace)
}

fn compile(
    io: &mut Io<'_>,
    file: &PathBuf,
    output: Option<&PathBuf>,
    pretty: bool,
    trace: bool,
    seed: Option<u64>,
) -> i32 {
    let parsed = match load(io, file) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let strategy = seed.map_or(Strategy::Deterministic, Strategy::Random);
    let opts = DesugarOptions {
        trace,
        ..Default::default()
    };
    let (rs, ds, trace_text) = compile_spec(&parsed, strategy, &opts);
    let _ = io.err.write_all(trace_text.as_bytes());
    io.diagnostics(&ds);
    let mode = if pretty { PrintMode::Pretty } else { PrintMode::Canonical };
    let text = print_rules(&rs, mode);
    match output {
        Some(path) => {
            if let Err(e) = fs::write(path, text) {
                return io.fail(format!("cannot write {}: {e}", path.display()));
            }
        }
        None => {
            let _ = io.out.write_all(text.as_bytes());
        }
    }
    status(&ds)
}

fn check(io: &mut Io<'_>, file: &PathBuf) -> i32 {
    let parsed = match load(io, file) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let mut all = DiagnosticSet::new();
    all.extend(parsed.diagnostics.iter().cloned());
    all.extend(precheck(&parsed.spec));
    let ds = all.into_vec();
    io.diagnostics(&ds);
    status(&ds)
}

fn query(text: &str, symbols: &SymbolTable) -> Result<Term, String> {
    let forms = parse_sexprs(text, "--term").map_err(|e| e.to_string())?;
    let [form] = &forms[..] else {
        return Err(format!("expected one term, found {}", forms.len()));
    };
    let t = parse_term(form, symbols).map_err(|e| e.to_string())?;
    if !t.is_ground() {
        return Err(format!("{t} is not ground"));
    }
    Ok(t)
}

fn run(
    io: &mut Io<'_>,
    file: &PathBuf,
    term: &str,
    max_steps: Option<usize>,
    max_depth: Option<usize>,
    rules: bool,
) -> i32 {
    let rs = if rules {
        let text = match read(io, file) {
            Ok(t) => t,
            Err(code) => return code,
        };
        match parse_rules(&text, &file.display().to_string(), &SymbolTable::new()) {
            Ok(rs) => rs,
            Err(e) => {
                io.diagnostics(&[e.to_diagnostic()]);
                return EXIT_SPEC_ERROR;
            }
        }
    } else {
        let parsed = match load(io, file) {
            Ok(p) => p,
            Err(code) => return code,
        };
        let (rs, ds, _) = compile_spec(&parsed, Strategy::Deterministic, &DesugarOptions::default());
        io.diagnostics(&ds);
        if has_errors(&ds) {
            return EXIT_SPEC_ERROR;
        }
        rs
    };
    let t = match query(term, &rs.symbols) {
        Ok(t) => t,
        Err(e) => return io.fail(format!("bad --term: {e}")),
    };
    let mut budget = Budget::default();
    if let Some(n) = max_steps {
        budget.max_steps = n;
    }
    if let Some(n) = max_depth {
        budget.max_condition_depth = n;
    }
    // Condition evaluation recurses once per nesting level.
    let outcome = std::thread::scope(|s| {
        std::thread::Builder::new()
            .stack_size(EVAL_STACK)
            .spawn_scoped(s, || Evaluator::new(&rs, budget).normalize(&t))
            .expect("spawn evaluator thread")
            .join()
    });
    let Ok(outcome) = outcome else {
        return io.fail("evaluator crashed");
    };
    let _ = writeln!(io.out, "{outcome}");
    EXIT_OK
}

fn expand(io: &mut Io<'_>, file: &PathBuf, k: usize) -> i32 {
    let parsed = match load(io, file) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let Some(rule) = parsed.spec.rules.get(k) else {
        return io.fail(format!(
            "rule index {k} out of range: {} has {} macro-rule(s)",
            file.display(),
            parsed.spec.rules.len()
        ));
    };
    let opts = DesugarOptions {
        trace: true,
        ..Default::default()
    };
    let outcome = normalize_rule(rule, k, &parsed.spec.symbols, Strategy::Deterministic, &opts);
    let _ = io.out.write_all(render_trace(&outcome.trace).as_bytes());
    for r in &outcome.rules {
        let _ = writeln!(io.out, "RESULT {r}");
    }
    io.diagnostics(&outcome.diagnostics);
    status(&outcome.diagnostics)
}

/// Run `mrc` with the given arguments (including the program name) and
/// return its exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
            } else {
                let _ = out.write_all(text.as_bytes());
            }
            return code;
        }
    };
    let mut io = Io { out, err };
    match &cli.command {
        Command::Compile {
            file,
            output,
            pretty,
            trace,
            seed,
        } => compile(&mut io, file, output.as_ref(), *pretty, *trace, *seed),
        Command::Check { file } => check(&mut io, file),
        Command::Run {
            file,
            term,
            max_steps,
            max_depth,
            rules,
        } => run(&mut io, file, term, *max_steps, *max_depth, *rules),
        Command::Expand { file, rule_index } => expand(&mut io, file, *rule_index),
    }
}
