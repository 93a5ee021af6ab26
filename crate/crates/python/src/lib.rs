//! Python bindings: compile specifications, inspect rules and diagnostics,
//! evaluate ground terms.

use pyo3::create_exception;
use pyo3::exceptions::{PyIndexError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyList;

use macrorule::desugar::{normalize, normalize_rule, render_trace, DesugarOptions, Strategy};
use macrorule::diagnostic::{has_errors, DiagnosticSet};
use macrorule::evaluator::{Budget, EvalStatus, Evaluator};
use macrorule::rulesys::{emit, parse_rules, print_rules, ConditionalRule, PrintMode};
use macrorule::sexpr::{parse_sexprs, SExpr};
use macrorule::surface::{parse_spec, parse_term, precheck, ParsedSpec, SurfaceError};

create_exception!(macrorule, MacroRuleError, PyValueError);

fn load_error(e: SurfaceError) -> PyErr {
    MacroRuleError::new_err(e.to_diagnostic().to_string())
}

fn load(text: &str, file: &str) -> PyResult<ParsedSpec> {
    parse_spec(text, file).map_err(load_error)
}

#[pyclass(frozen, skip_from_py_object, module = "macrorule")]
#[derive(Clone)]
struct Diagnostic {
    #[pyo3(get)]
    severity: String,
    #[pyo3(get)]
    code: String,
    #[pyo3(get)]
    message: String,
    #[pyo3(get)]
    file: String,
    #[pyo3(get)]
    line: u32,
    #[pyo3(get)]
    column: u32,
    text: String,
}

impl From<&macrorule::Diagnostic> for Diagnostic {
    fn from(d: &macrorule::Diagnostic) -> Self {
        let (line, column) = d.span.start();
        Diagnostic {
            severity: d.severity.to_string(),
            code: d.code.to_string(),
            message: d.message.clone(),
            file: d.span.file.to_string(),
            line,
            column,
            text: d.to_string(),
        }
    }
}

#[pymethods]
impl Diagnostic {
    #[getter]
    fn is_error(&self) -> bool {
        self.severity == macrorule::Severity::Error.to_string()
    }

    fn __str__(&self) -> String {
        self.text.clone()
    }

    fn __repr__(&self) -> String {
        format!("<Diagnostic {}>", self.text)
    }
}

/// One conditional equation `lhs = rhs <== conditions`.
#[pyclass(frozen, skip_from_py_object, module = "macrorule")]
#[derive(Clone)]
struct Rule {
    inner: ConditionalRule,
}

#[pymethods]
impl Rule {
    #[getter]
    fn lhs(&self) -> String {
        self.inner.lhs.to_string()
    }

    #[getter]
    fn rhs(&self) -> String {
        self.inner.rhs.to_string()
    }

    /// Conditions in order, each as `a = b`, `a # b` or `def a`.
    #[getter]
    fn conditions(&self) -> Vec<String> {
        self.inner.conditions.iter().map(|c| c.pretty()).collect()
    }

    fn pretty(&self) -> String {
        self.inner.pretty()
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("<Rule {}>", self.inner.pretty())
    }

    fn __eq__(&self, other: PyRef<'_, Rule>) -> bool {
        self.inner == other.inner
    }
}

#[pyclass(frozen, skip_from_py_object, module = "macrorule")]
struct EvalOutcome {
    #[pyo3(get)]
    result: String,
    #[pyo3(get)]
    status: String,
    #[pyo3(get)]
    steps_used: usize,
}

#[pymethods]
impl EvalOutcome {
    #[getter]
    fn complete(&self) -> bool {
        self.status == EvalStatus::Complete.to_string()
    }

    fn __str__(&self) -> String {
        format!("{} ; steps={} ; status={}", self.result, self.steps_used, self.status)
    }

    fn __repr__(&self) -> String {
        format!("<EvalOutcome {}>", self.__str__())
    }
}

/// A rule system with its declarations.
#[pyclass(frozen, skip_from_py_object, module = "macrorule")]
struct RuleSystem {
    inner: macrorule::RuleSystem,
}

#[pymethods]
impl RuleSystem {
    /// Read a canonical rule file.
    #[staticmethod]
    #[pyo3(signature = (text, file = "<string>"))]
    fn parse(text: &str, file: &str) -> PyResult<Self> {
        let inner = parse_rules(text, file, &Default::default()).map_err(load_error)?;
        Ok(RuleSystem { inner })
    }

    #[getter]
    fn rules(&self) -> Vec<Rule> {
        self.inner.rules.iter().map(|r| Rule { inner: r.clone() }).collect()
    }

    #[pyo3(signature = (pretty = false))]
    fn print(&self, pretty: bool) -> String {
        let mode = if pretty { PrintMode::Pretty } else { PrintMode::Canonical };
        print_rules(&self.inner, mode)
    }

    /// Normalize a ground term given as an S-expression.
    #[pyo3(signature = (term, max_steps = None, max_depth = None))]
    fn normalize(&self, term: &str, max_steps: Option<usize>, max_depth: Option<usize>) -> PyResult<EvalOutcome> {
        let forms = parse_sexprs(term, "term").map_err(|e| MacroRuleError::new_err(e.to_string()))?;
        let [form] = &forms[..] else {
            return Err(MacroRuleError::new_err(format!("expected one term, found {}", forms.len())));
        };
        let t = parse_term(form, &self.inner.symbols).map_err(load_error)?;
        if !t.is_ground() {
            return Err(MacroRuleError::new_err(format!("{t} is not ground")));
        }
        let mut budget = Budget::default();
        budget.max_steps = max_steps.unwrap_or(budget.max_steps);
        budget.max_condition_depth = max_depth.unwrap_or(budget.max_condition_depth);
        // Condition evaluation recurses once per nesting level.
        let out = std::thread::scope(|s| {
            std::thread::Builder::new()
                .stack_size(1 << 30)
                .spawn_scoped(s, || Evaluator::new(&self.inner, budget).normalize(&t))
                .map_err(|e| MacroRuleError::new_err(e.to_string()))?
                .join()
                .map_err(|_| MacroRuleError::new_err("evaluator crashed"))
        })?;
        Ok(EvalOutcome {
            result: out.result.to_string(),
            status: out.status.to_string(),
            steps_used: out.steps_used,
        })
    }

    /// Same rules as a multiset, each with the same condition order.
    fn equivalent(&self, other: PyRef<'_, RuleSystem>) -> bool {
        macrorule::system_equal(&self.inner, &other.inner)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __str__(&self) -> String {
        self.print(false)
    }
}

/// Rules and diagnostics from compiling one specification.
#[pyclass(frozen, skip_from_py_object, module = "macrorule")]
struct Compiled {
    #[pyo3(get)]
    system: Py<RuleSystem>,
    #[pyo3(get)]
    diagnostics: Vec<Diagnostic>,
    #[pyo3(get)]
    trace: Option<String>,
}

#[pymethods]
impl Compiled {
    #[getter]
    fn has_errors(&self) -> bool {
        self.diagnostics.iter().any(|d| d.is_error())
    }

    #[getter]
    fn rules(&self) -> Vec<Rule> {
        self.system.get().rules()
    }
}

/// Desugar a specification. With a seed, redexes are picked at random.
#[pyfunction]
#[pyo3(signature = (text, file = "<string>", seed = None, trace = false))]
fn compile(py: Python<'_>, text: &str, file: &str, seed: Option<u64>, trace: bool) -> PyResult<Compiled> {
    let parsed = load(text, file)?;
    let strategy = seed.map_or(Strategy::Deterministic, Strategy::Random);
    let opts = DesugarOptions {
        trace,
        ..Default::default()
    };
    let d = normalize(&parsed.spec, strategy, &opts);
    let mut all = DiagnosticSet::new();
    all.extend(parsed.diagnostics.iter().cloned());
    all.extend(d.diagnostics.iter().cloned());
    let inner = emit(&d.rules, &parsed.spec.symbols).map_err(|e| MacroRuleError::new_err(e.to_string()))?;
    Ok(Compiled {
        system: Py::new(py, RuleSystem { inner })?,
        diagnostics: all.iter().map(Diagnostic::from).collect(),
        trace: d.trace.as_deref().map(render_trace),
    })
}

/// Diagnostics of a specification without desugaring it.
#[pyfunction]
#[pyo3(signature = (text, file = "<string>"))]
fn check(text: &str, file: &str) -> PyResult<Vec<Diagnostic>> {
    let parsed = load(text, file)?;
    let mut all = DiagnosticSet::new();
    all.extend(parsed.diagnostics.iter().cloned());
    all.extend(precheck(&parsed.spec));
    Ok(all.iter().map(Diagnostic::from).collect())
}

/// Deterministic derivation of macro-rule `index`: the trace and the
/// elementary macro-rules it ends in.
#[pyfunction]
#[pyo3(signature = (text, index, file = "<string>"))]
fn expand(text: &str, index: usize, file: &str) -> PyResult<(String, Vec<String>)> {
    let parsed = load(text, file)?;
    let rule = parsed
        .spec
        .rules
        .get(index)
        .ok_or_else(|| PyIndexError::new_err(format!("rule index {index} out of range")))?;
    let opts = DesugarOptions {
        trace: true,
        ..Default::default()
    };
    let out = normalize_rule(rule, index, &parsed.spec.symbols, Strategy::Deterministic, &opts);
    if has_errors(&out.diagnostics) {
        let msg: Vec<String> = out.diagnostics.iter().map(ToString::to_string).collect();
        return Err(MacroRuleError::new_err(msg.join("\n")));
    }
    Ok((render_trace(&out.trace), out.rules.iter().map(ToString::to_string).collect()))
}

fn to_py(py: Python<'_>, e: &SExpr) -> PyResult<Py<PyAny>> {
    match e {
        SExpr::Atom { text, .. } => Ok(text.into_pyobject(py)?.into_any().unbind()),
        SExpr::List { items, .. } => {
            let items = items.iter().map(|i| to_py(py, i)).collect::<PyResult<Vec<_>>>()?;
            Ok(PyList::new(py, items)?.into_any().unbind())
        }
    }
}

/// Read S-expressions into nested lists of strings.
#[pyfunction]
#[pyo3(signature = (text, file = "<string>"))]
fn read_sexprs(py: Python<'_>, text: &str, file: &str) -> PyResult<Vec<Py<PyAny>>> {
    let forms = parse_sexprs(text, file).map_err(|e| MacroRuleError::new_err(e.to_string()))?;
    forms.iter().map(|f| to_py(py, f)).collect()
}

#[pymodule]
#[pyo3(name = "macrorule")]
fn macrorule_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("MacroRuleError", m.py().get_type::<MacroRuleError>())?;
    m.add_class::<Diagnostic>()?;
    m.add_class::<Rule>()?;
    m.add_class::<EvalOutcome>()?;
    m.add_class::<RuleSystem>()?;
    m.add_class::<Compiled>()?;
    m.add_function(wrap_pyfunction!(compile, m)?)?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add_function(wrap_pyfunction!(expand, m)?)?;
    m.add_function(wrap_pyfunction!(read_sexprs, m)?)?;
    Ok(())
}
