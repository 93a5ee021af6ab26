use std::collections::BTreeSet;
use std::fmt;

use crate::sexpr::SourceSpan;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Severity {
    Note,
    Warning,
    Error,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Note => "NOTE",
            Severity::Warning => "WARNING",
            Severity::Error => "ERROR",
        })
    }
}

/// Stable diagnostic codes.
pub mod code {
    pub const REBIND_MATCH: &str = "rebind-match";
    pub const REBIND_LET: &str = "rebind-let";
    pub const LET_REBOUND_BY_MATCH: &str = "let-rebound-by-match";
    pub const LET_MATCH_SAME_VAR: &str = "let-match-same-var";
    pub const MATCH_SHIFT_CAPTURE: &str = "match-shift-capture";
    pub const LHS_MATCH_CAPTURE: &str = "lhs-match-capture";
    pub const UNDECLARED_TRUE: &str = "undeclared-true";
    pub const EMPTY_CASE_BEFORE_ELSE: &str = "empty-case-before-else";
    pub const UNBOUND_VARIABLE: &str = "unbound-variable";
    pub const STEP_BUDGET_EXCEEDED: &str = "step-budget-exceeded";
    pub const GRAMMAR: &str = "grammar";
    pub const SYNTAX: &str = "syntax";
    pub const NAME_CLASS: &str = "name-class";
    pub const RESERVED_FUNCTION_NAME: &str = "reserved-function-name";
    pub const RESERVED_NAME: &str = "reserved-name";
}

/// An error, warning, or note tied to the source construct it is about.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Diagnostic {
    // Field order gives the source-order sort used for reporting.
    pub span: SourceSpan,
    pub severity: Severity,
    pub code: &'static str,
    pub message: String,
}

impl Diagnostic {
    pub fn new(
        severity: Severity,
        code: &'static str,
        span: SourceSpan,
        message: impl Into<String>,
    ) -> Self {
        Diagnostic {
            span,
            severity,
            code,
            message: message.into(),
        }
    }

    pub fn error(code: &'static str, span: SourceSpan, message: impl Into<String>) -> Self {
        Self::new(Severity::Error, code, span, message)
    }

    pub fn warning(code: &'static str, span: SourceSpan, message: impl Into<String>) -> Self {
        Self::new(Severity::Warning, code, span, message)
    }

    pub fn note(code: &'static str, span: SourceSpan, message: impl Into<String>) -> Self {
        Self::new(Severity::Note, code, span, message)
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} [{}] {}",
            self.span, self.severity, self.code, self.message
        )
    }
}

/// Diagnostics deduplicated by (span, severity, code, message) and kept in
/// source order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DiagnosticSet {
    items: BTreeSet<Diagnostic>,
}

impl DiagnosticSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, d: Diagnostic) {
        self.items.insert(d);
    }

    pub fn extend(&mut self, ds: impl IntoIterator<Item = Diagnostic>) {
        self.items.extend(ds);
    }

    pub fn has_errors(&self) -> bool {
        self.items.iter().any(Diagnostic::is_error)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Diagnostic> {
        self.items.iter()
    }

    pub fn into_vec(self) -> Vec<Diagnostic> {
        self.items.into_iter().collect()
    }
}

pub fn has_errors(ds: &[Diagnostic]) -> bool {
    ds.iter().any(Diagnostic::is_error)
}

/// Render a diagnostic list, one per line.
pub fn render(ds: &[Diagnostic]) -> String {
    ds.iter().map(|d| format!("{d}\n")).collect()
}
