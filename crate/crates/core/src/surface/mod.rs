//! Typed surface syntax: symbol classification, the macro-rule grammar,
//! and the single-pass diagnostic check.

mod ast;
mod parse;
pub(crate) mod precheck;
mod symbols;

pub use ast::{
    cond_list_sexpr, Case, CondKind, Condition, FreeVars, MacroRule, MatchKind, MetaTerm, Name,
    Origin, Term, TermKind,
};
pub use parse::{parse_condition, parse_macro_rule, parse_meta_term, parse_spec, parse_term, ConditionContext};
pub use precheck::precheck;
pub use symbols::{build_symbol_table, SymbolClass, SymbolTable, SOFT_RESERVED};

use thiserror::Error;

use crate::diagnostic::{code, Diagnostic};
use crate::sexpr::{SExpr, SexprError, SourceSpan};

#[derive(Error, Debug, Clone, PartialEq)]
pub enum SurfaceError {
    #[error(transparent)]
    Syntax(#[from] SexprError),
    #[error("{span}: `{name}` is declared both as {first} and as {second}")]
    NameClass {
        name: String,
        span: SourceSpan,
        first: SymbolClass,
        second: SymbolClass,
    },
    #[error("{span}: `{name}` is reserved and cannot be declared")]
    ReservedFunctionName { name: String, span: SourceSpan },
    #[error("{span}: expected {expected}, found {found}")]
    Grammar {
        span: SourceSpan,
        expected: String,
        found: String,
    },
}

impl SurfaceError {
    pub(crate) fn grammar(at: &SExpr, expected: &str, found: &str) -> Self {
        SurfaceError::Grammar {
            span: at.span().clone(),
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    pub fn span(&self) -> &SourceSpan {
        match self {
            SurfaceError::Syntax(e) => e.span(),
            SurfaceError::NameClass { span, .. }
            | SurfaceError::ReservedFunctionName { span, .. }
            | SurfaceError::Grammar { span, .. } => span,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            SurfaceError::Syntax(_) => code::SYNTAX,
            SurfaceError::NameClass { .. } => code::NAME_CLASS,
            SurfaceError::ReservedFunctionName { .. } => code::RESERVED_FUNCTION_NAME,
            SurfaceError::Grammar { .. } => code::GRAMMAR,
        }
    }

    pub fn to_diagnostic(&self) -> Diagnostic {
        let full = self.to_string();
        // Drop the "file:line:col: " prefix; the diagnostic carries the span.
        let prefix = format!("{}: ", self.span());
        let message = full.strip_prefix(&prefix).unwrap_or(&full).to_string();
        Diagnostic::error(self.code(), self.span().clone(), message)
    }
}

/// Declarations plus macro-rules, in source order.
#[derive(Clone, Debug, PartialEq)]
pub struct SpecFile {
    pub symbols: SymbolTable,
    pub rules: Vec<MacroRule>,
}

/// A spec that loaded, with load-time diagnostics: reserved-name warnings
/// and grammar errors for macro-rules that were rejected and left out.
#[derive(Clone, Debug)]
pub struct ParsedSpec {
    pub spec: SpecFile,
    pub diagnostics: Vec<Diagnostic>,
}
