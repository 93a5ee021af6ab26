//! Macro-rule specifications: parsing, desugaring into positive/negative
//! conditional rewrite rules, and a bounded evaluator for the result.

pub mod cli;
pub mod desugar;
pub mod diagnostic;
pub mod evaluator;
pub mod rulesys;
pub mod sexpr;
pub mod surface;

pub use desugar::{normalize, DesugarOptions, Desugared, ElementaryMacroRule, Strategy};
pub use diagnostic::{Diagnostic, Severity};
pub use evaluator::{normalize_term, Budget, EvalOutcome, EvalStatus};
pub use rulesys::{emit, parse_rules, print_rules, system_equal, ConditionAtom, ConditionalRule, PrintMode, RuleSystem};
pub use surface::{parse_spec, precheck, SpecFile};
