//! Positive/negative-conditional rule systems: the compiler's output.

use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::desugar::ElementaryMacroRule;
use crate::sexpr::{parse_sexprs, SExpr};
use crate::surface::{parse_term, CondKind, SurfaceError, SymbolTable, Term};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConditionAtom {
    Eq(Term, Term),
    Ineq(Term, Term),
    Def(Term),
}

impl ConditionAtom {
    pub fn to_sexpr(&self) -> SExpr {
        match self {
            ConditionAtom::Eq(a, b) => SExpr::list(vec![SExpr::atom("="), a.to_sexpr(), b.to_sexpr()]),
            ConditionAtom::Ineq(a, b) => SExpr::list(vec![SExpr::atom("#"), a.to_sexpr(), b.to_sexpr()]),
            ConditionAtom::Def(a) => SExpr::list(vec![SExpr::atom("def"), a.to_sexpr()]),
        }
    }

    /// Infix form: `a = b`, `a # b`, `def a`.
    pub fn pretty(&self) -> String {
        match self {
            ConditionAtom::Eq(a, b) => format!("{a} = {b}"),
            ConditionAtom::Ineq(a, b) => format!("{a} # {b}"),
            ConditionAtom::Def(a) => format!("def {a}"),
        }
    }
}

impl fmt::Display for ConditionAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_sexpr())
    }
}

/// `lhs = rhs <== conditions`. Condition order matters.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConditionalRule {
    pub lhs: Term,
    pub rhs: Term,
    pub conditions: Vec<ConditionAtom>,
}

impl ConditionalRule {
    pub fn new(lhs: Term, rhs: Term, conditions: Vec<ConditionAtom>) -> Self {
        ConditionalRule { lhs, rhs, conditions }
    }

    pub fn to_sexpr(&self) -> SExpr {
        SExpr::list(vec![
            SExpr::atom("rule"),
            self.lhs.to_sexpr(),
            self.rhs.to_sexpr(),
            SExpr::list(self.conditions.iter().map(ConditionAtom::to_sexpr).collect()),
        ])
    }

    pub fn pretty(&self) -> String {
        if self.conditions.is_empty() {
            format!("{} = {}", self.lhs, self.rhs)
        } else {
            let conds: Vec<String> = self.conditions.iter().map(ConditionAtom::pretty).collect();
            format!("{} = {} <== {}", self.lhs, self.rhs, conds.join(", "))
        }
    }
}

impl fmt::Display for ConditionalRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_sexpr())
    }
}

/// Rules in derivation order. Two systems are the same when their rule
/// multisets are; see [`system_equal`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RuleSystem {
    pub symbols: SymbolTable,
    pub rules: Vec<ConditionalRule>,
}

impl RuleSystem {
    pub fn new(symbols: SymbolTable, rules: Vec<ConditionalRule>) -> Self {
        RuleSystem { symbols, rules }
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }
}

#[derive(Error, Debug, Clone, PartialEq)]
pub enum EmitError {
    #[error("not an elementary macro-rule: {0}")]
    NotElementary(String),
}

/// One conditional rule per elementary macro-rule, conditions in order.
pub fn emit(elems: &[ElementaryMacroRule], symbols: &SymbolTable) -> Result<RuleSystem, EmitError> {
    let mut rules = Vec::with_capacity(elems.len());
    for e in elems {
        if !e.lhs.is_app() {
            return Err(EmitError::NotElementary(e.to_string()));
        }
        let conditions = e
            .conditions
            .iter()
            .map(|c| match &c.kind {
                CondKind::Eq(a, b) => Ok(ConditionAtom::Eq(a.clone(), b.clone())),
                CondKind::Ineq(a, b) => Ok(ConditionAtom::Ineq(a.clone(), b.clone())),
                CondKind::Def(a) => Ok(ConditionAtom::Def(a.clone())),
                _ => Err(EmitError::NotElementary(e.to_string())),
            })
            .collect::<Result<_, _>>()?;
        rules.push(ConditionalRule::new(e.lhs.clone(), e.rhs.clone(), conditions));
    }
    Ok(RuleSystem::new(symbols.clone(), rules))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PrintMode {
    /// Declarations, then one `(rule LHS RHS (COND …))` per line.
    #[default]
    Canonical,
    /// One `LHS = RHS <== c1, c2` per line.
    Pretty,
}

pub fn print_rules(rs: &RuleSystem, mode: PrintMode) -> String {
    let mut out = String::new();
    match mode {
        PrintMode::Canonical => {
            for d in rs.symbols.to_declarations() {
                let _ = writeln!(out, "{d}");
            }
            for r in &rs.rules {
                let _ = writeln!(out, "{r}");
            }
        }
        PrintMode::Pretty => {
            for r in &rs.rules {
                let _ = writeln!(out, "{}", r.pretty());
            }
        }
    }
    out
}

fn parse_atom(e: &SExpr, symbols: &SymbolTable) -> Result<ConditionAtom, SurfaceError> {
    let bad = || SurfaceError::grammar(e, "(= a b), (# a b) or (def a)", &e.to_string());
    let items = e.as_list().ok_or_else(bad)?;
    match (e.head(), items) {
        (Some("="), [_, a, b]) => Ok(ConditionAtom::Eq(parse_term(a, symbols)?, parse_term(b, symbols)?)),
        (Some("#"), [_, a, b]) => Ok(ConditionAtom::Ineq(parse_term(a, symbols)?, parse_term(b, symbols)?)),
        (Some("def"), [_, a]) => Ok(ConditionAtom::Def(parse_term(a, symbols)?)),
        _ => Err(bad()),
    }
}

fn parse_rule(e: &SExpr, symbols: &SymbolTable) -> Result<ConditionalRule, SurfaceError> {
    let shape = "(rule LHS RHS (CONDITION …))";
    let items = match (e.head(), e.as_list()) {
        (Some("rule"), Some(items)) if items.len() == 4 => items,
        _ => return Err(SurfaceError::grammar(e, shape, &e.to_string())),
    };
    let lhs = parse_term(&items[1], symbols)?;
    if !lhs.is_app() {
        return Err(SurfaceError::grammar(&items[1], "function application", &items[1].to_string()));
    }
    let rhs = parse_term(&items[2], symbols)?;
    let conds = items[3]
        .as_list()
        .ok_or_else(|| SurfaceError::grammar(&items[3], "condition list", &items[3].to_string()))?;
    let conditions = conds
        .iter()
        .map(|c| parse_atom(c, symbols))
        .collect::<Result<_, _>>()?;
    Ok(ConditionalRule::new(lhs, rhs, conditions))
}

/// Read a canonical rule file. Declarations in the file extend `symbols`.
pub fn parse_rules(text: &str, file: &str, symbols: &SymbolTable) -> Result<RuleSystem, SurfaceError> {
    let forms = parse_sexprs(text, file)?;
    let mut table = symbols.clone();
    let mut ignored = Vec::new();
    for d in forms.iter().filter(|f| SymbolTable::is_declaration(f)) {
        table.absorb(d, &mut ignored)?;
    }
    let rules = forms
        .iter()
        .filter(|f| !SymbolTable::is_declaration(f))
        .map(|f| parse_rule(f, &table))
        .collect::<Result<_, _>>()?;
    Ok(RuleSystem::new(table, rules))
}

/// Multiset equality of rules; each rule compares lhs, rhs and its
/// ordered condition list.
pub fn system_equal(a: &RuleSystem, b: &RuleSystem) -> bool {
    if a.rules.len() != b.rules.len() {
        return false;
    }
    let mut x: Vec<&ConditionalRule> = a.rules.iter().collect();
    let mut y: Vec<&ConditionalRule> = b.rules.iter().collect();
    x.sort();
    y.sort();
    x == y
}
