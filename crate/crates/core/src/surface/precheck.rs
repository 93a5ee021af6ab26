//! Single-pass diagnostics. Nothing is rewritten here: each macro-rule is
//! expanded into its condition paths, and every path is tracked only as
//! variable sets while binders are moved into place.

use std::collections::BTreeSet;

use super::ast::{CondKind, Condition, FreeVars, MacroRule, MatchKind, MetaTerm, Name, Origin};
use super::symbols::SymbolTable;
use super::SpecFile;
use crate::diagnostic::{code, Diagnostic, DiagnosticSet};

pub(crate) fn var_list(vars: &BTreeSet<Name>) -> String {
    vars.iter().map(|v| &**v).collect::<Vec<_>>().join(", ")
}

fn occur(vars: &BTreeSet<Name>) -> &'static str {
    if vars.len() == 1 {
        "occurs"
    } else {
        "occur"
    }
}

pub(crate) fn rebind_match(origin: &Origin, var: &str) -> Diagnostic {
    Diagnostic::warning(
        code::REBIND_MATCH,
        origin.span().clone(),
        format!("{} re-binds {var}", origin.text()),
    )
}

pub(crate) fn rebind_let(origin: &Origin, var: &str) -> Diagnostic {
    Diagnostic::warning(
        code::REBIND_LET,
        origin.span().clone(),
        format!("{} re-binds {var}", origin.text()),
    )
}

pub(crate) fn undeclared_true(origin: &Origin) -> Diagnostic {
    Diagnostic::error(
        code::UNDECLARED_TRUE,
        origin.span().clone(),
        format!(
            "predicate {} is compared with `true`, which is not a declared constant",
            origin.text()
        ),
    )
}

pub(crate) fn empty_case_before_else(origin: &Origin) -> Diagnostic {
    Diagnostic::warning(
        code::EMPTY_CASE_BEFORE_ELSE,
        origin.span().clone(),
        format!(
            "{} has an empty condition list before its else branch, so the else branch never applies",
            origin.text()
        ),
    )
}

pub(crate) fn let_rebound_by_match(let_origin: &Origin, match_origin: &Origin, var: &str) -> Diagnostic {
    Diagnostic::warning(
        code::LET_REBOUND_BY_MATCH,
        let_origin.span().clone(),
        format!(
            "{} is dropped: {var} is re-bound by {}",
            let_origin.text(),
            match_origin.text()
        ),
    )
}

pub(crate) fn let_match_same_var(let_origin: &Origin, match_origin: &Origin, var: &str) -> Diagnostic {
    Diagnostic::error(
        code::LET_MATCH_SAME_VAR,
        let_origin.span().clone(),
        format!(
            "{} and the following {} both bind {var}",
            let_origin.text(),
            match_origin.text()
        ),
    )
}

pub(crate) fn match_shift_capture(match_origin: &Origin, vars: &BTreeSet<Name>) -> Diagnostic {
    Diagnostic::error(
        code::MATCH_SHIFT_CAPTURE,
        match_origin.span().clone(),
        format!(
            "{} binds {}, which already {} to its left",
            match_origin.text(),
            var_list(vars),
            occur(vars)
        ),
    )
}

pub(crate) fn lhs_match_capture(match_origin: &Origin, vars: &BTreeSet<Name>) -> Diagnostic {
    Diagnostic::error(
        code::LHS_MATCH_CAPTURE,
        match_origin.span().clone(),
        format!(
            "{} binds {}, which already {} in the left-hand side",
            match_origin.text(),
            var_list(vars),
            occur(vars)
        ),
    )
}

pub(crate) fn unbound_variable(rule: &Origin, lhs: &str, vars: &BTreeSet<Name>) -> Diagnostic {
    Diagnostic::note(
        code::UNBOUND_VARIABLE,
        rule.span().clone(),
        format!(
            "a rule derived from {lhs} uses {}, not bound by its left-hand side",
            var_list(vars)
        ),
    )
}

/// Diagnostics that belong to one construct regardless of where it ends up.
pub(crate) fn local_condition(c: &Condition, symbols: &SymbolTable, out: &mut Vec<Diagnostic>) {
    match &c.kind {
        CondKind::Pred(_) if symbols.true_constant().is_none() => out.push(undeclared_true(&c.origin)),
        CondKind::Match {
            kind: MatchKind::Single,
            var,
            term,
        } if term.contains_var(var) => out.push(rebind_match(&c.origin, var)),
        CondKind::Let { term, var } if term.contains_var(var) => out.push(rebind_let(&c.origin, var)),
        _ => {}
    }
    for child in c.children() {
        local_condition(child, symbols, out);
    }
}

pub(crate) fn local_meta(m: &MetaTerm, symbols: &SymbolTable, out: &mut Vec<Diagnostic>) {
    match m {
        MetaTerm::Plain(_) => {}
        MetaTerm::If {
            conds,
            then,
            otherwise,
            origin,
        } => {
            if conds.is_empty() {
                out.push(empty_case_before_else(origin));
            }
            conds.iter().for_each(|c| local_condition(c, symbols, out));
            local_meta(then, symbols, out);
            local_meta(otherwise, symbols, out);
        }
        MetaTerm::CaseElse {
            cases,
            otherwise,
            origin,
        } => {
            if cases.iter().any(|c| c.conds.is_empty()) {
                out.push(empty_case_before_else(origin));
            }
            for case in cases {
                case.conds.iter().for_each(|c| local_condition(c, symbols, out));
                local_meta(&case.body, symbols, out);
            }
            local_meta(otherwise, symbols, out);
        }
        MetaTerm::Case { cases, .. } => {
            for case in cases {
                case.conds.iter().for_each(|c| local_condition(c, symbols, out));
                local_meta(&case.body, symbols, out);
            }
        }
    }
}

/// A condition on one path, reduced to what the binder checks look at.
#[derive(Clone, Debug)]
enum Item<'a> {
    Basic(BTreeSet<Name>),
    Match {
        var: Name,
        term: BTreeSet<Name>,
        origin: &'a Origin,
    },
    Let {
        term: BTreeSet<Name>,
        var: Name,
        origin: &'a Origin,
    },
}

type Alternatives<'a> = Vec<Vec<Item<'a>>>;

/// Variables of `a{var ↦ t}` given only the variable sets.
fn subst_vars(a: &BTreeSet<Name>, var: &Name, t: &BTreeSet<Name>) -> BTreeSet<Name> {
    if a.contains(var) {
        let mut out = a.clone();
        out.remove(var);
        out.extend(t.iter().cloned());
        out
    } else {
        a.clone()
    }
}

fn product<'a>(parts: Vec<Alternatives<'a>>) -> Alternatives<'a> {
    parts.into_iter().fold(vec![Vec::new()], |acc, alts| {
        let mut out = Vec::with_capacity(acc.len() * alts.len());
        for prefix in &acc {
            for alt in &alts {
                let mut seq = prefix.clone();
                seq.extend(alt.iter().cloned());
                out.push(seq);
            }
        }
        out
    })
}

/// The condition sequences a condition stands for, one per resulting case.
fn expand(c: &Condition, negated: bool) -> Alternatives<'_> {
    match &c.kind {
        CondKind::Eq(..) | CondKind::Ineq(..) | CondKind::Def(_) | CondKind::Pred(_) => {
            vec![vec![Item::Basic(c.free_vars())]]
        }
        CondKind::Match { kind, var, term } => {
            let m = Item::Match {
                var: var.clone(),
                term: term.free_vars(),
                origin: &c.origin,
            };
            if *kind == MatchKind::Single && !term.contains_var(var) {
                let l = Item::Let {
                    term: term.free_vars(),
                    var: var.clone(),
                    origin: &c.origin,
                };
                vec![vec![m, l]]
            } else {
                vec![vec![m]]
            }
        }
        CondKind::Let { term, var } => vec![vec![Item::Let {
            term: term.free_vars(),
            var: var.clone(),
            origin: &c.origin,
        }]],
        CondKind::Not(inner) => expand(inner, !negated),
        CondKind::And(cs) | CondKind::Or(cs) => {
            let conjunctive = matches!(c.kind, CondKind::And(_)) != negated;
            let parts: Vec<_> = cs.iter().map(|x| expand(x, negated)).collect();
            if conjunctive {
                product(parts)
            } else {
                parts.into_iter().flatten().collect()
            }
        }
        CondKind::SeqAnd(cs) | CondKind::SeqOr(cs) => {
            let conjunctive = matches!(c.kind, CondKind::SeqAnd(_)) != negated;
            if conjunctive {
                product(cs.iter().map(|x| expand(x, negated)).collect())
            } else {
                // The i-th alternative: the first i-1 arguments fail, the i-th holds.
                (0..cs.len())
                    .flat_map(|i| {
                        let mut parts: Vec<_> = cs[..i].iter().map(|x| expand(x, !negated)).collect();
                        parts.push(expand(&cs[i], negated));
                        product(parts)
                    })
                    .collect()
            }
        }
    }
}

fn expand_list(conds: &[Condition]) -> Alternatives<'_> {
    product(conds.iter().map(|c| expand(c, false)).collect())
}

fn join<'a>(alts: Alternatives<'a>, body: &'a MetaTerm) -> Vec<(Vec<Item<'a>>, BTreeSet<Name>)> {
    let tails = paths(body);
    let mut out = Vec::new();
    for alt in alts {
        for (items, rhs) in &tails {
            let mut seq = alt.clone();
            seq.extend(items.iter().cloned());
            out.push((seq, rhs.clone()));
        }
    }
    out
}

/// Every live path through a meta-term: its conditions and the variables
/// of the term it ends in.
fn paths(m: &MetaTerm) -> Vec<(Vec<Item<'_>>, BTreeSet<Name>)> {
    match m {
        MetaTerm::Plain(t) => vec![(Vec::new(), t.free_vars())],
        MetaTerm::Case { cases, .. } => cases
            .iter()
            .flat_map(|c| join(expand_list(&c.conds), &c.body))
            .collect(),
        MetaTerm::If {
            conds,
            then,
            otherwise,
            ..
        } => {
            let mut out = join(expand_list(conds), then);
            out.extend(join(else_alternatives(std::iter::once(&conds[..])), otherwise));
            out
        }
        MetaTerm::CaseElse {
            cases, otherwise, ..
        } => {
            let mut out: Vec<_> = cases
                .iter()
                .flat_map(|c| join(expand_list(&c.conds), &c.body))
                .collect();
            out.extend(join(
                else_alternatives(cases.iter().map(|c| &c.conds[..])),
                otherwise,
            ));
            out
        }
    }
}

/// The else branch requires, for every case, that one of its conditions fails.
fn else_alternatives<'a>(lists: impl Iterator<Item = &'a [Condition]>) -> Alternatives<'a> {
    product(
        lists
            .map(|conds| conds.iter().flat_map(|c| expand(c, true)).collect())
            .collect(),
    )
}

fn is_basic(i: &Item<'_>) -> bool {
    matches!(i, Item::Basic(_))
}

fn is_match(i: &Item<'_>) -> bool {
    matches!(i, Item::Match { .. })
}

fn is_let(i: &Item<'_>) -> bool {
    matches!(i, Item::Let { .. })
}

fn find_pair(items: &[Item<'_>], first: fn(&Item<'_>) -> bool, second: fn(&Item<'_>) -> bool) -> Option<usize> {
    items.windows(2).position(|w| first(&w[0]) && second(&w[1]))
}

/// Move binders into place the way the deterministic strategy does and
/// report what goes wrong on the way.
fn check_path(
    rule: &MacroRule,
    mut items: Vec<Item<'_>>,
    mut rhs: BTreeSet<Name>,
    out: &mut Vec<Diagnostic>,
) {
    loop {
        if let Some(i) = find_pair(&items, is_basic, is_match) {
            let (Item::Basic(vars), Item::Match { var, term, origin }) = (&items[i], &items[i + 1]) else {
                unreachable!()
            };
            let mut bound = term.clone();
            bound.remove(var);
            let captured: BTreeSet<Name> = vars.intersection(&bound).cloned().collect();
            if !captured.is_empty() {
                out.push(match_shift_capture(origin, &captured));
            }
            let moved = Item::Basic(subst_vars(vars, var, term));
            items[i] = moved;
            items.swap(i, i + 1);
        } else if let Some(i) = find_pair(&items, is_let, is_basic) {
            let (Item::Let { term, var, .. }, Item::Basic(vars)) = (&items[i], &items[i + 1]) else {
                unreachable!()
            };
            items[i + 1] = Item::Basic(subst_vars(vars, var, term));
            items.swap(i, i + 1);
        } else if let Some(i) = find_pair(&items, is_let, is_match) {
            let (
                Item::Let {
                    term: t1,
                    var: v1,
                    origin: lo,
                },
                Item::Match {
                    var: v2,
                    term: t2,
                    origin: mo,
                },
            ) = (&items[i], &items[i + 1])
            else {
                unreachable!()
            };
            if v1 == v2 {
                out.push(let_match_same_var(lo, mo, v1));
                items.remove(i);
            } else if t2.contains(v1) {
                out.push(let_rebound_by_match(lo, mo, v1));
                items.remove(i);
            } else {
                let moved = Item::Let {
                    term: subst_vars(t1, v2, t2),
                    var: v1.clone(),
                    origin: lo,
                };
                items[i] = moved;
                items.swap(i, i + 1);
            }
        } else {
            break;
        }
    }

    // Now matches lead, basic atoms follow, lets trail.
    let mut lhs = rule.lhs.free_vars();
    let mut conds = BTreeSet::new();
    let mut lets = Vec::new();
    for item in &items {
        match item {
            Item::Match { var, term, origin } => {
                let mut bound = term.clone();
                bound.remove(var);
                let captured: BTreeSet<Name> = lhs.intersection(&bound).cloned().collect();
                if !captured.is_empty() {
                    out.push(lhs_match_capture(origin, &captured));
                }
                lhs = subst_vars(&lhs, var, term);
            }
            Item::Basic(vars) => conds.extend(vars.iter().cloned()),
            Item::Let { term, var, .. } => lets.push((term, var)),
        }
    }
    for (term, var) in lets.into_iter().rev() {
        rhs = subst_vars(&rhs, var, term);
    }
    conds.extend(rhs);
    let unbound: BTreeSet<Name> = conds.difference(&lhs).cloned().collect();
    if !unbound.is_empty() {
        out.push(unbound_variable(&rule.origin, &rule.lhs.to_string(), &unbound));
    }
}

/// Diagnostics of one macro-rule, unsorted and possibly repeated.
pub(crate) fn precheck_rule(rule: &MacroRule, symbols: &SymbolTable) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    local_meta(&rule.body, symbols, &mut out);
    for (items, rhs) in paths(&rule.body) {
        check_path(rule, items, rhs, &mut out);
    }
    out
}

/// Every warning, error and note that desugaring these macro-rules will report,
/// deduplicated and in source order.
pub fn precheck(spec: &SpecFile) -> Vec<Diagnostic> {
    let mut set = DiagnosticSet::new();
    for rule in &spec.rules {
        set.extend(precheck_rule(rule, &spec.symbols));
    }
    set.into_vec()
}
