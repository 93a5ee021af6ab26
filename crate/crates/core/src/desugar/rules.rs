//! The rewrite rules, one step each. Every function checks its own
//! precondition and returns `None` when it does not apply.

use std::collections::BTreeSet;

use crate::diagnostic::Diagnostic;
use crate::surface::precheck as diag;
use crate::surface::{
    Case, CondKind, Condition, FreeVars, MacroRule, MatchKind, MetaTerm, Name, SymbolTable, Term,
};

/// A rewritten value plus the diagnostics the step produced.
#[derive(Clone, Debug, PartialEq)]
pub struct Rewritten<T> {
    pub value: T,
    pub diagnostics: Vec<Diagnostic>,
}

impl<T> Rewritten<T> {
    fn with(value: T, diagnostics: Vec<Diagnostic>) -> Self {
        Rewritten { value, diagnostics }
    }
}

/// Report the construct-local diagnostics of material that a step throws away.
fn flush_conditions(conds: &[Condition], symbols: &SymbolTable, out: &mut Vec<Diagnostic>) {
    for c in conds {
        diag::local_condition(c, symbols, out);
    }
}

fn flush_case(case: &Case, symbols: &SymbolTable, out: &mut Vec<Diagnostic>) {
    flush_conditions(&case.conds, symbols, out);
    diag::local_meta(&case.body, symbols, out);
}

/// `PRED` ⇒ `(= PRED true)`.
pub fn remove_predicate(c: &Condition, symbols: &SymbolTable) -> Option<Rewritten<Condition>> {
    let CondKind::Pred(t) = &c.kind else {
        return None;
    };
    let mut diagnostics = Vec::new();
    if symbols.true_constant().is_none() {
        diagnostics.push(diag::undeclared_true(&c.origin));
    }
    let eq = c.with_kind(CondKind::Eq(t.clone(), Term::constant("true")));
    Some(Rewritten::with(eq, diagnostics))
}

pub fn remove_if(m: &MetaTerm) -> Option<MetaTerm> {
    let MetaTerm::If {
        conds,
        then,
        otherwise,
        origin,
    } = m
    else {
        return None;
    };
    Some(MetaTerm::CaseElse {
        cases: vec![Case::new(conds.clone(), (**then).clone())],
        otherwise: otherwise.clone(),
        origin: origin.clone(),
    })
}

pub fn remove_else(m: &MetaTerm) -> Option<Rewritten<MetaTerm>> {
    let MetaTerm::CaseElse {
        cases,
        otherwise,
        origin,
    } = m
    else {
        return None;
    };
    let mut diagnostics = Vec::new();
    if cases.iter().any(|c| c.conds.is_empty()) {
        diagnostics.push(diag::empty_case_before_else(origin));
    }
    let negated: Vec<Condition> = cases
        .iter()
        .map(|case| {
            let alts = case
                .conds
                .iter()
                .map(|c| c.with_kind(CondKind::Not(Box::new(c.clone()))))
                .collect();
            Condition::new(CondKind::Or(alts), origin.clone())
        })
        .collect();
    let mut out = cases.clone();
    out.push(Case::new(negated, (**otherwise).clone()));
    Some(Rewritten::with(
        MetaTerm::Case {
            cases: out,
            origin: origin.clone(),
        },
        diagnostics,
    ))
}

/// Push one negation a step inwards.
pub fn remove_not(c: &Condition) -> Option<Condition> {
    let CondKind::Not(inner) = &c.kind else {
        return None;
    };
    let negate_all = |cs: &[Condition]| -> Vec<Condition> {
        cs.iter()
            .map(|x| x.with_kind(CondKind::Not(Box::new(x.clone()))))
            .collect()
    };
    let kind = match &inner.kind {
        CondKind::Not(x) => return Some((**x).clone()),
        CondKind::And(cs) => CondKind::Or(negate_all(cs)),
        CondKind::SeqAnd(cs) => CondKind::SeqOr(negate_all(cs)),
        CondKind::Or(cs) => CondKind::And(negate_all(cs)),
        CondKind::SeqOr(cs) => CondKind::SeqAnd(negate_all(cs)),
        CondKind::Eq(a, b) => CondKind::Ineq(a.clone(), b.clone()),
        CondKind::Ineq(a, b) => CondKind::Eq(a.clone(), b.clone()),
        _ => return None,
    };
    Some(c.with_kind(kind))
}

/// Flatten the `and`/`and*` at position `pos` of a case condition list.
pub fn remove_and(list: &[Condition], pos: usize) -> Option<Vec<Condition>> {
    let (CondKind::And(args) | CondKind::SeqAnd(args)) = &list.get(pos)?.kind else {
        return None;
    };
    let mut out = list[..pos].to_vec();
    out.extend(args.iter().cloned());
    out.extend(list[pos + 1..].iter().cloned());
    Some(out)
}

/// Split case `case` of an else-free `Case` on the connective at `pos`,
/// one new case per alternative.
fn split_on(
    m: &MetaTerm,
    case: usize,
    pos: usize,
    symbols: &SymbolTable,
    alternatives: impl Fn(&CondKind) -> Option<Vec<Vec<Condition>>>,
) -> Option<Rewritten<MetaTerm>> {
    let MetaTerm::Case { cases, origin } = m else {
        return None;
    };
    if m.contains_else() {
        return None;
    }
    let target = cases.get(case)?;
    let alts = alternatives(&target.conds.get(pos)?.kind)?;
    let mut diagnostics = Vec::new();
    if alts.is_empty() {
        let mut rest = target.conds.clone();
        rest.remove(pos);
        flush_case(&Case::new(rest, target.body.clone()), symbols, &mut diagnostics);
    }
    let mut out = cases[..case].to_vec();
    for alt in alts {
        let mut conds = target.conds[..pos].to_vec();
        conds.extend(alt);
        conds.extend(target.conds[pos + 1..].iter().cloned());
        out.push(Case::new(conds, target.body.clone()));
    }
    out.extend(cases[case + 1..].iter().cloned());
    Some(Rewritten::with(
        MetaTerm::Case {
            cases: out,
            origin: origin.clone(),
        },
        diagnostics,
    ))
}

pub fn remove_or(
    m: &MetaTerm,
    case: usize,
    pos: usize,
    symbols: &SymbolTable,
) -> Option<Rewritten<MetaTerm>> {
    split_on(m, case, pos, symbols, |k| match k {
        CondKind::Or(args) => Some(args.iter().map(|a| vec![a.clone()]).collect()),
        _ => None,
    })
}

pub fn remove_seqor(
    m: &MetaTerm,
    case: usize,
    pos: usize,
    symbols: &SymbolTable,
) -> Option<Rewritten<MetaTerm>> {
    split_on(m, case, pos, symbols, |k| match k {
        CondKind::SeqOr(args) => Some(
            (0..args.len())
                .map(|i| {
                    let mut alt: Vec<Condition> = args[..i]
                        .iter()
                        .map(|x| x.with_kind(CondKind::Not(Box::new(x.clone()))))
                        .collect();
                    alt.push(args[i].clone());
                    alt
                })
                .collect(),
        ),
        _ => None,
    })
}

/// Splice the inner `Case` that is the body of case `case` into the outer one.
pub fn flatten_case_in_case(
    m: &MetaTerm,
    case: usize,
    symbols: &SymbolTable,
) -> Option<Rewritten<MetaTerm>> {
    let MetaTerm::Case { cases, origin } = m else {
        return None;
    };
    if m.contains_else() {
        return None;
    }
    let outer = cases.get(case)?;
    let MetaTerm::Case { cases: inner, .. } = &outer.body else {
        return None;
    };
    let mut diagnostics = Vec::new();
    if inner.is_empty() {
        flush_conditions(&outer.conds, symbols, &mut diagnostics);
    }
    let mut out = cases[..case].to_vec();
    for c in inner {
        let mut conds = outer.conds.clone();
        conds.extend(c.conds.iter().cloned());
        out.push(Case::new(conds, c.body.clone()));
    }
    out.extend(cases[case + 1..].iter().cloned());
    Some(Rewritten::with(
        MetaTerm::Case {
            cases: out,
            origin: origin.clone(),
        },
        diagnostics,
    ))
}

/// `(match VAR TERM)` ⇒ `(match* VAR TERM) (let TERM VAR)`, or only the
/// `match*` with a warning when VAR occurs in TERM.
pub fn remove_match(list: &[Condition], pos: usize) -> Option<Rewritten<Vec<Condition>>> {
    let c = list.get(pos)?;
    let CondKind::Match {
        kind: MatchKind::Single,
        var,
        term,
    } = &c.kind
    else {
        return None;
    };
    let double = c.with_kind(CondKind::Match {
        kind: MatchKind::Double,
        var: var.clone(),
        term: term.clone(),
    });
    let mut out = list[..pos].to_vec();
    out.push(double);
    let mut diagnostics = Vec::new();
    if term.contains_var(var) {
        diagnostics.push(diag::rebind_match(&c.origin, var));
    } else {
        out.push(c.with_kind(CondKind::Let {
            term: term.clone(),
            var: var.clone(),
        }));
    }
    out.extend(list[pos + 1..].iter().cloned());
    Some(Rewritten::with(out, diagnostics))
}

fn double_match(c: &Condition) -> Option<(&Name, &Term)> {
    match &c.kind {
        CondKind::Match {
            kind: MatchKind::Double,
            var,
            term,
        } => Some((var, term)),
        _ => None,
    }
}

fn let_atom(c: &Condition) -> Option<(&Term, &Name)> {
    match &c.kind {
        CondKind::Let { term, var } => Some((term, var)),
        _ => None,
    }
}

/// Variables of `term` other than `var`: what a match on `var` binds.
fn bound_by(var: &Name, term: &Term) -> BTreeSet<Name> {
    let mut vars = term.free_vars();
    vars.remove(var);
    vars
}

/// `BASIC-ATOM (match* VAR TERM)` ⇒ `(match* VAR TERM) BASIC-ATOM{VAR↦TERM}`
/// at positions `pos`, `pos + 1`. A captured variable is an error; the
/// shift is still performed.
pub fn shift_match_left(list: &[Condition], pos: usize) -> Option<Rewritten<Vec<Condition>>> {
    let atom = list.get(pos)?;
    let m = list.get(pos + 1)?;
    if !atom.is_basic() {
        return None;
    }
    let (var, term) = double_match(m)?;
    let captured: BTreeSet<Name> = atom
        .free_vars()
        .intersection(&bound_by(var, term))
        .cloned()
        .collect();
    let mut diagnostics = Vec::new();
    if !captured.is_empty() {
        diagnostics.push(diag::match_shift_capture(&m.origin, &captured));
    }
    let mut out = list.to_vec();
    out[pos] = m.clone();
    out[pos + 1] = atom.subst(var, term);
    Some(Rewritten::with(out, diagnostics))
}

/// `(let TERM VAR) BASIC-ATOM` ⇒ `BASIC-ATOM{VAR↦TERM} (let TERM VAR)`.
pub fn shift_let_right(list: &[Condition], pos: usize) -> Option<Rewritten<Vec<Condition>>> {
    let l = list.get(pos)?;
    let atom = list.get(pos + 1)?;
    let (term, var) = let_atom(l)?;
    if !atom.is_basic() {
        return None;
    }
    let mut diagnostics = Vec::new();
    if term.contains_var(var) {
        diagnostics.push(diag::rebind_let(&l.origin, var));
    }
    let mut out = list.to_vec();
    out[pos] = atom.subst(var, term);
    out[pos + 1] = l.clone();
    Some(Rewritten::with(out, diagnostics))
}

/// `(let TERM1 VAR1) (match* VAR2 TERM2)` at `pos`, `pos + 1`.
pub fn swap_let_match(list: &[Condition], pos: usize) -> Option<Rewritten<Vec<Condition>>> {
    let l = list.get(pos)?;
    let m = list.get(pos + 1)?;
    let (t1, v1) = let_atom(l)?;
    let (v2, t2) = double_match(m)?;
    let mut diagnostics = Vec::new();
    if t1.contains_var(v1) {
        diagnostics.push(diag::rebind_let(&l.origin, v1));
    }
    let mut out = list[..pos].to_vec();
    out.push(m.clone());
    if v1 == v2 {
        // No semantics is given for this; the let is dropped to carry on.
        diagnostics.push(diag::let_match_same_var(&l.origin, &m.origin, v1));
    } else if t2.contains_var(v1) {
        diagnostics.push(diag::let_rebound_by_match(&l.origin, &m.origin, v1));
    } else {
        out.push(l.with_kind(CondKind::Let {
            term: t1.subst(v2, t2),
            var: v1.clone(),
        }));
    }
    out.extend(list[pos + 2..].iter().cloned());
    Some(Rewritten::with(out, diagnostics))
}

pub fn split_cases(r: &MacroRule) -> Option<Vec<MacroRule>> {
    let MetaTerm::Case { cases, origin } = &r.body else {
        return None;
    };
    if cases.len() < 2 {
        return None;
    }
    Some(
        cases
            .iter()
            .map(|c| {
                MacroRule::new(
                    r.lhs.clone(),
                    MetaTerm::Case {
                        cases: vec![c.clone()],
                        origin: origin.clone(),
                    },
                    r.origin.clone(),
                )
            })
            .collect(),
    )
}

fn single_case(r: &MacroRule) -> Option<&Case> {
    match &r.body {
        MetaTerm::Case { cases, .. } if cases.len() == 1 => Some(&cases[0]),
        _ => None,
    }
}

/// Drop a leading `(match* VAR TERM)` and substitute TERM for VAR in the
/// left-hand side.
pub fn remove_leading_match(r: &MacroRule) -> Option<Rewritten<MacroRule>> {
    let case = single_case(r)?;
    let first = case.conds.first()?;
    let (var, term) = double_match(first)?;
    let captured: BTreeSet<Name> = r
        .lhs
        .free_vars()
        .intersection(&bound_by(var, term))
        .cloned()
        .collect();
    let mut diagnostics = Vec::new();
    if !captured.is_empty() {
        diagnostics.push(diag::lhs_match_capture(&first.origin, &captured));
    }
    let MetaTerm::Case { origin, .. } = &r.body else {
        unreachable!()
    };
    let body = MetaTerm::Case {
        cases: vec![Case::new(case.conds[1..].to_vec(), case.body.clone())],
        origin: origin.clone(),
    };
    Some(Rewritten::with(
        MacroRule::new(r.lhs.subst(var, term), body, r.origin.clone()),
        diagnostics,
    ))
}

/// Drop the trailing let of case `case` and substitute into its plain body.
pub fn remove_trailing_let(m: &MetaTerm, case: usize) -> Option<Rewritten<MetaTerm>> {
    let MetaTerm::Case { cases, origin } = m else {
        return None;
    };
    let target = cases.get(case)?;
    let body = target.body.as_plain()?;
    let last = target.conds.last()?;
    let (term, var) = let_atom(last)?;
    let mut diagnostics = Vec::new();
    if term.contains_var(var) {
        diagnostics.push(diag::rebind_let(&last.origin, var));
    }
    let mut out = cases.clone();
    out[case] = Case::new(
        target.conds[..target.conds.len() - 1].to_vec(),
        MetaTerm::Plain(body.subst(var, term)),
    );
    Some(Rewritten::with(
        MetaTerm::Case {
            cases: out,
            origin: origin.clone(),
        },
        diagnostics,
    ))
}

/// `(macro-rule T1 (case () T2))` ⇒ `(macro-rule T1 T2)`.
pub fn remove_empty_case(r: &MacroRule) -> Option<MacroRule> {
    let case = single_case(r)?;
    if !case.conds.is_empty() {
        return None;
    }
    let body = case.body.as_plain()?;
    Some(MacroRule::new(
        r.lhs.clone(),
        MetaTerm::Plain(body.clone()),
        r.origin.clone(),
    ))
}
