use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, LazyLock};

use crate::sexpr::{SExpr, SourceSpan};

pub type Name = Arc<str>;

/// Where an AST node came from: the span and printed text of the original
/// construct. Rewriting copies origins along, so a condition produced by
/// desugaring still points at what the specifier wrote.
///
/// Origins never take part in equality, ordering, or hashing.
#[derive(Clone)]
pub struct Origin(Arc<OriginData>);

struct OriginData {
    span: SourceSpan,
    text: String,
}

static SYNTHETIC: LazyLock<Origin> = LazyLock::new(|| Origin::new(SourceSpan::synthetic(), ""));

impl Origin {
    pub fn new(span: SourceSpan, text: impl Into<String>) -> Self {
        Origin(Arc::new(OriginData {
            span,
            text: text.into(),
        }))
    }

    pub fn of(e: &SExpr) -> Self {
        Origin::new(e.span().clone(), e.to_string())
    }

    pub fn synthetic() -> Self {
        SYNTHETIC.clone()
    }

    pub fn span(&self) -> &SourceSpan {
        &self.0.span
    }

    /// The original construct, printed.
    pub fn text(&self) -> &str {
        &self.0.text
    }
}

impl fmt::Debug for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "@{}", self.0.span)
    }
}

impl PartialEq for Origin {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for Origin {}

impl PartialOrd for Origin {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Origin {
    fn cmp(&self, _: &Self) -> Ordering {
        Ordering::Equal
    }
}

impl Hash for Origin {
    fn hash<H: Hasher>(&self, _: &mut H) {}
}

/// Variables occurring in a syntactic object.
pub trait FreeVars {
    fn collect_vars(&self, out: &mut BTreeSet<Name>);

    fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Term {
    pub kind: TermKind,
    pub origin: Origin,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TermKind {
    Var(Name),
    Const(Name),
    App(Name, Vec<Term>),
}

impl Term {
    pub fn new(kind: TermKind, origin: Origin) -> Self {
        Term { kind, origin }
    }

    pub fn var(name: &str) -> Self {
        Term::new(TermKind::Var(name.into()), Origin::synthetic())
    }

    pub fn constant(name: &str) -> Self {
        Term::new(TermKind::Const(name.into()), Origin::synthetic())
    }

    pub fn app(head: &str, args: Vec<Term>) -> Self {
        Term::new(TermKind::App(head.into(), args), Origin::synthetic())
    }

    pub fn as_var(&self) -> Option<&Name> {
        match &self.kind {
            TermKind::Var(v) => Some(v),
            _ => None,
        }
    }

    /// Head symbol of an application or the constant's name.
    pub fn head(&self) -> Option<&Name> {
        match &self.kind {
            TermKind::App(f, _) => Some(f),
            TermKind::Const(c) => Some(c),
            TermKind::Var(_) => None,
        }
    }

    pub fn is_app(&self) -> bool {
        matches!(self.kind, TermKind::App(..))
    }

    pub fn contains_var(&self, var: &str) -> bool {
        match &self.kind {
            TermKind::Var(v) => &**v == var,
            TermKind::Const(_) => false,
            TermKind::App(_, args) => args.iter().any(|a| a.contains_var(var)),
        }
    }

    pub fn is_ground(&self) -> bool {
        match &self.kind {
            TermKind::Var(_) => false,
            TermKind::Const(_) => true,
            TermKind::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    /// `self{var ↦ by}`: plain textual replacement, no renaming.
    pub fn subst(&self, var: &str, by: &Term) -> Term {
        match &self.kind {
            TermKind::Var(v) if &**v == var => by.clone(),
            TermKind::Var(_) | TermKind::Const(_) => self.clone(),
            TermKind::App(f, args) => Term::new(
                TermKind::App(f.clone(), args.iter().map(|a| a.subst(var, by)).collect()),
                self.origin.clone(),
            ),
        }
    }

    pub fn size(&self) -> usize {
        match &self.kind {
            TermKind::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
            _ => 1,
        }
    }

    pub fn depth(&self) -> usize {
        match &self.kind {
            TermKind::App(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
            _ => 1,
        }
    }

    pub fn to_sexpr(&self) -> SExpr {
        match &self.kind {
            TermKind::Var(n) | TermKind::Const(n) => SExpr::atom(&**n),
            TermKind::App(f, args) => {
                let mut items = vec![SExpr::atom(&**f)];
                items.extend(args.iter().map(Term::to_sexpr));
                SExpr::list(items)
            }
        }
    }
}

impl FreeVars for Term {
    fn collect_vars(&self, out: &mut BTreeSet<Name>) {
        match &self.kind {
            TermKind::Var(v) => {
                out.insert(v.clone());
            }
            TermKind::Const(_) => {}
            TermKind::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            TermKind::Var(n) | TermKind::Const(n) => f.write_str(n),
            TermKind::App(head, args) => {
                write!(f, "({head}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// `match` binds with a re-binding warning; `match*` is its silent form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MatchKind {
    Single,
    Double,
}

impl MatchKind {
    pub fn keyword(self) -> &'static str {
        match self {
            MatchKind::Single => "match",
            MatchKind::Double => "match*",
        }
    }
}

/// A condition in either a negatable or a general position. The parser
/// only admits negatable shapes where the grammar requires them; see
/// [`Condition::is_negatable`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Condition {
    pub kind: CondKind,
    pub origin: Origin,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CondKind {
    Eq(Term, Term),
    Ineq(Term, Term),
    Def(Term),
    /// A bare term in condition position, read as `(= term true)`.
    Pred(Term),
    Match {
        kind: MatchKind,
        var: Name,
        term: Term,
    },
    Let {
        term: Term,
        var: Name,
    },
    And(Vec<Condition>),
    Or(Vec<Condition>),
    SeqAnd(Vec<Condition>),
    SeqOr(Vec<Condition>),
    Not(Box<Condition>),
}

impl Condition {
    pub fn new(kind: CondKind, origin: Origin) -> Self {
        Condition { kind, origin }
    }

    pub fn synthetic(kind: CondKind) -> Self {
        Condition::new(kind, Origin::synthetic())
    }

    /// Same origin, new shape.
    pub fn with_kind(&self, kind: CondKind) -> Self {
        Condition::new(kind, self.origin.clone())
    }

    pub fn is_basic(&self) -> bool {
        matches!(
            self.kind,
            CondKind::Eq(..) | CondKind::Ineq(..) | CondKind::Def(_) | CondKind::Pred(_)
        )
    }

    pub fn is_negatable(&self) -> bool {
        match &self.kind {
            CondKind::Eq(..) | CondKind::Ineq(..) | CondKind::Pred(_) => true,
            CondKind::Def(_) | CondKind::Match { .. } | CondKind::Let { .. } => false,
            CondKind::And(cs) | CondKind::Or(cs) | CondKind::SeqAnd(cs) | CondKind::SeqOr(cs) => {
                cs.iter().all(Condition::is_negatable)
            }
            CondKind::Not(c) => c.is_negatable(),
        }
    }

    pub fn children(&self) -> &[Condition] {
        match &self.kind {
            CondKind::And(cs) | CondKind::Or(cs) | CondKind::SeqAnd(cs) | CondKind::SeqOr(cs) => {
                cs
            }
            CondKind::Not(c) => std::slice::from_ref(&**c),
            _ => &[],
        }
    }

    pub fn children_mut(&mut self) -> &mut [Condition] {
        match &mut self.kind {
            CondKind::And(cs) | CondKind::Or(cs) | CondKind::SeqAnd(cs) | CondKind::SeqOr(cs) => {
                cs
            }
            CondKind::Not(c) => std::slice::from_mut(&mut **c),
            _ => &mut [],
        }
    }

    /// Substitute into a basic atom. Other shapes are returned unchanged.
    pub fn subst(&self, var: &str, by: &Term) -> Condition {
        let kind = match &self.kind {
            CondKind::Eq(a, b) => CondKind::Eq(a.subst(var, by), b.subst(var, by)),
            CondKind::Ineq(a, b) => CondKind::Ineq(a.subst(var, by), b.subst(var, by)),
            CondKind::Def(a) => CondKind::Def(a.subst(var, by)),
            CondKind::Pred(a) => CondKind::Pred(a.subst(var, by)),
            _ => return self.clone(),
        };
        self.with_kind(kind)
    }

    pub fn to_sexpr(&self) -> SExpr {
        let tagged = |tag: &str, rest: Vec<SExpr>| {
            let mut items = vec![SExpr::atom(tag)];
            items.extend(rest);
            SExpr::list(items)
        };
        let all = |cs: &[Condition]| cs.iter().map(Condition::to_sexpr).collect::<Vec<_>>();
        match &self.kind {
            CondKind::Eq(a, b) => tagged("=", vec![a.to_sexpr(), b.to_sexpr()]),
            CondKind::Ineq(a, b) => tagged("#", vec![a.to_sexpr(), b.to_sexpr()]),
            CondKind::Def(a) => tagged("def", vec![a.to_sexpr()]),
            CondKind::Pred(t) => t.to_sexpr(),
            CondKind::Match { kind, var, term } => {
                tagged(kind.keyword(), vec![SExpr::atom(&**var), term.to_sexpr()])
            }
            CondKind::Let { term, var } => tagged("let", vec![term.to_sexpr(), SExpr::atom(&**var)]),
            CondKind::And(cs) => tagged("and", all(cs)),
            CondKind::Or(cs) => tagged("or", all(cs)),
            CondKind::SeqAnd(cs) => tagged("and*", all(cs)),
            CondKind::SeqOr(cs) => tagged("or*", all(cs)),
            CondKind::Not(c) => tagged("not", vec![c.to_sexpr()]),
        }
    }
}

impl FreeVars for Condition {
    fn collect_vars(&self, out: &mut BTreeSet<Name>) {
        match &self.kind {
            CondKind::Eq(a, b) | CondKind::Ineq(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            CondKind::Def(a) | CondKind::Pred(a) => a.collect_vars(out),
            CondKind::Match { var, term, .. } | CondKind::Let { term, var } => {
                out.insert(var.clone());
                term.collect_vars(out);
            }
            _ => self.children().iter().for_each(|c| c.collect_vars(out)),
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_sexpr())
    }
}

pub fn cond_list_sexpr(conds: &[Condition]) -> SExpr {
    SExpr::list(conds.iter().map(Condition::to_sexpr).collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Case {
    pub conds: Vec<Condition>,
    pub body: MetaTerm,
}

impl Case {
    pub fn new(conds: Vec<Condition>, body: MetaTerm) -> Self {
        Case { conds, body }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MetaTerm {
    Plain(Term),
    If {
        conds: Vec<Condition>,
        then: Box<MetaTerm>,
        otherwise: Box<MetaTerm>,
        origin: Origin,
    },
    CaseElse {
        cases: Vec<Case>,
        otherwise: Box<MetaTerm>,
        origin: Origin,
    },
    Case {
        cases: Vec<Case>,
        origin: Origin,
    },
}

impl MetaTerm {
    pub fn case(cases: Vec<Case>) -> Self {
        MetaTerm::Case {
            cases,
            origin: Origin::synthetic(),
        }
    }

    pub fn as_plain(&self) -> Option<&Term> {
        match self {
            MetaTerm::Plain(t) => Some(t),
            _ => None,
        }
    }

    pub fn origin(&self) -> &Origin {
        match self {
            MetaTerm::Plain(t) => &t.origin,
            MetaTerm::If { origin, .. }
            | MetaTerm::CaseElse { origin, .. }
            | MetaTerm::Case { origin, .. } => origin,
        }
    }

    /// True if an `if` or a case-with-else occurs anywhere in this meta-term.
    pub fn contains_else(&self) -> bool {
        match self {
            MetaTerm::Plain(_) => false,
            MetaTerm::If { .. } | MetaTerm::CaseElse { .. } => true,
            MetaTerm::Case { cases, .. } => cases.iter().any(|c| c.body.contains_else()),
        }
    }

    pub fn to_sexpr(&self) -> SExpr {
        match self {
            MetaTerm::Plain(t) => t.to_sexpr(),
            MetaTerm::If {
                conds,
                then,
                otherwise,
                ..
            } => SExpr::list(vec![
                SExpr::atom("if"),
                cond_list_sexpr(conds),
                then.to_sexpr(),
                otherwise.to_sexpr(),
            ]),
            MetaTerm::CaseElse {
                cases, otherwise, ..
            } => {
                let mut items = vec![SExpr::atom("case")];
                for c in cases {
                    items.push(cond_list_sexpr(&c.conds));
                    items.push(c.body.to_sexpr());
                }
                items.push(SExpr::atom("else"));
                items.push(otherwise.to_sexpr());
                SExpr::list(items)
            }
            MetaTerm::Case { cases, .. } => {
                let mut items = vec![SExpr::atom("case")];
                for c in cases {
                    items.push(cond_list_sexpr(&c.conds));
                    items.push(c.body.to_sexpr());
                }
                SExpr::list(items)
            }
        }
    }
}

impl fmt::Display for MetaTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_sexpr())
    }
}

/// One `(macro-rule TERM META-TERM)` unit.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MacroRule {
    pub lhs: Term,
    pub body: MetaTerm,
    pub origin: Origin,
}

impl MacroRule {
    pub fn new(lhs: Term, body: MetaTerm, origin: Origin) -> Self {
        MacroRule { lhs, body, origin }
    }

    pub fn to_sexpr(&self) -> SExpr {
        SExpr::list(vec![
            SExpr::atom("macro-rule"),
            self.lhs.to_sexpr(),
            self.body.to_sexpr(),
        ])
    }
}

impl fmt::Display for MacroRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_sexpr())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_vars_of_terms_and_atoms() {
        let t = Term::app("delete", vec![Term::var("x"), Term::var("l")]);
        let names: Vec<_> = t.free_vars().into_iter().map(|n| n.to_string()).collect();
        assert_eq!(names, ["l", "x"]);
        assert!(Term::constant("nil").free_vars().is_empty());

        let atom = Condition::synthetic(CondKind::Eq(
            Term::var("x"),
            Term::app("cons", vec![Term::var("y"), Term::var("k")]),
        ));
        let names: Vec<_> = atom.free_vars().into_iter().map(|n| n.to_string()).collect();
        assert_eq!(names, ["k", "x", "y"]);
    }

    #[test]
    fn substitution_is_textual() {
        let t = Term::app("f", vec![Term::var("l"), Term::var("x")]);
        let by = Term::app("cons", vec![Term::var("y"), Term::var("l")]);
        assert_eq!(t.subst("l", &by).to_string(), "(f (cons y l) x)");
        assert_eq!(t.subst("z", &by), t);
    }

    #[test]
    fn origins_do_not_affect_equality() {
        let a = Term::new(
            TermKind::Var("x".into()),
            Origin::new(SourceSpan::synthetic(), "x"),
        );
        assert_eq!(a, Term::var("x"));
    }
}
