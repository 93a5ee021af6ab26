//! Redex enumeration and navigation. A redex is addressed by the path of
//! its key node inside the macro-rule's S-expression, so the same path
//! indexes both the AST and the printed form used in traces.

use std::fmt;

use crate::surface::{Case, CondKind, Condition, MacroRule, MatchKind, MetaTerm};

/// The rewrite rules, in the priority order of the deterministic strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleKind {
    Predicate,
    If,
    Else,
    Not,
    And,
    Or,
    SeqOr,
    CaseInCase,
    Match,
    ShiftLeft,
    ShiftRight,
    Swap,
    Split,
    LeadingMatch,
    TrailingLet,
    EmptyCase,
}

impl RuleKind {
    pub const ALL: [RuleKind; 16] = [
        RuleKind::Predicate,
        RuleKind::If,
        RuleKind::Else,
        RuleKind::Not,
        RuleKind::And,
        RuleKind::Or,
        RuleKind::SeqOr,
        RuleKind::CaseInCase,
        RuleKind::Match,
        RuleKind::ShiftLeft,
        RuleKind::ShiftRight,
        RuleKind::Swap,
        RuleKind::Split,
        RuleKind::LeadingMatch,
        RuleKind::TrailingLet,
        RuleKind::EmptyCase,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RuleKind::Predicate => "predicate-removal",
            RuleKind::If => "if-removal",
            RuleKind::Else => "else-removal",
            RuleKind::Not => "not-removal",
            RuleKind::And => "and-removal",
            RuleKind::Or => "or-removal",
            RuleKind::SeqOr => "or*-removal",
            RuleKind::CaseInCase => "case-in-case-removal",
            RuleKind::Match => "match-removal",
            RuleKind::ShiftLeft => "match*-shift-left",
            RuleKind::ShiftRight => "let-shift-right",
            RuleKind::Swap => "let-match*-swap",
            RuleKind::Split => "splitting",
            RuleKind::LeadingMatch => "match*-removal",
            RuleKind::TrailingLet => "let-removal",
            RuleKind::EmptyCase => "empty-case-removal",
        }
    }

    pub fn from_name(name: &str) -> Option<RuleKind> {
        RuleKind::ALL.into_iter().find(|k| k.name() == name)
    }

    /// How many trailing path steps lead from the rewritten region down to
    /// the key node. `None` for rules that rewrite the whole macro-rule.
    pub(crate) fn region_depth(self) -> Option<usize> {
        match self {
            RuleKind::Predicate | RuleKind::Not | RuleKind::If | RuleKind::Else => Some(0),
            RuleKind::And
            | RuleKind::Match
            | RuleKind::ShiftLeft
            | RuleKind::ShiftRight
            | RuleKind::Swap
            | RuleKind::CaseInCase => Some(1),
            RuleKind::Or | RuleKind::SeqOr | RuleKind::TrailingLet => Some(2),
            RuleKind::Split | RuleKind::LeadingMatch | RuleKind::EmptyCase => None,
        }
    }
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Site {
    pub kind: RuleKind,
    pub path: Vec<usize>,
}

#[derive(Clone, Copy)]
struct ListContext {
    /// The list belongs to an else-free `case`, so connectives may be expanded.
    expandable: bool,
    body_plain: bool,
}

fn is_double(c: &Condition) -> bool {
    matches!(
        c.kind,
        CondKind::Match {
            kind: MatchKind::Double,
            ..
        }
    )
}

fn is_let(c: &Condition) -> bool {
    matches!(c.kind, CondKind::Let { .. })
}

fn not_applies(c: &Condition) -> bool {
    match &c.kind {
        CondKind::Not(inner) => matches!(
            inner.kind,
            CondKind::Not(_)
                | CondKind::And(_)
                | CondKind::SeqAnd(_)
                | CondKind::Or(_)
                | CondKind::SeqOr(_)
                | CondKind::Eq(..)
                | CondKind::Ineq(..)
        ),
        _ => false,
    }
}

struct Walker<'o> {
    path: Vec<usize>,
    out: &'o mut Vec<Site>,
}

impl Walker<'_> {
    fn push(&mut self, kind: RuleKind) {
        self.out.push(Site {
            kind,
            path: self.path.clone(),
        });
    }

    fn at<R>(&mut self, step: usize, f: impl FnOnce(&mut Self) -> R) -> R {
        self.path.push(step);
        let r = f(self);
        self.path.pop();
        r
    }

    fn cond(&mut self, c: &Condition) {
        for (k, child) in c.children().iter().enumerate() {
            self.at(k + 1, |w| w.cond(child));
        }
        if matches!(c.kind, CondKind::Pred(_)) {
            self.push(RuleKind::Predicate);
        }
        if not_applies(c) {
            self.push(RuleKind::Not);
        }
    }

    fn list(&mut self, list: &[Condition], ctx: ListContext) {
        for (j, c) in list.iter().enumerate() {
            self.at(j, |w| {
                w.cond(c);
                if ctx.expandable {
                    match c.kind {
                        CondKind::And(_) | CondKind::SeqAnd(_) => w.push(RuleKind::And),
                        CondKind::Or(_) => w.push(RuleKind::Or),
                        CondKind::SeqOr(_) => w.push(RuleKind::SeqOr),
                        _ => {}
                    }
                }
                if let CondKind::Match {
                    kind: MatchKind::Single,
                    ..
                } = c.kind
                {
                    w.push(RuleKind::Match);
                }
                if let Some(next) = list.get(j + 1) {
                    if c.is_basic() && is_double(next) {
                        w.push(RuleKind::ShiftLeft);
                    }
                    if is_let(c) && next.is_basic() {
                        w.push(RuleKind::ShiftRight);
                    }
                    if is_let(c) && is_double(next) {
                        w.push(RuleKind::Swap);
                    }
                } else if is_let(c) && ctx.body_plain {
                    w.push(RuleKind::TrailingLet);
                }
            });
        }
    }

    fn cases(&mut self, cases: &[Case], expandable: bool) {
        for (i, case) in cases.iter().enumerate() {
            let ctx = ListContext {
                expandable,
                body_plain: case.body.as_plain().is_some(),
            };
            self.at(1 + 2 * i, |w| w.list(&case.conds, ctx));
            self.at(2 + 2 * i, |w| w.meta(&case.body, expandable));
        }
    }

    /// `in_flat_case`: this meta-term is a case body of an else-free `case`.
    fn meta(&mut self, m: &MetaTerm, in_flat_case: bool) {
        match m {
            MetaTerm::Plain(_) => {}
            MetaTerm::If {
                conds,
                then,
                otherwise,
                ..
            } => {
                let ctx = ListContext {
                    expandable: false,
                    body_plain: false,
                };
                self.at(1, |w| w.list(conds, ctx));
                self.at(2, |w| w.meta(then, false));
                self.at(3, |w| w.meta(otherwise, false));
                self.push(RuleKind::If);
            }
            MetaTerm::CaseElse {
                cases, otherwise, ..
            } => {
                self.cases(cases, false);
                self.at(2 * cases.len() + 2, |w| w.meta(otherwise, false));
                self.push(RuleKind::Else);
            }
            MetaTerm::Case { cases, .. } => {
                self.cases(cases, !m.contains_else());
                if in_flat_case {
                    self.push(RuleKind::CaseInCase);
                }
            }
        }
    }
}

/// All redexes of one macro-rule, leftmost-innermost first.
pub fn sites(rule: &MacroRule, out: &mut Vec<Site>) {
    let mut w = Walker {
        path: vec![2],
        out,
    };
    w.meta(&rule.body, false);
    w.path.clear();
    if let MetaTerm::Case { cases, .. } = &rule.body {
        if cases.len() >= 2 {
            w.push(RuleKind::Split);
        }
        if let [case] = &cases[..] {
            if case.conds.first().is_some_and(is_double) {
                w.push(RuleKind::LeadingMatch);
            }
            if case.conds.is_empty() && case.body.as_plain().is_some() {
                w.push(RuleKind::EmptyCase);
            }
        }
    }
}

/// A mutable view of one node inside a macro-rule body.
pub(crate) enum Focus<'a> {
    Meta(&'a mut MetaTerm),
    List(&'a mut Vec<Condition>),
    Cond(&'a mut Condition),
}

fn case_child(cases: &mut [Case], i: usize) -> Option<Focus<'_>> {
    if i == 0 {
        return None;
    }
    let case = cases.get_mut((i - 1) / 2)?;
    Some(if i % 2 == 1 {
        Focus::List(&mut case.conds)
    } else {
        Focus::Meta(&mut case.body)
    })
}

impl<'a> Focus<'a> {
    fn child(self, i: usize) -> Option<Focus<'a>> {
        match self {
            Focus::Meta(m) => match m {
                MetaTerm::Plain(_) => None,
                MetaTerm::If {
                    conds,
                    then,
                    otherwise,
                    ..
                } => match i {
                    1 => Some(Focus::List(conds)),
                    2 => Some(Focus::Meta(then)),
                    3 => Some(Focus::Meta(otherwise)),
                    _ => None,
                },
                MetaTerm::CaseElse {
                    cases, otherwise, ..
                } => {
                    if i == 2 * cases.len() + 2 {
                        Some(Focus::Meta(otherwise))
                    } else if i <= 2 * cases.len() {
                        case_child(cases, i)
                    } else {
                        None
                    }
                }
                MetaTerm::Case { cases, .. } => case_child(cases, i),
            },
            Focus::List(l) => l.get_mut(i).map(Focus::Cond),
            Focus::Cond(c) => {
                if i == 0 {
                    None
                } else {
                    c.children_mut().get_mut(i - 1).map(Focus::Cond)
                }
            }
        }
    }
}

/// Navigate to `path` (which starts with the body index 2).
pub(crate) fn focus<'a>(rule: &'a mut MacroRule, path: &[usize]) -> Option<Focus<'a>> {
    let (&first, rest) = path.split_first()?;
    if first != 2 {
        return None;
    }
    let mut cur = Focus::Meta(&mut rule.body);
    for &i in rest {
        cur = cur.child(i)?;
    }
    Some(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sexpr::parse_sexprs;
    use crate::surface::{build_symbol_table, parse_macro_rule};

    fn rule(src: &str) -> MacroRule {
        let decls = "(vars x y l m)(consts nil true false)(funs (cons 2) (memberp 2))";
        let t = build_symbol_table(&parse_sexprs(decls, "d").unwrap()).unwrap().0;
        parse_macro_rule(&parse_sexprs(src, "t").unwrap()[0], &t).unwrap()
    }

    fn kinds(r: &MacroRule) -> Vec<(RuleKind, Vec<usize>)> {
        let mut out = Vec::new();
        sites(r, &mut out);
        out.into_iter().map(|s| (s.kind, s.path)).collect()
    }

    #[test]
    fn memberp_v1_redexes_in_post_order() {
        let r = rule(
            "(macro-rule (memberp x l)
               (case ((match l nil)) false
                     ((match l (cons y m))) (if ((= x y)) true (memberp x m))))",
        );
        assert_eq!(
            kinds(&r),
            [
                (RuleKind::Match, vec![2, 1, 0]),
                (RuleKind::Match, vec![2, 3, 0]),
                (RuleKind::If, vec![2, 4]),
                (RuleKind::Split, vec![]),
            ]
        );
    }

    #[test]
    fn paths_address_the_printed_form() {
        let mut r = rule("(macro-rule (memberp x l) (case ((match l nil)) false ((not (memberp x l))) l))");
        let printed = r.to_sexpr();
        for path in [vec![2, 1, 0], vec![2, 3, 0, 1], vec![2, 4]] {
            let expected = printed.at_path(&path).unwrap().to_string();
            let found = match focus(&mut r, &path).unwrap() {
                Focus::Meta(m) => m.to_string(),
                Focus::List(l) => crate::surface::cond_list_sexpr(l).to_string(),
                Focus::Cond(c) => c.to_string(),
            };
            assert_eq!(found, expected);
        }
    }

    #[test]
    fn connectives_wait_for_else_removal() {
        let r = rule("(macro-rule (memberp x l) (case ((or (= x y) (= x l))) (if ((= x y)) true false)))");
        assert!(!kinds(&r).iter().any(|(k, _)| *k == RuleKind::Or));
        let r = rule("(macro-rule (memberp x l) (case ((or (= x y) (= x l))) true))");
        assert!(kinds(&r).iter().any(|(k, _)| *k == RuleKind::Or));
    }

    #[test]
    fn names_round_trip() {
        for k in RuleKind::ALL {
            assert_eq!(RuleKind::from_name(k.name()), Some(k));
        }
    }
}
