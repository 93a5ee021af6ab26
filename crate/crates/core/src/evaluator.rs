//! Leftmost-innermost evaluation of conditional rule systems on ground
//! terms, under a step budget.
//!
//! Negative conditions are read operationally: `a # b` holds when both
//! sides reach distinct constructor-ground normal forms, `def a` when `a`
//! reaches one. Anything the evaluator cannot decide is `Unknown`, and a
//! rule skipped for that reason downgrades the result to budget-exhausted.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::rc::Rc;

use crate::rulesys::{ConditionAtom, RuleSystem};
use crate::surface::{Name, Origin, Term, TermKind};

pub type Substitution = BTreeMap<Name, Term>;

pub fn apply_subst(t: &Term, sigma: &Substitution) -> Term {
    match &t.kind {
        TermKind::Var(v) => sigma.get(v).cloned().unwrap_or_else(|| t.clone()),
        TermKind::Const(_) => t.clone(),
        TermKind::App(f, args) => Term::new(
            TermKind::App(f.clone(), args.iter().map(|a| apply_subst(a, sigma)).collect()),
            t.origin.clone(),
        ),
    }
}

fn match_into(pattern: &Term, subject: &Term, sigma: &mut Substitution) -> bool {
    match (&pattern.kind, &subject.kind) {
        (TermKind::Var(v), _) => match sigma.get(v) {
            Some(bound) => bound == subject,
            None => {
                sigma.insert(v.clone(), subject.clone());
                true
            }
        },
        (TermKind::Const(a), TermKind::Const(b)) => a == b,
        (TermKind::App(f, ps), TermKind::App(g, ss)) => {
            f == g && ps.len() == ss.len() && ps.iter().zip(ss).all(|(p, s)| match_into(p, s, sigma))
        }
        _ => false,
    }
}

/// The least σ with `pattern·σ = subject`, if any.
pub fn match_term(pattern: &Term, subject: &Term) -> Option<Substitution> {
    let mut sigma = Substitution::new();
    match_into(pattern, subject, &mut sigma).then_some(sigma)
}

/// Head symbols of rule left-hand sides. Every other symbol is a constructor.
pub fn defined_symbols(rs: &RuleSystem) -> BTreeSet<Name> {
    rs.rules.iter().filter_map(|r| r.lhs.head().cloned()).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    pub max_steps: usize,
    pub max_condition_depth: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_steps: 100_000,
            max_condition_depth: 64,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalStatus {
    Complete,
    BudgetExhausted,
}

impl fmt::Display for EvalStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EvalStatus::Complete => "complete",
            EvalStatus::BudgetExhausted => "budget-exhausted",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalOutcome {
    pub result: Term,
    pub status: EvalStatus,
    pub steps_used: usize,
}

impl fmt::Display for EvalOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ; steps={} ; status={}", self.result, self.steps_used, self.status)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Truth {
    Holds,
    Fails,
    Unknown,
}

enum Task<'r> {
    Eval(Term),
    /// Instantiate a right-hand side; bound values are already normal.
    Inst(&'r Term, Rc<Substitution>),
    Build(Name, usize, Origin),
}

/// Evaluation state for one rule system. Steps are shared by every
/// normalization run through the same evaluator.
pub struct Evaluator<'r> {
    rules: &'r RuleSystem,
    defined: BTreeSet<Name>,
    by_head: HashMap<Name, Vec<usize>>,
    budget: Budget,
    steps: usize,
    exhausted: bool,
}

impl<'r> Evaluator<'r> {
    pub fn new(rules: &'r RuleSystem, budget: Budget) -> Self {
        let mut by_head: HashMap<Name, Vec<usize>> = HashMap::new();
        for (i, r) in rules.rules.iter().enumerate() {
            if let Some(h) = r.lhs.head() {
                by_head.entry(h.clone()).or_default().push(i);
            }
        }
        Evaluator {
            rules,
            defined: defined_symbols(rules),
            by_head,
            budget,
            steps: 0,
            exhausted: false,
        }
    }

    pub fn steps_used(&self) -> usize {
        self.steps
    }

    pub fn is_constructor_ground(&self, t: &Term) -> bool {
        match &t.kind {
            TermKind::Var(_) => false,
            TermKind::Const(c) => !self.defined.contains(c),
            TermKind::App(f, args) => !self.defined.contains(f) && args.iter().all(|a| self.is_constructor_ground(a)),
        }
    }

    pub fn normalize(&mut self, t: &Term) -> EvalOutcome {
        let (result, complete) = self.norm(t.clone(), 0);
        EvalOutcome {
            result,
            status: if complete {
                EvalStatus::Complete
            } else {
                EvalStatus::BudgetExhausted
            },
            steps_used: self.steps,
        }
    }

    /// Normal form of `t` and whether it is known to be one.
    fn norm(&mut self, t: Term, depth: usize) -> (Term, bool) {
        let mut complete = true;
        let mut tasks = vec![Task::Eval(t)];
        let mut values: Vec<Term> = Vec::new();
        while let Some(task) = tasks.pop() {
            match task {
                Task::Eval(t) => match &t.kind {
                    TermKind::App(f, args) => {
                        tasks.push(Task::Build(f.clone(), args.len(), t.origin.clone()));
                        tasks.extend(args.iter().rev().cloned().map(Task::Eval));
                    }
                    _ => values.push(t),
                },
                Task::Inst(t, sigma) => match &t.kind {
                    TermKind::Var(v) => values.push(sigma.get(v).cloned().unwrap_or_else(|| t.clone())),
                    TermKind::Const(_) => values.push(t.clone()),
                    TermKind::App(f, args) => {
                        tasks.push(Task::Build(f.clone(), args.len(), t.origin.clone()));
                        tasks.extend(args.iter().rev().map(|a| Task::Inst(a, sigma.clone())));
                    }
                },
                Task::Build(f, n, origin) => {
                    let args = values.split_off(values.len() - n);
                    let term = Term::new(TermKind::App(f, args), origin);
                    match self.step_at_root(&term, depth, &mut complete) {
                        Some((rhs, sigma)) => tasks.push(Task::Inst(rhs, Rc::new(sigma))),
                        None => values.push(term),
                    }
                }
            }
        }
        debug_assert_eq!(values.len(), 1);
        (values.pop().expect("one value"), complete)
    }

    /// Try the rules for the head of `term` in order; the first whose
    /// conditions all hold fires.
    fn step_at_root(&mut self, term: &Term, depth: usize, complete: &mut bool) -> Option<(&'r Term, Substitution)> {
        let rules: &'r RuleSystem = self.rules;
        let candidates = self.by_head.get(term.head()?)?.clone();
        if self.exhausted {
            *complete = false;
            return None;
        }
        let mut skipped = false;
        for i in candidates {
            let rule = &rules.rules[i];
            let Some(sigma) = match_term(&rule.lhs, term) else {
                continue;
            };
            match self.conditions(&rule.conditions, &sigma, depth) {
                Truth::Holds => {
                    if self.steps >= self.budget.max_steps {
                        self.exhausted = true;
                        *complete = false;
                        return None;
                    }
                    self.steps += 1;
                    return Some((&rule.rhs, sigma));
                }
                Truth::Fails => {}
                Truth::Unknown => skipped = true,
            }
            if self.exhausted {
                *complete = false;
                return None;
            }
        }
        if skipped {
            *complete = false;
        }
        None
    }

    fn conditions(&mut self, atoms: &[ConditionAtom], sigma: &Substitution, depth: usize) -> Truth {
        for a in atoms {
            match self.condition(a, sigma, depth) {
                Truth::Holds => {}
                other => return other,
            }
        }
        Truth::Holds
    }

    /// Evaluate one condition atom under σ at condition nesting `depth`.
    pub fn condition(&mut self, atom: &ConditionAtom, sigma: &Substitution, depth: usize) -> Truth {
        if depth >= self.budget.max_condition_depth || self.exhausted {
            return Truth::Unknown;
        }
        let side = |this: &mut Self, t: &Term| -> Option<Term> {
            let t = apply_subst(t, sigma);
            if !t.is_ground() {
                return None;
            }
            let (nf, complete) = this.norm(t, depth + 1);
            complete.then_some(nf)
        };
        match atom {
            ConditionAtom::Eq(a, b) => {
                let (Some(a), Some(b)) = (side(self, a), side(self, b)) else {
                    return Truth::Unknown;
                };
                if a == b {
                    Truth::Holds
                } else {
                    Truth::Fails
                }
            }
            ConditionAtom::Ineq(a, b) => {
                let (Some(a), Some(b)) = (side(self, a), side(self, b)) else {
                    return Truth::Unknown;
                };
                if a == b {
                    Truth::Fails
                } else if self.is_constructor_ground(&a) && self.is_constructor_ground(&b) {
                    Truth::Holds
                } else {
                    Truth::Unknown
                }
            }
            ConditionAtom::Def(a) => match side(self, a) {
                None => Truth::Unknown,
                Some(nf) if self.is_constructor_ground(&nf) => Truth::Holds,
                Some(_) => Truth::Fails,
            },
        }
    }
}

pub fn normalize_term(t: &Term, rules: &RuleSystem, budget: Budget) -> EvalOutcome {
    Evaluator::new(rules, budget).normalize(t)
}

pub fn eval_condition(atom: &ConditionAtom, sigma: &Substitution, rules: &RuleSystem, budget: Budget) -> Truth {
    Evaluator::new(rules, budget).condition(atom, sigma, 0)
}
