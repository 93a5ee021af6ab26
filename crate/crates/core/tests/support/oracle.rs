//! Naive recursive interpreter for conditional rule systems, independent of the library evaluator.

use std::collections::{BTreeSet, HashMap};

use macrorule::rulesys::{ConditionAtom, RuleSystem};
use macrorule::surface::{Term, TermKind};

type Env = HashMap<String, Term>;

pub struct Oracle<'a> {
    rs: &'a RuleSystem,
    defined: BTreeSet<String>,
    fuel: usize,
    max_depth: usize,
}

fn pmatch(p: &Term, t: &Term, env: &mut Env) -> bool {
    match (&p.kind, &t.kind) {
        (TermKind::Var(v), _) => env.entry(v.to_string()).or_insert_with(|| t.clone()) == t,
        (TermKind::Const(a), TermKind::Const(b)) => a == b,
        (TermKind::App(f, xs), TermKind::App(g, ys)) => {
            f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| pmatch(x, y, env))
        }
        _ => false,
    }
}

fn inst(t: &Term, env: &Env) -> Term {
    match &t.kind {
        TermKind::Var(v) => env.get(&**v).cloned().unwrap_or_else(|| t.clone()),
        TermKind::Const(_) => t.clone(),
        TermKind::App(f, xs) => Term::app(f, xs.iter().map(|x| inst(x, env)).collect()),
    }
}

impl<'a> Oracle<'a> {
    pub fn new(rs: &'a RuleSystem, fuel: usize, max_depth: usize) -> Self {
        let defined = rs.rules.iter().filter_map(|r| r.lhs.head()).map(|h| h.to_string()).collect();
        Oracle { rs, defined, fuel, max_depth }
    }

    fn value(&self, t: &Term) -> bool {
        match &t.kind {
            TermKind::Var(_) => false,
            TermKind::Const(c) => !self.defined.contains(&**c),
            TermKind::App(f, xs) => !self.defined.contains(&**f) && xs.iter().all(|x| self.value(x)),
        }
    }

    /// Normal form of `t`; `None` when a condition is undecidable or fuel runs out.
    pub fn eval(&mut self, t: &Term, depth: usize) -> Option<Term> {
        let t = match &t.kind {
            TermKind::Var(_) => return None,
            TermKind::Const(_) => t.clone(),
            TermKind::App(f, xs) => {
                let args = xs.iter().map(|x| self.eval(x, depth)).collect::<Option<Vec<_>>>()?;
                Term::app(f, args)
            }
        };
        let mut unsure = false;
        for r in &self.rs.rules {
            let mut env = Env::new();
            if !pmatch(&r.lhs, &t, &mut env) {
                continue;
            }
            match self.holds(&r.conditions, &env, depth + 1) {
                Some(true) => {
                    self.fuel = self.fuel.checked_sub(1)?;
                    return self.eval(&inst(&r.rhs, &env), depth);
                }
                Some(false) => {}
                None => unsure = true,
            }
        }
        if unsure { None } else { Some(t) }
    }

    fn holds(&mut self, conds: &[ConditionAtom], env: &Env, depth: usize) -> Option<bool> {
        if depth > self.max_depth && !conds.is_empty() {
            return None;
        }
        for c in conds {
            let ok = match c {
                ConditionAtom::Eq(a, b) => self.eval(&inst(a, env), depth)? == self.eval(&inst(b, env), depth)?,
                ConditionAtom::Ineq(a, b) => {
                    let (a, b) = (self.eval(&inst(a, env), depth)?, self.eval(&inst(b, env), depth)?);
                    if a == b { false } else if self.value(&a) && self.value(&b) { true } else { return None }
                }
                ConditionAtom::Def(a) => self.eval(&inst(a, env), depth).map(|v| self.value(&v))?,
            };
            if !ok {
                return Some(false);
            }
        }
        Some(true)
    }
}
