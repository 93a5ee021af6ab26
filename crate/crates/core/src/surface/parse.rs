use super::ast::{Case, CondKind, Condition, MacroRule, MatchKind, MetaTerm, Origin, Term, TermKind};
use super::symbols::{SymbolClass, SymbolTable};
use super::{ParsedSpec, SpecFile, SurfaceError};
use crate::sexpr::{parse_sexprs, SExpr};

/// Where a condition appears. Negatable positions (if-conditions, cases
/// before an `else`, arguments of `not`) exclude def, match and let atoms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConditionContext {
    Negatable,
    General,
}

pub fn parse_term(e: &SExpr, symbols: &SymbolTable) -> Result<Term, SurfaceError> {
    let origin = Origin::of(e);
    match e {
        SExpr::Atom { text, .. } => match symbols.classify(text) {
            Some(SymbolClass::Variable) => Ok(Term::new(TermKind::Var(text.as_str().into()), origin)),
            Some(SymbolClass::Constant) => Ok(Term::new(TermKind::Const(text.as_str().into()), origin)),
            Some(SymbolClass::Function(n)) => Err(SurfaceError::grammar(
                e,
                "term",
                &format!("function `{text}` of arity {n} without arguments"),
            )),
            None => Err(SurfaceError::grammar(e, "term", &format!("undeclared symbol `{text}`"))),
        },
        SExpr::List { items, .. } => {
            let Some((head, args)) = items.split_first() else {
                return Err(SurfaceError::grammar(e, "term", "()"));
            };
            let Some(name) = head.as_atom() else {
                return Err(SurfaceError::grammar(head, "function name", &head.to_string()));
            };
            match symbols.classify(name) {
                Some(SymbolClass::Function(n)) if n == args.len() => {
                    let args = args
                        .iter()
                        .map(|a| parse_term(a, symbols))
                        .collect::<Result<Vec<_>, _>>()?;
                    Ok(Term::new(TermKind::App(name.into(), args), origin))
                }
                Some(SymbolClass::Function(n)) => Err(SurfaceError::grammar(
                    e,
                    &format!("{n} argument(s) for `{name}`"),
                    &format!("{}", args.len()),
                )),
                Some(class) => Err(SurfaceError::grammar(
                    head,
                    "function name",
                    &format!("{class} `{name}`"),
                )),
                None => Err(SurfaceError::grammar(
                    head,
                    "function name",
                    &format!("undeclared symbol `{name}`"),
                )),
            }
        }
    }
}

fn parse_variable(e: &SExpr, symbols: &SymbolTable) -> Result<super::Name, SurfaceError> {
    match e.as_atom() {
        Some(v) if symbols.is_variable(v) => Ok(v.into()),
        _ => Err(SurfaceError::grammar(e, "variable-name", &e.to_string())),
    }
}

fn expect_len(e: &SExpr, items: &[SExpr], len: usize, shape: &str) -> Result<(), SurfaceError> {
    if items.len() == len {
        Ok(())
    } else {
        Err(SurfaceError::grammar(e, shape, &e.to_string()))
    }
}

pub fn parse_condition(
    e: &SExpr,
    ctx: ConditionContext,
    symbols: &SymbolTable,
) -> Result<Condition, SurfaceError> {
    let origin = Origin::of(e);
    let (head, items) = match (e.head(), e.as_list()) {
        (Some(h), Some(items)) => (h, items),
        _ => return Ok(Condition::new(CondKind::Pred(parse_term(e, symbols)?), origin)),
    };
    let general_only = |what: &str| {
        if ctx == ConditionContext::Negatable {
            Err(SurfaceError::grammar(
                e,
                "negatable-condition",
                &format!("{what} {e}, which cannot be negated"),
            ))
        } else {
            Ok(())
        }
    };
    let term = |i: usize| parse_term(&items[i], symbols);
    let kind = match head {
        "=" | "#" => {
            expect_len(e, items, 3, &format!("({head} term term)"))?;
            if head == "=" {
                CondKind::Eq(term(1)?, term(2)?)
            } else {
                CondKind::Ineq(term(1)?, term(2)?)
            }
        }
        "def" => {
            general_only("def-atom")?;
            expect_len(e, items, 2, "(def term)")?;
            CondKind::Def(term(1)?)
        }
        "match" | "match*" => {
            general_only("match-atom")?;
            expect_len(e, items, 3, &format!("({head} variable-name term)"))?;
            let kind = if head == "match" {
                MatchKind::Single
            } else {
                MatchKind::Double
            };
            CondKind::Match {
                kind,
                var: parse_variable(&items[1], symbols)?,
                term: term(2)?,
            }
        }
        "let" => {
            general_only("let-atom")?;
            expect_len(e, items, 3, "(let term variable-name)")?;
            CondKind::Let {
                term: term(1)?,
                var: parse_variable(&items[2], symbols)?,
            }
        }
        "and" | "or" => {
            let args = items[1..]
                .iter()
                .map(|c| parse_condition(c, ctx, symbols))
                .collect::<Result<Vec<_>, _>>()?;
            if head == "and" {
                CondKind::And(args)
            } else {
                CondKind::Or(args)
            }
        }
        "and*" | "or*" => {
            let args = &items[1..];
            let mut parsed = Vec::with_capacity(args.len());
            for (i, c) in args.iter().enumerate() {
                // Only the final argument of a general and*/or* may be general.
                let ctx = if i + 1 == args.len() {
                    ctx
                } else {
                    ConditionContext::Negatable
                };
                parsed.push(parse_condition(c, ctx, symbols)?);
            }
            if head == "and*" {
                CondKind::SeqAnd(parsed)
            } else {
                CondKind::SeqOr(parsed)
            }
        }
        "not" => {
            expect_len(e, items, 2, "(not negatable-condition)")?;
            CondKind::Not(Box::new(parse_condition(
                &items[1],
                ConditionContext::Negatable,
                symbols,
            )?))
        }
        _ => CondKind::Pred(parse_term(e, symbols)?),
    };
    Ok(Condition::new(kind, origin))
}

fn parse_condition_list(
    e: &SExpr,
    ctx: ConditionContext,
    symbols: &SymbolTable,
) -> Result<Vec<Condition>, SurfaceError> {
    let Some(items) = e.as_list() else {
        let expected = match ctx {
            ConditionContext::Negatable => "negatable-condition-list",
            ConditionContext::General => "general-condition-list",
        };
        return Err(SurfaceError::grammar(e, expected, &e.to_string()));
    };
    items.iter().map(|c| parse_condition(c, ctx, symbols)).collect()
}

pub fn parse_meta_term(e: &SExpr, symbols: &SymbolTable) -> Result<MetaTerm, SurfaceError> {
    let origin = Origin::of(e);
    match (e.head(), e.as_list()) {
        (Some("if"), Some(items)) => {
            expect_len(e, items, 4, "(if negatable-condition-list meta-term meta-term)")?;
            Ok(MetaTerm::If {
                conds: parse_condition_list(&items[1], ConditionContext::Negatable, symbols)?,
                then: Box::new(parse_meta_term(&items[2], symbols)?),
                otherwise: Box::new(parse_meta_term(&items[3], symbols)?),
                origin,
            })
        }
        (Some("case"), Some(items)) => {
            let body = &items[1..];
            let has_else = body.len() >= 2 && body[body.len() - 2].is_atom("else");
            let pairs = if has_else { &body[..body.len() - 2] } else { body };
            if let Some(stray) = pairs.iter().find(|x| x.is_atom("else")) {
                return Err(SurfaceError::grammar(
                    stray,
                    "`else` only as the penultimate element of a case",
                    "else",
                ));
            }
            if pairs.len() % 2 != 0 {
                return Err(SurfaceError::grammar(
                    e,
                    "case with condition-list/meta-term pairs",
                    "an odd number of case elements",
                ));
            }
            let ctx = if has_else {
                ConditionContext::Negatable
            } else {
                ConditionContext::General
            };
            let cases = pairs
                .chunks(2)
                .map(|pair| {
                    Ok(Case::new(
                        parse_condition_list(&pair[0], ctx, symbols)?,
                        parse_meta_term(&pair[1], symbols)?,
                    ))
                })
                .collect::<Result<Vec<_>, SurfaceError>>()?;
            if has_else {
                let otherwise = parse_meta_term(&body[body.len() - 1], symbols)?;
                Ok(MetaTerm::CaseElse {
                    cases,
                    otherwise: Box::new(otherwise),
                    origin,
                })
            } else if cases.is_empty() {
                Err(SurfaceError::grammar(e, "case with at least one case", "(case)"))
            } else {
                Ok(MetaTerm::Case { cases, origin })
            }
        }
        _ => Ok(MetaTerm::Plain(parse_term(e, symbols)?)),
    }
}

pub fn parse_macro_rule(e: &SExpr, symbols: &SymbolTable) -> Result<MacroRule, SurfaceError> {
    let items = match (e.head(), e.as_list()) {
        (Some("macro-rule"), Some(items)) => items,
        _ => return Err(SurfaceError::grammar(e, "(macro-rule term meta-term)", &e.to_string())),
    };
    expect_len(e, items, 3, "(macro-rule term meta-term)")?;
    let lhs = parse_term(&items[1], symbols)?;
    if !lhs.is_app() {
        return Err(SurfaceError::grammar(
            &items[1],
            "function application as left-hand side",
            &lhs.to_string(),
        ));
    }
    let body = parse_meta_term(&items[2], symbols)?;
    Ok(MacroRule::new(lhs, body, Origin::of(e)))
}

/// Load a specification file. Declarations may appear anywhere; macro-rules
/// are kept in source order. Fails outright only on reader or declaration
/// errors; a malformed macro-rule is reported and skipped.
pub fn parse_spec(text: &str, file: &str) -> Result<ParsedSpec, SurfaceError> {
    let forms = parse_sexprs(text, file)?;
    let mut symbols = SymbolTable::new();
    let mut diagnostics = Vec::new();
    for d in forms.iter().filter(|f| SymbolTable::is_declaration(f)) {
        symbols.absorb(d, &mut diagnostics)?;
    }
    let mut rules = Vec::new();
    for form in forms.iter().filter(|f| !SymbolTable::is_declaration(f)) {
        match parse_macro_rule(form, &symbols) {
            Ok(rule) => rules.push(rule),
            Err(err) => diagnostics.push(err.to_diagnostic()),
        }
    }
    Ok(ParsedSpec {
        spec: SpecFile { symbols, rules },
        diagnostics,
    })
}
