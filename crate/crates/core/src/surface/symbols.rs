use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::ast::Name;
use super::SurfaceError;
use crate::diagnostic::{code, Diagnostic};
use crate::sexpr::SExpr;

/// Keywords a function should not be named after, since a predicate atom
/// headed by it could not be told apart from the keyword form.
pub const SOFT_RESERVED: &[&str] = &[
    "=", "#", "def", "match", "match*", "let", "or", "or*", "and", "and*", "not",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymbolClass {
    Variable,
    Constant,
    Function(usize),
}

impl fmt::Display for SymbolClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymbolClass::Variable => f.write_str("variable"),
            SymbolClass::Constant => f.write_str("constant"),
            SymbolClass::Function(n) => write!(f, "function of arity {n}"),
        }
    }
}

/// Declared variables, constants, and functions. The three classes are
/// disjoint.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SymbolTable {
    variables: BTreeSet<Name>,
    constants: BTreeSet<Name>,
    functions: BTreeMap<Name, usize>,
}

impl SymbolTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn classify(&self, name: &str) -> Option<SymbolClass> {
        if self.variables.contains(name) {
            Some(SymbolClass::Variable)
        } else if self.constants.contains(name) {
            Some(SymbolClass::Constant)
        } else {
            self.functions.get(name).map(|&n| SymbolClass::Function(n))
        }
    }

    pub fn is_variable(&self, name: &str) -> bool {
        self.variables.contains(name)
    }

    pub fn is_constant(&self, name: &str) -> bool {
        self.constants.contains(name)
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.functions.get(name).copied()
    }

    pub fn variables(&self) -> impl Iterator<Item = &Name> {
        self.variables.iter()
    }

    pub fn constants(&self) -> impl Iterator<Item = &Name> {
        self.constants.iter()
    }

    pub fn functions(&self) -> impl Iterator<Item = (&Name, usize)> {
        self.functions.iter().map(|(n, &a)| (n, a))
    }

    /// The interned `true` constant, if declared.
    pub fn true_constant(&self) -> Option<&Name> {
        self.constants.get("true")
    }

    fn insert(&mut self, name: &str, class: SymbolClass) -> Result<(), SymbolClass> {
        match self.classify(name) {
            Some(existing) if existing == class => Ok(()),
            Some(existing) => Err(existing),
            None => {
                match class {
                    SymbolClass::Variable => self.variables.insert(name.into()),
                    SymbolClass::Constant => self.constants.insert(name.into()),
                    SymbolClass::Function(n) => self.functions.insert(name.into(), n).is_none(),
                };
                Ok(())
            }
        }
    }

    pub fn declare_variable(&mut self, name: &str) -> Result<(), SymbolClass> {
        self.insert(name, SymbolClass::Variable)
    }

    pub fn declare_constant(&mut self, name: &str) -> Result<(), SymbolClass> {
        self.insert(name, SymbolClass::Constant)
    }

    pub fn declare_function(&mut self, name: &str, arity: usize) -> Result<(), SymbolClass> {
        self.insert(name, SymbolClass::Function(arity))
    }

    pub fn is_declaration(e: &SExpr) -> bool {
        matches!(e.head(), Some("vars" | "consts" | "funs"))
    }

    /// Merge one `(vars …)`, `(consts …)` or `(funs (name arity) …)` form.
    /// Soft-reserved function names produce warnings in `warnings`.
    pub fn absorb(&mut self, decl: &SExpr, warnings: &mut Vec<Diagnostic>) -> Result<(), SurfaceError> {
        let items = decl.as_list().unwrap_or_default();
        let kind = decl.head().unwrap_or_default();
        for item in items.iter().skip(1) {
            let (name, class, at) = match kind {
                "vars" | "consts" => {
                    let Some(name) = item.as_atom() else {
                        return Err(SurfaceError::grammar(item, "symbol name", "a list"));
                    };
                    let class = if kind == "vars" {
                        SymbolClass::Variable
                    } else {
                        SymbolClass::Constant
                    };
                    (name, class, item)
                }
                "funs" => {
                    let parsed = item.as_list().and_then(|pair| match pair {
                        [n, a] => Some((n.as_atom()?, a.as_atom()?.parse::<usize>().ok()?, n)),
                        _ => None,
                    });
                    match parsed {
                        Some((name, arity, at)) if arity > 0 => {
                            (name, SymbolClass::Function(arity), at)
                        }
                        _ => {
                            return Err(SurfaceError::grammar(
                                item,
                                "(function-name positive-arity)",
                                &item.to_string(),
                            ))
                        }
                    }
                }
                _ => {
                    return Err(SurfaceError::grammar(
                        decl,
                        "(vars …), (consts …) or (funs …)",
                        &decl.to_string(),
                    ))
                }
            };
            if name == "else" || (matches!(class, SymbolClass::Function(_)) && matches!(name, "case" | "if")) {
                return Err(SurfaceError::ReservedFunctionName {
                    name: name.to_string(),
                    span: at.span().clone(),
                });
            }
            if let SymbolClass::Function(_) = class {
                if SOFT_RESERVED.contains(&name) {
                    warnings.push(Diagnostic::warning(
                        code::RESERVED_NAME,
                        at.span().clone(),
                        format!(
                            "function `{name}` shares its name with a condition keyword; \
                             it cannot be used in a predicate atom"
                        ),
                    ));
                }
            }
            self.insert(name, class).map_err(|existing| SurfaceError::NameClass {
                name: name.to_string(),
                span: at.span().clone(),
                first: existing,
                second: class,
            })?;
        }
        Ok(())
    }

    /// Declaration forms that rebuild this table.
    pub fn to_declarations(&self) -> Vec<SExpr> {
        let mut out = Vec::new();
        let names = |head: &str, names: &BTreeSet<Name>| {
            let mut items = vec![SExpr::atom(head)];
            items.extend(names.iter().map(|n| SExpr::atom(&**n)));
            SExpr::list(items)
        };
        if !self.variables.is_empty() {
            out.push(names("vars", &self.variables));
        }
        if !self.constants.is_empty() {
            out.push(names("consts", &self.constants));
        }
        if !self.functions.is_empty() {
            let mut items = vec![SExpr::atom("funs")];
            items.extend(self.functions.iter().map(|(n, a)| {
                SExpr::list(vec![SExpr::atom(&**n), SExpr::atom(a.to_string())])
            }));
            out.push(SExpr::list(items));
        }
        out
    }
}

/// Build a table from declaration forms.
pub fn build_symbol_table(decls: &[SExpr]) -> Result<(SymbolTable, Vec<Diagnostic>), SurfaceError> {
    let mut table = SymbolTable::new();
    let mut warnings = Vec::new();
    for d in decls {
        table.absorb(d, &mut warnings)?;
    }
    Ok((table, warnings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sexpr::parse_sexprs;

    fn build(src: &str) -> Result<(SymbolTable, Vec<Diagnostic>), SurfaceError> {
        build_symbol_table(&parse_sexprs(src, "decls").unwrap())
    }

    #[test]
    fn merges_declaration_forms() {
        let (t, w) = build("(vars x)(consts nil)(funs (cons 2))").unwrap();
        assert!(w.is_empty());
        assert_eq!(t.classify("x"), Some(SymbolClass::Variable));
        assert_eq!(t.classify("nil"), Some(SymbolClass::Constant));
        assert_eq!(t.arity("cons"), Some(2));
        assert_eq!(t.classify("y"), None);
    }

    #[test]
    fn repeated_declarations_are_idempotent() {
        let (t, _) = build("(vars x x)(vars x)(funs (f 1))(funs (f 1))").unwrap();
        assert_eq!(t.variables().count(), 1);
        assert_eq!(t.arity("f"), Some(1));
    }

    #[test]
    fn name_classes_must_be_disjoint() {
        let err = build("(vars x)(consts x)").unwrap_err();
        assert!(matches!(err, SurfaceError::NameClass { .. }), "{err}");
        assert_eq!(err.span().start(), (1, 17));
        let err = build("(funs (f 1) (f 2))").unwrap_err();
        assert!(matches!(err, SurfaceError::NameClass { .. }));
    }

    #[test]
    fn case_and_if_cannot_be_functions() {
        for src in ["(funs (case 1))", "(funs (if 3))"] {
            assert!(matches!(
                build(src).unwrap_err(),
                SurfaceError::ReservedFunctionName { .. }
            ));
        }
    }

    #[test]
    fn keyword_function_names_warn() {
        let (t, w) = build("(funs (not 1))").unwrap();
        assert_eq!(t.arity("not"), Some(1));
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].code, code::RESERVED_NAME);
    }

    #[test]
    fn malformed_arity_is_rejected() {
        assert!(build("(funs (f 0))").is_err());
        assert!(build("(funs (f x))").is_err());
        assert!(build("(funs f)").is_err());
    }

    #[test]
    fn declarations_round_trip() {
        let (t, _) = build("(vars x y)(consts nil 0)(funs (cons 2) (s 1))").unwrap();
        let (back, _) = build_symbol_table(&t.to_declarations()).unwrap();
        assert_eq!(back, t);
    }
}
