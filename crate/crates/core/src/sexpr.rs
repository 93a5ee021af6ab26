//! S-expression reader and printer with source spans.
//!
//! Everything above this layer (surface syntax, rule files, CLI queries) is
//! built on these trees. Keyword meaning is assigned later; here `match`,
//! `=`, `#` and friends are ordinary atoms.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// A region of a source file. Lines and columns are 1-based and count
/// characters, not bytes. The end position is inclusive.
///
/// Generated nodes use [`SourceSpan::synthetic`], which has line 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SourceSpan {
    pub file: Arc<str>,
    pub start_line: u32,
    pub start_col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

impl SourceSpan {
    pub fn new(file: Arc<str>, start: (u32, u32), end: (u32, u32)) -> Self {
        SourceSpan {
            file,
            start_line: start.0,
            start_col: start.1,
            end_line: end.0,
            end_col: end.1,
        }
    }

    pub fn synthetic() -> Self {
        SourceSpan::new(Arc::from("<generated>"), (0, 0), (0, 0))
    }

    pub fn is_synthetic(&self) -> bool {
        self.start_line == 0
    }

    pub fn start(&self) -> (u32, u32) {
        (self.start_line, self.start_col)
    }

    pub fn end(&self) -> (u32, u32) {
        (self.end_line, self.end_col)
    }

    /// True if `other` lies within `self` (same file, nested positions).
    pub fn contains(&self, other: &SourceSpan) -> bool {
        self.file == other.file && self.start() <= other.start() && other.end() <= self.end()
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.start_line, self.start_col)
    }
}

/// A symbolic expression. Equality ignores spans.
#[derive(Clone, Debug)]
pub enum SExpr {
    Atom { text: String, span: SourceSpan },
    List { items: Vec<SExpr>, span: SourceSpan },
}

impl SExpr {
    /// An atom with a synthetic span. Panics if `text` is not a legal symbol.
    pub fn atom(text: impl Into<String>) -> SExpr {
        let text = text.into();
        assert!(is_symbol(&text), "not a legal atom: {text:?}");
        SExpr::Atom {
            text,
            span: SourceSpan::synthetic(),
        }
    }

    pub fn list(items: Vec<SExpr>) -> SExpr {
        SExpr::List {
            items,
            span: SourceSpan::synthetic(),
        }
    }

    pub fn span(&self) -> &SourceSpan {
        match self {
            SExpr::Atom { span, .. } | SExpr::List { span, .. } => span,
        }
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            SExpr::Atom { text, .. } => Some(text),
            SExpr::List { .. } => None,
        }
    }

    pub fn as_list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List { items, .. } => Some(items),
            SExpr::Atom { .. } => None,
        }
    }

    /// The head atom of a non-empty list whose first item is an atom.
    pub fn head(&self) -> Option<&str> {
        self.as_list()?.first()?.as_atom()
    }

    pub fn is_atom(&self, text: &str) -> bool {
        self.as_atom() == Some(text)
    }

    /// Follow a path of list indices.
    pub fn at_path(&self, path: &[usize]) -> Option<&SExpr> {
        let mut cur = self;
        for &i in path {
            cur = cur.as_list()?.get(i)?;
        }
        Some(cur)
    }

    pub fn at_path_mut(&mut self, path: &[usize]) -> Option<&mut SExpr> {
        let mut cur = self;
        for &i in path {
            cur = match cur {
                SExpr::List { items, .. } => items.get_mut(i)?,
                SExpr::Atom { .. } => return None,
            };
        }
        Some(cur)
    }
}

impl PartialEq for SExpr {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (SExpr::Atom { text: a, .. }, SExpr::Atom { text: b, .. }) => a == b,
            (SExpr::List { items: a, .. }, SExpr::List { items: b, .. }) => a == b,
            _ => false,
        }
    }
}

impl Eq for SExpr {}

impl fmt::Display for SExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SExpr::Atom { text, .. } => f.write_str(text),
            SExpr::List { items, .. } => {
                f.write_str("(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Canonical single-line form.
pub fn print_sexpr(e: &SExpr) -> String {
    e.to_string()
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum SexprError {
    #[error("{span}: unbalanced parenthesis")]
    UnbalancedParen { span: SourceSpan },
    #[error("{span}: illegal character {ch:?}")]
    IllegalCharacter { ch: char, span: SourceSpan },
}

impl SexprError {
    pub fn span(&self) -> &SourceSpan {
        match self {
            SexprError::UnbalancedParen { span } | SexprError::IllegalCharacter { span, .. } => {
                span
            }
        }
    }
}

fn is_illegal(c: char) -> bool {
    (c.is_control() && !c.is_whitespace())
        || matches!(c, '"' | '\'' | '`' | '[' | ']' | '{' | '}')
}

fn is_delimiter(c: char) -> bool {
    c.is_whitespace() || matches!(c, '(' | ')' | ';')
}

/// True if `text` can be printed as an atom and read back unchanged.
pub fn is_symbol(text: &str) -> bool {
    !text.is_empty() && text.chars().all(|c| !is_delimiter(c) && !is_illegal(c))
}

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: u32,
    col: u32,
    file: Arc<str>,
}

impl Reader<'_> {
    fn pos(&self) -> (u32, u32) {
        (self.line, self.col)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn span(&self, start: (u32, u32), end: (u32, u32)) -> SourceSpan {
        SourceSpan::new(self.file.clone(), start, end)
    }

    fn skip_trivia(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c == ';' {
                while let Some(&c) = self.chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }
}

/// Read all top-level expressions of `text`. `;` starts a comment that runs
/// to the end of the line.
pub fn parse_sexprs(text: &str, file: &str) -> Result<Vec<SExpr>, SexprError> {
    let mut r = Reader {
        chars: text.chars().peekable(),
        line: 1,
        col: 1,
        file: Arc::from(file),
    };
    // Each open list: its start position and the items read so far.
    let mut stack: Vec<((u32, u32), Vec<SExpr>)> = Vec::new();
    let mut top = Vec::new();
    loop {
        r.skip_trivia();
        let start = r.pos();
        let Some(&c) = r.chars.peek() else {
            break;
        };
        let node = match c {
            '(' => {
                r.bump();
                stack.push((start, Vec::new()));
                continue;
            }
            ')' => {
                r.bump();
                let Some((open, items)) = stack.pop() else {
                    return Err(SexprError::UnbalancedParen {
                        span: r.span(start, start),
                    });
                };
                SExpr::List {
                    items,
                    span: r.span(open, start),
                }
            }
            c if is_illegal(c) => {
                return Err(SexprError::IllegalCharacter {
                    ch: c,
                    span: r.span(start, start),
                });
            }
            _ => {
                let mut text = String::new();
                let mut end = start;
                while let Some(&c) = r.chars.peek() {
                    if is_delimiter(c) {
                        break;
                    }
                    if is_illegal(c) {
                        let at = r.pos();
                        return Err(SexprError::IllegalCharacter {
                            ch: c,
                            span: r.span(at, at),
                        });
                    }
                    end = r.pos();
                    text.push(c);
                    r.bump();
                }
                SExpr::Atom {
                    text,
                    span: r.span(start, end),
                }
            }
        };
        match stack.last_mut() {
            Some((_, items)) => items.push(node),
            None => top.push(node),
        }
    }
    if let Some((open, _)) = stack.pop() {
        return Err(SexprError::UnbalancedParen {
            span: r.span(open, open),
        });
    }
    Ok(top)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn a(s: &str) -> SExpr {
        SExpr::atom(s)
    }

    #[test]
    fn reads_nested_lists() {
        let got = parse_sexprs("(a b (c))", "t").unwrap();
        assert_eq!(got, vec![SExpr::list(vec![a("a"), a("b"), SExpr::list(vec![a("c")])])]);
    }

    #[test]
    fn empty_input_is_empty() {
        assert!(parse_sexprs("", "t").unwrap().is_empty());
        assert!(parse_sexprs("  ; only a comment\n", "t").unwrap().is_empty());
    }

    #[test]
    fn unclosed_list_is_unbalanced() {
        let err = parse_sexprs("(a", "t").unwrap_err();
        assert!(matches!(err, SexprError::UnbalancedParen { .. }));
        assert_eq!(err.span().start(), (1, 1));
    }

    #[test]
    fn stray_close_is_unbalanced() {
        let err = parse_sexprs("a)\n", "t").unwrap_err();
        assert_eq!(err.span().start(), (1, 2));
    }

    #[test]
    fn illegal_characters_are_reported_with_position() {
        let err = parse_sexprs("(a\n  \"b\")", "t").unwrap_err();
        assert!(matches!(err, SexprError::IllegalCharacter { ch: '"', .. }));
        assert_eq!(err.span().start(), (2, 3));
    }

    #[test]
    fn comments_run_to_end_of_line() {
        let got = parse_sexprs("(pot w x) ; computes w^x\n(s 0)", "t").unwrap();
        assert_eq!(got.len(), 2);
        assert_eq!(got[1].to_string(), "(s 0)");
    }

    #[test]
    fn prints_canonically() {
        assert_eq!(print_sexpr(&a("x")), "x");
        assert_eq!(print_sexpr(&SExpr::list(vec![a("a"), SExpr::list(vec![])])), "(a ())");
    }

    #[test]
    fn spans_count_characters() {
        let got = parse_sexprs("(λ ≠x)", "t").unwrap();
        let items = got[0].as_list().unwrap();
        assert_eq!(items[1].span().start(), (1, 4));
        assert_eq!(items[1].span().end(), (1, 5));
        assert_eq!(got[0].span().end(), (1, 6));
    }

    fn arb_sexpr() -> impl Strategy<Value = SExpr> {
        let leaf = "[a-z=#*+-][a-z0-9*-]{0,4}".prop_map(SExpr::atom);
        leaf.prop_recursive(4, 32, 5, |inner| {
            prop::collection::vec(inner, 0..5).prop_map(SExpr::list)
        })
    }

    fn check_nesting(e: &SExpr) {
        if let SExpr::List { items, span } = e {
            for item in items {
                assert!(span.contains(item.span()), "{span:?} !> {:?}", item.span());
                check_nesting(item);
            }
        }
    }

    proptest! {
        #[test]
        fn print_then_parse_is_identity(e in arb_sexpr()) {
            let text = print_sexpr(&e);
            let back = parse_sexprs(&text, "rt").unwrap();
            prop_assert_eq!(back, vec![e]);
        }

        #[test]
        fn child_spans_nest(e in arb_sexpr()) {
            let text = print_sexpr(&e);
            for e in parse_sexprs(&text, "rt").unwrap() {
                check_nesting(&e);
            }
        }
    }
}
