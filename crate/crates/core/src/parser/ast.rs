//! Typed syntax tree. Every node carries the span it was parsed from.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Byte range plus 1-based line/column of the first byte.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub line: u32,
    pub col: u32,
}

impl Span {
    pub fn join(self, other: Span) -> Span {
        Span { start: self.start, end: other.end, line: self.line, col: self.col }
    }

    pub fn slice(self, source: &str) -> &str {
        source.get(self.start..self.end).unwrap_or("")
    }
}

/// Head predicate given to integrity constraints (`:- body.`).
pub const CONSTRAINT_HEAD: &str = "__constraint";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ArithOp {
    #[serde(rename = "+")]
    Add,
    #[serde(rename = "-")]
    Sub,
    #[serde(rename = "*")]
    Mul,
    #[serde(rename = "/")]
    Div,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
        }
    }

    /// Integer semantics with truncating division. `None` on division by
    /// zero or overflow.
    pub fn apply(self, a: i64, b: i64) -> Option<i64> {
        match self {
            ArithOp::Add => a.checked_add(b),
            ArithOp::Sub => a.checked_sub(b),
            ArithOp::Mul => a.checked_mul(b),
            ArithOp::Div => a.checked_div(b),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CmpOp {
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "!=")]
    Ne,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    pub fn negate(self) -> CmpOp {
        match self {
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ne => CmpOp::Eq,
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Gt => CmpOp::Le,
            CmpOp::Ge => CmpOp::Lt,
        }
    }

    pub fn holds(self, ord: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            CmpOp::Eq => ord == Equal,
            CmpOp::Ne => ord != Equal,
            CmpOp::Lt => ord == Less,
            CmpOp::Le => ord != Greater,
            CmpOp::Gt => ord == Greater,
            CmpOp::Ge => ord != Less,
        }
    }

    pub(crate) fn from_token(text: &str) -> Option<CmpOp> {
        Some(match text {
            "=" | "==" => CmpOp::Eq,
            "!=" | "<>" => CmpOp::Ne,
            "<" => CmpOp::Lt,
            "<=" => CmpOp::Le,
            ">" => CmpOp::Gt,
            ">=" => CmpOp::Ge,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Term {
    Variable {
        name: String,
        span: Span,
    },
    Constant {
        name: String,
        span: Span,
    },
    Integer {
        value: i64,
        span: Span,
    },
    /// `_`; every occurrence is a fresh variable.
    Anonymous {
        span: Span,
    },
    Function {
        name: String,
        args: Vec<Term>,
        span: Span,
    },
    /// Unary minus over a non-literal operand (`-X`).
    Negate {
        operand: Box<Term>,
        span: Span,
    },
    Arith {
        op: ArithOp,
        left: Box<Term>,
        right: Box<Term>,
        span: Span,
    },
}

impl Term {
    pub fn span(&self) -> Span {
        match self {
            Term::Variable { span, .. }
            | Term::Constant { span, .. }
            | Term::Integer { span, .. }
            | Term::Anonymous { span }
            | Term::Function { span, .. }
            | Term::Negate { span, .. }
            | Term::Arith { span, .. } => *span,
        }
    }

    pub fn var(name: &str) -> Term {
        Term::Variable { name: name.into(), span: Span::default() }
    }

    pub fn constant(name: &str) -> Term {
        Term::Constant { name: name.into(), span: Span::default() }
    }

    pub fn int(value: i64) -> Term {
        Term::Integer { value, span: Span::default() }
    }

    pub fn anonymous() -> Term {
        Term::Anonymous { span: Span::default() }
    }

    /// Visits every named variable occurrence, left to right.
    pub fn for_each_variable<'a>(&'a self, f: &mut impl FnMut(&'a str)) {
        match self {
            Term::Variable { name, .. } => f(name),
            Term::Function { args, .. } => args.iter().for_each(|a| a.for_each_variable(f)),
            Term::Negate { operand, .. } => operand.for_each_variable(f),
            Term::Arith { left, right, .. } => {
                left.for_each_variable(f);
                right.for_each_variable(f);
            }
            Term::Constant { .. } | Term::Integer { .. } | Term::Anonymous { .. } => {}
        }
    }

    /// True when the term contains no variables (anonymous included).
    pub fn is_ground(&self) -> bool {
        match self {
            Term::Variable { .. } | Term::Anonymous { .. } => false,
            Term::Constant { .. } | Term::Integer { .. } => true,
            Term::Function { args, .. } => args.iter().all(Term::is_ground),
            Term::Negate { operand, .. } => operand.is_ground(),
            Term::Arith { left, right, .. } => left.is_ground() && right.is_ground(),
        }
    }

    pub(crate) fn strip_spans(&mut self) {
        match self {
            Term::Variable { span, .. }
            | Term::Constant { span, .. }
            | Term::Integer { span, .. }
            | Term::Anonymous { span } => *span = Span::default(),
            Term::Function { args, span, .. } => {
                *span = Span::default();
                args.iter_mut().for_each(Term::strip_spans);
            }
            Term::Negate { operand, span } => {
                *span = Span::default();
                operand.strip_spans();
            }
            Term::Arith { left, right, span, .. } => {
                *span = Span::default();
                left.strip_spans();
                right.strip_spans();
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
    pub span: Span,
}

impl Atom {
    pub fn new(predicate: &str, args: Vec<Term>) -> Atom {
        Atom { predicate: predicate.into(), args, span: Span::default() }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    pub(crate) fn strip_spans(&mut self) {
        self.span = Span::default();
        self.args.iter_mut().for_each(Term::strip_spans);
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BodyLiteral {
    Positive {
        atom: Atom,
        span: Span,
    },
    /// Negation as failure: `not atom`.
    Negated {
        atom: Atom,
        span: Span,
    },
    Comparison {
        left: Term,
        op: CmpOp,
        right: Term,
        span: Span,
    },
}

impl BodyLiteral {
    pub fn span(&self) -> Span {
        match self {
            BodyLiteral::Positive { span, .. }
            | BodyLiteral::Negated { span, .. }
            | BodyLiteral::Comparison { span, .. } => *span,
        }
    }

    pub fn positive(atom: Atom) -> BodyLiteral {
        BodyLiteral::Positive { atom, span: Span::default() }
    }

    pub fn negated(atom: Atom) -> BodyLiteral {
        BodyLiteral::Negated { atom, span: Span::default() }
    }

    pub fn comparison(left: Term, op: CmpOp, right: Term) -> BodyLiteral {
        BodyLiteral::Comparison { left, op, right, span: Span::default() }
    }

    pub fn atom(&self) -> Option<&Atom> {
        match self {
            BodyLiteral::Positive { atom, .. } | BodyLiteral::Negated { atom, .. } => Some(atom),
            BodyLiteral::Comparison { .. } => None,
        }
    }

    pub fn for_each_variable<'a>(&'a self, f: &mut impl FnMut(&'a str)) {
        match self {
            BodyLiteral::Positive { atom, .. } | BodyLiteral::Negated { atom, .. } => {
                atom.args.iter().for_each(|t| t.for_each_variable(f))
            }
            BodyLiteral::Comparison { left, right, .. } => {
                left.for_each_variable(f);
                right.for_each_variable(f);
            }
        }
    }

    pub(crate) fn strip_spans(&mut self) {
        match self {
            BodyLiteral::Positive { atom, span } | BodyLiteral::Negated { atom, span } => {
                *span = Span::default();
                atom.strip_spans();
            }
            BodyLiteral::Comparison { left, right, span, .. } => {
                *span = Span::default();
                left.strip_spans();
                right.strip_spans();
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Statement {
    Fact {
        head: Atom,
        span: Span,
    },
    /// Normal rule, or an integrity constraint when the head predicate is
    /// [`CONSTRAINT_HEAD`]. The body is never empty.
    Rule {
        head: Atom,
        body: Vec<BodyLiteral>,
        span: Span,
    },
    #[serde(rename = "const")]
    ConstDecl {
        name: String,
        value: i64,
        span: Span,
    },
    /// A `%` line comment. `attached` is set when it directly precedes a rule.
    Comment {
        text: String,
        attached: bool,
        span: Span,
    },
}

impl Statement {
    pub fn span(&self) -> Span {
        match self {
            Statement::Fact { span, .. }
            | Statement::Rule { span, .. }
            | Statement::ConstDecl { span, .. }
            | Statement::Comment { span, .. } => *span,
        }
    }

    pub fn is_integrity_constraint(&self) -> bool {
        matches!(self, Statement::Rule { head, .. } if head.predicate == CONSTRAINT_HEAD)
    }

    pub(crate) fn strip_spans(&mut self) {
        match self {
            Statement::Fact { head, span } => {
                *span = Span::default();
                head.strip_spans();
            }
            Statement::Rule { head, body, span } => {
                *span = Span::default();
                head.strip_spans();
                body.iter_mut().for_each(BodyLiteral::strip_spans);
            }
            Statement::ConstDecl { span, .. } | Statement::Comment { span, .. } => *span = Span::default(),
        }
    }

    /// Copy with every span zeroed, for structural comparison.
    pub fn without_spans(&self) -> Statement {
        let mut s = self.clone();
        s.strip_spans();
        s
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Program {
    pub source_name: String,
    pub statements: Vec<Statement>,
}

impl Program {
    pub fn new(source_name: impl Into<String>) -> Program {
        Program { source_name: source_name.into(), statements: Vec::new() }
    }

    /// Copy with every span zeroed, for structural comparison.
    pub fn without_spans(&self) -> Program {
        Program {
            source_name: self.source_name.clone(),
            statements: self.statements.iter().map(Statement::without_spans).collect(),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn operand(f: &mut fmt::Formatter<'_>, t: &Term) -> fmt::Result {
            match t {
                Term::Arith { .. } | Term::Negate { .. } => write!(f, "({t})"),
                Term::Integer { value, .. } if *value < 0 => write!(f, "({t})"),
                _ => write!(f, "{t}"),
            }
        }
        match self {
            Term::Variable { name, .. } | Term::Constant { name, .. } => f.write_str(name),
            Term::Integer { value, .. } => write!(f, "{value}"),
            Term::Anonymous { .. } => f.write_str("_"),
            Term::Function { name, args, .. } => {
                f.write_str(name)?;
                write_args(f, args)
            }
            Term::Negate { operand: inner, .. } => match **inner {
                Term::Variable { .. } => write!(f, "-{inner}"),
                // `-p` would read back as classical negation
                _ => write!(f, "-({inner})"),
            },
            Term::Arith { op, left, right, .. } => {
                operand(f, left)?;
                f.write_str(op.symbol())?;
                operand(f, right)
            }
        }
    }
}

fn write_args(f: &mut fmt::Formatter<'_>, args: &[Term]) -> fmt::Result {
    if args.is_empty() {
        return Ok(());
    }
    f.write_str("(")?;
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{a}")?;
    }
    f.write_str(")")
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        write_args(f, &self.args)
    }
}

impl fmt::Display for BodyLiteral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BodyLiteral::Positive { atom, .. } => write!(f, "{atom}"),
            BodyLiteral::Negated { atom, .. } => write!(f, "not {atom}"),
            BodyLiteral::Comparison { left, op, right, .. } => write!(f, "{left} {} {right}", op.symbol()),
        }
    }
}

/// Canonical single-line rendering; re-parses to a structurally equal statement.
impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statement::Fact { head, .. } => write!(f, "{head}."),
            Statement::Rule { head, body, .. } => {
                if head.predicate != CONSTRAINT_HEAD {
                    write!(f, "{head} ")?;
                }
                f.write_str(":- ")?;
                for (i, lit) in body.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{lit}")?;
                }
                f.write_str(".")
            }
            Statement::ConstDecl { name, value, .. } => write!(f, "#const {name} = {value}."),
            Statement::Comment { text, .. } => f.write_str(text),
        }
    }
}

/// Canonical pretty-printer: one statement per line. Attached comments are
/// kept directly above their rule; free-standing ones get a blank line after.
impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.statements {
            writeln!(f, "{s}")?;
            if let Statement::Comment { attached: false, .. } = s {
                writeln!(f)?;
            }
        }
        Ok(())
    }
}
