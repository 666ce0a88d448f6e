//! Recursive-descent parser over the token stream.
//!
//! Statements are delimited by `.` tokens. A syntax error drops the
//! offending statement; an unsupported construct (aggregates, pools,
//! intervals, choice or disjunctive heads, optimization and other
//! directives) drops it too but keeps whatever of the rule was understood
//! in the diagnostic, so downstream passes can still account for it.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ast::*;
use super::lexer::{tokenize_recovering, LexError, Token, TokenKind};

/// A rule whose statement was skipped because of an unsupported construct.
/// `body` holds the literals that did parse.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialRule {
    pub head: Atom,
    pub body: Vec<BodyLiteral>,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Error, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParseDiagnostic {
    #[error("{}:{}: {message}", span.line, span.col)]
    Lex { span: Span, message: String },
    #[error("{}:{}: expected {}, found {found}", span.line, span.col, expected.join(" or "))]
    Syntax { span: Span, expected: Vec<String>, found: String },
    #[error("{}:{}: unsupported construct: {construct}", span.line, span.col)]
    Unsupported {
        /// Span of the whole skipped statement.
        span: Span,
        construct: String,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        partial: Option<PartialRule>,
    },
}

impl ParseDiagnostic {
    pub fn span(&self) -> Span {
        match self {
            ParseDiagnostic::Lex { span, .. }
            | ParseDiagnostic::Syntax { span, .. }
            | ParseDiagnostic::Unsupported { span, .. } => *span,
        }
    }

    /// Unsupported constructs are warnings; everything else is an error.
    pub fn is_error(&self) -> bool {
        !matches!(self, ParseDiagnostic::Unsupported { .. })
    }
}

impl From<LexError> for ParseDiagnostic {
    fn from(e: LexError) -> Self {
        ParseDiagnostic::Lex { span: e.span, message: e.message }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ParseOutput {
    pub program: Program,
    pub diagnostics: Vec<ParseDiagnostic>,
}

impl ParseOutput {
    pub fn has_errors(&self) -> bool {
        self.diagnostics.iter().any(ParseDiagnostic::is_error)
    }

    pub fn errors(&self) -> impl Iterator<Item = &ParseDiagnostic> {
        self.diagnostics.iter().filter(|d| d.is_error())
    }

    pub fn unsupported(&self) -> impl Iterator<Item = &ParseDiagnostic> {
        self.diagnostics.iter().filter(|d| !d.is_error())
    }

    pub fn partial_rules(&self) -> impl Iterator<Item = (Span, &PartialRule)> {
        self.diagnostics.iter().filter_map(|d| match d {
            ParseDiagnostic::Unsupported { span, partial: Some(p), .. } => Some((*span, p)),
            _ => None,
        })
    }
}

/// Parses a whole source file. Never fails: problems are reported as
/// diagnostics next to whatever statements could be recovered.
pub fn parse_program(source: &str, source_name: &str) -> ParseOutput {
    let (tokens, lex_errors) = tokenize_recovering(source);
    let lex_offsets: Vec<usize> = lex_errors.iter().map(|e| e.span.start).collect();
    let mut diagnostics: Vec<ParseDiagnostic> = lex_errors.into_iter().map(Into::into).collect();

    let mut items: Vec<Item> = Vec::new();
    let mut pending: Vec<&Token> = Vec::new();
    let mut inner_comments: Vec<&Token> = Vec::new();

    for tok in &tokens {
        if tok.kind == TokenKind::Comment {
            if pending.is_empty() {
                items.push(Item::comment(tok));
            } else {
                inner_comments.push(tok);
            }
            continue;
        }
        pending.push(tok);
        if tok.is_punct(".") {
            let (start, end) = (pending[0].span.start, tok.span.end);
            if lex_offsets.iter().any(|&o| o >= start && o < end) {
                // already reported by the lexer
                items.push(Item::broken(&pending));
            } else {
                items.push(parse_statement(&pending, source, &mut diagnostics));
            }
            items.extend(inner_comments.drain(..).map(|c| {
                let mut item = Item::comment(c);
                item.inside_statement = true;
                item
            }));
            pending.clear();
        }
    }
    if !pending.is_empty() {
        let last = pending[pending.len() - 1];
        diagnostics.push(ParseDiagnostic::Syntax {
            span: Span { start: source.len(), end: source.len(), line: last.span.line, col: last.span.col },
            expected: vec!["\".\"".into()],
            found: "end of input".into(),
        });
        items.extend(inner_comments.drain(..).map(Item::comment));
    }

    attach_comments(&mut items);

    let mut statements: Vec<Statement> = items.into_iter().filter_map(|i| i.statement).collect();
    statements.sort_by_key(|s| s.span().start);
    diagnostics.sort_by_key(|d| d.span().start);
    ParseOutput { program: Program { source_name: source_name.to_string(), statements }, diagnostics }
}

struct Item {
    statement: Option<Statement>,
    first_line: u32,
    last_line: u32,
    is_rule: bool,
    is_comment: bool,
    inside_statement: bool,
}

impl Item {
    fn broken(tokens: &[&Token]) -> Item {
        Item {
            statement: None,
            first_line: tokens[0].span.line,
            last_line: tokens[tokens.len() - 1].span.line,
            is_rule: false,
            is_comment: false,
            inside_statement: false,
        }
    }

    fn comment(tok: &Token) -> Item {
        Item {
            statement: Some(Statement::Comment { text: tok.text.clone(), attached: false, span: tok.span }),
            first_line: tok.span.line,
            last_line: tok.span.line,
            is_rule: false,
            is_comment: true,
            inside_statement: false,
        }
    }
}

/// A comment is attached when the next item starts on the following line and
/// is either a rule or another attached comment. Comments sharing a line
/// with the end of the previous statement are trailing and never attach.
fn attach_comments(items: &mut [Item]) {
    let mut next_attaches: Option<u32> = None; // first line of the next item if it accepts attachment
    for i in (0..items.len()).rev() {
        let item = &items[i];
        if item.is_comment && !item.inside_statement {
            let trailing = i > 0 && !items[i - 1].is_comment && items[i - 1].last_line == item.first_line;
            let attach = !trailing && next_attaches == Some(item.first_line + 1);
            if let Some(Statement::Comment { attached, .. }) = &mut items[i].statement {
                *attached = attach;
            }
            next_attaches = attach.then_some(items[i].first_line);
        } else if item.inside_statement {
            // comments inside a statement are emitted after it; skip them
        } else {
            next_attaches = item.is_rule.then_some(item.first_line);
        }
    }
}

#[derive(Debug)]
enum Failure {
    Syntax { span: Span, expected: Vec<String>, found: String },
    Unsupported { construct: String },
}

type PResult<T> = Result<T, Failure>;

fn parse_statement(tokens: &[&Token], source: &str, diagnostics: &mut Vec<ParseDiagnostic>) -> Item {
    let first = tokens[0];
    let last = tokens[tokens.len() - 1];
    let span = first.span.join(last.span);
    let mut p = Parser { toks: tokens, pos: 0 };
    let is_rule_shaped = tokens.iter().any(|t| t.is_punct(":-"));
    let mut item = Item {
        statement: None,
        first_line: first.span.line,
        last_line: last.span.line,
        is_rule: false,
        is_comment: false,
        inside_statement: false,
    };

    match p.statement(span) {
        Ok(Parsed::Complete(stmt)) => {
            item.is_rule = matches!(stmt, Statement::Rule { .. });
            item.statement = Some(stmt);
        }
        Ok(Parsed::Skipped { construct, partial }) => {
            item.is_rule = is_rule_shaped;
            let partial = partial.map(|(head, body)| PartialRule { head, body, text: span.slice(source).to_string() });
            diagnostics.push(ParseDiagnostic::Unsupported { span, construct, partial });
        }
        Err(Failure::Unsupported { construct }) => {
            item.is_rule = is_rule_shaped;
            diagnostics.push(ParseDiagnostic::Unsupported { span, construct, partial: None });
        }
        Err(Failure::Syntax { span, expected, found }) => {
            item.is_rule = is_rule_shaped;
            diagnostics.push(ParseDiagnostic::Syntax { span, expected, found });
        }
    }
    item
}

enum Parsed {
    Complete(Statement),
    Skipped { construct: String, partial: Option<(Atom, Vec<BodyLiteral>)> },
}

struct Parser<'t> {
    toks: &'t [&'t Token],
    pos: usize,
}

impl<'t> Parser<'t> {
    fn peek(&self) -> Option<&'t Token> {
        self.toks.get(self.pos).copied()
    }

    fn peek_at(&self, n: usize) -> Option<&'t Token> {
        self.toks.get(self.pos + n).copied()
    }

    fn advance(&mut self) -> Option<&'t Token> {
        let t = self.peek();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn at_punct(&self, text: &str) -> bool {
        self.peek().is_some_and(|t| t.is_punct(text))
    }

    fn fail<T>(&self, expected: &[&str]) -> PResult<T> {
        let (span, found) = match self.peek() {
            Some(t) => (t.span, format!("{:?}", t.text)),
            None => {
                let last = self.toks[self.toks.len() - 1].span;
                (Span { start: last.end, end: last.end, line: last.line, col: last.col }, "end of statement".into())
            }
        };
        Err(Failure::Syntax { span, expected: expected.iter().map(|s| s.to_string()).collect(), found })
    }

    fn expect_punct(&mut self, text: &str) -> PResult<&'t Token> {
        if self.at_punct(text) {
            Ok(self.advance().unwrap())
        } else {
            self.fail(&[&format!("{text:?}")])
        }
    }

    fn unsupported<T>(construct: &str) -> PResult<T> {
        Err(Failure::Unsupported { construct: construct.to_string() })
    }

    fn statement(&mut self, span: Span) -> PResult<Parsed> {
        let first = self.peek().unwrap();
        match first.kind {
            TokenKind::Directive if first.text == "#const" => self.const_decl(span),
            TokenKind::Directive => {
                let construct = match first.text.as_str() {
                    "#minimize" | "#maximize" | "#minimise" | "#maximise" => "optimization statement",
                    "#count" | "#sum" | "#min" | "#max" | "#sum+" => "aggregate",
                    other => other,
                };
                Ok(Parsed::Skipped { construct: construct.into(), partial: None })
            }
            _ if first.is_punct(":~") => Ok(Parsed::Skipped { construct: "weak constraint".into(), partial: None }),
            _ if first.is_punct(":-") => {
                self.advance();
                let head = Atom { predicate: CONSTRAINT_HEAD.into(), args: Vec::new(), span: first.span };
                self.rule_body(head, span)
            }
            _ => {
                let head = self.head()?;
                if self.at_punct(".") {
                    self.advance();
                    self.end()?;
                    return Ok(Parsed::Complete(Statement::Fact { head, span }));
                }
                self.expect_punct(":-")?;
                self.rule_body(head, span)
            }
        }
    }

    fn end(&self) -> PResult<()> {
        if self.pos == self.toks.len() {
            Ok(())
        } else {
            self.fail(&["end of statement"])
        }
    }

    fn const_decl(&mut self, span: Span) -> PResult<Parsed> {
        self.advance();
        let name = match self.advance() {
            Some(t) if t.kind == TokenKind::Identifier => t.text.clone(),
            _ => {
                self.pos -= 1;
                return self.fail(&["constant name"]);
            }
        };
        match self.peek() {
            Some(t) if t.is(TokenKind::ComparisonOperator, "=") => {
                self.advance();
            }
            _ => return self.fail(&["\"=\""]),
        }
        let value_term = self.term()?;
        let Some(value) = eval_ground_int(&value_term) else {
            return Err(Failure::Syntax {
                span: value_term.span(),
                expected: vec!["integer".into()],
                found: value_term.to_string(),
            });
        };
        self.expect_punct(".")?;
        self.end()?;
        Ok(Parsed::Complete(Statement::ConstDecl { name, value, span }))
    }

    fn head(&mut self) -> PResult<Atom> {
        let Some(t) = self.peek() else { return self.fail(&["atom"]) };
        if t.is_punct("{") || (t.kind == TokenKind::Integer && self.peek_at(1).is_some_and(|n| n.is_punct("{"))) {
            return Self::unsupported("choice rule");
        }
        if t.is(TokenKind::ArithmeticOperator, "-") {
            return Self::unsupported("classical negation");
        }
        if t.kind == TokenKind::Directive {
            return Self::unsupported(&t.text);
        }
        let atom = self.atom()?;
        if self.at_punct(";") || self.at_punct("|") {
            return Self::unsupported("disjunctive head");
        }
        Ok(atom)
    }

    /// Parses comma-separated literals up to the closing `.`. Unsupported
    /// literals are skipped up to the next top-level comma and remembered.
    fn rule_body(&mut self, head: Atom, span: Span) -> PResult<Parsed> {
        let mut body = Vec::new();
        let mut skipped: Option<String> = None;
        loop {
            let start = self.pos;
            match self.literal() {
                Ok(lit) => body.push(lit),
                Err(Failure::Unsupported { construct }) => {
                    skipped.get_or_insert(construct);
                    self.pos = start;
                    self.skip_literal();
                }
                Err(e) => return Err(e),
            }
            if self.at_punct(",") {
                self.advance();
                continue;
            }
            if self.at_punct(";") {
                skipped.get_or_insert("semicolon-separated body".into());
                self.advance();
                continue;
            }
            self.expect_punct(".")?;
            self.end()?;
            break;
        }
        match skipped {
            Some(construct) => Ok(Parsed::Skipped { construct, partial: Some((head, body)) }),
            None => Ok(Parsed::Complete(Statement::Rule { head, body, span })),
        }
    }

    /// Skips to the next comma, semicolon, or final `.` outside any brackets.
    fn skip_literal(&mut self) {
        let mut depth = 0usize;
        while let Some(t) = self.peek() {
            if t.kind == TokenKind::Punctuation {
                match t.text.as_str() {
                    "(" | "{" | "[" => depth += 1,
                    ")" | "}" | "]" => depth = depth.saturating_sub(1),
                    "," | ";" if depth == 0 => return,
                    "." if self.pos + 1 == self.toks.len() => return,
                    _ => {}
                }
            }
            self.advance();
        }
    }

    fn literal(&mut self) -> PResult<BodyLiteral> {
        let Some(t) = self.peek() else { return self.fail(&["literal"]) };
        if t.kind == TokenKind::Directive {
            let construct = match t.text.as_str() {
                "#count" | "#sum" | "#min" | "#max" => "aggregate",
                "#true" | "#false" => "boolean constant",
                _ => "directive in body",
            };
            return Self::unsupported(construct);
        }
        if t.is_punct("{") {
            return Self::unsupported("aggregate");
        }
        if t.is(TokenKind::Identifier, "not") {
            let not_tok = self.advance().unwrap();
            if self.peek().is_some_and(|n| n.is(TokenKind::Identifier, "not")) {
                return Self::unsupported("double negation");
            }
            return match self.atom_or_comparison()? {
                AtomOrCmp::Atom(atom) => {
                    let span = not_tok.span.join(atom.span);
                    Ok(BodyLiteral::Negated { atom, span })
                }
                AtomOrCmp::Cmp(left, op, right) => {
                    let span = not_tok.span.join(right.span());
                    Ok(BodyLiteral::Comparison { left, op: op.negate(), right, span })
                }
            };
        }
        if t.is(TokenKind::ArithmeticOperator, "-") && self.peek_at(1).is_some_and(|n| n.kind == TokenKind::Identifier)
        {
            return Self::unsupported("classical negation");
        }
        match self.atom_or_comparison()? {
            AtomOrCmp::Atom(atom) => Ok(BodyLiteral::Positive { span: atom.span, atom }),
            AtomOrCmp::Cmp(left, op, right) => {
                let span = left.span().join(right.span());
                Ok(BodyLiteral::Comparison { left, op, right, span })
            }
        }
    }

    fn atom_or_comparison(&mut self) -> PResult<AtomOrCmp> {
        let left = self.term()?;
        if self.at_punct("{") {
            return Self::unsupported("aggregate");
        }
        let Some(op) = self.peek().filter(|t| t.kind == TokenKind::ComparisonOperator) else {
            return match left {
                Term::Constant { name, span } => Ok(AtomOrCmp::Atom(Atom { predicate: name, args: Vec::new(), span })),
                Term::Function { name, args, span } => Ok(AtomOrCmp::Atom(Atom { predicate: name, args, span })),
                _ => self.fail(&["comparison operator"]),
            };
        };
        self.advance();
        let op = CmpOp::from_token(&op.text).expect("lexer only emits known comparison operators");
        if self.at_punct("{") || self.peek().is_some_and(|t| t.kind == TokenKind::Directive) {
            return Self::unsupported("aggregate");
        }
        let right = self.term()?;
        if self.at_punct("{") {
            return Self::unsupported("aggregate");
        }
        for side in [&left, &right] {
            if contains_function(side) {
                return Err(Failure::Syntax {
                    span: side.span(),
                    expected: vec!["variable, constant or integer operand".into()],
                    found: side.to_string(),
                });
            }
        }
        Ok(AtomOrCmp::Cmp(left, op, right))
    }

    fn atom(&mut self) -> PResult<Atom> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Identifier && t.text != "not" => {
                self.advance();
                let (args, end) = self.opt_args()?;
                let span = end.map_or(t.span, |e| t.span.join(e));
                Ok(Atom { predicate: t.text.clone(), args, span })
            }
            _ => self.fail(&["atom"]),
        }
    }

    /// Optional parenthesized argument list; returns the closing paren span.
    fn opt_args(&mut self) -> PResult<(Vec<Term>, Option<Span>)> {
        if !self.at_punct("(") {
            return Ok((Vec::new(), None));
        }
        self.advance();
        let mut args = Vec::new();
        if !self.at_punct(")") {
            loop {
                args.push(self.term()?);
                if self.at_punct(",") {
                    self.advance();
                } else if self.at_punct(";") {
                    return Self::unsupported("pool");
                } else {
                    break;
                }
            }
        }
        let close = self.expect_punct(")")?;
        Ok((args, Some(close.span)))
    }

    fn term(&mut self) -> PResult<Term> {
        let mut left = self.product()?;
        while let Some(t) =
            self.peek().filter(|t| t.kind == TokenKind::ArithmeticOperator && (t.text == "+" || t.text == "-"))
        {
            self.advance();
            let op = if t.text == "+" { ArithOp::Add } else { ArithOp::Sub };
            let right = self.product()?;
            let span = left.span().join(right.span());
            left = Term::Arith { op, left: Box::new(left), right: Box::new(right), span };
        }
        if self.at_punct("..") {
            return Self::unsupported("interval");
        }
        Ok(left)
    }

    fn product(&mut self) -> PResult<Term> {
        let mut left = self.unary()?;
        while let Some(t) =
            self.peek().filter(|t| t.kind == TokenKind::ArithmeticOperator && (t.text == "*" || t.text == "/"))
        {
            self.advance();
            let op = if t.text == "*" { ArithOp::Mul } else { ArithOp::Div };
            let right = self.unary()?;
            let span = left.span().join(right.span());
            left = Term::Arith { op, left: Box::new(left), right: Box::new(right), span };
        }
        Ok(left)
    }

    fn unary(&mut self) -> PResult<Term> {
        let Some(t) = self.peek() else { return self.fail(&["term"]) };
        if !t.is(TokenKind::ArithmeticOperator, "-") {
            return self.primary();
        }
        self.advance();
        if let Some(n) = self.peek().filter(|n| n.kind == TokenKind::Integer) {
            self.advance();
            let value = parse_int(&format!("-{}", n.text), n.span)?;
            return Ok(Term::Integer { value, span: t.span.join(n.span) });
        }
        let operand = self.unary()?;
        let span = t.span.join(operand.span());
        Ok(Term::Negate { operand: Box::new(operand), span })
    }

    fn primary(&mut self) -> PResult<Term> {
        let Some(t) = self.peek() else { return self.fail(&["term"]) };
        match t.kind {
            TokenKind::Integer => {
                self.advance();
                Ok(Term::Integer { value: parse_int(&t.text, t.span)?, span: t.span })
            }
            TokenKind::Variable => {
                self.advance();
                if t.text == "_" {
                    Ok(Term::Anonymous { span: t.span })
                } else {
                    Ok(Term::Variable { name: t.text.clone(), span: t.span })
                }
            }
            TokenKind::Identifier if t.text != "not" => {
                self.advance();
                let (args, end) = self.opt_args()?;
                match end {
                    None => Ok(Term::Constant { name: t.text.clone(), span: t.span }),
                    Some(end) => Ok(Term::Function { name: t.text.clone(), args, span: t.span.join(end) }),
                }
            }
            TokenKind::Punctuation if t.text == "(" => {
                self.advance();
                let inner = self.term()?;
                if self.at_punct(";") {
                    return Self::unsupported("pool");
                }
                if self.at_punct(",") {
                    return Self::unsupported("tuple");
                }
                self.expect_punct(")")?;
                Ok(inner)
            }
            TokenKind::Punctuation if t.text == "|" => Self::unsupported("absolute value"),
            TokenKind::Directive if t.text == "#sup" || t.text == "#inf" => Self::unsupported("supremum/infimum"),
            TokenKind::Directive => Self::unsupported("aggregate"),
            _ => self.fail(&["term"]),
        }
    }
}

enum AtomOrCmp {
    Atom(Atom),
    Cmp(Term, CmpOp, Term),
}

fn parse_int(text: &str, span: Span) -> PResult<i64> {
    text.parse::<i64>().map_err(|_| Failure::Syntax {
        span,
        expected: vec!["64-bit integer".into()],
        found: text.to_string(),
    })
}

fn contains_function(t: &Term) -> bool {
    match t {
        Term::Function { .. } => true,
        Term::Negate { operand, .. } => contains_function(operand),
        Term::Arith { left, right, .. } => contains_function(left) || contains_function(right),
        _ => false,
    }
}

/// Evaluates a ground integer expression.
fn eval_ground_int(t: &Term) -> Option<i64> {
    match t {
        Term::Integer { value, .. } => Some(*value),
        Term::Negate { operand, .. } => eval_ground_int(operand)?.checked_neg(),
        Term::Arith { op, left, right, .. } => op.apply(eval_ground_int(left)?, eval_ground_int(right)?),
        _ => None,
    }
}
