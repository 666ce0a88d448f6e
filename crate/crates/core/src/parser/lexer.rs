//! Tokenizer for the supported ASP subset.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ast::Span;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenKind {
    /// Lowercase-initial name (predicates, constants, `not`).
    Identifier,
    /// Uppercase- or underscore-initial name, including the anonymous `_`.
    Variable,
    Integer,
    Punctuation,
    ComparisonOperator,
    ArithmeticOperator,
    Comment,
    /// `#`-prefixed keyword such as `#const` or `#show`.
    Directive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub span: Span,
}

impl Token {
    pub fn is(&self, kind: TokenKind, text: &str) -> bool {
        self.kind == kind && self.text == text
    }

    pub fn is_punct(&self, text: &str) -> bool {
        self.is(TokenKind::Punctuation, text)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("{line}:{col}: {message}", line = span.line, col = span.col)]
pub struct LexError {
    pub span: Span,
    pub message: String,
}

const PUNCTUATION: &[&str] = &[":-", ":~", "..", "(", ")", "{", "}", "[", "]", ",", ".", ";", ":", "|"];
const COMPARISONS: &[&str] = &["==", "!=", "<>", "<=", ">=", "=", "<", ">"];
const ARITHMETIC: &[&str] = &["+", "-", "*", "/"];

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: u32,
    col: u32,
}

impl<'a> Cursor<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn bump_while(&mut self, pred: impl Fn(char) -> bool) {
        while self.peek().is_some_and(&pred) {
            self.bump();
        }
    }

    fn mark(&self) -> (usize, u32, u32) {
        (self.pos, self.line, self.col)
    }

    fn span_from(&self, (start, line, col): (usize, u32, u32)) -> Span {
        Span { start, end: self.pos, line, col }
    }
}

fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Splits `source` into tokens, comments included. Whitespace is the only
/// input that does not end up in some token's text.
pub fn tokenize(source: &str) -> Result<Vec<Token>, LexError> {
    let mut tokens = Vec::new();
    let mut cur = Cursor { src: source, pos: 0, line: 1, col: 1 };

    while let Some(c) = cur.peek() {
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        let start = cur.mark();
        let kind = match c {
            '%' => {
                cur.bump_while(|c| c != '\n');
                TokenKind::Comment
            }
            '#' => {
                cur.bump();
                if !cur.peek().is_some_and(|c| c.is_ascii_alphabetic()) {
                    return Err(LexError {
                        span: cur.span_from(start),
                        message: "expected a directive name after '#'".into(),
                    });
                }
                cur.bump_while(is_name_char);
                TokenKind::Directive
            }
            'a'..='z' => {
                cur.bump_while(is_name_char);
                TokenKind::Identifier
            }
            'A'..='Z' | '_' => {
                cur.bump_while(is_name_char);
                TokenKind::Variable
            }
            '0'..='9' => {
                cur.bump_while(|c| c.is_ascii_digit());
                TokenKind::Integer
            }
            _ => {
                let rest = cur.rest();
                let table = [
                    (PUNCTUATION, TokenKind::Punctuation),
                    (COMPARISONS, TokenKind::ComparisonOperator),
                    (ARITHMETIC, TokenKind::ArithmeticOperator),
                ];
                // Longest match across all operator tables.
                let best = table
                    .iter()
                    .flat_map(|(ops, kind)| ops.iter().map(move |op| (*op, *kind)))
                    .filter(|(op, _)| rest.starts_with(op))
                    .max_by_key(|(op, _)| op.len());
                match best {
                    Some((op, kind)) => {
                        for _ in 0..op.len() {
                            cur.bump();
                        }
                        kind
                    }
                    None => {
                        cur.bump();
                        return Err(LexError {
                            span: cur.span_from(start),
                            message: format!("unexpected character {c:?}"),
                        });
                    }
                }
            }
        };
        let span = cur.span_from(start);
        tokens.push(Token { kind, text: source[span.start..span.end].to_string(), span });
    }
    Ok(tokens)
}

/// Like [`tokenize`] but skips offending characters, collecting every error.
pub(crate) fn tokenize_recovering(source: &str) -> (Vec<Token>, Vec<LexError>) {
    let mut tokens = Vec::new();
    let mut errors = Vec::new();
    let mut offset = 0;
    let mut line = 1;
    let mut col = 1;
    loop {
        match tokenize(&source[offset..]) {
            Ok(rest) => {
                tokens.extend(rest.into_iter().map(|t| shift(t, offset, line, col)));
                return (tokens, errors);
            }
            Err(err) => {
                // Re-lex the prefix that succeeded, then resume after the bad character.
                let bad = shift_span(err.span, offset, line, col);
                let prefix = &source[offset..bad.start];
                if let Ok(ok) = tokenize(prefix) {
                    tokens.extend(ok.into_iter().map(|t| shift(t, offset, line, col)));
                }
                errors.push(LexError { span: bad, message: err.message });
                offset = bad.end;
                line = bad.line;
                col = bad.col + source[bad.start..bad.end].chars().count() as u32;
            }
        }
    }
}

fn shift_span(span: Span, offset: usize, line: u32, col: u32) -> Span {
    Span {
        start: span.start + offset,
        end: span.end + offset,
        line: span.line + line - 1,
        col: if span.line == 1 { span.col + col - 1 } else { span.col },
    }
}

fn shift(mut token: Token, offset: usize, line: u32, col: u32) -> Token {
    token.span = shift_span(token.span, offset, line, col);
    token
}
