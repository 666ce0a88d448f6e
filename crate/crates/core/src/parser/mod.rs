//! Parser for the ASP subset used by rule-based visualization knowledge
//! bases: facts, normal rules, integrity constraints, `#const` declarations
//! and `%` line comments.

pub mod ast;
mod json;
pub mod lexer;
mod parse;

pub use ast::*;
pub use json::{ast_from_json, ast_to_json};
pub use lexer::{tokenize, LexError, Token, TokenKind};
pub use parse::{parse_program, ParseDiagnostic, ParseOutput, PartialRule};
