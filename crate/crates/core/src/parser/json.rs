//! AST JSON document:
//!
//! ```text
//! {"source": "<name>", "statements": [ {"kind": "fact"|"rule"|"const"|"comment", "span": {...}, ...} ]}
//! ```
//!
//! Field order is fixed by the type definitions, so output is byte-stable.

use serde::{Deserialize, Serialize};

use super::ast::{Program, Statement};

#[derive(Serialize, Deserialize)]
struct AstDocument {
    source: String,
    statements: Vec<Statement>,
}

pub fn ast_to_json(program: &Program) -> String {
    let doc = AstDocument { source: program.source_name.clone(), statements: program.statements.clone() };
    serde_json::to_string(&doc).expect("AST serialization is infallible")
}

pub fn ast_from_json(json: &str) -> serde_json::Result<Program> {
    let doc: AstDocument = serde_json::from_str(json)?;
    Ok(Program { source_name: doc.source, statements: doc.statements })
}
