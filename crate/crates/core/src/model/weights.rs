//! Joining `#const <id>_weight = <n>.` declarations onto soft constraints.

use std::collections::{BTreeMap, BTreeSet};

use crate::parser::{Program, Span, Statement};

use super::{ConstraintKind, ConstraintSet, ModelDiagnostic};

pub const WEIGHT_SUFFIX: &str = "_weight";

/// Attaches weights from `weights_program` to soft constraints by id. Every
/// mismatch in either direction is reported as a diagnostic.
pub fn extract_weights(weights_program: &Program, mut set: ConstraintSet) -> ConstraintSet {
    let soft_ids: BTreeSet<String> = set.of_kind(ConstraintKind::Soft).map(|c| c.id.clone()).collect();
    let mut weights: BTreeMap<String, u32> = BTreeMap::new();

    for stmt in &weights_program.statements {
        let Statement::ConstDecl { name, value, span } = stmt else { continue };
        let Some(id) = name.strip_suffix(WEIGHT_SUFFIX).filter(|id| soft_ids.contains(*id)) else {
            set.diagnostics.push(ModelDiagnostic::UnmatchedWeight { name: name.clone(), span: *span });
            continue;
        };
        if weights.contains_key(id) {
            set.diagnostics.push(ModelDiagnostic::DuplicateWeight { name: name.clone(), span: *span });
            continue;
        }
        let Ok(w) = u32::try_from(*value) else {
            set.diagnostics.push(ModelDiagnostic::NegativeWeight { name: name.clone(), value: *value, span: *span });
            continue;
        };
        weights.insert(id.to_string(), w);
    }

    for c in set.constraints.iter_mut().filter(|c| c.kind == ConstraintKind::Soft) {
        c.weight = weights.get(&c.id).copied();
    }
    for id in soft_ids.iter().filter(|id| !weights.contains_key(*id)) {
        set.diagnostics.push(ModelDiagnostic::MissingWeight { id: id.clone() });
    }
    set
}

/// Line-oriented fallback for weight files the parser rejects: picks up
/// every `#const <name>_weight = <int>.` it can find and ignores the rest.
pub fn scan_weight_declarations(text: &str, source_name: &str) -> Program {
    let mut program = Program::new(source_name);
    let mut offset = 0;
    for (lineno, line) in text.split_inclusive('\n').enumerate() {
        if let Some((name, value, col)) = scan_line(line) {
            let start = offset + col;
            program.statements.push(Statement::ConstDecl {
                name,
                value,
                span: Span { start, end: offset + line.trim_end().len(), line: lineno as u32 + 1, col: col as u32 + 1 },
            });
        }
        offset += line.len();
    }
    program
}

fn scan_line(line: &str) -> Option<(String, i64, usize)> {
    let col = line.find("#const")?;
    let rest = line[col + "#const".len()..].trim_start();
    let name_len = rest.find(|c: char| !(c.is_ascii_alphanumeric() || c == '_')).unwrap_or(rest.len());
    let name = &rest[..name_len];
    if !name.ends_with(WEIGHT_SUFFIX) || !name.starts_with(|c: char| c.is_ascii_lowercase()) {
        return None;
    }
    let rest = rest[name_len..].trim_start().strip_prefix('=')?.trim_start();
    let digits_len = rest
        .char_indices()
        .find(|&(i, c)| !(c.is_ascii_digit() || (i == 0 && c == '-')))
        .map_or(rest.len(), |(i, _)| i);
    let value = rest[..digits_len].parse().ok()?;
    rest[digits_len..].trim_start().starts_with('.').then(|| (name.to_string(), value, col))
}
