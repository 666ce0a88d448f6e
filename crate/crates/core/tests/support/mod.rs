#![allow(dead_code)]

pub mod gen;
pub mod layout_check;
pub mod oracle;

use std::path::PathBuf;

use aspkb_core::model::{extract_constraints, extract_weights, ConstraintSet};
use aspkb_core::parser::parse_program;

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(rel)
}

pub fn read_fixture(rel: &str) -> String {
    std::fs::read_to_string(fixture(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

pub fn load_set(kb: &str, weights: &str) -> ConstraintSet {
    let set = extract_constraints(&parse_program(kb, "kb.lp"));
    extract_weights(&parse_program(weights, "weights.lp").program, set)
}

/// Rule heads counted by line scanning, independent of the parser: a line
/// whose first non-blank text is `hard(` or `soft(` starts one rule.
pub fn grep_count(text: &str) -> (usize, usize) {
    let (mut soft, mut hard) = (0, 0);
    for line in text.lines() {
        let code = line.split('%').next().unwrap_or("").trim_start();
        if code.starts_with("soft(") {
            soft += 1;
        } else if code.starts_with("hard(") {
            hard += 1;
        }
    }
    (soft, hard)
}
