//! Scoring candidate specifications (ground fact sets) against the
//! constraints of a knowledge base.

mod engine;
mod facts;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Constraint, ConstraintKind, ConstraintRef, ConstraintSet};
use crate::parser::{ParseDiagnostic, Span};

pub use engine::{body_integers, Plan, PreparedFacts};
pub use facts::{FactSet, GroundAtom, Value};

#[derive(Clone, Debug, Error, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EvalError {
    #[error("{spec}: fact file does not parse cleanly ({} diagnostics)", diagnostics.len())]
    InvalidFacts { spec: String, diagnostics: Vec<ParseDiagnostic> },
    #[error("{spec}:{}:{}: fact is not ground: {text}", span.line, span.col)]
    NonGroundFact { spec: String, span: Span, text: String },
    #[error("{spec}:{}:{}: only facts are allowed in a specification", span.line, span.col)]
    NotAFact { spec: String, span: Span },
    #[error("{constraint}: body contains an unsupported construct ({construct})")]
    UnsupportedBody { constraint: ConstraintRef, construct: String },
    #[error("unknown constraint {0}")]
    UnknownConstraint(ConstraintRef),
    #[error("unknown specification {0:?}")]
    UnknownSpec(String),
    #[error("at least two specifications are required")]
    TooFewSpecs,
    #[error("duplicate specification name {0:?}")]
    DuplicateSpec(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalConfig {
    /// Witness substitutions kept per constraint; counts are always exact.
    pub max_witnesses: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { max_witnesses: 32 }
    }
}

/// Variable name to value, for the named variables of a body.
pub type Witness = BTreeMap<String, Value>;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evaluation {
    pub count: u64,
    /// The first `max_witnesses` substitutions in value order.
    pub witnesses: Vec<Witness>,
}

pub fn evaluate_constraint(constraint: &Constraint, facts: &FactSet) -> Result<Evaluation, EvalError> {
    evaluate_prepared(constraint, &PreparedFacts::new(facts), &EvalConfig::default())
}

pub fn evaluate_prepared(
    constraint: &Constraint,
    facts: &PreparedFacts,
    config: &EvalConfig,
) -> Result<Evaluation, EvalError> {
    if let Some(construct) = &constraint.unsupported {
        return Err(EvalError::UnsupportedBody { constraint: constraint.reference(), construct: construct.clone() });
    }
    let plan = Plan::new(&constraint.body, facts);
    let names: Vec<String> = plan.variables().map(str::to_string).collect();
    let solutions = plan.solutions(facts);
    let witnesses = solutions
        .iter()
        .take(config.max_witnesses)
        .map(|row| names.iter().cloned().zip(row.iter().cloned()).collect())
        .collect();
    Ok(Evaluation { count: solutions.len() as u64, witnesses })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    #[serde(rename = "ref")]
    pub reference: ConstraintRef,
    pub count: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<u32>,
    pub witnesses: Vec<Witness>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EvalDiagnostic {
    /// Evaluated as zero violations.
    UnsupportedBody { constraint: ConstraintRef, construct: String },
    /// Violated soft constraint without a weight; contributes 0 to the cost.
    MissingWeight { constraint: ConstraintRef, count: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub spec_name: String,
    /// Set when any hard constraint is violated.
    pub ill_formed: bool,
    pub cost: u64,
    /// Soft constraints with a non-zero count, in knowledge-base order.
    pub violations: Vec<Violation>,
    /// Hard constraints with a non-zero count, in knowledge-base order.
    pub hard_violations: Vec<Violation>,
    pub diagnostics: Vec<EvalDiagnostic>,
}

impl ViolationReport {
    /// Both kinds.
    pub fn all_violations(&self) -> impl Iterator<Item = &Violation> {
        self.hard_violations.iter().chain(&self.violations)
    }

    pub fn count_of(&self, r: &ConstraintRef) -> u64 {
        self.all_violations().find(|v| &v.reference == r).map_or(0, |v| v.count)
    }
}

pub fn evaluate_spec(set: &ConstraintSet, facts: &FactSet) -> ViolationReport {
    evaluate_spec_with(set, facts, &EvalConfig::default())
}

pub fn evaluate_spec_with(set: &ConstraintSet, facts: &FactSet, config: &EvalConfig) -> ViolationReport {
    let prepared = PreparedFacts::new(facts);
    let mut report = ViolationReport {
        spec_name: facts.name.clone(),
        ill_formed: false,
        cost: 0,
        violations: Vec::new(),
        hard_violations: Vec::new(),
        diagnostics: Vec::new(),
    };
    for c in &set.constraints {
        let eval = match evaluate_prepared(c, &prepared, config) {
            Ok(e) => e,
            Err(EvalError::UnsupportedBody { constraint, construct }) => {
                report.diagnostics.push(EvalDiagnostic::UnsupportedBody { constraint, construct });
                continue;
            }
            Err(other) => unreachable!("{other}"),
        };
        if eval.count == 0 {
            continue;
        }
        let v = Violation { reference: c.reference(), count: eval.count, weight: c.weight, witnesses: eval.witnesses };
        match c.kind {
            ConstraintKind::Hard => report.hard_violations.push(v),
            ConstraintKind::Soft => {
                match c.weight {
                    Some(w) => report.cost = report.cost.saturating_add((w as u64).saturating_mul(v.count)),
                    None => report
                        .diagnostics
                        .push(EvalDiagnostic::MissingWeight { constraint: v.reference.clone(), count: v.count }),
                }
                report.violations.push(v);
            }
        }
    }
    report.ill_formed = !report.hard_violations.is_empty();
    report
}

/// Evaluates every spec and returns the reports in rank order.
pub fn evaluate_batch(
    set: &ConstraintSet,
    specs: &[FactSet],
    config: &EvalConfig,
) -> Result<Vec<ViolationReport>, EvalError> {
    let mut names = BTreeSet::new();
    for s in specs {
        if !names.insert(s.name.as_str()) {
            return Err(EvalError::DuplicateSpec(s.name.clone()));
        }
    }
    Ok(rank_specs(specs.iter().map(|s| evaluate_spec_with(set, s, config)).collect()))
}

fn rank_cmp(a: &ViolationReport, b: &ViolationReport) -> Ordering {
    (a.ill_formed, a.cost, &a.spec_name)
        .cmp(&(b.ill_formed, b.cost, &b.spec_name))
        // only reachable with duplicate names; keeps the order total
        .then_with(|| serde_json::to_string(a).ok().cmp(&serde_json::to_string(b).ok()))
}

/// Cost ascending, ties by name; ill-formed specs after all others.
pub fn rank_specs(mut reports: Vec<ViolationReport>) -> Vec<ViolationReport> {
    reports.sort_by(rank_cmp);
    reports
}

/// Specs violating `r`, by count descending then name.
pub fn violations_of_constraint(
    set: &ConstraintSet,
    reports: &[ViolationReport],
    r: &ConstraintRef,
) -> Result<Vec<(String, u64)>, EvalError> {
    if set.get(r).is_none() {
        return Err(EvalError::UnknownConstraint(r.clone()));
    }
    let mut out: Vec<(String, u64)> = reports
        .iter()
        .filter_map(|rep| {
            let n = rep.count_of(r);
            (n > 0).then(|| (rep.spec_name.clone(), n))
        })
        .collect();
    out.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(out)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SharedViolations {
    /// Constraints violated by every named spec.
    pub common: Vec<ConstraintRef>,
    /// Per spec, constraints it violates beyond `common`.
    pub exclusive: BTreeMap<String, Vec<ConstraintRef>>,
}

pub fn shared_violations(reports: &[ViolationReport], names: &[&str]) -> Result<SharedViolations, EvalError> {
    let distinct: BTreeSet<&str> = names.iter().copied().collect();
    if distinct.len() < 2 {
        return Err(EvalError::TooFewSpecs);
    }
    let mut sets: BTreeMap<String, BTreeSet<ConstraintRef>> = BTreeMap::new();
    for name in distinct {
        let rep =
            reports.iter().find(|r| r.spec_name == name).ok_or_else(|| EvalError::UnknownSpec(name.to_string()))?;
        sets.insert(name.to_string(), rep.all_violations().map(|v| v.reference.clone()).collect());
    }
    let mut iter = sets.values();
    let first = iter.next().cloned().unwrap_or_default();
    let common: BTreeSet<ConstraintRef> = iter.fold(first, |acc, s| acc.intersection(s).cloned().collect());
    let exclusive = sets.into_iter().map(|(name, s)| (name, s.difference(&common).cloned().collect())).collect();
    Ok(SharedViolations { common: common.into_iter().collect(), exclusive })
}
