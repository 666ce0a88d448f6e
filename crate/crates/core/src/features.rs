//! Shared syntax elements ("features") of constraint bodies: predicate
//! names with their arity, and variable names.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::model::{ConstraintRef, ConstraintSet};
use crate::parser::BodyLiteral;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Predicate,
    Variable,
}

/// Identity is the whole triple; variables carry no arity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Feature {
    pub kind: FeatureKind,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arity: Option<u32>,
}

impl Feature {
    pub fn predicate(name: &str, arity: u32) -> Feature {
        Feature { kind: FeatureKind::Predicate, name: name.into(), arity: Some(arity) }
    }

    pub fn variable(name: &str) -> Feature {
        Feature { kind: FeatureKind::Variable, name: name.into(), arity: None }
    }

    /// Display label: `bin/2` or `E`.
    pub fn label(&self) -> String {
        match self.arity {
            Some(a) => format!("{}/{a}", self.name),
            None => self.name.clone(),
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Which feature classes to extract.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeatureKinds {
    pub predicates: bool,
    pub variables: bool,
}

impl FeatureKinds {
    pub const ALL: FeatureKinds = FeatureKinds { predicates: true, variables: true };
    pub const PREDICATES: FeatureKinds = FeatureKinds { predicates: true, variables: false };
    pub const VARIABLES: FeatureKinds = FeatureKinds { predicates: false, variables: true };

    pub fn contains(self, kind: FeatureKind) -> bool {
        match kind {
            FeatureKind::Predicate => self.predicates,
            FeatureKind::Variable => self.variables,
        }
    }
}

impl Default for FeatureKinds {
    fn default() -> Self {
        FeatureKinds::ALL
    }
}

/// Canonical form `predicates,variables`, `predicates`, or `variables`.
impl fmt::Display for FeatureKinds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<&str> = [(self.predicates, "predicates"), (self.variables, "variables")]
            .into_iter()
            .filter_map(|(on, name)| on.then_some(name))
            .collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for FeatureKinds {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut kinds = FeatureKinds { predicates: false, variables: false };
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "predicates" | "predicate" => kinds.predicates = true,
                "variables" | "variable" => kinds.variables = true,
                other => return Err(format!("unknown feature kind {other:?} (expected predicates or variables)")),
            }
        }
        if !kinds.predicates && !kinds.variables {
            return Err("at least one feature kind is required".into());
        }
        Ok(kinds)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureIncidence {
    pub feature: Feature,
    pub constraint: ConstraintRef,
    /// Occurrences in the constraint body; the head is never counted.
    pub occurrence_count: u32,
}

/// Per-constraint feature counts, in constraint order then feature order.
pub fn extract_features(set: &ConstraintSet, kinds: FeatureKinds) -> Vec<FeatureIncidence> {
    let mut out = Vec::new();
    for c in &set.constraints {
        let mut counts: BTreeMap<Feature, u32> = BTreeMap::new();
        for lit in &c.body {
            if kinds.predicates {
                if let Some(atom) = lit.atom() {
                    *counts.entry(Feature::predicate(&atom.predicate, atom.arity() as u32)).or_default() += 1;
                }
            }
            if kinds.variables {
                count_variables(lit, &mut counts);
            }
        }
        out.extend(counts.into_iter().map(|(feature, occurrence_count)| FeatureIncidence {
            feature,
            constraint: c.reference(),
            occurrence_count,
        }));
    }
    out
}

fn count_variables(lit: &BodyLiteral, counts: &mut BTreeMap<Feature, u32>) {
    lit.for_each_variable(&mut |name| *counts.entry(Feature::variable(name)).or_default() += 1);
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SharedFeature {
    pub feature: Feature,
    /// Sorted, distinct.
    pub constraints: Vec<ConstraintRef>,
}

impl SharedFeature {
    pub fn degree(&self) -> usize {
        self.constraints.len()
    }
}

/// Groups incidences by feature and keeps features touching at least
/// `min_degree` distinct constraints. Sorted by feature.
pub fn shared_features(incidences: &[FeatureIncidence], min_degree: usize) -> Vec<SharedFeature> {
    let mut groups: BTreeMap<&Feature, Vec<ConstraintRef>> = BTreeMap::new();
    for inc in incidences {
        groups.entry(&inc.feature).or_default().push(inc.constraint.clone());
    }
    groups
        .into_iter()
        .filter_map(|(feature, mut constraints)| {
            constraints.sort();
            constraints.dedup();
            (constraints.len() >= min_degree.max(1)).then(|| SharedFeature { feature: feature.clone(), constraints })
        })
        .collect()
}
