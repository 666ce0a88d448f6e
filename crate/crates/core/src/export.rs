//! Versioned JSON documents. Everything the CLI writes or the service
//! returns goes through here, so both produce identical bytes.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::eval::ViolationReport;
use crate::features::{FeatureIncidence, FeatureKinds};
use crate::hypergraph::{build_hypergraph, Hypergraph};
use crate::layout::{compute_layout, LayoutConfig, LayoutError, LayoutModel};
use crate::model::{ConstraintKind, ConstraintSet};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub soft: usize,
    pub hard: usize,
    /// Distinct features over all constraints and both feature kinds.
    pub features: usize,
}

impl Counts {
    pub fn of(set: &ConstraintSet, incidences: &[FeatureIncidence]) -> Counts {
        let features: BTreeSet<_> = incidences.iter().map(|i| &i.feature).collect();
        Counts {
            soft: set.count(ConstraintKind::Soft),
            hard: set.count(ConstraintKind::Hard),
            features: features.len(),
        }
    }

    pub fn summary_line(&self) -> String {
        format!("soft={} hard={} features={}", self.soft, self.hard, self.features)
    }
}

/// The extracted knowledge base: constraints, weights, hierarchy and
/// feature incidences, plus digests of the inputs it was built from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub schema_version: u32,
    /// Input name to content digest.
    pub inputs: BTreeMap<String, String>,
    pub counts: Counts,
    #[serde(flatten)]
    pub set: ConstraintSet,
    pub incidences: Vec<FeatureIncidence>,
}

impl ModelDocument {
    pub fn new(
        set: ConstraintSet,
        incidences: Vec<FeatureIncidence>,
        inputs: BTreeMap<String, String>,
    ) -> ModelDocument {
        ModelDocument { schema_version: SCHEMA_VERSION, inputs, counts: Counts::of(&set, &incidences), set, incidences }
    }

    pub fn hypergraph(&self, kind: ConstraintKind, kinds: FeatureKinds, min_degree: usize) -> Hypergraph {
        build_hypergraph(&self.set, &self.incidences, kind, kinds, min_degree)
    }

    /// Layout of one view. A view without constraints gives an empty model
    /// rather than an error, so empty knowledge bases still export.
    pub fn layout(
        &self,
        kind: ConstraintKind,
        kinds: FeatureKinds,
        min_degree: usize,
        config: &LayoutConfig,
    ) -> Result<LayoutModel, LayoutError> {
        let graph = self.hypergraph(kind, kinds, min_degree);
        match compute_layout(&graph, self.set.hierarchy.roots(kind), config) {
            Err(LayoutError::EmptyGraph) => Ok(LayoutModel::empty(kind, config.clone())),
            other => other,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Versioned<T> {
    pub schema_version: u32,
    #[serde(flatten)]
    pub body: T,
}

impl<T> Versioned<T> {
    pub fn new(body: T) -> Versioned<T> {
        Versioned { schema_version: SCHEMA_VERSION, body }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportList {
    /// In rank order.
    pub reports: Vec<ViolationReport>,
}

pub type HypergraphDocument = Versioned<Hypergraph>;
pub type LayoutDocument = Versioned<LayoutModel>;
pub type ReportsDocument = Versioned<ReportList>;
pub type ReportDocument = Versioned<ViolationReport>;

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents always serialize");
    s.push('\n');
    s
}
