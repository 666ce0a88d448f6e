//! Bipartite constraint/feature graph. Each shared feature becomes its own
//! node linked to every constraint that uses it, so n constraints sharing a
//! feature cost n edges instead of the n(n-1)/2 of a pairwise clique.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{shared_features, Feature, FeatureIncidence, FeatureKinds};
use crate::model::{ConstraintKind, ConstraintRef, ConstraintSet};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintNode {
    #[serde(rename = "ref")]
    pub reference: ConstraintRef,
    pub kind: ConstraintKind,
    pub id: String,
    pub weight: Option<u32>,
    pub hierarchy_path: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureNode {
    pub feature: Feature,
    pub label: String,
    pub degree: usize,
}

/// `[feature index, constraint index, occurrence count]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge(pub usize, pub usize, pub u32);

impl Edge {
    pub fn feature(&self) -> usize {
        self.0
    }

    pub fn constraint(&self) -> usize {
        self.1
    }

    pub fn count(&self) -> u32 {
        self.2
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypergraph {
    pub kind: ConstraintKind,
    pub feature_kinds: FeatureKinds,
    pub min_degree: usize,
    /// Every constraint of `kind`, in source order, featureless ones included.
    pub constraints: Vec<ConstraintNode>,
    /// Sorted by feature.
    pub features: Vec<FeatureNode>,
    /// Sorted by (feature, constraint).
    pub edges: Vec<Edge>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "type", content = "index", rename_all = "lowercase")]
pub enum NodeRef {
    Constraint(usize),
    Feature(usize),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HypergraphError {
    #[error("unknown node {0:?}")]
    UnknownNode(NodeRef),
}

pub fn build_hypergraph(
    set: &ConstraintSet,
    incidences: &[FeatureIncidence],
    kind: ConstraintKind,
    feature_kinds: FeatureKinds,
    min_degree: usize,
) -> Hypergraph {
    let constraints: Vec<ConstraintNode> = set
        .of_kind(kind)
        .map(|c| ConstraintNode {
            reference: c.reference(),
            kind: c.kind,
            id: c.id.clone(),
            weight: c.weight,
            hierarchy_path: c.hierarchy_path.clone(),
        })
        .collect();
    let index: BTreeMap<&ConstraintRef, usize> =
        constraints.iter().enumerate().map(|(i, c)| (&c.reference, i)).collect();

    let filtered: Vec<FeatureIncidence> = incidences
        .iter()
        .filter(|inc| inc.constraint.kind == kind && feature_kinds.contains(inc.feature.kind))
        .filter(|inc| index.contains_key(&inc.constraint))
        .cloned()
        .collect();
    let counts: BTreeMap<(&Feature, &ConstraintRef), u32> =
        filtered.iter().map(|i| ((&i.feature, &i.constraint), i.occurrence_count)).collect();

    let shared = shared_features(&filtered, min_degree);
    let mut features = Vec::with_capacity(shared.len());
    let mut edges = Vec::new();
    for (fi, sf) in shared.iter().enumerate() {
        for r in &sf.constraints {
            edges.push(Edge(fi, index[r], counts[&(&sf.feature, r)]));
        }
        features.push(FeatureNode { label: sf.feature.label(), feature: sf.feature.clone(), degree: sf.degree() });
    }
    edges.sort();

    Hypergraph { kind, feature_kinds, min_degree, constraints, features, edges }
}

impl Hypergraph {
    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn constraint_index(&self, r: &ConstraintRef) -> Option<usize> {
        self.constraints.iter().position(|c| &c.reference == r)
    }

    /// Adjacent nodes, sorted.
    pub fn neighborhood(&self, node: NodeRef) -> Result<Vec<NodeRef>, HypergraphError> {
        let mut out: Vec<NodeRef> = match node {
            NodeRef::Constraint(i) if i < self.constraints.len() => {
                self.edges.iter().filter(|e| e.constraint() == i).map(|e| NodeRef::Feature(e.feature())).collect()
            }
            NodeRef::Feature(i) if i < self.features.len() => {
                self.edges.iter().filter(|e| e.feature() == i).map(|e| NodeRef::Constraint(e.constraint())).collect()
            }
            _ => return Err(HypergraphError::UnknownNode(node)),
        };
        out.sort();
        out.dedup();
        Ok(out)
    }

    /// Unordered constraint index pairs that share at least one feature.
    pub fn shared_pairs(&self) -> BTreeSet<(usize, usize)> {
        let mut by_feature: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for e in &self.edges {
            by_feature.entry(e.feature()).or_default().push(e.constraint());
        }
        let mut pairs = BTreeSet::new();
        for members in by_feature.values() {
            for (i, &a) in members.iter().enumerate() {
                for &b in &members[i + 1..] {
                    pairs.insert((a.min(b), a.max(b)));
                }
            }
        }
        pairs
    }

    /// Edges a clique-per-feature encoding would need (one per shared pair).
    pub fn pairwise_edge_count(&self) -> usize {
        self.shared_pairs().len()
    }
}
