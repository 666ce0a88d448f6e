//! Identifier hierarchy: a prefix tree over `_`-separated constraint ids.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Constraint, ConstraintKind, ConstraintRef, ConstraintSet};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HierarchyMode {
    /// Single-child chains without terminating constraints merge into one segment.
    #[default]
    Collapsed,
    PrefixTree,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HierarchyNode {
    pub segment: String,
    /// Lexicographic by segment.
    pub children: Vec<HierarchyNode>,
    /// Constraints whose id ends at this node, in source order. Interior
    /// nodes may carry ids too (`bin` next to `bin_high`).
    pub constraint_ids: Vec<ConstraintRef>,
    /// Root children have depth 0.
    pub depth: u32,
}

impl HierarchyNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Pre-order walk yielding each node with its path of segments.
    pub fn walk<'a>(&'a self, path: &mut Vec<&'a str>, f: &mut impl FnMut(&'a HierarchyNode, &[&'a str])) {
        path.push(&self.segment);
        f(self, path);
        for c in &self.children {
            c.walk(path, f);
        }
        path.pop();
    }

    /// All constraints at or below this node, depth-first with own ids first.
    pub fn descendant_constraints(&self) -> Vec<&ConstraintRef> {
        let mut out = Vec::new();
        self.walk(&mut Vec::new(), &mut |n, _| out.extend(n.constraint_ids.iter()));
        out
    }

    pub fn max_depth(&self) -> u32 {
        self.children.iter().map(HierarchyNode::max_depth).max().unwrap_or(self.depth)
    }
}

/// One tree per constraint kind; kinds never share nodes.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hierarchy {
    pub hard: Vec<HierarchyNode>,
    pub soft: Vec<HierarchyNode>,
}

impl Hierarchy {
    pub fn roots(&self, kind: ConstraintKind) -> &[HierarchyNode] {
        match kind {
            ConstraintKind::Hard => &self.hard,
            ConstraintKind::Soft => &self.soft,
        }
    }

    /// Finds the node at `path`, each element being one (possibly collapsed) segment.
    pub fn find(&self, kind: ConstraintKind, path: &[&str]) -> Option<&HierarchyNode> {
        let (first, rest) = path.split_first()?;
        let mut node = self.roots(kind).iter().find(|n| n.segment == *first)?;
        for seg in rest {
            node = node.children.iter().find(|n| n.segment == *seg)?;
        }
        Some(node)
    }
}

#[derive(Default)]
struct Trie {
    children: BTreeMap<String, Trie>,
    ids: Vec<ConstraintRef>,
}

impl Trie {
    fn into_nodes(self, mode: HierarchyMode) -> Vec<HierarchyNode> {
        let mut nodes = self
            .children
            .into_iter()
            .map(|(segment, t)| {
                let ids = t.ids;
                let children = Trie { children: t.children, ids: Vec::new() }.into_nodes(mode);
                let mut node = HierarchyNode { segment, children, constraint_ids: ids, depth: 0 };
                if mode == HierarchyMode::Collapsed {
                    while node.constraint_ids.is_empty() && node.children.len() == 1 {
                        let child = node.children.pop().unwrap();
                        node.segment = format!("{}_{}", node.segment, child.segment);
                        node.children = child.children;
                        node.constraint_ids = child.constraint_ids;
                    }
                }
                node
            })
            .collect::<Vec<_>>();
        // collapsed segments can reorder siblings
        nodes.sort_by(|a, b| a.segment.cmp(&b.segment));
        nodes
    }
}

fn set_depths(nodes: &mut [HierarchyNode], depth: u32) {
    for n in nodes {
        n.depth = depth;
        set_depths(&mut n.children, depth + 1);
    }
}

/// Builds the tree for one set of constraints (normally all of one kind).
pub fn hierarchy_of<'a>(
    constraints: impl IntoIterator<Item = &'a Constraint>,
    mode: HierarchyMode,
) -> Vec<HierarchyNode> {
    let mut root = Trie::default();
    for c in constraints {
        let mut node = &mut root;
        for seg in c.id.split('_') {
            node = node.children.entry(seg.to_string()).or_default();
        }
        node.ids.push(c.reference());
    }
    let mut nodes = root.into_nodes(mode);
    set_depths(&mut nodes, 0);
    nodes
}

pub fn build_hierarchy(set: ConstraintSet) -> ConstraintSet {
    build_hierarchy_with(set, HierarchyMode::default())
}

/// Populates `set.hierarchy` and every constraint's `hierarchy_path`.
pub fn build_hierarchy_with(mut set: ConstraintSet, mode: HierarchyMode) -> ConstraintSet {
    let hard = hierarchy_of(set.of_kind(ConstraintKind::Hard), mode);
    let soft = hierarchy_of(set.of_kind(ConstraintKind::Soft), mode);

    let mut paths: BTreeMap<ConstraintRef, Vec<String>> = BTreeMap::new();
    for root in hard.iter().chain(&soft) {
        root.walk(&mut Vec::new(), &mut |node, path| {
            for r in &node.constraint_ids {
                paths.insert(r.clone(), path.iter().map(|s| s.to_string()).collect());
            }
        });
    }
    for c in &mut set.constraints {
        c.hierarchy_path = paths.remove(&c.reference()).unwrap_or_default();
    }
    set.hierarchy = Hierarchy { hard, soft };
    set
}
