//! Radial layout of a hypergraph.
//!
//! Constraints sit evenly spaced on a ring of radius `radius`, ordered by a
//! depth-first walk of the identifier hierarchy so every subtree is one
//! contiguous angular interval. Hierarchy arcs fill the annulus `arc_band`
//! inside the ring, roots innermost. Feature nodes go to the centroid of
//! their constraints, pulled in to `max_feature_radius` when further out.

mod color;
mod svg;

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hypergraph::Hypergraph;
use crate::model::{ConstraintKind, ConstraintRef, HierarchyNode};

pub use color::{Colormap, Rgb};
pub use svg::{render_svg, SvgOptions};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CentroidWeighting {
    /// Plain mean of adjacent constraint positions.
    #[default]
    Uniform,
    /// Mean weighted by each edge's occurrence count.
    OccurrenceCount,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayoutConfig {
    pub radius: f64,
    pub max_feature_radius: f64,
    /// (inner, outer) radii of the hierarchy annulus.
    pub arc_band: (f64, f64),
    /// Angular padding between sibling arcs, radians.
    pub arc_gap: f64,
    pub colormap: Colormap,
    pub hard_color: Rgb,
    pub start_angle: f64,
    pub centroid: CentroidWeighting,
    /// Radius of the weight badge drawn for each constraint.
    pub node_radius: f64,
    /// Distance between a badge and the start of its label.
    pub label_gap: f64,
    /// Estimated glyph advance used to fit arc labels.
    pub char_width: f64,
    /// Feature labels are hidden below this degree.
    pub feature_label_min_degree: usize,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        LayoutConfig::with_radius(400.0)
    }
}

impl LayoutConfig {
    pub fn with_radius(radius: f64) -> LayoutConfig {
        LayoutConfig {
            radius,
            max_feature_radius: 0.72 * radius,
            arc_band: (0.78 * radius, 0.97 * radius),
            arc_gap: 0.004,
            colormap: Colormap::default(),
            hard_color: Rgb([0x8c, 0x8c, 0x8c]),
            start_angle: -FRAC_PI_2,
            centroid: CentroidWeighting::Uniform,
            node_radius: 9.0,
            label_gap: 6.0,
            char_width: 6.5,
            feature_label_min_degree: 0,
        }
    }

    pub fn validate(&self) -> Result<(), LayoutError> {
        let (inner, outer) = self.arc_band;
        let ok = self.max_feature_radius > 0.0
            && self.max_feature_radius < inner
            && inner < outer
            && outer <= self.radius
            && self.arc_gap >= 0.0
            && self.colormap.domain.0 < self.colormap.domain.1
            && [self.radius, self.start_angle, self.node_radius, self.label_gap, self.char_width]
                .iter()
                .all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(LayoutError::InvalidConfig(
                "need 0 < max_feature_radius < arc_band.0 < arc_band.1 <= radius, arc_gap >= 0, and a non-empty weight domain"
                    .into(),
            ))
        }
    }

    /// Weight color; `None` (hard constraints) maps to `hard_color`.
    pub fn weight_color(&self, weight: Option<u32>) -> (Rgb, Option<LayoutDiagnostic>) {
        match weight {
            None => (self.hard_color, None),
            Some(w) => {
                let diag = (!self.colormap.contains(w))
                    .then_some(LayoutDiagnostic::WeightOutOfDomain { weight: w, domain: self.colormap.domain });
                (self.colormap.color(w as f64), diag)
            }
        }
    }
}

/// Standalone form of [`LayoutConfig::weight_color`].
pub fn weight_color(weight: Option<u32>, config: &LayoutConfig) -> (Rgb, Option<LayoutDiagnostic>) {
    config.weight_color(weight)
}

#[derive(Clone, Debug, PartialEq, Eq, Error, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayoutDiagnostic {
    #[error("weight {weight} outside colormap domain {domain:?}; clamped")]
    WeightOutOfDomain { weight: u32, domain: (u32, u32) },
}

#[derive(Debug, Error, PartialEq)]
pub enum LayoutError {
    #[error("cannot lay out an empty graph")]
    EmptyGraph,
    #[error("invalid layout configuration: {0}")]
    InvalidConfig(String),
}

pub type Point = (f64, f64);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintPlacement {
    #[serde(rename = "ref")]
    pub reference: ConstraintRef,
    /// Index into the hypergraph's constraint list.
    pub node: usize,
    pub label: String,
    /// Unnormalized: `start_angle + 2*pi*i/N`.
    pub angle: f64,
    pub position: Point,
    pub weight: Option<u32>,
    pub color: Rgb,
    pub label_rotation: f64,
    pub label_mirrored: bool,
    pub label_anchor: Point,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcPlacement {
    pub path: Vec<String>,
    pub depth: u32,
    pub start_angle: f64,
    pub end_angle: f64,
    pub inner_radius: f64,
    pub outer_radius: f64,
    /// Placement indices covered by this arc (first, last), inclusive.
    pub span: (usize, usize),
    pub mean_weight: Option<f64>,
    pub color: Rgb,
    /// Segment text, shortened with an ellipsis when it does not fit.
    pub label: String,
    pub label_position: Point,
    pub label_rotation: f64,
}

impl ArcPlacement {
    pub fn segment(&self) -> &str {
        self.path.last().map_or("", String::as_str)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeaturePlacement {
    /// Index into the hypergraph's feature list.
    pub node: usize,
    pub label: String,
    pub degree: usize,
    pub position: Point,
    pub clamped: bool,
    pub show_label: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgePath {
    pub feature: usize,
    pub constraint: usize,
    pub count: u32,
    pub from: Point,
    pub to: Point,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayoutModel {
    pub kind: ConstraintKind,
    pub config: LayoutConfig,
    /// In ring order.
    pub constraints: Vec<ConstraintPlacement>,
    /// Pre-order over the hierarchy.
    pub arcs: Vec<ArcPlacement>,
    pub features: Vec<FeaturePlacement>,
    pub edges: Vec<EdgePath>,
    pub diagnostics: Vec<LayoutDiagnostic>,
}

impl LayoutModel {
    pub fn empty(kind: ConstraintKind, config: LayoutConfig) -> LayoutModel {
        LayoutModel {
            kind,
            config,
            constraints: Vec::new(),
            arcs: Vec::new(),
            features: Vec::new(),
            edges: Vec::new(),
            diagnostics: Vec::new(),
        }
    }
}

/// Maps any angle into `[0, 2*pi)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// Radial label orientation at `theta`. Labels on the left half of the
/// circle, strictly between 90 and 270 degrees, are flipped by pi so they
/// read left to right.
pub fn label_transform(theta: f64) -> (f64, bool) {
    let t = normalize_angle(theta);
    let mirrored = t > FRAC_PI_2 && t < 3.0 * FRAC_PI_2;
    (if mirrored { t + PI } else { t }, mirrored)
}

fn polar(r: f64, theta: f64) -> Point {
    (r * theta.cos(), r * theta.sin())
}

fn ring_order(graph: &Hypergraph, hierarchy: &[HierarchyNode]) -> Vec<usize> {
    let index: BTreeMap<&ConstraintRef, usize> =
        graph.constraints.iter().enumerate().map(|(i, c)| (&c.reference, i)).collect();
    let mut seen = vec![false; graph.constraints.len()];
    let mut order = Vec::with_capacity(graph.constraints.len());
    for root in hierarchy {
        for r in root.descendant_constraints() {
            if let Some(&i) = index.get(r) {
                if !std::mem::replace(&mut seen[i], true) {
                    order.push(i);
                }
            }
        }
    }
    order.extend((0..graph.constraints.len()).filter(|&i| !seen[i]));
    order
}

/// Evenly spaced ring positions in hierarchy depth-first order.
pub fn place_constraints(
    graph: &Hypergraph,
    hierarchy: &[HierarchyNode],
    config: &LayoutConfig,
) -> Result<(Vec<ConstraintPlacement>, Vec<LayoutDiagnostic>), LayoutError> {
    if graph.is_empty() {
        return Err(LayoutError::EmptyGraph);
    }
    let n = graph.constraints.len();
    let mut diagnostics = Vec::new();
    let placements = ring_order(graph, hierarchy)
        .into_iter()
        .enumerate()
        .map(|(i, node)| {
            let c = &graph.constraints[node];
            let angle = config.start_angle + TAU * i as f64 / n as f64;
            let (color, diag) = match graph.kind {
                ConstraintKind::Hard => (config.hard_color, None),
                ConstraintKind::Soft => config.weight_color(c.weight),
            };
            diagnostics.extend(diag);
            let (label_rotation, label_mirrored) = label_transform(angle);
            ConstraintPlacement {
                reference: c.reference.clone(),
                node,
                label: c.reference.to_string().split_once(':').map_or_else(String::new, |(_, l)| l.to_string()),
                angle,
                position: polar(config.radius, angle),
                weight: c.weight,
                color,
                label_rotation,
                label_mirrored,
                label_anchor: polar(config.radius + config.node_radius + config.label_gap, angle),
            }
        })
        .collect();
    Ok((placements, diagnostics))
}

fn fit_label(text: &str, available: f64, char_width: f64) -> String {
    let fits = (available / char_width).floor().max(0.0) as usize;
    let len = text.chars().count();
    if len <= fits {
        text.to_string()
    } else if fits >= 2 {
        text.chars().take(fits - 1).chain(std::iter::once('…')).collect()
    } else {
        String::new()
    }
}

/// Hierarchy arcs; depth-0 arcs occupy the innermost ring of the band.
pub fn place_arcs(
    kind: ConstraintKind,
    hierarchy: &[HierarchyNode],
    placements: &[ConstraintPlacement],
    config: &LayoutConfig,
) -> Vec<ArcPlacement> {
    let n = placements.len();
    if n == 0 {
        return Vec::new();
    }
    let position: BTreeMap<&ConstraintRef, usize> =
        placements.iter().enumerate().map(|(i, p)| (&p.reference, i)).collect();
    let levels = hierarchy.iter().map(HierarchyNode::max_depth).max().unwrap_or(0) + 1;
    let (band_inner, band_outer) = config.arc_band;
    let ring = (band_outer - band_inner) / levels as f64;
    let step = TAU / n as f64;
    // an arc around a single node must keep a positive span
    let half_pad = step / 2.0 - config.arc_gap.min(step / 2.0) / 2.0;

    let mut arcs = Vec::new();
    for root in hierarchy {
        root.walk(&mut Vec::new(), &mut |node, path| {
            let covered: Vec<usize> =
                node.descendant_constraints().into_iter().filter_map(|r| position.get(r).copied()).collect();
            let (Some(&first), Some(&last)) = (covered.iter().min(), covered.iter().max()) else { return };
            let start_angle = placements[first].angle - half_pad;
            let end_angle = placements[last].angle + half_pad;
            let inner_radius = band_inner + ring * node.depth as f64;
            let outer_radius = inner_radius + ring;

            let weights: Vec<u32> = covered.iter().filter_map(|&i| placements[i].weight).collect();
            let mean_weight = (kind == ConstraintKind::Soft && !weights.is_empty())
                .then(|| weights.iter().map(|&w| w as f64).sum::<f64>() / weights.len() as f64);
            let color = mean_weight.map_or(config.hard_color, |w| config.colormap.color(w));

            let mid = (start_angle + end_angle) / 2.0;
            let mid_radius = (inner_radius + outer_radius) / 2.0;
            let mut label_rotation = normalize_angle(mid + FRAC_PI_2);
            if label_rotation > FRAC_PI_2 && label_rotation < 3.0 * FRAC_PI_2 {
                label_rotation -= PI;
            }
            arcs.push(ArcPlacement {
                path: path.iter().map(|s| s.to_string()).collect(),
                depth: node.depth,
                start_angle,
                end_angle,
                inner_radius,
                outer_radius,
                span: (first, last),
                mean_weight,
                color,
                label: fit_label(&node.segment, (end_angle - start_angle) * mid_radius, config.char_width),
                label_position: polar(mid_radius, mid),
                label_rotation,
            });
        });
    }
    arcs
}

/// Scales `p` onto the disc of radius `max`; the result satisfies
/// `hypot(x, y) <= max` in floating point.
fn clamp_to_radius(p: Point, max: f64) -> (Point, bool) {
    let norm = p.0.hypot(p.1);
    if norm <= max {
        return (p, false);
    }
    let s = max / norm;
    let (mut x, mut y) = (p.0 * s, p.1 * s);
    while x.hypot(y) > max || (x * x + y * y).sqrt() > max {
        x *= 1.0 - f64::EPSILON;
        y *= 1.0 - f64::EPSILON;
    }
    ((x, y), true)
}

/// Feature nodes at the centroid of their constraints, clamped to
/// `max_feature_radius`.
pub fn place_features(
    graph: &Hypergraph,
    placements: &[ConstraintPlacement],
    config: &LayoutConfig,
) -> (Vec<FeaturePlacement>, Vec<EdgePath>) {
    let mut pos_of_node = vec![(0.0, 0.0); graph.constraints.len()];
    for p in placements {
        pos_of_node[p.node] = p.position;
    }
    let mut sums: Vec<(f64, f64, f64)> = vec![(0.0, 0.0, 0.0); graph.features.len()];
    for e in &graph.edges {
        let w = match config.centroid {
            CentroidWeighting::Uniform => 1.0,
            CentroidWeighting::OccurrenceCount => e.count() as f64,
        };
        let (x, y) = pos_of_node[e.constraint()];
        let acc = &mut sums[e.feature()];
        acc.0 += w * x;
        acc.1 += w * y;
        acc.2 += w;
    }
    let features: Vec<FeaturePlacement> = graph
        .features
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let (sx, sy, sw) = sums[i];
            let raw = if sw > 0.0 { (sx / sw, sy / sw) } else { (0.0, 0.0) };
            let (position, clamped) = clamp_to_radius(raw, config.max_feature_radius);
            FeaturePlacement {
                node: i,
                label: f.label.clone(),
                degree: f.degree,
                position,
                clamped,
                show_label: f.degree >= config.feature_label_min_degree,
            }
        })
        .collect();
    let edges = graph
        .edges
        .iter()
        .map(|e| EdgePath {
            feature: e.feature(),
            constraint: e.constraint(),
            count: e.count(),
            from: features[e.feature()].position,
            to: pos_of_node[e.constraint()],
        })
        .collect();
    (features, edges)
}

/// Full layout of `graph`; `hierarchy` is the identifier tree of the graph's kind.
pub fn compute_layout(
    graph: &Hypergraph,
    hierarchy: &[HierarchyNode],
    config: &LayoutConfig,
) -> Result<LayoutModel, LayoutError> {
    config.validate()?;
    let (constraints, diagnostics) = place_constraints(graph, hierarchy, config)?;
    let arcs = place_arcs(graph.kind, hierarchy, &constraints, config);
    let (features, edges) = place_features(graph, &constraints, config);
    Ok(LayoutModel { kind: graph.kind, config: config.clone(), constraints, arcs, features, edges, diagnostics })
}
