use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

use aspkb_core::export::ModelDocument;
use aspkb_core::features::{extract_features, FeatureKinds};
use aspkb_core::layout::{normalize_angle, ArcPlacement, LayoutConfig, LayoutModel};
use aspkb_core::model::ConstraintKind;
use rand::rngs::StdRng;
use rand::SeedableRng;

pub const EPS: f64 = 1e-9;

/// Checks every geometric invariant of a layout; returns the first failure.
pub fn check_layout(m: &LayoutModel) -> Result<(), String> {
    let c = &m.config;
    let n = m.constraints.len();
    for (i, p) in m.constraints.iter().enumerate() {
        let want = c.start_angle + TAU * i as f64 / n as f64;
        if (p.angle - want).abs() > EPS {
            return Err(format!("constraint {i}: angle {} != {want}", p.angle));
        }
        let r = p.position.0.hypot(p.position.1);
        if (r - c.radius).abs() > EPS * c.radius.max(1.0) {
            return Err(format!("constraint {i} off ring: {r}"));
        }
        let t = normalize_angle(p.angle);
        let mirrored = t > FRAC_PI_2 && t < 3.0 * FRAC_PI_2;
        if p.label_mirrored != mirrored {
            return Err(format!("constraint {i}: mirrored={} at {t}", p.label_mirrored));
        }
        let rot = if mirrored { t + PI } else { t };
        if (p.label_rotation - rot).abs() > EPS {
            return Err(format!("constraint {i}: rotation {}", p.label_rotation));
        }
    }
    for f in &m.features {
        if f.position.0.hypot(f.position.1) > c.max_feature_radius {
            return Err(format!("feature {} outside R_max", f.label));
        }
    }
    let by_path: BTreeMap<&[String], &ArcPlacement> = m.arcs.iter().map(|a| (a.path.as_slice(), a)).collect();
    for a in &m.arcs {
        if a.start_angle >= a.end_angle {
            return Err(format!("arc {:?} has no span", a.path));
        }
        if a.inner_radius < c.arc_band.0 - EPS
            || a.outer_radius > c.arc_band.1 + EPS
            || a.inner_radius >= a.outer_radius
        {
            return Err(format!("arc {:?} outside the band", a.path));
        }
        for i in a.span.0..=a.span.1 {
            let ang = m.constraints[i].angle;
            if ang < a.start_angle - EPS || ang > a.end_angle + EPS {
                return Err(format!("arc {:?} misses constraint {i}", a.path));
            }
        }
        if a.path.len() > 1 {
            let parent = by_path.get(&a.path[..a.path.len() - 1]).ok_or(format!("arc {:?} has no parent", a.path))?;
            if a.start_angle < parent.start_angle - EPS || a.end_angle > parent.end_angle + EPS {
                return Err(format!("arc {:?} escapes its parent", a.path));
            }
            if a.inner_radius < parent.outer_radius - EPS {
                return Err(format!("arc {:?} overlaps its parent ring", a.path));
            }
        }
    }
    // siblings never overlap
    for a in &m.arcs {
        for b in &m.arcs {
            let same_parent = a.path.len() == b.path.len() && a.path[..a.path.len() - 1] == b.path[..b.path.len() - 1];
            if a.path != b.path && same_parent && a.start_angle < b.start_angle && a.end_angle > b.start_angle + EPS {
                return Err(format!("arcs {:?} and {:?} overlap", a.path, b.path));
            }
        }
    }
    for e in &m.edges {
        if e.from != m.features[e.feature].position {
            return Err("edge does not start at its feature".into());
        }
    }
    Ok(())
}

/// Layout of a random knowledge base; `None` when the view is empty.
pub fn random_layout(seed: u64, n: usize, radius: f64, min_degree: usize, kind: ConstraintKind) -> Option<LayoutModel> {
    let mut rng = StdRng::seed_from_u64(seed);
    let (kb, weights) = super::gen::knowledge_base(&mut rng, n);
    let set = super::load_set(&kb, &weights);
    let inc = extract_features(&set, FeatureKinds::ALL);
    let doc = ModelDocument::new(set, inc, BTreeMap::new());
    match doc.layout(kind, FeatureKinds::ALL, min_degree, &LayoutConfig::with_radius(radius)) {
        Ok(m) if m.constraints.is_empty() => None,
        Ok(m) => Some(m),
        Err(e) => panic!("{e}"),
    }
}
