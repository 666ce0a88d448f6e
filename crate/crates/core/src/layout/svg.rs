//! Deterministic SVG rendering of a [`LayoutModel`]. Every number goes
//! through one fixed-precision formatter so identical models give
//! byte-identical documents.

use std::f64::consts::PI;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{ArcPlacement, LayoutModel, Point};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvgOptions {
    /// Extra space around the outer ring for labels.
    pub margin: f64,
    pub font_size: f64,
    pub show_edges: bool,
}

impl Default for SvgOptions {
    fn default() -> Self {
        SvgOptions { margin: 160.0, font_size: 10.0, show_edges: true }
    }
}

fn num(v: f64) -> String {
    let s = format!("{v:.3}");
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        "0.000".to_string()
    } else {
        s
    }
}

fn pt(p: Point) -> String {
    format!("{},{}", num(p.0), num(p.1))
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn at(r: f64, theta: f64) -> Point {
    (r * theta.cos(), r * theta.sin())
}

/// Annular sector path. Split at its midpoint so no single SVG arc command
/// ever spans more than half a turn (a full ring is otherwise degenerate).
fn sector_path(a: &ArcPlacement) -> String {
    let (s, e) = (a.start_angle, a.end_angle);
    let m = (s + e) / 2.0;
    let (ri, ro) = (a.inner_radius, a.outer_radius);
    let large = if (e - s) / 2.0 > PI { 1 } else { 0 };
    format!(
        "M{} A{},{} 0 {large} 1 {} A{},{} 0 {large} 1 {} L{} A{},{} 0 {large} 0 {} A{},{} 0 {large} 0 {} Z",
        pt(at(ro, s)),
        num(ro),
        num(ro),
        pt(at(ro, m)),
        num(ro),
        num(ro),
        pt(at(ro, e)),
        pt(at(ri, e)),
        num(ri),
        num(ri),
        pt(at(ri, m)),
        num(ri),
        num(ri),
        pt(at(ri, s)),
    )
}

pub fn render_svg(model: &LayoutModel, options: &SvgOptions) -> String {
    let half = model.config.radius + options.margin;
    let size = 2.0 * half;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{w}" viewBox="{o} {o} {w} {w}" font-family="sans-serif" font-size="{f}">"##,
        w = num(size),
        o = num(-half),
        f = num(options.font_size),
    );
    let _ = writeln!(
        out,
        r##"<rect class="background" x="{o}" y="{o}" width="{w}" height="{w}" fill="#ffffff"/>"##,
        w = num(size),
        o = num(-half),
    );
    let _ = writeln!(out, r##"<g id="root" data-kind="{}">"##, model.kind);

    out.push_str("<g class=\"arcs\">\n");
    for a in &model.arcs {
        let _ = writeln!(
            out,
            r##"<path class="arc" data-path="{}" data-depth="{}" d="{}" fill="{}" stroke="#ffffff" stroke-width="1.000"/>"##,
            escape(&a.path.join("/")),
            a.depth,
            sector_path(a),
            a.color,
        );
        if !a.label.is_empty() {
            let _ = writeln!(
                out,
                r##"<text class="arc-label" x="{}" y="{}" transform="rotate({} {})" text-anchor="middle" dominant-baseline="middle">{}</text>"##,
                num(a.label_position.0),
                num(a.label_position.1),
                num(a.label_rotation.to_degrees()),
                pt(a.label_position).replace(',', " "),
                escape(&a.label),
            );
        }
    }
    out.push_str("</g>\n");

    if options.show_edges {
        out.push_str("<g class=\"edges\" stroke=\"#999999\" stroke-opacity=\"0.400\" fill=\"none\">\n");
        for e in &model.edges {
            let _ = writeln!(
                out,
                r##"<path class="edge" data-feature="{}" data-constraint="{}" d="M{} Q0.000,0.000 {}"/>"##,
                e.feature,
                e.constraint,
                pt(e.from),
                pt(e.to),
            );
        }
        out.push_str("</g>\n");
    }

    out.push_str("<g class=\"features\">\n");
    for f in &model.features {
        let _ = writeln!(
            out,
            r##"<circle class="feature" data-degree="{}" cx="{}" cy="{}" r="{}" fill="#333333"/>"##,
            f.degree,
            num(f.position.0),
            num(f.position.1),
            num(2.0 + (f.degree as f64).sqrt()),
        );
        if f.show_label {
            let _ = writeln!(
                out,
                r##"<text class="feature-label" x="{}" y="{}" text-anchor="middle">{}</text>"##,
                num(f.position.0),
                num(f.position.1 - 6.0),
                escape(&f.label),
            );
        }
    }
    out.push_str("</g>\n");

    out.push_str("<g class=\"constraints\">\n");
    for c in &model.constraints {
        let _ = writeln!(
            out,
            r##"<circle class="constraint" data-ref="{}" cx="{}" cy="{}" r="{}" fill="{}" stroke="#333333"/>"##,
            escape(&c.reference.to_string()),
            num(c.position.0),
            num(c.position.1),
            num(model.config.node_radius),
            c.color,
        );
        if let Some(w) = c.weight {
            let _ = writeln!(
                out,
                r##"<text class="weight" x="{}" y="{}" text-anchor="middle" dominant-baseline="middle">{w}</text>"##,
                num(c.position.0),
                num(c.position.1),
            );
        }
        let _ = writeln!(
            out,
            r##"<text class="constraint-label" x="{}" y="{}" transform="rotate({} {})" text-anchor="{}" dominant-baseline="middle">{}</text>"##,
            num(c.label_anchor.0),
            num(c.label_anchor.1),
            num(c.label_rotation.to_degrees()),
            pt(c.label_anchor).replace(',', " "),
            if c.label_mirrored { "end" } else { "start" },
            escape(&c.label),
        );
    }
    out.push_str("</g>\n</g>\n</svg>\n");
    out
}
