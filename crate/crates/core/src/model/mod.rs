//! Knowledge-base model: hard and soft constraints, their weights, and the
//! identifier hierarchy.

mod hierarchy;
mod weights;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::parser::{Atom, BodyLiteral, ParseOutput, Span, Statement, Term};

pub use hierarchy::{build_hierarchy, build_hierarchy_with, Hierarchy, HierarchyMode, HierarchyNode};
pub use weights::{extract_weights, scan_weight_declarations, WEIGHT_SUFFIX};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintKind {
    Hard,
    Soft,
}

impl ConstraintKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ConstraintKind::Hard => "hard",
            ConstraintKind::Soft => "soft",
        }
    }

    pub fn from_predicate(predicate: &str) -> Option<ConstraintKind> {
        match predicate {
            "hard" => Some(ConstraintKind::Hard),
            "soft" => Some(ConstraintKind::Soft),
            _ => None,
        }
    }
}

impl fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ConstraintKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ConstraintKind::from_predicate(s)
            .ok_or_else(|| format!("unknown constraint kind {s:?} (expected hard or soft)"))
    }
}

/// Identity of one constraint rule. Several rules may share an identifier;
/// `variant` numbers them in source order, starting at 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConstraintRef {
    pub kind: ConstraintKind,
    pub id: String,
    pub variant: u32,
}

impl ConstraintRef {
    pub fn new(kind: ConstraintKind, id: &str) -> ConstraintRef {
        ConstraintRef { kind, id: id.to_string(), variant: 0 }
    }
}

/// `soft:bin_high`, or `soft:string_non_nominal#2` for the third rule with that id.
impl fmt::Display for ConstraintRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.kind, self.id)?;
        if self.variant > 0 {
            write!(f, "#{}", self.variant)?;
        }
        Ok(())
    }
}

impl FromStr for ConstraintRef {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, rest) = s.split_once(':').ok_or_else(|| format!("malformed constraint ref {s:?}"))?;
        let kind: ConstraintKind = kind.parse()?;
        let (id, variant) = match rest.rsplit_once('#') {
            Some((id, v)) => (id, v.parse::<u32>().map_err(|_| format!("malformed variant in {s:?}"))?),
            None => (rest, 0),
        };
        if id.is_empty() {
            return Err(format!("empty identifier in {s:?}"));
        }
        Ok(ConstraintRef { kind, id: id.to_string(), variant })
    }
}

impl Serialize for ConstraintRef {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ConstraintRef {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraint {
    pub kind: ConstraintKind,
    pub id: String,
    pub variant: u32,
    /// Head arguments after the identifier.
    pub head_extra_args: Vec<Term>,
    pub body: Vec<BodyLiteral>,
    /// Present only for soft constraints with a matching weight declaration.
    pub weight: Option<u32>,
    pub doc: Option<String>,
    pub span: Span,
    pub hierarchy_path: Vec<String>,
    /// Rule text; canonical rendering for fully parsed rules, verbatim source otherwise.
    pub source: String,
    /// Name of the construct that made the parser skip part of the body.
    /// `body` then holds only the literals that were understood.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unsupported: Option<String>,
}

impl Constraint {
    pub fn reference(&self) -> ConstraintRef {
        ConstraintRef { kind: self.kind, id: self.id.clone(), variant: self.variant }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelDiagnostic {
    /// A hard/soft-headed rule whose first head argument is not a constant.
    MalformedConstraint {
        span: Span,
        message: String,
    },
    /// A constraint kept with a body the parser only partly understood.
    UnsupportedConstraint {
        constraint: ConstraintRef,
        construct: String,
    },
    MissingWeight {
        id: String,
    },
    UnmatchedWeight {
        name: String,
        span: Span,
    },
    DuplicateWeight {
        name: String,
        span: Span,
    },
    NegativeWeight {
        name: String,
        value: i64,
        span: Span,
    },
}

impl fmt::Display for ModelDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelDiagnostic::MalformedConstraint { span, message } => {
                write!(f, "{}:{}: malformed constraint: {message}", span.line, span.col)
            }
            ModelDiagnostic::UnsupportedConstraint { constraint, construct } => {
                write!(f, "{constraint}: body contains unsupported construct ({construct})")
            }
            ModelDiagnostic::MissingWeight { id } => write!(f, "soft constraint {id} has no weight declaration"),
            ModelDiagnostic::UnmatchedWeight { name, span } => {
                write!(f, "{}:{}: weight {name} matches no soft constraint", span.line, span.col)
            }
            ModelDiagnostic::DuplicateWeight { name, span } => {
                write!(f, "{}:{}: duplicate weight declaration {name}", span.line, span.col)
            }
            ModelDiagnostic::NegativeWeight { name, value, span } => {
                write!(f, "{}:{}: weight {name} = {value} is negative", span.line, span.col)
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintSet {
    /// Ordered by source span.
    pub constraints: Vec<Constraint>,
    pub hierarchy: Hierarchy,
    pub diagnostics: Vec<ModelDiagnostic>,
    /// Statements that are neither hard nor soft constraints.
    pub ignored_statements: usize,
}

impl ConstraintSet {
    pub fn of_kind(&self, kind: ConstraintKind) -> impl Iterator<Item = &Constraint> {
        self.constraints.iter().filter(move |c| c.kind == kind)
    }

    pub fn count(&self, kind: ConstraintKind) -> usize {
        self.of_kind(kind).count()
    }

    pub fn get(&self, r: &ConstraintRef) -> Option<&Constraint> {
        self.constraints.iter().find(|c| c.kind == r.kind && c.variant == r.variant && c.id == r.id)
    }
}

enum Source<'a> {
    Statement(&'a Statement),
    Partial { span: Span, head: &'a Atom, body: &'a [BodyLiteral], text: &'a str, construct: &'a str },
}

/// Turns every `hard(...)`/`soft(...)`-headed rule into a [`Constraint`],
/// including rules the parser skipped for unsupported constructs.
pub fn extract_constraints(parsed: &ParseOutput) -> ConstraintSet {
    let mut sources: Vec<(usize, Source)> =
        parsed.program.statements.iter().map(|s| (s.span().start, Source::Statement(s))).collect();
    for d in &parsed.diagnostics {
        if let crate::parser::ParseDiagnostic::Unsupported { span, construct, partial: Some(p) } = d {
            sources.push((
                span.start,
                Source::Partial { span: *span, head: &p.head, body: &p.body, text: &p.text, construct },
            ));
        }
    }
    sources.sort_by_key(|(start, _)| *start);

    let mut set = ConstraintSet::default();
    let mut variants: BTreeMap<(ConstraintKind, String), u32> = BTreeMap::new();
    let mut doc_lines: Vec<&str> = Vec::new();

    for (_, src) in &sources {
        let (span, head, body, text, unsupported) = match src {
            Source::Statement(Statement::Comment { text, attached, .. }) => {
                if *attached {
                    doc_lines.push(text);
                } else {
                    doc_lines.clear();
                }
                continue;
            }
            Source::Statement(Statement::Rule { head, body, span }) => (*span, head, body.as_slice(), None, None),
            Source::Statement(_) => {
                set.ignored_statements += 1;
                doc_lines.clear();
                continue;
            }
            Source::Partial { span, head, body, text, construct } => {
                (*span, *head, *body, Some(*text), Some(*construct))
            }
        };
        let doc = std::mem::take(&mut doc_lines);

        let Some(kind) = ConstraintKind::from_predicate(&head.predicate) else {
            set.ignored_statements += 1;
            continue;
        };
        let id = match head.args.first() {
            Some(Term::Constant { name, .. }) => name.clone(),
            Some(other) => {
                set.diagnostics.push(ModelDiagnostic::MalformedConstraint {
                    span,
                    message: format!("identifier must be a constant, found {other}"),
                });
                continue;
            }
            None => {
                set.diagnostics.push(ModelDiagnostic::MalformedConstraint {
                    span,
                    message: format!("{kind} head has no identifier"),
                });
                continue;
            }
        };
        let counter = variants.entry((kind, id.clone())).or_insert(0);
        let variant = *counter;
        *counter += 1;

        let source = match text {
            Some(t) => t.to_string(),
            None => Statement::Rule { head: head.clone(), body: body.to_vec(), span }.to_string(),
        };
        let constraint = Constraint {
            kind,
            id,
            variant,
            head_extra_args: head.args[1..].to_vec(),
            body: body.to_vec(),
            weight: None,
            doc: doc_text(&doc),
            span,
            hierarchy_path: Vec::new(),
            source,
            unsupported: unsupported.map(str::to_string),
        };
        if let Some(construct) = unsupported {
            set.diagnostics.push(ModelDiagnostic::UnsupportedConstraint {
                constraint: constraint.reference(),
                construct: construct.to_string(),
            });
        }
        set.constraints.push(constraint);
    }
    build_hierarchy(set)
}

fn doc_text(lines: &[&str]) -> Option<String> {
    if lines.is_empty() {
        return None;
    }
    let cleaned: Vec<&str> = lines
        .iter()
        .map(|l| {
            let l = l.trim_start_matches('%').trim();
            l.strip_prefix("@constraint").map(str::trim_start).unwrap_or(l)
        })
        .collect();
    Some(cleaned.join("\n"))
}
