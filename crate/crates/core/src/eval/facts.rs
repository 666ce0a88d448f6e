//! Ground values and fact sets.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::parser::{parse_program, Atom, Statement, Term};

use super::EvalError;

/// A ground term. The derived order (integers, then constants, then
/// function terms) is the order comparisons use.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Int(i64),
    Sym(String),
    Func(String, Vec<Value>),
}

impl Value {
    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(v) => Some(*v),
            _ => None,
        }
    }

    /// Converts a ground term, evaluating arithmetic. `None` for non-ground
    /// terms and undefined arithmetic (overflow, division by zero, symbols).
    pub fn from_term(t: &Term) -> Option<Value> {
        Some(match t {
            Term::Integer { value, .. } => Value::Int(*value),
            Term::Constant { name, .. } => Value::Sym(name.clone()),
            Term::Function { name, args, .. } => {
                Value::Func(name.clone(), args.iter().map(Value::from_term).collect::<Option<_>>()?)
            }
            Term::Negate { operand, .. } => Value::Int(Value::from_term(operand)?.as_int()?.checked_neg()?),
            Term::Arith { op, left, right, .. } => {
                Value::Int(op.apply(Value::from_term(left)?.as_int()?, Value::from_term(right)?.as_int()?)?)
            }
            Term::Variable { .. } | Term::Anonymous { .. } => return None,
        })
    }

    /// This value and all nested arguments.
    pub fn for_each_subterm<'a>(&'a self, f: &mut impl FnMut(&'a Value)) {
        f(self);
        if let Value::Func(_, args) = self {
            args.iter().for_each(|a| a.for_each_subterm(f));
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Sym(s) => f.write_str(s),
            Value::Func(name, args) => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Integers serialize as JSON numbers, everything else as its ASP text.
impl Serialize for Value {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Value::Int(v) => s.serialize_i64(*v),
            other => s.collect_str(other),
        }
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(v) => Ok(Value::Int(v)),
            Raw::Text(text) => {
                let parsed = parse_program(&format!("v({text})."), "value");
                match parsed.program.statements.as_slice() {
                    [Statement::Fact { head, .. }] if !parsed.has_errors() && head.args.len() == 1 => {
                        Value::from_term(&head.args[0])
                    }
                    _ => None,
                }
                .ok_or_else(|| serde::de::Error::custom(format!("not a ground term: {text:?}")))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroundAtom {
    pub predicate: String,
    pub args: Vec<Value>,
}

impl GroundAtom {
    pub fn from_atom(atom: &Atom) -> Option<GroundAtom> {
        Some(GroundAtom {
            predicate: atom.predicate.clone(),
            args: atom.args.iter().map(Value::from_term).collect::<Option<_>>()?,
        })
    }
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// The ground description of one candidate specification.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactSet {
    pub name: String,
    pub atoms: BTreeSet<GroundAtom>,
}

impl FactSet {
    pub fn new(name: impl Into<String>, atoms: impl IntoIterator<Item = GroundAtom>) -> FactSet {
        FactSet { name: name.into(), atoms: atoms.into_iter().collect() }
    }

    /// Parses a fact file. Comments and `#const` lines are allowed; any
    /// rule, non-ground fact, or parse diagnostic is an error.
    pub fn parse(name: &str, text: &str) -> Result<FactSet, EvalError> {
        let parsed = parse_program(text, name);
        if !parsed.diagnostics.is_empty() {
            return Err(EvalError::InvalidFacts { spec: name.into(), diagnostics: parsed.diagnostics });
        }
        let mut atoms = BTreeSet::new();
        for st in &parsed.program.statements {
            match st {
                Statement::Fact { head, span } => {
                    let atom = GroundAtom::from_atom(head).ok_or_else(|| EvalError::NonGroundFact {
                        spec: name.into(),
                        span: *span,
                        text: head.to_string(),
                    })?;
                    atoms.insert(atom);
                }
                Statement::Rule { span, .. } => {
                    return Err(EvalError::NotAFact { spec: name.into(), span: *span });
                }
                Statement::Comment { .. } | Statement::ConstDecl { .. } => {}
            }
        }
        Ok(FactSet { name: name.into(), atoms })
    }

    /// Every value occurring in an atom, nested arguments included.
    pub fn constant_domain(&self) -> BTreeSet<Value> {
        let mut out = BTreeSet::new();
        for a in &self.atoms {
            for v in &a.args {
                v.for_each_subterm(&mut |s| {
                    out.insert(s.clone());
                });
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }
}
