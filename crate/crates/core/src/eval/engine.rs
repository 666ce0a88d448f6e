//! Counting satisfying substitutions of one constraint body.
//!
//! Variables range over the active domain: every value in the facts plus
//! the integers written in the body. Positive literals are joined against
//! an index of the facts; whatever they leave unbound is enumerated over
//! the domain. Negated literals and comparisons are checked as soon as all
//! of their variables are bound. Every `_` is a fresh variable, existential
//! within its own literal.

use std::collections::{BTreeMap, BTreeSet};

use crate::parser::{ArithOp, Atom, BodyLiteral, CmpOp, Term};

use super::facts::{FactSet, GroundAtom, Value};

/// Facts indexed by (predicate, arity), plus their value domain.
pub struct PreparedFacts<'a> {
    index: BTreeMap<&'a str, BTreeMap<usize, Vec<&'a GroundAtom>>>,
    domain: BTreeSet<Value>,
}

impl<'a> PreparedFacts<'a> {
    pub fn new(facts: &'a FactSet) -> PreparedFacts<'a> {
        let mut index: BTreeMap<&str, BTreeMap<usize, Vec<&GroundAtom>>> = BTreeMap::new();
        for a in &facts.atoms {
            index.entry(a.predicate.as_str()).or_default().entry(a.args.len()).or_default().push(a);
        }
        PreparedFacts { index, domain: facts.constant_domain() }
    }

    fn matching(&self, predicate: &str, arity: usize) -> &[&'a GroundAtom] {
        self.index.get(predicate).and_then(|m| m.get(&arity)).map_or(&[], Vec::as_slice)
    }
}

#[derive(Clone, Debug)]
enum Pat {
    Var(usize),
    Val(Value),
    Func(String, Vec<Pat>),
    Neg(Box<Pat>),
    Arith(ArithOp, Box<Pat>, Box<Pat>),
}

impl Pat {
    fn vars(&self, out: &mut BTreeSet<usize>) {
        match self {
            Pat::Var(i) => {
                out.insert(*i);
            }
            Pat::Val(_) => {}
            Pat::Func(_, args) => args.iter().for_each(|a| a.vars(out)),
            Pat::Neg(p) => p.vars(out),
            Pat::Arith(_, l, r) => {
                l.vars(out);
                r.vars(out);
            }
        }
    }

    /// Variables that unification can bind (those outside arithmetic).
    fn bindable(&self, out: &mut BTreeSet<usize>) {
        match self {
            Pat::Var(i) => {
                out.insert(*i);
            }
            Pat::Func(_, args) => args.iter().for_each(|a| a.bindable(out)),
            Pat::Val(_) | Pat::Neg(_) | Pat::Arith(..) => {}
        }
    }

    fn has_arith(&self) -> bool {
        match self {
            Pat::Var(_) | Pat::Val(_) => false,
            Pat::Func(_, args) => args.iter().any(Pat::has_arith),
            Pat::Neg(_) | Pat::Arith(..) => true,
        }
    }

    fn eval(&self, b: &[Option<Value>]) -> Option<Value> {
        Some(match self {
            Pat::Var(i) => b[*i].clone()?,
            Pat::Val(v) => v.clone(),
            Pat::Func(name, args) => Value::Func(name.clone(), args.iter().map(|a| a.eval(b)).collect::<Option<_>>()?),
            Pat::Neg(p) => Value::Int(p.eval(b)?.as_int()?.checked_neg()?),
            Pat::Arith(op, l, r) => Value::Int(op.apply(l.eval(b)?.as_int()?, r.eval(b)?.as_int()?)?),
        })
    }

    /// Matches `v`, binding free variables (recorded on `trail`). Arithmetic
    /// over unbound variables matches anything when `defer` is set; the
    /// caller then rechecks the literal once everything is bound.
    fn unify(&self, v: &Value, b: &mut [Option<Value>], trail: &mut Vec<usize>, defer: bool) -> bool {
        match self {
            Pat::Var(i) => match &b[*i] {
                Some(bound) => bound == v,
                None => {
                    b[*i] = Some(v.clone());
                    trail.push(*i);
                    true
                }
            },
            Pat::Val(x) => x == v,
            Pat::Func(name, args) => match v {
                Value::Func(n, vs) if n == name && vs.len() == args.len() => {
                    args.iter().zip(vs).all(|(a, x)| a.unify(x, b, trail, defer))
                }
                _ => false,
            },
            Pat::Neg(_) | Pat::Arith(..) => {
                let mut vars = BTreeSet::new();
                self.vars(&mut vars);
                if vars.iter().all(|&i| b[i].is_some()) {
                    self.eval(b).as_ref() == Some(v)
                } else {
                    defer
                }
            }
        }
    }
}

fn undo(b: &mut [Option<Value>], trail: &mut Vec<usize>, mark: usize) {
    for i in trail.drain(mark..) {
        b[i] = None;
    }
}

#[derive(Clone, Debug)]
struct AtomPat {
    predicate: String,
    args: Vec<Pat>,
}

impl AtomPat {
    fn unify(&self, fact: &GroundAtom, b: &mut [Option<Value>], trail: &mut Vec<usize>, defer: bool) -> bool {
        self.args.iter().zip(&fact.args).all(|(p, v)| p.unify(v, b, trail, defer))
    }

    /// True when some fact matches; unbound slots act as wildcards.
    fn any_match(&self, facts: &PreparedFacts, b: &mut [Option<Value>]) -> bool {
        let mut trail = Vec::new();
        for fact in facts.matching(&self.predicate, self.args.len()) {
            let ok = self.unify(fact, b, &mut trail, false);
            undo(b, &mut trail, 0);
            if ok {
                return true;
            }
        }
        false
    }
}

#[derive(Clone, Debug)]
enum Check {
    /// A positive literal whose arithmetic arguments were skipped during the join.
    Positive(AtomPat),
    /// The literal's own `_` variables are local: those inside
    /// arithmetic are enumerated, the rest bound by matching.
    Negated {
        atom: AtomPat,
        enumerated: Vec<usize>,
    },
    Comparison(Pat, CmpOp, Pat),
}

impl Check {
    fn holds(&self, facts: &PreparedFacts, domain: &[Value], b: &mut [Option<Value>]) -> bool {
        match self {
            Check::Positive(atom) => atom.any_match(facts, b),
            Check::Negated { atom, enumerated } => {
                !exists_assignment(enumerated, domain, b, &mut |b| atom.any_match(facts, b))
            }
            Check::Comparison(l, op, r) => match (l.eval(b), r.eval(b)) {
                (Some(x), Some(y)) => op.holds(x.cmp(&y)),
                _ => false,
            },
        }
    }
}

fn exists_assignment(
    vars: &[usize],
    domain: &[Value],
    b: &mut [Option<Value>],
    f: &mut impl FnMut(&mut [Option<Value>]) -> bool,
) -> bool {
    let Some((&first, rest)) = vars.split_first() else { return f(b) };
    for v in domain {
        b[first] = Some(v.clone());
        let found = exists_assignment(rest, domain, b, f);
        b[first] = None;
        if found {
            return true;
        }
    }
    false
}

struct Compiler {
    names: BTreeMap<String, usize>,
    slots: usize,
}

impl Compiler {
    fn term(&mut self, t: &Term, fresh: &mut Vec<usize>) -> Pat {
        match t {
            Term::Variable { name, .. } => {
                let next = self.slots;
                let id = *self.names.entry(name.clone()).or_insert(next);
                if id == next {
                    self.slots += 1;
                }
                Pat::Var(id)
            }
            Term::Anonymous { .. } => {
                let id = self.slots;
                self.slots += 1;
                fresh.push(id);
                Pat::Var(id)
            }
            Term::Constant { name, .. } => Pat::Val(Value::Sym(name.clone())),
            Term::Integer { value, .. } => Pat::Val(Value::Int(*value)),
            Term::Function { name, args, .. } => {
                Pat::Func(name.clone(), args.iter().map(|a| self.term(a, fresh)).collect())
            }
            Term::Negate { operand, .. } => Pat::Neg(Box::new(self.term(operand, fresh))),
            Term::Arith { op, left, right, .. } => {
                Pat::Arith(*op, Box::new(self.term(left, fresh)), Box::new(self.term(right, fresh)))
            }
        }
    }

    fn atom(&mut self, a: &Atom, fresh: &mut Vec<usize>) -> AtomPat {
        AtomPat { predicate: a.predicate.clone(), args: a.args.iter().map(|t| self.term(t, fresh)).collect() }
    }
}

/// Integers written anywhere in the body, including values of ground
/// arithmetic subterms.
pub fn body_integers(body: &[BodyLiteral]) -> BTreeSet<i64> {
    fn walk(t: &Term, out: &mut BTreeSet<i64>) {
        if let Some(Value::Int(v)) = Value::from_term(t) {
            out.insert(v);
        }
        match t {
            Term::Function { args, .. } => args.iter().for_each(|a| walk(a, out)),
            Term::Negate { operand, .. } => walk(operand, out),
            Term::Arith { left, right, .. } => {
                walk(left, out);
                walk(right, out);
            }
            _ => {}
        }
    }
    let mut out = BTreeSet::new();
    for lit in body {
        match lit {
            BodyLiteral::Positive { atom, .. } | BodyLiteral::Negated { atom, .. } => {
                atom.args.iter().for_each(|t| walk(t, &mut out))
            }
            BodyLiteral::Comparison { left, right, .. } => {
                walk(left, &mut out);
                walk(right, &mut out);
            }
        }
    }
    out
}

/// One body compiled against a fixed evaluation order.
pub struct Plan {
    visible: Vec<(String, usize)>,
    slots: usize,
    positives: Vec<AtomPat>,
    /// Variables enumerated over the domain after the join, in order.
    enumerated: Vec<usize>,
    /// `checks[s]` run at stage `s`: after `s` positives for
    /// `s <= positives.len()`, then after each enumerated variable.
    checks: Vec<Vec<Check>>,
    integers: BTreeSet<i64>,
}

impl Plan {
    pub fn new(body: &[BodyLiteral], facts: &PreparedFacts) -> Plan {
        let mut c = Compiler { names: BTreeMap::new(), slots: 0 };
        let mut positives = Vec::new();
        let mut pending: Vec<(Check, BTreeSet<usize>)> = Vec::new();
        // negated-literal `_` slots are local and never part of the search
        let mut local: BTreeSet<usize> = BTreeSet::new();

        for lit in body {
            let mut fresh = Vec::new();
            match lit {
                BodyLiteral::Positive { atom, .. } => {
                    let a = c.atom(atom, &mut fresh);
                    if a.args.iter().any(Pat::has_arith) {
                        let mut vars = BTreeSet::new();
                        a.args.iter().for_each(|p| p.vars(&mut vars));
                        pending.push((Check::Positive(a.clone()), vars));
                    }
                    positives.push(a);
                }
                BodyLiteral::Negated { atom, .. } => {
                    let a = c.atom(atom, &mut fresh);
                    let mut vars = BTreeSet::new();
                    a.args.iter().for_each(|p| p.vars(&mut vars));
                    let mut bindable = BTreeSet::new();
                    a.args.iter().for_each(|p| p.bindable(&mut bindable));
                    let enumerated: Vec<usize> = fresh.iter().copied().filter(|i| !bindable.contains(i)).collect();
                    for i in &fresh {
                        vars.remove(i);
                    }
                    local.extend(fresh.iter().copied());
                    pending.push((Check::Negated { atom: a, enumerated }, vars));
                }
                BodyLiteral::Comparison { left, op, right, .. } => {
                    let (l, r) = (c.term(left, &mut fresh), c.term(right, &mut fresh));
                    let mut vars = BTreeSet::new();
                    l.vars(&mut vars);
                    r.vars(&mut vars);
                    pending.push((Check::Comparison(l, *op, r), vars));
                }
            }
        }

        // greedy join order: most already-bound variables, then fewest facts
        let mut order: Vec<AtomPat> = Vec::with_capacity(positives.len());
        let mut bound: BTreeSet<usize> = BTreeSet::new();
        let mut stage_bound: Vec<BTreeSet<usize>> = vec![bound.clone()];
        while !positives.is_empty() {
            let best = (0..positives.len())
                .min_by_key(|&i| {
                    let p = &positives[i];
                    let mut vars = BTreeSet::new();
                    p.args.iter().for_each(|a| a.bindable(&mut vars));
                    let unbound = vars.difference(&bound).count();
                    (unbound, facts.matching(&p.predicate, p.args.len()).len(), i)
                })
                .unwrap();
            let p = positives.remove(best);
            p.args.iter().for_each(|a| a.bindable(&mut bound));
            order.push(p);
            stage_bound.push(bound.clone());
        }
        let enumerated: Vec<usize> = (0..c.slots).filter(|i| !bound.contains(i) && !local.contains(i)).collect();
        for &v in &enumerated {
            bound.insert(v);
            stage_bound.push(bound.clone());
        }

        let mut checks: Vec<Vec<Check>> = vec![Vec::new(); stage_bound.len()];
        for (check, vars) in pending {
            let stage = stage_bound.iter().position(|s| vars.is_subset(s)).unwrap_or(stage_bound.len() - 1);
            checks[stage].push(check);
        }

        let mut visible: Vec<(String, usize)> = c.names.into_iter().collect();
        visible.sort();
        Plan { visible, slots: c.slots, positives: order, enumerated, checks, integers: body_integers(body) }
    }

    /// Names of the variables that identify a substitution, sorted.
    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.visible.iter().map(|(n, _)| n.as_str())
    }

    /// All distinct satisfying substitutions, projected on the named variables.
    pub fn solutions(&self, facts: &PreparedFacts) -> BTreeSet<Vec<Value>> {
        let mut domain: BTreeSet<Value> = facts.domain.clone();
        domain.extend(self.integers.iter().map(|&i| Value::Int(i)));
        let domain: Vec<Value> = domain.into_iter().collect();
        let mut search = Search {
            plan: self,
            facts,
            domain: &domain,
            bindings: vec![None; self.slots],
            trail: Vec::new(),
            out: BTreeSet::new(),
        };
        search.stage(0);
        search.out
    }
}

struct Search<'p, 'f> {
    plan: &'p Plan,
    facts: &'p PreparedFacts<'f>,
    domain: &'p [Value],
    bindings: Vec<Option<Value>>,
    trail: Vec<usize>,
    out: BTreeSet<Vec<Value>>,
}

impl Search<'_, '_> {
    fn checks_pass(&mut self, stage: usize) -> bool {
        let (facts, domain) = (self.facts, self.domain);
        self.plan.checks[stage].iter().all(|c| c.holds(facts, domain, &mut self.bindings))
    }

    fn stage(&mut self, s: usize) {
        if !self.checks_pass(s) {
            return;
        }
        let np = self.plan.positives.len();
        if s < np {
            let atom = &self.plan.positives[s];
            for fact in self.facts.matching(&atom.predicate, atom.args.len()) {
                let mark = self.trail.len();
                if atom.unify(fact, &mut self.bindings, &mut self.trail, true) {
                    self.stage(s + 1);
                }
                undo(&mut self.bindings, &mut self.trail, mark);
            }
        } else if s - np < self.plan.enumerated.len() {
            let var = self.plan.enumerated[s - np];
            for v in self.domain {
                self.bindings[var] = Some(v.clone());
                self.stage(s + 1);
            }
            self.bindings[var] = None;
        } else {
            let row = self.plan.visible.iter().map(|(_, i)| self.bindings[*i].clone().expect("bound")).collect();
            self.out.insert(row);
        }
    }
}
