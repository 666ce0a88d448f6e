//! Reference evaluator: enumerates the full cross product of the active
//! domain for the named variables and, per literal, for its `_`s. Written
//! against the AST only; shares nothing with the library's engine.

use std::cmp::Ordering;
use std::collections::HashSet;

use aspkb_core::eval::{FactSet, Value};
use aspkb_core::parser::{ArithOp, BodyLiteral, CmpOp, Term};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum V {
    I(i64),
    S(String),
    F(String, Vec<V>),
}

// integers < constants < function terms; functions by name, then args
fn cmp_v(a: &V, b: &V) -> Ordering {
    fn rank(v: &V) -> u8 {
        match v {
            V::I(_) => 0,
            V::S(_) => 1,
            V::F(..) => 2,
        }
    }
    match (a, b) {
        (V::I(x), V::I(y)) => x.cmp(y),
        (V::S(x), V::S(y)) => x.cmp(y),
        (V::F(n, xs), V::F(m, ys)) => n.cmp(m).then_with(|| {
            for (x, y) in xs.iter().zip(ys) {
                let o = cmp_v(x, y);
                if o != Ordering::Equal {
                    return o;
                }
            }
            xs.len().cmp(&ys.len())
        }),
        _ => rank(a).cmp(&rank(b)),
    }
}

fn from_value(v: &Value) -> V {
    match v {
        Value::Int(i) => V::I(*i),
        Value::Sym(s) => V::S(s.clone()),
        Value::Func(n, args) => V::F(n.clone(), args.iter().map(from_value).collect()),
    }
}

fn arith(op: ArithOp, a: i64, b: i64) -> Option<i64> {
    match op {
        ArithOp::Add => a.checked_add(b),
        ArithOp::Sub => a.checked_sub(b),
        ArithOp::Mul => a.checked_mul(b),
        ArithOp::Div => {
            if b == 0 {
                None
            } else {
                a.checked_div(b)
            }
        }
    }
}

fn holds(op: CmpOp, o: Ordering) -> bool {
    match op {
        CmpOp::Eq => o == Ordering::Equal,
        CmpOp::Ne => o != Ordering::Equal,
        CmpOp::Lt => o == Ordering::Less,
        CmpOp::Le => o != Ordering::Greater,
        CmpOp::Gt => o == Ordering::Greater,
        CmpOp::Ge => o != Ordering::Less,
    }
}

/// Term value under `named` (variable name -> value) and `anon` (values for
/// the literal's `_` occurrences, left to right, consumed via `next`).
fn eval(t: &Term, named: &[(String, V)], anon: &[V], next: &mut usize) -> Option<V> {
    match t {
        Term::Variable { name, .. } => named.iter().find(|(n, _)| n == name).map(|(_, v)| v.clone()),
        Term::Anonymous { .. } => {
            let v = anon[*next].clone();
            *next += 1;
            Some(v)
        }
        Term::Constant { name, .. } => Some(V::S(name.clone())),
        Term::Integer { value, .. } => Some(V::I(*value)),
        Term::Function { name, args, .. } => {
            // evaluate every argument so `_` consumption stays positional
            let vals: Vec<Option<V>> = args.iter().map(|a| eval(a, named, anon, next)).collect();
            Some(V::F(name.clone(), vals.into_iter().collect::<Option<_>>()?))
        }
        Term::Negate { operand, .. } => match eval(operand, named, anon, next)? {
            V::I(i) => i.checked_neg().map(V::I),
            _ => None,
        },
        Term::Arith { op, left, right, .. } => {
            let (l, r) = (eval(left, named, anon, next), eval(right, named, anon, next));
            match (l?, r?) {
                (V::I(a), V::I(b)) => arith(*op, a, b).map(V::I),
                _ => None,
            }
        }
    }
}

fn count_anon(t: &Term) -> usize {
    match t {
        Term::Anonymous { .. } => 1,
        Term::Function { args, .. } => args.iter().map(count_anon).sum(),
        Term::Negate { operand, .. } => count_anon(operand),
        Term::Arith { left, right, .. } => count_anon(left) + count_anon(right),
        _ => 0,
    }
}

/// Calls `f` on every tuple of `domain^k` until it returns true.
fn any_tuple(k: usize, domain: &[V], f: &mut dyn FnMut(&[V]) -> bool) -> bool {
    if k == 0 {
        return f(&[]);
    }
    if domain.is_empty() {
        return false;
    }
    let mut idx = vec![0usize; k];
    loop {
        let tuple: Vec<V> = idx.iter().map(|&i| domain[i].clone()).collect();
        if f(&tuple) {
            return true;
        }
        let mut pos = 0;
        loop {
            idx[pos] += 1;
            if idx[pos] < domain.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
            if pos == k {
                return false;
            }
        }
    }
}

type Fact = (String, Vec<V>);

fn literal_holds(lit: &BodyLiteral, named: &[(String, V)], facts: &HashSet<Fact>, domain: &[V]) -> bool {
    match lit {
        BodyLiteral::Positive { atom, .. } | BodyLiteral::Negated { atom, .. } => {
            let k: usize = atom.args.iter().map(count_anon).sum();
            let found = any_tuple(k, domain, &mut |anon| {
                let mut next = 0;
                let args: Vec<Option<V>> = atom.args.iter().map(|t| eval(t, named, anon, &mut next)).collect();
                match args.into_iter().collect::<Option<Vec<V>>>() {
                    Some(args) => facts.contains(&(atom.predicate.clone(), args)),
                    None => false,
                }
            });
            matches!(lit, BodyLiteral::Positive { .. }) == found
        }
        BodyLiteral::Comparison { left, op, right, .. } => {
            let k = count_anon(left) + count_anon(right);
            any_tuple(k, domain, &mut |anon| {
                let mut next = 0;
                let l = eval(left, named, anon, &mut next);
                let r = eval(right, named, anon, &mut next);
                match (l, r) {
                    (Some(a), Some(b)) => holds(*op, cmp_v(&a, &b)),
                    _ => false,
                }
            })
        }
    }
}

fn collect_names(t: &Term, out: &mut Vec<String>) {
    match t {
        Term::Variable { name, .. } => {
            if !out.contains(name) {
                out.push(name.clone());
            }
        }
        Term::Function { args, .. } => args.iter().for_each(|a| collect_names(a, out)),
        Term::Negate { operand, .. } => collect_names(operand, out),
        Term::Arith { left, right, .. } => {
            collect_names(left, out);
            collect_names(right, out);
        }
        _ => {}
    }
}

fn lit_terms(lit: &BodyLiteral) -> Vec<&Term> {
    match lit {
        BodyLiteral::Positive { atom, .. } | BodyLiteral::Negated { atom, .. } => atom.args.iter().collect(),
        BodyLiteral::Comparison { left, right, .. } => vec![left, right],
    }
}

fn subterms(v: &V, out: &mut Vec<V>) {
    out.push(v.clone());
    if let V::F(_, args) = v {
        args.iter().for_each(|a| subterms(a, out));
    }
}

fn body_ints(t: &Term, out: &mut Vec<V>) {
    let mut next = 0;
    if count_anon(t) == 0 {
        let mut names = Vec::new();
        collect_names(t, &mut names);
        if names.is_empty() {
            if let Some(V::I(i)) = eval(t, &[], &[], &mut next) {
                out.push(V::I(i));
            }
        }
    }
    match t {
        Term::Function { args, .. } => args.iter().for_each(|a| body_ints(a, out)),
        Term::Negate { operand, .. } => body_ints(operand, out),
        Term::Arith { left, right, .. } => {
            body_ints(left, out);
            body_ints(right, out);
        }
        _ => {}
    }
}

/// Number of distinct substitutions of the named body variables that
/// satisfy every literal.
pub fn brute_force_count(body: &[BodyLiteral], facts: &FactSet) -> u64 {
    let fact_set: HashSet<Fact> =
        facts.atoms.iter().map(|a| (a.predicate.clone(), a.args.iter().map(from_value).collect())).collect();
    let mut domain: Vec<V> = Vec::new();
    for (_, args) in &fact_set {
        for a in args {
            subterms(a, &mut domain);
        }
    }
    for lit in body {
        for t in lit_terms(lit) {
            body_ints(t, &mut domain);
        }
    }
    domain.sort_by(cmp_v);
    domain.dedup();

    let mut names = Vec::new();
    for lit in body {
        for t in lit_terms(lit) {
            collect_names(t, &mut names);
        }
    }

    if names.is_empty() {
        return u64::from(body.iter().all(|l| literal_holds(l, &[], &fact_set, &domain)));
    }
    // each literal is checked once the last of its variables is assigned,
    // which prunes the cross product without changing what is counted
    let mut due: Vec<Vec<&BodyLiteral>> = vec![Vec::new(); names.len()];
    let mut ground: Vec<&BodyLiteral> = Vec::new();
    for lit in body {
        let mut own = Vec::new();
        lit_terms(lit).into_iter().for_each(|t| collect_names(t, &mut own));
        match own.iter().map(|n| names.iter().position(|m| m == n).unwrap()).max() {
            Some(last) => due[last].push(lit),
            None => ground.push(lit),
        }
    }
    if !ground.iter().all(|l| literal_holds(l, &[], &fact_set, &domain)) {
        return 0;
    }
    let mut named: Vec<(String, V)> = Vec::with_capacity(names.len());
    count_from(0, &names, &due, &mut named, &fact_set, &domain)
}

fn count_from(
    depth: usize,
    names: &[String],
    due: &[Vec<&BodyLiteral>],
    named: &mut Vec<(String, V)>,
    facts: &HashSet<Fact>,
    domain: &[V],
) -> u64 {
    if depth == names.len() {
        return 1;
    }
    let mut count = 0;
    for v in domain {
        named.push((names[depth].clone(), v.clone()));
        if due[depth].iter().all(|l| literal_holds(l, named, facts, domain)) {
            count += count_from(depth + 1, names, due, named, facts, domain);
        }
        named.pop();
    }
    count
}
