//! Seeded random instances, rendered as ASP text so every instance also
//! goes through the real parser.

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

const PREDICATES: [(&str, usize); 5] = [("p", 1), ("q", 2), ("r", 2), ("s", 3), ("t", 0)];
const VARS: [&str; 4] = ["X", "Y", "Z", "W"];
const OPS: [&str; 6] = ["=", "!=", "<", "<=", ">", ">="];

/// One evaluator instance: a constraint rule and a fact file.
#[derive(Clone, Debug)]
pub struct Instance {
    pub rule: String,
    pub facts: String,
    pub n_facts: usize,
    pub n_constants: usize,
}

fn constant(rng: &mut StdRng, n_constants: usize) -> String {
    // a few small integers ride along with the symbolic constants
    if rng.gen_bool(0.3) {
        rng.gen_range(0..n_constants.min(6) as i64).to_string()
    } else {
        format!("c{}", rng.gen_range(0..n_constants))
    }
}

fn ground_arg(rng: &mut StdRng, n_constants: usize) -> String {
    if rng.gen_bool(0.08) {
        format!("f({})", constant(rng, n_constants))
    } else {
        constant(rng, n_constants)
    }
}

fn body_term(rng: &mut StdRng, vars: &[&str], n_constants: usize, in_atom: bool) -> String {
    let roll: f64 = rng.gen();
    if roll < 0.55 {
        vars.choose(rng).unwrap().to_string()
    } else if roll < 0.7 && in_atom {
        "_".into()
    } else if roll < 0.8 {
        format!("{}+{}", vars.choose(rng).unwrap(), rng.gen_range(0..3))
    } else if roll < 0.85 && in_atom {
        // comparisons only take arithmetic operands
        format!("f({})", vars.choose(rng).unwrap())
    } else {
        constant(rng, n_constants)
    }
}

fn atom(rng: &mut StdRng, vars: &[&str], n_constants: usize) -> String {
    let (name, arity) = *PREDICATES.choose(rng).unwrap();
    if arity == 0 {
        return name.into();
    }
    let args: Vec<String> = (0..arity).map(|_| body_term(rng, vars, n_constants, true)).collect();
    format!("{name}({})", args.join(","))
}

/// ≤ `max_vars` variables, ≤ 50 facts, ≤ 20 constants.
pub fn instance(rng: &mut StdRng, max_vars: usize) -> Instance {
    let n_constants = rng.gen_range(1..=20);
    let n_vars = rng.gen_range(1..=max_vars.min(VARS.len()));
    let vars = &VARS[..n_vars];

    let n_literals = rng.gen_range(1..=4);
    let mut lits = Vec::new();
    for _ in 0..n_literals {
        let roll: f64 = rng.gen();
        if roll < 0.55 {
            lits.push(atom(rng, vars, n_constants));
        } else if roll < 0.75 {
            lits.push(format!("not {}", atom(rng, vars, n_constants)));
        } else {
            let l = body_term(rng, vars, n_constants, false);
            let r = body_term(rng, vars, n_constants, false);
            lits.push(format!("{l} {} {r}", OPS.choose(rng).unwrap()));
        }
    }
    let rule = format!("soft(t,X) :- {}.", lits.join(", "));

    let n_facts = rng.gen_range(0..=50);
    let mut facts = String::new();
    for _ in 0..n_facts {
        let (name, arity) = *PREDICATES.choose(rng).unwrap();
        if arity == 0 {
            facts.push_str(name);
        } else {
            let args: Vec<String> = (0..arity).map(|_| ground_arg(rng, n_constants)).collect();
            facts.push_str(&format!("{name}({})", args.join(",")));
        }
        facts.push_str(".\n");
    }
    Instance { rule, facts, n_facts, n_constants }
}

const SEGMENTS: [&str; 8] = ["bin", "enc", "mark", "x", "high", "low", "zero", "size"];
const BODY_ATOMS: [&str; 8] =
    ["bin(E,B)", "channel(E,C)", "field(E,F)", "mark(M)", "type(E,T)", "zero(E)", "enc_entropy(E,EN)", "log(E)"];

/// A random knowledge base of `n` soft and `n / 3` hard constraints with
/// hierarchical ids, random bodies and weights.
pub fn knowledge_base(rng: &mut StdRng, n: usize) -> (String, String) {
    let mut kb = String::new();
    let mut weights = String::new();
    let mut used = std::collections::BTreeSet::new();
    for (kind, count) in [("soft", n), ("hard", n / 3)] {
        let mut made = 0;
        while made < count {
            let depth = rng.gen_range(1..=4);
            let id: Vec<&str> = (0..depth).map(|_| *SEGMENTS.choose(rng).unwrap()).collect();
            let id = id.join("_");
            if !used.insert((kind, id.clone())) {
                continue;
            }
            let n_lits = rng.gen_range(1..=3);
            let body: Vec<&str> = (0..n_lits).map(|_| *BODY_ATOMS.choose(rng).unwrap()).collect();
            kb.push_str(&format!("{kind}({id},E) :- {}.\n", body.join(", ")));
            if kind == "soft" && rng.gen_bool(0.9) {
                weights.push_str(&format!("#const {id}_weight = {}.\n", rng.gen_range(0..=60)));
            }
            made += 1;
        }
    }
    (kb, weights)
}

/// Short ASCII-ish noise biased towards ASP tokens, for fuzzing.
pub fn fuzz_input(rng: &mut StdRng) -> String {
    const PIECES: [&str; 34] = [
        "soft", "hard", "(", ")", ",", ".", ":-", "not ", "X", "_", "a", "1", "-", "+", "*", "/", "<", ">=", "!=",
        "#const ", "%", "\n", " ", "{", "}", ";", ":", "|", "..", "#count", "\"s\"", "é", "@", "\t",
    ];
    let len = rng.gen_range(0..60);
    let mut s = String::new();
    for _ in 0..len {
        if rng.gen_bool(0.1) {
            s.push(rng.gen_range(0u8..128) as char);
        } else {
            s.push_str(PIECES.choose(rng).unwrap());
        }
    }
    s
}
