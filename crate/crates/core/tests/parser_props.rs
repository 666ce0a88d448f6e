mod support;

use std::time::{Duration, Instant};

use aspkb_core::model::extract_constraints;
use aspkb_core::parser::{ast_from_json, ast_to_json, parse_program, ParseDiagnostic, Statement};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

use support::gen;

fn random_program(seed: u64) -> String {
    let mut rng = StdRng::seed_from_u64(seed);
    let (kb, weights) = gen::knowledge_base(&mut rng, 8);
    let mut text = format!("% generated\n{kb}{weights}");
    for _ in 0..5 {
        let inst = gen::instance(&mut rng, 4);
        text.push_str(&inst.rule);
        text.push('\n');
        text.push_str(&inst.facts);
    }
    text.push_str(":- p(X), not q(X,_).\n");
    text
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn printing_then_parsing_is_identity(seed in any::<u64>()) {
        let src = random_program(seed);
        let first = parse_program(&src, "a.lp");
        prop_assert!(!first.has_errors(), "{:?}", first.diagnostics);
        let printed = first.program.to_string();
        let second = parse_program(&printed, "a.lp");
        prop_assert!(!second.has_errors(), "{printed}");
        prop_assert_eq!(first.program.without_spans(), second.program.without_spans());
    }

    #[test]
    fn statement_spans_slice_their_own_text(seed in any::<u64>()) {
        let src = random_program(seed);
        let out = parse_program(&src, "a.lp");
        let line_starts: Vec<usize> =
            std::iter::once(0).chain(src.match_indices('\n').map(|(i, _)| i + 1)).collect();
        for st in &out.program.statements {
            let span = st.span();
            let text = span.slice(&src);
            prop_assert!(!text.is_empty());
            // line/col agree with the byte offset
            let line_start = line_starts[span.line as usize - 1];
            prop_assert_eq!(line_start + span.col as usize - 1, span.start);
            if matches!(st, Statement::Comment { .. }) {
                continue;
            }
            let again = parse_program(text, "slice.lp");
            prop_assert_eq!(again.program.statements.len(), 1, "{}", text);
            prop_assert_eq!(again.program.statements[0].without_spans(), st.without_spans());
        }
    }

    #[test]
    fn ast_json_round_trips(seed in any::<u64>()) {
        let src = random_program(seed);
        let program = parse_program(&src, "a.lp").program;
        let back = ast_from_json(&ast_to_json(&program)).unwrap();
        prop_assert_eq!(back, program);
    }

    #[test]
    fn arbitrary_text_never_panics(s in "\\PC{0,200}") {
        let out = parse_program(&s, "fuzz.lp");
        for d in &out.diagnostics {
            prop_assert!(d.span().end <= s.len());
        }
    }
}

#[test]
fn token_soup_is_handled_quickly() {
    let mut rng = StdRng::seed_from_u64(99);
    for _ in 0..2000 {
        let s = gen::fuzz_input(&mut rng);
        let t = Instant::now();
        let out = parse_program(&s, "fuzz.lp");
        let _ = extract_constraints(&out);
        assert!(t.elapsed() < Duration::from_secs(1), "{s:?}");
    }
}

#[test]
fn aggregates_keep_a_partial_constraint() {
    let src = "soft(many,E) :- encoding(E), #count { F : field(E,F) } > 2.\nsoft(ok,E) :- encoding(E).\n";
    let out = parse_program(src, "a.lp");
    assert!(!out.has_errors());
    let unsupported: Vec<_> = out.unsupported().collect();
    assert_eq!(unsupported.len(), 1);
    assert!(matches!(unsupported[0], ParseDiagnostic::Unsupported { partial: Some(_), .. }));
    let set = extract_constraints(&out);
    assert_eq!(set.constraints.len(), 2);
    assert_eq!(set.constraints[0].id, "many");
    assert_eq!(set.constraints[0].unsupported.as_deref(), Some("aggregate"));
    assert_eq!(set.constraints[0].body.len(), 1);
}

#[test]
fn syntax_errors_report_position_and_recover() {
    let src = "soft(a,E) :- p(E).\nsoft(b,E) :- p(E) q(E).\nsoft(c,E) :- p(E).\n";
    let out = parse_program(src, "a.lp");
    let errors: Vec<_> = out.errors().collect();
    assert_eq!(errors.len(), 1);
    assert_eq!(errors[0].span().line, 2);
    assert_eq!(extract_constraints(&out).constraints.len(), 2);
}

#[test]
fn crlf_and_comments_do_not_shift_rules() {
    let src = "% c\r\nsoft(a,E) :- p(E). % tail\r\n";
    let out = parse_program(src, "a.lp");
    assert!(!out.has_errors(), "{:?}", out.diagnostics);
    let set = extract_constraints(&out);
    assert_eq!(set.constraints.len(), 1);
    assert_eq!(set.constraints[0].span.line, 2);
}
