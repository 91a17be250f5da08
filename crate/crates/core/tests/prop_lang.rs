use proptest::prelude::*;

use ravenlab_core::model::{world_count, Proposition, PREDICATE_NAMES};
use ravenlab_core::prop_lang::{format, parse};

const N: usize = 3;

fn atom() -> impl Strategy<Value = Proposition> {
    prop_oneof![
        (1..=N, 0..PREDICATE_NAMES.len()).prop_map(|(b, i)| Proposition::atom(b, PREDICATE_NAMES[i].1)),
        Just(Proposition::H),
        (0..=N).prop_map(Proposition::Exact),
        Just(Proposition::top()),
    ]
}

fn proposition() -> impl Strategy<Value = Proposition> {
    atom().prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(Proposition::not),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Proposition::And),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Proposition::Or),
            (inner.clone(), inner).prop_map(|(a, b)| Proposition::implies(a, b)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn format_then_parse_preserves_worlds(p in proposition()) {
        let text = format(&p);
        let back = parse(&text, N).map_err(|e| TestCaseError::fail(format!("{text:?}: {e}")))?;
        prop_assert_eq!(back.event(N).unwrap(), p.event(N).unwrap(), "{}", text);
    }

    #[test]
    fn event_agrees_with_pointwise_truth(p in proposition()) {
        let event = p.event(N).unwrap();
        for w in 0..world_count(N) {
            prop_assert_eq!(event.contains(w), p.holds_in(w, N));
        }
    }

    #[test]
    fn parser_never_panics(text in "[FGnHTEx_act:0-9().|&~> ]{0,40}") {
        let _ = parse(&text, N);
    }
}

#[test]
fn documented_forms() {
    let fg = parse("FG_1", 2).unwrap();
    assert_eq!(fg, Proposition::fg(1));
    let range = parse("F>G_1:3", 3).unwrap().event(3).unwrap();
    assert_eq!(range, Proposition::H.event(3).unwrap());
    let neg = parse("~nF_2", 2).unwrap().event(2).unwrap();
    assert_eq!(neg, Proposition::f(2).event(2).unwrap());
}

#[test]
fn errors_carry_positions() {
    let e = parse("FG_1 . (G_2", 2).unwrap_err();
    assert_eq!(e.position, 11);
    let e = parse("FG_3", 2).unwrap_err();
    assert!(e.message.contains('3'), "{e}");
    assert!(parse("Q_1", 2).is_err());
}
