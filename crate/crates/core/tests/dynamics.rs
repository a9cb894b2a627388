mod support;

use odp_core::dsl::{parse_trace, serialize_trace};
use odp_core::dynamics::{simulate, verify_trace};
use proptest::prelude::*;
use support::criteria;

#[test]
fn simulated_corpus_traces_verify_and_respect_frames() {
    match criteria::dynamics(10, 100) {
        Ok(summary) => println!("{summary}"),
        Err(failures) => panic!("{}", failures.join("\n")),
    }
}

#[test]
fn simulation_is_deterministic_per_seed() {
    let model = criteria::corpus_model();
    for (_, initial) in criteria::corpus_systems() {
        let a = simulate(&model, &initial, 25, 11).unwrap();
        let b = simulate(&model, &initial, 25, 11).unwrap();
        assert_eq!(serialize_trace(&a), serialize_trace(&b));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn serialized_traces_reverify(seed in any::<u64>(), steps in 0usize..20) {
        let model = criteria::corpus_model();
        let (_, initial) = criteria::corpus_systems().into_iter().next().unwrap();
        let trace = simulate(&model, &initial, steps, seed).unwrap();
        let text = serialize_trace(&trace);
        let back = parse_trace(&text).unwrap();
        prop_assert_eq!(&back, &trace);
        prop_assert!(verify_trace(&model, &back).is_empty());
    }
}
