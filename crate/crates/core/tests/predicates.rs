mod support;

use odp_core::constraints::{eval_predicate, Binding};
use odp_core::dsl::{parse_expr, print_expr};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::{criteria, gen, interp};

#[test]
fn six_hundred_random_predicates_match_the_reference_interpreter() {
    match criteria::random_predicates(600) {
        Ok(summary) => println!("{summary}"),
        Err(failures) => panic!("{}", failures.join("\n")),
    }
}

#[test]
fn generator_is_deterministic_and_nontrivial() {
    let print = |seed| print_expr(&gen::Gen::new(&mut ChaCha8Rng::seed_from_u64(seed)).predicate(3));
    assert_eq!(print(7), print(7));
    let distinct: std::collections::BTreeSet<String> = (0..50).map(print).collect();
    assert!(distinct.len() > 40);
}

#[test]
fn reference_interpreter_on_hand_written_predicates() {
    let (model, system) = gen::world();
    let cases = [
        ("forall s: Srv . s.load >= 0", true),
        ("exists s: Hot . s.name = \"a\"", true),
        ("forall s: Hot . s.up", false),
        ("@s1.serves.size = 2 and @s2.serves.includes(@v1)", true),
        ("forall c: Vip . c.serves~.includesAll(@k1.serves~)", false),
        ("exists c: Cli . c.serves~.isEmpty", false),
        ("@s3.backup.includes(@s3) implies -(2) * 3 < -6", false),
    ];
    for (text, want) in cases {
        let p = parse_expr(text).unwrap();
        assert_eq!(interp::holds(&model, &system, &p), Some(want), "{text}");
        assert_eq!(eval_predicate(&p, &model, &system, &Binding::new()), Ok(want), "{text}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn evaluator_agrees_with_reference(seed in any::<u64>()) {
        let (model, system) = gen::world();
        let p = gen::Gen::new(&mut ChaCha8Rng::seed_from_u64(seed)).predicate(3);
        prop_assert!(gen::depth(&p) <= 4);
        let got = eval_predicate(&p, &model, &system, &Binding::new()).ok();
        prop_assert_eq!(got, interp::holds(&model, &system, &p));
    }

    #[test]
    fn quantifier_duality(seed in any::<u64>()) {
        let (model, system) = gen::world();
        let p = gen::Gen::new(&mut ChaCha8Rng::seed_from_u64(seed)).predicate(3);
        for q in gen::quantifiers(&p).into_iter().filter(|q| gen::free_vars(q).is_empty()) {
            let d = gen::dual(q).unwrap();
            prop_assert_eq!(
                eval_predicate(q, &model, &system, &Binding::new()),
                eval_predicate(&d, &model, &system, &Binding::new())
            );
        }
    }

    #[test]
    fn negation_flips_truth(seed in any::<u64>()) {
        let (model, system) = gen::world();
        let p = gen::Gen::new(&mut ChaCha8Rng::seed_from_u64(seed)).predicate(3);
        let a = eval_predicate(&p, &model, &system, &Binding::new()).unwrap();
        let b = eval_predicate(&odp_core::constraints::Expr::not(p), &model, &system, &Binding::new()).unwrap();
        prop_assert_eq!(a, !b);
    }

    #[test]
    fn printed_predicates_parse_back(seed in any::<u64>()) {
        let p = gen::Gen::new(&mut ChaCha8Rng::seed_from_u64(seed)).predicate(3);
        let text = print_expr(&p);
        prop_assert_eq!(parse_expr(&text).unwrap(), p, "{}", text);
    }
}
