mod support;

use odp_core::dsl::parse_system;
use odp_core::engineering::{build_channel, channel_ids, check_engineering, follow_chain, Containment};
use support::{criteria, read};

#[test]
fn engineering_scenarios() {
    match criteria::engineering() {
        Ok(summary) => println!("{summary}"),
        Err(failures) => panic!("{}", failures.join("\n")),
    }
}

#[test]
fn channel_chain_reaches_the_server_and_mirrors_sides() {
    let model = criteria::corpus_model();
    let base = parse_system(&read("corpus/dbms_base.odps")).unwrap();
    let ch = build_channel("c1", "srv1", &base, &model).unwrap();
    let ids = channel_ids("c1", "srv1");
    let path = follow_chain(&ch, "c1", &ids[0]).unwrap();
    assert_eq!(path.first().map(String::as_str), Some("c1"));
    assert_eq!(path.last().map(String::as_str), Some("srv1"));
    for (a, b) in [(0, 5), (1, 4), (2, 3)] {
        assert_eq!(ch.objects[&ids[a]].of, ch.objects[&ids[b]].of);
        assert_ne!(
            ch.objects[&ids[a]].state.get("side"),
            ch.objects[&ids[b]].state.get("side")
        );
    }
    assert!(check_engineering(&ch, &model).is_empty());
    assert!(Containment::of(&ch, &model).is_forest());
    assert!(build_channel("c1", "srv1", &ch, &model).is_err());
}

#[test]
fn shipped_channel_system_matches_a_fresh_build() {
    let model = criteria::corpus_model();
    let base = parse_system(&read("corpus/dbms_base.odps")).unwrap();
    let mut built = build_channel("c1", "srv1", &base, &model).unwrap();
    let shipped = parse_system(&read("corpus/dbms_channel.odps")).unwrap();
    built.name = shipped.name.clone();
    assert_eq!(built, shipped);
}

proptest::proptest! {
    #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]

    #[test]
    fn transfers_preserve_the_containment_forest(
        moves in proptest::collection::vec((0usize..3, 0usize..2), 0..12)
    ) {
        use odp_core::conformance::{conform, ConformOptions};
        use odp_core::engineering::{transfer_entity, SoftwareEntity};

        let model = criteria::corpus_model();
        let mut s = parse_system(&read("corpus/dbms_base.odps")).unwrap();
        let mut placed: Vec<String> = Containment::of(&s, &model).placements().iter().map(|p| p.to_string()).collect();
        placed.sort();
        for (e, d) in moves {
            let entity = SoftwareEntity::from_object(&s, ["c1", "c2", "srv1"][e]).unwrap();
            if let Ok((next, req)) = transfer_entity(&entity, ["n1", "n2"][d], &s, &model) {
                let c = Containment::of(&next, &model);
                proptest::prop_assert_eq!(c.location(&req.entity).map(|l| l.0), Some(req.destination.as_str()));
                s = next;
            }
            let c = Containment::of(&s, &model);
            proptest::prop_assert!(c.is_forest());
            let mut now: Vec<String> = c.placements().iter().map(|p| p.to_string()).collect();
            now.sort();
            proptest::prop_assert_eq!(&now, &placed);
            proptest::prop_assert!(check_engineering(&s, &model).is_empty());
            proptest::prop_assert!(conform(&s, &model, ConformOptions::default()).unwrap().violations.is_empty());
        }
    }
}

#[test]
fn operations_add_no_conformance_violations() {
    use odp_core::conformance::{conform, ConformOptions};
    use odp_core::engineering::{remote_create, transfer_entity, SoftwareEntity};
    use odp_core::value::StateMap;

    let model = criteria::corpus_model();
    let base = parse_system(&read("corpus/dbms_base.odps")).unwrap();
    let count =
        |s: &odp_core::instance::System| conform(s, &model, ConformOptions::default()).unwrap().violations.len();
    assert_eq!(count(&base), 0);
    let channel = build_channel("c2", "srv1", &base, &model).unwrap();
    let (created, _) = remote_create("c1", "ClientMgr", &StateMap::new(), "n2", &base, &model).unwrap();
    let entity = SoftwareEntity::from_object(&base, "srv1").unwrap();
    let (moved, _) = transfer_entity(&entity, "n1", &base, &model).unwrap();
    for s in [&channel, &created, &moved] {
        assert_eq!(count(s), 0);
        assert!(Containment::of(s, &model).is_forest());
    }
}
