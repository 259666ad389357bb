mod common;

use proptest::prelude::*;
use seannet::geometry::Box3;
use seannet::model::positional_encode;
use seannet::navigation::{plan, SubNodeId};
use seannet::scenegraph::{build_adjacency, relation, row_normalize, Relation};
use seannet::tensor::{cosine, Tensor};
use seannet::training::{triplet_loss, HyperParams};
use seannet::world::{apply_dynamics, gen_world, WorldConfig, WorldState};

fn small_box() -> impl Strategy<Value = Box3> {
    (
        prop::array::uniform3(-3.0..3.0f64),
        prop::array::uniform3(0.05..1.0f64),
        0.0..6.3f64,
    )
        .prop_map(|(c, h, yaw)| Box3::new(c, h, yaw).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn relation_matches_oracle(a in small_box(), b in small_box(), on in any::<bool>()) {
        prop_assert_eq!(relation(&a, &b, on), common::oracle_relation(&a, &b, on));
    }

    #[test]
    fn proximity_is_symmetric_without_containment(a in small_box(), b in small_box()) {
        let (ab, ba) = (relation(&a, &b, false), relation(&b, &a, false));
        if ab != Relation::In && ba != Relation::In {
            prop_assert_eq!(ab, ba);
        }
    }

    #[test]
    fn normalized_rows_are_stochastic(seed in 0u64..10_000) {
        let mut r = common::rng(seed);
        let (_, obs) = common::random_scene(&mut r, 5);
        let adj = build_adjacency(&obs.scene_graph, 8).unwrap();
        for rel in Relation::PROPAGATING {
            let n = adj.normalized(rel);
            for i in 0..8 {
                let s: f64 = (0..8).map(|j| n.get2(i, j)).sum();
                let expect = if adj.detected.contains(&i) { 1.0 } else { 0.0 };
                prop_assert!((s - expect).abs() <= 1e-12);
                prop_assert!((0..8).all(|j| n.get2(i, j) >= 0.0));
            }
        }
    }

    #[test]
    fn relation_parts_are_exclusive(seed in 0u64..10_000) {
        let mut r = common::rng(seed);
        let (_, obs) = common::random_scene(&mut r, 5);
        let adj = build_adjacency(&obs.scene_graph, 8).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                let total: f64 = Relation::ALL.iter().map(|&rel| adj.part(rel).get2(i, j)).sum();
                prop_assert!(total == 0.0 || total == 1.0);
            }
        }
    }

    #[test]
    fn row_normalize_with_no_detections_is_zero(n in 1usize..6) {
        let a = Tensor::zeros(&[n, n]);
        prop_assert!(row_normalize(&a, &[]).unwrap().data().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn triplet_loss_is_a_hinge(sp in -1.0..1.0f64, sn in -1.0..1.0f64, m in 0.0..0.5f64) {
        let l = triplet_loss(sp, sn, m);
        prop_assert!(l >= 0.0);
        prop_assert!((l - (sn + m - sp).max(0.0)).abs() < 1e-12);
    }

    #[test]
    fn cosine_is_bounded_and_scale_free(
        a in prop::collection::vec(-5.0..5.0f64, 6),
        b in prop::collection::vec(-5.0..5.0f64, 6),
        k in 0.1..10.0f64,
    ) {
        prop_assume!(a.iter().any(|x| x.abs() > 1e-3) && b.iter().any(|x| x.abs() > 1e-3));
        let c = cosine(&a, &b).unwrap();
        prop_assert!((-1.0..=1.0).contains(&c));
        let scaled: Vec<f64> = a.iter().map(|x| x * k).collect();
        prop_assert!((cosine(&scaled, &b).unwrap() - c).abs() < 1e-12);
    }

    #[test]
    fn positional_encoding_pairs_have_unit_norm(p in -500.0..500.0f64) {
        let v = positional_encode(p, 16);
        for pair in v.chunks(2) {
            prop_assert!((pair[0] * pair[0] + pair[1] * pair[1] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn planned_paths_are_valid(seed in 0u64..10_000) {
        let mut r = common::rng(seed);
        let map = common::random_map(&mut r, 6);
        let subs: Vec<SubNodeId> = map.sub_nodes().collect();
        let s = subs[(seed as usize) % subs.len()];
        let g = subs[(seed as usize / 7) % subs.len()];
        if let Ok((path, cost)) = plan(&map, s, g) {
            prop_assert_eq!(path.first(), Some(&s));
            prop_assert_eq!(path.last(), Some(&g));
            prop_assert_eq!(map.path_cost(&path), Some(cost));
        }
    }

    #[test]
    fn lr_schedule_is_stepwise(e in 0usize..200) {
        let hp = HyperParams::default();
        prop_assert_eq!(hp.lr_at(e), hp.lr * hp.decay.powi((e / hp.decay_every) as i32));
        prop_assert!(hp.lr_at(e + 1) <= hp.lr_at(e));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn worlds_round_trip_and_validate(seed in 0u64..1000) {
        let w = gen_world(seed, &WorldConfig::default()).unwrap();
        w.validate().unwrap();
        let back = WorldState::from_json(&w.to_json().unwrap()).unwrap();
        prop_assert_eq!(&back, &w);
        let moved = apply_dynamics(&w, seed);
        moved.validate().unwrap();
        prop_assert_eq!(moved.objects.len(), w.objects.len());
    }
}
