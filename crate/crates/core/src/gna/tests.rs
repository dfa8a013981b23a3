use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use rand::RngCore;

use super::*;
use crate::rng::seeded;
use crate::zoo::rules::{DeleteSeeds, IdentityRule, StateBasedRule};
use crate::zoo::{NewcomerState, StateBasedSelection};

fn path(n: usize) -> (GnaConfig, Vec<NodeId>) {
    let mut c = GnaConfig::new();
    let ids: Vec<NodeId> = (0..n).map(|_| c.add_node(NodeState(0)).unwrap()).collect();
    for w in ids.windows(2) {
        c.add_link(w[0], w[1], LinkState::PRESENT).unwrap();
    }
    (c, ids)
}

#[test]
fn identity_event_only_advances_time() {
    let (c, ids) = path(4);
    let sub = c.induced(&ids[1..3].iter().copied().collect(), vec![ids[1]]).unwrap();
    let next = embed(&c, &RewriteEvent::identity(&sub)).unwrap();
    assert_eq!(next.time(), c.time() + 1);
    let mut back = next.clone();
    back.set_time(c.time());
    assert_eq!(back, c);
}

#[test]
fn deleting_middle_of_path_drops_both_bridges() {
    let (c, ids) = path(3);
    let sub = c.induced(&BTreeSet::from([ids[1]]), vec![ids[1]]).unwrap();
    assert_eq!(sub.bridges().len(), 2);
    let ev = RewriteEvent::with_shared_identity(sub.clone(), SubGna::empty(sub.id_base()));
    let next = embed(&c, &ev).unwrap();
    assert_eq!(next.node_count(), 2);
    assert_eq!(next.link_count(), 0);
    next.validate().unwrap();
}

#[test]
fn replaced_node_inherits_bridges_through_correspondence() {
    let (c, ids) = path(3);
    let sub = c.induced(&BTreeSet::from([ids[1]]), vec![ids[1]]).unwrap();
    let x = sub.fresh_id(0);
    let mut new = SubGna::empty(sub.id_base());
    new.insert_node(x, NodeState(7)).unwrap();
    let ev = RewriteEvent { old: sub, new, correspondence: BTreeMap::from([(ids[1], x)]) };
    let next = embed(&c, &ev).unwrap();
    assert!(!next.contains(ids[1]));
    assert_eq!(next.out_links(ids[0]), &[Link::new(x, LinkState::PRESENT)]);
    assert_eq!(next.out_links(x), &[Link::new(ids[2], LinkState::PRESENT)]);
    assert_eq!(next.state(x), Some(NodeState(7)));
    assert_eq!(next.next_id(), x.0 + 1);
}

// Three connected nodes are replaced by two; only one old node keeps a
// correspondent, so only its outside links survive.
#[test]
fn three_node_rewrite_with_partial_correspondence() {
    let mut c = GnaConfig::new();
    let v: Vec<NodeId> = (0..5).map(|i| c.add_node(NodeState(i % 2)).unwrap()).collect();
    for (a, b) in [(0, 1), (1, 2), (2, 0), (3, 0), (1, 4), (4, 2)] {
        c.add_link(v[a], v[b], LinkState::PRESENT).unwrap();
    }
    let sub = c.induced(&BTreeSet::from([v[0], v[1], v[2]]), vec![v[0]]).unwrap();
    let mut new = SubGna::empty(sub.id_base());
    let y = sub.fresh_id(0);
    new.insert_node(v[0], NodeState(1)).unwrap();
    new.insert_node(y, NodeState(0)).unwrap();
    new.add_link(y, v[0], LinkState::PRESENT).unwrap();
    let ev = RewriteEvent { old: sub, new, correspondence: BTreeMap::from([(v[1], v[0])]) };
    // the shared id v0 must map to itself
    assert!(matches!(embed(&c, &ev), Err(GnaError::InvalidEvent(_))));

    let sub = ev.old.clone();
    let mut new = SubGna::empty(sub.id_base());
    let (x, y) = (sub.fresh_id(0), sub.fresh_id(1));
    new.insert_node(x, NodeState(1)).unwrap();
    new.insert_node(y, NodeState(0)).unwrap();
    new.add_link(y, x, LinkState::PRESENT).unwrap();
    let ev = RewriteEvent { old: sub, new, correspondence: BTreeMap::from([(v[1], x)]) };
    let next = embed(&c, &ev).unwrap();
    assert_eq!(next.node_count(), 4);
    // v1's bridges: v1 -> v4; v0's bridge 3 -> 0 and v2's bridge 4 -> 2 drop
    let links: BTreeSet<(NodeId, NodeId)> = next.links().map(|(s, l)| (s, l.dst)).collect();
    assert_eq!(links, BTreeSet::from([(y, x), (x, v[4])]));
    next.validate().unwrap();
}

#[test]
fn zero_steps_gives_single_configuration() {
    let (c, _) = path(3);
    let e = NodeSelection::new(SelectionFamily::Uniform, 1);
    let t = run(&c, &e, &IdentityRule, 0, &mut seeded(1)).unwrap();
    assert_eq!(t.len(), 1);
    assert_eq!(t.final_config, c);
    assert!(!t.quiescent);
}

#[test]
fn growth_from_empty_configuration() {
    let r = StateBasedRule { newcomer: NewcomerState::Fixed(NodeState(0)) };
    let t = run(&GnaConfig::new(), &EmptySelection, &r, 5, &mut seeded(3)).unwrap();
    assert_eq!(t.final_config.node_count(), 5);
    assert_eq!(t.final_config.time(), 5);
    let ids: Vec<u64> = t.final_config.node_ids().map(|v| v.0).collect();
    assert_eq!(ids, vec![0, 1, 2, 3, 4]);
}

#[test]
fn same_seed_same_trajectory() {
    let m = crate::zoo::ba_growth(200, 2).unwrap();
    let a = m.run(500, &mut seeded(42)).unwrap();
    let b = m.run(500, &mut seeded(42)).unwrap();
    let c = m.run(500, &mut seeded(43)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.final_config, c.final_config);
    assert!(a.quiescent);
    assert_eq!(a.final_config.node_count(), 200);
}

#[test]
fn empty_network_with_nonempty_selection_is_quiescent() {
    let e = NodeSelection::new(SelectionFamily::Uniform, 1);
    let t = run(&GnaConfig::new(), &e, &DeleteSeeds, 10, &mut seeded(0)).unwrap();
    assert!(t.quiescent);
    assert_eq!(t.steps(), 0);
}

#[test]
fn stale_event_is_rejected() {
    let (c, ids) = path(3);
    let sub = c.induced(&BTreeSet::from([ids[1]]), vec![ids[1]]).unwrap();
    let ev = RewriteEvent::identity(&sub);
    let mut other = c.clone();
    other.remove_link(ids[0], ids[1], LinkState::PRESENT);
    assert!(matches!(embed(&other, &ev), Err(GnaError::StaleEvent(_))));
    other = c.clone();
    other.set_state(ids[1], NodeState(9)).unwrap();
    assert!(matches!(embed(&other, &ev), Err(GnaError::StaleEvent(_))));
    other = c.clone();
    other.remove_node(ids[1]);
    assert!(matches!(embed(&other, &ev), Err(GnaError::StaleEvent(_))));
}

#[test]
fn failed_embed_leaves_configuration_untouched() {
    let (mut c, ids) = path(3);
    let before = c.clone();
    let sub = c.induced(&BTreeSet::from([ids[1]]), vec![ids[1]]).unwrap();
    let mut new = SubGna::empty(sub.id_base());
    new.insert_node(NodeId(0), NodeState(0)).unwrap();
    let ev = RewriteEvent::with_shared_identity(sub, new);
    assert!(embed_in_place(&mut c, &ev).is_err());
    assert_eq!(c, before);
}

#[test]
fn replacement_miss_is_an_error() {
    let (c, _) = path(4);
    let e = NodeSelection::new(SelectionFamily::Uniform, 3);
    let r = StateBasedRule { newcomer: NewcomerState::Fixed(NodeState(0)) };
    assert!(matches!(run(&c, &e, &r, 1, &mut seeded(0)), Err(GnaError::ReplacementMiss(_))));
}

#[test]
fn extraction_schema_is_checked() {
    let c = GnaConfig::with_alphabet([NodeState(0), NodeState(1)]);
    let e = StateBasedSelection { red: NodeState(5), newcomer_rate: 0.5 };
    let r = StateBasedRule { newcomer: NewcomerState::Fixed(NodeState(0)) };
    assert!(matches!(run(&c, &e, &r, 1, &mut seeded(0)), Err(GnaError::Schema { .. })));
}

#[test]
fn trajectory_replay_reproduces_configs() {
    let m = crate::zoo::birth_death(6, 0.4).unwrap();
    let t = m.run(100, &mut seeded(9)).unwrap();
    let configs = t.configs().unwrap();
    assert_eq!(configs.len(), t.len());
    assert_eq!(configs.last().unwrap(), &t.final_config);
    for (i, c) in configs.iter().enumerate() {
        assert_eq!(c.time(), i as u64);
        c.validate().unwrap();
    }
}

fn arb_config() -> impl Strategy<Value = GnaConfig> {
    (1usize..10)
        .prop_flat_map(|n| {
            (Just(n), proptest::collection::vec(0u64..3, n), proptest::collection::vec((0..n, 0..n, 0u32..2), 0..3 * n))
        })
        .prop_map(|(n, states, links)| {
            let mut c = GnaConfig::new();
            for s in states.iter().take(n) {
                c.add_node(NodeState(*s)).unwrap();
            }
            for (a, b, s) in links {
                c.add_link(NodeId(a as u64), NodeId(b as u64), LinkState(s)).unwrap();
            }
            c
        })
}

/// A random rewrite of `sub`: keeps a random subset of old nodes (optionally
/// restated), adds up to two new nodes and random internal links, and maps
/// kept nodes to themselves.
fn random_event(sub: &SubGna, rng: &mut dyn RngCore) -> RewriteEvent {
    let mut new = SubGna::empty(sub.id_base());
    for (v, s) in sub.states() {
        match rng.next_u32() % 3 {
            0 => {}
            1 => new.insert_node(v, s).unwrap(),
            _ => new.insert_node(v, NodeState(s.0 + 1)).unwrap(),
        }
    }
    for k in 0..(rng.next_u32() % 3) as u64 {
        new.insert_node(sub.fresh_id(k), NodeState(0)).unwrap();
    }
    let ids: Vec<NodeId> = new.node_ids().collect();
    if !ids.is_empty() {
        for _ in 0..rng.next_u32() % 5 {
            let a = ids[rng.next_u32() as usize % ids.len()];
            let b = ids[rng.next_u32() as usize % ids.len()];
            new.add_link(a, b, LinkState::PRESENT).unwrap();
        }
    }
    RewriteEvent::with_shared_identity(sub.clone(), new)
}

proptest! {
    #[test]
    fn embedding_is_local_and_conserves_links(c in arb_config(), seed in any::<u64>(), mask in any::<u16>()) {
        let mut rng = seeded(seed);
        let part: BTreeSet<NodeId> = c.node_ids().filter(|v| mask & (1 << (v.0 % 16)) != 0).collect();
        let sub = c.induced(&part, Vec::new()).unwrap();
        let ev = random_event(&sub, &mut rng);
        let next = embed(&c, &ev).unwrap();
        next.validate().unwrap();

        // outside nodes keep their states and their links among themselves
        let outside: Vec<NodeId> = c.node_ids().filter(|v| !part.contains(v)).collect();
        for &v in &outside {
            prop_assert_eq!(next.state(v), c.state(v));
            let keep = |l: &&Link| !part.contains(&l.dst);
            let a: Vec<&Link> = c.out_links(v).iter().filter(keep).collect();
            let b: Vec<&Link> = next.out_links(v).iter().filter(|l| !ev.new.contains(l.dst)).collect();
            prop_assert_eq!(a, b);
        }

        let outer_links = c.links().filter(|(s, l)| !part.contains(s) && !part.contains(&l.dst)).count();
        let kept_bridges = sub.bridges().iter().filter(|b| ev.correspondence.contains_key(&b.inner)).count();
        prop_assert_eq!(next.link_count(), outer_links + ev.new.link_count() + kept_bridges);
        prop_assert_eq!(next.node_count(), outside.len() + ev.new.node_count());
    }

    #[test]
    fn identity_events_are_fixed_points(c in arb_config(), mask in any::<u16>()) {
        let part: BTreeSet<NodeId> = c.node_ids().filter(|v| mask & (1 << (v.0 % 16)) != 0).collect();
        let sub = c.induced(&part, Vec::new()).unwrap();
        let mut next = embed(&c, &RewriteEvent::identity(&sub)).unwrap();
        next.set_time(c.time());
        prop_assert_eq!(next, c);
    }
}
