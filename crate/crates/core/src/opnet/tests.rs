use std::collections::BTreeSet;

use super::*;
use crate::rng::seeded;

fn agent(sc: &mut Scenario, name: &str, class: &str, knowledge: &[(&str, Value)]) -> usize {
    let k = knowledge.iter().map(|(n, v)| (n.to_string(), v.clone())).collect();
    sc.add_agent(name, vec![class.into(), "air".into(), "joint".into(), "x".into()], k).unwrap()
}

fn event(src: usize, dst: usize, t: LinkType, required: &[&str], transferred: &[&str], duration: u32) -> OpEvent {
    OpEvent {
        conditions: Vec::new(),
        source: src,
        destination: dst,
        link_type: t,
        required: required.iter().map(|s| s.to_string()).collect(),
        transferred: transferred.iter().map(|s| s.to_string()).collect(),
        duration,
        variation: 0,
    }
}

fn with_condition(mut e: OpEvent, text: &str) -> OpEvent {
    e.conditions.push(scenario_condition(text));
    e
}

fn scenario_condition(text: &str) -> Condition {
    Condition { text: text.into(), expr: Expr::parse(text).unwrap() }
}

fn pair() -> (Scenario, usize, usize) {
    let mut sc = Scenario::default();
    let a = agent(&mut sc, "a", "controller", &[("x", Value::Num(1.0))]);
    let b = agent(&mut sc, "b", "actor", &[]);
    (sc, a, b)
}

#[test]
fn executable_rules() {
    let (mut sc, a, b) = pair();
    sc.add_event(event(a, b, LinkType::Flow, &[], &[], 1)).unwrap();
    sc.add_event(event(b, a, LinkType::Request, &["crash_site"], &[], 1)).unwrap();
    sc.add_event(with_condition(event(a, b, LinkType::Task, &[], &[], 1), "alert_received == true")).unwrap();
    let mut st = OpState::new(&sc);
    assert!(st.executable(&sc, 0));
    assert!(!st.executable(&sc, 1));
    assert!(!st.executable(&sc, 2));
    st.knowledge[a].insert("alert_received".into(), Value::Bool(true));
    assert!(st.executable(&sc, 2));
}

#[test]
fn idle_tick_only_advances_clock() {
    let (mut sc, a, b) = pair();
    sc.add_event(event(b, a, LinkType::Request, &["missing"], &["x"], 1)).unwrap();
    let mut st = OpState::new(&sc);
    let before = st.clone();
    let s = st.tick(&sc, &mut seeded(0));
    assert_eq!(s, TickSummary::default());
    assert_eq!(st.clock, 1);
    st.clock = 0;
    assert_eq!(st, before);
}

#[test]
fn flow_link_appears_after_duration() {
    let (mut sc, a, b) = pair();
    sc.add_event(event(a, b, LinkType::Flow, &[], &["x"], 2)).unwrap();
    let mut st = OpState::new(&sc);
    let mut rng = seeded(0);
    st.tick(&sc, &mut rng);
    assert!(st.links.is_empty());
    assert_eq!(st.phases[0], Phase::Active { started: 0, remaining: 1 });
    st.tick(&sc, &mut rng);
    assert_eq!(st.links[&(a, b, LinkType::Flow)], 1);
    assert_eq!(st.phases[0], Phase::Done { started: 0, completed: 2 });
    assert_eq!(st.knowledge[b]["x"], Value::Num(1.0));
    assert!(st.is_quiescent(&sc));
}

#[test]
fn chained_knowledge_waits_for_completion() {
    let (mut sc, a, b) = pair();
    let c = agent(&mut sc, "c", "database", &[]);
    sc.add_event(event(a, b, LinkType::Flow, &[], &["x"], 3)).unwrap();
    sc.add_event(event(b, c, LinkType::Flow, &["x"], &["x"], 1)).unwrap();
    let out = run_to_quiescence(&sc, &mut seeded(0), 100, |_| {});
    assert_eq!(out.state.phases[0], Phase::Done { started: 0, completed: 3 });
    assert_eq!(out.state.phases[1], Phase::Done { started: 3, completed: 4 });
    assert_eq!(out.ticks, 4);
    assert!(!out.truncated);
    audit_causality(&sc, &out.state).unwrap();
}

#[test]
fn request_copies_from_destination_and_task_marks() {
    let (mut sc, a, b) = pair();
    sc.add_event(event(b, a, LinkType::Request, &[], &["x", "absent"], 1)).unwrap();
    sc.add_event(event(a, b, LinkType::Task, &[], &[], 1)).unwrap();
    sc.add_event(with_condition(event(b, a, LinkType::Flow, &[], &[], 1), "tasked")).unwrap();
    let out = run_to_quiescence(&sc, &mut seeded(0), 100, |_| {});
    let st = &out.state;
    assert_eq!(st.knowledge[b].get("x"), Some(&Value::Num(1.0)));
    assert!(!st.knowledge[b].contains_key("absent"));
    assert_eq!(st.tasked, BTreeSet::from([b]));
    assert!(matches!(st.phases[2], Phase::Done { started: 1, .. }));
    assert_eq!(st.transfers.len(), 1);
}

#[test]
fn repeated_interactions_add_weight() {
    let (mut sc, a, b) = pair();
    sc.add_event(event(a, b, LinkType::Flow, &[], &[], 1)).unwrap();
    sc.add_event(event(a, b, LinkType::Flow, &[], &[], 2)).unwrap();
    sc.add_event(event(a, b, LinkType::Task, &[], &[], 2)).unwrap();
    let out = run_to_quiescence(&sc, &mut seeded(0), 100, |_| {});
    assert_eq!(out.state.links[&(a, b, LinkType::Flow)], 2);
    let m = out.series.last().unwrap();
    assert_eq!((m.nodes, m.links, m.max_weight, m.min_weight), (2, 2, 2, 1));
    assert!((m.avg_weight - 1.5).abs() < 1e-12);
}

#[test]
fn quiescence_edge_cases() {
    let (sc, _, _) = pair();
    let out = run_to_quiescence(&sc, &mut seeded(0), 10, |_| {});
    assert_eq!((out.ticks, out.truncated), (0, false));
    assert_eq!(out.series.len(), 1);

    let (mut sc, a, b) = pair();
    sc.add_event(event(a, b, LinkType::Task, &[], &[], 5)).unwrap();
    let out = run_to_quiescence(&sc, &mut seeded(0), 100, |_| {});
    assert_eq!(out.ticks, 5);

    let out = run_to_quiescence(&sc, &mut seeded(0), 3, |_| {});
    assert!(out.truncated);
    assert_eq!(out.ticks, 3);
}

#[test]
fn variation_is_bounded_and_clamped() {
    let (mut sc, a, b) = pair();
    let mut e = event(a, b, LinkType::Flow, &[], &[], 2);
    e.variation = 3;
    sc.add_event(e).unwrap();
    let mut seen = BTreeSet::new();
    for seed in 0..200 {
        let out = run_to_quiescence(&sc, &mut seeded(seed), 100, |_| {});
        seen.insert(out.ticks);
    }
    assert_eq!(seen, BTreeSet::from([1, 2, 3, 4, 5]));
}

#[test]
fn demo_scenario_grows_monotonically() {
    let sc = Scenario::parse(SAR_DEMO).unwrap();
    assert_eq!(sc.agents.len(), 21);
    let mut last = (0usize, 0u64);
    let out = run_to_quiescence(&sc, &mut seeded(1), sc.max_ticks, |st| {
        let now = (st.nodes.len(), st.total_weight());
        assert!(now.0 >= last.0 && now.1 >= last.1);
        last = now;
    });
    assert!(!out.truncated);
    let m = out.series.last().unwrap();
    assert!(m.nodes >= 18, "{m:?}");
    assert!(m.heterotypes > 1 && m.entropy > 0.0 && m.entropy <= 1.0);
    audit_causality(&sc, &out.state).unwrap();
    let site = &out.state.knowledge[sc.agent_index("rangers_inuvik").unwrap()];
    assert!(site.contains_key("crash_site"));
}

#[test]
fn scenario_text_round_trip() {
    let sc = Scenario::parse(SAR_DEMO).unwrap();
    let again = Scenario::parse(&sc.to_text()).unwrap();
    assert_eq!(again, sc);
    assert_eq!(again.to_text(), sc.to_text());
    let r = RandomScenario::default().generate(&mut seeded(9));
    assert_eq!(Scenario::parse(&r.to_text()).unwrap(), r);
}

fn scenario_error(text: &str) -> (usize, usize) {
    match Scenario::parse(text) {
        Err(OpNetError::Scenario { line, col, .. }) => (line, col),
        other => panic!("expected a scenario error, got {other:?}"),
    }
}

#[test]
fn load_errors_are_positioned() {
    let head = "[agents]\na | controller, air, joint | -\nb | actor, land, ground | -\n[events]\n";
    assert_eq!(scenario_error(&format!("{head}x == | a | b | flow | - | - | 1 | 0\n")), (5, 5));
    assert_eq!(scenario_error(&format!("{head}ok; q & r | a | b | flow | - | - | 1 | 0\n")), (5, 7));
    assert_eq!(scenario_error(&format!("{head}- | a | zed | flow | - | - | 1 | 0\n")), (5, 9));
    assert_eq!(scenario_error(&format!("{head}- | a | b | beam | - | - | 1 | 0\n")), (5, 13));
    assert_eq!(scenario_error(&format!("{head}- | a | b | flow | - | - | 0 | 0\n")), (5, 28));
    assert_eq!(scenario_error(&format!("{head}- | a | b | task | - | v | 1 | 0\n")), (5, 24));
    assert_eq!(scenario_error(&format!("{head}- | a | b | flow | - | - | 1\n")), (5, 1));
    assert_eq!(scenario_error("[agents]\na | pilot, air | -\n"), (2, 5));
    assert_eq!(scenario_error("[nope]\n"), (1, 1));
    assert_eq!(scenario_error("[settings]\nspeed = 3\n"), (2, 1));
    assert_eq!(scenario_error("a | b\n"), (1, 1));
    assert_eq!(scenario_error("[agents]\na | actor, air | tasked=true\n"), (2, 18));
}

#[test]
fn sphere_of_influence_examples() {
    let mut sc = Scenario::default();
    let ids: Vec<usize> = (0..6).map(|i| agent(&mut sc, &format!("n{i}"), "router", &[])).collect();
    let mut st = OpState::new(&sc);
    st.nodes.insert(ids[0]);
    let s = st.sphere_of_influence(&sc, ids[0]).unwrap();
    assert_eq!(s.nodes, BTreeSet::from([ids[0]]));
    assert_eq!(s.fraction, 1.0);

    // star on 5 nodes centred on 0
    for leaf in 1..5 {
        st.links.insert((ids[leaf], ids[0], LinkType::Flow), 1);
        st.nodes.insert(ids[leaf]);
    }
    let s = st.sphere_of_influence(&sc, ids[0]).unwrap();
    assert_eq!(s.nodes.len(), 5);
    assert_eq!(s.fraction, 1.0);
    assert!(st.sphere_of_influence(&sc, ids[5]).is_err());
    assert_eq!(st.degree_centrality()[0], (ids[0], 1.0));
}

#[test]
fn sphere_matches_brute_force_on_six_nodes() {
    let mut sc = Scenario::default();
    for i in 0..6 {
        agent(&mut sc, &format!("n{i}"), "actor", &[]);
    }
    let mut st = OpState::new(&sc);
    let arcs = [(0, 1), (1, 2), (2, 0), (3, 1), (4, 5), (2, 4)];
    for (s, d) in arcs {
        st.links.insert((s, d, LinkType::Request), 1);
        st.nodes.extend([s, d]);
    }
    for v in 0..6 {
        let sphere = st.sphere_of_influence(&sc, v).unwrap();
        let expected: BTreeSet<usize> =
            (0..6).filter(|&u| u == v || arcs.iter().any(|&(a, b)| (a, b) == (u, v) || (a, b) == (v, u))).collect();
        assert_eq!(sphere.nodes, expected);
        let links: BTreeSet<(usize, usize)> = sphere.links.iter().map(|l| (l.0, l.1)).collect();
        let exp_links: BTreeSet<(usize, usize)> =
            arcs.iter().copied().filter(|(a, b)| expected.contains(a) && expected.contains(b)).collect();
        assert_eq!(links, exp_links);
        assert!((sphere.fraction - expected.len() as f64 / 6.0).abs() < 1e-15);
    }
}

#[test]
fn random_scenarios_satisfy_invariants() {
    for seed in 0..30 {
        let sc = RandomScenario::default().generate(&mut seeded(seed));
        let mut prev: Option<OpState> = None;
        let out = run_to_quiescence(&sc, &mut seeded(1000 + seed), 500, |st| {
            if let Some(p) = &prev {
                assert!(st.nodes.is_superset(&p.nodes));
                for (k, w) in &p.links {
                    assert!(st.links.get(k).is_some_and(|x| x >= w));
                }
            }
            prev = Some(st.clone());
        });
        audit_causality(&sc, &out.state).unwrap();
        for m in &out.series {
            assert!((0.0..=1.0).contains(&m.entropy));
        }
    }
}

#[test]
fn zero_variation_is_seed_independent() {
    let mut sc = RandomScenario { max_variation: 0, ..RandomScenario::default() }.generate(&mut seeded(5));
    for e in &mut sc.events {
        e.variation = 0;
    }
    let first = run_to_quiescence(&sc, &mut seeded(0), 500, |_| {});
    for seed in 1..10 {
        assert_eq!(run_to_quiescence(&sc, &mut seeded(seed), 500, |_| {}), first);
    }
}

#[test]
fn audit_detects_tampering() {
    let sc = Scenario::parse(SAR_DEMO).unwrap();
    let out = run_to_quiescence(&sc, &mut seeded(2), sc.max_ticks, |_| {});
    let mut st = out.state.clone();
    st.knowledge[0].insert("rumour".into(), Value::Bool(true));
    assert!(matches!(audit_causality(&sc, &st), Err(OpNetError::Causality(_))));
    let mut st = out.state.clone();
    st.transfers[0].var = "weather".into();
    assert!(audit_causality(&sc, &st).is_err());
}

#[test]
fn snapshot_describes_operational_network() {
    let (mut sc, a, b) = pair();
    sc.add_event(event(a, b, LinkType::Task, &[], &[], 1)).unwrap();
    let out = run_to_quiescence(&sc, &mut seeded(0), 10, |_| {});
    let snap = out.state.snapshot(&sc);
    assert_eq!(snap.nodes.len(), 2);
    assert_eq!(snap.nodes[1].attrs.get("tasked").map(String::as_str), Some("true"));
    assert_eq!(snap.links[0].label, "task");
    assert_eq!(crate::io::Snapshot::parse(&snap.to_text()).unwrap(), snap);
}
