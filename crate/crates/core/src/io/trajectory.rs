use std::collections::BTreeMap;
use std::fmt::Write;

use super::{escape, unescape, IoError, Lines, Snapshot};
use crate::gna::{Bridge, BridgeDir, LinkState, NodeId, NodeState, RewriteEvent, SubGna, Trajectory};

pub const TRAJECTORY_VERSION: u32 = 1;

fn write_sub(out: &mut String, s: &SubGna) {
    writeln!(out, "sub {}", s.id_base()).unwrap();
    out.push_str("seeds");
    for v in s.seeds() {
        write!(out, " {v}").unwrap();
    }
    out.push('\n');
    for (id, st) in s.states() {
        writeln!(out, "node {id} {}", st.0).unwrap();
    }
    for (src, l) in s.links() {
        writeln!(out, "link {src} {} {}", l.dst, l.state.0).unwrap();
    }
    for b in s.bridges() {
        let dir = match b.dir {
            BridgeDir::In => "in",
            BridgeDir::Out => "out",
        };
        writeln!(out, "bridge {} {} {dir} {}", b.inner, b.outer, b.state.0).unwrap();
    }
    out.push_str("end\n");
}

/// Canonical text of a trajectory: initial and final configurations and
/// every event with its correspondence.
pub fn trajectory_to_text(t: &Trajectory) -> String {
    let mut out = String::new();
    writeln!(out, "gnakit-trajectory {TRAJECTORY_VERSION}").unwrap();
    for (k, v) in &t.meta {
        writeln!(out, "meta {} {}", escape(k), escape(v)).unwrap();
    }
    writeln!(out, "quiescent {}", u8::from(t.quiescent)).unwrap();
    out.push_str("initial\n");
    Snapshot::from_config(&t.initial).write_block(&mut out);
    for (i, ev) in t.events.iter().enumerate() {
        writeln!(out, "event {i}").unwrap();
        out.push_str("old\n");
        write_sub(&mut out, &ev.old);
        out.push_str("new\n");
        write_sub(&mut out, &ev.new);
        out.push_str("corr");
        for (a, b) in &ev.correspondence {
            write!(out, " {a}>{b}").unwrap();
        }
        out.push('\n');
    }
    out.push_str("final\n");
    Snapshot::from_config(&t.final_config).write_block(&mut out);
    out
}

fn read_sub(lines: &mut Lines<'_>) -> Result<SubGna, IoError> {
    let (args, end) = lines.expect("sub")?;
    lines.arity(&args, 1, end, "sub")?;
    let mut s = SubGna::empty(lines.parse(args[0], "id base")?);
    let (args, _) = lines.expect("seeds")?;
    let mut seeds = Vec::with_capacity(args.len());
    for t in &args {
        seeds.push((NodeId(lines.parse(*t, "seed id")?), t.col));
    }
    let mut bridges = Vec::new();
    loop {
        let toks = lines.next_tokens().ok_or_else(|| lines.eof("`end`"))?;
        let (kw, args) = (toks[0], &toks[1..]);
        let end = kw.col + kw.text.len();
        match kw.text {
            "end" => break,
            "node" => {
                lines.arity(args, 2, end, "node")?;
                let id = NodeId(lines.parse(args[0], "node id")?);
                s.insert_node(id, NodeState(lines.parse(args[1], "state")?))
                    .map_err(|e| lines.err(args[0].col, e.to_string()))?;
            }
            "link" => {
                lines.arity(args, 3, end, "link")?;
                let src = NodeId(lines.parse(args[0], "link source")?);
                let dst = NodeId(lines.parse(args[1], "link destination")?);
                s.add_link(src, dst, LinkState(lines.parse(args[2], "link state")?))
                    .map_err(|e| lines.err(args[0].col, e.to_string()))?;
            }
            "bridge" => {
                lines.arity(args, 4, end, "bridge")?;
                let inner = NodeId(lines.parse(args[0], "inner node")?);
                if !s.contains(inner) {
                    return Err(lines.err(args[0].col, format!("bridge from undeclared node {inner}")));
                }
                let dir = match args[2].text {
                    "in" => BridgeDir::In,
                    "out" => BridgeDir::Out,
                    _ => return Err(lines.err(args[2].col, "bridge direction must be `in` or `out`")),
                };
                bridges.push(Bridge {
                    inner,
                    outer: NodeId(lines.parse(args[1], "outer node")?),
                    dir,
                    state: LinkState(lines.parse(args[3], "link state")?),
                });
            }
            other => return Err(lines.err(kw.col, format!("unexpected record `{other}`"))),
        }
    }
    for (v, col) in &seeds {
        if !s.contains(*v) {
            return Err(IoError::Parse {
                line: lines.line,
                col: *col,
                msg: format!("seed {v} is not a node of the sub-network"),
            });
        }
    }
    s.set_seeds(seeds.into_iter().map(|(v, _)| v).collect());
    s.set_bridges(bridges);
    Ok(s)
}

/// Parses a trajectory and checks that replaying its events reproduces the
/// stored final configuration.
pub fn parse_trajectory(text: &str) -> Result<Trajectory, IoError> {
    let mut lines = Lines::new(text);
    let (args, end) = lines.expect("gnakit-trajectory")?;
    lines.arity(&args, 1, end, "header")?;
    let v: u32 = lines.parse(args[0], "version")?;
    if v != TRAJECTORY_VERSION {
        return Err(lines.err(args[0].col, format!("unsupported trajectory version {v}")));
    }
    let mut meta = BTreeMap::new();
    while lines.peek_keyword() == Some("meta") {
        let (args, end) = lines.expect("meta")?;
        lines.arity(&args, 2, end, "meta")?;
        let k = unescape(args[0].text).ok_or_else(|| lines.err(args[0].col, "bad escape"))?;
        let v = unescape(args[1].text).ok_or_else(|| lines.err(args[1].col, "bad escape"))?;
        meta.insert(k, v);
    }
    let (args, end) = lines.expect("quiescent")?;
    lines.arity(&args, 1, end, "quiescent")?;
    let quiescent = match args[0].text {
        "0" => false,
        "1" => true,
        _ => return Err(lines.err(args[0].col, "quiescent must be 0 or 1")),
    };
    lines.expect("initial")?;
    let initial = Snapshot::read_block(&mut lines)?.to_config()?;
    let mut events = Vec::new();
    while lines.peek_keyword() == Some("event") {
        let (args, end) = lines.expect("event")?;
        lines.arity(&args, 1, end, "event")?;
        let idx: usize = lines.parse(args[0], "event index")?;
        if idx != events.len() {
            return Err(lines.err(args[0].col, format!("expected event {}, found {idx}", events.len())));
        }
        lines.expect("old")?;
        let old = read_sub(&mut lines)?;
        lines.expect("new")?;
        let new = read_sub(&mut lines)?;
        let (args, _) = lines.expect("corr")?;
        let mut correspondence = BTreeMap::new();
        for t in &args {
            let (a, b) = t.text.split_once('>').ok_or_else(|| lines.err(t.col, "correspondence must be `old>new`"))?;
            let a = a.parse().map_err(|_| lines.err(t.col, "bad node id"))?;
            let b = b.parse().map_err(|_| lines.err(t.col, "bad node id"))?;
            correspondence.insert(NodeId(a), NodeId(b));
        }
        let ev = RewriteEvent { old, new, correspondence };
        ev.validate().map_err(|e| lines.err(1, format!("event {idx}: {e}")))?;
        events.push(ev);
    }
    lines.expect("final")?;
    let final_config = Snapshot::read_block(&mut lines)?.to_config()?;
    if let Some(toks) = lines.next_tokens() {
        return Err(lines.err(toks[0].col, "trailing content after final configuration"));
    }
    let t = Trajectory { initial, events, final_config, quiescent, meta };
    t.replay(|_, _, _, _| Ok(()))?;
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use crate::zoo;

    #[test]
    fn ten_step_trajectory_round_trips_and_replays() {
        let m = zoo::birth_death(8, 0.4).unwrap();
        let t = m.run(10, &mut seeded(3)).unwrap();
        assert_eq!(t.steps(), 10);
        let text = trajectory_to_text(&t);
        let back = parse_trajectory(&text).unwrap();
        assert_eq!(back, t);
        assert_eq!(trajectory_to_text(&back), text);
        let mut n = 0;
        back.replay(|_, _, _, _| {
            n += 1;
            Ok(())
        })
        .unwrap();
        assert_eq!(n, 10);
    }

    #[test]
    fn growth_trajectory_round_trips() {
        let t = zoo::ba_growth(40, 2).unwrap().run(37, &mut seeded(1)).unwrap();
        assert_eq!(parse_trajectory(&trajectory_to_text(&t)).unwrap(), t);
    }

    #[test]
    fn tampered_final_is_rejected() {
        let t = zoo::ba_growth(10, 1).unwrap().run(5, &mut seeded(1)).unwrap();
        let text = trajectory_to_text(&t);
        let cut = text.rfind("link ").unwrap();
        let bad = format!("{}{}", &text[..cut], text[cut..].split_once('\n').unwrap().1);
        assert!(parse_trajectory(&bad).is_err());
    }

    #[test]
    fn event_positions_are_reported() {
        let t = zoo::ba_growth(10, 1).unwrap().run(2, &mut seeded(1)).unwrap();
        let text = trajectory_to_text(&t).replace("bridge", "bridgex");
        match parse_trajectory(&text) {
            Err(IoError::Parse { msg, col, .. }) => {
                assert_eq!(col, 1);
                assert!(msg.contains("bridgex"), "{msg}");
            }
            other => panic!("{other:?}"),
        }
    }
}
