use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn gnakit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gnakit")).args(args).output().expect("spawn gnakit")
}

fn gnakit_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gnakit")).args(args).env(key, value).output().expect("spawn gnakit")
}

fn ok(out: &Output) {
    assert!(out.status.success(), "exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr));
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_string_lossy().into_owned()
}

fn read(p: impl AsRef<Path>) -> String {
    fs::read_to_string(p.as_ref()).unwrap_or_else(|e| panic!("{}: {e}", p.as_ref().display()))
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&read(dir.join("manifest.json"))).unwrap()
}

#[test]
fn simulate_ba_then_discover_names_degree() {
    let tmp = TempDir::new().unwrap();
    let sim = path(&tmp, "sim");
    ok(&gnakit(&["simulate", "--model", "ba", "--param", "n_final=400", "--seed", "7", "--out", &sim]));
    let traj = format!("{sim}/trajectory.gnat");
    let disc = path(&tmp, "disc");
    ok(&gnakit(&["discover", "--input", &traj, "--out", &disc]));
    assert!(read(format!("{disc}/report.txt")).starts_with("winner: degree\n"));
    let report: serde_json::Value = serde_json::from_str(&read(format!("{disc}/report.json"))).unwrap();
    assert_eq!(report["winner"], "degree");
    let m = manifest(Path::new(&disc));
    assert_eq!(m["command"], "discover");
    assert!(m["seed"].is_null());
}

#[test]
fn manifest_records_outputs_and_digests() {
    let tmp = TempDir::new().unwrap();
    let out = path(&tmp, "sim");
    ok(&gnakit(&["simulate", "--model", "uniform-growth", "--param", "n_final=50", "--seed", "1", "--out", &out]));
    let m = manifest(Path::new(&out));
    assert_eq!(m["seed"], 1);
    assert_eq!(m["config"]["model"], "uniform-growth");
    let outputs = m["outputs"].as_array().unwrap();
    let names: Vec<&str> = outputs.iter().map(|o| o["path"].as_str().unwrap()).collect();
    assert_eq!(names, ["trajectory.gnat", "final.snap"]);
    for o in outputs {
        let bytes = fs::read(Path::new(&out).join(o["path"].as_str().unwrap())).unwrap();
        assert_eq!(o["bytes"], bytes.len());
        assert_eq!(o["sha256"].as_str().unwrap().len(), 64);
    }
}

#[test]
fn csv_format_series_matches_final_size() {
    let tmp = TempDir::new().unwrap();
    let out = path(&tmp, "csv");
    ok(&gnakit(&[
        "simulate",
        "--model",
        "ba",
        "--param",
        "n_final=30",
        "--seed",
        "2",
        "--format",
        "csv",
        "--out",
        &out,
    ]));
    let series = read(format!("{out}/series.csv"));
    let last = series.lines().last().unwrap();
    let cols: Vec<&str> = last.split(',').collect();
    assert_eq!(cols[1], "30");
    assert_eq!(cols[2], "29");
    let degrees = read(format!("{out}/degrees.csv"));
    let total: usize = degrees.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse::<usize>().unwrap()).sum();
    assert_eq!(total, 30);
}

#[test]
fn config_file_with_flag_override() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("run.toml");
    fs::write(&cfg, "model = \"ba\"\nseed = 3\nsteps = 100\n[params]\nn_final = 500\n").unwrap();
    let out = path(&tmp, "cfg");
    ok(&gnakit(&["simulate", "--config", cfg.to_str().unwrap(), "--param", "n_final=40", "--out", &out]));
    let m = manifest(Path::new(&out));
    assert_eq!(m["seed"], 3);
    assert_eq!(m["config"]["params"]["n_final"], 40.0);
    assert!(read(format!("{out}/final.snap")).contains("\n"));
}

#[test]
fn exit_codes() {
    let tmp = TempDir::new().unwrap();
    let out = path(&tmp, "x");
    assert_eq!(gnakit(&["simulate", "--model", "ba", "--out", &out]).status.code(), Some(2));
    let bad = tmp.path().join("bad.toml");
    fs::write(&bad, "model = [").unwrap();
    assert_eq!(gnakit(&["simulate", "--config", bad.to_str().unwrap(), "--out", &out]).status.code(), Some(3));
    let typo = tmp.path().join("typo.toml");
    fs::write(&typo, "modle = \"ba\"").unwrap();
    assert_eq!(gnakit(&["simulate", "--config", typo.to_str().unwrap(), "--out", &out]).status.code(), Some(3));
    let missing = path(&tmp, "missing.gnat");
    assert_eq!(gnakit(&["discover", "--input", &missing, "--out", &out]).status.code(), Some(4));
    assert_eq!(gnakit(&["simulate", "--model", "nope", "--seed", "1", "--out", &out]).status.code(), Some(5));
    assert_eq!(
        gnakit(&["simulate", "--model", "ba", "--param", "bogus=1", "--seed", "1", "--out", &out]).status.code(),
        Some(5)
    );
    assert_eq!(gnakit(&["merger", "--w=-1", "--b", "1", "--seed", "1", "--out", &out]).status.code(), Some(5));
    let file = tmp.path().join("plain-file");
    fs::write(&file, "x").unwrap();
    let under_file = file.join("sub").to_string_lossy().into_owned();
    assert_eq!(
        gnakit(&["simulate", "--model", "ba", "--param", "n_final=10", "--seed", "1", "--out", &under_file])
            .status
            .code(),
        Some(6)
    );
    let manifest = tmp.path().join("m.json");
    fs::write(&manifest, "{").unwrap();
    assert_eq!(gnakit(&["replay", "--manifest", manifest.to_str().unwrap(), "--out", &out]).status.code(), Some(4));
    assert_eq!(
        gnakit_env(&["opnet", "--scenario", "demo", "--seed", "1", "--out", &out], "GNAKIT_WORKERS", "0").status.code(),
        Some(2)
    );
}

#[test]
fn no_manifest_on_failure() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("fail");
    let o = gnakit(&["simulate", "--model", "nope", "--seed", "1", "--out", out.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(!out.join("manifest.json").exists());
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown model"));
}

#[test]
fn merger_sweep_layout_and_worker_independence() {
    let tmp = TempDir::new().unwrap();
    let args = |out: &str| {
        vec![
            "merger".to_string(),
            "--w".into(),
            "1,30".into(),
            "--b".into(),
            "5".into(),
            "--runs".into(),
            "3".into(),
            "--iterations".into(),
            "10".into(),
            "--record-every".into(),
            "5".into(),
            "--seed".into(),
            "12".into(),
            "--out".into(),
            out.to_string(),
        ]
    };
    let (one, four) = (path(&tmp, "w1"), path(&tmp, "w4"));
    let a: Vec<String> = args(&one);
    ok(&gnakit_env(&a.iter().map(String::as_str).collect::<Vec<_>>(), "GNAKIT_WORKERS", "1"));
    let b: Vec<String> = args(&four);
    ok(&gnakit_env(&b.iter().map(String::as_str).collect::<Vec<_>>(), "GNAKIT_WORKERS", "4"));
    let runs = read(format!("{one}/runs.csv"));
    assert_eq!(runs, read(format!("{four}/runs.csv")));
    let mut lines = runs.lines();
    assert_eq!(lines.next().unwrap(), "condition,seed,iteration,cross_firm_distance,turnover,conflict,ineffectiveness");
    let rows: Vec<&str> = lines.collect();
    // 2 conditions x 3 runs x iterations {0, 5, 10}
    assert_eq!(rows.len(), 18);
    assert!(rows[0].starts_with("w1_b5,0,0,"));
    assert!(rows[17].starts_with("w30_b5,2,10,"));
}

#[test]
fn analyze_merger_snapshot() {
    let tmp = TempDir::new().unwrap();
    let sweep = path(&tmp, "sweep");
    ok(&gnakit(&[
        "merger",
        "--w",
        "3",
        "--b",
        "1",
        "--runs",
        "1",
        "--iterations",
        "5",
        "--seed",
        "8",
        "--format",
        "snapshot",
        "--snapshots",
        "--out",
        &sweep,
    ]));
    let snap = format!("{sweep}/snapshots/w3_b1-run0.snap");
    let out = path(&tmp, "an");
    ok(&gnakit(&["analyze", "--input", &snap, "--out", &out]));
    let metrics = read(format!("{out}/metrics.csv"));
    let rows: Vec<&str> = metrics.lines().collect();
    assert_eq!(rows[0], "iteration,cross_firm_distance,turnover,conflict,ineffectiveness");
    // the analysed snapshot reproduces the sweep's final row
    let runs = read(format!("{sweep}/runs.csv"));
    let last = runs.lines().last().unwrap();
    assert_eq!(last.splitn(3, ',').nth(2).unwrap(), rows[1]);
}

#[test]
fn analyze_graph_snapshot() {
    let tmp = TempDir::new().unwrap();
    let sim = path(&tmp, "sim");
    ok(&gnakit(&["simulate", "--model", "ba", "--param", "n_final=20", "--seed", "4", "--out", &sim]));
    let out = path(&tmp, "an");
    ok(&gnakit(&["analyze", "--input", &format!("{sim}/final.snap"), "--kind", "graph", "--out", &out]));
    let summary = read(format!("{out}/summary.csv"));
    let row: Vec<&str> = summary.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(&row[..4], ["20", "19", "1", "20"]);
    // a tree on 20 nodes: every edge separates the graph, so betweenness = |A| * |B|
    let edges = read(format!("{out}/edges.csv"));
    for l in edges.lines().skip(1) {
        let b: f64 = l.rsplit(',').next().unwrap().parse().unwrap();
        let side = ((1.0 + (1.0 - 4.0 * b / 400.0).max(0.0).sqrt()) * 10.0).round();
        assert_eq!(side * (20.0 - side), b.round(), "edge {l}");
    }
    assert_eq!(read(format!("{out}/nodes.csv")).lines().count(), 21);
}

#[test]
fn opnet_demo_outputs() {
    let tmp = TempDir::new().unwrap();
    let out = path(&tmp, "op");
    ok(&gnakit(&["opnet", "--scenario", "demo", "--seed", "2", "--out", &out]));
    for f in ["metrics.csv", "transfers.csv", "centrality.csv", "final.snap"] {
        assert!(Path::new(&out).join(f).exists(), "{f}");
    }
    let metrics = read(format!("{out}/metrics.csv"));
    let nodes: Vec<usize> = metrics.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(nodes.windows(2).all(|w| w[0] <= w[1]));
    let scenario = tmp.path().join("two.opnet");
    fs::write(
        &scenario,
        "[agents]\na | sensor, air, air | x=1\nb | database, cyber, joint | -\n[events]\n- | a | b | flow | x | x | 2 | 0\n",
    )
    .unwrap();
    let small = path(&tmp, "small");
    ok(&gnakit(&["opnet", "--scenario", scenario.to_str().unwrap(), "--format", "csv", "--out", &small]));
    let transfers = read(format!("{small}/transfers.csv"));
    assert_eq!(transfers.lines().nth(1).unwrap(), "2,0,a,b,x,\"1\"");
    assert!(!Path::new(&small).join("final.snap").exists());
}

#[test]
fn discover_from_graphml_series() {
    let tmp = TempDir::new().unwrap();
    let doc = |nodes: &[(&str, u8)], edges: &[(&str, &str)]| {
        let mut s = String::from(
            "<?xml version=\"1.0\"?>\n<graphml><key id=\"s\" for=\"node\" attr.name=\"state\"/><graph edgedefault=\"directed\">\n",
        );
        for (id, st) in nodes {
            s.push_str(&format!("<node id=\"{id}\"><data key=\"s\">{st}</data></node>\n"));
        }
        for (a, b) in edges {
            s.push_str(&format!("<edge source=\"{a}\" target=\"{b}\"/>\n"));
        }
        s.push_str("</graph></graphml>\n");
        s
    };
    let series = [
        doc(&[("a", 0), ("b", 0)], &[("b", "a")]),
        doc(&[("a", 0), ("b", 0), ("c", 0)], &[("b", "a"), ("c", "a")]),
        doc(&[("a", 0), ("b", 0), ("c", 0), ("d", 0)], &[("b", "a"), ("c", "a"), ("d", "a")]),
    ];
    let files: Vec<PathBuf> = series
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let p = tmp.path().join(format!("g{i}.graphml"));
            fs::write(&p, s).unwrap();
            p
        })
        .collect();
    let out = path(&tmp, "gm");
    let mut args = vec!["discover", "--out", &out, "--graphml"];
    args.extend(files.iter().map(|p| p.to_str().unwrap()));
    ok(&gnakit(&args));
    let report = read(format!("{out}/report.txt"));
    assert!(report.contains("events: 2"), "{report}");
}

#[test]
fn replay_reproduces_and_checks_command() {
    let tmp = TempDir::new().unwrap();
    let out = path(&tmp, "a");
    ok(&gnakit(&["simulate", "--model", "rbn", "--param", "n=10", "--steps", "40", "--seed", "5", "--out", &out]));
    let again = path(&tmp, "b");
    ok(&gnakit(&["replay", "--manifest", &format!("{out}/manifest.json"), "--out", &again]));
    for f in ["trajectory.gnat", "final.snap", "manifest.json"] {
        assert_eq!(fs::read(format!("{out}/{f}")).unwrap(), fs::read(format!("{again}/{f}")).unwrap(), "{f}");
    }
    let mut m = manifest(Path::new(&out));
    m["command"] = "teleport".into();
    let forged = tmp.path().join("forged.json");
    fs::write(&forged, serde_json::to_string(&m).unwrap()).unwrap();
    assert_eq!(gnakit(&["replay", "--manifest", forged.to_str().unwrap(), "--out", &again]).status.code(), Some(4));
}
