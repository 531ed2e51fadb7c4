use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cook(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cook"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_writes_artifacts_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r");
    let args = [
        "run",
        "--bench",
        "mmult",
        "--isol",
        "parallel",
        "--strategy",
        "synced",
        "--seed",
        "7",
        "--out",
        path(&out),
    ];
    let first = cook(&args);
    assert_eq!(first.status.code(), Some(0), "{first:?}");
    let metrics = fs::read(out.join("metrics.json")).unwrap();
    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    assert!(trace.starts_with("app,kernel,block,sm,start,end,kind\n"));
    assert!(out.join("chronogram.gp").exists());
    let json: serde_json::Value = serde_json::from_slice(&metrics).unwrap();
    assert_eq!(json["label"], "mmult-parallel-synced");
    assert_eq!(json["flags"][0], "run");
    assert_eq!(json["overlap_fraction"], 0.0);

    assert_eq!(cook(&args).status.code(), Some(0));
    assert_eq!(fs::read(out.join("metrics.json")).unwrap(), metrics);
}

#[test]
fn json_chronogram_and_timing_override() {
    let dir = tempfile::tempdir().unwrap();
    let timing = dir.path().join("timing.toml");
    fs::write(&timing, "jitter = 0.0\ncontext_switch_cycles = 1234\n").unwrap();
    let out = dir.path().join("r");
    let o = cook(&[
        "run",
        "--bench",
        "dna",
        "--max-inferences",
        "1",
        "--timing",
        path(&timing),
        "--format",
        "json",
        "--out",
        path(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{o:?}");
    let json: serde_json::Value =
        serde_json::from_slice(&fs::read(out.join("metrics.json")).unwrap()).unwrap();
    assert_eq!(json["config"]["timing"]["context_switch_cycles"], 1234);
    let trace: serde_json::Value =
        serde_json::from_slice(&fs::read(out.join("trace.json")).unwrap()).unwrap();
    let apps: std::collections::BTreeSet<u64> = trace
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["app"].as_u64().unwrap())
        .collect();
    assert_eq!(apps.len(), 1, "isolation trace has a single app column");
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    let bogus = cook(&["run", "--strategy", "bogus", "--out", path(&out)]);
    assert_eq!(bogus.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bogus.stderr).contains("bogus"));
    let unknown = cook(&["run", "--frobnicate", "--out", path(&out)]);
    assert_eq!(unknown.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("Usage"));
    let single = cook(&[
        "run",
        "--isol",
        "parallel",
        "--instances",
        "1",
        "--out",
        path(&out),
    ]);
    assert_eq!(single.status.code(), Some(2));
    assert_eq!(cook(&[]).status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let o = cook(&["report", path(&dir.path().join("missing"))]);
    assert_eq!(o.status.code(), Some(1));
    let bad = dir.path().join("bad.cfg");
    fs::write(&bad, "hook cudaLaunchKernel no-such-template\n").unwrap();
    let o = cook(&[
        "gen-hooks",
        "--config",
        path(&bad),
        "--out",
        path(&dir.path().join("h")),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn gen_hooks_covers_every_symbol_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = cook(&["gen-hooks", "--strategy", "synced", "--out", path(out)]);
        assert_eq!(o.status.code(), Some(0), "{o:?}");
        assert!(stdout(&o).starts_with("40 symbols"));
    }
    let table = fs::read_to_string(a.join("hooktable.json")).unwrap();
    let json: serde_json::Value = serde_json::from_str(&table).unwrap();
    assert_eq!(json.as_object().unwrap().len(), 40);
    assert_eq!(table, fs::read_to_string(b.join("hooktable.json")).unwrap());
    let launch = fs::read_to_string(a.join("src/cudaLaunchKernel.cook")).unwrap();
    assert_eq!(
        launch,
        fs::read_to_string(b.join("src/cudaLaunchKernel.cook")).unwrap()
    );
}

#[test]
fn report_tabulates_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r");
    let run = cook(&[
        "run",
        "--bench",
        "dna",
        "--max-inferences",
        "2",
        "--out",
        path(&out),
    ]);
    assert_eq!(run.status.code(), Some(0));
    let o = cook(&["report", path(&out), path(&out.join("metrics.json"))]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 3);
    assert!(text
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("dna-isolation-none"));
}

fn ips_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .skip(2)
        .map(|l| {
            l.split_whitespace()
                .skip(1)
                .map(|x| x.parse().unwrap())
                .collect()
        })
        .collect()
}

#[test]
fn sweep_table_shapes() {
    let dir = tempfile::tempdir().unwrap();
    let short = ["--warmup", "1", "--sample", "4"];
    let one = cook(&[&["sweep", "--strategies", "synced"][..], &short].concat());
    assert_eq!(one.status.code(), Some(0), "{one:?}");
    let text = stdout(&one);
    assert_eq!(
        text.lines()
            .nth(1)
            .unwrap()
            .split_whitespace()
            .collect::<Vec<_>>(),
        ["synced"]
    );
    assert_eq!(
        ips_rows(&text).iter().map(Vec::len).collect::<Vec<_>>(),
        [1, 1]
    );

    let out = dir.path().join("s");
    let all = cook(&[&["sweep", "--jobs", "4", "--out", path(&out)][..], &short].concat());
    assert_eq!(all.status.code(), Some(0), "{all:?}");
    let text = stdout(&all);
    assert_eq!(
        text.lines()
            .nth(1)
            .unwrap()
            .split_whitespace()
            .collect::<Vec<_>>(),
        ["none", "callback", "synced", "worker"]
    );
    let rows = ips_rows(&text);
    assert_eq!(rows.len(), 2);
    for (iso, par) in rows[0].iter().zip(&rows[1]) {
        assert!(par < iso, "{text}");
    }
    let json: serde_json::Value =
        serde_json::from_slice(&fs::read(out.join("sweep.json")).unwrap()).unwrap();
    assert_eq!(json["cells"].as_array().unwrap().len(), 8);
    assert_eq!(json["flags"][0], "sweep");
}
