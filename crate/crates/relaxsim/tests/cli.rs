use std::path::Path;
use std::process::{Command, Output};

fn relaxsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relaxsim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn run_sort_writes_csv_trace_and_charges() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("rows.csv");
    let trace = dir.path().join("trace.jsonl");
    let charged = dir.path().join("charged.csv");
    let out = relaxsim(&[
        "run-sort", "--n", "300", "--scheduler", "adversarial", "--k", "4", "--strategy", "delay-top", "--seeds", "3",
        "--out", p(&csv), "--trace", p(&trace), "--charged", p(&charged),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let rows = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(rows.lines().count(), 4);
    assert!(rows.starts_with("seed,n,scheduler,k,q,strategy,"));

    let lines: Vec<serde_json::Value> = std::fs::read_to_string(&trace)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    let (footer, steps) = lines.split_last().unwrap();
    assert!(steps.len() >= 300);
    for (idx, s) in steps.iter().enumerate() {
        assert_eq!(s["t"].as_u64(), Some(idx as u64));
        assert!(s["rank"].as_u64().unwrap() <= 4);
        assert!(s["label"].as_u64().unwrap() >= 1);
    }
    assert!(footer["max_rank_observed"].as_u64().unwrap() <= 4);
    assert!(footer["inversion_histogram"].is_array());

    let charged = std::fs::read_to_string(&charged).unwrap();
    assert_eq!(charged.lines().next(), Some("i,j,count"));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["violations"], 0);
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let out = relaxsim(&["run-delaunay", "--n", "120", "--scheduler", "multiqueue", "--q", "4", "--seeds", "2", "--out", p(path)]);
        assert_eq!(code(&out), 0);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "[scheduler]\nkind = \"adversarial\"\nk = 8\nseeds = 2\n").unwrap();
    let csv = dir.path().join("rows.csv");
    let out = relaxsim(&["run-sort", "--n", "100", "--config", p(&cfg), "--k", "2", "--out", p(&csv)]);
    assert_eq!(code(&out), 0);
    let rows = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(rows.lines().count(), 3);
    assert!(rows.lines().skip(1).all(|l| l.contains(",adversarial,2,")));

    std::fs::write(&cfg, "[scheduler]\nkindd = \"exact\"\n").unwrap();
    assert_eq!(code(&relaxsim(&["run-sort", "--config", p(&cfg)])), 2);
}

#[test]
fn generated_inputs_feed_the_runners() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("g.gr");
    assert_eq!(code(&relaxsim(&["gen-graph", "--n", "400", "--m", "4000", "--seed", "3", "--out", p(&graph)])), 0);
    let out = relaxsim(&["run-sssp", "--graph", p(&graph), "--scheduler", "multiqueue", "--q", "8", "--seeds", "2"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let points = dir.path().join("p.tsv");
    assert_eq!(code(&relaxsim(&["gen-points", "--n", "60", "--out", p(&points)])), 0);
    let out = relaxsim(&["run-delaunay", "--points", p(&points), "--scheduler", "adversarial", "--check", "cross-check"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let keys = dir.path().join("keys.txt");
    std::fs::write(&keys, "5\n3\n9\n1\n").unwrap();
    let perm = dir.path().join("perm.txt");
    std::fs::write(&perm, "3\n2\n1\n0\n").unwrap();
    let out = relaxsim(&["run-sort", "--keys", p(&keys), "--perm", p(&perm)]);
    assert_eq!(code(&out), 0);

    let dag = dir.path().join("dag.tsv");
    std::fs::write(&dag, "1 2\n2 3\n1 4\n").unwrap();
    let events = dir.path().join("events.jsonl");
    let out = relaxsim(&["run-txsim", "--dag", p(&dag), "--n", "10", "--scheduler", "adversarial", "--k", "2", "--events", p(&events)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let first: serde_json::Value =
        serde_json::from_str(std::fs::read_to_string(&events).unwrap().lines().next().unwrap()).unwrap();
    assert_eq!(first["event"], "fetch");
}

#[test]
fn input_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.gr");
    std::fs::write(&bad, "p sp 3 2\na 1 2 5\na 2 4 7\n").unwrap();
    let out = relaxsim(&["run-sssp", "--graph", p(&bad)]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.gr:3"));
    assert_eq!(code(&relaxsim(&["run-sssp", "--graph", "/missing.gr"])), 2);
    assert_eq!(code(&relaxsim(&["run-sort", "--scheduler", "exact", "--k", "4"])), 2);
    assert_eq!(code(&relaxsim(&["run-txsim", "--scheduler", "multiqueue"])), 2);
    assert_eq!(code(&relaxsim(&["run-sort", "--seeds", "0"])), 2);
}

#[test]
fn failed_checks_exit_with_one() {
    // a single queue never inverts, so the 1/8 bound must fail
    let out = relaxsim(&["inversion-prob", "--q", "1", "--trials", "500", "--min-prob", "0.125"]);
    assert_eq!(code(&out), 1);
    let out = relaxsim(&["inversion-prob", "--q", "8", "--trials", "5000", "--min-prob", "0.125"]);
    assert_eq!(code(&out), 0);
    // with q = 1 there are no extra steps, so neither the per-n bound nor the slope holds
    let out = relaxsim(&["lower-bound", "--q", "1", "--n", "64,128,256", "--seeds", "3"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn lemma_audit_and_experiment_tables() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("audit.csv");
    let out = relaxsim(&["lemma-audit", "--n", "64", "--k", "2,4", "--seeds", "3", "--out", p(&csv)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    // 2 k values x 3 strategies
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 7);

    let spec = dir.path().join("exp.toml");
    let table = dir.path().join("table.csv");
    std::fs::write(
        &spec,
        format!(
            "kind = \"sssp-overhead\"\nn = [500, 1000]\nseeds = 2\nout = \"{}\"\n[schedulers]\nkinds = [\"exact\", \"multiqueue\"]\nq = [4, 8]\n",
            p(&table)
        ),
    )
    .unwrap();
    let out = relaxsim(&["experiment", p(&spec)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&table).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    // (exact + 2 multiqueue) x 2 sizes
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().filter(|r| r.contains(",exact,")).all(|r| r.contains(",1.0,")));
}
