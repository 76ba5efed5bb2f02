use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tracelift"))
}

fn bench(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/benchmarks")
        .join(rel)
}

fn run(cmd: &mut Command) -> Output {
    cmd.env_remove("RUST_LOG").output().expect("binary runs")
}

fn text(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

const P_HEADER: &str = "(define (domain tiny) (:requirements :strips :typing) (:types thing) (:predicates (p ?x - thing)))";

fn p_trace(instance: &str, init: &[&str], add: &[&str], del: &[&str]) -> String {
    let facts = |v: &[&str]| {
        v.iter()
            .map(|o| format!("(p {o})"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    format!(
        "(trace (:instance {instance}) (:objects a b - thing) (:init {}) (:step (:label act) (:add {}) (:del {})))",
        facts(init),
        facts(add),
        facts(del)
    )
}

fn gen_transport(dir: &Path) -> Vec<PathBuf> {
    let mut paths = Vec::new();
    for (i, p) in ["p01.pddl", "p02.pddl"].iter().enumerate() {
        let path = dir.join(format!("t{i}.trace"));
        let out = run(bin()
            .arg("gen")
            .arg("--domain")
            .arg(bench("transport/domain.pddl"))
            .arg("--problem")
            .arg(bench(&format!("transport/{p}")))
            .args(["--random-walk", "120", "--seed", &i.to_string(), "-o"])
            .arg(&path));
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        paths.push(path);
    }
    paths
}

#[test]
fn version_and_help() {
    let out = run(bin().arg("--version"));
    assert!(out.status.success());
    assert!(text(&out).starts_with("tracelift "));
    let out = run(bin().arg("--help"));
    assert!(out.status.success());
    for sub in ["synth", "gen", "eval", "gi"] {
        assert!(text(&out).contains(sub));
    }
}

#[test]
fn synth_output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let traces = gen_transport(dir.path());
    let synth = |workers: &str| {
        let out = run(bin()
            .arg("synth")
            .arg("--header")
            .arg(bench("transport/domain.pddl"))
            .args(&traces)
            .args(["--workers", workers]));
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        out.stdout
    };
    let first = synth("1");
    assert!(!first.is_empty());
    assert_eq!(first, synth("1"));
    assert_eq!(first, synth("4"));
}

#[test]
fn synth_then_eval_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let traces = gen_transport(dir.path());
    let learned = dir.path().join("learned.pddl");
    let cnf = dir.path().join("cnf");
    let out = run(bin()
        .arg("synth")
        .arg("--header")
        .arg(bench("transport/domain.pddl"))
        .args(&traces)
        .arg("-o")
        .arg(&learned)
        .arg("--debug-cnf")
        .arg(&cnf)
        .arg("--diagnostics"));
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary = text(&out);
    assert_eq!(summary.lines().count(), 3, "{summary}");
    assert!(summary
        .lines()
        .all(|l| l.contains(" k=") && l.contains(" pre=")));
    assert!(String::from_utf8_lossy(&out.stderr).contains("offenses="));
    for a in ["drive", "pick-up", "drop"] {
        let dimacs = fs::read_to_string(cnf.join(format!("{a}.cnf"))).unwrap();
        assert!(dimacs.lines().any(|l| l.starts_with("p cnf ")));
    }

    let json = dir.path().join("report.json");
    let out = run(bin()
        .arg("eval")
        .arg("--learned")
        .arg(&learned)
        .arg("--reference")
        .arg(bench("transport/domain.pddl"))
        .arg("--json")
        .arg(&json)
        .arg("--strict"));
    assert!(out.status.success());
    assert!(text(&out).contains("total"));
    assert!(text(&out).contains("strict fid."));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report["totals"]["minusE_tol"], 0);
    assert_eq!(report["totals"]["plusE_tol"], 0);
    assert_eq!(report["totals"]["minusP"], 0);
}

#[test]
fn budget_exhaustion_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let header = dir.path().join("header.pddl");
    fs::write(&header, P_HEADER).unwrap();
    // one changed object per step, yet no single-parameter action explains both
    let t1 = dir.path().join("a.trace");
    let t2 = dir.path().join("b.trace");
    fs::write(&t1, p_trace("one", &[], &["a"], &[])).unwrap();
    fs::write(&t2, p_trace("two", &["a", "b"], &[], &["a"])).unwrap();
    let synth = |extra: &str| {
        run(bin()
            .arg("synth")
            .arg("--header")
            .arg(&header)
            .arg(&t1)
            .arg(&t2)
            .args(["--param-budget-extra", extra]))
    };
    let out = synth("0");
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let out = synth("1");
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("act k=2"));
}

#[test]
fn input_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let header = dir.path().join("header.pddl");
    fs::write(&header, P_HEADER).unwrap();
    let bad = dir.path().join("bad.trace");
    fs::write(
        &bad,
        "(trace (:instance x) (:objects a - thing) (:init (q a)))",
    )
    .unwrap();
    let out = run(bin().arg("synth").arg("--header").arg(&header).arg(&bad));
    assert_eq!(out.status.code(), Some(1));
    let out = run(bin()
        .arg("synth")
        .arg("--header")
        .arg(dir.path().join("missing.pddl"))
        .arg(&bad));
    assert_eq!(out.status.code(), Some(1));
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "colour = 3\n").unwrap();
    let out = run(bin()
        .arg("--config")
        .arg(&cfg)
        .arg("synth")
        .arg("--header")
        .arg(&header)
        .arg(&bad));
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn gen_replays_plan_and_names_failing_step() {
    let out = run(bin()
        .arg("gen")
        .arg("--domain")
        .arg(bench("gripper/domain.pddl"))
        .arg("--problem")
        .arg(bench("gripper/p01.pddl"))
        .arg("--plan")
        .arg(bench("gripper/p01.plan")));
    assert!(out.status.success());
    assert_eq!(text(&out).matches("(:step").count(), 5);

    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("bad.plan");
    let good = fs::read_to_string(bench("gripper/p01.plan")).unwrap();
    let first = good.lines().find(|l| l.starts_with('(')).unwrap();
    fs::write(&plan, format!("{first}\n{first}\n")).unwrap();
    let out = run(bin()
        .arg("gen")
        .arg("--domain")
        .arg(bench("gripper/domain.pddl"))
        .arg("--problem")
        .arg(bench("gripper/p01.pddl"))
        .arg("--plan")
        .arg(&plan));
    assert_eq!(out.status.code(), Some(1));
    assert!(
        String::from_utf8_lossy(&out.stderr).contains("step 2"),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn gi_reports_mapping_or_not_isomorphic() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, body: &str| {
        let p = dir.path().join(name);
        fs::write(&p, body).unwrap();
        p
    };
    let path1 = write("g1", "nodes: a b c\na b\nb c\n");
    let path2 = write("g2", "nodes: x y z\n# comment\ny z\nx y\n");
    let tri = write("g3", "nodes: x y z\nx y\ny z\nx z\n");
    let bad = write("bad", "a b\n");

    let out = run(bin().arg("gi").arg(&path1).arg(&path2));
    assert!(out.status.success());
    let mapping = text(&out);
    assert!(
        ["iso: a->x b->y c->z", "iso: a->z b->y c->x"].contains(&mapping.trim()),
        "{mapping}"
    );
    let out = run(bin().arg("gi").arg(&path1).arg(&tri));
    assert!(out.status.success());
    assert_eq!(text(&out).trim(), "not-isomorphic");
    let out = run(bin().arg("gi").arg("--directed").arg(&path2).arg(&path1));
    assert!(out.status.success());
    assert!(text(&out).starts_with("iso: "));
    let out = run(bin().arg("gi").arg(&bad).arg(&path1));
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn random_walk_is_reproducible_from_seed() {
    let gen = |seed: &str| {
        let out = run(bin()
            .arg("gen")
            .arg("--domain")
            .arg(bench("hanoi/domain.pddl"))
            .arg("--problem")
            .arg(bench("hanoi/p01.pddl"))
            .args(["--random-walk", "50", "--seed", seed]));
        assert!(out.status.success());
        out.stdout
    };
    let a = gen("7");
    assert_eq!(a, gen("7"));
    assert_eq!(String::from_utf8_lossy(&a).matches("(:step").count(), 50);
    assert_ne!(a, gen("8"));
}

#[test]
fn eval_against_itself_and_with_missing_action() {
    let reference = bench("gripper/domain.pddl");
    let out = run(bin()
        .arg("eval")
        .arg("--learned")
        .arg(&reference)
        .arg("--reference")
        .arg(&reference));
    assert!(out.status.success());
    let table = text(&out);
    let total = table.lines().find(|l| l.starts_with("total")).unwrap();
    assert!(total.ends_with("1.000"), "{table}");

    let dir = tempfile::tempdir().unwrap();
    let full = fs::read_to_string(&reference).unwrap();
    let start = full.find("(:action move").unwrap();
    let end = full.find("(:action pick").unwrap();
    let trimmed = format!("{}{}", &full[..start], &full[end..]);
    let learned = dir.path().join("learned.pddl");
    fs::write(&learned, &trimmed).unwrap();
    let out = run(bin()
        .arg("eval")
        .arg("--learned")
        .arg(&learned)
        .arg("--reference")
        .arg(&reference));
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(text(&out).contains("unobserved: move"), "{}", text(&out));
}

#[test]
fn gi_identity_and_node_count_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g");
    fs::write(&g, "nodes: a b c d\na b\nb c\nc d\nd a\na c\n").unwrap();
    let out = run(bin().arg("gi").arg(&g).arg(&g));
    assert!(out.status.success());
    assert!(text(&out).starts_with("iso: "));
    let small = dir.path().join("small");
    fs::write(&small, "nodes: x y\nx y\n").unwrap();
    let out = run(bin().arg("gi").arg(&g).arg(&small));
    assert!(out.status.success());
    assert_eq!(text(&out).trim(), "not-isomorphic");
}

#[test]
fn malformed_trace_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let header = dir.path().join("header.pddl");
    fs::write(&header, P_HEADER).unwrap();
    let bad = dir.path().join("bad.trace");
    fs::write(
        &bad,
        "(trace (:instance x)\n  (:objects a - thing)\n  (:init (p a)\n",
    )
    .unwrap();
    let out = run(bin().arg("synth").arg("--header").arg(&header).arg(&bad));
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");
}
