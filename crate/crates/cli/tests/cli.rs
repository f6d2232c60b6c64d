use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use stategen_core::document::render_plain;
use stategen_core::graph::build_graph;
use stategen_core::{effective_set, parse_model, prefix_suite};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn stategen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stategen"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn model() -> String {
    fixture("rtvm.scm").display().to_string()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_reports_counts() {
    let o = stategen(&["validate", &model()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "valid: 6 states, 8 transitions\n");
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let unreachable = dir.path().join("u.scm");
    fs::write(&unreachable, "statechart U\nevent go\nstate A kind = initial\nstate B\nstate Z\ntransition t : A -> B on go\n").unwrap();
    let o = stategen(&["validate", path_str(&unreachable)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stderr(&o).contains("state Z is unreachable"),
        "{}",
        stderr(&o)
    );

    let broken = dir.path().join("b.scm");
    fs::write(
        &broken,
        "statechart B\nstate A kind = initial\ntransition t : A -> Q\n",
    )
    .unwrap();
    let o = stategen(&["validate", path_str(&broken)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("b.scm:3:"), "{}", stderr(&o));

    let o = stategen(&["validate", path_str(&dir.path().join("missing.scm"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors_name_the_flag() {
    let o = stategen(&["generate", &model(), "--method", "bogus"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--method"), "{}", stderr(&o));
    let o = stategen(&["generate", &model(), "--method", "prefix", "--embed"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--embed"));
    let o = stategen(&[
        "minimize",
        &model(),
        "--suite",
        "x",
        "--mode",
        "setcover",
        "--criteria",
        "nodes",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--criteria"));
}

#[test]
fn generate_prefix_lists_the_suite() {
    let o = stategen(&["generate", &model(), "--method", "prefix"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 19);
    assert_eq!(lines[0], "tc1 = IN-(a)-IDL");
    assert_eq!(lines[18], "tc19 = IN-(a)-IDL-(b)-TS-(f)-EP-(h)-IDL");
}

#[test]
fn generate_then_minimize_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let suite = dir.path().join("suite.json");
    let reduced = dir.path().join("reduced.txt");
    assert!(stategen(&[
        "generate",
        &model(),
        "--method",
        "prefix",
        "-o",
        path_str(&suite)
    ])
    .status
    .success());
    let o = stategen(&[
        "minimize",
        &model(),
        "--suite",
        path_str(&suite),
        "--mode",
        "subsumption",
        "--nc-table",
        "--plain",
        "-o",
        path_str(&reduced),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("NC(tc7) = {tc13, tc14, tc16, tc17}\n"));
    assert!(out.contains("retained 3 of 19 cases:\n"));

    let g = build_graph(&parse_model(&fs::read_to_string(fixture("rtvm.scm")).unwrap()).unwrap())
        .unwrap();
    let expected = render_plain(&effective_set(&prefix_suite(&g)));
    assert_eq!(fs::read_to_string(&reduced).unwrap(), expected);
    assert!(out.ends_with(&expected));
}

#[test]
fn plain_suites_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let suite = dir.path().join("suite.txt");
    fs::write(
        &suite,
        "IN-(a)-IDL-(b)-TS-(f)-EP-(h)-IDL\nIN-(a)-IDL-(b)-TS-(e)-OP\n",
    )
    .unwrap();
    let o = stategen(&["coverage", &model(), "--suite", path_str(&suite)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("state             5/6"), "{out}");
    assert!(out.contains("transition        5/8"), "{out}");
    assert!(out.contains("condition           -      n/a"), "{out}");

    fs::write(&suite, "IN-(b)-TS\n").unwrap();
    let o = stategen(&["coverage", &model(), "--suite", path_str(&suite)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn setcover_mode() {
    let dir = tempfile::tempdir().unwrap();
    let suite = dir.path().join("suite.json");
    stategen(&[
        "generate",
        &model(),
        "--method",
        "prefix",
        "-o",
        path_str(&suite),
    ]);
    let o = stategen(&[
        "minimize",
        &model(),
        "--suite",
        path_str(&suite),
        "--mode",
        "setcover",
        "--criteria",
        "transition",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("retained 2 of 19 cases:\ntc14 = "));
}

#[test]
fn ktrans_and_faults() {
    let o = stategen(&["generate", &model(), "--method", "ktrans", "--k", "2"]);
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 12);
    assert!(out.starts_with("tc1 = IN-(a)-IDL-(b)-TS\n"));
    let o = stategen(&[
        "generate",
        &model(),
        "--method",
        "ktrans",
        "--k",
        "1",
        "--embed",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o)
        .lines()
        .all(|l| l.contains("= IN-") && l.ends_with("-IDL")));
    let o = stategen(&["generate", &model(), "--method", "faults"]);
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 25);
    assert_eq!(
        out.lines().filter(|l| l.ends_with("(transient)")).count(),
        5
    );
    assert!(out.starts_with("f1 = IN-(selectTicket)-!\n"), "{out}");
}

#[test]
fn graph_and_dot() {
    let dir = tempfile::tempdir().unwrap();
    let dot = dir.path().join("g.dot");
    let o = stategen(&["graph", &model(), "--dot", path_str(&dot)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("transition pairs (12):\n  (a, b)\n"));
    assert!(fs::read_to_string(&dot)
        .unwrap()
        .starts_with("digraph \"RTVM\" {"));
}

#[test]
fn run_and_trace_coverage() {
    let dir = tempfile::tempdir().unwrap();
    let traces = dir.path().join("traces.json");
    let o = stategen(&[
        "run",
        &model(),
        "--scenario",
        path_str(&fixture("rtvm.scn")),
        "--report",
        "-o",
        path_str(&traces),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("more_money: fired (a, b, c, d, e, g, h), final state IDL, completed\n"));
    assert!(out.contains("condition         3/3"), "{out}");
    let o = stategen(&["coverage", &model(), "--trace", path_str(&traces)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("condition         3/3"));
}

#[test]
fn strict_run_fails_on_refusal() {
    let dir = tempfile::tempdir().unwrap();
    let scn = dir.path().join("bad.scn");
    fs::write(&scn, "scenario bad\npowerOn\npowerOn\n").unwrap();
    let o = stategen(&["run", &model(), "--scenario", path_str(&scn)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("refused powerOn in IDL"));
    let o = stategen(&["run", &model(), "--scenario", path_str(&scn), "--strict"]);
    assert_eq!(o.status.code(), Some(1));
    fs::write(&scn, "scenario bad\nfly\n").unwrap();
    let o = stategen(&["run", &model(), "--scenario", path_str(&scn)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(
        stderr(&o).contains("bad.scn:2:1: resolve error"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let d = |name: &str| dir.path().join(name);
    let scn = fixture("rtvm.scn");
    let runs: Vec<Vec<String>> = vec![
        vec![
            "generate".into(),
            model(),
            "--method".into(),
            "prefix".into(),
            "-o".into(),
        ],
        vec![
            "generate".into(),
            model(),
            "--method".into(),
            "faults".into(),
            "-o".into(),
        ],
        vec![
            "generate".into(),
            model(),
            "--method".into(),
            "ktrans".into(),
            "--k".into(),
            "3".into(),
            "--embed".into(),
            "-o".into(),
        ],
        vec![
            "run".into(),
            model(),
            "--scenario".into(),
            path_str(&scn).into(),
            "-o".into(),
        ],
        vec!["graph".into(), model(), "--dot".into()],
    ];
    for (i, args) in runs.iter().enumerate() {
        let mut outputs = Vec::new();
        for round in 0..2 {
            let out = d(&format!("{i}-{round}"));
            let mut full: Vec<&str> = args.iter().map(String::as_str).collect();
            full.push(path_str(&out));
            let o = stategen(&full);
            assert!(o.status.success(), "{:?}: {}", args, stderr(&o));
            outputs.push((o.stdout, fs::read(&out).unwrap()));
        }
        assert_eq!(outputs[0], outputs[1], "{args:?}");
    }
    let suite = d("0-0");
    let mut reports = Vec::new();
    for round in 0..2 {
        let out = d(&format!("cov-{round}"));
        let o = stategen(&[
            "coverage",
            &model(),
            "--suite",
            path_str(&suite),
            "-o",
            path_str(&out),
        ]);
        assert!(o.status.success());
        reports.push(fs::read(&out).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
}
