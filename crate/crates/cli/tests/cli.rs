use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn beepsim(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_beepsim"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn beepsim")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn gen_writes_canonical_edge_lists() {
    let dir = tempfile::tempdir().unwrap();
    let o = beepsim(&["gen", "complete:3"], dir.path());
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "3\n0 1\n0 2\n1 2\n");

    let o = beepsim(&["gen", "--gen", "cliques:2"], dir.path());
    assert!(stdout(&o).starts_with("6\n"));

    let a = stdout(&beepsim(&["gen", "gnp:10,0.5", "--seed", "7"], dir.path()));
    let b = stdout(&beepsim(&["gen", "gnp:10,0.5", "--seed", "7"], dir.path()));
    let c = stdout(&beepsim(&["gen", "gnp:10,0.5", "--seed", "8"], dir.path()));
    assert_eq!(a, b);
    assert_ne!(a, c);

    let o = beepsim(&["gen", "ring:5", "--out", "r.txt"], dir.path());
    assert_eq!(code(&o), 0);
    assert_eq!(
        fs::read_to_string(dir.path().join("r.txt")).unwrap(),
        "5\n0 1\n0 4\n1 2\n2 3\n3 4\n"
    );
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["frobnicate"],
        vec!["gen", "gnp:10,1.5"],
        vec!["gen", "ring:2"],
        vec![
            "run",
            "--gen",
            "complete:3",
            "--algorithm",
            "nope",
            "--seed",
            "1",
        ],
        vec![
            "run",
            "--gen",
            "complete:3",
            "--schedule",
            "const:0",
            "--algorithm",
            "mis-global",
            "--seed",
            "1",
        ],
        vec!["run", "--gen", "complete:3", "--f1", "0.5", "--seed", "1"],
        vec!["run", "--seed", "1"],
        vec!["run", "--graph", "missing.txt", "--seed", "1"],
        vec!["experiment"],
        vec!["experiment", "no-such-preset", "--seed", "1"],
    ] {
        let o = beepsim(&args, dir.path());
        assert_eq!(
            code(&o),
            1,
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert!(!o.stderr.is_empty(), "{args:?}");
    }
    assert_eq!(code(&beepsim(&["--help"], dir.path())), 0);
}

#[test]
fn run_reports_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = beepsim(
        &[
            "run",
            "--gen",
            "complete:4",
            "--algorithm",
            "coloring-feedback",
            "--seed",
            "3",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.contains("PASS"), "{text}");
    assert!(text.contains("(4 colours)"), "{text}");

    // A fixed probability of one on an edge never breaks symmetry.
    let o = beepsim(
        &[
            "run",
            "--gen",
            "complete:2",
            "--algorithm",
            "mis-global",
            "--schedule",
            "const:1",
            "--max-rounds",
            "50",
            "--seed",
            "1",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 2);
    assert!(stdout(&o).contains("UNTERMINATED after 50 rounds"));

    let o = beepsim(
        &[
            "run",
            "--gen",
            "gnp:30,0.2",
            "--seed",
            "9",
            "--format",
            "json",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    let json: Value = serde_json::from_str(&stdout(&o)).unwrap();
    for key in [
        "graph",
        "nodes",
        "edges",
        "max_degree",
        "algorithm",
        "outcome",
        "rounds_used",
        "time_steps",
        "beeps_per_node",
        "terminated",
        "seed",
        "verified",
        "verdict",
    ] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
    assert_eq!(json["nodes"], 30);
    assert_eq!(json["verified"], true);
    assert_eq!(json["outcome"]["kind"], "mis");
    assert_eq!(
        json["time_steps"].as_u64().unwrap(),
        2 * json["rounds_used"].as_u64().unwrap()
    );

    let o = beepsim(
        &["run", "--gen", "path:6", "--seed", "2", "--format", "csv"],
        dir.path(),
    );
    let csv = stdout(&o);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("algorithm,nodes,edges,rounds"));
    assert!(lines[1].starts_with("mis-feedback,6,5,"));
}

#[test]
fn run_without_seed_prints_the_chosen_seed() {
    let dir = tempfile::tempdir().unwrap();
    let o = beepsim(&["run", "--gen", "ring:8"], dir.path());
    assert_eq!(code(&o), 0);
    let err = String::from_utf8(o.stderr.clone()).unwrap();
    let seed: u64 = err
        .lines()
        .find_map(|l| l.strip_prefix("seed: "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(stdout(&o).contains(&format!("seed: {seed}")));
}

#[test]
fn transcript_is_json_lines_per_round() {
    let dir = tempfile::tempdir().unwrap();
    let o = beepsim(
        &[
            "run",
            "--gen",
            "gnp:15,0.4",
            "--seed",
            "5",
            "--transcript",
            "t.jsonl",
            "--format",
            "json",
            "--out",
            "r.json",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    let report: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    let lines = fs::read_to_string(dir.path().join("t.jsonl")).unwrap();
    let records: Vec<Value> = lines
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(
        records.len() as u64,
        report["rounds_used"].as_u64().unwrap()
    );
    for (i, r) in records.iter().enumerate() {
        assert_eq!(r["round"].as_u64().unwrap(), i as u64 + 1);
        assert!(r["first"].is_array() && r["second"].is_array());
    }
    let beeps: usize = records
        .iter()
        .map(|r| r["first"].as_array().unwrap().len())
        .sum();
    let counted: u64 = report["beeps_per_node"]
        .as_array()
        .unwrap()
        .iter()
        .map(|b| b.as_u64().unwrap())
        .sum();
    assert_eq!(beeps as u64, counted);
}

#[test]
fn verify_accepts_good_and_rejects_bad_outcomes() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("g.txt"), "3\n0 1\n1 2\n").unwrap();
    fs::write(
        dir.path().join("good.json"),
        r#"{"kind":"mis","members":[0,2]}"#,
    )
    .unwrap();
    fs::write(
        dir.path().join("notmax.json"),
        r#"{"kind":"mis","members":[0]}"#,
    )
    .unwrap();
    fs::write(
        dir.path().join("badcol.json"),
        r#"{"kind":"coloring","colors":[1,1,2]}"#,
    )
    .unwrap();
    fs::write(
        dir.path().join("grundy.json"),
        r#"{"kind":"coloring","colors":[1,2,1]}"#,
    )
    .unwrap();

    let o = beepsim(
        &["verify", "--graph", "g.txt", "--outcome", "good.json"],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("PASS"));
    let o = beepsim(
        &["verify", "--graph", "g.txt", "--outcome", "grundy.json"],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    for bad in ["notmax.json", "badcol.json"] {
        let o = beepsim(
            &["verify", "--graph", "g.txt", "--outcome", bad],
            dir.path(),
        );
        assert_eq!(code(&o), 1, "{bad}");
        assert!(stdout(&o).starts_with("FAIL"), "{bad}");
    }

    // A full `run` report is accepted as an outcome file.
    beepsim(
        &["gen", "gnp:20,0.3", "--seed", "4", "--out", "h.txt"],
        dir.path(),
    );
    let o = beepsim(
        &[
            "run",
            "--graph",
            "h.txt",
            "--seed",
            "4",
            "--algorithm",
            "coloring-feedback",
            "--format",
            "json",
            "--out",
            "rep.json",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    let o = beepsim(
        &["verify", "--graph", "h.txt", "--outcome", "rep.json"],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}

#[test]
fn experiment_writes_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = beepsim(
        &[
            "experiment",
            "paper-gnp",
            "--seed",
            "1",
            "--trials",
            "3",
            "--out",
            "out/pg",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("out/pg.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "algorithm,family,param,n,mean_rounds,sd_rounds,mean_beeps,censored_fraction"
    );
    assert_eq!(lines.len(), 11);
    let ns: Vec<&str> = lines[1..]
        .iter()
        .map(|l| l.split(',').nth(3).unwrap())
        .collect();
    assert_eq!(
        ns,
        ["20", "40", "60", "80", "100", "120", "140", "160", "180", "200"]
    );

    let json: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/pg.json")).unwrap()).unwrap();
    assert_eq!(json["schema_version"], 1);
    assert_eq!(json["total_runs"], 30);
    assert_eq!(json["config"]["trials"], 3);

    let o = beepsim(
        &[
            "experiment",
            "lower-bound",
            "--seed",
            "2",
            "--trials",
            "2",
            "--out",
            "lb",
            "--format",
            "json",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    let json: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let series = json["series"].as_array().unwrap();
    assert_eq!(series.len(), 2);
    for s in series {
        assert_eq!(s["points"].as_array().unwrap().len(), 10);
        assert!(s["fit_log"]["residual"].is_number());
        assert!(s["fit_log_squared"]["residual"].is_number());
    }
    assert_eq!(
        fs::read_to_string(dir.path().join("lb.json")).unwrap(),
        stdout(&o)
    );
}

#[test]
fn config_files_supply_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("run.toml"),
        "gen = \"complete:5\"\nalgorithm = \"coloring-feedback\"\nseed = 12\nformat = \"json\"\n",
    )
    .unwrap();
    let o = beepsim(&["run", "--config", "run.toml"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let json: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(json["algorithm"], "coloring-feedback");
    assert_eq!(json["seed"], 12);
    let o = beepsim(&["run", "--config", "run.toml", "--seed", "13"], dir.path());
    let json: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(json["seed"], 13);

    fs::write(
        dir.path().join("exp.toml"),
        "name = \"rings\"\nfamily = \"ring\"\nsweep = [5, 10]\nalgorithm = [\"mis-feedback\", \"coloring-feedback\"]\ntrials = 4\nseed = 3\n",
    )
    .unwrap();
    let o = beepsim(&["experiment", "--config", "exp.toml"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("rings.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);

    fs::write(dir.path().join("typo.toml"), "sed = 3\n").unwrap();
    let o = beepsim(
        &["run", "--gen", "ring:5", "--config", "typo.toml"],
        dir.path(),
    );
    assert_eq!(code(&o), 1);
}
