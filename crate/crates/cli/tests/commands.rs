use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::Command;

use kgrules_cli::commands;
use kgrules_cli::config::{RunConfig, Settings};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CAPITALS: &str = "Beijing\tCapital_of\tChina\nBeijing\tCity_in\tChina\n\
                       Beijing\tIs_a\tPolitical Center\nShanghai\tCity_in\tChina\n";

fn dataset(dir: &Path, train: &str, valid: &str, test: &str) {
    fs::create_dir_all(dir).unwrap();
    fs::write(dir.join("train.txt"), train).unwrap();
    fs::write(dir.join("valid.txt"), valid).unwrap();
    fs::write(dir.join("test.txt"), test).unwrap();
}

fn settings(root: &Path, pairs: &[&str]) -> (Settings, RunConfig) {
    let mut s = Settings::default();
    s.set("dataset-dir", root.join("data").to_str().unwrap()).unwrap();
    s.set("out-dir", root.join("out").to_str().unwrap()).unwrap();
    for p in pairs {
        s.set_pair(p).unwrap();
    }
    let cfg = s.resolve().unwrap();
    (s, cfg)
}

const PERMISSIVE: [&str; 4] = ["conf=0", "supp=0", "hc=0", "bs=50"];

#[test]
fn learn_writes_capital_rules() {
    let dir = tempfile::tempdir().unwrap();
    dataset(&dir.path().join("data"), CAPITALS, "", "");
    let mut pairs = PERMISSIVE.to_vec();
    pairs.push("targets=Capital_of");
    let (s, cfg) = settings(dir.path(), &pairs);
    let summary = commands::learn(&cfg, &s).unwrap();
    assert_eq!(summary.files.len(), 1);
    let text = fs::read_to_string(cfg.rules_dir().join("Capital_of.tsv")).unwrap();
    assert!(text.starts_with("# measure\tSP\tBG\tHC\tkind\trule\n"));
    assert!(text.contains("\tCAR\tCapital_of(X,Y) <- City_in(X,Y)\n"), "{text}");
    assert!(text.contains("\tBAR\tCapital_of(X,China) <- Is_a(X,\"Political Center\")\n"), "{text}");
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(&summary.manifest).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 42);
    assert_eq!(manifest["config"]["targets"], "Capital_of");
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
    assert_eq!(manifest["dataset"]["sha256"]["train.txt"].as_str().unwrap().len(), 64);
    assert_eq!(manifest["counts"]["by_kind"]["CAR"]["all"], 1);
}

#[test]
fn all_targets_get_a_file_even_when_empty() {
    let dir = tempfile::tempdir().unwrap();
    dataset(&dir.path().join("data"), CAPITALS, "", "");
    // Default thresholds reject everything on this graph.
    let (s, cfg) = settings(dir.path(), &["bs=50"]);
    commands::learn(&cfg, &s).unwrap();
    let names: BTreeSet<String> = fs::read_dir(cfg.rules_dir())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    let expected: BTreeSet<String> = ["Capital_of.tsv", "City_in.tsv", "Is_a.tsv"].map(String::from).into();
    assert_eq!(names, expected);
    for n in names {
        let text = fs::read_to_string(cfg.rules_dir().join(n)).unwrap();
        assert_eq!(text.lines().count(), 1, "{text}");
    }
}

fn synthetic(seed: u64, entities: usize, predicates: usize, triples: usize) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = BTreeSet::new();
    while seen.len() < triples {
        // Skew toward low predicate ids so some targets are large.
        let p = (rng.gen::<f64>().powi(2) * predicates as f64) as usize;
        let s = rng.gen_range(0..entities);
        let o = rng.gen_range(0..entities);
        if s != o {
            seen.insert((s, p, o));
        }
    }
    seen.iter().map(|(s, p, o)| format!("e{s}\tp{p}\te{o}\n")).collect()
}

#[test]
fn learning_is_deterministic_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    dataset(&dir.path().join("data"), &synthetic(1, 60, 4, 300), "", "");
    let read_all = |cfg: &RunConfig| -> Vec<(String, Vec<u8>)> {
        let mut v: Vec<_> = fs::read_dir(cfg.rules_dir())
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (e.file_name().into_string().unwrap(), fs::read(e.path()).unwrap())
            })
            .collect();
        v.sort();
        v
    };
    let (s, cfg) = settings(dir.path(), &["bs=200", "supp=1", "workers=4", "seed=9"]);
    commands::learn(&cfg, &s).unwrap();
    let first = read_all(&cfg);
    assert!(first.iter().any(|(_, b)| b.iter().filter(|&&c| c == b'\n').count() > 1));
    let (s, cfg) = settings(dir.path(), &["bs=200", "supp=1", "workers=1", "seed=9"]);
    commands::learn(&cfg, &s).unwrap();
    assert_eq!(read_all(&cfg), first);
}

#[test]
fn bench_eval_on_an_empty_rule_file_is_header_only() {
    let dir = tempfile::tempdir().unwrap();
    dataset(&dir.path().join("data"), CAPITALS, "", "");
    let (_, cfg) = settings(dir.path(), &[]);
    let rules = dir.path().join("empty.tsv");
    fs::write(&rules, "# measure\tSP\tBG\tHC\tkind\trule\n").unwrap();
    let timings = commands::bench_eval(&cfg, &rules).unwrap();
    assert!(timings.is_empty());
    let report = fs::read_to_string(cfg.out_dir.join("bench_eval.tsv")).unwrap();
    assert_eq!(report, "group\trules\ttemplates\tcollective_ms\tbaseline_ms\tspeedup\n");
}

#[test]
fn collective_evaluation_is_faster_for_length_two_rules() {
    let dir = tempfile::tempdir().unwrap();
    dataset(&dir.path().join("data"), &synthetic(3, 2000, 6, 10_000), "", "");
    let (s, cfg) = settings(
        dir.path(),
        &["bs=500", "len=2", "ins-car=ins2-car2", "supp=2", "targets=p0,p1", "workers=2"],
    );
    commands::learn(&cfg, &s).unwrap();
    let timings = commands::bench_eval(&cfg, &cfg.rules_dir()).unwrap();
    let row = timings
        .iter()
        .find(|t| t.group.label() == "len=2")
        .expect("no length-2 instantiated rules learned");
    assert!(row.rules > row.templates, "{row:?}");
    assert!(row.collective < row.baseline, "{row:?}");
}

#[test]
fn analyze_overfit_writes_both_reports() {
    let dir = tempfile::tempdir().unwrap();
    let all = synthetic(5, 80, 4, 600);
    let lines: Vec<&str> = all.lines().collect();
    let n = lines.len();
    let join = |s: &[&str]| s.iter().map(|l| format!("{l}\n")).collect::<String>();
    dataset(
        &dir.path().join("data"),
        &join(&lines[..n * 6 / 10]),
        &join(&lines[n * 6 / 10..n * 8 / 10]),
        &join(&lines[n * 8 / 10..]),
    );
    let (s, cfg) = settings(dir.path(), &["bs=200", "supp=1", "len=2", "ins-car=ins2-car2", "thetas=0,0.1,0.5"]);
    commands::learn(&cfg, &s).unwrap();
    let out = commands::analyze_overfit(&cfg).unwrap();
    assert_eq!(out.reports.len(), 6);
    let csv = fs::read_to_string(cfg.out_dir.join("theta_sweep.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "theta,ORP_all,precision@50");
    assert_eq!(rows.len(), 4);
    assert!(rows[1].starts_with("0,"));
    // θ = 0 keeps every rule, so it matches the unvalidated report.
    assert_eq!(out.sweep[0].kept, out.reports[2].rules);
    assert!(out.sweep.windows(2).all(|w| w[1].kept <= w[0].kept));
    let tsv = fs::read_to_string(cfg.out_dir.join("overfit.tsv")).unwrap();
    assert_eq!(tsv.lines().count(), 7);
    assert!(tsv.lines().next().unwrap().ends_with("\tundefined"));
}

#[test]
fn kgc_writes_metrics_and_debug() {
    let dir = tempfile::tempdir().unwrap();
    dataset(&dir.path().join("data"), CAPITALS, "", "Shanghai\tCapital_of\tChina\n");
    let mut pairs = PERMISSIVE.to_vec();
    pairs.push("targets=Capital_of");
    let (s, cfg) = settings(dir.path(), &pairs);
    commands::learn(&cfg, &s).unwrap();
    let rep = commands::kgc(&cfg, true).unwrap();
    assert_eq!(rep.overall.queries, 2);
    // Beijing is filtered from the head query, leaving Shanghai first.
    assert_eq!(rep.overall.mrr, 1.0);
    let metrics = fs::read_to_string(cfg.out_dir.join("kgc_metrics.tsv")).unwrap();
    let lines: Vec<&str> = metrics.lines().collect();
    assert_eq!(lines[0], "predicate\tqueries\tMRR\thits@1\thits@3\thits@10");
    assert!(lines.last().unwrap().starts_with("ALL\t2\t1.0000"));
    let debug = fs::read_to_string(cfg.out_dir.join("kgc_debug.tsv")).unwrap();
    assert!(debug.contains("Capital_of(?,China)\tShanghai\t1\t"), "{debug}");
}

#[test]
fn validation_filter_can_empty_the_rule_set() {
    let dir = tempfile::tempdir().unwrap();
    dataset(&dir.path().join("data"), CAPITALS, "Shanghai\tIs_a\tCity\n", "Shanghai\tCapital_of\tChina\n");
    let mut pairs = PERMISSIVE.to_vec();
    pairs.extend(["targets=Capital_of", "validation=true"]);
    let (s, cfg) = settings(dir.path(), &pairs);
    commands::learn(&cfg, &s).unwrap();
    let rep = commands::kgc(&cfg, false).unwrap();
    assert_eq!(rep.overall.queries, 2);
    assert_eq!(rep.overall.mrr, 0.0);
}

#[test]
fn missing_rule_files_are_named() {
    let dir = tempfile::tempdir().unwrap();
    dataset(&dir.path().join("data"), CAPITALS, "Shanghai\tIs_a\tCity\n", "Shanghai\tCapital_of\tChina\n");
    let (_, cfg) = settings(dir.path(), &["targets=Capital_of,Is_a"]);
    let err = commands::kgc(&cfg, false).unwrap_err().to_string();
    assert!(err.contains("Capital_of, Is_a"), "{err}");
    let err = commands::analyze_overfit(&cfg).unwrap_err().to_string();
    assert!(err.contains("Capital_of"), "{err}");
}

#[test]
fn resplit_is_six_two_two_and_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("src");
    let all = synthetic(7, 50, 3, 100);
    let lines: Vec<&str> = all.lines().collect();
    let join = |s: &[&str]| s.iter().map(|l| format!("{l}\n")).collect::<String>();
    dataset(&src, &join(&lines[..70]), &join(&lines[70..85]), &join(&lines[85..]));
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(commands::resplit(&src, &a, 1).unwrap(), [60, 20, 20]);
    commands::resplit(&src, &b, 1).unwrap();
    let mut pooled = BTreeSet::new();
    for name in ["train.txt", "valid.txt", "test.txt"] {
        let text = fs::read_to_string(a.join(name)).unwrap();
        assert_eq!(text, fs::read_to_string(b.join(name)).unwrap());
        pooled.extend(text.lines().map(String::from));
    }
    assert_eq!(pooled, lines.iter().map(|l| l.to_string()).collect());
    commands::resplit(&src, &b, 2).unwrap();
    assert_ne!(
        fs::read_to_string(a.join("train.txt")).unwrap(),
        fs::read_to_string(b.join("train.txt")).unwrap()
    );
}

#[test]
fn binary_reports_errors_with_nonzero_exit() {
    let out = Command::new(env!("CARGO_BIN_EXE_kgrules"))
        .args(["learn", "--set", "len=2"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("may not exceed len"), "{err}");
    let out = Command::new(env!("CARGO_BIN_EXE_kgrules")).arg("keys").output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("grounding-cap"));
}
