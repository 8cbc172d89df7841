//! The `learn`, `bench-eval`, `analyze-overfit`, `kgc` and `resplit` pipelines.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use kgrules::bench::{compare_modes, GroupTiming};
use kgrules::evaluate::{
    annotate_precisions, overfit_report, theta_sweep, validation_filter, OverfitConfig, OverfitReport, RuleType,
};
use kgrules::kgc::{evaluate, KgcConfig, KgcReport, Query};
use kgrules::rule::{Rule, RuleKind, Slot};
use kgrules::specialize::{learn_all, predicates_with_instances, quality_tags, rescore, LearnOutcome, Measure, ScoredRule};
use kgrules::store::{PredicateId, SplitSet};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::config::{RunConfig, Settings, Targets};
use crate::rulefile;

const SPLIT_FILES: [&str; 3] = ["train.txt", "valid.txt", "test.txt"];

/// Runs `f` on a pool of `workers` threads.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
    Ok(pool.install(f))
}

pub fn load_split(cfg: &RunConfig) -> Result<SplitSet> {
    if cfg.dataset_dir.as_os_str().is_empty() {
        bail!("no dataset directory given (set dataset-dir)");
    }
    SplitSet::load_dir(&cfg.dataset_dir).with_context(|| format!("loading dataset {}", cfg.dataset_dir.display()))
}

pub fn resolve_targets(cfg: &RunConfig, split: &SplitSet) -> Result<Vec<PredicateId>> {
    match &cfg.targets {
        Targets::All => Ok(predicates_with_instances(&split.train)),
        Targets::Named(names) => {
            let unknown: Vec<&str> = names
                .iter()
                .filter(|n| split.vocab.predicate_id(n).is_none())
                .map(String::as_str)
                .collect();
            if !unknown.is_empty() {
                bail!("unknown target predicates: {}", unknown.join(", "));
            }
            Ok(names.iter().map(|n| split.vocab.predicate_id(n).unwrap()).collect())
        }
    }
}

fn sha256_file(path: &Path) -> Result<String> {
    let mut f = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(hex::encode(h.finalize()))
}

fn dataset_checksums(dir: &Path) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for name in SPLIT_FILES {
        let p = dir.join(name);
        if p.exists() {
            out.insert(name.to_string(), sha256_file(&p)?);
        }
    }
    Ok(out)
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

#[derive(Debug)]
pub struct LearnSummary {
    pub outcomes: Vec<LearnOutcome>,
    pub files: Vec<PathBuf>,
    pub manifest: PathBuf,
}

fn kind_label(r: &Rule) -> &'static str {
    r.kind().as_str()
}

/// Rule counts by kind and quality level, as reported in the manifest.
fn rule_counts(outcomes: &[LearnOutcome], measure: Measure) -> serde_json::Value {
    let mut counts: BTreeMap<&str, BTreeMap<&str, usize>> = BTreeMap::new();
    let mut by_len: BTreeMap<String, usize> = BTreeMap::new();
    for r in outcomes.iter().flat_map(|o| &o.rules) {
        let tags = quality_tags(&r.stats, measure);
        let row = counts.entry(kind_label(&r.rule)).or_default();
        *row.entry("all").or_default() += 1;
        if tags.high {
            *row.entry("high").or_default() += 1;
        }
        if tags.extreme {
            *row.entry("extreme").or_default() += 1;
        }
        *by_len.entry(RuleType::of(&r.rule).label()).or_default() += 1;
    }
    json!({ "by_kind": counts, "by_type": by_len })
}

pub fn learn(cfg: &RunConfig, settings: &Settings) -> Result<LearnSummary> {
    let started = Instant::now();
    let split = load_split(cfg)?;
    let targets = resolve_targets(cfg, &split)?;
    log::info!(
        "learning {} targets over {} training triples",
        targets.len(),
        split.train.num_triples()
    );
    let outcomes = with_workers(cfg.workers, || learn_all(&split, &targets, &cfg.learn))??;
    let names = rulefile::file_names(&split.vocab);
    let dir = cfg.rules_dir();
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut files = Vec::new();
    for o in &outcomes {
        let path = dir.join(&names[&o.target]);
        write(&path, &rulefile::render(&o.rules, cfg.learn.score.measure, &split.vocab))?;
        files.push(path);
    }
    let per_target: Vec<serde_json::Value> = outcomes
        .iter()
        .map(|o| {
            json!({
                "predicate": split.vocab.predicate_name(o.target),
                "rules": o.rules.len(),
                "abstract_rules": o.abstract_rules,
                "processed_abstract_rules": o.processed,
                "paths": o.paths,
                "generalization_stop": o.generalization_stop.map(|s| format!("{s:?}")),
                "constraint_hit": o.constraint_hit,
                "seconds": o.elapsed.as_secs_f64(),
            })
        })
        .collect();
    let manifest = json!({
        "command": "learn",
        "config": settings.echo(),
        "config_hash": settings.hash(),
        "seed": cfg.learn.gen.seed,
        "workers": cfg.workers,
        "dataset": {
            "dir": cfg.dataset_dir.display().to_string(),
            "sha256": dataset_checksums(&cfg.dataset_dir)?,
            "train_triples": split.train.num_triples(),
            "valid_triples": split.valid.len(),
            "test_triples": split.test.len(),
            "overlap_dropped": split.overlap_dropped,
        },
        "wall_seconds": started.elapsed().as_secs_f64(),
        "counts": rule_counts(&outcomes, cfg.learn.score.measure),
        "targets": per_target,
    });
    let manifest_path = cfg.out_dir.join("manifest.json");
    write(&manifest_path, &serde_json::to_string_pretty(&manifest)?)?;
    Ok(LearnSummary {
        outcomes,
        files,
        manifest: manifest_path,
    })
}

/// Loads the rule files of `targets`, failing with the list of missing ones.
pub fn load_target_rules(cfg: &RunConfig, split: &SplitSet, targets: &[PredicateId]) -> Result<Vec<rulefile::StoredRule>> {
    let names = rulefile::file_names(&split.vocab);
    let dir = cfg.rules_dir();
    let missing: Vec<&str> = targets
        .iter()
        .filter(|t| !dir.join(&names[t]).exists())
        .map(|&t| split.vocab.predicate_name(t))
        .collect();
    if !missing.is_empty() {
        bail!("no rule files in {} for: {}", dir.display(), missing.join(", "));
    }
    let mut out = Vec::new();
    for t in targets {
        out.extend(rulefile::load(&dir.join(&names[t]), &split.vocab)?);
    }
    Ok(out)
}

pub fn render_timings(timings: &[GroupTiming]) -> String {
    let mut out = String::from("group\trules\ttemplates\tcollective_ms\tbaseline_ms\tspeedup\n");
    for t in timings {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{:.3}\t{:.3}\t{:.2}",
            t.group.label(),
            t.rules,
            t.templates,
            t.collective.as_secs_f64() * 1e3,
            t.baseline.as_secs_f64() * 1e3,
            t.speedup()
        );
    }
    out
}

/// Times both evaluation modes on the rules at `rules_path` (a file or a
/// directory of rule files) and writes `bench_eval.tsv`.
pub fn bench_eval(cfg: &RunConfig, rules_path: &Path) -> Result<Vec<GroupTiming>> {
    let split = load_split(cfg)?;
    let rules: Vec<Rule> = rulefile::load(rules_path, &split.vocab)?
        .into_iter()
        .map(|r| r.rule)
        .collect();
    let timings = compare_modes(
        &split.train,
        &rules,
        &split.vocab,
        cfg.learn.grounding_cap,
        cfg.learn.gen.seed,
        cfg.learn.score.eta,
    )?;
    write(&cfg.out_dir.join("bench_eval.tsv"), &render_timings(&timings))?;
    Ok(timings)
}

/// Stored rules rescored under every measure, with held-out precisions.
pub fn rescored_rules(cfg: &RunConfig, split: &SplitSet, stored: &[rulefile::StoredRule]) -> Result<Vec<ScoredRule>> {
    let rules: Vec<Rule> = stored.iter().map(|s| s.rule.clone()).collect();
    let stats = rescore(
        &split.train,
        &rules,
        cfg.learn.score.eta,
        cfg.learn.grounding_cap,
        cfg.learn.gen.seed,
    )?;
    let mut scored: Vec<ScoredRule> = rules
        .into_iter()
        .zip(stats)
        .map(|(rule, stats)| ScoredRule { rule, stats })
        .collect();
    annotate_precisions(
        &split.train,
        &mut scored,
        &split.valid,
        &split.test,
        cfg.learn.grounding_cap,
        cfg.learn.gen.seed,
    )?;
    Ok(scored)
}

fn fmt_prop(p: kgrules::evaluate::Proportion, name: String, undefined: &mut Vec<String>) -> String {
    if p.undefined {
        undefined.push(name);
    }
    format!("{:.4}", p.value)
}

pub fn render_overfit(reports: &[OverfitReport], top_k: &[usize]) -> String {
    let mut header = vec!["measure".to_string(), "validation".into(), "rules".into(), "overfitting".into(), "ORP_all".into()];
    for t in RuleType::REPORTED {
        let l = t.label();
        header.push(format!("RP_all({l})"));
        header.push(format!("ORP_or({l})"));
        header.push(format!("ORP_type({l})"));
    }
    for k in top_k {
        header.push(format!("precision@{k}"));
        header.push(format!("quality@{k}"));
    }
    header.push("undefined".into());
    let mut out = header.join("\t");
    out.push('\n');
    for rep in reports {
        let mut undefined = Vec::new();
        let mut row = vec![
            rep.measure.to_string(),
            if rep.validated { "Yes" } else { "No" }.to_string(),
            rep.rules.to_string(),
            rep.overfitting.to_string(),
            fmt_prop(rep.orp_all, "ORP_all".into(), &mut undefined),
        ];
        for t in RuleType::REPORTED {
            let r = rep.by_type.iter().find(|r| r.rule_type == t).expect("reported type");
            let l = t.label();
            row.push(fmt_prop(r.rp_all, format!("RP_all({l})"), &mut undefined));
            row.push(fmt_prop(r.orp_or, format!("ORP_or({l})"), &mut undefined));
            row.push(fmt_prop(r.orp_type, format!("ORP_type({l})"), &mut undefined));
        }
        for tk in &rep.top_k {
            row.push(format!("{:.4}", tk.precision));
            row.push(format!("{:.4}", tk.quality));
        }
        row.push(if undefined.is_empty() { "-".into() } else { undefined.join(",") });
        out.push_str(&row.join("\t"));
        out.push('\n');
    }
    out
}

#[derive(Debug)]
pub struct OverfitOutput {
    pub reports: Vec<OverfitReport>,
    pub sweep: Vec<kgrules::evaluate::SweepRow>,
}

/// Overfitting report for every measure with and without the validation
/// filter, plus a θ-sweep under the configured measure. Writes
/// `overfit.tsv` and `theta_sweep.csv`.
pub fn analyze_overfit(cfg: &RunConfig) -> Result<OverfitOutput> {
    let split = load_split(cfg)?;
    if split.valid.is_empty() || split.test.is_empty() {
        bail!("analyze-overfit needs non-empty valid.txt and test.txt");
    }
    let targets = resolve_targets(cfg, &split)?;
    let stored = load_target_rules(cfg, &split, &targets)?;
    let scored = with_workers(cfg.workers, || rescored_rules(cfg, &split, &stored))??;
    let ocfg = OverfitConfig {
        theta: cfg.theta,
        ..OverfitConfig::default()
    };
    let mut reports = Vec::new();
    for m in Measure::ALL {
        for validated in [false, true] {
            let set = if validated {
                validation_filter(&scored, m, cfg.theta)
            } else {
                scored.clone()
            };
            reports.push(overfit_report(&set, m, validated, &ocfg, &split.vocab));
        }
    }
    write(&cfg.out_dir.join("overfit.tsv"), &render_overfit(&reports, &ocfg.top_k))?;
    let sweep = theta_sweep(&scored, cfg.learn.score.measure, &cfg.thetas, ocfg.cutoff, 50, &split.vocab);
    let mut csv = String::from("theta,ORP_all,precision@50\n");
    for row in &sweep {
        let _ = writeln!(csv, "{},{:.6},{:.6}", row.theta, row.orp_all.value, row.precision_at_k);
    }
    write(&cfg.out_dir.join("theta_sweep.csv"), &csv)?;
    Ok(OverfitOutput { reports, sweep })
}

fn query_text(q: &Query, split: &SplitSet) -> String {
    let p = split.vocab.predicate_name(q.target);
    let e = split.vocab.entity_name(q.bound);
    match q.bound_slot {
        Slot::Subject => format!("{p}({e},?)"),
        Slot::Object => format!("{p}(?,{e})"),
    }
}

pub fn render_metrics(rep: &KgcReport, split: &SplitSet) -> String {
    let mut out = String::from("predicate\tqueries\tMRR\thits@1\thits@3\thits@10\n");
    let mut row = |name: &str, m: &kgrules::kgc::Metrics| {
        let _ = writeln!(
            out,
            "{name}\t{}\t{:.4}\t{:.4}\t{:.4}\t{:.4}",
            m.queries, m.mrr, m.hits1, m.hits3, m.hits10
        );
    };
    for (p, m) in &rep.per_predicate {
        row(split.vocab.predicate_name(*p), m);
    }
    row("ALL", &rep.overall);
    out
}

/// Answers head and tail queries for every test triple whose predicate is
/// a target, and writes `kgc_metrics.tsv` (plus `kgc_debug.tsv` when
/// `debug`). Debug rule ids index the loaded rules in file order.
pub fn kgc(cfg: &RunConfig, debug: bool) -> Result<KgcReport> {
    let split = load_split(cfg)?;
    let targets = resolve_targets(cfg, &split)?;
    let stored = load_target_rules(cfg, &split, &targets)?;
    let mut rules: Vec<ScoredRule> = stored.iter().map(|s| s.scored()).collect();
    if cfg.validation {
        if split.valid.is_empty() {
            bail!("validation=true needs a non-empty valid.txt");
        }
        with_workers(cfg.workers, || {
            annotate_precisions(
                &split.train,
                &mut rules,
                &split.valid,
                &split.test,
                cfg.learn.grounding_cap,
                cfg.learn.gen.seed,
            )
        })??;
        let before = rules.len();
        rules = validation_filter(&rules, cfg.learn.score.measure, cfg.theta);
        log::info!("validation filter kept {} of {before} rules", rules.len());
    }
    let ids: Vec<usize> = (0..rules.len()).collect();
    let book = kgrules::kgc::RuleBook::new(rules, cfg.learn.score.measure);
    let kcfg = KgcConfig {
        measure: cfg.learn.score.measure,
        candidates_per_rule: cfg.candidates_per_rule,
        query_time: cfg.query_time,
        grounding_cap: cfg.learn.grounding_cap,
        seed: cfg.learn.gen.seed,
        debug,
    };
    let wanted: std::collections::HashSet<PredicateId> = targets.iter().copied().collect();
    let test: Vec<_> = split.test.iter().filter(|t| wanted.contains(&t.predicate)).copied().collect();
    let rep = with_workers(cfg.workers, || evaluate(&test, &book, &split, &kcfg))?;
    if rep.capped_queries > 0 || rep.timed_out_queries > 0 {
        log::warn!(
            "{} queries hit the candidate cap, {} the time limit",
            rep.capped_queries,
            rep.timed_out_queries
        );
    }
    write(&cfg.out_dir.join("kgc_metrics.tsv"), &render_metrics(&rep, &split))?;
    if debug {
        let mut out = String::from("query\ttruth\trank\ttop10\n");
        for d in &rep.debug {
            let top: Vec<String> = d
                .top
                .iter()
                .map(|(e, rs)| {
                    let rs: Vec<String> = rs.iter().map(|i| ids[*i].to_string()).collect();
                    format!("{}[{}]", split.vocab.entity_name(*e), rs.join(" "))
                })
                .collect();
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}",
                query_text(&d.query, &split),
                split.vocab.entity_name(d.query.truth),
                d.filtered_rank.map_or("-".to_string(), |r| r.to_string()),
                top.join(", ")
            );
        }
        write(&cfg.out_dir.join("kgc_debug.tsv"), &out)?;
    }
    Ok(rep)
}

/// Pools every triple of `input` and writes a seeded 6:2:2 split to `output`.
pub fn resplit(input: &Path, output: &Path, seed: u64) -> Result<[usize; 3]> {
    let mut lines: Vec<String> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for name in SPLIT_FILES {
        let p = input.join(name);
        if !p.exists() {
            if name == "train.txt" {
                bail!("{} not found", p.display());
            }
            continue;
        }
        let text = fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            if line.split('\t').count() != 3 {
                bail!("{}:{}: expected 3 tab-separated fields", p.display(), i + 1);
            }
            if seen.insert(line.to_string()) {
                lines.push(line.to_string());
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    lines.shuffle(&mut rng);
    let n = lines.len();
    let n_train = n * 6 / 10;
    let n_valid = n * 2 / 10;
    let parts = [&lines[..n_train], &lines[n_train..n_train + n_valid], &lines[n_train + n_valid..]];
    fs::create_dir_all(output).with_context(|| format!("creating {}", output.display()))?;
    for (name, part) in SPLIT_FILES.iter().zip(parts) {
        let mut text = part.join("\n");
        if !text.is_empty() {
            text.push('\n');
        }
        write(&output.join(name), &text)?;
    }
    Ok([parts[0].len(), parts[1].len(), parts[2].len()])
}

/// Human summary of rule counts, printed after `learn`.
pub fn learn_report(summary: &LearnSummary) -> String {
    let mut by_kind: BTreeMap<&str, usize> = BTreeMap::new();
    for r in summary.outcomes.iter().flat_map(|o| &o.rules) {
        *by_kind.entry(r.rule.kind().as_str()).or_default() += 1;
    }
    let parts: Vec<String> = [RuleKind::Car, RuleKind::Har, RuleKind::Bar]
        .iter()
        .map(|k| format!("{} {}", by_kind.get(k.as_str()).unwrap_or(&0), k.as_str()))
        .collect();
    format!(
        "{} targets, {} rule files, {}; manifest {}",
        summary.outcomes.len(),
        summary.files.len(),
        parts.join(", "),
        summary.manifest.display()
    )
}
