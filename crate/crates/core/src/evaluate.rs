//! Held-out precision of rules, the validation filter, and overfitting reports.

use rayon::prelude::*;
use rustc_hash::FxHashMap;

use crate::error::LearnError;
use crate::ground::GroundingIndex;
use crate::rule::{Rule, RuleKind};
use crate::specialize::{cmp_by_measure, Measure, ScoredRule};
use crate::store::{KnowledgeGraph, PredicateId, Triple, TripleSet, Vocab};

/// Distinct head triples predicted by `rule` over the graph `index` was
/// grounded on. `index` must belong to the rule's template (or the CAR).
pub fn predictions(rule: &Rule, index: &GroundingIndex) -> Result<Vec<Triple>, LearnError> {
    if rule.template_of() != *index.rule() || rule.kind() == RuleKind::Template {
        return Err(LearnError::TemplateMismatch);
    }
    Ok(match rule.free_constant() {
        None => index
            .pairs()
            .iter()
            .map(|&(x, y)| Triple::new(x, rule.target(), y))
            .collect(),
        Some(c) => index
            .rule_origins(rule)
            .iter()
            .map(|&o| rule.head_triple(o, c))
            .collect(),
    })
}

/// `(hits, unseen)`: predictions found in `facts`, and predictions absent
/// from the training graph.
pub fn precision_counts(
    rule: &Rule,
    index: &GroundingIndex,
    train: &KnowledgeGraph,
    facts: &TripleSet,
) -> Result<(u64, u64), LearnError> {
    let mut hits = 0;
    let mut unseen = 0;
    for t in predictions(rule, index)? {
        if train.contains(&t) {
            continue;
        }
        unseen += 1;
        if facts.contains(&t) {
            hits += 1;
        }
    }
    Ok((hits, unseen))
}

fn precision_of(hits: u64, unseen: u64) -> f64 {
    if unseen == 0 {
        0.0
    } else {
        hits as f64 / unseen as f64
    }
}

/// Precision of one rule on held-out `facts`: predictions in `facts` over
/// predictions not already in train; 0 when every prediction is known.
pub fn rule_precision(g: &KnowledgeGraph, rule: &Rule, facts: &TripleSet, cap: usize, seed: u64) -> Result<f64, LearnError> {
    let index = GroundingIndex::build(g, &rule.template_of(), cap, seed)?;
    let (hits, unseen) = precision_counts(rule, &index, g, facts)?;
    Ok(precision_of(hits, unseen))
}

/// Precision of many rules, grounding each template once.
pub fn precision_batch(
    g: &KnowledgeGraph,
    rules: &[ScoredRule],
    facts: &TripleSet,
    cap: usize,
    seed_of: impl Fn(PredicateId) -> u64 + Sync,
) -> Result<Vec<f64>, LearnError> {
    let mut groups: FxHashMap<Rule, Vec<usize>> = FxHashMap::default();
    for (i, r) in rules.iter().enumerate() {
        groups.entry(r.rule.template_of()).or_default().push(i);
    }
    let mut groups: Vec<(Rule, Vec<usize>)> = groups.into_iter().collect();
    groups.sort_by_key(|(_, ids)| ids[0]);
    let per_group: Vec<Result<Vec<(usize, f64)>, LearnError>> = groups
        .par_iter()
        .map(|(template, ids)| {
            let index = GroundingIndex::build(g, template, cap, seed_of(template.target()))?;
            ids.iter()
                .map(|&i| {
                    let (hits, unseen) = precision_counts(&rules[i].rule, &index, g, facts)?;
                    Ok((i, precision_of(hits, unseen)))
                })
                .collect()
        })
        .collect();
    let mut out = vec![0.0; rules.len()];
    for group in per_group {
        for (i, p) in group? {
            out[i] = p;
        }
    }
    Ok(out)
}

/// Records validation and test precision on every rule, grounding with the
/// same per-target seeds as learning.
pub fn annotate_precisions(
    g: &KnowledgeGraph,
    rules: &mut [ScoredRule],
    valid: &TripleSet,
    test: &TripleSet,
    cap: usize,
    seed: u64,
) -> Result<(), LearnError> {
    let seed_of = |p: PredicateId| crate::specialize::derive_seed(seed, p.0 as u64);
    let v = precision_batch(g, rules, valid, cap, seed_of)?;
    let t = precision_batch(g, rules, test, cap, seed_of)?;
    for ((r, v), t) in rules.iter_mut().zip(v).zip(t) {
        r.stats.valid_precision = Some(v);
        r.stats.test_precision = Some(t);
    }
    Ok(())
}

/// Keeps rules whose validation precision is at least `theta` times their
/// quality. Rules without a recorded validation precision count as 0.
pub fn validation_filter(rules: &[ScoredRule], measure: Measure, theta: f64) -> Vec<ScoredRule> {
    rules
        .iter()
        .filter(|r| r.stats.valid_precision.unwrap_or(0.0) >= theta * r.stats.measure(measure))
        .cloned()
        .collect()
}

/// Test precision below `cutoff` times the quality.
pub fn is_overfitting(r: &ScoredRule, measure: Measure, cutoff: f64) -> bool {
    r.stats.test_precision.unwrap_or(0.0) < cutoff * r.stats.measure(measure)
}

#[derive(Clone, Debug)]
pub struct OverfitConfig {
    pub theta: f64,
    pub cutoff: f64,
    pub top_k: Vec<usize>,
}

impl Default for OverfitConfig {
    fn default() -> Self {
        Self {
            theta: 0.1,
            cutoff: 0.1,
            top_k: vec![5, 10, 20, 50, 100],
        }
    }
}

/// Report bucket: CARs together, instantiated rules by body length.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleType {
    Car,
    Ins(usize),
}

impl RuleType {
    pub const REPORTED: [RuleType; 4] = [RuleType::Car, RuleType::Ins(1), RuleType::Ins(2), RuleType::Ins(3)];

    pub fn of(rule: &Rule) -> RuleType {
        match rule.kind() {
            RuleKind::Car => RuleType::Car,
            _ => RuleType::Ins(rule.len()),
        }
    }

    pub fn label(self) -> String {
        match self {
            RuleType::Car => "CAR".to_string(),
            RuleType::Ins(n) => format!("len={n}"),
        }
    }
}

/// A proportion, flagged when its denominator was empty.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Proportion {
    pub value: f64,
    pub undefined: bool,
}

impl Proportion {
    pub fn of(num: usize, den: usize) -> Self {
        if den == 0 {
            Self {
                value: 0.0,
                undefined: true,
            }
        } else {
            Self {
                value: num as f64 / den as f64,
                undefined: false,
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TypeRow {
    pub rule_type: RuleType,
    pub rules: usize,
    pub overfitting: usize,
    pub rp_all: Proportion,
    pub orp_or: Proportion,
    pub orp_type: Proportion,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TopK {
    pub k: usize,
    pub precision: f64,
    pub quality: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OverfitReport {
    pub measure: Measure,
    pub validated: bool,
    pub rules: usize,
    pub overfitting: usize,
    pub orp_all: Proportion,
    /// Always the four reported types, then any longer instantiated types.
    pub by_type: Vec<TypeRow>,
    pub top_k: Vec<TopK>,
}

/// Mean over targets of the mean test precision and mean quality of each
/// target's `k` best rules. Targets without rules are skipped.
pub fn global_average_at_k(rules: &[ScoredRule], measure: Measure, k: usize, vocab: &Vocab) -> (f64, f64) {
    let mut by_target: FxHashMap<PredicateId, Vec<&ScoredRule>> = FxHashMap::default();
    for r in rules {
        by_target.entry(r.rule.target()).or_default().push(r);
    }
    if by_target.is_empty() || k == 0 {
        return (0.0, 0.0);
    }
    let mut prec = 0.0;
    let mut qual = 0.0;
    for list in by_target.values_mut() {
        list.sort_by(|a, b| cmp_by_measure(a, b, measure).then_with(|| a.rule.render(vocab).cmp(&b.rule.render(vocab))));
        let top = &list[..k.min(list.len())];
        prec += top.iter().map(|r| r.stats.test_precision.unwrap_or(0.0)).sum::<f64>() / top.len() as f64;
        qual += top.iter().map(|r| r.stats.measure(measure)).sum::<f64>() / top.len() as f64;
    }
    let n = by_target.len() as f64;
    (prec / n, qual / n)
}

/// Overfitting report of a rule set whose test precisions are recorded.
pub fn overfit_report(rules: &[ScoredRule], measure: Measure, validated: bool, cfg: &OverfitConfig, vocab: &Vocab) -> OverfitReport {
    let mut counts: FxHashMap<RuleType, (usize, usize)> = FxHashMap::default();
    let mut overfitting = 0;
    for r in rules {
        let over = is_overfitting(r, measure, cfg.cutoff);
        let c = counts.entry(RuleType::of(&r.rule)).or_default();
        c.0 += 1;
        if over {
            c.1 += 1;
            overfitting += 1;
        }
    }
    let mut types: Vec<RuleType> = RuleType::REPORTED.to_vec();
    let mut extra: Vec<RuleType> = counts.keys().copied().filter(|t| !types.contains(t)).collect();
    extra.sort();
    types.extend(extra);
    let by_type = types
        .into_iter()
        .map(|t| {
            let (n, o) = counts.get(&t).copied().unwrap_or_default();
            TypeRow {
                rule_type: t,
                rules: n,
                overfitting: o,
                rp_all: Proportion::of(n, rules.len()),
                orp_or: Proportion::of(o, overfitting),
                orp_type: Proportion::of(o, n),
            }
        })
        .collect();
    let top_k = cfg
        .top_k
        .iter()
        .map(|&k| {
            let (precision, quality) = global_average_at_k(rules, measure, k, vocab);
            TopK { k, precision, quality }
        })
        .collect();
    OverfitReport {
        measure,
        validated,
        rules: rules.len(),
        overfitting,
        orp_all: Proportion::of(overfitting, rules.len()),
        by_type,
        top_k,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub theta: f64,
    pub kept: usize,
    pub orp_all: Proportion,
    pub precision_at_k: f64,
}

/// ORP_all and global average precision@k of the validation-filtered rule
/// set for each θ.
pub fn theta_sweep(
    rules: &[ScoredRule],
    measure: Measure,
    thetas: &[f64],
    cutoff: f64,
    k: usize,
    vocab: &Vocab,
) -> Vec<SweepRow> {
    thetas
        .iter()
        .map(|&theta| {
            let kept = validation_filter(rules, measure, theta);
            let over = kept.iter().filter(|r| is_overfitting(r, measure, cutoff)).count();
            SweepRow {
                theta,
                kept: kept.len(),
                orp_all: Proportion::of(over, kept.len()),
                precision_at_k: global_average_at_k(&kept, measure, k, vocab).0,
            }
        })
        .collect()
}
