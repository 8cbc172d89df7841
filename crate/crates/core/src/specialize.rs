//! Specialisation of templates into HARs/BARs, collective scoring from
//! template groundings, quality filtering, and the per-target learning loop.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use rustc_hash::{FxHashMap, FxHashSet};

use crate::error::LearnError;
use crate::generalize::{generalize, sort, GenConfig, StopReason};
use crate::ground::{ground_instantiated, GroundingIndex, GroundingSet, DEFAULT_GROUNDING_CAP};
use crate::rule::{Rule, RuleKind, Slot};
use crate::store::{EntityId, KnowledgeGraph, PredicateId, SplitSet, Triple, Vocab};

/// Rule quality measure used for filtering, ranking and inference.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Measure {
    /// Standard confidence.
    Sc,
    /// Smoothed confidence.
    Smc,
    /// Partial completeness assumption confidence.
    Pca,
}

impl Measure {
    pub const ALL: [Measure; 3] = [Measure::Sc, Measure::Smc, Measure::Pca];

    pub fn as_str(self) -> &'static str {
        match self {
            Measure::Sc => "SC",
            Measure::Smc => "SMC",
            Measure::Pca => "PCA",
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Measure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "SC" | "STANDARD" => Ok(Measure::Sc),
            "SMC" | "SMOOTH" => Ok(Measure::Smc),
            "PCA" => Ok(Measure::Pca),
            other => Err(format!("unknown measure `{other}` (expected SC, SMC or PCA)")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ScoreConfig {
    pub measure: Measure,
    /// Offset added to the body groundings by the smoothed confidence.
    pub eta: f64,
    pub conf_threshold: f64,
    pub supp_threshold: u64,
    pub hc_threshold: f64,
}

impl Default for ScoreConfig {
    fn default() -> Self {
        Self {
            measure: Measure::Smc,
            eta: 5.0,
            conf_threshold: 0.001,
            supp_threshold: 3,
            hc_threshold: 0.001,
        }
    }
}

impl ScoreConfig {
    /// Thresholds at zero: the quality filter keeps everything.
    pub fn permissive(measure: Measure) -> Self {
        Self {
            measure,
            conf_threshold: 0.0,
            supp_threshold: 0,
            hc_threshold: 0.0,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RuleStats {
    pub support: u64,
    pub body_groundings: u64,
    pub pca_body_groundings: u64,
    pub head_size: u64,
    pub sc: f64,
    pub smc: f64,
    pub pca: f64,
    pub hc: f64,
    /// No prediction's subject has a known target fact, so PCA is undefined.
    pub pca_undefined: bool,
    pub valid_precision: Option<f64>,
    pub test_precision: Option<f64>,
    pub frequency: u64,
}

fn ratio(num: u64, den: f64) -> f64 {
    if den > 0.0 {
        num as f64 / den
    } else {
        0.0
    }
}

impl RuleStats {
    pub fn from_counts(support: u64, body_groundings: u64, pca_body_groundings: u64, head_size: u64, eta: f64) -> Self {
        Self {
            support,
            body_groundings,
            pca_body_groundings,
            head_size,
            sc: ratio(support, body_groundings as f64),
            smc: ratio(support, eta + body_groundings as f64),
            pca: ratio(support, pca_body_groundings as f64),
            hc: ratio(support, head_size as f64),
            pca_undefined: pca_body_groundings == 0,
            ..Self::default()
        }
    }

    pub fn measure(&self, m: Measure) -> f64 {
        match m {
            Measure::Sc => self.sc,
            Measure::Smc => self.smc,
            Measure::Pca => self.pca,
        }
    }

    /// The three raw counts, for equality checks between evaluation modes.
    pub fn counts(&self) -> (u64, u64, u64) {
        (self.support, self.body_groundings, self.pca_body_groundings)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScoredRule {
    pub rule: Rule,
    pub stats: RuleStats,
}

/// Quality tiers used when reporting rule counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct QualityTags {
    /// measure ≥ 0.1 and head coverage ≥ 0.01
    pub high: bool,
    /// measure ≥ 0.7
    pub extreme: bool,
}

pub fn quality_tags(stats: &RuleStats, measure: Measure) -> QualityTags {
    let q = stats.measure(measure);
    QualityTags {
        high: q >= 0.1 && stats.hc >= 0.01,
        extreme: q >= 0.7,
    }
}

fn passes(stats: &RuleStats, cfg: &ScoreConfig) -> bool {
    if cfg.measure == Measure::Pca && stats.pca_undefined {
        return false;
    }
    stats.measure(cfg.measure) >= cfg.conf_threshold
        && stats.support >= cfg.supp_threshold
        && stats.hc >= cfg.hc_threshold
}

/// Keeps rules meeting the measure, support and head-coverage thresholds.
pub fn quality_filter(rules: Vec<ScoredRule>, cfg: &ScoreConfig) -> Vec<ScoredRule> {
    rules.into_iter().filter(|r| passes(&r.stats, cfg)).collect()
}

/// Rule-file order: measure descending, then support descending, then text.
pub fn sort_rules(rules: &mut Vec<ScoredRule>, measure: Measure, vocab: &Vocab) {
    let mut keyed: Vec<(String, ScoredRule)> = rules.drain(..).map(|r| (r.rule.render(vocab), r)).collect();
    keyed.sort_by(|(ta, a), (tb, b)| {
        b.stats
            .measure(measure)
            .total_cmp(&a.stats.measure(measure))
            .then(b.stats.support.cmp(&a.stats.support))
            .then_with(|| ta.cmp(tb))
    });
    rules.extend(keyed.into_iter().map(|(_, r)| r));
}

/// Everything about one target predicate that scoring needs: its training
/// instances oriented by origin slot and the subjects with a known fact.
#[derive(Debug)]
pub struct TargetContext<'g> {
    pub graph: &'g KnowledgeGraph,
    pub target: PredicateId,
    pub head_size: u64,
    subjects: FxHashSet<EntityId>,
    /// `[Subject, Object]`: origin value → free values.
    by_origin: [FxHashMap<EntityId, Vec<EntityId>>; 2],
    /// `[Subject, Object]`: free value → origin values (sorted).
    by_free: [FxHashMap<EntityId, Vec<EntityId>>; 2],
}

fn slot_index(slot: Slot) -> usize {
    match slot {
        Slot::Subject => 0,
        Slot::Object => 1,
    }
}

impl<'g> TargetContext<'g> {
    pub fn new(graph: &'g KnowledgeGraph, target: PredicateId) -> Self {
        let inst = graph.instances(target);
        let mut by_origin: [FxHashMap<EntityId, Vec<EntityId>>; 2] = Default::default();
        let mut by_free: [FxHashMap<EntityId, Vec<EntityId>>; 2] = Default::default();
        for &(s, o) in inst {
            by_origin[0].entry(s).or_default().push(o);
            by_free[0].entry(o).or_default().push(s);
            by_origin[1].entry(o).or_default().push(s);
            by_free[1].entry(s).or_default().push(o);
        }
        for m in by_origin.iter_mut().chain(by_free.iter_mut()) {
            for v in m.values_mut() {
                v.sort_unstable();
            }
        }
        Self {
            graph,
            target,
            head_size: inst.len() as u64,
            subjects: inst.iter().map(|&(s, _)| s).collect(),
            by_origin,
            by_free,
        }
    }

    /// Free-slot values of instances whose origin-slot value is `origin`.
    pub fn frees_of(&self, origin_slot: Slot, origin: EntityId) -> &[EntityId] {
        self.by_origin[slot_index(origin_slot)]
            .get(&origin)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Origin-slot values of instances whose free-slot value is `free`.
    pub fn origins_with_free(&self, origin_slot: Slot, free: EntityId) -> &[EntityId] {
        self.by_free[slot_index(origin_slot)]
            .get(&free)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Whether `subject` has at least one known target fact.
    pub fn is_functional_subject(&self, subject: EntityId) -> bool {
        self.subjects.contains(&subject)
    }

    pub fn instances(&self) -> Vec<Triple> {
        self.graph
            .instances(self.target)
            .iter()
            .map(|&(s, o)| Triple::new(s, self.target, o))
            .collect()
    }
}

fn car_stats(pairs: &[(EntityId, EntityId)], ctx: &TargetContext, eta: f64) -> RuleStats {
    let mut sp = 0;
    let mut fbg = 0;
    for &(x, y) in pairs {
        if ctx.graph.has(x, ctx.target, y) {
            sp += 1;
        }
        if ctx.is_functional_subject(x) {
            fbg += 1;
        }
    }
    RuleStats::from_counts(sp, pairs.len() as u64, fbg, ctx.head_size, eta)
}

/// Stats of a HAR/BAR whose predictions are `head(o, free)` for every `o`
/// in `origins` (distinct).
fn anchored_stats(rule: &Rule, origins: &[EntityId], ctx: &TargetContext, eta: f64) -> RuleStats {
    let free = rule.free_constant().expect("anchored rule");
    let mut sp = 0;
    let mut fbg = 0;
    for &o in origins {
        let head = rule.head_triple(o, free);
        if ctx.graph.contains(&head) {
            sp += 1;
        }
        if ctx.is_functional_subject(head.subject) {
            fbg += 1;
        }
    }
    RuleStats::from_counts(sp, origins.len() as u64, fbg, ctx.head_size, eta)
}

/// Scores a rule from its own grounding set (the per-rule baseline path).
pub fn score_from_groundings(rule: &Rule, own: &GroundingSet, ctx: &TargetContext, eta: f64) -> RuleStats {
    match rule.kind() {
        RuleKind::Car | RuleKind::Template => car_stats(&own.pairs, ctx, eta),
        RuleKind::Har | RuleKind::Bar => {
            let mut origins: Vec<EntityId> = own.pairs.iter().map(|&(o, _)| o).collect();
            origins.dedup();
            anchored_stats(rule, &origins, ctx, eta)
        }
    }
}

/// Grounds `rule` on its own and scores it: what collective evaluation avoids.
pub fn score_baseline(rule: &Rule, ctx: &TargetContext, eta: f64, cap: usize, seed: u64) -> Result<RuleStats, LearnError> {
    let own = match rule.kind() {
        RuleKind::Car | RuleKind::Template => crate::ground::ground(ctx.graph, rule, cap, seed)?,
        _ => ground_instantiated(ctx.graph, rule, cap, seed)?,
    };
    Ok(score_from_groundings(rule, &own, ctx, eta))
}

/// Scores a CAR from its own groundings, or a HAR/BAR from the groundings
/// of the template it was derived from.
pub fn score_collective(rule: &Rule, index: &GroundingIndex, ctx: &TargetContext, eta: f64) -> Result<RuleStats, LearnError> {
    if rule.template_of() != *index.rule() || rule.kind() == RuleKind::Template {
        return Err(LearnError::TemplateMismatch);
    }
    if rule.kind() == RuleKind::Car {
        return Ok(car_stats(index.pairs(), ctx, eta));
    }
    let free = rule.free_constant().expect("anchored rule");
    let bg = index.rule_origin_count(rule) as u64;
    // support: instances with this free value whose origin grounds the body
    let sp = ctx
        .origins_with_free(rule.origin(), free)
        .iter()
        .filter(|&&o| index.grounds(rule, o))
        .count() as u64;
    let fbg = match rule.origin() {
        Slot::Object => {
            if ctx.is_functional_subject(free) {
                bg
            } else {
                0
            }
        }
        Slot::Subject => {
            let origins = index.rule_origins(rule);
            origins.iter().filter(|&&o| ctx.is_functional_subject(o)).count() as u64
        }
    };
    Ok(RuleStats::from_counts(sp, bg, fbg, ctx.head_size, eta))
}

/// Derives the HARs and BARs of `template` by joining its groundings with
/// the target's instances on original constants. Every derived rule has at
/// least one grounding and, self-aligned corner cases aside, support ≥ 1.
pub fn specialize(template: &Rule, index: &GroundingIndex, ctx: &TargetContext) -> Result<Vec<Rule>, LearnError> {
    if template.kind() != RuleKind::Template || index.rule() != template {
        return Err(LearnError::TemplateMismatch);
    }
    let aligned = template.is_self_aligned();
    let mut hars = std::collections::BTreeSet::new();
    let mut bars = std::collections::BTreeSet::new();
    for &o in index.origins() {
        for &c in ctx.frees_of(template.origin(), o) {
            hars.insert(c);
            for &d in index.tails(o) {
                if aligned && d == c {
                    continue;
                }
                bars.insert((c, d));
            }
        }
    }
    let mut out = Vec::with_capacity(hars.len() + bars.len());
    for c in hars {
        out.push(template.har(c)?);
    }
    for (c, d) in bars {
        out.push(template.bar(c, d)?);
    }
    Ok(out)
}

/// Specialises and scores every HAR/BAR of `template` in one pass over its
/// groundings. Produces the same stats as [`specialize`] followed by
/// [`score_collective`] per rule; rules with support below `min_support`
/// are dropped early.
pub fn specialize_and_score(
    template: &Rule,
    index: &GroundingIndex,
    ctx: &TargetContext,
    eta: f64,
    min_support: u64,
) -> Result<Vec<ScoredRule>, LearnError> {
    if template.kind() != RuleKind::Template || index.rule() != template {
        return Err(LearnError::TemplateMismatch);
    }
    let min_support = min_support.max(1);
    let origin_slot = template.origin();
    let aligned = template.is_self_aligned();

    let mut har_support: FxHashMap<EntityId, u64> = FxHashMap::default();
    let mut bar_support: FxHashMap<(EntityId, EntityId), u64> = FxHashMap::default();
    for &o in index.origins() {
        let frees = ctx.frees_of(origin_slot, o);
        if frees.is_empty() {
            continue;
        }
        let tails = index.tails(o);
        for &c in frees {
            if !aligned || tails.iter().any(|&t| t != c) {
                *har_support.entry(c).or_default() += 1;
            }
            for &d in tails {
                if aligned && d == c {
                    continue;
                }
                *bar_support.entry((c, d)).or_default() += 1;
            }
        }
    }

    let n_origins = index.origins().len() as u64;
    let functional_origins = match origin_slot {
        Slot::Subject => index.origins().iter().filter(|&&o| ctx.is_functional_subject(o)).count() as u64,
        Slot::Object => 0,
    };
    let mut tail_functional: FxHashMap<EntityId, u64> = FxHashMap::default();
    let mut out = Vec::new();

    let mut hars: Vec<(EntityId, u64)> = har_support.into_iter().filter(|&(_, sp)| sp >= min_support).collect();
    hars.sort_unstable();
    for (c, sp) in hars {
        let rule = template.har(c)?;
        let (bg, fbg) = if aligned {
            // rare; count exactly through the index
            let origins = index.rule_origins(&rule);
            let fbg = match origin_slot {
                Slot::Subject => origins.iter().filter(|&&o| ctx.is_functional_subject(o)).count() as u64,
                Slot::Object => {
                    if ctx.is_functional_subject(c) {
                        origins.len() as u64
                    } else {
                        0
                    }
                }
            };
            (origins.len() as u64, fbg)
        } else {
            let fbg = match origin_slot {
                Slot::Subject => functional_origins,
                Slot::Object => {
                    if ctx.is_functional_subject(c) {
                        n_origins
                    } else {
                        0
                    }
                }
            };
            (n_origins, fbg)
        };
        out.push(ScoredRule {
            rule,
            stats: RuleStats::from_counts(sp, bg, fbg, ctx.head_size, eta),
        });
    }

    let mut bars: Vec<((EntityId, EntityId), u64)> =
        bar_support.into_iter().filter(|&(_, sp)| sp >= min_support).collect();
    bars.sort_unstable();
    for ((c, d), sp) in bars {
        let with_tail = index.origins_with_tail(d);
        let bg = with_tail.len() as u64;
        let fbg = match origin_slot {
            Slot::Subject => *tail_functional
                .entry(d)
                .or_insert_with(|| with_tail.iter().filter(|&&o| ctx.is_functional_subject(o)).count() as u64),
            Slot::Object => {
                if ctx.is_functional_subject(c) {
                    bg
                } else {
                    0
                }
            }
        };
        out.push(ScoredRule {
            rule: template.bar(c, d)?,
            stats: RuleStats::from_counts(sp, bg, fbg, ctx.head_size, eta),
        });
    }
    Ok(out)
}

/// Configuration of the per-target learning loop.
#[derive(Clone, Debug)]
pub struct LearnConfig {
    pub gen: GenConfig,
    pub score: ScoreConfig,
    /// Maximum HAR/BAR body length; 0 disables instantiated rules.
    pub max_ins_len: usize,
    /// Maximum CAR body length; 0 disables CARs.
    pub max_car_len: usize,
    pub grounding_cap: usize,
    /// Per-target wall-clock budget, checked after every abstract rule.
    pub time_budget: Option<Duration>,
    /// Stop once this many rules have been generated.
    pub max_rules: usize,
    /// Abstract rules processed concurrently between constraint checks.
    pub chunk: usize,
}

impl Default for LearnConfig {
    fn default() -> Self {
        Self {
            gen: GenConfig::default(),
            score: ScoreConfig::default(),
            max_ins_len: 3,
            max_car_len: 3,
            grounding_cap: DEFAULT_GROUNDING_CAP,
            time_budget: Some(Duration::from_secs(600)),
            max_rules: 1_000_000,
            chunk: 1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LearnOutcome {
    pub target: PredicateId,
    /// Learned CARs, HARs and BARs after the quality filter, in rule-file order.
    pub rules: Vec<ScoredRule>,
    pub abstract_rules: usize,
    pub processed: usize,
    pub paths: u64,
    pub generalization_stop: Option<StopReason>,
    pub constraint_hit: bool,
    pub elapsed: Duration,
}

/// Mixes a run seed with a per-item key (SplitMix64 finaliser).
pub fn derive_seed(seed: u64, key: u64) -> u64 {
    let mut z = seed ^ key.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn process_abstract(
    rule: &Rule,
    frequency: u64,
    ctx: &TargetContext,
    cfg: &LearnConfig,
    seed: u64,
) -> Result<Vec<ScoredRule>, LearnError> {
    let index = GroundingIndex::build(ctx.graph, rule, cfg.grounding_cap, seed)?;
    let mut out = if rule.kind() == RuleKind::Car {
        let stats = score_collective(rule, &index, ctx, cfg.score.eta)?;
        vec![ScoredRule {
            rule: rule.clone(),
            stats,
        }]
    } else {
        specialize_and_score(rule, &index, ctx, cfg.score.eta, cfg.score.supp_threshold)?
    };
    for r in &mut out {
        r.stats.frequency = frequency;
    }
    Ok(out)
}

/// Learns the rule set of one target predicate.
pub fn learn_target(split: &SplitSet, target: PredicateId, cfg: &LearnConfig) -> Result<LearnOutcome, LearnError> {
    let started = Instant::now();
    if target.index() >= split.train.num_predicates() {
        return Err(LearnError::UnknownTarget(target.0));
    }
    let ctx = TargetContext::new(&split.train, target);
    let mut outcome = LearnOutcome {
        target,
        rules: Vec::new(),
        abstract_rules: 0,
        processed: 0,
        paths: 0,
        generalization_stop: None,
        constraint_hit: false,
        elapsed: Duration::ZERO,
    };
    let exhausted = |n_rules: usize| {
        cfg.time_budget.is_some_and(|b| started.elapsed() >= b) || n_rules >= cfg.max_rules
    };
    if ctx.head_size == 0 || exhausted(0) {
        outcome.constraint_hit = ctx.head_size > 0;
        outcome.elapsed = started.elapsed();
        return Ok(outcome);
    }

    let seed = derive_seed(cfg.gen.seed, target.0 as u64);
    let gen_cfg = GenConfig { seed, ..cfg.gen.clone() };
    let freq = generalize(&split.train, &ctx.instances(), &gen_cfg);
    outcome.paths = freq.paths;
    outcome.generalization_stop = Some(freq.stop);
    let ordered: Vec<Rule> = sort(&freq, &split.vocab)
        .into_iter()
        .filter(|r| match r.kind() {
            RuleKind::Car => r.len() <= cfg.max_car_len,
            _ => r.len() <= cfg.max_ins_len,
        })
        .collect();
    outcome.abstract_rules = ordered.len();

    let mut learned = Vec::new();
    for chunk in ordered.chunks(cfg.chunk.max(1)) {
        if exhausted(learned.len()) {
            outcome.constraint_hit = true;
            break;
        }
        let results: Vec<Result<Vec<ScoredRule>, LearnError>> = chunk
            .par_iter()
            .map(|r| process_abstract(r, freq.frequency(r), &ctx, cfg, seed))
            .collect();
        for r in results {
            learned.extend(r?);
        }
        outcome.processed += chunk.len();
    }
    if !outcome.constraint_hit && exhausted(learned.len()) && outcome.processed < ordered.len() {
        outcome.constraint_hit = true;
    }
    let mut rules = quality_filter(learned, &cfg.score);
    sort_rules(&mut rules, cfg.score.measure, &split.vocab);
    outcome.rules = rules;
    outcome.elapsed = started.elapsed();
    Ok(outcome)
}

/// Recomputes the stats of stored rules collectively, grounding each
/// template once with the per-target seed used while learning. Output
/// order follows `rules`; frequencies and precisions are left unset.
pub fn rescore(g: &KnowledgeGraph, rules: &[Rule], eta: f64, cap: usize, seed: u64) -> Result<Vec<RuleStats>, LearnError> {
    let mut groups: FxHashMap<Rule, Vec<usize>> = FxHashMap::default();
    for (i, r) in rules.iter().enumerate() {
        if r.kind() == RuleKind::Template {
            return Err(LearnError::WrongKind("template"));
        }
        groups.entry(r.template_of()).or_default().push(i);
    }
    let mut groups: Vec<(Rule, Vec<usize>)> = groups.into_iter().collect();
    groups.sort_by_key(|(_, ids)| ids[0]);
    let mut contexts: FxHashMap<PredicateId, TargetContext> = FxHashMap::default();
    for (t, _) in &groups {
        contexts.entry(t.target()).or_insert_with(|| TargetContext::new(g, t.target()));
    }
    let scored: Vec<Result<Vec<(usize, RuleStats)>, LearnError>> = groups
        .par_iter()
        .map(|(t, ids)| {
            let ctx = &contexts[&t.target()];
            let index = GroundingIndex::build(g, t, cap, derive_seed(seed, t.target().0 as u64))?;
            ids.iter()
                .map(|&i| Ok((i, score_collective(&rules[i], &index, ctx, eta)?)))
                .collect()
        })
        .collect();
    let mut out = vec![RuleStats::default(); rules.len()];
    for group in scored {
        for (i, s) in group? {
            out[i] = s;
        }
    }
    Ok(out)
}

/// Learns every target in `targets`, in parallel across targets.
pub fn learn_all(split: &SplitSet, targets: &[PredicateId], cfg: &LearnConfig) -> Result<Vec<LearnOutcome>, LearnError> {
    targets.par_iter().map(|&t| learn_target(split, t, cfg)).collect()
}

/// Predicates with at least one training instance, in id order.
pub fn predicates_with_instances(g: &KnowledgeGraph) -> Vec<PredicateId> {
    (0..g.num_predicates() as u32)
        .map(PredicateId)
        .filter(|&p| !g.instances(p).is_empty())
        .collect()
}

/// Orders candidate rules for tests and reports: measure desc, SP desc.
pub fn cmp_by_measure(a: &ScoredRule, b: &ScoredRule, m: Measure) -> Ordering {
    b.stats
        .measure(m)
        .total_cmp(&a.stats.measure(m))
        .then(b.stats.support.cmp(&a.stats.support))
}
