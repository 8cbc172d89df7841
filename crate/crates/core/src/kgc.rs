//! Knowledge graph completion with learned rules: candidate generation,
//! maximum aggregation, and filtered ranking metrics.

use std::cmp::Ordering;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use rustc_hash::{FxHashMap, FxHashSet};

use crate::ground::{walk_ends, GroundingIndex, WalkFilter};
use crate::rule::{reverse_chain, Rule, RuleKind, Slot};
use crate::specialize::{Measure, ScoredRule};
use crate::store::{EntityId, KnowledgeGraph, PredicateId, Scope, SplitSet, Triple};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Query {
    pub target: PredicateId,
    pub bound: EntityId,
    /// `Subject` for tail queries `r(e, ?)`, `Object` for head queries `r(?, e)`.
    pub bound_slot: Slot,
    pub truth: EntityId,
}

impl Query {
    pub fn tail(t: &Triple) -> Self {
        Self {
            target: t.predicate,
            bound: t.subject,
            bound_slot: Slot::Subject,
            truth: t.object,
        }
    }

    pub fn head(t: &Triple) -> Self {
        Self {
            target: t.predicate,
            bound: t.object,
            bound_slot: Slot::Object,
            truth: t.subject,
        }
    }

    /// The triple stating that `answer` fills the open slot.
    pub fn triple_with(&self, answer: EntityId) -> Triple {
        match self.bound_slot {
            Slot::Subject => Triple::new(self.bound, self.target, answer),
            Slot::Object => Triple::new(answer, self.target, self.bound),
        }
    }
}

/// Lexicographic comparison of two descending confidence lists; `Greater`
/// means `a` ranks ahead. A list that extends the other ranks ahead.
pub fn compare_confidences(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    a.len().cmp(&b.len())
}

#[derive(Clone, Debug, Default)]
pub struct CandidateList {
    /// candidate → (confidence, rule id) of each suggesting rule
    entries: FxHashMap<EntityId, Vec<(f64, usize)>>,
}

impl CandidateList {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn suggest(&mut self, candidate: EntityId, confidence: f64, rule_id: usize) {
        self.entries.entry(candidate).or_default().push((confidence, rule_id));
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn confidences(&self, candidate: EntityId) -> Vec<f64> {
        let mut c: Vec<f64> = self
            .entries
            .get(&candidate)
            .map(|v| v.iter().map(|&(c, _)| c).collect())
            .unwrap_or_default();
        c.sort_by(|a, b| b.total_cmp(a));
        c
    }

    /// Rule ids suggesting `candidate`, strongest first.
    pub fn suggesters(&self, candidate: EntityId) -> Vec<usize> {
        let mut v = self.entries.get(&candidate).cloned().unwrap_or_default();
        v.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        v.into_iter().map(|(_, id)| id).collect()
    }
}

/// Orders candidates by maximum aggregation; exact ties by entity id.
pub fn aggregate_max(list: &CandidateList) -> Vec<EntityId> {
    let mut keyed: Vec<(EntityId, Vec<f64>)> = list.entries.keys().map(|&e| (e, list.confidences(e))).collect();
    keyed.sort_by(|(ea, ca), (eb, cb)| compare_confidences(cb, ca).then(ea.cmp(eb)));
    keyed.into_iter().map(|(e, _)| e).collect()
}

#[derive(Clone, Debug)]
pub struct KgcConfig {
    pub measure: Measure,
    pub candidates_per_rule: usize,
    pub query_time: Duration,
    pub grounding_cap: usize,
    pub seed: u64,
    /// Keep the top candidates of every query for the debug log.
    pub debug: bool,
}

impl Default for KgcConfig {
    fn default() -> Self {
        Self {
            measure: Measure::Smc,
            candidates_per_rule: 1000,
            query_time: Duration::from_secs(5),
            grounding_cap: crate::ground::DEFAULT_GROUNDING_CAP,
            seed: 42,
            debug: false,
        }
    }
}

/// Rules of one target, grouped for query answering.
#[derive(Debug, Default)]
struct TargetRules {
    cars: Vec<usize>,
    /// template id → instantiated rules whose original variable sits in
    /// `origin` slot, keyed by that slot.
    open_anchored: [Vec<(usize, Vec<usize>)>; 2],
    /// (anchor slot, anchor) → (template id, rule id)
    bound_anchored: FxHashMap<(usize, EntityId), Vec<(usize, usize)>>,
}

fn slot_ix(s: Slot) -> usize {
    match s {
        Slot::Subject => 0,
        Slot::Object => 1,
    }
}

/// A learned rule set indexed for inference.
#[derive(Debug)]
pub struct RuleBook {
    rules: Vec<ScoredRule>,
    confidence: Vec<f64>,
    templates: Vec<Rule>,
    template_index: Vec<OnceLock<GroundingIndex>>,
    targets: FxHashMap<PredicateId, TargetRules>,
}

impl RuleBook {
    /// Templates and rules of unknown kind are ignored.
    pub fn new(rules: Vec<ScoredRule>, measure: Measure) -> Self {
        let mut templates = Vec::new();
        let mut template_ids: FxHashMap<Rule, usize> = FxHashMap::default();
        let mut targets: FxHashMap<PredicateId, TargetRules> = FxHashMap::default();
        let confidence = rules.iter().map(|r| r.stats.measure(measure)).collect();
        for (id, r) in rules.iter().enumerate() {
            let rule = &r.rule;
            let entry = targets.entry(rule.target()).or_default();
            match rule.kind() {
                RuleKind::Template => {}
                RuleKind::Car => entry.cars.push(id),
                RuleKind::Har | RuleKind::Bar => {
                    let template = rule.template_of();
                    let tid = *template_ids.entry(template.clone()).or_insert_with(|| {
                        templates.push(template);
                        templates.len() - 1
                    });
                    let origin = slot_ix(rule.origin());
                    let list = &mut entry.open_anchored[origin];
                    match list.iter_mut().find(|(t, _)| *t == tid) {
                        Some((_, ids)) => ids.push(id),
                        None => list.push((tid, vec![id])),
                    }
                    let anchor = rule.free_constant().expect("instantiated");
                    entry
                        .bound_anchored
                        .entry((slot_ix(rule.origin().opposite()), anchor))
                        .or_default()
                        .push((tid, id));
                }
            }
        }
        let template_index = templates.iter().map(|_| OnceLock::new()).collect();
        Self {
            rules,
            confidence,
            templates,
            template_index,
            targets,
        }
    }

    pub fn rules(&self) -> &[ScoredRule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn covers(&self, target: PredicateId) -> bool {
        self.targets.contains_key(&target)
    }

    fn index(&self, g: &KnowledgeGraph, tid: usize, cfg: &KgcConfig) -> &GroundingIndex {
        self.template_index[tid].get_or_init(|| {
            let t = &self.templates[tid];
            let seed = crate::specialize::derive_seed(cfg.seed, t.target().0 as u64);
            GroundingIndex::build(g, t, cfg.grounding_cap, seed).expect("templates ground")
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct QueryAnswer {
    /// Candidates in ranked order.
    pub ranking: Vec<EntityId>,
    pub raw_rank: Option<usize>,
    pub filtered_rank: Option<usize>,
    pub capped: bool,
    pub timed_out: bool,
}

fn collect_candidates(
    q: &Query,
    book: &RuleBook,
    g: &KnowledgeGraph,
    cfg: &KgcConfig,
    capped: &mut bool,
    timed_out: &mut bool,
) -> CandidateList {
    let mut list = CandidateList::new();
    let Some(tr) = book.targets.get(&q.target) else {
        return list;
    };
    let started = Instant::now();
    let over_time = |timed_out: &mut bool| {
        if started.elapsed() >= cfg.query_time {
            *timed_out = true;
        }
        *timed_out
    };
    let mut ends = FxHashSet::default();

    for &id in &tr.cars {
        if over_time(timed_out) {
            return list;
        }
        let rule = &book.rules[id].rule;
        if rule.is_self_aligned() {
            continue;
        }
        let body = match q.bound_slot {
            Slot::Subject => rule.body().to_vec(),
            Slot::Object => reverse_chain(rule.body()),
        };
        ends.clear();
        walk_ends(g, &body, q.bound, WalkFilter::default(), &mut ends);
        let mut found: Vec<EntityId> = ends.iter().copied().collect();
        if found.len() > cfg.candidates_per_rule {
            found.sort_unstable();
            found.truncate(cfg.candidates_per_rule);
            *capped = true;
        }
        for e in found {
            list.suggest(e, book.confidence[id], id);
        }
    }

    // anchor in the open slot: the bound entity is the original binding
    for (tid, ids) in &tr.open_anchored[slot_ix(q.bound_slot)] {
        if over_time(timed_out) {
            return list;
        }
        ends.clear();
        walk_ends(g, book.templates[*tid].body(), q.bound, WalkFilter::default(), &mut ends);
        if ends.is_empty() {
            continue;
        }
        for &id in ids {
            let rule = &book.rules[id].rule;
            let c = rule.free_constant().expect("instantiated");
            let aligned = rule.is_self_aligned();
            let grounds = match rule.tail_constant() {
                Some(d) => ends.contains(&d) && !(aligned && d == c),
                None if aligned => ends.iter().any(|&t| t != c),
                None => true,
            };
            if grounds {
                list.suggest(c, book.confidence[id], id);
            }
        }
    }

    // anchor in the bound slot: candidates are the body's original bindings
    if let Some(entries) = tr.bound_anchored.get(&(slot_ix(q.bound_slot), q.bound)) {
        for &(tid, id) in entries {
            if over_time(timed_out) {
                return list;
            }
            let index = book.index(g, tid, cfg);
            let origins = index.rule_origins(&book.rules[id].rule);
            if origins.len() > cfg.candidates_per_rule {
                *capped = true;
            }
            for &o in origins.iter().take(cfg.candidates_per_rule) {
                list.suggest(o, book.confidence[id], id);
            }
        }
    }
    list
}

/// Ranks candidate answers of `q`. The filtered rank skips candidates other
/// than the truth that already form a known triple in any split.
pub fn answer_query(q: &Query, book: &RuleBook, split: &SplitSet, cfg: &KgcConfig) -> (QueryAnswer, CandidateList) {
    let mut capped = false;
    let mut timed_out = false;
    let list = collect_candidates(q, book, &split.train, cfg, &mut capped, &mut timed_out);
    if capped {
        log::debug!("candidate cap hit for query {q:?}");
    }
    if timed_out {
        log::warn!("query {q:?} hit the {:?} time limit", cfg.query_time);
    }
    let ranking = aggregate_max(&list);
    let mut raw_rank = None;
    let mut filtered_rank = None;
    let mut skipped = 0;
    for (i, &e) in ranking.iter().enumerate() {
        if e == q.truth {
            raw_rank = Some(i + 1);
            filtered_rank = Some(i + 1 - skipped);
            break;
        }
        if split.contains(&q.triple_with(e), Scope::All) {
            skipped += 1;
        }
    }
    (
        QueryAnswer {
            ranking,
            raw_rank,
            filtered_rank,
            capped,
            timed_out,
        },
        list,
    )
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Metrics {
    pub queries: usize,
    pub mrr: f64,
    pub hits1: f64,
    pub hits3: f64,
    pub hits10: f64,
}

#[derive(Clone, Copy, Debug, Default)]
struct MetricSums {
    queries: usize,
    rr: f64,
    h1: usize,
    h3: usize,
    h10: usize,
}

impl MetricSums {
    fn add(&mut self, rank: Option<usize>) {
        self.queries += 1;
        if let Some(r) = rank {
            self.rr += 1.0 / r as f64;
            self.h1 += (r <= 1) as usize;
            self.h3 += (r <= 3) as usize;
            self.h10 += (r <= 10) as usize;
        }
    }

    fn merge(mut self, o: MetricSums) -> Self {
        self.queries += o.queries;
        self.rr += o.rr;
        self.h1 += o.h1;
        self.h3 += o.h3;
        self.h10 += o.h10;
        self
    }

    fn finish(&self) -> Metrics {
        if self.queries == 0 {
            return Metrics::default();
        }
        let n = self.queries as f64;
        Metrics {
            queries: self.queries,
            mrr: self.rr / n,
            hits1: self.h1 as f64 / n,
            hits3: self.h3 as f64 / n,
            hits10: self.h10 as f64 / n,
        }
    }
}

/// Metrics from filtered ranks; `None` is an unranked truth and scores 0.
pub fn metrics_from_ranks(ranks: &[Option<usize>]) -> Metrics {
    let mut s = MetricSums::default();
    for &r in ranks {
        s.add(r);
    }
    s.finish()
}

#[derive(Clone, Debug)]
pub struct QueryDebug {
    pub query: Query,
    pub filtered_rank: Option<usize>,
    /// Top-10 candidates with the ids of their suggesting rules.
    pub top: Vec<(EntityId, Vec<usize>)>,
}

#[derive(Clone, Debug, Default)]
pub struct KgcReport {
    pub overall: Metrics,
    pub per_predicate: Vec<(PredicateId, Metrics)>,
    pub capped_queries: usize,
    pub timed_out_queries: usize,
    pub debug: Vec<QueryDebug>,
}

/// Answers a head and a tail query for every test triple.
pub fn evaluate(test: &[Triple], book: &RuleBook, split: &SplitSet, cfg: &KgcConfig) -> KgcReport {
    let queries: Vec<Query> = test.iter().flat_map(|t| [Query::head(t), Query::tail(t)]).collect();
    let answered: Vec<(Query, QueryAnswer, Option<QueryDebug>)> = queries
        .par_iter()
        .map(|q| {
            let (a, list) = answer_query(q, book, split, cfg);
            let dbg = cfg.debug.then(|| QueryDebug {
                query: *q,
                filtered_rank: a.filtered_rank,
                top: a.ranking.iter().take(10).map(|&e| (e, list.suggesters(e))).collect(),
            });
            (*q, a, dbg)
        })
        .collect();

    let mut overall = MetricSums::default();
    let mut per: FxHashMap<PredicateId, MetricSums> = FxHashMap::default();
    let mut report = KgcReport::default();
    for (q, a, dbg) in answered {
        overall.add(a.filtered_rank);
        per.entry(q.target).or_default().add(a.filtered_rank);
        report.capped_queries += a.capped as usize;
        report.timed_out_queries += a.timed_out as usize;
        report.debug.extend(dbg);
    }
    report.overall = overall.finish();
    let mut per: Vec<(PredicateId, Metrics)> = per.into_iter().map(|(p, s)| (p, s.finish())).collect();
    per.sort_by_key(|(p, _)| *p);
    report.per_predicate = per;
    report
}

/// Sum of two partial metric tallies; kept public for callers that shard
/// queries themselves.
pub fn merge_metrics(a: Metrics, b: Metrics) -> Metrics {
    let to_sums = |m: Metrics| MetricSums {
        queries: m.queries,
        rr: m.mrr * m.queries as f64,
        h1: (m.hits1 * m.queries as f64).round() as usize,
        h3: (m.hits3 * m.queries as f64).round() as usize,
        h10: (m.hits10 * m.queries as f64).round() as usize,
    };
    to_sums(a).merge(to_sums(b)).finish()
}
