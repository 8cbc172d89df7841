//! Generalisation: random walks from positive instances are abstracted into
//! templates and CARs until the abstract-rule space saturates.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::{FxHashMap, FxHashSet};

use crate::rule::{abstraction, slot_entity, Path, Rule, RuleKind, Slot, Step};
use crate::store::{Direction, EntityId, KnowledgeGraph, Triple, Vocab};

#[derive(Clone, Debug)]
pub struct GenConfig {
    /// Saturation threshold in `(0, 1]`.
    pub saturation: f64,
    /// Paths per saturation check.
    pub batch_size: usize,
    /// Maximum body length.
    pub max_len: usize,
    /// Walks per sampler invocation.
    pub paths_per_call: usize,
    pub seed: u64,
    /// Wall-clock guard; the partial map is returned when it fires.
    pub time_limit: Option<Duration>,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            saturation: 0.99,
            batch_size: 10_000,
            max_len: 3,
            paths_per_call: 100,
            seed: 42,
            time_limit: Some(Duration::from_secs(60)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    Saturated,
    TimeLimit,
    /// No instance has an edge to walk.
    NoPaths,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RuleCount {
    pub count: u64,
    /// Index of the batch in which the rule was first seen.
    pub first_batch: u64,
}

/// Abstract rule → number of sampled paths that generalised to it.
#[derive(Clone, Debug)]
pub struct FrequencyMap {
    entries: FxHashMap<Rule, RuleCount>,
    pub paths: u64,
    pub batches: u64,
    pub last_saturation: f64,
    pub stop: StopReason,
}

impl Default for FrequencyMap {
    fn default() -> Self {
        Self::new()
    }
}

impl FrequencyMap {
    fn empty(stop: StopReason) -> Self {
        Self {
            entries: FxHashMap::default(),
            paths: 0,
            batches: 0,
            last_saturation: 0.0,
            stop,
        }
    }

    /// An empty map, for scripted saturation checks.
    pub fn new() -> Self {
        Self::empty(StopReason::TimeLimit)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn frequency(&self, rule: &Rule) -> u64 {
        self.entries.get(rule).map_or(0, |c| c.count)
    }

    pub fn get(&self, rule: &Rule) -> Option<RuleCount> {
        self.entries.get(rule).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Rule, &RuleCount)> {
        self.entries.iter()
    }

    /// Adds an occurrence, recording `batch` when the rule is new.
    pub fn record(&mut self, rule: Rule, batch: u64) {
        self.entries
            .entry(rule)
            .or_insert(RuleCount {
                count: 0,
                first_batch: batch,
            })
            .count += 1;
    }

    /// Fraction of `batch_rules` that were already known before `batch` began.
    pub fn saturation_of(&self, batch_rules: &FxHashSet<Rule>, batch: u64) -> f64 {
        if batch_rules.is_empty() {
            return 0.0;
        }
        let known = batch_rules
            .iter()
            .filter(|r| self.entries.get(*r).is_some_and(|c| c.first_batch < batch))
            .count();
        known as f64 / batch_rules.len() as f64
    }
}

fn instance_edge(instance: &Triple, at: EntityId, predicate: crate::store::PredicateId, dir: Direction, other: EntityId) -> bool {
    let t = match dir {
        Direction::Forward => Triple::new(at, predicate, other),
        Direction::Reverse => Triple::new(other, predicate, at),
    };
    t == *instance
}

/// One random walk of at most `len` steps from `start`.
fn walk<R: Rng>(g: &KnowledgeGraph, instance: &Triple, start: Slot, len: usize, rng: &mut R) -> Option<Path> {
    let origin = slot_entity(instance, start);
    let opposite = slot_entity(instance, start.opposite());
    let mut visited = vec![origin];
    let mut steps: Vec<Step> = Vec::with_capacity(len);
    let mut current = origin;
    let mut candidates = Vec::new();
    for _ in 0..len {
        let degree = g.degree(current);
        if degree == 0 {
            break;
        }
        let valid = |i: usize| {
            let e = g.edge_at(current, i);
            !visited.contains(&e.other) && !instance_edge(instance, current, e.predicate, e.direction, e.other)
        };
        // Rejection sampling first; fall back to an exact scan on dense failures.
        let mut chosen = None;
        for _ in 0..16 {
            let i = rng.gen_range(0..degree);
            if valid(i) {
                chosen = Some(i);
                break;
            }
        }
        if chosen.is_none() {
            candidates.clear();
            candidates.extend((0..degree).filter(|&i| valid(i)));
            chosen = candidates.choose(rng).copied();
        }
        let Some(i) = chosen else { break };
        let e = g.edge_at(current, i);
        steps.push(Step {
            predicate: e.predicate,
            direction: e.direction,
            from: current,
            to: e.other,
        });
        if e.other == opposite {
            break;
        }
        visited.push(e.other);
        current = e.other;
    }
    if steps.is_empty() {
        return None;
    }
    Some(Path {
        instance: *instance,
        start,
        steps,
    })
}

/// Samples up to `paths_per_call` walks starting at either endpoint of
/// `instance`. Walk lengths are uniform in `[1, max_len]`; walks never use
/// the instance edge, never revisit a node, and stop when they reach the
/// opposite endpoint.
pub fn path_sampler<R: Rng>(g: &KnowledgeGraph, instance: &Triple, cfg: &GenConfig, rng: &mut R) -> Vec<Path> {
    let mut paths = Vec::with_capacity(cfg.paths_per_call);
    if cfg.max_len == 0 {
        return paths;
    }
    for _ in 0..cfg.paths_per_call {
        let start = if rng.gen_bool(0.5) { Slot::Subject } else { Slot::Object };
        let len = rng.gen_range(1..=cfg.max_len);
        if let Some(p) = walk(g, instance, start, len, rng) {
            paths.push(p);
        }
    }
    paths
}

fn has_walkable_edge(g: &KnowledgeGraph, instance: &Triple, at: EntityId) -> bool {
    g.neighbors(at).is_ok_and(|mut edges| {
        edges.any(|e| e.other != at && !instance_edge(instance, at, e.predicate, e.direction, e.other))
    })
}

/// Builds the rule frequency map, stopping once the share of already-known
/// rules in a batch exceeds `cfg.saturation`.
pub fn generalize(g: &KnowledgeGraph, instances: &[Triple], cfg: &GenConfig) -> FrequencyMap {
    let started = Instant::now();
    let live: Vec<Triple> = instances
        .iter()
        .filter(|t| has_walkable_edge(g, t, t.subject) || has_walkable_edge(g, t, t.object))
        .copied()
        .collect();
    if live.is_empty() {
        return FrequencyMap::empty(StopReason::NoPaths);
    }
    let batch_size = cfg.batch_size.max(1) as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut map = FrequencyMap::empty(StopReason::TimeLimit);
    let mut batch_rules: FxHashSet<Rule> = FxHashSet::default();
    loop {
        if cfg.time_limit.is_some_and(|limit| started.elapsed() >= limit) {
            map.stop = StopReason::TimeLimit;
            log::debug!("generalisation hit its time limit after {} paths", map.paths);
            return map;
        }
        let instance = live[rng.gen_range(0..live.len())];
        for path in path_sampler(g, &instance, cfg, &mut rng) {
            map.paths += 1;
            let rule = match abstraction(&path) {
                Ok(r) => r,
                Err(e) => {
                    debug_assert!(false, "sampler produced an invalid path: {e}");
                    continue;
                }
            };
            map.record(rule.clone(), map.batches);
            batch_rules.insert(rule);
            if map.paths.is_multiple_of(batch_size) {
                let sat = map.saturation_of(&batch_rules, map.batches);
                map.last_saturation = sat;
                map.batches += 1;
                batch_rules.clear();
                if sat > cfg.saturation {
                    map.stop = StopReason::Saturated;
                    return map;
                }
            }
        }
    }
}

/// Orders the abstract rules for specialisation: CARs by descending
/// frequency, then templates grouped by increasing length, each group by
/// descending frequency. Ties fall back to the printed rule text.
type SortKey = (u8, usize, std::cmp::Reverse<u64>, String);

pub fn sort(map: &FrequencyMap, vocab: &Vocab) -> Vec<Rule> {
    let mut keyed: Vec<(SortKey, &Rule)> = map
        .iter()
        .map(|(r, c)| {
            let group = match r.kind() {
                RuleKind::Car => (0, 0),
                _ => (1, r.len()),
            };
            ((group.0, group.1, std::cmp::Reverse(c.count), r.render(vocab)), r)
        })
        .collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    keyed.into_iter().map(|(_, r)| r.clone()).collect()
}
