//! Timing of collective versus per-rule evaluation over rule groups.

use std::time::{Duration, Instant};

use rustc_hash::FxHashMap;

use crate::error::LearnError;
use crate::evaluate::RuleType;
use crate::rule::{Rule, RuleKind};
use crate::specialize::{derive_seed, rescore, score_baseline, RuleStats, TargetContext};
use crate::store::{KnowledgeGraph, PredicateId, Vocab};

#[derive(Clone, Debug, PartialEq)]
pub struct GroupTiming {
    pub group: RuleType,
    pub rules: usize,
    pub templates: usize,
    pub collective: Duration,
    pub baseline: Duration,
}

impl GroupTiming {
    /// Baseline time over collective time.
    pub fn speedup(&self) -> f64 {
        let c = self.collective.as_secs_f64();
        if c > 0.0 {
            self.baseline.as_secs_f64() / c
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error("score mismatch for `{rule}`: collective {collective:?}, baseline {baseline:?}")]
    Mismatch {
        rule: String,
        collective: (u64, u64, u64),
        baseline: (u64, u64, u64),
    },
}

fn baseline(g: &KnowledgeGraph, rules: &[&Rule], cap: usize, seed: u64, eta: f64) -> Result<Vec<RuleStats>, LearnError> {
    let mut contexts: FxHashMap<PredicateId, TargetContext> = FxHashMap::default();
    let mut out = Vec::with_capacity(rules.len());
    for r in rules {
        let ctx = contexts
            .entry(r.target())
            .or_insert_with(|| TargetContext::new(g, r.target()));
        out.push(score_baseline(r, ctx, eta, cap, derive_seed(seed, r.target().0 as u64))?);
    }
    Ok(out)
}

/// Scores every group both ways, fails on any count mismatch, and reports
/// the time of each mode. Groups are CARs, then instantiated rules by length.
pub fn compare_modes(
    g: &KnowledgeGraph,
    rules: &[Rule],
    vocab: &Vocab,
    cap: usize,
    seed: u64,
    eta: f64,
) -> Result<Vec<GroupTiming>, BenchError> {
    let mut groups: FxHashMap<RuleType, Vec<&Rule>> = FxHashMap::default();
    for r in rules.iter().filter(|r| r.kind() != RuleKind::Template) {
        groups.entry(RuleType::of(r)).or_default().push(r);
    }
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .expect("a one-thread pool");
    let mut keys: Vec<RuleType> = groups.keys().copied().collect();
    keys.sort();
    let mut out = Vec::new();
    for key in keys {
        let group = &groups[&key];
        let owned: Vec<Rule> = group.iter().map(|r| (*r).clone()).collect();
        // one thread for both modes so the times are comparable
        let (fast, collective_time, slow, baseline_time) = single.install(|| {
            let started = Instant::now();
            let fast = rescore(g, &owned, eta, cap, seed);
            let collective_time = started.elapsed();
            let started = Instant::now();
            let slow = baseline(g, group, cap, seed, eta);
            (fast, collective_time, slow, started.elapsed())
        });
        let (fast, slow) = (fast?, slow?);

        for ((r, a), b) in group.iter().zip(&fast).zip(&slow) {
            if a.counts() != b.counts() {
                return Err(BenchError::Mismatch {
                    rule: r.render(vocab),
                    collective: a.counts(),
                    baseline: b.counts(),
                });
            }
        }
        let templates = group.iter().map(|r| r.template_of()).collect::<std::collections::HashSet<_>>().len();
        out.push(GroupTiming {
            group: key,
            rules: group.len(),
            templates,
            collective: collective_time,
            baseline: baseline_time,
        });
    }
    Ok(out)
}
