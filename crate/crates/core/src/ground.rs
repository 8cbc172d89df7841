//! Grounding of rule bodies over the training graph.
//!
//! A grounding is a walk that satisfies every body atom without revisiting a
//! node. Groundings are kept compactly as `(origin, tail)` constant pairs:
//! the bindings of the original variable and of the last chain variable
//! (for a CAR these are the head bindings `(x, y)`).

use std::borrow::Cow;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustc_hash::{FxHashMap, FxHashSet};

use crate::error::LearnError;
use crate::rule::{BodyAtom, Rule, RuleKind};
use crate::store::{Direction, EntityId, KnowledgeGraph, Triple};

pub const DEFAULT_GROUNDING_CAP: usize = 100_000;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GroundingSet {
    /// Distinct pairs sorted by `(origin, tail)`.
    pub pairs: Vec<(EntityId, EntityId)>,
    pub truncated: bool,
}

impl GroundingSet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Constraints applied while walking a body from one start entity.
#[derive(Clone, Copy, Debug, Default)]
pub struct WalkFilter {
    /// The last node must equal this entity.
    pub end: Option<EntityId>,
    /// Edges equal to this triple may not be used.
    pub forbid: Option<Triple>,
}

fn edge_triple(from: EntityId, atom: BodyAtom, to: EntityId) -> Triple {
    match atom.direction {
        Direction::Forward => Triple::new(from, atom.predicate, to),
        Direction::Reverse => Triple::new(to, atom.predicate, from),
    }
}

struct Walk<'a> {
    g: &'a KnowledgeGraph,
    body: &'a [BodyAtom],
    filter: WalkFilter,
    visited: Vec<EntityId>,
}

impl Walk<'_> {
    fn descend(&mut self, depth: usize, current: EntityId, ends: &mut FxHashSet<EntityId>) {
        let atom = self.body[depth];
        let last = depth + 1 == self.body.len();
        if last {
            if let Some(d) = self.filter.end {
                if !self.visited.contains(&d)
                    && self.g.contains(&edge_triple(current, atom, d))
                    && self.filter.forbid != Some(edge_triple(current, atom, d))
                {
                    ends.insert(d);
                }
                return;
            }
        }
        for &next in self.g.step(current, atom.predicate, atom.direction) {
            if self.visited.contains(&next) {
                continue;
            }
            if let Some(f) = self.filter.forbid {
                if edge_triple(current, atom, next) == f {
                    continue;
                }
            }
            if last {
                ends.insert(next);
            } else {
                self.visited.push(next);
                self.descend(depth + 1, next, ends);
                self.visited.pop();
            }
        }
    }
}

/// Collects the distinct end nodes of all walks of `body` from `start`.
pub fn walk_ends(
    g: &KnowledgeGraph,
    body: &[BodyAtom],
    start: EntityId,
    filter: WalkFilter,
    ends: &mut FxHashSet<EntityId>,
) {
    if body.is_empty() {
        return;
    }
    let mut w = Walk {
        g,
        body,
        filter,
        visited: vec![start],
    };
    w.descend(0, start, ends);
}

/// Entities that can ground the first atom of `body`.
pub fn start_entities(g: &KnowledgeGraph, body: &[BodyAtom]) -> Vec<EntityId> {
    let Some(first) = body.first() else {
        return Vec::new();
    };
    let mut starts: Vec<EntityId> = g
        .instances(first.predicate)
        .iter()
        .map(|&(s, o)| match first.direction {
            Direction::Forward => s,
            Direction::Reverse => o,
        })
        .collect();
    starts.sort_unstable();
    starts.dedup();
    starts
}

fn enumerate(
    g: &KnowledgeGraph,
    rule: &Rule,
    cap: usize,
    seed: u64,
    filter_for: impl Fn(EntityId) -> WalkFilter,
) -> GroundingSet {
    let mut starts = start_entities(g, rule.body());
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ rule.template_of().stable_hash());
    starts.shuffle(&mut rng);
    let mut pairs = Vec::new();
    let mut truncated = false;
    let mut ends = FxHashSet::default();
    let mut sorted = Vec::new();
    for o in starts {
        ends.clear();
        walk_ends(g, rule.body(), o, filter_for(o), &mut ends);
        if ends.is_empty() {
            continue;
        }
        sorted.clear();
        sorted.extend(ends.iter().copied());
        sorted.sort_unstable();
        let room = cap.saturating_sub(pairs.len());
        if sorted.len() > room {
            pairs.extend(sorted[..room].iter().map(|&t| (o, t)));
            truncated = true;
            break;
        }
        pairs.extend(sorted.iter().map(|&t| (o, t)));
    }
    pairs.sort_unstable();
    GroundingSet { pairs, truncated }
}

/// Grounds an abstract rule (template or CAR). Start entities are visited in
/// a seeded random order so that truncation at `cap` is unbiased.
pub fn ground(g: &KnowledgeGraph, rule: &Rule, cap: usize, seed: u64) -> Result<GroundingSet, LearnError> {
    match rule.kind() {
        RuleKind::Template => Ok(enumerate(g, rule, cap, seed, |_| WalkFilter::default())),
        // Every grounding of a self-aligned CAR is its own head triple.
        RuleKind::Car if rule.is_self_aligned() => Ok(GroundingSet::default()),
        RuleKind::Car => Ok(enumerate(g, rule, cap, seed, |_| WalkFilter::default())),
        RuleKind::Har | RuleKind::Bar => Err(LearnError::WrongKind("instantiated")),
    }
}

/// Grounds one HAR or BAR on its own, with its constants substituted before
/// traversal. This is the per-rule evaluation path that collective scoring
/// replaces; it is kept for benchmarking and cross-checking.
pub fn ground_instantiated(g: &KnowledgeGraph, rule: &Rule, cap: usize, seed: u64) -> Result<GroundingSet, LearnError> {
    if !rule.is_instantiated() {
        return Err(LearnError::WrongKind("abstract"));
    }
    let free = rule.free_constant().expect("instantiated rules carry a free constant");
    let aligned = rule.is_self_aligned();
    let end = rule.tail_constant();
    Ok(enumerate(g, rule, cap, seed, |o| WalkFilter {
        end,
        forbid: aligned.then(|| rule.head_triple(o, free)),
    }))
}

/// Bindings of the far end of `rule`'s body when the original variable is
/// bound to `bound`: the `Y` values of a CAR, the tail values of a template
/// or HAR (non-empty iff the body grounds), and `{tail}` or `{}` for a BAR.
pub fn body_bindings_from(g: &KnowledgeGraph, rule: &Rule, bound: EntityId, cap: usize) -> Vec<EntityId> {
    if rule.kind() == RuleKind::Car && rule.is_self_aligned() {
        return Vec::new();
    }
    let forbid = match rule.free_constant() {
        Some(c) if rule.is_self_aligned() => Some(rule.head_triple(bound, c)),
        _ => None,
    };
    let mut ends = FxHashSet::default();
    walk_ends(
        g,
        rule.body(),
        bound,
        WalkFilter {
            end: rule.tail_constant(),
            forbid,
        },
        &mut ends,
    );
    let mut out: Vec<EntityId> = ends.into_iter().collect();
    out.sort_unstable();
    out.truncate(cap);
    out
}

/// A grounding set of an abstract rule, indexed by origin and by tail.
#[derive(Clone, Debug)]
pub struct GroundingIndex {
    rule: Rule,
    set: GroundingSet,
    origins: Vec<EntityId>,
    /// Second components of `set.pairs`, in the same order.
    tails: Vec<EntityId>,
    /// `origin_starts[i]..origin_starts[i + 1]` are the pairs of `origins[i]`.
    origin_starts: Vec<usize>,
    origin_pos: FxHashMap<EntityId, usize>,
    by_tail: FxHashMap<EntityId, Vec<EntityId>>,
}

impl GroundingIndex {
    pub fn new(rule: Rule, set: GroundingSet) -> Self {
        let mut origins = Vec::new();
        let mut origin_starts = Vec::new();
        let mut by_tail: FxHashMap<EntityId, Vec<EntityId>> = FxHashMap::default();
        for (i, &(o, t)) in set.pairs.iter().enumerate() {
            if origins.last() != Some(&o) {
                origins.push(o);
                origin_starts.push(i);
            }
            by_tail.entry(t).or_default().push(o);
        }
        origin_starts.push(set.pairs.len());
        let origin_pos = origins.iter().enumerate().map(|(i, &o)| (o, i)).collect();
        let tails = set.pairs.iter().map(|&(_, t)| t).collect();
        Self {
            rule,
            set,
            origins,
            tails,
            origin_starts,
            origin_pos,
            by_tail,
        }
    }

    pub fn build(g: &KnowledgeGraph, rule: &Rule, cap: usize, seed: u64) -> Result<Self, LearnError> {
        let set = ground(g, rule, cap, seed)?;
        Ok(Self::new(rule.clone(), set))
    }

    pub fn rule(&self) -> &Rule {
        &self.rule
    }

    pub fn set(&self) -> &GroundingSet {
        &self.set
    }

    pub fn pairs(&self) -> &[(EntityId, EntityId)] {
        &self.set.pairs
    }

    pub fn origins(&self) -> &[EntityId] {
        &self.origins
    }

    pub fn tails(&self, origin: EntityId) -> &[EntityId] {
        match self.origin_pos.get(&origin) {
            Some(&i) => &self.tails[self.origin_starts[i]..self.origin_starts[i + 1]],
            None => &[],
        }
    }

    /// Origins whose walks end at `tail`, sorted.
    pub fn origins_with_tail(&self, tail: EntityId) -> &[EntityId] {
        self.by_tail.get(&tail).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn has_origin(&self, origin: EntityId) -> bool {
        self.origin_pos.contains_key(&origin)
    }

    /// Whether `origin` grounds the body of `rule`, a HAR/BAR derived from
    /// this index's template.
    pub fn grounds(&self, rule: &Rule, origin: EntityId) -> bool {
        let free = rule.free_constant();
        match rule.tail_constant() {
            Some(d) => {
                !(rule.is_self_aligned() && Some(d) == free)
                    && self.origins_with_tail(d).binary_search(&origin).is_ok()
            }
            None => {
                let tails = self.tails(origin);
                match free {
                    Some(c) if rule.is_self_aligned() => tails.iter().any(|&t| t != c),
                    _ => !tails.is_empty(),
                }
            }
        }
    }

    /// Origins whose every walk ends at `free`; a self-aligned HAR cannot
    /// use them because each such walk is the predicted head triple.
    fn aligned_exclusions(&self, free: EntityId) -> usize {
        self.origins_with_tail(free)
            .iter()
            .filter(|&&o| self.tails(o).len() == 1)
            .count()
    }

    /// The distinct origin bindings grounding `rule` (HAR/BAR of this template).
    pub fn rule_origins(&self, rule: &Rule) -> Cow<'_, [EntityId]> {
        match (rule.tail_constant(), rule.free_constant()) {
            (Some(d), free) => {
                if rule.is_self_aligned() && Some(d) == free {
                    Cow::Borrowed(&[])
                } else {
                    Cow::Borrowed(self.origins_with_tail(d))
                }
            }
            (None, Some(_)) if rule.is_self_aligned() => {
                Cow::Owned(self.origins.iter().copied().filter(|&o| self.grounds(rule, o)).collect())
            }
            _ => Cow::Borrowed(&self.origins),
        }
    }

    /// `|rule_origins(rule)|` without materialising the list.
    pub fn rule_origin_count(&self, rule: &Rule) -> usize {
        match (rule.tail_constant(), rule.free_constant()) {
            (Some(_), _) => self.rule_origins(rule).len(),
            (None, Some(c)) if rule.is_self_aligned() => self.origins.len() - self.aligned_exclusions(c),
            _ => self.origins.len(),
        }
    }
}
