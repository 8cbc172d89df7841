#![allow(dead_code)]

use std::collections::BTreeSet;

use kgrules::rule::{BodyAtom, Rule};
use kgrules::store::{Direction, EntityId, SplitSet, Triple};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random dataset with `train` triples (before dedup) over `entities`
/// entities and `predicates` predicates, plus small valid/test splits.
pub fn random_split(seed: u64, entities: usize, predicates: usize, train: usize, held_out: usize) -> SplitSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let line = |rng: &mut ChaCha8Rng| {
        let s = rng.gen_range(0..entities);
        let mut o = rng.gen_range(0..entities);
        if o == s {
            o = (o + 1) % entities;
        }
        // skew predicate use so some relations are dense
        let p = (rng.gen_range(0..predicates * predicates) as f64).sqrt() as usize;
        format!("e{s}\tp{p}\te{o}\n")
    };
    let tr: String = (0..train).map(|_| line(&mut rng)).collect();
    let va: String = (0..held_out).map(|_| line(&mut rng)).collect();
    let te: String = (0..held_out).map(|_| line(&mut rng)).collect();
    SplitSet::from_text(&tr, &va, &te).unwrap()
}

fn step(t: &Triple, atom: BodyAtom, from: EntityId) -> Option<EntityId> {
    if t.predicate != atom.predicate {
        return None;
    }
    match atom.direction {
        Direction::Forward if t.subject == from => Some(t.object),
        Direction::Reverse if t.object == from => Some(t.subject),
        _ => None,
    }
}

fn extend(triples: &[Triple], body: &[BodyAtom], walk: &mut Vec<EntityId>, out: &mut Vec<Vec<EntityId>>) {
    let depth = walk.len() - 1;
    if depth == body.len() {
        out.push(walk.clone());
        return;
    }
    let from = *walk.last().unwrap();
    for t in triples {
        if let Some(next) = step(t, body[depth], from) {
            if !walk.contains(&next) {
                walk.push(next);
                extend(triples, body, walk, out);
                walk.pop();
            }
        }
    }
}

/// Every node sequence that grounds `body`, found by scanning all triples
/// at every step.
pub fn all_walks(triples: &[Triple], body: &[BodyAtom]) -> Vec<Vec<EntityId>> {
    let mut starts = BTreeSet::new();
    for t in triples {
        starts.insert(t.subject);
        starts.insert(t.object);
    }
    let mut out = Vec::new();
    for s in starts {
        extend(triples, body, &mut vec![s], &mut out);
    }
    out
}

/// Distinct predicted head triples of `rule`, straight from the definition.
/// `walks` are the groundings of the rule's template (or of the CAR).
pub fn oracle_predictions(rule: &Rule, walks: &[Vec<EntityId>]) -> BTreeSet<Triple> {
    let mut out = BTreeSet::new();
    for w in walks {
        let origin = w[0];
        let tail = *w.last().unwrap();
        match rule.free_constant() {
            None => {
                let head = rule.head_triple(origin, tail);
                // a single-edge walk that is the head itself is no evidence
                if w.len() == 2 && rule.is_self_aligned() {
                    continue;
                }
                out.insert(head);
            }
            Some(c) => {
                if rule.tail_constant().is_some_and(|d| d != tail) {
                    continue;
                }
                let head = rule.head_triple(origin, c);
                if rule.is_self_aligned() && tail == c {
                    continue;
                }
                out.insert(head);
            }
        }
    }
    out
}

/// `(SP, BG, FBG)` of `rule` by brute force.
pub fn oracle_counts(rule: &Rule, walks: &[Vec<EntityId>], train: &[Triple]) -> (u64, u64, u64) {
    let preds = oracle_predictions(rule, walks);
    let known: BTreeSet<&Triple> = train.iter().collect();
    let subjects: BTreeSet<EntityId> = train
        .iter()
        .filter(|t| t.predicate == rule.target())
        .map(|t| t.subject)
        .collect();
    let sp = preds.iter().filter(|t| known.contains(t)).count() as u64;
    let fbg = preds.iter().filter(|t| subjects.contains(&t.subject)).count() as u64;
    (sp, preds.len() as u64, fbg)
}

pub fn train_triples(split: &SplitSet) -> Vec<Triple> {
    split.train_set.as_slice().to_vec()
}
