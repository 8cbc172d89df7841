//! In-memory triple store.
//!
//! Triple files are 3-column TSV (`subject⇥predicate⇥object`, UTF-8, no
//! header). Entity and predicate strings are interned to dense ids in
//! first-seen order, so loading the same files in the same order always
//! yields the same ids. The training split is indexed as a compressed
//! adjacency structure that can be walked in both edge directions; the
//! validation and test splits are kept as plain fact sets.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use rustc_hash::{FxHashMap, FxHashSet};

use crate::error::StoreError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EntityId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PredicateId(pub u32);

impl EntityId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl PredicateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

impl fmt::Display for PredicateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}", self.0)
    }
}

/// Orientation of an edge relative to the node it is read from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    /// Read from subject to object.
    Forward,
    /// Read from object to subject.
    Reverse,
}

impl Direction {
    pub fn flip(self) -> Self {
        match self {
            Direction::Forward => Direction::Reverse,
            Direction::Reverse => Direction::Forward,
        }
    }
}

/// A ground fact `predicate(subject, object)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub subject: EntityId,
    pub predicate: PredicateId,
    pub object: EntityId,
}

impl Triple {
    pub fn new(subject: EntityId, predicate: PredicateId, object: EntityId) -> Self {
        Self {
            subject,
            predicate,
            object,
        }
    }
}

/// Bidirectional string ↔ dense id map.
#[derive(Clone, Debug, Default)]
pub struct Dictionary {
    names: Vec<String>,
    ids: FxHashMap<String, u32>,
}

impl Dictionary {
    pub fn intern(&mut self, name: &str) -> u32 {
        if let Some(&id) = self.ids.get(name) {
            return id;
        }
        let id = self.names.len() as u32;
        self.names.push(name.to_owned());
        self.ids.insert(name.to_owned(), id);
        id
    }

    pub fn get(&self, name: &str) -> Option<u32> {
        self.ids.get(name).copied()
    }

    pub fn name(&self, id: u32) -> Option<&str> {
        self.names.get(id as usize).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &str)> {
        self.names
            .iter()
            .enumerate()
            .map(|(i, n)| (i as u32, n.as_str()))
    }

    /// Writes `id⇥string` lines.
    pub fn dump<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (id, name) in self.iter() {
            writeln!(out, "{id}\t{name}")?;
        }
        Ok(())
    }
}

/// Entity and predicate dictionaries shared by every split of a dataset.
#[derive(Clone, Debug, Default)]
pub struct Vocab {
    pub entities: Dictionary,
    pub predicates: Dictionary,
}

impl Vocab {
    pub fn entity(&mut self, name: &str) -> EntityId {
        EntityId(self.entities.intern(name))
    }

    pub fn predicate(&mut self, name: &str) -> PredicateId {
        PredicateId(self.predicates.intern(name))
    }

    pub fn entity_id(&self, name: &str) -> Option<EntityId> {
        self.entities.get(name).map(EntityId)
    }

    pub fn predicate_id(&self, name: &str) -> Option<PredicateId> {
        self.predicates.get(name).map(PredicateId)
    }

    pub fn entity_name(&self, id: EntityId) -> &str {
        self.entities.name(id.0).unwrap_or("?")
    }

    pub fn predicate_name(&self, id: PredicateId) -> &str {
        self.predicates.name(id.0).unwrap_or("?")
    }

    /// Writes `entities.dict` and `relations.dict` into `dir`.
    pub fn dump_to_dir(&self, dir: &Path) -> std::io::Result<()> {
        let ents = File::create(dir.join("entities.dict"))?;
        self.entities.dump(std::io::BufWriter::new(ents))?;
        let rels = File::create(dir.join("relations.dict"))?;
        self.predicates.dump(std::io::BufWriter::new(rels))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SplitRole {
    Train,
    Valid,
    Test,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scope {
    Train,
    Valid,
    Test,
    All,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LoadStats {
    pub lines_read: usize,
    pub kept: usize,
    pub duplicates: usize,
    pub entities_added: usize,
    pub predicates_added: usize,
}

/// An ordered, duplicate-free set of triples belonging to one split.
#[derive(Clone, Debug)]
pub struct TripleSet {
    pub role: SplitRole,
    triples: Vec<Triple>,
    members: FxHashSet<Triple>,
    pub stats: LoadStats,
}

impl TripleSet {
    pub fn new(role: SplitRole) -> Self {
        Self {
            role,
            triples: Vec::new(),
            members: FxHashSet::default(),
            stats: LoadStats::default(),
        }
    }

    pub fn from_triples(role: SplitRole, triples: impl IntoIterator<Item = Triple>) -> Self {
        let mut set = Self::new(role);
        for t in triples {
            set.insert(t);
        }
        set
    }

    /// Returns false when the triple was already present.
    pub fn insert(&mut self, t: Triple) -> bool {
        if self.members.insert(t) {
            self.triples.push(t);
            true
        } else {
            false
        }
    }

    pub fn contains(&self, t: &Triple) -> bool {
        self.members.contains(t)
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Triple> {
        self.triples.iter()
    }

    pub fn as_slice(&self) -> &[Triple] {
        &self.triples
    }

    fn retain(&mut self, mut keep: impl FnMut(&Triple) -> bool) -> usize {
        let before = self.triples.len();
        self.triples.retain(|t| keep(t));
        self.members = self.triples.iter().copied().collect();
        before - self.triples.len()
    }
}

/// Parses TSV triples from `reader`, interning into `vocab`.
pub fn read_triples<R: BufRead>(
    reader: R,
    role: SplitRole,
    vocab: &mut Vocab,
    source: &Path,
) -> Result<TripleSet, StoreError> {
    let ents_before = vocab.entities.len();
    let preds_before = vocab.predicates.len();
    let mut set = TripleSet::new(role);
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|source_err| StoreError::Io {
            path: source.to_path_buf(),
            source: source_err,
        })?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() {
            continue;
        }
        set.stats.lines_read += 1;
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(StoreError::Malformed {
                path: source.to_path_buf(),
                line: i + 1,
                found: fields.len(),
            });
        }
        let t = Triple::new(
            vocab.entity(fields[0]),
            vocab.predicate(fields[1]),
            vocab.entity(fields[2]),
        );
        if set.insert(t) {
            set.stats.kept += 1;
        } else {
            set.stats.duplicates += 1;
        }
    }
    if set.stats.duplicates > 0 {
        log::warn!(
            "{}: dropped {} duplicate lines",
            source.display(),
            set.stats.duplicates
        );
    }
    set.stats.entities_added = vocab.entities.len() - ents_before;
    set.stats.predicates_added = vocab.predicates.len() - preds_before;
    Ok(set)
}

pub fn load_triples(path: &Path, role: SplitRole, vocab: &mut Vocab) -> Result<TripleSet, StoreError> {
    let file = File::open(path).map_err(|source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_triples(BufReader::new(file), role, vocab, path)
}

/// An edge as seen from one of its endpoints.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub predicate: PredicateId,
    pub direction: Direction,
    pub other: EntityId,
}

/// Read-only adjacency index over the training triples.
///
/// Each entity owns a contiguous slice of edges sorted by
/// `(direction, predicate, other)`, so the neighbours reachable through one
/// `(predicate, direction)` pair form a sub-slice found by binary search.
#[derive(Clone, Debug)]
pub struct KnowledgeGraph {
    offsets: Vec<usize>,
    edge_keys: Vec<(Direction, PredicateId)>,
    edge_targets: Vec<EntityId>,
    triples: FxHashSet<Triple>,
    by_predicate: Vec<Vec<(EntityId, EntityId)>>,
}

impl KnowledgeGraph {
    /// Builds the index. `num_entities` and `num_predicates` size the id
    /// spaces, which may exceed the ids used by `triples`.
    pub fn build(triples: &[Triple], num_entities: usize, num_predicates: usize) -> Self {
        let mut per_entity: Vec<Vec<(Direction, PredicateId, EntityId)>> = vec![Vec::new(); num_entities];
        let mut by_predicate = vec![Vec::new(); num_predicates];
        let mut members = FxHashSet::default();
        for &t in triples {
            if !members.insert(t) {
                continue;
            }
            per_entity[t.subject.index()].push((Direction::Forward, t.predicate, t.object));
            per_entity[t.object.index()].push((Direction::Reverse, t.predicate, t.subject));
            by_predicate[t.predicate.index()].push((t.subject, t.object));
        }
        let mut offsets = Vec::with_capacity(num_entities + 1);
        let mut edge_keys = Vec::new();
        let mut edge_targets = Vec::new();
        offsets.push(0);
        for mut edges in per_entity {
            edges.sort_unstable();
            for (d, p, o) in edges {
                edge_keys.push((d, p));
                edge_targets.push(o);
            }
            offsets.push(edge_keys.len());
        }
        for pairs in &mut by_predicate {
            pairs.sort_unstable();
        }
        Self {
            offsets,
            edge_keys,
            edge_targets,
            triples: members,
            by_predicate,
        }
    }

    pub fn num_entities(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn num_predicates(&self) -> usize {
        self.by_predicate.len()
    }

    pub fn num_triples(&self) -> usize {
        self.triples.len()
    }

    pub fn contains(&self, t: &Triple) -> bool {
        self.triples.contains(t)
    }

    pub fn has(&self, subject: EntityId, predicate: PredicateId, object: EntityId) -> bool {
        self.triples.contains(&Triple::new(subject, predicate, object))
    }

    fn range(&self, e: EntityId) -> std::ops::Range<usize> {
        self.offsets[e.index()]..self.offsets[e.index() + 1]
    }

    /// Every edge incident to `e`: outgoing as `Forward`, incoming as `Reverse`.
    pub fn neighbors(&self, e: EntityId) -> Result<impl Iterator<Item = Edge> + '_, StoreError> {
        if e.index() >= self.num_entities() {
            return Err(StoreError::UnknownEntity(e.0));
        }
        let r = self.range(e);
        Ok(self.edge_keys[r.clone()]
            .iter()
            .zip(&self.edge_targets[r])
            .map(|(&(direction, predicate), &other)| Edge {
                predicate,
                direction,
                other,
            }))
    }

    pub fn degree(&self, e: EntityId) -> usize {
        if e.index() >= self.num_entities() {
            return 0;
        }
        let r = self.range(e);
        r.end - r.start
    }

    /// Edge at position `i` of `e`'s adjacency slice.
    pub fn edge_at(&self, e: EntityId, i: usize) -> Edge {
        let k = self.offsets[e.index()] + i;
        let (direction, predicate) = self.edge_keys[k];
        Edge {
            predicate,
            direction,
            other: self.edge_targets[k],
        }
    }

    /// Entities reached from `e` through `predicate` read in `direction`.
    pub fn step(&self, e: EntityId, predicate: PredicateId, direction: Direction) -> &[EntityId] {
        if e.index() >= self.num_entities() {
            return &[];
        }
        let r = self.range(e);
        let keys = &self.edge_keys[r.clone()];
        let key = (direction, predicate);
        let lo = keys.partition_point(|k| *k < key);
        let hi = lo + keys[lo..].partition_point(|k| *k == key);
        &self.edge_targets[r.start + lo..r.start + hi]
    }

    /// Out-index lookup: objects `o` with `predicate(subject, o)`.
    pub fn objects(&self, subject: EntityId, predicate: PredicateId) -> &[EntityId] {
        self.step(subject, predicate, Direction::Forward)
    }

    /// In-index lookup: subjects `s` with `predicate(s, object)`.
    pub fn subjects(&self, object: EntityId, predicate: PredicateId) -> &[EntityId] {
        self.step(object, predicate, Direction::Reverse)
    }

    /// All `(subject, object)` pairs of `predicate`, sorted.
    pub fn instances(&self, predicate: PredicateId) -> &[(EntityId, EntityId)] {
        self.by_predicate
            .get(predicate.index())
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn triples(&self) -> impl Iterator<Item = &Triple> {
        self.triples.iter()
    }
}

/// The train/valid/test splits of a dataset, sharing one vocabulary.
#[derive(Clone, Debug)]
pub struct SplitSet {
    pub vocab: Vocab,
    pub train: KnowledgeGraph,
    pub train_set: TripleSet,
    pub valid: TripleSet,
    pub test: TripleSet,
    /// Valid/test triples dropped because they already occur in an earlier split.
    pub overlap_dropped: usize,
}

impl SplitSet {
    /// Builds a split set from already interned triple sets. Overlapping
    /// triples are removed from the later split (train, then valid, then test).
    pub fn new(vocab: Vocab, train: TripleSet, mut valid: TripleSet, mut test: TripleSet) -> Self {
        let mut dropped = valid.retain(|t| !train.contains(t));
        dropped += test.retain(|t| !train.contains(t) && !valid.contains(t));
        if dropped > 0 {
            log::warn!("dropped {dropped} valid/test triples that overlap an earlier split");
        }
        let graph = KnowledgeGraph::build(train.as_slice(), vocab.entities.len(), vocab.predicates.len());
        Self {
            vocab,
            train: graph,
            train_set: train,
            valid,
            test,
            overlap_dropped: dropped,
        }
    }

    /// Loads `train.txt`, and `valid.txt` / `test.txt` when present.
    pub fn load_dir(dir: &Path) -> Result<Self, StoreError> {
        let mut vocab = Vocab::default();
        let train = load_triples(&dir.join("train.txt"), SplitRole::Train, &mut vocab)?;
        let mut optional = |name: &str, role| -> Result<TripleSet, StoreError> {
            let path: PathBuf = dir.join(name);
            if path.exists() {
                load_triples(&path, role, &mut vocab)
            } else {
                Ok(TripleSet::new(role))
            }
        };
        let valid = optional("valid.txt", SplitRole::Valid)?;
        let test = optional("test.txt", SplitRole::Test)?;
        Ok(Self::new(vocab, train, valid, test))
    }

    /// Builds a split set from in-memory tab-separated text.
    pub fn from_text(train: &str, valid: &str, test: &str) -> Result<Self, StoreError> {
        let mut vocab = Vocab::default();
        let mem = Path::new("<memory>");
        let train = read_triples(train.as_bytes(), SplitRole::Train, &mut vocab, mem)?;
        let valid = read_triples(valid.as_bytes(), SplitRole::Valid, &mut vocab, mem)?;
        let test = read_triples(test.as_bytes(), SplitRole::Test, &mut vocab, mem)?;
        Ok(Self::new(vocab, train, valid, test))
    }

    pub fn contains(&self, t: &Triple, scope: Scope) -> bool {
        match scope {
            Scope::Train => self.train.contains(t),
            Scope::Valid => self.valid.contains(t),
            Scope::Test => self.test.contains(t),
            Scope::All => self.train.contains(t) || self.valid.contains(t) || self.test.contains(t),
        }
    }

    pub fn predicate(&self, name: &str) -> Result<PredicateId, StoreError> {
        self.vocab
            .predicate_id(name)
            .ok_or_else(|| StoreError::UnknownPredicate(name.to_owned()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn capitals() -> SplitSet {
        let text = "Beijing\tCapital_of\tChina\n\
                    Beijing\tCity_in\tChina\n\
                    Beijing\tIs_a\tPolitical Center\n\
                    Shanghai\tCity_in\tChina\n";
        let mut vocab = Vocab::default();
        let train = read_triples(text.as_bytes(), SplitRole::Train, &mut vocab, Path::new("mem")).unwrap();
        SplitSet::new(vocab, train, TripleSet::new(SplitRole::Valid), TripleSet::new(SplitRole::Test))
    }

    #[test]
    fn single_line_interns_two_entities_one_predicate() {
        let mut vocab = Vocab::default();
        let set = read_triples(
            "Beijing\tCapital_of\tChina\n".as_bytes(),
            SplitRole::Train,
            &mut vocab,
            Path::new("mem"),
        )
        .unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(set.stats.entities_added, 2);
        assert_eq!(set.stats.predicates_added, 1);
    }

    #[test]
    fn empty_input_yields_empty_set() {
        let mut vocab = Vocab::default();
        let set = read_triples("".as_bytes(), SplitRole::Train, &mut vocab, Path::new("mem")).unwrap();
        assert!(set.is_empty());
        assert_eq!(set.stats.entities_added, 0);
    }

    #[test]
    fn duplicate_lines_are_reported() {
        let mut vocab = Vocab::default();
        let set = read_triples("a\tr\tb\na\tr\tb\n".as_bytes(), SplitRole::Train, &mut vocab, Path::new("mem"))
            .unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(set.stats.kept, 1);
        assert_eq!(set.stats.duplicates, 1);
        assert_eq!(set.stats.lines_read, 2);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let mut vocab = Vocab::default();
        let err = read_triples("a\tr\tb\n\na\tr\n".as_bytes(), SplitRole::Train, &mut vocab, Path::new("x.txt"))
            .unwrap_err();
        match err {
            StoreError::Malformed { line, found, .. } => {
                assert_eq!(line, 3);
                assert_eq!(found, 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_file_is_io_error() {
        let mut vocab = Vocab::default();
        let err = load_triples(Path::new("/nonexistent/train.txt"), SplitRole::Train, &mut vocab).unwrap_err();
        assert!(matches!(err, StoreError::Io { .. }));
    }

    #[test]
    fn neighbors_on_capitals() {
        let s = capitals();
        let v = &s.vocab;
        let beijing = v.entity_id("Beijing").unwrap();
        let china = v.entity_id("China").unwrap();
        let center = v.entity_id("Political Center").unwrap();
        let city_in = v.predicate_id("City_in").unwrap();
        let capital = v.predicate_id("Capital_of").unwrap();
        let is_a = v.predicate_id("Is_a").unwrap();

        let out: Vec<Edge> = s.train.neighbors(beijing).unwrap().collect();
        for (p, o) in [(city_in, china), (capital, china), (is_a, center)] {
            assert!(out.contains(&Edge {
                predicate: p,
                direction: Direction::Forward,
                other: o
            }));
        }
        let into_china: Vec<Edge> = s.train.neighbors(china).unwrap().collect();
        assert!(into_china.contains(&Edge {
            predicate: city_in,
            direction: Direction::Reverse,
            other: beijing
        }));
        assert_eq!(into_china.len(), 3);
    }

    #[test]
    fn isolated_and_unknown_entities() {
        let mut s = capitals();
        let lonely = s.vocab.entity("Lonely");
        let g = KnowledgeGraph::build(s.train_set.as_slice(), s.vocab.entities.len(), s.vocab.predicates.len());
        assert_eq!(g.neighbors(lonely).unwrap().count(), 0);
        assert!(matches!(g.neighbors(EntityId(999)), Err(StoreError::UnknownEntity(999))));
    }

    #[test]
    fn contains_scopes() {
        let text_valid = "Shanghai\tCapital_of\tChina\n";
        let mut s = capitals();
        let valid = read_triples(text_valid.as_bytes(), SplitRole::Valid, &mut s.vocab, Path::new("v")).unwrap();
        let s = SplitSet::new(s.vocab, s.train_set, valid, TripleSet::new(SplitRole::Test));
        let t = *s.train_set.iter().next().unwrap();
        assert!(s.contains(&t, Scope::Train));
        assert!(!s.contains(&t, Scope::Test));
        assert!(s.contains(&t, Scope::All));
        let v = *s.valid.iter().next().unwrap();
        assert!(!s.contains(&v, Scope::Train));
        assert!(s.contains(&v, Scope::Valid));
        assert!(s.contains(&v, Scope::All));
    }

    #[test]
    fn overlapping_splits_are_made_disjoint() {
        let mut vocab = Vocab::default();
        let train = read_triples("a\tr\tb\n".as_bytes(), SplitRole::Train, &mut vocab, Path::new("t")).unwrap();
        let valid =
            read_triples("a\tr\tb\nb\tr\tc\n".as_bytes(), SplitRole::Valid, &mut vocab, Path::new("v")).unwrap();
        let test = read_triples("b\tr\tc\nc\tr\td\n".as_bytes(), SplitRole::Test, &mut vocab, Path::new("x")).unwrap();
        let s = SplitSet::new(vocab, train, valid, test);
        assert_eq!(s.valid.len(), 1);
        assert_eq!(s.test.len(), 1);
        assert_eq!(s.overlap_dropped, 2);
    }
}
