//! The rule language: templates, closed abstract rules (CARs), head anchored
//! rules (HARs) and both anchored rules (BARs).
//!
//! A rule body is stored as an ordered chain of `(predicate, direction)`
//! atoms starting at the *original* head variable. Variables are positional
//! and only receive names (`X`, `Y`, `V0`, ...) when a rule is printed: the
//! head subject is always `X`, the head object `Y`, and connecting
//! variables are numbered along the chain.
//!
//! CARs are always stored with the subject as origin. A closed chain read
//! from the object is the same rule read backwards, so this keeps rule
//! identity canonical.

use std::fmt::Write as _;

use crate::error::RuleError;
use crate::store::{Direction, EntityId, PredicateId, Triple, Vocab};

/// A head argument position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    Subject,
    Object,
}

impl Slot {
    pub fn opposite(self) -> Self {
        match self {
            Slot::Subject => Slot::Object,
            Slot::Object => Slot::Subject,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleKind {
    Car,
    Template,
    Har,
    Bar,
}

impl RuleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RuleKind::Car => "CAR",
            RuleKind::Template => "TEMPLATE",
            RuleKind::Har => "HAR",
            RuleKind::Bar => "BAR",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "CAR" => Some(RuleKind::Car),
            "TEMPLATE" => Some(RuleKind::Template),
            "HAR" => Some(RuleKind::Har),
            "BAR" => Some(RuleKind::Bar),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BodyAtom {
    pub predicate: PredicateId,
    pub direction: Direction,
}

impl BodyAtom {
    pub fn new(predicate: PredicateId, direction: Direction) -> Self {
        Self {
            predicate,
            direction,
        }
    }

    pub fn forward(predicate: PredicateId) -> Self {
        Self::new(predicate, Direction::Forward)
    }

    pub fn reverse(predicate: PredicateId) -> Self {
        Self::new(predicate, Direction::Reverse)
    }
}

/// Reads a chain backwards: atoms in reverse order with flipped directions.
pub fn reverse_chain(body: &[BodyAtom]) -> Vec<BodyAtom> {
    body.iter()
        .rev()
        .map(|a| BodyAtom::new(a.predicate, a.direction.flip()))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    X,
    Y,
    V(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(Var),
    Const(EntityId),
}

/// A materialised binary body atom. `from`/`to` follow the chain; the
/// printed argument order is `(subject(), object())`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Atom {
    pub predicate: PredicateId,
    pub direction: Direction,
    pub from: Term,
    pub to: Term,
}

impl Atom {
    pub fn subject(&self) -> Term {
        match self.direction {
            Direction::Forward => self.from,
            Direction::Reverse => self.to,
        }
    }

    pub fn object(&self) -> Term {
        match self.direction {
            Direction::Forward => self.to,
            Direction::Reverse => self.from,
        }
    }
}

/// A Horn rule over one target predicate. Equality and hashing cover the
/// rule's identity only; statistics live in [`crate::specialize::ScoredRule`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rule {
    kind: RuleKind,
    target: PredicateId,
    origin: Slot,
    body: Vec<BodyAtom>,
    free: Option<EntityId>,
    tail: Option<EntityId>,
}

impl Rule {
    pub fn car(target: PredicateId, body: Vec<BodyAtom>) -> Result<Self, RuleError> {
        if body.is_empty() {
            return Err(RuleError::InvalidRule("empty body"));
        }
        Ok(Self {
            kind: RuleKind::Car,
            target,
            origin: Slot::Subject,
            body,
            free: None,
            tail: None,
        })
    }

    pub fn template(target: PredicateId, origin: Slot, body: Vec<BodyAtom>) -> Result<Self, RuleError> {
        if body.is_empty() {
            return Err(RuleError::InvalidRule("empty body"));
        }
        Ok(Self {
            kind: RuleKind::Template,
            target,
            origin,
            body,
            free: None,
            tail: None,
        })
    }

    /// Specialises a template by fixing its free head variable.
    pub fn har(&self, free: EntityId) -> Result<Self, RuleError> {
        if self.kind != RuleKind::Template {
            return Err(RuleError::InvalidRule("only templates specialise into HARs"));
        }
        Ok(Self {
            kind: RuleKind::Har,
            free: Some(free),
            ..self.clone()
        })
    }

    /// Specialises a template by fixing the free head variable and the tail variable.
    pub fn bar(&self, free: EntityId, tail: EntityId) -> Result<Self, RuleError> {
        if self.kind != RuleKind::Template {
            return Err(RuleError::InvalidRule("only templates specialise into BARs"));
        }
        Ok(Self {
            kind: RuleKind::Bar,
            free: Some(free),
            tail: Some(tail),
            ..self.clone()
        })
    }

    /// The abstract rule whose groundings this rule shares: the deriving
    /// template for HARs/BARs, the rule itself otherwise.
    pub fn template_of(&self) -> Rule {
        match self.kind {
            RuleKind::Har | RuleKind::Bar => Rule {
                kind: RuleKind::Template,
                free: None,
                tail: None,
                ..self.clone()
            },
            _ => self.clone(),
        }
    }

    pub fn kind(&self) -> RuleKind {
        self.kind
    }

    pub fn target(&self) -> PredicateId {
        self.target
    }

    pub fn origin(&self) -> Slot {
        self.origin
    }

    pub fn body(&self) -> &[BodyAtom] {
        &self.body
    }

    pub fn len(&self) -> usize {
        self.body.len()
    }

    pub fn is_empty(&self) -> bool {
        self.body.is_empty()
    }

    pub fn free_constant(&self) -> Option<EntityId> {
        self.free
    }

    pub fn tail_constant(&self) -> Option<EntityId> {
        self.tail
    }

    pub fn is_abstract(&self) -> bool {
        matches!(self.kind, RuleKind::Car | RuleKind::Template)
    }

    pub fn is_instantiated(&self) -> bool {
        matches!(self.kind, RuleKind::Har | RuleKind::Bar)
    }

    /// True for length-1 rules whose single body atom reads the target
    /// predicate in the same orientation as the head. For those rules a
    /// body edge can coincide with the predicted head triple, and such
    /// groundings are discarded.
    pub fn is_self_aligned(&self) -> bool {
        if self.body.len() != 1 || self.body[0].predicate != self.target {
            return false;
        }
        matches!(
            (self.origin, self.body[0].direction),
            (Slot::Subject, Direction::Forward) | (Slot::Object, Direction::Reverse)
        )
    }

    /// The head triple obtained by binding the original variable to
    /// `origin` and the other head slot to `other`.
    pub fn head_triple(&self, origin: EntityId, other: EntityId) -> Triple {
        match self.origin {
            Slot::Subject => Triple::new(origin, self.target, other),
            Slot::Object => Triple::new(other, self.target, origin),
        }
    }

    fn head_var(slot: Slot) -> Var {
        match slot {
            Slot::Subject => Var::X,
            Slot::Object => Var::Y,
        }
    }

    /// Terms along the body chain, origin first (`len() + 1` entries).
    pub fn chain_terms(&self) -> Vec<Term> {
        let n = self.body.len();
        let mut terms = Vec::with_capacity(n + 1);
        terms.push(Term::Var(Self::head_var(self.origin)));
        for i in 1..n {
            terms.push(Term::Var(Var::V(i as u32 - 1)));
        }
        terms.push(match (self.kind, self.tail) {
            (RuleKind::Car, _) => Term::Var(Self::head_var(self.origin.opposite())),
            (_, Some(t)) => Term::Const(t),
            _ => Term::Var(Var::V(n as u32 - 1)),
        });
        terms
    }

    /// Head arguments as `(subject, object)`.
    pub fn head_terms(&self) -> (Term, Term) {
        let origin = Term::Var(Self::head_var(self.origin));
        let other = match self.free {
            Some(c) => Term::Const(c),
            None => Term::Var(Self::head_var(self.origin.opposite())),
        };
        match self.origin {
            Slot::Subject => (origin, other),
            Slot::Object => (other, origin),
        }
    }

    pub fn atoms(&self) -> Vec<Atom> {
        let terms = self.chain_terms();
        self.body
            .iter()
            .enumerate()
            .map(|(i, a)| Atom {
                predicate: a.predicate,
                direction: a.direction,
                from: terms[i],
                to: terms[i + 1],
            })
            .collect()
    }

    /// Deterministic 64-bit digest of the rule identity (FNV-1a), stable
    /// across processes.
    pub fn stable_hash(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut feed = |x: u64| {
            for b in x.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        };
        feed(self.kind as u64);
        feed(self.target.0 as u64);
        feed(self.origin as u64);
        for a in &self.body {
            feed(a.predicate.0 as u64);
            feed(a.direction as u64);
        }
        feed(self.free.map_or(u64::MAX, |e| e.0 as u64));
        feed(self.tail.map_or(u64::MAX, |e| e.0 as u64));
        h
    }

    /// Prints the rule, e.g. `r(X,Y) <- p(X,V0), q(V0,Y)`.
    pub fn render(&self, vocab: &Vocab) -> String {
        let mut out = String::new();
        let term = |t: Term, out: &mut String| match t {
            Term::Var(Var::X) => out.push('X'),
            Term::Var(Var::Y) => out.push('Y'),
            Term::Var(Var::V(i)) => {
                let _ = write!(out, "V{i}");
            }
            Term::Const(e) => push_symbol(out, vocab.entity_name(e)),
        };
        let atom = |p: PredicateId, s: Term, o: Term, out: &mut String| {
            push_symbol(out, vocab.predicate_name(p));
            out.push('(');
            term(s, out);
            out.push(',');
            term(o, out);
            out.push(')');
        };
        let (hs, ho) = self.head_terms();
        atom(self.target, hs, ho, &mut out);
        out.push_str(" <- ");
        for (i, a) in self.atoms().iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            atom(a.predicate, a.subject(), a.object(), &mut out);
        }
        out
    }

    /// Parses the printed form produced by [`Rule::render`].
    pub fn parse(text: &str, vocab: &Vocab) -> Result<Rule, RuleError> {
        let raw = RawRule::parse(text)?;
        raw.resolve(vocab)
    }
}

fn is_var_token(s: &str) -> bool {
    s == "X" || s == "Y" || (s.len() > 1 && s.starts_with('V') && s[1..].bytes().all(|b| b.is_ascii_digit()))
}

fn needs_quotes(s: &str) -> bool {
    s.is_empty()
        || is_var_token(s)
        || s.chars()
            .any(|c| matches!(c, ',' | '(' | ')' | '"' | '\\' | '<') || c.is_whitespace())
}

fn push_symbol(out: &mut String, s: &str) {
    if !needs_quotes(s) {
        out.push_str(s);
        return;
    }
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
}

#[derive(Debug, PartialEq)]
enum Token {
    Var(Var),
    Sym(String),
}

#[derive(Debug)]
struct RawAtom {
    predicate: String,
    args: [Token; 2],
}

struct RawRule {
    head: RawAtom,
    body: Vec<RawAtom>,
    body_pos: usize,
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, message: impl Into<String>) -> RuleError {
        RuleError::Parse {
            position: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn expect(&mut self, lit: &str) -> Result<(), RuleError> {
        self.skip_ws();
        if self.src[self.pos..].starts_with(lit) {
            self.pos += lit.len();
            Ok(())
        } else {
            Err(self.err(format!("expected `{lit}`")))
        }
    }

    /// A quoted string, or a bare run of characters up to one of `stops`.
    fn symbol(&mut self, stops: &[char]) -> Result<(String, bool), RuleError> {
        self.skip_ws();
        if self.peek() == Some('"') {
            self.pos += 1;
            let mut s = String::new();
            loop {
                let c = self.peek().ok_or_else(|| self.err("unterminated quoted string"))?;
                self.pos += c.len_utf8();
                match c {
                    '"' => return Ok((s, true)),
                    '\\' => {
                        let e = self.peek().ok_or_else(|| self.err("dangling escape"))?;
                        self.pos += e.len_utf8();
                        s.push(e);
                    }
                    _ => s.push(c),
                }
            }
        }
        let start = self.pos;
        while let Some(c) = self.peek() {
            if stops.contains(&c) {
                break;
            }
            self.pos += c.len_utf8();
        }
        let s = self.src[start..self.pos].trim();
        if s.is_empty() {
            return Err(self.err("expected a symbol"));
        }
        Ok((s.to_owned(), false))
    }

    fn term(&mut self) -> Result<Token, RuleError> {
        let (s, quoted) = self.symbol(&[',', ')'])?;
        if quoted || !is_var_token(&s) {
            return Ok(Token::Sym(s));
        }
        Ok(Token::Var(match s.as_str() {
            "X" => Var::X,
            "Y" => Var::Y,
            v => Var::V(v[1..].parse().map_err(|_| self.err("variable index out of range"))?),
        }))
    }

    fn atom(&mut self) -> Result<RawAtom, RuleError> {
        let (predicate, _) = self.symbol(&['('])?;
        self.expect("(")?;
        let a = self.term()?;
        self.expect(",")?;
        let b = self.term()?;
        self.expect(")")?;
        Ok(RawAtom {
            predicate,
            args: [a, b],
        })
    }
}

impl RawRule {
    fn parse(src: &str) -> Result<Self, RuleError> {
        let mut c = Cursor { src, pos: 0 };
        let head = c.atom()?;
        c.expect("<-")?;
        c.skip_ws();
        let body_pos = c.pos;
        let mut body = vec![c.atom()?];
        loop {
            c.skip_ws();
            match c.peek() {
                None => break,
                Some(',') => {
                    c.pos += 1;
                    body.push(c.atom()?);
                }
                Some(_) => return Err(c.err("expected `,` or end of rule")),
            }
        }
        Ok(Self { head, body, body_pos })
    }

    fn resolve(self, vocab: &Vocab) -> Result<Rule, RuleError> {
        let err = |position: usize, message: String| RuleError::Parse { position, message };
        let target = vocab
            .predicate_id(&self.head.predicate)
            .ok_or_else(|| err(0, format!("unknown predicate `{}`", self.head.predicate)))?;
        let term = |t: &Token| -> Result<Term, RuleError> {
            match t {
                Token::Var(v) => Ok(Term::Var(*v)),
                Token::Sym(s) => vocab
                    .entity_id(s)
                    .map(Term::Const)
                    .ok_or_else(|| err(0, format!("unknown entity `{s}`"))),
            }
        };
        let head = (term(&self.head.args[0])?, term(&self.head.args[1])?);
        let mut atoms = Vec::with_capacity(self.body.len());
        for a in &self.body {
            let p = vocab
                .predicate_id(&a.predicate)
                .ok_or_else(|| err(self.body_pos, format!("unknown predicate `{}`", a.predicate)))?;
            atoms.push((p, term(&a.args[0])?, term(&a.args[1])?));
        }

        // Try each head slot as origin and keep the reading that reprints
        // to exactly the parsed atoms.
        for origin in [Slot::Subject, Slot::Object] {
            let origin_var = Term::Var(Rule::head_var(origin));
            let (hs, ho) = head;
            let (h_origin, h_other) = match origin {
                Slot::Subject => (hs, ho),
                Slot::Object => (ho, hs),
            };
            if h_origin != origin_var {
                continue;
            }
            let mut current = origin_var;
            let mut body = Vec::with_capacity(atoms.len());
            let mut ok = true;
            for &(p, s, o) in &atoms {
                if s == current {
                    body.push(BodyAtom::forward(p));
                    current = o;
                } else if o == current {
                    body.push(BodyAtom::reverse(p));
                    current = s;
                } else {
                    ok = false;
                    break;
                }
            }
            if !ok {
                continue;
            }
            let other_var = Term::Var(Rule::head_var(origin.opposite()));
            let candidate = match (h_other, current) {
                (Term::Var(_), end) if end == other_var => {
                    if origin == Slot::Subject {
                        Rule::car(target, body)?
                    } else {
                        Rule::car(target, reverse_chain(&body))?
                    }
                }
                (Term::Var(_), _) => Rule::template(target, origin, body)?,
                (Term::Const(c), Term::Const(d)) => Rule::template(target, origin, body)?.bar(c, d)?,
                (Term::Const(c), _) => Rule::template(target, origin, body)?.har(c)?,
            };
            let reprinted: Vec<(PredicateId, Term, Term)> = candidate
                .atoms()
                .iter()
                .map(|a| (a.predicate, a.subject(), a.object()))
                .collect();
            if candidate.head_terms() == head && reprinted == atoms {
                return Ok(candidate);
            }
        }
        Err(err(
            self.body_pos,
            "body is not a canonical chain from a head variable".to_owned(),
        ))
    }
}

/// One traversed edge of a sampled path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Step {
    pub predicate: PredicateId,
    pub direction: Direction,
    pub from: EntityId,
    pub to: EntityId,
}

impl Step {
    pub fn triple(&self) -> Triple {
        match self.direction {
            Direction::Forward => Triple::new(self.from, self.predicate, self.to),
            Direction::Reverse => Triple::new(self.to, self.predicate, self.from),
        }
    }
}

/// A ground walk sampled from one endpoint of a positive instance.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Path {
    pub instance: Triple,
    pub start: Slot,
    pub steps: Vec<Step>,
}

impl Path {
    pub fn start_entity(&self) -> EntityId {
        slot_entity(&self.instance, self.start)
    }

    pub fn opposite_entity(&self) -> EntityId {
        slot_entity(&self.instance, self.start.opposite())
    }

    pub fn is_closed(&self) -> bool {
        self.steps.last().is_some_and(|s| s.to == self.opposite_entity())
    }
}

pub fn slot_entity(t: &Triple, slot: Slot) -> EntityId {
    match slot {
        Slot::Subject => t.subject,
        Slot::Object => t.object,
    }
}

/// Generalises a path into an abstract rule by replacing its constants
/// with variables. Closed paths become CARs, open paths templates.
pub fn abstraction(path: &Path) -> Result<Rule, RuleError> {
    let steps = &path.steps;
    if steps.is_empty() {
        return Err(RuleError::InvalidPath("no steps"));
    }
    let start = path.start_entity();
    let opposite = path.opposite_entity();
    if steps[0].from != start {
        return Err(RuleError::InvalidPath("walk does not start at the instance"));
    }
    let mut seen = vec![start];
    for (i, s) in steps.iter().enumerate() {
        if i > 0 && s.from != steps[i - 1].to {
            return Err(RuleError::InvalidPath("steps are not connected"));
        }
        if s.triple() == path.instance {
            return Err(RuleError::InvalidPath("walk uses the instance edge"));
        }
        if seen.contains(&s.to) {
            return Err(RuleError::InvalidPath("walk revisits an entity"));
        }
        let last = i + 1 == steps.len();
        if !last && s.to == opposite {
            return Err(RuleError::InvalidPath("walk passes through the opposite instance entity"));
        }
        seen.push(s.to);
    }
    let body: Vec<BodyAtom> = steps.iter().map(|s| BodyAtom::new(s.predicate, s.direction)).collect();
    let target = path.instance.predicate;
    if path.is_closed() {
        match path.start {
            Slot::Subject => Rule::car(target, body),
            Slot::Object => Rule::car(target, reverse_chain(&body)),
        }
    } else {
        Rule::template(target, path.start, body)
    }
}
