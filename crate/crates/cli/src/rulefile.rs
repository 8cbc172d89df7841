//! Rule files: one `measure⇥SP⇥BG⇥HC⇥kind⇥rule` line per rule.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use kgrules::rule::{Rule, RuleKind};
use kgrules::specialize::{Measure, RuleStats, ScoredRule};
use kgrules::store::{PredicateId, Vocab};

pub const HEADER: &str = "# measure\tSP\tBG\tHC\tkind\trule";

/// File stem for a predicate: anything outside `[A-Za-z0-9._-]` becomes `_`.
pub fn sanitize(name: &str) -> String {
    let s: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') { c } else { '_' })
        .collect();
    if s.is_empty() || s.starts_with('.') {
        format!("_{s}")
    } else {
        s
    }
}

/// Rule file of every predicate. Names that collide after sanitising get
/// the predicate id appended.
pub fn file_names(vocab: &Vocab) -> BTreeMap<PredicateId, String> {
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    for (_, name) in vocab.predicates.iter() {
        *seen.entry(sanitize(name)).or_default() += 1;
    }
    vocab
        .predicates
        .iter()
        .map(|(id, name)| {
            let s = sanitize(name);
            let stem = if seen[&s] > 1 { format!("{s}.{id}") } else { s };
            (PredicateId(id), format!("{stem}.tsv"))
        })
        .collect()
}

pub fn render(rules: &[ScoredRule], measure: Measure, vocab: &Vocab) -> String {
    let mut out = String::from(HEADER);
    out.push('\n');
    for r in rules {
        let s = &r.stats;
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            s.measure(measure),
            s.support,
            s.body_groundings,
            s.hc,
            r.rule.kind().as_str(),
            r.rule.render(vocab)
        );
    }
    out
}

/// A parsed rule line. Only the stored numbers are known; the other
/// measures need rescoring.
#[derive(Clone, Debug)]
pub struct StoredRule {
    pub rule: Rule,
    pub quality: f64,
    pub support: u64,
    pub body_groundings: u64,
    pub hc: f64,
}

impl StoredRule {
    /// Stats carrying the stored quality under every measure.
    pub fn scored(&self) -> ScoredRule {
        ScoredRule {
            rule: self.rule.clone(),
            stats: RuleStats {
                support: self.support,
                body_groundings: self.body_groundings,
                sc: self.quality,
                smc: self.quality,
                pca: self.quality,
                hc: self.hc,
                ..RuleStats::default()
            },
        }
    }
}

pub fn parse(text: &str, vocab: &Vocab, source: &Path) -> Result<Vec<StoredRule>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let at = || format!("{}:{}", source.display(), i + 1);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 6 {
            bail!("{}: expected 6 tab-separated fields, found {}", at(), f.len());
        }
        let num = |s: &str| -> Result<f64> { s.parse().map_err(|e| anyhow!("{}: bad number `{s}`: {e}", at())) };
        let int = |s: &str| -> Result<u64> { s.parse().map_err(|e| anyhow!("{}: bad count `{s}`: {e}", at())) };
        let kind = RuleKind::parse(f[4]).ok_or_else(|| anyhow!("{}: unknown rule kind `{}`", at(), f[4]))?;
        let rule = Rule::parse(f[5], vocab).with_context(at)?;
        if rule.kind() != kind {
            bail!("{}: rule is a {}, line says {}", at(), rule.kind().as_str(), kind.as_str());
        }
        out.push(StoredRule {
            rule,
            quality: num(f[0])?,
            support: int(f[1])?,
            body_groundings: int(f[2])?,
            hc: num(f[3])?,
        });
    }
    Ok(out)
}

/// Rule files in `path`: the file itself, or every `.tsv` in a directory.
pub fn files(path: &Path) -> Result<Vec<PathBuf>> {
    if path.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut v: Vec<PathBuf> = std::fs::read_dir(path)
        .with_context(|| format!("reading rule directory {}", path.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "tsv"))
        .collect();
    v.sort();
    Ok(v)
}

pub fn load(path: &Path, vocab: &Vocab) -> Result<Vec<StoredRule>> {
    let mut out = Vec::new();
    for f in files(path)? {
        let text = std::fs::read_to_string(&f).with_context(|| format!("reading {}", f.display()))?;
        out.extend(parse(&text, vocab, &f)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use kgrules::store::SplitSet;

    #[test]
    fn sanitize_keeps_safe_characters() {
        assert_eq!(sanitize("_hypernym"), "_hypernym");
        assert_eq!(sanitize("/film/film/genre"), "_film_film_genre");
        assert_eq!(sanitize(".."), "_..");
        assert_eq!(sanitize(""), "_");
    }

    #[test]
    fn colliding_names_get_ids() {
        let s = SplitSet::from_text("a\tx/y\tb\na\tx_y\tb\na\tz\tb\n", "", "").unwrap();
        let names = file_names(&s.vocab);
        let mut v: Vec<&String> = names.values().collect();
        v.sort();
        assert_eq!(v, vec!["x_y.0.tsv", "x_y.1.tsv", "z.tsv"]);
    }

    #[test]
    fn render_then_parse() {
        let s = SplitSet::from_text("a\tt\tb\na\tp\tb\nc\tp\td\n", "", "").unwrap();
        let rule = Rule::parse("t(X,Y) <- p(X,Y)", &s.vocab).unwrap();
        let stats = RuleStats::from_counts(1, 2, 1, 1, 5.0);
        let text = render(&[ScoredRule { rule: rule.clone(), stats: stats.clone() }], Measure::Smc, &s.vocab);
        let back = parse(&text, &s.vocab, Path::new("t.tsv")).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(back[0].rule, rule);
        assert_eq!(back[0].quality, stats.smc);
        assert_eq!((back[0].support, back[0].body_groundings), (1, 2));
        assert!(parse("0.1\t1\t2\n", &s.vocab, Path::new("t.tsv")).is_err());
        assert!(parse("0.1\t1\t2\t0.5\tHAR\tt(X,Y) <- p(X,Y)\n", &s.vocab, Path::new("t.tsv")).is_err());
    }
}
