mod common;

use std::cmp::Ordering;

use kgrules::evaluate::{
    overfit_report, precision_batch, rule_precision, theta_sweep, validation_filter, OverfitConfig, RuleType,
};
use kgrules::kgc::{
    aggregate_max, answer_query, compare_confidences, evaluate, metrics_from_ranks, CandidateList, KgcConfig, Query,
    RuleBook,
};
use kgrules::rule::{BodyAtom, Rule, Slot};
use kgrules::specialize::{learn_target, LearnConfig, Measure, RuleStats, ScoreConfig, ScoredRule};
use kgrules::store::{EntityId, PredicateId, Scope, SplitSet, Triple};
use proptest::prelude::*;

fn scored(rule: Rule, q: f64) -> ScoredRule {
    ScoredRule {
        rule,
        stats: RuleStats {
            sc: q,
            smc: q,
            pca: q,
            ..RuleStats::default()
        },
    }
}

fn held_out_fixture() -> SplitSet {
    SplitSet::from_text(
        "Beijing\tCapital_of\tChina\nBeijing\tCity_in\tChina\nShanghai\tCity_in\tChina\nTokyo\tCity_in\tJapan\n",
        "",
        "Tokyo\tCapital_of\tJapan\n",
    )
    .unwrap()
}

#[test]
fn precision_on_held_out_capital() {
    let s = held_out_fixture();
    let city_rule = Rule::parse("Capital_of(X,Y) <- City_in(X,Y)", &s.vocab).unwrap();
    // predictions: Beijing/China (train), Shanghai/China (unknown), Tokyo/Japan (test)
    assert_eq!(rule_precision(&s.train, &city_rule, &s.test, 1000, 0).unwrap(), 0.5);
    assert_eq!(rule_precision(&s.train, &city_rule, &s.valid, 1000, 0).unwrap(), 0.0);
    let batch = precision_batch(&s.train, &[scored(city_rule, 0.3)], &s.test, 1000, |_| 0).unwrap();
    assert_eq!(batch, vec![0.5]);
}

#[test]
fn precision_is_zero_when_every_prediction_is_known() {
    let s = SplitSet::from_text("a\tr\tb\na\tq\tb\n", "", "c\tr\td\n").unwrap();
    let rule = Rule::parse("r(X,Y) <- q(X,Y)", &s.vocab).unwrap();
    assert_eq!(rule_precision(&s.train, &rule, &s.test, 10, 0).unwrap(), 0.0);
}

#[test]
fn validation_filter_arithmetic() {
    let car = Rule::car(PredicateId(0), vec![BodyAtom::forward(PredicateId(1))]).unwrap();
    let mut r = scored(car, 0.8);
    r.stats.valid_precision = Some(0.05);
    assert!(validation_filter(std::slice::from_ref(&r), Measure::Smc, 0.1).is_empty());
    assert_eq!(validation_filter(std::slice::from_ref(&r), Measure::Smc, 0.0).len(), 1);
    r.stats.valid_precision = Some(0.09);
    assert_eq!(validation_filter(&[r], Measure::Smc, 0.1).len(), 1);
}

fn four_rule_fixture() -> (SplitSet, Vec<ScoredRule>) {
    let s = SplitSet::from_text("a\tt\tb\na\tp\tb\nb\tq\tc\n", "", "").unwrap();
    let t = s.vocab.predicate_id("t").unwrap();
    let p = s.vocab.predicate_id("p").unwrap();
    let q = s.vocab.predicate_id("q").unwrap();
    let c = s.vocab.entity_id("c").unwrap();
    let car1 = Rule::car(t, vec![BodyAtom::forward(p)]).unwrap();
    let car2 = Rule::car(t, vec![BodyAtom::reverse(q)]).unwrap();
    let tmpl = Rule::template(t, Slot::Subject, vec![BodyAtom::forward(p)]).unwrap();
    let har1 = tmpl.har(c).unwrap();
    let har2 = Rule::template(t, Slot::Object, vec![BodyAtom::forward(q)]).unwrap().har(c).unwrap();
    let mk = |r: Rule, q: f64, p: f64| {
        let mut sr = scored(r, q);
        sr.stats.test_precision = Some(p);
        sr
    };
    let rules = vec![
        mk(car1, 0.5, 0.5),
        mk(car2, 0.5, 0.01),
        mk(har1, 0.9, 0.0),
        mk(har2, 0.6, 0.05),
    ];
    (s, rules)
}

#[test]
fn overfit_report_on_four_rules() {
    let (s, rules) = four_rule_fixture();
    let rep = overfit_report(&rules, Measure::Smc, false, &OverfitConfig::default(), &s.vocab);
    assert_eq!(rep.overfitting, 3);
    assert_eq!(rep.orp_all.value, 0.75);
    let row = |t: RuleType| rep.by_type.iter().find(|r| r.rule_type == t).unwrap().clone();
    assert_eq!(row(RuleType::Car).rp_all.value, 0.5);
    assert_eq!(row(RuleType::Car).orp_or.value, 1.0 / 3.0);
    assert_eq!(row(RuleType::Ins(1)).orp_type.value, 1.0);
    assert!(row(RuleType::Ins(2)).orp_type.undefined);
    // one target, top-5 holds every rule
    let top5 = rep.top_k.iter().find(|k| k.k == 5).unwrap();
    assert!((top5.precision - 0.56 / 4.0).abs() < 1e-12);
    assert!((top5.quality - 2.5 / 4.0).abs() < 1e-12);
}

#[test]
fn report_extremes() {
    let (s, mut rules) = four_rule_fixture();
    for r in &mut rules {
        r.stats.test_precision = Some(0.0);
    }
    let rep = overfit_report(&rules, Measure::Smc, false, &OverfitConfig::default(), &s.vocab);
    assert_eq!(rep.orp_all.value, 1.0);
    for row in &rep.by_type {
        if row.rules > 0 {
            assert_eq!(row.orp_type.value, 1.0);
        }
    }
    for r in &mut rules {
        r.stats.test_precision = Some(1.0);
    }
    let rep = overfit_report(&rules, Measure::Smc, false, &OverfitConfig::default(), &s.vocab);
    assert_eq!(rep.orp_all.value, 0.0);
    assert!(rep.by_type.iter().all(|r| r.orp_or.undefined && r.orp_or.value == 0.0));
}

fn arb_rules() -> impl Strategy<Value = Vec<(u8, f64, f64, f64)>> {
    prop::collection::vec((0u8..4, 0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0), 0..40)
}

fn build_rules(s: &SplitSet, spec: &[(u8, f64, f64, f64)]) -> Vec<ScoredRule> {
    let t = s.vocab.predicate_id("t").unwrap();
    let p = s.vocab.predicate_id("p").unwrap();
    spec.iter()
        .enumerate()
        .map(|(i, &(kind, q, vp, tp))| {
            let body = vec![BodyAtom::forward(p); (kind as usize).max(1)];
            let rule = if kind == 0 {
                Rule::car(t, body).unwrap()
            } else {
                Rule::template(t, Slot::Subject, body).unwrap().har(EntityId(i as u32 % 3)).unwrap()
            };
            let mut r = scored(rule, q);
            r.stats.valid_precision = Some(vp);
            r.stats.test_precision = Some(tp);
            r
        })
        .collect()
}

proptest! {
    #[test]
    fn report_identities(spec in arb_rules()) {
        let (s, _) = four_rule_fixture();
        let rules = build_rules(&s, &spec);
        let rep = overfit_report(&rules, Measure::Smc, true, &OverfitConfig::default(), &s.vocab);
        let rp: f64 = rep.by_type.iter().map(|r| r.rp_all.value).sum();
        let or: f64 = rep.by_type.iter().map(|r| r.orp_or.value).sum();
        if !rules.is_empty() {
            prop_assert!((rp - 1.0).abs() < 1e-9);
        }
        if rep.overfitting > 0 {
            prop_assert!((or - 1.0).abs() < 1e-9);
        }
        for r in &rep.by_type {
            for v in [r.rp_all.value, r.orp_or.value, r.orp_type.value] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }
    }

    #[test]
    fn validation_filter_is_an_antitone_subset(spec in arb_rules(), a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let (s, _) = four_rule_fixture();
        let rules = build_rules(&s, &spec);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let keep_lo = validation_filter(&rules, Measure::Smc, lo);
        let keep_hi = validation_filter(&rules, Measure::Smc, hi);
        prop_assert!(keep_lo.iter().all(|r| rules.contains(r)));
        prop_assert!(keep_hi.iter().all(|r| keep_lo.contains(r)));
        let rows = theta_sweep(&rules, Measure::Smc, &[lo, hi], 0.1, 50, &s.vocab);
        prop_assert_eq!(rows.len(), 2);
        prop_assert!(rows[1].kept <= rows[0].kept);
    }
}

#[test]
fn aggregate_max_examples() {
    let order = |lists: &[(u32, &[f64])]| {
        let mut c = CandidateList::new();
        for &(e, confs) in lists {
            for (i, &x) in confs.iter().enumerate() {
                c.suggest(EntityId(e), x, i);
            }
        }
        aggregate_max(&c)
    };
    assert_eq!(order(&[(1, &[0.9]), (2, &[0.8, 0.8])]), vec![EntityId(1), EntityId(2)]);
    assert_eq!(order(&[(1, &[0.9, 0.5]), (2, &[0.9, 0.6])]), vec![EntityId(2), EntityId(1)]);
    assert_eq!(order(&[(1, &[0.9]), (2, &[0.9, 0.1])]), vec![EntityId(2), EntityId(1)]);
    assert_eq!(order(&[(5, &[0.4]), (3, &[0.4])]), vec![EntityId(3), EntityId(5)]);
}

fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

proptest! {
    #[test]
    fn compare_confidences_is_a_total_order(
        a in prop::collection::vec(0.0f64..1.0, 0..5),
        b in prop::collection::vec(0.0f64..1.0, 0..5),
        c in prop::collection::vec(0.0f64..1.0, 0..5),
    ) {
        let (a, b, c) = (sorted_desc(a), sorted_desc(b), sorted_desc(c));
        prop_assert_eq!(compare_confidences(&a, &b), compare_confidences(&b, &a).reverse());
        if compare_confidences(&a, &b) != Ordering::Less && compare_confidences(&b, &c) != Ordering::Less {
            prop_assert!(compare_confidences(&a, &c) != Ordering::Less);
        }
        prop_assert_eq!(compare_confidences(&a, &a), Ordering::Equal);
    }

    #[test]
    fn scaling_confidences_keeps_the_order(
        lists in prop::collection::vec(prop::collection::vec(0.01f64..1.0, 1..4), 1..12),
        k in 0.1f64..10.0,
    ) {
        let mut plain = CandidateList::new();
        let mut scaled = CandidateList::new();
        for (e, confs) in lists.iter().enumerate() {
            for (i, &x) in confs.iter().enumerate() {
                plain.suggest(EntityId(e as u32), x, i);
                scaled.suggest(EntityId(e as u32), x * k, i);
            }
        }
        // scaling can merge nearly equal floats; compare only strict separations
        let a = aggregate_max(&plain);
        let b = aggregate_max(&scaled);
        let pos = |v: &[EntityId], e: EntityId| v.iter().position(|&x| x == e).unwrap();
        for x in &a {
            for y in &a {
                let (cx, cy) = (plain.confidences(*x), plain.confidences(*y));
                let separated = cx.iter().zip(&cy).all(|(p, q)| p == q || (p - q).abs() > 1e-9);
                if separated && pos(&a, *x) < pos(&a, *y) {
                    prop_assert!(pos(&b, *x) < pos(&b, *y));
                }
            }
        }
    }
}

#[test]
fn capitals_query_finds_china() {
    let s = SplitSet::from_text(
        "Beijing\tCity_in\tChina\nShanghai\tCity_in\tChina\nBeijing\tIs_a\tPolitical Center\n",
        "",
        "Beijing\tCapital_of\tChina\n",
    )
    .unwrap();
    let city_rule = Rule::parse("Capital_of(X,Y) <- City_in(X,Y)", &s.vocab).unwrap();
    let book = RuleBook::new(vec![scored(city_rule, 0.5)], Measure::Smc);
    let t = s.test.as_slice()[0];
    let (ans, _) = answer_query(&Query::tail(&t), &book, &s, &KgcConfig::default());
    assert_eq!(ans.ranking, vec![s.vocab.entity_id("China").unwrap()]);
    assert_eq!(ans.filtered_rank, Some(1));
    let (ans, _) = answer_query(&Query::head(&t), &book, &s, &KgcConfig::default());
    let beijing = s.vocab.entity_id("Beijing").unwrap();
    assert_eq!(ans.raw_rank, Some(ans.ranking.iter().position(|&e| e == beijing).unwrap() + 1));
}

#[test]
fn three_query_fixture() {
    let s = SplitSet::from_text("a\tr1\tx\na\tr2\ty\nb\tu\tw\n", "", "a\tt\ty\nb\tt\tz\n").unwrap();
    let car1 = Rule::parse("t(X,Y) <- r1(X,Y)", &s.vocab).unwrap();
    let car2 = Rule::parse("t(X,Y) <- r2(X,Y)", &s.vocab).unwrap();
    let book = RuleBook::new(vec![scored(car1, 0.9), scored(car2, 0.5)], Measure::Smc);
    let tests = s.test.as_slice();
    let queries = [Query::tail(&tests[0]), Query::head(&tests[0]), Query::tail(&tests[1])];
    let ranks: Vec<Option<usize>> = queries
        .iter()
        .map(|q| answer_query(q, &book, &s, &KgcConfig::default()).0.filtered_rank)
        .collect();
    assert_eq!(ranks, vec![Some(2), Some(1), None]);
    let m = metrics_from_ranks(&ranks);
    assert_eq!(m.mrr, 0.5);
    assert_eq!(m.hits1, 1.0 / 3.0);
    assert_eq!(m.hits3, 2.0 / 3.0);

    let m = metrics_from_ranks(&[Some(4)]);
    assert_eq!((m.mrr, m.hits3, m.hits10), (0.25, 0.0, 1.0));
    let m = metrics_from_ranks(&[Some(1)]);
    assert_eq!((m.mrr, m.hits1), (1.0, 1.0));

    let rep = evaluate(tests, &book, &s, &KgcConfig::default());
    assert_eq!(rep.overall.queries, 4);
    assert_eq!(rep.overall.mrr, 1.5 / 4.0);
}

/// Rank of `truth` by direct pairwise comparison, with absent confidences
/// treated as minus infinity; `skip` candidates are ignored.
fn brute_rank(c: &CandidateList, cands: &[EntityId], truth: EntityId, skip: impl Fn(EntityId) -> bool) -> Option<usize> {
    if !cands.contains(&truth) {
        return None;
    }
    let pad = |v: Vec<f64>, n: usize| {
        let mut v = v;
        v.resize(n, f64::NEG_INFINITY);
        v
    };
    let tc = c.confidences(truth);
    let ahead = cands
        .iter()
        .filter(|&&e| e != truth && !skip(e))
        .filter(|&&e| {
            let ec = c.confidences(e);
            let n = ec.len().max(tc.len());
            let (x, y) = (pad(ec, n), pad(tc.clone(), n));
            for (p, q) in x.iter().zip(&y) {
                if p != q {
                    return p > q;
                }
            }
            e < truth
        })
        .count();
    Some(ahead + 1)
}

#[test]
fn filtered_rank_matches_brute_force_and_never_demotes() {
    for seed in 0..20 {
        let s = common::random_split(seed, 8, 3, 20, 6);
        let mut rules = Vec::new();
        let cfg = LearnConfig {
            score: ScoreConfig::permissive(Measure::Smc),
            ..LearnConfig::default()
        };
        for p in 0..s.train.num_predicates() as u32 {
            rules.extend(learn_target(&s, PredicateId(p), &cfg).unwrap().rules);
        }
        let book = RuleBook::new(rules, Measure::Smc);
        for t in s.test.iter() {
            for q in [Query::head(t), Query::tail(t)] {
                let (ans, list) = answer_query(&q, &book, &s, &KgcConfig::default());
                let raw = brute_rank(&list, &ans.ranking, q.truth, |_| false);
                let filt = brute_rank(&list, &ans.ranking, q.truth, |e| s.contains(&q.triple_with(e), Scope::All));
                assert_eq!(ans.raw_rank, raw);
                assert_eq!(ans.filtered_rank, filt);
                if let (Some(r), Some(f)) = (raw, filt) {
                    assert!(f <= r);
                }
            }
        }
    }
}

#[test]
fn instantiated_rules_answer_both_query_sides() {
    // t(X,c) <- p(X,V0): tail queries propose c; head queries on c propose origins
    let s = SplitSet::from_text(
        "a\tt\tc\na\tp\tm\nb\tp\tn\n",
        "",
        "b\tt\tc\n",
    )
    .unwrap();
    let e = |n: &str| s.vocab.entity_id(n).unwrap();
    let har = Rule::parse("t(X,c) <- p(X,V0)", &s.vocab).unwrap();
    let bar = Rule::parse("t(X,c) <- p(X,n)", &s.vocab).unwrap();
    let book = RuleBook::new(vec![scored(har, 0.4), scored(bar, 0.7)], Measure::Smc);
    let truth = Triple::new(e("b"), s.vocab.predicate_id("t").unwrap(), e("c"));
    let (tail, list) = answer_query(&Query::tail(&truth), &book, &s, &KgcConfig::default());
    assert_eq!(tail.ranking, vec![e("c")]);
    assert_eq!(list.confidences(e("c")), vec![0.7, 0.4]);
    let (head, list) = answer_query(&Query::head(&truth), &book, &s, &KgcConfig::default());
    assert_eq!(list.confidences(e("b")), vec![0.7, 0.4]);
    assert_eq!(list.confidences(e("a")), vec![0.4]);
    assert_eq!(head.ranking, vec![e("b"), e("a")]);
    // a/t/c is in train, so the filtered rank of b stays 1
    assert_eq!(head.filtered_rank, Some(1));
}
