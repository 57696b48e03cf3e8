use proptest::prelude::*;
use snake_story::analysis::{
    build_report, mtld, sentence_overlap, story_word_count, usage_stats, wilcoxon_signed_rank,
    AnalysisError, Grouping, PairedSample, WilcoxonMode, MTLD_THRESHOLD, REPORT_SCHEMA,
};
use snake_story::engine::CandyKind;
use snake_story::log::parse_log;
use snake_story::story::SessionVersion;

const GAME: &str = include_str!("../fixtures/game_p11.log");
const NONGAME: &str = include_str!("../fixtures/nongame_p11.log");

/// Two-sided p by listing every sign vector: P(min(T+, T-) <= W_observed).
fn brute_force_p(diffs: &[f64]) -> f64 {
    let d: Vec<f64> = diffs.iter().copied().filter(|x| *x != 0.0).collect();
    let n = d.len();
    let abs: Vec<f64> = d.iter().map(|x| x.abs()).collect();
    let mut ranks = vec![0.0; n];
    for i in 0..n {
        let less = abs.iter().filter(|a| **a < abs[i]).count() as f64;
        let equal = abs.iter().filter(|a| **a == abs[i]).count() as f64;
        ranks[i] = less + (equal + 1.0) / 2.0;
    }
    let total: f64 = ranks.iter().sum();
    let plus: f64 = (0..n).filter(|i| d[*i] > 0.0).map(|i| ranks[i]).sum();
    let observed = plus.min(total - plus);
    let mut hits = 0u64;
    for mask in 0u64..(1 << n) {
        let t: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
        if t.min(total - t) <= observed {
            hits += 1;
        }
    }
    hits as f64 / (1u64 << n) as f64
}

fn samples(diffs: &[f64]) -> Vec<PairedSample> {
    diffs.iter().enumerate().map(|(i, d)| PairedSample::new(format!("p{i}"), 10.0 + d, 10.0)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn exact_p_matches_enumeration(diffs in prop::collection::vec(-6i32..=6, 1..=12)) {
        let diffs: Vec<f64> = diffs.into_iter().map(f64::from).collect();
        match wilcoxon_signed_rank(&samples(&diffs), WilcoxonMode::Exact) {
            Ok(r) => prop_assert_eq!(r.p_value, brute_force_p(&diffs)),
            Err(e) => {
                prop_assert_eq!(e, AnalysisError::AllZero);
                prop_assert!(diffs.iter().all(|d| *d == 0.0));
            }
        }
    }

    #[test]
    fn w_is_rank_invariant(pairs in prop::collection::vec((0.0f64..50.0, 0.0f64..50.0), 1..15)) {
        let raw: Vec<PairedSample> = pairs.iter().map(|(a, b)| PairedSample::new("x", *a, *b)).collect();
        let moved: Vec<PairedSample> = pairs.iter().map(|(a, b)| PairedSample::new("x", 3.0 * a + 7.0, 3.0 * b + 7.0)).collect();
        if let (Ok(x), Ok(y)) = (wilcoxon_signed_rank(&raw, WilcoxonMode::Auto), wilcoxon_signed_rank(&moved, WilcoxonMode::Auto)) {
            prop_assert_eq!(x.n_effective, y.n_effective);
            prop_assert_eq!(x.w_statistic, y.w_statistic);
        }
    }

    #[test]
    fn w_within_bounds(diffs in prop::collection::vec(-20.0f64..20.0, 1..30)) {
        if let Ok(r) = wilcoxon_signed_rank(&samples(&diffs), WilcoxonMode::Auto) {
            let n = r.n_effective as f64;
            prop_assert!(r.w_statistic >= 0.0 && r.w_statistic <= n * (n + 1.0) / 2.0);
            prop_assert!((0.0..=1.0).contains(&r.p_value));
        }
    }

    #[test]
    fn mtld_ignores_token_identity(ids in prop::collection::vec(0u8..6, 10..80), shift in 1u8..50) {
        let a: Vec<String> = ids.iter().map(|i| format!("t{i}")).collect();
        let b: Vec<String> = ids.iter().map(|i| format!("u{}", i.wrapping_add(shift))).collect();
        prop_assert_eq!(mtld(&a, MTLD_THRESHOLD).unwrap(), mtld(&b, MTLD_THRESHOLD).unwrap());
        let reversed: Vec<String> = a.iter().rev().cloned().collect();
        prop_assert_eq!(mtld(&a, MTLD_THRESHOLD).unwrap().value, mtld(&reversed, MTLD_THRESHOLD).unwrap().value);
    }

    #[test]
    fn overlap_stays_in_unit_interval(words in prop::collection::vec("[a-e]{1,4}", 2..40), cuts in prop::collection::vec(any::<bool>(), 40)) {
        let mut story = String::new();
        for (i, w) in words.iter().enumerate() {
            let mut w = w.clone();
            if cuts[i] { w = format!("{}{}.", w[..1].to_uppercase(), &w[1..]); }
            story.push_str(&w);
            story.push(' ');
        }
        if let Some(v) = sentence_overlap(&story).value {
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }
}

#[test]
fn w_two_n_eleven() {
    let diffs: Vec<f64> = (1..=11).map(|i| if i == 2 { -2.0 } else { f64::from(i) }).collect();
    let r = wilcoxon_signed_rank(&samples(&diffs), WilcoxonMode::Auto).unwrap();
    assert_eq!(r.w_statistic, 2.0);
    assert!((r.p_value - 0.0029).abs() <= 0.0002, "{}", r.p_value);
}

#[test]
fn usage_on_fixtures() {
    let nongame = parse_log(NONGAME, None).unwrap();
    let game = parse_log(GAME, None).unwrap();
    let stats = usage_stats(std::slice::from_ref(&nongame), Grouping::None).unwrap();
    let s = &stats.sessions[0];
    assert_eq!((s.total_choices, s.low_temp_choices, s.high_temp_choices, s.self_writes), (16, 3, 10, 3));

    let stats = usage_stats(std::slice::from_ref(&game), Grouping::None).unwrap();
    let s = &stats.sessions[0];
    assert_eq!(s.total_choices, 14);
    assert_eq!(s.total_choices, s.low_temp_choices + s.high_temp_choices + s.self_writes);
    assert_eq!(s.candies_selected.values().sum::<u32>(), 14);
    assert_eq!(s.candies_selected[&CandyKind::Blue], 3);
    assert!(s.candies_generated[&CandyKind::Yellow] >= 3);
}

#[test]
fn mixed_versions_need_grouping() {
    let traces = vec![parse_log(GAME, None).unwrap(), parse_log(NONGAME, None).unwrap()];
    assert_eq!(usage_stats(&traces, Grouping::None), Err(AnalysisError::MixedVersions));
    let grouped = usage_stats(&traces, Grouping::Version).unwrap();
    assert_eq!(grouped.cohorts.len(), 2);
    assert_eq!(grouped.cohorts[0].version, Some(SessionVersion::NonGame));
}

#[test]
fn empty_usage_is_zero() {
    let stats = usage_stats(&[], Grouping::None).unwrap();
    assert!(stats.sessions.is_empty());
    assert_eq!(stats.cohorts[0].sessions, 0);
    assert_eq!(stats.cohorts[0].total_choices.mean, 0.0);
}

#[test]
fn report_pairs_participants() {
    let mut game = parse_log(GAME, None).unwrap();
    game.source = Some("game_p11.log".into());
    let mut nongame = parse_log(NONGAME, None).unwrap();
    nongame.source = Some("nongame_p11.log".into());
    let report = build_report(&[game, nongame], Grouping::Version).unwrap();
    assert_eq!(report.schema, REPORT_SCHEMA);
    assert_eq!(report.sessions[0].participant.as_deref(), Some("p11"));
    let low = report.comparisons.iter().find(|c| c.metric == "low_temp_choices").unwrap();
    assert_eq!(low.pairs, 1);
    let text = report.sessions[1].text.as_ref().unwrap();
    assert!(text.word_count > 200);
    assert!(text.mtld.is_some());
    let json = serde_json::to_value(&report).unwrap();
    assert_eq!(json["schema"], "report_v1");
}

/// Second counter: walks bytes and counts transitions into non-space runs.
fn recount(text: &str) -> usize {
    let mut count = 0;
    let mut inside = false;
    for c in text.chars() {
        if c.is_whitespace() {
            inside = false;
        } else if !inside {
            inside = true;
            count += 1;
        }
    }
    count
}

#[test]
fn word_count_agrees_with_recount() {
    for text in [GAME, NONGAME, "", "  a\tb\n\nc  "] {
        assert_eq!(story_word_count(text), recount(text));
    }
}
