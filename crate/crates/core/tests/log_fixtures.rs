use snake_story::engine::CandyKind;
use snake_story::log::{parse_log, replay, write_trace, LogPayload, OptionCode};
use snake_story::story::{FragmentOrigin, SessionVersion};

const GAME: &str = include_str!("../fixtures/game_p11.log");
const NONGAME: &str = include_str!("../fixtures/nongame_p11.log");

#[test]
fn game_fixture_round_trips_byte_for_byte() {
    let trace = parse_log(GAME, None).unwrap();
    assert_eq!(trace.version, SessionVersion::Game);
    assert_eq!(write_trace(&trace), GAME);
}

#[test]
fn nongame_fixture_round_trips_byte_for_byte() {
    let trace = parse_log(NONGAME, None).unwrap();
    assert_eq!(trace.version, SessionVersion::NonGame);
    assert_eq!(write_trace(&trace), NONGAME);
}

#[test]
fn game_fixture_counts() {
    let trace = parse_log(GAME, Some(SessionVersion::Game)).unwrap();
    assert!(trace.warnings.is_empty(), "{:?}", trace.warnings);
    assert_eq!(trace.chose_count(), 14);
    assert_eq!(trace.ate(), Some(14));
    let replayed = replay(&trace).unwrap();
    let count = |o| replayed.fragments.iter().filter(|f| f.origin == o).count();
    assert_eq!(count(FragmentOrigin::Slot0), 3);
    assert_eq!(count(FragmentOrigin::Slot1), 8);
    assert_eq!(count(FragmentOrigin::SelfText), 3);
    assert_eq!(replayed.eaten[&CandyKind::Blue], 3);
    assert_eq!(replayed.eaten[&CandyKind::Yellow], 3);
    assert_eq!(replayed.eaten.values().sum::<u32>(), 14);
    assert!(replayed.ended);
    assert!(replayed.story().contains("black-bellied golden snake"));
}

#[test]
fn nongame_fixture_counts() {
    let trace = parse_log(NONGAME, None).unwrap();
    let replayed = replay(&trace).unwrap();
    let count = |o| replayed.fragments.iter().filter(|f| f.origin == o).count();
    assert_eq!(count(FragmentOrigin::Slot0), 3);
    assert_eq!(count(FragmentOrigin::Slot1), 10);
    assert_eq!(count(FragmentOrigin::SelfText), 3);
    assert_eq!(replayed.decision_times.len(), 16);
    assert!(replayed.ended);
    assert_eq!(replayed.ate, None);
    assert!(replayed.story().contains("There once was a Boy named George"));
}

#[test]
fn multi_line_option_text_is_kept_whole() {
    let trace = parse_log(NONGAME, None).unwrap();
    let text = trace
        .events
        .iter()
        .find_map(|e| match &e.payload {
            LogPayload::OptionShown { code: OptionCode::Temperature { value }, text }
                if *value == 0.6 && text.starts_with(" look right") =>
            {
                Some(text.clone())
            }
            _ => None,
        })
        .unwrap();
    assert!(text.contains("\n\nGeorge was scared"));
}
