//! Rebuilds the story of a finished session from its log.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{LogPayload, OptionCode, SessionTrace};
use crate::engine::{CandyKind, OptionSlot};
use crate::story::{assemble_story, Fragment, FragmentOrigin, SessionVersion};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("turn {turn}: chose {code} but it was never shown")]
    Unshown { turn: usize, code: String },
    #[error("turn {turn}: code {code} does not name a valid candy for its slot")]
    InvalidCode { turn: usize, code: String },
    #[error("Ate[{logged}] disagrees with {chosen} recorded choices")]
    AteMismatch { logged: u32, chosen: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayedSession {
    pub version: SessionVersion,
    pub fragments: Vec<Fragment>,
    pub ending: Option<String>,
    /// Seconds from the first option of a turn to the player's decision.
    pub decision_times: Vec<f64>,
    /// Game logs only: choices per candy kind.
    pub eaten: BTreeMap<CandyKind, u32>,
    pub ate: Option<u32>,
    pub ended: bool,
}

impl ReplayedSession {
    pub fn story(&self) -> String {
        assemble_story(
            self.fragments
                .iter()
                .map(|f| f.text.as_str())
                .chain(self.ending.as_deref()),
        )
    }

    pub fn turns(&self) -> usize {
        self.fragments.len()
    }
}

fn origin_for(
    code: &OptionCode,
    shown: &[(OptionCode, String)],
    turn: usize,
) -> Result<(FragmentOrigin, Option<CandyKind>), ReplayError> {
    match *code {
        OptionCode::Candy { slot, kind } => {
            let invalid = || ReplayError::InvalidCode { turn, code: code.to_string() };
            let slot = OptionSlot::from_index(slot).ok_or_else(invalid)?;
            let kind = CandyKind::from_id(kind).filter(|k| k.fits_slot(slot)).ok_or_else(invalid)?;
            let origin = match slot {
                OptionSlot::PoolOne => FragmentOrigin::Slot0,
                OptionSlot::PoolTwo => FragmentOrigin::Slot1,
                OptionSlot::SelfWritten => FragmentOrigin::SelfText,
            };
            Ok((origin, Some(kind)))
        }
        OptionCode::Temperature { value } => {
            let lowest = shown
                .iter()
                .filter_map(|(c, _)| match c {
                    OptionCode::Temperature { value } => Some(*value),
                    _ => None,
                })
                .fold(f64::INFINITY, f64::min);
            let origin = if value <= lowest { FragmentOrigin::Slot0 } else { FragmentOrigin::Slot1 };
            Ok((origin, None))
        }
    }
}

/// Replays a parsed trace. The chosen text is the latest option shown in the
/// same turn under the chosen code.
pub fn replay(trace: &SessionTrace) -> Result<ReplayedSession, ReplayError> {
    let mut out = ReplayedSession {
        version: trace.version,
        fragments: Vec::new(),
        ending: None,
        decision_times: Vec::new(),
        eaten: BTreeMap::new(),
        ate: None,
        ended: false,
    };
    let mut shown: Vec<(OptionCode, String)> = Vec::new();
    let mut turn_start = None;

    for event in &trace.events {
        let turn = out.fragments.len() + 1;
        match &event.payload {
            LogPayload::OptionShown { code, text } => {
                turn_start.get_or_insert(event.timestamp);
                shown.push((*code, text.clone()));
            }
            LogPayload::Chose { code } => {
                let text = shown
                    .iter()
                    .rev()
                    .find(|(c, _)| c == code)
                    .map(|(_, t)| t.clone())
                    .ok_or_else(|| ReplayError::Unshown { turn, code: code.to_string() })?;
                let (origin, kind) = origin_for(code, &shown, turn)?;
                if let Some(kind) = kind {
                    *out.eaten.entry(kind).or_default() += 1;
                }
                let start = turn_start.take().unwrap_or(event.timestamp);
                out.decision_times.push((event.timestamp - start).num_milliseconds() as f64 / 1000.0);
                out.fragments.push(Fragment { text, origin });
                shown.clear();
            }
            LogPayload::AddOwnText { text } => {
                let start = turn_start.take().unwrap_or(event.timestamp);
                out.decision_times.push((event.timestamp - start).num_milliseconds() as f64 / 1000.0);
                out.fragments.push(Fragment { text: text.clone(), origin: FragmentOrigin::SelfText });
                shown.clear();
            }
            LogPayload::Ending { text } => out.ending = Some(text.clone()),
            LogPayload::GameEnd => out.ended = true,
            LogPayload::Ate { count } => {
                let chosen = trace.chose_count() as u32;
                if *count != chosen {
                    return Err(ReplayError::AteMismatch { logged: *count, chosen });
                }
                out.ate = Some(*count);
            }
            LogPayload::GameStart => {}
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::log::parse_log;

    #[test]
    fn latest_matching_option_wins() {
        let log = "[1/1/2023 1:00:00 PM]Game Start\n\
[1/1/2023 1:00:01 PM][0][0]first\n\
[1/1/2023 1:00:01 PM][1][3]other\n\
[1/1/2023 1:00:04 PM][0][0]second\n\
[1/1/2023 1:00:09 PM]Chose[0][0]\n\
[1/1/2023 1:00:10 PM]Game End\n\
[1/1/2023 1:00:10 PM]Ate[1]\n";
        let replayed = replay(&parse_log(log, None).unwrap()).unwrap();
        assert_eq!(replayed.fragments[0].text, "second");
        assert_eq!(replayed.decision_times, vec![8.0]);
        assert_eq!(replayed.eaten[&CandyKind::White], 1);
        assert!(replayed.ended);
    }

    #[test]
    fn ate_must_match_choices() {
        let log = "[1/1/2023 1:00:00 PM]Game Start\n[1/1/2023 1:00:01 PM][0][0]a\n\
[1/1/2023 1:00:02 PM]Chose[0][0]\n[1/1/2023 1:00:03 PM]Game End\n[1/1/2023 1:00:03 PM]Ate[2]\n";
        assert_eq!(
            replay(&parse_log(log, None).unwrap()),
            Err(ReplayError::AteMismatch { logged: 2, chosen: 1 })
        );
    }

    #[test]
    fn candy_must_fit_slot() {
        let log = "[1/1/2023 1:00:00 PM]Game Start\n[1/1/2023 1:00:01 PM][0][4]a\n[1/1/2023 1:00:02 PM]Chose[0][4]\n";
        assert!(matches!(
            replay(&parse_log(log, None).unwrap()),
            Err(ReplayError::InvalidCode { turn: 1, .. })
        ));
    }

    #[test]
    fn unshown_choice_fails_replay() {
        let log = "[1/1/2023 1:00:00 PM]Game Start\n[1/1/2023 1:00:01 PM][0.6]a\n[1/1/2023 1:00:02 PM][Chose][1.4]\n";
        assert!(matches!(replay(&parse_log(log, None).unwrap()), Err(ReplayError::Unshown { turn: 1, .. })));
    }

    #[test]
    fn nongame_origins_follow_temperature() {
        let log = "[1/1/2023 1:00:00 PM]Game Start\n[1/1/2023 1:00:01 PM][0.6]cool\n[1/1/2023 1:00:01 PM][1.4] hot\n\
[1/1/2023 1:00:02 PM][Chose][1.4]\n[1/1/2023 1:00:03 PM][Ending] and so on\n";
        let replayed = replay(&parse_log(log, None).unwrap()).unwrap();
        assert_eq!(replayed.fragments[0].origin, FragmentOrigin::Slot1);
        assert_eq!(replayed.story(), " hot and so on");
    }
}
