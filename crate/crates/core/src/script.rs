//! Scripted input for sessions: a plain-text command list and an autopilot.
//!
//! Script lines, one command each (blank lines and `#` comments ignored):
//!
//! ```text
//! wait 1500          advance the clock; counts down a game pause
//! choose 0|1         non-game: take an option
//! write <text>       non-game: add own text; game: fill the Yellow candy
//! end                non-game: end the story
//! end-pause          game: stop the pause early
//! tick [up|down|left|right]
//! ```

use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clock::ManualClock;
use crate::engine::{first_step_towards, Candy, Direction, Phase};
use crate::orchestrator::{Choice, Session, SessionError, SessionStatus, TickInput};
use crate::rng::DrawStream;
use crate::sim::{Chooser, Policy};
use crate::story::SessionVersion;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum ScriptStep {
    Wait { ms: u64 },
    Choose { slot: u8 },
    Write { text: String },
    End,
    EndPause,
    Tick { steer: Option<Direction> },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("script line {line}: {message}")]
pub struct ScriptParseError {
    pub line: usize,
    pub message: String,
}

pub fn parse_script(text: &str) -> Result<Vec<ScriptStep>, ScriptParseError> {
    let mut steps = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| ScriptParseError { line: i + 1, message };
        let (cmd, arg) = match line.split_once(char::is_whitespace) {
            Some((c, a)) => (c, a.trim()),
            None => (line, ""),
        };
        let step = match cmd {
            "wait" => ScriptStep::Wait { ms: arg.parse().map_err(|_| err(format!("bad duration {arg:?}")))? },
            "choose" => match arg {
                "0" => ScriptStep::Choose { slot: 0 },
                "1" => ScriptStep::Choose { slot: 1 },
                _ => return Err(err(format!("choose takes 0 or 1, got {arg:?}"))),
            },
            "write" => ScriptStep::Write { text: arg.to_string() },
            "end" => ScriptStep::End,
            "end-pause" => ScriptStep::EndPause,
            "tick" if arg.is_empty() => ScriptStep::Tick { steer: None },
            "tick" => ScriptStep::Tick { steer: Some(Direction::from_str(arg).map_err(err)?) },
            other => return Err(err(format!("unknown command {other:?}"))),
        };
        steps.push(step);
    }
    Ok(steps)
}

/// Applies one step. `wait` moves the clock and, in a paused game, the pause.
pub fn apply_step(session: &mut Session, clock: &ManualClock, step: &ScriptStep) -> Result<(), SessionError> {
    match step {
        ScriptStep::Wait { ms } => {
            clock.advance_ms(*ms);
            if session.version() == SessionVersion::Game
                && session.status() == SessionStatus::Active
                && matches!(session.game().map(|g| g.phase), Some(Phase::Paused { .. }))
            {
                session.advance_game(TickInput { elapsed_ms: *ms, ..TickInput::default() })?;
            }
            Ok(())
        }
        ScriptStep::Choose { slot } => {
            session.submit_choice(if *slot == 0 { Choice::Slot0 } else { Choice::Slot1 })
        }
        ScriptStep::Write { text } => match session.version() {
            SessionVersion::NonGame => session.submit_choice(Choice::SelfText(text.clone())),
            SessionVersion::Game => session
                .advance_game(TickInput { self_text: Some(text.clone()), ..TickInput::default() })
                .map(|_| ()),
        },
        ScriptStep::End => session.submit_choice(Choice::EndStory),
        ScriptStep::EndPause => session
            .advance_game(TickInput { end_pause: true, ..TickInput::default() })
            .map(|_| ()),
        ScriptStep::Tick { steer } => session
            .advance_game(TickInput { steer: *steer, ..TickInput::default() })
            .map(|_| ()),
    }
}

pub fn run_script(session: &mut Session, clock: &ManualClock, steps: &[ScriptStep]) -> Result<(), SessionError> {
    for step in steps {
        if session.status() == SessionStatus::Ended {
            break;
        }
        apply_step(session, clock, step)?;
    }
    Ok(())
}

/// Settings for [`autoplay`].
#[derive(Debug, Clone, PartialEq)]
pub struct Autopilot {
    pub policy: Policy,
    pub seed: u64,
    /// Clock time per movement tick.
    pub tick_ms: u64,
    /// Time spent reading before a pause is ended.
    pub think_ms: u64,
    /// Text committed whenever self-writing is open; `None` leaves Yellow empty.
    pub self_text: Option<String>,
    /// Non-game: turns before ending the story.
    pub turns: u32,
    pub max_ticks: u64,
}

impl Default for Autopilot {
    fn default() -> Self {
        Self {
            policy: Policy::UniformRandom,
            seed: 0,
            tick_ms: 167,
            think_ms: 4_000,
            self_text: Some("The snake wrote a line of its own.".into()),
            turns: 12,
            max_ticks: 50_000,
        }
    }
}

/// Plays a session to the end without a human. Non-game sessions pick a slot
/// (or write their own text one turn in five) from the autopilot seed; game
/// sessions steer to the policy's candy by shortest path.
pub fn autoplay(session: &mut Session, clock: &ManualClock, pilot: &Autopilot) -> Result<(), SessionError> {
    let mut rng = DrawStream::new(pilot.seed);
    match session.version() {
        SessionVersion::NonGame => {
            for _ in 0..pilot.turns {
                if session.hold_error().is_some() {
                    session.retry_generation()?;
                }
                clock.advance_ms(pilot.think_ms + rng.pick(8) as u64 * 1000);
                let roll = rng.pick(5);
                let choice = match (roll, &pilot.self_text) {
                    (0, Some(text)) => Choice::SelfText(text.clone()),
                    (r, _) if r % 2 == 0 => Choice::Slot0,
                    _ => Choice::Slot1,
                };
                session.submit_choice(choice)?;
            }
            session.submit_choice(Choice::EndStory)
        }
        SessionVersion::Game => {
            let mut policy = pilot.policy;
            let mut target: Option<Candy> = None;
            let mut ticks = 0u64;
            while session.status() == SessionStatus::Active {
                let game = session.game().expect("game session");
                match game.phase {
                    Phase::Paused { self_write_enabled, .. } => {
                        if self_write_enabled {
                            if let Some(text) = &pilot.self_text {
                                session.advance_game(TickInput { self_text: Some(text.clone()), ..TickInput::default() })?;
                            }
                        }
                        clock.advance_ms(pilot.think_ms);
                        session.advance_game(TickInput { end_pause: true, ..TickInput::default() })?;
                        target = None;
                    }
                    Phase::Moving => {
                        if target.as_ref().is_none_or(|t| !game.candies.contains(t)) {
                            let mut edible: Vec<&Candy> = game.candies.iter().filter(|c| !c.is_inert()).collect();
                            edible.sort_by_key(|c| c.slot);
                            target = (!edible.is_empty())
                                .then(|| edible[policy.choose(game, &edible, &mut rng).min(edible.len() - 1)].clone());
                        }
                        let steer = target.as_ref().and_then(|t| steer_towards(game, t));
                        clock.advance_ms(pilot.tick_ms);
                        session.advance_game(TickInput { steer, ..TickInput::default() })?;
                        ticks += 1;
                        if ticks >= pilot.max_ticks {
                            session.abandon()?;
                        }
                    }
                    Phase::AwaitingTexts => session.retry_generation()?,
                    Phase::Ended => break,
                }
            }
            Ok(())
        }
    }
}

fn steer_towards(game: &crate::engine::GameState, target: &Candy) -> Option<Direction> {
    let body = &game.snake.body[..game.snake.len() - 1];
    let others: Vec<_> = game
        .candies
        .iter()
        .filter(|c| !c.is_inert() && c.position != target.position)
        .map(|c| c.position)
        .collect();
    first_step_towards(game.config.map_size, game.snake.head(), target.position, |p| {
        !game.obstacles.contains(&p) && !body.contains(&p) && !others.contains(&p)
    })
    .map(|(d, _)| d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_commands() {
        let steps = parse_script("# demo\nwait 250\nchoose 1\nwrite The snake is dead.\n\ntick left\ntick\nend-pause\nend\n").unwrap();
        assert_eq!(
            steps,
            vec![
                ScriptStep::Wait { ms: 250 },
                ScriptStep::Choose { slot: 1 },
                ScriptStep::Write { text: "The snake is dead.".into() },
                ScriptStep::Tick { steer: Some(Direction::Left) },
                ScriptStep::Tick { steer: None },
                ScriptStep::EndPause,
                ScriptStep::End,
            ]
        );
    }

    #[test]
    fn reports_bad_lines() {
        assert_eq!(parse_script("wait soon").unwrap_err().line, 1);
        assert_eq!(parse_script("wait 1\nchoose 2").unwrap_err().line, 2);
        assert!(parse_script("tick sideways").is_err());
        assert!(parse_script("jump").is_err());
    }
}
