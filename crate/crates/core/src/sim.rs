//! Scripted players for the game version.
//!
//! A policy picks a target candy when a turn's candies appear; the snake then
//! walks a breadth-first shortest path to it, recomputed every tick. Simulated
//! players end every pause at once and never write their own text, so Yellow
//! candies stay inert.

use std::collections::{BTreeMap, HashSet};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{wilcoxon_signed_rank, AnalysisError, PairedSample, WilcoxonMode, WilcoxonResult};
use crate::config::GameConfig;
use crate::engine::{
    first_step_towards, Candy, CandyKind, Direction, EngineError, GameState, GridPosition, OptionSlot,
    Phase,
    TurnEvent,
};
use crate::provider::{count_words, TextProvider};
use crate::rng::{derive_seed, DrawStream};
use crate::story::assemble_story;

const POLICY_STREAM: u64 = 0x706f_6c69_6379;
const TEXT_STREAM: u64 = 0x7465_7874;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", content = "weight", rename_all = "snake_case")]
pub enum Policy {
    UniformRandom,
    /// Prefers Green, then Blue; avoids Red, then Black.
    GreedyPositive,
    /// Pure survival play.
    IgnoreText,
    /// `w * text + (1 - w) * survival`.
    TradeOff(f64),
}

impl Policy {
    pub fn validate(&self) -> Result<(), SimError> {
        match self {
            Policy::TradeOff(w) if !(0.0..=1.0).contains(w) => {
                Err(SimError::InvalidPolicy(format!("trade-off weight {w} outside [0, 1]")))
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Policy::UniformRandom => "uniform-random".into(),
            Policy::GreedyPositive => "greedy-positive".into(),
            Policy::IgnoreText => "ignore-text".into(),
            Policy::TradeOff(w) => format!("trade-off:{w}"),
        }
    }
}

impl std::fmt::Display for Policy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Policy {
    type Err = SimError;

    /// Accepts `uniform-random`, `greedy-positive`, `ignore-text` and
    /// `trade-off:<w>`; underscores and the short forms `uniform`, `greedy`,
    /// `ignore` also work.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase().replace('_', "-");
        let policy = match lower.as_str() {
            "uniform" | "uniform-random" | "random" => Policy::UniformRandom,
            "greedy" | "greedy-positive" => Policy::GreedyPositive,
            "ignore" | "ignore-text" => Policy::IgnoreText,
            other => {
                let weight = other
                    .strip_prefix("trade-off:")
                    .or_else(|| other.strip_prefix("tradeoff:"))
                    .ok_or_else(|| SimError::InvalidPolicy(format!("unknown policy {s:?}")))?;
                let w: f64 = weight
                    .parse()
                    .map_err(|_| SimError::InvalidPolicy(format!("bad trade-off weight {weight:?}")))?;
                Policy::TradeOff(w)
            }
        };
        policy.validate()?;
        Ok(policy)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),
    #[error("at least {needed} seeds are required, got {got}")]
    TooFewSeeds { needed: usize, got: usize },
    #[error("sessions must be at least 1")]
    NoSessions,
    #[error("seed {seed}, tick {tick}: invariant violated: {message}")]
    Invariant { seed: u64, tick: u64, message: String },
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

/// Fixed preference used by [`Policy::GreedyPositive`].
pub fn greedy_score(kind: CandyKind) -> f64 {
    match kind {
        CandyKind::Green => 2.0,
        CandyKind::Blue => 1.0,
        CandyKind::White | CandyKind::Yellow => 0.0,
        CandyKind::Black => -1.0,
        CandyKind::Red => -2.0,
    }
}

fn kind_safety(kind: CandyKind) -> f64 {
    match kind {
        CandyKind::Green => 1.0,
        CandyKind::White | CandyKind::Blue | CandyKind::Yellow => 0.5,
        CandyKind::Black => -0.5,
        CandyKind::Red => -1.0,
    }
}

/// Survival preference: candy effect minus a small penalty for path length.
pub fn survival_score(kind: CandyKind, distance: u32, map_size: u32) -> f64 {
    kind_safety(kind) - f64::from(distance) / f64::from(4 * map_size)
}

/// Text "quality" proxy in [0, 1]: word count plus distinct tokens, scaled by
/// twice the option word limit.
pub fn text_score(text: &str, word_limit: usize) -> f64 {
    let distinct = text.split_whitespace().map(str::to_lowercase).collect::<HashSet<_>>().len();
    (count_words(text) + distinct) as f64 / (2 * word_limit.max(1)) as f64
}

/// Passable for navigation: not an obstacle, not body (the tail moves on), and
/// not a candy other than `target`.
fn passable<'a>(game: &'a GameState, target: Option<&Candy>) -> impl Fn(GridPosition) -> bool + 'a {
    let body = &game.snake.body[..game.snake.len() - 1];
    let avoid: Vec<_> = game
        .candies
        .iter()
        .filter(|c| !c.is_inert() && Some(c.position) != target.map(|t| t.position))
        .map(|c| c.position)
        .collect();
    move |p| !game.obstacles.contains(&p) && !body.contains(&p) && !avoid.contains(&p)
}

/// Path length from the head to `candy`, if reachable.
pub fn path_distance(game: &GameState, candy: &Candy) -> Option<u32> {
    first_step_towards(game.config.map_size, game.snake.head(), candy.position, passable(game, Some(candy)))
        .map(|(_, d)| d)
}

/// Picks which candy to go for when a turn's candies appear.
pub trait Chooser {
    /// `candidates` are the edible candies in slot order. Returns an index into it.
    fn choose(&mut self, game: &GameState, candidates: &[&Candy], rng: &mut DrawStream) -> usize;
}

fn argmax(candidates: &[&Candy], score: impl Fn(&Candy) -> f64) -> usize {
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for (i, c) in candidates.iter().enumerate() {
        let s = score(c);
        if s > best_score {
            best = i;
            best_score = s;
        }
    }
    best
}

impl Chooser for Policy {
    fn choose(&mut self, game: &GameState, candidates: &[&Candy], rng: &mut DrawStream) -> usize {
        let size = game.config.map_size;
        let limit = game.config.option_word_limit;
        let survival =
            |c: &Candy| survival_score(c.kind, path_distance(game, c).unwrap_or(4 * size), size);
        match *self {
            Policy::UniformRandom => rng.pick(candidates.len()),
            Policy::GreedyPositive => argmax(candidates, |c| greedy_score(c.kind)),
            Policy::IgnoreText => argmax(candidates, survival),
            Policy::TradeOff(w) => {
                argmax(candidates, |c| w * text_score(&c.text, limit) + (1.0 - w) * survival(c))
            }
        }
    }
}

/// Chooses purely by [`text_score`]; the `w = 1` end of the trade-off.
#[derive(Debug, Clone, Copy, Default)]
pub struct TextOnly;

impl Chooser for TextOnly {
    fn choose(&mut self, game: &GameState, candidates: &[&Candy], _rng: &mut DrawStream) -> usize {
        let limit = game.config.option_word_limit;
        argmax(candidates, |c| text_score(&c.text, limit))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    /// Turns after which a session is stopped.
    pub turn_cap: u32,
    /// Ticks allowed per turn before the player is declared stuck.
    pub tick_cap_per_turn: u64,
    pub check_invariants: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self { turn_cap: 200, tick_cap_per_turn: 2_000, check_invariants: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndReason {
    LivesExhausted,
    /// No room left to place a turn's candies.
    Jammed,
    Stalled,
    TurnCap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSession {
    pub seed: u64,
    pub turns: u32,
    pub ticks: u64,
    /// Choices per slot: pool one, pool two, self-written.
    pub slot_choices: [u32; 3],
    pub generated: BTreeMap<CandyKind, u32>,
    /// Kinds the policy picked when the candies appeared.
    pub chosen: BTreeMap<CandyKind, u32>,
    /// Kinds actually eaten; differs from `chosen` only through fallbacks.
    pub selected: BTreeMap<CandyKind, u32>,
    /// Turns where the chosen candy was unreachable and the player switched.
    pub fallbacks: u32,
    pub end: EndReason,
    pub story_words: usize,
    /// Chosen (slot, kind) per turn, in order.
    pub trace: Vec<(OptionSlot, CandyKind)>,
}

impl SimSession {
    pub fn pool1_share(&self) -> f64 {
        pool1_share(self.slot_choices)
    }
}

/// Pool-one choices over pool-one plus pool-two choices; 0 when neither happened.
pub fn pool1_share(slot_choices: [u32; 3]) -> f64 {
    let total = slot_choices[0] + slot_choices[1];
    if total == 0 {
        0.0
    } else {
        f64::from(slot_choices[0]) / f64::from(total)
    }
}

fn safe_direction(game: &GameState) -> Option<Direction> {
    let passable = passable(game, None);
    let size = game.config.map_size;
    let heading = game.snake.heading;
    std::iter::once(heading)
        .chain(Direction::ORDER)
        .filter(|d| *d != heading.opposite())
        .find(|d| game.snake.head().step(*d, size).is_some_and(&passable))
}

/// Plays one full session with `chooser`. The text source is the offline
/// generator seeded from `seed`.
pub fn run_session(
    chooser: &mut dyn Chooser,
    config: &GameConfig,
    seed: u64,
    options: &SimOptions,
) -> Result<SimSession, SimError> {
    let mut game = GameState::new(config.clone(), seed)?;
    let provider = TextProvider::offline(derive_seed(seed, TEXT_STREAM));
    let mut rng = DrawStream::new(derive_seed(seed, POLICY_STREAM));
    let mut fragments: Vec<String> = Vec::new();
    let mut out = SimSession {
        seed,
        turns: 0,
        ticks: 0,
        slot_choices: [0; 3],
        generated: BTreeMap::new(),
        chosen: BTreeMap::new(),
        selected: BTreeMap::new(),
        fallbacks: 0,
        end: EndReason::TurnCap,
        story_words: 0,
        trace: Vec::new(),
    };

    let check = |game: &GameState| -> Result<(), SimError> {
        if options.check_invariants {
            game.check_invariants()
                .map_err(|message| SimError::Invariant { seed, tick: game.ticks, message })?;
        }
        Ok(())
    };

    'turns: while out.turns < options.turn_cap {
        let story = assemble_story(fragments.iter().map(String::as_str));
        let (low, high) = provider
            .generate_options(&story, config)
            .expect("offline generation cannot fail");
        match game.spawn_turn_candies(&low, &high, None) {
            Ok(()) => {}
            Err(EngineError::Jammed { .. }) => {
                game.abandon();
                out.end = EndReason::Jammed;
                break;
            }
            Err(e) => return Err(e.into()),
        }
        check(&game)?;
        if options.check_invariants && !game.candies_reachable() {
            return Err(SimError::Invariant {
                seed,
                tick: game.ticks,
                message: "spawned candy is not reachable".into(),
            });
        }
        game.end_pause()?;

        let mut edible: Vec<Candy> = game.candies.iter().filter(|c| !c.is_inert()).cloned().collect();
        edible.sort_by_key(|c| c.slot);
        for c in &edible {
            *out.generated.entry(c.kind).or_default() += 1;
        }
        let refs: Vec<&Candy> = edible.iter().collect();
        let mut target = edible[chooser.choose(&game, &refs, &mut rng).min(edible.len() - 1)].clone();
        *out.chosen.entry(target.kind).or_default() += 1;
        let mut switched = false;

        let start_ticks = game.ticks;
        loop {
            if game.ticks - start_ticks >= options.tick_cap_per_turn {
                game.abandon();
                out.end = EndReason::Stalled;
                break 'turns;
            }
            let size = game.config.map_size;
            let mut steer = first_step_towards(size, game.snake.head(), target.position, passable(&game, Some(&target)))
                .map(|(d, _)| d);
            if steer.is_none() && game.candies.contains(&target) {
                // The chosen candy is walled off: go for the best other one.
                if let Some(other) = edible
                    .iter()
                    .filter(|c| c.position != target.position && game.candies.contains(c))
                    .find(|c| path_distance(&game, c).is_some())
                {
                    target = other.clone();
                    if !switched {
                        switched = true;
                        out.fallbacks += 1;
                    }
                    steer = first_step_towards(size, game.snake.head(), target.position, passable(&game, Some(&target)))
                        .map(|(d, _)| d);
                }
            }
            let steer = steer.or_else(|| safe_direction(&game));
            let events = game.step(steer)?;
            out.ticks += 1;
            check(&game)?;
            for event in &events {
                match event {
                    TurnEvent::CandyEaten { kind, slot } => {
                        out.slot_choices[slot.index() as usize] += 1;
                        *out.selected.entry(*kind).or_default() += 1;
                        out.trace.push((*slot, *kind));
                    }
                    TurnEvent::TextAppended { text } => fragments.push(text.clone()),
                    _ => {}
                }
            }
            match game.phase {
                Phase::Ended => {
                    out.end = EndReason::LivesExhausted;
                    if events.iter().any(|e| matches!(e, TurnEvent::CandyEaten { .. })) {
                        out.turns += 1;
                    }
                    break 'turns;
                }
                Phase::AwaitingTexts => {
                    out.turns += 1;
                    continue 'turns;
                }
                _ => {}
            }
        }
    }
    if out.end == EndReason::TurnCap && game.phase != Phase::Ended {
        game.abandon();
    }
    out.story_words = count_words(&assemble_story(fragments.iter().map(String::as_str)));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub policy: Policy,
    pub seed: u64,
    pub sessions: usize,
    pub turns_played: u32,
    pub pool1_share: f64,
    pub candy_generated: BTreeMap<CandyKind, u32>,
    pub candy_selected: BTreeMap<CandyKind, u32>,
    pub candy_selection_rates: BTreeMap<CandyKind, f64>,
    /// Mean turns per session.
    pub lifespan_turns: f64,
    pub fallbacks: u32,
    pub per_session: Vec<SimSession>,
}

fn aggregate(policy: Policy, seed: u64, per_session: Vec<SimSession>) -> SimResult {
    let mut slots = [0u32; 3];
    let mut generated = BTreeMap::new();
    let mut selected = BTreeMap::new();
    for s in &per_session {
        for i in 0..3 {
            slots[i] += s.slot_choices[i];
        }
        for (k, v) in &s.generated {
            *generated.entry(*k).or_default() += v;
        }
        for (k, v) in &s.selected {
            *selected.entry(*k).or_default() += v;
        }
    }
    let rates = generated
        .iter()
        .map(|(k, g)| (*k, f64::from(selected.get(k).copied().unwrap_or(0)) / f64::from(*g)))
        .collect();
    let turns: u32 = per_session.iter().map(|s| s.turns).sum();
    SimResult {
        policy,
        seed,
        sessions: per_session.len(),
        turns_played: turns,
        pool1_share: pool1_share(slots),
        candy_generated: generated,
        candy_selected: selected,
        candy_selection_rates: rates,
        lifespan_turns: f64::from(turns) / per_session.len().max(1) as f64,
        fallbacks: per_session.iter().map(|s| s.fallbacks).sum(),
        per_session,
    }
}

/// Runs `sessions` sessions; session `i` uses `derive_seed(seed, i)`.
pub fn run_policy_with(
    policy: Policy,
    config: &GameConfig,
    seed: u64,
    sessions: usize,
    options: &SimOptions,
) -> Result<SimResult, SimError> {
    policy.validate()?;
    if sessions == 0 {
        return Err(SimError::NoSessions);
    }
    let mut runs = Vec::with_capacity(sessions);
    for i in 0..sessions {
        let mut chooser = policy;
        runs.push(run_session(&mut chooser, config, derive_seed(seed, i as u64), options)?);
    }
    Ok(aggregate(policy, seed, runs))
}

pub fn run_policy(policy: Policy, config: &GameConfig, seed: u64, sessions: usize) -> Result<SimResult, SimError> {
    run_policy_with(policy, config, seed, sessions, &SimOptions::default())
}

pub const MIN_COMPARISON_SEEDS: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyComparison {
    pub a: Policy,
    pub b: Policy,
    /// Per-seed pool-one shares as (a, b).
    pub pairs: Vec<PairedSample>,
    pub mean_a: f64,
    pub mean_b: f64,
    pub test: WilcoxonResult,
}

/// Pairs one session of `a` on `seeds_a[i]` with one of `b` on `seeds_b[i]`
/// and tests the pool-one shares.
pub fn compare_policies_on(
    a: Policy,
    seeds_a: &[u64],
    b: Policy,
    seeds_b: &[u64],
    config: &GameConfig,
    options: &SimOptions,
) -> Result<PolicyComparison, SimError> {
    let n = seeds_a.len().min(seeds_b.len());
    if n < MIN_COMPARISON_SEEDS {
        return Err(SimError::TooFewSeeds { needed: MIN_COMPARISON_SEEDS, got: n });
    }
    let mut pairs = Vec::with_capacity(n);
    for (sa, sb) in seeds_a.iter().zip(seeds_b) {
        let ra = run_policy_with(a, config, *sa, 1, options)?;
        let rb = run_policy_with(b, config, *sb, 1, options)?;
        pairs.push(PairedSample::new(format!("{sa}/{sb}"), ra.pool1_share, rb.pool1_share));
    }
    let test = wilcoxon_signed_rank(&pairs, WilcoxonMode::Auto)?;
    let mean = |f: fn(&PairedSample) -> f64| pairs.iter().map(f).sum::<f64>() / pairs.len() as f64;
    Ok(PolicyComparison { a, b, mean_a: mean(|p| p.a), mean_b: mean(|p| p.b), pairs, test })
}

/// Paired comparison of two policies on the same seeds.
pub fn compare_policies(
    a: Policy,
    b: Policy,
    config: &GameConfig,
    seeds: &[u64],
) -> Result<PolicyComparison, SimError> {
    compare_policies_on(a, seeds, b, seeds, config, &SimOptions::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policy_names_parse() {
        assert_eq!("greedy".parse::<Policy>().unwrap(), Policy::GreedyPositive);
        assert_eq!("uniform_random".parse::<Policy>().unwrap(), Policy::UniformRandom);
        assert_eq!("trade-off:0.25".parse::<Policy>().unwrap(), Policy::TradeOff(0.25));
        assert!("trade-off:1.5".parse::<Policy>().is_err());
        assert!("chaotic".parse::<Policy>().is_err());
        for p in [Policy::UniformRandom, Policy::GreedyPositive, Policy::IgnoreText, Policy::TradeOff(0.5)] {
            assert_eq!(p.name().parse::<Policy>().unwrap(), p);
        }
    }

    #[test]
    fn pool1_share_handles_empty() {
        assert_eq!(pool1_share([0, 0, 4]), 0.0);
        assert_eq!(pool1_share([1, 3, 0]), 0.25);
    }

    #[test]
    fn greedy_order() {
        let mut kinds = CandyKind::ALL.to_vec();
        kinds.sort_by(|a, b| greedy_score(*b).total_cmp(&greedy_score(*a)));
        assert_eq!(kinds[0], CandyKind::Green);
        assert_eq!(kinds[1], CandyKind::Blue);
        assert_eq!(kinds[5], CandyKind::Red);
        assert_eq!(kinds[4], CandyKind::Black);
    }

    #[test]
    fn session_is_deterministic() {
        let config = GameConfig::default();
        let a = run_policy(Policy::UniformRandom, &config, 5, 2).unwrap();
        let b = run_policy(Policy::UniformRandom, &config, 5, 2).unwrap();
        assert_eq!(a, b);
        assert!(a.turns_played > 0);
    }

    #[test]
    fn zero_sessions_rejected() {
        assert_eq!(run_policy(Policy::IgnoreText, &GameConfig::default(), 1, 0), Err(SimError::NoSessions));
    }

    #[test]
    fn too_few_seeds_rejected() {
        let seeds: Vec<u64> = (0..5).collect();
        assert!(matches!(
            compare_policies(Policy::UniformRandom, Policy::GreedyPositive, &GameConfig::default(), &seeds),
            Err(SimError::TooFewSeeds { needed: 30, got: 5 })
        ));
    }
}
