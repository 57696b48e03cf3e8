//! Choice and candy statistics drawn from logs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::engine::CandyKind;
use crate::log::{LogPayload, OptionCode, SessionTrace};
use crate::story::SessionVersion;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grouping {
    #[default]
    None,
    Version,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionUsage {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    pub version: SessionVersion,
    pub total_choices: u32,
    pub low_temp_choices: u32,
    pub high_temp_choices: u32,
    pub self_writes: u32,
    /// `None` when no decision was made.
    pub mean_decision_seconds: Option<f64>,
    pub candies_generated: BTreeMap<CandyKind, u32>,
    pub candies_selected: BTreeMap<CandyKind, u32>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    /// Sample standard deviation; 0 below two values.
    pub sd: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self::default();
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let sd = if values.len() < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        Self { mean, sd }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CohortUsage {
    /// `None` for an ungrouped cohort.
    pub version: Option<SessionVersion>,
    pub sessions: usize,
    pub total_choices: Summary,
    pub low_temp_choices: Summary,
    pub high_temp_choices: Summary,
    pub self_writes: Summary,
    pub mean_decision_seconds: Summary,
    pub candies_generated: BTreeMap<CandyKind, u32>,
    pub candies_selected: BTreeMap<CandyKind, u32>,
    /// Selected over generated, for kinds generated at least once.
    pub selection_rate: BTreeMap<CandyKind, f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct UsageStats {
    pub sessions: Vec<SessionUsage>,
    pub cohorts: Vec<CohortUsage>,
}

fn bump(map: &mut BTreeMap<CandyKind, u32>, kind: CandyKind) {
    *map.entry(kind).or_default() += 1;
}

/// Counts for one trace. Every shown candy counts as generated once per turn.
pub fn session_usage(trace: &SessionTrace) -> SessionUsage {
    let mut usage = SessionUsage {
        source: trace.source.clone(),
        version: trace.version,
        total_choices: 0,
        low_temp_choices: 0,
        high_temp_choices: 0,
        self_writes: 0,
        mean_decision_seconds: None,
        candies_generated: BTreeMap::new(),
        candies_selected: BTreeMap::new(),
    };
    let mut decisions = Vec::new();
    let mut shown: Vec<OptionCode> = Vec::new();
    let mut turn_start = None;
    let mut turn_candies: BTreeMap<u8, CandyKind> = BTreeMap::new();

    let close_turn = |turn_candies: &mut BTreeMap<u8, CandyKind>, usage: &mut SessionUsage| {
        for kind in std::mem::take(turn_candies).into_values() {
            bump(&mut usage.candies_generated, kind);
        }
    };

    for event in &trace.events {
        match &event.payload {
            LogPayload::OptionShown { code, .. } => {
                turn_start.get_or_insert(event.timestamp);
                if let OptionCode::Candy { slot, kind } = code {
                    if let Some(kind) = CandyKind::from_id(*kind) {
                        turn_candies.insert(*slot, kind);
                    }
                }
                shown.push(*code);
            }
            LogPayload::Chose { .. } | LogPayload::AddOwnText { .. } => {
                usage.total_choices += 1;
                match code_of(&event.payload) {
                    None => usage.self_writes += 1,
                    Some(OptionCode::Candy { slot, kind }) => {
                        match slot {
                            0 => usage.low_temp_choices += 1,
                            1 => usage.high_temp_choices += 1,
                            _ => usage.self_writes += 1,
                        }
                        if let Some(kind) = CandyKind::from_id(kind) {
                            bump(&mut usage.candies_selected, kind);
                        }
                    }
                    Some(OptionCode::Temperature { value }) => {
                        let lowest = shown
                            .iter()
                            .filter_map(|c| match c {
                                OptionCode::Temperature { value } => Some(*value),
                                _ => None,
                            })
                            .fold(value, f64::min);
                        if value <= lowest {
                            usage.low_temp_choices += 1;
                        } else {
                            usage.high_temp_choices += 1;
                        }
                    }
                }
                let start = turn_start.take().unwrap_or(event.timestamp);
                decisions.push((event.timestamp - start).num_milliseconds() as f64 / 1000.0);
                shown.clear();
                close_turn(&mut turn_candies, &mut usage);
            }
            _ => {}
        }
    }
    close_turn(&mut turn_candies, &mut usage);
    if !decisions.is_empty() {
        usage.mean_decision_seconds = Some(decisions.iter().sum::<f64>() / decisions.len() as f64);
    }
    usage
}

fn code_of(payload: &LogPayload) -> Option<OptionCode> {
    match payload {
        LogPayload::Chose { code } => Some(*code),
        _ => None,
    }
}

fn cohort(version: Option<SessionVersion>, sessions: &[&SessionUsage]) -> CohortUsage {
    let column = |f: &dyn Fn(&SessionUsage) -> f64| -> Summary {
        Summary::of(&sessions.iter().map(|s| f(s)).collect::<Vec<_>>())
    };
    let decisions: Vec<f64> = sessions.iter().filter_map(|s| s.mean_decision_seconds).collect();
    let mut generated = BTreeMap::new();
    let mut selected = BTreeMap::new();
    for s in sessions {
        for (k, v) in &s.candies_generated {
            *generated.entry(*k).or_default() += v;
        }
        for (k, v) in &s.candies_selected {
            *selected.entry(*k).or_default() += v;
        }
    }
    let selection_rate = generated
        .iter()
        .filter(|(_, g)| **g > 0)
        .map(|(k, g)| (*k, f64::from(selected.get(k).copied().unwrap_or(0)) / f64::from(*g)))
        .collect();
    CohortUsage {
        version,
        sessions: sessions.len(),
        total_choices: column(&|s| f64::from(s.total_choices)),
        low_temp_choices: column(&|s| f64::from(s.low_temp_choices)),
        high_temp_choices: column(&|s| f64::from(s.high_temp_choices)),
        self_writes: column(&|s| f64::from(s.self_writes)),
        mean_decision_seconds: Summary::of(&decisions),
        candies_generated: generated,
        candies_selected: selected,
        selection_rate,
    }
}

/// Per-session counts plus cohort summaries. Without grouping, all traces
/// must share one version.
pub fn usage_stats(traces: &[SessionTrace], grouping: Grouping) -> Result<UsageStats, AnalysisError> {
    let sessions: Vec<SessionUsage> = traces.iter().map(session_usage).collect();
    let cohorts = match grouping {
        Grouping::None => {
            if let Some(first) = sessions.first() {
                if sessions.iter().any(|s| s.version != first.version) {
                    return Err(AnalysisError::MixedVersions);
                }
            }
            let all: Vec<&SessionUsage> = sessions.iter().collect();
            vec![cohort(sessions.first().map(|s| s.version), &all)]
        }
        Grouping::Version => [SessionVersion::NonGame, SessionVersion::Game]
            .into_iter()
            .filter_map(|v| {
                let members: Vec<&SessionUsage> = sessions.iter().filter(|s| s.version == v).collect();
                (!members.is_empty()).then(|| cohort(Some(v), &members))
            })
            .collect(),
    };
    Ok(UsageStats { sessions, cohorts })
}
