use std::fs;
use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use snake_story::analysis::{build_report, Grouping, Report};
use snake_story::log::{parse_log, replay, SessionTrace};
use snake_story::script::{autoplay, parse_script, run_script, Autopilot};
use snake_story::sim::{compare_policies, run_policy, Policy};
use snake_story::{Choice, GameConfig, ManualClock, Session, SessionStatus, SessionVersion, TextProvider};
use snake_story_service::{ServiceConfig, DEFAULT_PORT};

#[derive(Debug, Parser)]
#[command(name = "snake-story", version, about = "Co-write a story with a language model by playing snake")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Usage statistics, text metrics and paired tests over session logs.
    Analyze {
        #[arg(required = true)]
        logs: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = GroupBy::None)]
        group_by: GroupBy,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Run scripted players through offline games.
    Simulate {
        /// uniform-random, greedy-positive, ignore-text or trade-off:<w>
        #[arg(long)]
        policy: Policy,
        #[arg(long, default_value_t = 100)]
        sessions: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Pair each session with one of this policy and test pool-one shares.
        #[arg(long)]
        compare: Option<Policy>,
        /// Game settings as JSON.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Include every session in JSON output.
        #[arg(long)]
        per_session: bool,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Serve sessions over HTTP and WebSocket, with the browser client at /.
    Serve {
        #[arg(long, default_value_t = DEFAULT_PORT)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        /// Use the offline text generator unless a session asks otherwise.
        #[arg(long)]
        offline: bool,
        #[arg(long, default_value = "logs")]
        logs: PathBuf,
        /// Seconds a disconnected game waits before ending.
        #[arg(long, default_value_t = 120)]
        reconnect_grace: u64,
    },
    /// Play one offline session from a script or on autopilot and print its log.
    Play {
        #[arg(long, value_enum, default_value_t = VersionArg::Game)]
        version: VersionArg,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Input script; without one the autopilot plays.
        #[arg(long)]
        script: Option<PathBuf>,
        /// Candy preference for the autopilot.
        #[arg(long, default_value = "greedy-positive")]
        policy: Policy,
        /// Non-game autopilot turns before ending.
        #[arg(long, default_value_t = 12)]
        turns: u32,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write the log here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rebuild the story and decisions recorded in a log.
    Replay {
        log: PathBuf,
        #[arg(long, value_enum, default_value_t = ReplayFormat::Text)]
        format: ReplayFormat,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GroupBy {
    None,
    Version,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ReplayFormat {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum VersionArg {
    Game,
    Nongame,
}

impl From<VersionArg> for SessionVersion {
    fn from(v: VersionArg) -> Self {
        match v {
            VersionArg::Game => SessionVersion::Game,
            VersionArg::Nongame => SessionVersion::NonGame,
        }
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Analyze { logs, group_by, format } => analyze(&logs, group_by, format),
        Command::Simulate { policy, sessions, seed, compare, config, per_session, format } => {
            simulate(policy, sessions, seed, compare, config.as_deref(), per_session, format)
        }
        Command::Serve { port, host, offline, logs, reconnect_grace } => serve(
            SocketAddr::new(host, port),
            ServiceConfig {
                logs_dir: logs,
                offline_by_default: offline,
                reconnect_grace: Duration::from_secs(reconnect_grace),
                ..ServiceConfig::default()
            },
        ),
        Command::Play { version, seed, script, policy, turns, config, out } => {
            play(version.into(), seed, script.as_deref(), policy, turns, config.as_deref(), out.as_deref())
        }
        Command::Replay { log, format } => replay_log(&log, format),
    }
}

fn load_config(path: Option<&Path>) -> Result<GameConfig> {
    let Some(path) = path else { return Ok(GameConfig::default()) };
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let config: GameConfig = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    config.validate()?;
    Ok(config)
}

fn load_trace(path: &Path) -> Result<SessionTrace> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut trace = parse_log(&text, None).with_context(|| format!("parsing {}", path.display()))?;
    for w in &trace.warnings {
        eprintln!("{}:{}: warning: {}", path.display(), w.line, w.message);
    }
    trace.source = Some(path.display().to_string());
    Ok(trace)
}

fn analyze(paths: &[PathBuf], group_by: GroupBy, format: Format) -> Result<()> {
    let traces = paths.iter().map(|p| load_trace(p)).collect::<Result<Vec<_>>>()?;
    let grouping = match group_by {
        GroupBy::None => Grouping::None,
        GroupBy::Version => Grouping::Version,
    };
    let report = build_report(&traces, grouping)?;
    let stdout = std::io::stdout();
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(stdout.lock(), &report)?;
            println!();
        }
        Format::Csv => write_report_csv(&report, stdout.lock())?,
        Format::Table => print!("{}", report_table(&report)),
    }
    Ok(())
}

#[derive(Serialize)]
struct SessionRow<'a> {
    source: &'a str,
    participant: &'a str,
    version: SessionVersion,
    total_choices: u32,
    low_temp_choices: u32,
    high_temp_choices: u32,
    self_writes: u32,
    mean_decision_seconds: Option<f64>,
    word_count: Option<usize>,
    mtld: Option<f64>,
    mtld_flagged: Option<bool>,
    sentence_overlap: Option<f64>,
    replay_error: Option<&'a str>,
}

fn write_report_csv(report: &Report, out: impl Write) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for s in &report.sessions {
        let mtld = s.text.as_ref().and_then(|t| t.mtld.as_ref());
        writer.serialize(SessionRow {
            source: s.source.as_deref().unwrap_or(""),
            participant: s.participant.as_deref().unwrap_or(""),
            version: s.version,
            total_choices: s.usage.total_choices,
            low_temp_choices: s.usage.low_temp_choices,
            high_temp_choices: s.usage.high_temp_choices,
            self_writes: s.usage.self_writes,
            mean_decision_seconds: s.usage.mean_decision_seconds,
            word_count: s.text.as_ref().map(|t| t.word_count),
            mtld: mtld.map(|m| m.value),
            mtld_flagged: mtld.map(|m| m.flag.is_some()),
            sentence_overlap: s.text.as_ref().and_then(|t| t.sentence_overlap.value),
            replay_error: s.replay_error.as_deref(),
        })?;
    }
    writer.flush()?;
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |v| format!("{v:.2}"))
}

fn report_table(report: &Report) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<28} {:<8} {:>6} {:>5} {:>5} {:>5} {:>9} {:>6} {:>7} {:>8}",
        "session", "version", "choice", "low", "high", "own", "decide(s)", "words", "mtld", "overlap"
    );
    for s in &report.sessions {
        let text = s.text.as_ref();
        let _ = writeln!(
            out,
            "{:<28} {:<8} {:>6} {:>5} {:>5} {:>5} {:>9} {:>6} {:>7} {:>8}",
            s.source.as_deref().and_then(|p| Path::new(p).file_name()?.to_str()).unwrap_or("-"),
            s.version.as_str(),
            s.usage.total_choices,
            s.usage.low_temp_choices,
            s.usage.high_temp_choices,
            s.usage.self_writes,
            opt(s.usage.mean_decision_seconds),
            text.map_or_else(|| "-".into(), |t| t.word_count.to_string()),
            opt(text.and_then(|t| t.mtld.as_ref()).map(|m| m.value)),
            opt(text.and_then(|t| t.sentence_overlap.value)),
        );
    }
    for c in &report.cohorts {
        let name = c.version.map_or("all", SessionVersion::as_str);
        let _ = writeln!(
            out,
            "\ncohort {name}: {} sessions, choices {:.2} (sd {:.2}), low {:.2}, high {:.2}, own {:.2}",
            c.sessions,
            c.total_choices.mean,
            c.total_choices.sd,
            c.low_temp_choices.mean,
            c.high_temp_choices.mean,
            c.self_writes.mean
        );
        for (kind, rate) in &c.selection_rate {
            let _ = writeln!(
                out,
                "  {:<7} generated {:>4}  selected {:>4}  rate {:>6.2}%",
                kind.name(),
                c.candies_generated.get(kind).copied().unwrap_or(0),
                c.candies_selected.get(kind).copied().unwrap_or(0),
                rate * 100.0
            );
        }
    }
    if !report.comparisons.is_empty() {
        let _ = writeln!(out, "\npaired comparisons (non-game vs game):");
        for c in &report.comparisons {
            match &c.result {
                Some(r) => {
                    let _ = writeln!(
                        out,
                        "  {:<22} n={:<3} W={:<6} p={:.4} ({:?})",
                        c.metric, r.n_effective, r.w_statistic, r.p_value, r.method
                    );
                }
                None => {
                    let _ = writeln!(out, "  {:<22} pairs={} {}", c.metric, c.pairs, c.error.as_deref().unwrap_or(""));
                }
            }
        }
    }
    out
}

fn simulate(
    policy: Policy,
    sessions: usize,
    seed: u64,
    compare: Option<Policy>,
    config: Option<&Path>,
    per_session: bool,
    format: Format,
) -> Result<()> {
    let config = load_config(config)?;
    if format == Format::Csv {
        bail!("simulate supports --format json or table");
    }
    if let Some(other) = compare {
        let seeds: Vec<u64> = (0..sessions as u64).map(|i| snake_story::rng::derive_seed(seed, i)).collect();
        let cmp = compare_policies(policy, other, &config, &seeds)?;
        if format == Format::Json {
            serde_json::to_writer_pretty(std::io::stdout().lock(), &cmp)?;
            println!();
        } else {
            println!("{} vs {} over {} seeds", cmp.a.name(), cmp.b.name(), cmp.pairs.len());
            println!("mean pool-one share: {:.4} vs {:.4}", cmp.mean_a, cmp.mean_b);
            println!(
                "Wilcoxon W={} n={} p={:.3e} ({:?})",
                cmp.test.w_statistic, cmp.test.n_effective, cmp.test.p_value, cmp.test.method
            );
        }
        return Ok(());
    }
    let mut result = run_policy(policy, &config, seed, sessions)?;
    if format == Format::Json {
        if !per_session {
            result.per_session.clear();
        }
        serde_json::to_writer_pretty(std::io::stdout().lock(), &result)?;
        println!();
    } else {
        println!("policy {} seed {} sessions {}", result.policy.name(), result.seed, result.sessions);
        println!("turns played {} (mean lifespan {:.2} turns)", result.turns_played, result.lifespan_turns);
        println!("pool-one share {:.4}, fallbacks {}", result.pool1_share, result.fallbacks);
        for (kind, generated) in &result.candy_generated {
            println!(
                "  {:<7} generated {:>6}  selected {:>6}  rate {:>6.2}%",
                kind.name(),
                generated,
                result.candy_selected.get(kind).copied().unwrap_or(0),
                result.candy_selection_rates.get(kind).copied().unwrap_or(0.0) * 100.0
            );
        }
    }
    Ok(())
}

fn serve(addr: SocketAddr, config: ServiceConfig) -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .init();
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(snake_story_service::serve(config, addr))?;
    Ok(())
}

fn play(
    version: SessionVersion,
    seed: u64,
    script: Option<&Path>,
    policy: Policy,
    turns: u32,
    config: Option<&Path>,
    out: Option<&Path>,
) -> Result<()> {
    let config = load_config(config)?;
    let clock = ManualClock::at_default_epoch();
    let provider = Arc::new(TextProvider::offline(seed));
    let mut session = Session::start(version, config, provider, seed, Arc::new(clock.clone()))?;
    match script {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let steps = parse_script(&text)?;
            run_script(&mut session, &clock, &steps)?;
            if session.status() == SessionStatus::Active {
                match version {
                    SessionVersion::NonGame => session.submit_choice(Choice::EndStory)?,
                    SessionVersion::Game => session.abandon()?,
                }
            }
        }
        None => {
            let pilot = Autopilot { policy, seed, turns, ..Autopilot::default() };
            autoplay(&mut session, &clock, &pilot)?;
        }
    }
    match out {
        Some(path) => fs::write(path, session.log_text()).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{}", session.log_text()),
    }
    let result = session.finalize()?;
    eprintln!("{}", serde_json::to_string_pretty(&result)?);
    Ok(())
}

#[derive(Serialize)]
struct ReplayOutput {
    version: SessionVersion,
    turns: usize,
    story: String,
    decision_times: Vec<f64>,
    ate: Option<u32>,
    ended: bool,
}

fn replay_log(path: &Path, format: ReplayFormat) -> Result<()> {
    let trace = load_trace(path)?;
    let replayed = replay(&trace).with_context(|| format!("replaying {}", path.display()))?;
    let output = ReplayOutput {
        version: replayed.version,
        turns: replayed.turns(),
        story: replayed.story(),
        decision_times: replayed.decision_times.clone(),
        ate: replayed.ate,
        ended: replayed.ended,
    };
    match format {
        ReplayFormat::Json => {
            serde_json::to_writer_pretty(std::io::stdout().lock(), &output)?;
            println!();
        }
        ReplayFormat::Text => {
            println!("{}", output.story);
            println!();
            println!("version {}, {} turns, ended: {}", output.version, output.turns, output.ended);
            if let Some(ate) = output.ate {
                println!("candies eaten: {ate}");
            }
            let times: Vec<String> = output.decision_times.iter().map(|t| format!("{t}")).collect();
            println!("decision times (s): {}", times.join(", "));
        }
    }
    Ok(())
}
