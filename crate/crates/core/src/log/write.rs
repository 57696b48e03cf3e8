use super::{format_timestamp, LogEvent, LogPayload, SessionTrace};

fn payload_text(payload: &LogPayload) -> String {
    match payload {
        LogPayload::GameStart => "Game Start".into(),
        LogPayload::GameEnd => "Game End".into(),
        LogPayload::OptionShown { code, text } => format!("{code}{text}"),
        LogPayload::Chose { code: code @ super::OptionCode::Candy { .. } } => format!("Chose{code}"),
        LogPayload::Chose { code } => format!("[Chose]{code}"),
        LogPayload::AddOwnText { text } => format!("[Add Own Text]{text}"),
        LogPayload::Ending { text } => format!("[Ending]{text}"),
        LogPayload::Ate { count } => format!("Ate[{count}]"),
    }
}

/// One event as it appears in a log, without the trailing newline.
pub fn write_event(event: &LogEvent) -> String {
    format!("[{}]{}", format_timestamp(&event.timestamp), payload_text(&event.payload))
}

/// Serializes a trace using its recorded layout.
pub fn write_trace(trace: &SessionTrace) -> String {
    let mut lines: Vec<String> = vec![String::new(); trace.layout.leading_blank_lines];
    for (i, event) in trace.events.iter().enumerate() {
        lines.push(write_event(event));
        let gap = trace.layout.gaps.get(i).copied().unwrap_or(0);
        lines.extend(std::iter::repeat_n(String::new(), gap));
    }
    let mut out = lines.join("\n");
    if trace.layout.final_newline {
        out.push('\n');
    }
    out
}

/// Append-only log builder used by live sessions.
///
/// Events are separated by one blank line, except that options shown in the
/// same turn sit on adjacent lines.
#[derive(Debug, Clone, Default)]
pub struct LogWriter {
    buffer: String,
    previous_was_option: Option<bool>,
}

impl LogWriter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends `event` and returns the bytes added.
    pub fn append(&mut self, event: &LogEvent) -> String {
        let is_option = matches!(event.payload, LogPayload::OptionShown { .. });
        let mut chunk = String::new();
        match self.previous_was_option {
            Some(true) if is_option => {}
            Some(_) => chunk.push('\n'),
            None => {}
        }
        chunk.push_str(&write_event(event));
        chunk.push('\n');
        self.buffer.push_str(&chunk);
        self.previous_was_option = Some(is_option);
        chunk
    }

    pub fn contents(&self) -> &str {
        &self.buffer
    }

    pub fn is_empty(&self) -> bool {
        self.buffer.is_empty()
    }
}
