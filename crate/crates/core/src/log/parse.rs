use super::{
    parse_timestamp, LogError, LogEvent, LogPayload, LogWarning, OptionCode, SessionTrace,
    TraceLayout,
};
use crate::story::SessionVersion;

fn is_header(line: &str) -> bool {
    let bytes = line.as_bytes();
    bytes.len() > 1 && bytes[0] == b'[' && bytes[1].is_ascii_digit()
}

fn err(line: usize, message: impl Into<String>) -> LogError {
    LogError::Parse { line, message: message.into() }
}

/// `[<digits>]` at the start of `s`, canonical form only. Returns the value and the rest.
fn bracket_int(s: &str) -> Option<(u8, &str)> {
    let inner_end = s.strip_prefix('[')?.find(']')?;
    let raw = &s[1..1 + inner_end];
    let value: u8 = raw.parse().ok()?;
    (value.to_string() == raw).then_some((value, &s[inner_end + 2..]))
}

fn bracket_decimal(s: &str) -> Option<(f64, &str)> {
    let inner_end = s.strip_prefix('[')?.find(']')?;
    let raw = &s[1..1 + inner_end];
    if !raw.bytes().all(|b| b.is_ascii_digit() || b == b'.') {
        return None;
    }
    let value: f64 = raw.parse().ok()?;
    (value.is_finite() && format!("{value}") == raw).then_some((value, &s[inner_end + 2..]))
}

fn parse_payload(rest: &str, line: usize) -> Result<LogPayload, LogError> {
    match rest {
        "Game Start" => return Ok(LogPayload::GameStart),
        "Game End" => return Ok(LogPayload::GameEnd),
        _ => {}
    }
    if let Some(tail) = rest.strip_prefix("Chose") {
        let (slot, tail) = bracket_int(tail).ok_or_else(|| err(line, "malformed Chose slot"))?;
        let (kind, tail) = bracket_int(tail).ok_or_else(|| err(line, "malformed Chose kind"))?;
        if !tail.is_empty() {
            return Err(err(line, format!("unexpected text after Chose: {tail:?}")));
        }
        return Ok(LogPayload::Chose { code: OptionCode::Candy { slot, kind } });
    }
    if let Some(tail) = rest.strip_prefix("Ate[") {
        let count = tail
            .strip_suffix(']')
            .filter(|n| !n.is_empty() && n.bytes().all(|b| b.is_ascii_digit()))
            .and_then(|n| n.parse::<u32>().ok().filter(|v| v.to_string() == n))
            .ok_or_else(|| err(line, format!("malformed Ate count in {rest:?}")))?;
        return Ok(LogPayload::Ate { count });
    }
    if let Some(tail) = rest.strip_prefix("[Chose]") {
        let (value, tail) =
            bracket_decimal(tail).ok_or_else(|| err(line, "malformed [Chose] temperature"))?;
        if !tail.is_empty() {
            return Err(err(line, format!("unexpected text after [Chose]: {tail:?}")));
        }
        return Ok(LogPayload::Chose { code: OptionCode::Temperature { value } });
    }
    if let Some(text) = rest.strip_prefix("[Add Own Text]") {
        return Ok(LogPayload::AddOwnText { text: text.to_string() });
    }
    if let Some(text) = rest.strip_prefix("[Ending]") {
        return Ok(LogPayload::Ending { text: text.to_string() });
    }
    if rest.starts_with('[') {
        if let Some((slot, tail)) = bracket_int(rest) {
            if let Some((kind, text)) = bracket_int(tail) {
                return Ok(LogPayload::OptionShown {
                    code: OptionCode::Candy { slot, kind },
                    text: text.to_string(),
                });
            }
        }
        if let Some((value, text)) = bracket_decimal(rest) {
            return Ok(LogPayload::OptionShown {
                code: OptionCode::Temperature { value },
                text: text.to_string(),
            });
        }
    }
    Err(err(line, format!("unrecognised payload {rest:?}")))
}

/// Parses a whole log. With `expected` set, the detected version must match it;
/// otherwise it is inferred from the first version-specific payload, and a log
/// that has none is treated as non-game.
pub fn parse_log(input: &str, expected: Option<SessionVersion>) -> Result<SessionTrace, LogError> {
    let mut lines: Vec<&str> = input.split('\n').collect();
    let final_newline = input.ends_with('\n');
    if final_newline {
        lines.pop();
    }

    let mut layout = TraceLayout { final_newline, ..TraceLayout::default() };
    let mut events: Vec<LogEvent> = Vec::new();
    let mut lines_of: Vec<usize> = Vec::new();
    // Continuation lines of the current event, trailing blanks included.
    let mut body: Vec<&str> = Vec::new();

    let flush = |events: &mut Vec<LogEvent>, layout: &mut TraceLayout, body: &mut Vec<&str>, line: usize| {
        let Some(event) = events.last_mut() else { return Ok(()) };
        let mut gap = 0;
        while body.last() == Some(&"") {
            body.pop();
            gap += 1;
        }
        layout.gaps.push(gap);
        if body.is_empty() {
            return Ok(());
        }
        let extra = body.join("\n");
        body.clear();
        match &mut event.payload {
            LogPayload::OptionShown { text, .. }
            | LogPayload::AddOwnText { text }
            | LogPayload::Ending { text } => {
                text.push('\n');
                text.push_str(&extra);
                Ok(())
            }
            _ => Err(err(line, "unexpected text after a non-text event")),
        }
    };

    for (i, raw) in lines.iter().enumerate() {
        let line_no = i + 1;
        if is_header(raw) {
            flush(&mut events, &mut layout, &mut body, line_no - 1)?;
            let close = raw.find(']').ok_or_else(|| err(line_no, "unterminated timestamp"))?;
            let timestamp = parse_timestamp(&raw[1..close])
                .ok_or_else(|| err(line_no, format!("invalid timestamp {:?}", &raw[1..close])))?;
            let payload = parse_payload(&raw[close + 1..], line_no)?;
            events.push(LogEvent::new(timestamp, payload));
            lines_of.push(line_no);
        } else if events.is_empty() {
            if raw.is_empty() {
                layout.leading_blank_lines += 1;
            } else {
                return Err(err(line_no, "text before the first event"));
            }
        } else {
            body.push(raw);
        }
    }
    flush(&mut events, &mut layout, &mut body, lines.len())?;

    if events.is_empty() {
        return Err(LogError::Empty);
    }
    if events[0].payload != LogPayload::GameStart {
        return Err(err(lines_of[0], "first event must be Game Start"));
    }

    let mut detected: Option<SessionVersion> = None;
    for (event, line) in events.iter().zip(&lines_of) {
        let Some(hint) = event.payload.version_hint() else { continue };
        if let Some(want) = expected {
            if hint != want {
                return Err(LogError::VersionMismatch { line: *line, expected: want, found: hint });
            }
        }
        match detected {
            None => detected = Some(hint),
            Some(v) if v != hint => {
                return Err(LogError::MixedVersion { line: *line, expected: v, found: hint })
            }
            _ => {}
        }
    }
    let version = expected.or(detected).unwrap_or(SessionVersion::NonGame);

    Ok(SessionTrace {
        version,
        warnings: unshown_choices(&events, &lines_of),
        events,
        layout,
        source: None,
    })
}

fn unshown_choices(events: &[LogEvent], lines: &[usize]) -> Vec<LogWarning> {
    let mut warnings = Vec::new();
    let mut shown: Vec<OptionCode> = Vec::new();
    for (event, line) in events.iter().zip(lines) {
        match &event.payload {
            LogPayload::OptionShown { code, .. } => shown.push(*code),
            LogPayload::Chose { code } => {
                if !shown.contains(code) {
                    warnings.push(LogWarning {
                        line: *line,
                        message: format!("chose {code} which was not shown this turn"),
                    });
                }
                shown.clear();
            }
            LogPayload::AddOwnText { .. } => shown.clear(),
            _ => {}
        }
    }
    warnings
}
