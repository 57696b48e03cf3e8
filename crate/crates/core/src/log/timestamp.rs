//! `M/D/YYYY h:mm:ss AM` timestamps: no zero padding on month, day or hour.

use chrono::{Datelike, NaiveDate, NaiveDateTime, Timelike};

pub fn format_timestamp(ts: &NaiveDateTime) -> String {
    let (pm, hour) = ts.hour12();
    format!(
        "{}/{}/{} {}:{:02}:{:02} {}",
        ts.month(),
        ts.day(),
        ts.year(),
        hour,
        ts.minute(),
        ts.second(),
        if pm { "PM" } else { "AM" }
    )
}

fn number(s: &str, min_len: usize, max_len: usize, padded: bool) -> Option<u32> {
    if s.len() < min_len || s.len() > max_len || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    if !padded && s.len() > 1 && s.starts_with('0') {
        return None;
    }
    s.parse().ok()
}

/// Strict inverse of [`format_timestamp`].
pub fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    let (date, rest) = s.split_once(' ')?;
    let (time, meridiem) = rest.split_once(' ')?;
    let mut date_parts = date.split('/');
    let month = number(date_parts.next()?, 1, 2, false)?;
    let day = number(date_parts.next()?, 1, 2, false)?;
    let year = number(date_parts.next()?, 4, 4, true)?;
    if date_parts.next().is_some() {
        return None;
    }
    let mut time_parts = time.split(':');
    let hour = number(time_parts.next()?, 1, 2, false)?;
    let minute = number(time_parts.next()?, 2, 2, true)?;
    let second = number(time_parts.next()?, 2, 2, true)?;
    if time_parts.next().is_some() || !(1..=12).contains(&hour) {
        return None;
    }
    let hour24 = match meridiem {
        "AM" => hour % 12,
        "PM" => hour % 12 + 12,
        _ => return None,
    };
    NaiveDate::from_ymd_opt(year as i32, month, day)?.and_hms_opt(hour24, minute, second)
}
