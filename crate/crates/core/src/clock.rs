//! Wall-clock sources. Sessions read time only through [`Clock`], so tests and
//! scripted runs can drive it by hand.

use std::sync::{Arc, Mutex};

use chrono::{Duration, NaiveDateTime};

pub trait Clock: Send + Sync {
    fn now(&self) -> NaiveDateTime;
}

/// Local wall-clock time, truncated to whole seconds.
#[derive(Debug, Clone, Copy, Default)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> NaiveDateTime {
        let now = chrono::Local::now().naive_local();
        now - Duration::nanoseconds(i64::from(now.and_utc().timestamp_subsec_nanos()))
    }
}

/// Clock that only moves when told to. Clones share the same time.
#[derive(Debug, Clone)]
pub struct ManualClock {
    now: Arc<Mutex<NaiveDateTime>>,
}

impl ManualClock {
    pub fn new(start: NaiveDateTime) -> Self {
        Self { now: Arc::new(Mutex::new(start)) }
    }

    /// Starts at 3/6/2023 7:29:47 PM.
    pub fn at_default_epoch() -> Self {
        let start = chrono::NaiveDate::from_ymd_opt(2023, 3, 6)
            .and_then(|d| d.and_hms_opt(19, 29, 47))
            .expect("valid date");
        Self::new(start)
    }

    pub fn advance_ms(&self, ms: u64) {
        let mut now = self.now.lock().unwrap_or_else(|p| p.into_inner());
        *now += Duration::milliseconds(ms as i64);
    }

    pub fn set(&self, at: NaiveDateTime) {
        *self.now.lock().unwrap_or_else(|p| p.into_inner()) = at;
    }
}

impl Clock for ManualClock {
    fn now(&self) -> NaiveDateTime {
        *self.now.lock().unwrap_or_else(|p| p.into_inner())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manual_clock_is_shared() {
        let clock = ManualClock::at_default_epoch();
        let other = clock.clone();
        let start = clock.now();
        other.advance_ms(1500);
        assert_eq!((clock.now() - start).num_milliseconds(), 1500);
    }

    #[test]
    fn system_clock_has_whole_seconds() {
        assert_eq!(SystemClock.now().and_utc().timestamp_subsec_nanos(), 0);
    }
}
