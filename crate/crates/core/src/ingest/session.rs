use chrono::{DateTime, NaiveDate, NaiveTime, TimeZone};
use chrono_tz::Tz;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{BookSnapshot, IngestError, TimestampNs};

/// Local trading hours `[open, close)` in an IANA time zone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SessionFilter {
    open: NaiveTime,
    close: NaiveTime,
    tz: Tz,
}

impl SessionFilter {
    pub fn new(open: NaiveTime, close: NaiveTime, tz: &str) -> Result<Self, IngestError> {
        let tz: Tz = tz
            .parse()
            .map_err(|_| IngestError::InvalidTimezone(tz.to_string()))?;
        if open >= close {
            return Err(IngestError::InvalidSession(format!(
                "open {open} must precede close {close}"
            )));
        }
        Ok(SessionFilter { open, close, tz })
    }

    /// Parses `HH:MM-HH:MM` (seconds optional).
    pub fn from_range(range: &str, tz: &str) -> Result<Self, IngestError> {
        let bad = || IngestError::InvalidSession(format!("`{range}` is not HH:MM-HH:MM"));
        let (o, c) = range.split_once('-').ok_or_else(bad)?;
        let parse = |s: &str| {
            NaiveTime::parse_from_str(s.trim(), "%H:%M:%S")
                .or_else(|_| NaiveTime::parse_from_str(s.trim(), "%H:%M"))
                .map_err(|_| bad())
        };
        Self::new(parse(o)?, parse(c)?, tz)
    }

    /// U.S. regular trading hours, 09:30-16:00 America/New_York.
    pub fn us_equities() -> Self {
        Self::from_range("09:30-16:00", "America/New_York").expect("static session")
    }

    pub fn open(&self) -> NaiveTime {
        self.open
    }

    pub fn close(&self) -> NaiveTime {
        self.close
    }

    pub fn tz_name(&self) -> &'static str {
        self.tz.name()
    }

    fn local(&self, ts: TimestampNs) -> DateTime<Tz> {
        DateTime::from_timestamp_nanos(ts).with_timezone(&self.tz)
    }

    pub fn contains(&self, ts: TimestampNs) -> bool {
        let t = self.local(ts).time();
        t >= self.open && t < self.close
    }

    pub fn local_date(&self, ts: TimestampNs) -> NaiveDate {
        self.local(ts).date_naive()
    }

    /// UTC nanoseconds of the session open on a local date.
    pub fn open_ns(&self, date: NaiveDate) -> Option<TimestampNs> {
        self.tz
            .from_local_datetime(&date.and_time(self.open))
            .earliest()
            .and_then(|dt| dt.timestamp_nanos_opt())
    }

    /// Session length in nanoseconds (wall-clock, ignoring DST inside the session).
    pub fn length_ns(&self) -> i64 {
        (self.close - self.open)
            .num_nanoseconds()
            .expect("session length fits in i64")
    }
}

/// Keeps snapshots whose local time of day lies in `[open, close)`.
pub fn filter_session(snapshots: Vec<BookSnapshot>, filter: &SessionFilter) -> Vec<BookSnapshot> {
    snapshots
        .into_iter()
        .filter(|s| filter.contains(s.timestamp))
        .collect()
}

#[derive(Serialize, Deserialize)]
struct SessionRepr {
    open: String,
    close: String,
    tz: String,
}

impl Serialize for SessionFilter {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        SessionRepr {
            open: self.open.format("%H:%M:%S").to_string(),
            close: self.close.format("%H:%M:%S").to_string(),
            tz: self.tz.name().to_string(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SessionFilter {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = SessionRepr::deserialize(d)?;
        SessionFilter::from_range(&format!("{}-{}", r.open, r.close), &r.tz)
            .map_err(serde::de::Error::custom)
    }
}
