//! Millisecond-resolution UTC instants.
//!
//! Every timestamp in a trace round-trips through the canonical text form
//! `YYYY-MM-DDTHH:MM:SS.mmmZ`, so the in-memory representation is an integer
//! count of milliseconds since the Unix epoch.

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, SecondsFormat, Timelike, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub const MILLIS_PER_SECOND: i64 = 1_000;
pub const MILLIS_PER_HOUR: i64 = 3_600_000;
pub const MILLIS_PER_DAY: i64 = 86_400_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TimestampError {
    #[error("invalid RFC 3339 timestamp {0:?}")]
    Invalid(String),
    #[error("timestamp {0:?} has sub-millisecond precision")]
    TooPrecise(String),
    #[error("timestamp out of range")]
    OutOfRange,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Timestamp(i64);

impl Timestamp {
    pub const fn from_millis(millis: i64) -> Self {
        Timestamp(millis)
    }

    pub const fn as_millis(self) -> i64 {
        self.0
    }

    pub fn as_seconds_f64(self) -> f64 {
        self.0 as f64 / MILLIS_PER_SECOND as f64
    }

    /// Builds a timestamp from calendar fields, midnight-relative.
    pub fn from_ymd_hms(year: i32, month: u32, day: u32, hour: u32, min: u32, sec: u32) -> Option<Self> {
        let date = chrono::NaiveDate::from_ymd_opt(year, month, day)?;
        let dt = date.and_hms_opt(hour, min, sec)?.and_utc();
        Some(Timestamp(dt.timestamp_millis()))
    }

    pub fn parse_rfc3339(s: &str) -> Result<Self, TimestampError> {
        let dt = DateTime::parse_from_rfc3339(s).map_err(|_| TimestampError::Invalid(s.to_owned()))?;
        if dt.nanosecond() % 1_000_000 != 0 {
            return Err(TimestampError::TooPrecise(s.to_owned()));
        }
        Ok(Timestamp(dt.with_timezone(&Utc).timestamp_millis()))
    }

    /// Start of the aligned period of `period_millis` containing this instant.
    pub fn floor_to(self, period_millis: i64) -> Self {
        Timestamp(self.0.div_euclid(period_millis) * period_millis)
    }

    pub fn add_millis(self, millis: i64) -> Self {
        Timestamp(self.0 + millis)
    }

    fn to_datetime(self) -> Option<DateTime<Utc>> {
        DateTime::from_timestamp_millis(self.0)
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_datetime() {
            Some(dt) => f.write_str(&dt.to_rfc3339_opts(SecondsFormat::Millis, true)),
            None => write!(f, "<out-of-range {}ms>", self.0),
        }
    }
}

impl FromStr for Timestamp {
    type Err = TimestampError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Timestamp::parse_rfc3339(s)
    }
}

impl Serialize for Timestamp {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if self.to_datetime().is_none() {
            return Err(serde::ser::Error::custom(TimestampError::OutOfRange));
        }
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Timestamp {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        // toml surfaces bare datetimes as its own type; accept both forms.
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Text(String),
            Toml(toml::value::Datetime),
        }
        let text = match Repr::deserialize(deserializer)? {
            Repr::Text(s) => s,
            Repr::Toml(d) => d.to_string(),
        };
        Timestamp::parse_rfc3339(&text).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_format() {
        let ts = Timestamp::from_ymd_hms(2021, 7, 1, 0, 0, 0).unwrap();
        assert_eq!(ts.to_string(), "2021-07-01T00:00:00.000Z");
        assert_eq!(Timestamp::parse_rfc3339("2021-07-01T00:00:00.000Z").unwrap(), ts);
    }

    #[test]
    fn offsets_normalize_to_utc() {
        let a = Timestamp::parse_rfc3339("2021-07-01T02:00:00.250+02:00").unwrap();
        assert_eq!(a.to_string(), "2021-07-01T00:00:00.250Z");
    }

    #[test]
    fn rejects_sub_millisecond() {
        assert!(matches!(Timestamp::parse_rfc3339("2021-07-01T00:00:00.0001Z"), Err(TimestampError::TooPrecise(_))));
        assert!(Timestamp::parse_rfc3339("2021-07-01T00:00:00.123000Z").is_ok());
    }

    #[test]
    fn floor_handles_pre_epoch() {
        let ts = Timestamp::from_millis(-1);
        assert_eq!(ts.floor_to(MILLIS_PER_HOUR).as_millis(), -MILLIS_PER_HOUR);
    }
}
