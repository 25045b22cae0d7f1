//! Ingestion and validation of hourly market series and minute-resolution
//! frequency traces, plus the log-revenue transform feeding the additive
//! models.

use std::io::Write;
use std::ops::Range;
use std::path::Path;

use chrono::{DateTime, Datelike, Duration, Timelike, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default training window: two weeks of hourly data.
pub const DEFAULT_TRAIN_LEN: usize = 336;
/// Default forecast horizon: one week of hourly data.
pub const DEFAULT_HORIZON: usize = 168;

#[derive(Debug, Error)]
pub enum MarketDataError {
    #[error("io error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error in {path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
    #[error("column '{0}' not found in header")]
    MissingColumn(String),
    #[error("duplicate timestamp {timestamp} at row {row}")]
    DuplicateTimestamp { timestamp: DateTime<Utc>, row: usize },
    #[error("timestamps not increasing at row {row}")]
    NonMonotonicTimestamp { row: usize },
    #[error("frequency sample {value} Hz out of [49, 51] at index {index}")]
    FrequencyOutOfRange { value: f64, index: usize },
    #[error("gap in minute cadence at index {index}")]
    FrequencyGap { index: usize },
    #[error("frequency trace length {0} is not a whole number of hours")]
    PartialHour(usize),
    #[error("empty input: {0}")]
    Empty(String),
    #[error("series of {len} hours too short for train={train_len} + horizon={horizon}")]
    SeriesTooShort {
        len: usize,
        train_len: usize,
        horizon: usize,
    },
}

/// Which hourly market a series belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SeriesMarket {
    Spot,
    FcrN,
}

impl std::fmt::Display for SeriesMarket {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SeriesMarket::Spot => write!(f, "spot"),
            SeriesMarket::FcrN => write!(f, "fcr-n"),
        }
    }
}

/// One hourly observation: price and procured/consumed volume.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HourlyRecord {
    /// UTC start of the hour.
    pub timestamp: DateTime<Utc>,
    pub price: f64,
    pub volume: f64,
}

/// Validated hourly series for one zone and market.
///
/// Timestamps are strictly increasing. Gaps are recorded in `gaps` (index of
/// the record after which at least one hour is missing) and never filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HourlySeries {
    pub zone: String,
    pub market: SeriesMarket,
    pub records: Vec<HourlyRecord>,
    pub gaps: Vec<usize>,
}

/// One row that failed validation, with its 1-based line number.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Rejection {
    pub line: usize,
    pub reason: String,
}

/// Collected per-row rejections from an ingestion or transform pass.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RejectionReport {
    pub rejections: Vec<Rejection>,
}

impl RejectionReport {
    pub fn is_empty(&self) -> bool {
        self.rejections.is_empty()
    }

    pub fn len(&self) -> usize {
        self.rejections.len()
    }

    /// Writes the report as JSON lines, one object per rejected row.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for r in &self.rejections {
            let line = serde_json::to_string(r).expect("rejection serializes");
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

/// Column mapping for hourly CSV files. Public data sources name columns
/// differently, so nothing is hard-coded.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CsvSchema {
    pub timestamp: String,
    pub price: String,
    pub volume: String,
}

/// Minute-resolution grid frequency trace covering whole hours.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyTrace {
    /// UTC start of the first minute.
    pub start: DateTime<Utc>,
    /// One sample per minute, Hz.
    pub values: Vec<f64>,
}

impl FrequencyTrace {
    /// Builds a trace from raw samples, enforcing the sanity bound and the
    /// whole-hour requirement.
    pub fn new(start: DateTime<Utc>, values: Vec<f64>) -> Result<Self, MarketDataError> {
        if values.is_empty() {
            return Err(MarketDataError::Empty("frequency trace".into()));
        }
        if values.len() % 60 != 0 {
            return Err(MarketDataError::PartialHour(values.len()));
        }
        for (i, &v) in values.iter().enumerate() {
            if !(49.0..=51.0).contains(&v) || !v.is_finite() {
                return Err(MarketDataError::FrequencyOutOfRange { value: v, index: i });
            }
        }
        Ok(FrequencyTrace { start, values })
    }

    pub fn hours(&self) -> usize {
        self.values.len() / 60
    }
}

/// One log-revenue observation with its calendar covariates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogRevenueEntry {
    pub timestamp: DateTime<Utc>,
    /// Zone-local hour of day, 0-23.
    pub hour_of_day: u8,
    /// Zone-local day of week, 0 = Monday .. 6 = Sunday.
    pub day_of_week: u8,
    /// Natural log of price * volume.
    pub value: f64,
}

/// Log-revenue series for one zone and market.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRevenueSeries {
    pub zone: String,
    pub market: SeriesMarket,
    pub entries: Vec<LogRevenueEntry>,
}

/// Loads an hourly CSV with a header row and RFC 3339 timestamps.
///
/// Rows with malformed timestamps or non-numeric price/volume are rejected
/// individually and reported with their line number; duplicate or
/// out-of-order timestamps are hard errors. Gaps between consecutive hours
/// are flagged on the returned series.
pub fn load_hourly_csv(
    path: &Path,
    schema: &CsvSchema,
    zone: &str,
    market: SeriesMarket,
) -> Result<(HourlySeries, RejectionReport), MarketDataError> {
    let path_str = path.display().to_string();
    let mut reader = csv::Reader::from_path(path).map_err(|e| MarketDataError::Csv {
        path: path_str.clone(),
        source: e,
    })?;
    let headers = reader
        .headers()
        .map_err(|e| MarketDataError::Csv {
            path: path_str.clone(),
            source: e,
        })?
        .clone();
    let col = |name: &str| -> Result<usize, MarketDataError> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| MarketDataError::MissingColumn(name.to_string()))
    };
    let ts_col = col(&schema.timestamp)?;
    let price_col = col(&schema.price)?;
    let volume_col = col(&schema.volume)?;

    let mut records: Vec<HourlyRecord> = Vec::new();
    let mut gaps: Vec<usize> = Vec::new();
    let mut report = RejectionReport::default();
    for (i, row) in reader.records().enumerate() {
        let line = i + 2; // 1-based, after the header
        let row = row.map_err(|e| MarketDataError::Csv {
            path: path_str.clone(),
            source: e,
        })?;
        let ts = match row
            .get(ts_col)
            .and_then(|s| DateTime::parse_from_rfc3339(s.trim()).ok())
        {
            Some(t) => t.with_timezone(&Utc),
            None => {
                report.rejections.push(Rejection {
                    line,
                    reason: format!("malformed timestamp '{}'", row.get(ts_col).unwrap_or("")),
                });
                continue;
            }
        };
        let parse_num = |idx: usize, what: &str| -> Result<f64, Rejection> {
            row.get(idx)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .filter(|v| v.is_finite())
                .ok_or_else(|| Rejection {
                    line,
                    reason: format!("non-numeric {what} '{}'", row.get(idx).unwrap_or("")),
                })
        };
        let price = match parse_num(price_col, "price") {
            Ok(v) => v,
            Err(r) => {
                report.rejections.push(r);
                continue;
            }
        };
        let volume = match parse_num(volume_col, "volume") {
            Ok(v) => v,
            Err(r) => {
                report.rejections.push(r);
                continue;
            }
        };
        if let Some(last) = records.last() {
            if ts == last.timestamp {
                return Err(MarketDataError::DuplicateTimestamp { timestamp: ts, row: line });
            }
            if ts < last.timestamp {
                return Err(MarketDataError::NonMonotonicTimestamp { row: line });
            }
            if ts > last.timestamp + Duration::hours(1) {
                gaps.push(records.len() - 1);
            }
        }
        records.push(HourlyRecord {
            timestamp: ts,
            price,
            volume,
        });
    }
    if records.is_empty() {
        return Err(MarketDataError::Empty(path_str));
    }
    Ok((
        HourlySeries {
            zone: zone.to_string(),
            market,
            records,
            gaps,
        },
        report,
    ))
}

/// Transforms an hourly series into log revenues, `ln(price * volume)`.
///
/// Records whose price-volume product is not strictly positive cannot enter
/// the log and are excluded; the rejection report counts them. `zone_offset`
/// is the fixed UTC offset (hours) used to derive local hour-of-day and
/// day-of-week.
pub fn to_log_revenue(
    series: &HourlySeries,
    zone_offset_hours: i32,
) -> (LogRevenueSeries, RejectionReport) {
    let mut entries = Vec::with_capacity(series.records.len());
    let mut report = RejectionReport::default();
    for (i, rec) in series.records.iter().enumerate() {
        let product = rec.price * rec.volume;
        if !(rec.price > 0.0 && rec.volume > 0.0) || !product.is_finite() {
            report.rejections.push(Rejection {
                line: i + 1,
                reason: format!(
                    "nonpositive price*volume ({} * {}) excluded from log-revenue",
                    rec.price, rec.volume
                ),
            });
            continue;
        }
        let local = rec.timestamp + Duration::hours(zone_offset_hours as i64);
        entries.push(LogRevenueEntry {
            timestamp: rec.timestamp,
            hour_of_day: local.hour() as u8,
            day_of_week: local.weekday().num_days_from_monday() as u8,
            value: product.ln(),
        });
    }
    (
        LogRevenueSeries {
            zone: series.zone.clone(),
            market: series.market,
            entries,
        },
        report,
    )
}

/// Loads a two-column (timestamp, hz) minute-cadence frequency CSV.
pub fn load_frequency_csv(path: &Path) -> Result<FrequencyTrace, MarketDataError> {
    let path_str = path.display().to_string();
    let mut reader = csv::Reader::from_path(path).map_err(|e| MarketDataError::Csv {
        path: path_str.clone(),
        source: e,
    })?;
    let mut start: Option<DateTime<Utc>> = None;
    let mut prev: Option<DateTime<Utc>> = None;
    let mut values = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| MarketDataError::Csv {
            path: path_str.clone(),
            source: e,
        })?;
        let ts = row
            .get(0)
            .and_then(|s| DateTime::parse_from_rfc3339(s.trim()).ok())
            .map(|t| t.with_timezone(&Utc))
            .ok_or(MarketDataError::FrequencyGap { index: i })?;
        let hz = row
            .get(1)
            .and_then(|s| s.trim().parse::<f64>().ok())
            .ok_or(MarketDataError::FrequencyOutOfRange {
                value: f64::NAN,
                index: i,
            })?;
        if let Some(p) = prev {
            if ts != p + Duration::minutes(1) {
                return Err(MarketDataError::FrequencyGap { index: i });
            }
        } else {
            start = Some(ts);
        }
        prev = Some(ts);
        values.push(hz);
    }
    let start = start.ok_or_else(|| MarketDataError::Empty(path_str))?;
    FrequencyTrace::new(start, values)
}

/// Rolling (train, test) index windows over a series of `len` hours.
///
/// Windows advance by `horizon` hours, so consecutive test segments tile the
/// tail of the series without overlap.
pub fn rolling_windows(
    len: usize,
    train_len: usize,
    horizon: usize,
) -> Result<Vec<(Range<usize>, Range<usize>)>, MarketDataError> {
    if len < train_len + horizon {
        return Err(MarketDataError::SeriesTooShort {
            len,
            train_len,
            horizon,
        });
    }
    let mut windows = Vec::new();
    let mut start = 0usize;
    while start + train_len + horizon <= len {
        windows.push((
            start..start + train_len,
            start + train_len..start + train_len + horizon,
        ));
        start += horizon;
    }
    Ok(windows)
}
