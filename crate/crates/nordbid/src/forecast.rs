//! Weekly revenue forecasting pipeline: rolling-window additive-model fits,
//! one-week-ahead forecasts, MAPE scoring and accuracy bucketing.
//!
//! The model works on log revenues; forecasts are reported both on the log
//! scale and on the level scale (`exp` of the log forecast, no bias
//! correction). Scoring defaults to the level scale.

use std::io::Write;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::market_data::{rolling_windows, LogRevenueEntry, LogRevenueSeries, MarketDataError};
use crate::spline::{
    adjusted_r2, predict, select_lambda_gcv, BasisSpec, Covariate, GamFit, GcvOptions, SplineError,
};

/// Hours per forecast week.
pub const WEEK_HOURS: usize = 168;

/// Minimum admissible training window, one full week.
pub const MIN_TRAIN_HOURS: usize = 168;

/// Default training window, two weeks.
pub const DEFAULT_TRAIN_HOURS: usize = 336;

#[derive(Debug, Error)]
pub enum ForecastError {
    #[error("training window has {len} hours, need at least {min}")]
    WindowTooShort { len: usize, min: usize },
    #[error("actuals ({actuals}) and forecasts ({forecasts}) differ in length")]
    LengthMismatch { actuals: usize, forecasts: usize },
    #[error("actual value at index {index} is zero; percentage error undefined")]
    ZeroActual { index: usize },
    #[error("forecast week has {len} entries, expected {expected}")]
    BadWeekLength { len: usize, expected: usize },
    #[error(transparent)]
    Spline(#[from] SplineError),
    #[error(transparent)]
    MarketData(#[from] MarketDataError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Smoother layout of the weekly revenue model: a daily shape over the hour
/// of day, a weekly shape over the day of week, and their interaction.
pub fn weekly_model_specs() -> Vec<BasisSpec> {
    vec![
        BasisSpec::cubic_regression(Covariate::Hour, 24),
        BasisSpec::p_spline(Covariate::Day, 7),
        BasisSpec::tensor(24, 7),
    ]
}

/// Fits the weekly revenue model on a training window of log-revenue
/// observations, selecting smoothing parameters by GCV.
pub fn fit_weekly_model(
    train: &[LogRevenueEntry],
    opts: &GcvOptions,
) -> Result<GamFit, ForecastError> {
    if train.len() < MIN_TRAIN_HOURS {
        return Err(ForecastError::WindowTooShort {
            len: train.len(),
            min: MIN_TRAIN_HOURS,
        });
    }
    let hours: Vec<f64> = train.iter().map(|e| e.hour_of_day as f64).collect();
    let days: Vec<f64> = train.iter().map(|e| e.day_of_week as f64).collect();
    let y: Vec<f64> = train.iter().map(|e| e.value).collect();
    Ok(select_lambda_gcv(&hours, &days, &y, &weekly_model_specs(), opts)?)
}

/// Log-scale predictions at the calendar covariates of a target week.
///
/// The model depends only on (hour of day, day of week), so any week with the
/// same covariate pattern gets the same forecast.
pub fn forecast_week(fit: &GamFit, week: &[LogRevenueEntry]) -> Result<Vec<f64>, ForecastError> {
    if week.len() != WEEK_HOURS {
        return Err(ForecastError::BadWeekLength {
            len: week.len(),
            expected: WEEK_HOURS,
        });
    }
    let hours: Vec<f64> = week.iter().map(|e| e.hour_of_day as f64).collect();
    let days: Vec<f64> = week.iter().map(|e| e.day_of_week as f64).collect();
    Ok(predict(fit, &hours, &days)?)
}

/// Mean absolute percentage error, (1/H) Σ |A_h − F_h| / |A_h|.
pub fn mape(actuals: &[f64], forecasts: &[f64]) -> Result<f64, ForecastError> {
    if actuals.len() != forecasts.len() {
        return Err(ForecastError::LengthMismatch {
            actuals: actuals.len(),
            forecasts: forecasts.len(),
        });
    }
    let mut sum = 0.0;
    for (i, (&a, &f)) in actuals.iter().zip(forecasts).enumerate() {
        if a == 0.0 {
            return Err(ForecastError::ZeroActual { index: i });
        }
        sum += (a - f).abs() / a.abs();
    }
    Ok(sum / actuals.len() as f64)
}

/// One scored out-of-sample week.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForecastWeek {
    pub zone: String,
    pub market: String,
    /// Zero-based window index within the backtest.
    pub week_index: usize,
    /// Timestamp of the first forecast hour.
    pub week_start: DateTime<Utc>,
    /// Log-scale forecasts, one per hour of the week.
    pub log_forecasts: Vec<f64>,
    /// Level-scale forecasts, exp of the log forecasts.
    pub forecasts: Vec<f64>,
    /// Level-scale actual revenues.
    pub actuals: Vec<f64>,
    /// Log-scale actual revenues (the modeled quantity).
    pub log_actuals: Vec<f64>,
    pub mape: f64,
    /// Adjusted R² of the training fit behind this week.
    pub adjusted_r2: f64,
}

/// Weekly-MAPE histogram over the buckets 0–5%, 5–10%, 10–15% and >15%.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MapeDistribution {
    /// Upper bucket edges as fractions; the last bucket is open-ended.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    pub shares: Vec<f64>,
}

impl MapeDistribution {
    pub fn from_mapes(mapes: &[f64]) -> Self {
        let edges = vec![0.05, 0.10, 0.15];
        let mut counts = vec![0usize; edges.len() + 1];
        for &m in mapes {
            let bucket = edges.iter().position(|&e| m < e).unwrap_or(edges.len());
            counts[bucket] += 1;
        }
        let n = mapes.len();
        let mut shares = vec![0.0; counts.len()];
        if n > 0 {
            for (s, &c) in shares.iter_mut().zip(&counts) {
                *s = c as f64 / n as f64;
            }
            // Division dust could leave the shares summing slightly off one;
            // pin the last share to the exact complement.
            let head: f64 = shares[..shares.len() - 1].iter().sum();
            let last = shares.len() - 1;
            shares[last] = 1.0 - head;
        }
        MapeDistribution {
            edges,
            counts,
            shares,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BacktestOptions {
    /// Training window length in hours.
    pub train_len: usize,
    /// Forecast horizon in hours; windows also advance by this amount.
    pub horizon: usize,
    /// Score MAPE on log revenues instead of level revenues (diagnostics).
    pub log_scale: bool,
    pub gcv: GcvOptions,
}

impl Default for BacktestOptions {
    fn default() -> Self {
        BacktestOptions {
            train_len: DEFAULT_TRAIN_HOURS,
            horizon: WEEK_HOURS,
            log_scale: false,
            gcv: GcvOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BacktestReport {
    pub zone: String,
    pub market: String,
    pub weeks: Vec<ForecastWeek>,
    pub distribution: MapeDistribution,
}

/// Rolling backtest: fit on each training window, forecast the following
/// week, score it, and bucket the weekly MAPEs.
pub fn backtest(
    series: &LogRevenueSeries,
    opts: &BacktestOptions,
) -> Result<BacktestReport, ForecastError> {
    if opts.horizon != WEEK_HOURS {
        return Err(ForecastError::BadWeekLength {
            len: opts.horizon,
            expected: WEEK_HOURS,
        });
    }
    let windows = rolling_windows(series.entries.len(), opts.train_len, opts.horizon)?;
    let mut weeks = Vec::with_capacity(windows.len());
    for (week_index, (train_range, test_range)) in windows.into_iter().enumerate() {
        let train = &series.entries[train_range];
        let test = &series.entries[test_range];
        let fit = fit_weekly_model(train, &opts.gcv)?;
        let log_forecasts = forecast_week(&fit, test)?;
        let log_actuals: Vec<f64> = test.iter().map(|e| e.value).collect();
        let forecasts: Vec<f64> = log_forecasts.iter().map(|&v| v.exp()).collect();
        let actuals: Vec<f64> = log_actuals.iter().map(|&v| v.exp()).collect();
        let score = if opts.log_scale {
            mape(&log_actuals, &log_forecasts)?
        } else {
            mape(&actuals, &forecasts)?
        };
        weeks.push(ForecastWeek {
            zone: series.zone.clone(),
            market: series.market.to_string(),
            week_index,
            week_start: test[0].timestamp,
            log_forecasts,
            forecasts,
            actuals,
            log_actuals,
            mape: score,
            adjusted_r2: adjusted_r2(&fit)?,
        });
    }
    let mapes: Vec<f64> = weeks.iter().map(|w| w.mape).collect();
    Ok(BacktestReport {
        zone: series.zone.clone(),
        market: series.market.to_string(),
        weeks,
        distribution: MapeDistribution::from_mapes(&mapes),
    })
}

/// Plot-ready hourly rows: one line per forecast hour across all weeks.
pub fn write_backtest_csv<W: Write>(report: &BacktestReport, mut out: W) -> std::io::Result<()> {
    writeln!(out, "week_start,hour,actual,forecast,ape")?;
    for week in &report.weeks {
        for h in 0..week.actuals.len() {
            let a = week.actuals[h];
            let f = week.forecasts[h];
            let ape = (a - f).abs() / a.abs();
            writeln!(
                out,
                "{},{},{},{},{}",
                week.week_start.to_rfc3339(),
                h + 1,
                a,
                f,
                ape
            )?;
        }
    }
    Ok(())
}

/// Per-window fit quality and accuracy, without the hourly vectors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BacktestSummary {
    pub zone: String,
    pub market: String,
    pub windows: Vec<WindowSummary>,
    pub distribution: MapeDistribution,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WindowSummary {
    pub week_index: usize,
    pub week_start: DateTime<Utc>,
    pub adjusted_r2: f64,
    pub mape: f64,
}

pub fn summarize(report: &BacktestReport) -> BacktestSummary {
    BacktestSummary {
        zone: report.zone.clone(),
        market: report.market.clone(),
        windows: report
            .weeks
            .iter()
            .map(|w| WindowSummary {
                week_index: w.week_index,
                week_start: w.week_start,
                adjusted_r2: w.adjusted_r2,
                mape: w.mape,
            })
            .collect(),
        distribution: report.distribution.clone(),
    }
}
