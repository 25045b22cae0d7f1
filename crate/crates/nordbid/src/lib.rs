//! Weekly spot / FCR-N revenue forecasting and multi-market BESS bid
//! optimization for Nordic power markets.
//!
//! The library has two halves. The forecasting half ingests hourly price and
//! volume series, fits penalized-spline additive models on rolling two-week
//! windows and scores one-week-ahead forecasts with MAPE. The scheduling half
//! converts minute-resolution frequency traces into droop-derived market
//! energy blocks, encodes a scenario-based mixed-integer program over FCR-N,
//! FCR-D and spot charge/discharge bids, and solves it with an embedded
//! simplex / branch-and-bound engine.

pub mod config;
pub mod droop;
pub mod experiment;
pub mod forecast;
pub mod market_data;
pub mod milp;
pub mod model;
pub mod spline;
