//! Droop activation laws and market-energy-block (MEB) construction.
//!
//! A frequency trace plus a (market, size) pair determines how much energy
//! the battery would have to deliver or absorb in every intra-hour step:
//! FCR-N follows a symmetric droop around 50 Hz, FCR-D(up) ramps in below
//! 49.9 Hz, and spot legs deliver their hourly quantity uniformly.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::market_data::FrequencyTrace;
use crate::model::{Market, MarketPowerPair};

#[derive(Debug, Error)]
pub enum DroopError {
    #[error("invalid droop configuration: {0}")]
    InvalidConfig(String),
    #[error("step length {0} min does not divide 60")]
    BadStepLength(u32),
    #[error("trace covers {have} hours but {need} are required")]
    TraceTooShort { have: usize, need: usize },
}

/// Droop-law parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct DroopConfig {
    /// Nominal grid frequency, Hz.
    pub nominal_hz: f64,
    /// FCR-N deadband around nominal, Hz (no response inside).
    pub fcr_n_deadband_hz: f64,
    /// Deviation at which FCR-N response saturates, Hz.
    pub fcr_n_full_activation_hz: f64,
    /// Frequency at which FCR-D upward response begins, Hz.
    pub fcr_d_start_hz: f64,
    /// Frequency at which FCR-D upward response is fully activated, Hz.
    pub fcr_d_full_hz: f64,
}

impl Default for DroopConfig {
    fn default() -> Self {
        Self {
            nominal_hz: 50.0,
            fcr_n_deadband_hz: 0.0,
            fcr_n_full_activation_hz: 0.1,
            fcr_d_start_hz: 49.9,
            fcr_d_full_hz: 49.5,
        }
    }
}

impl DroopConfig {
    pub fn validate(&self) -> Result<(), DroopError> {
        if !(self.fcr_n_deadband_hz >= 0.0
            && self.fcr_n_deadband_hz < self.fcr_n_full_activation_hz)
        {
            return Err(DroopError::InvalidConfig(format!(
                "need 0 <= deadband < full activation, got {} and {}",
                self.fcr_n_deadband_hz, self.fcr_n_full_activation_hz
            )));
        }
        if !(self.fcr_d_start_hz > self.fcr_d_full_hz) {
            return Err(DroopError::InvalidConfig(format!(
                "FCR-D start {} Hz must be above full-activation {} Hz",
                self.fcr_d_start_hz, self.fcr_d_full_hz
            )));
        }
        Ok(())
    }
}

/// FCR-N activation fraction in [-1, 1] for one frequency sample.
///
/// Positive means discharge (under-frequency support), negative means
/// charge. Zero inside the deadband, linear in the deviation beyond it,
/// saturating at +/-1 at the full-activation deviation.
pub fn fcr_n_activation(f_hz: f64, cfg: &DroopConfig) -> f64 {
    let dev = cfg.nominal_hz - f_hz;
    let mag = dev.abs();
    if mag <= cfg.fcr_n_deadband_hz {
        return 0.0;
    }
    let span = cfg.fcr_n_full_activation_hz - cfg.fcr_n_deadband_hz;
    let frac = ((mag - cfg.fcr_n_deadband_hz) / span).min(1.0);
    frac * dev.signum()
}

/// FCR-D upward activation fraction in [0, 1] for one frequency sample:
/// zero at or above the start frequency, one at or below full activation,
/// linear in between.
pub fn fcr_d_activation(f_hz: f64, cfg: &DroopConfig) -> f64 {
    if f_hz >= cfg.fcr_d_start_hz {
        0.0
    } else if f_hz <= cfg.fcr_d_full_hz {
        1.0
    } else {
        (cfg.fcr_d_start_hz - f_hz) / (cfg.fcr_d_start_hz - cfg.fcr_d_full_hz)
    }
}

/// Energy a pair would move in one intra-hour step, MWh.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MebEntry {
    pub e_dch: f64,
    pub e_ch: f64,
}

/// Per-pair, per-step charge/discharge energy blocks for one frequency
/// trace. Indexing is `entries[pair_index][step]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MebTable {
    pub pairs: Vec<MarketPowerPair>,
    pub step_minutes: u32,
    pub hours: usize,
    pub entries: Vec<Vec<MebEntry>>,
}

impl MebTable {
    pub fn steps_per_hour(&self) -> usize {
        (60 / self.step_minutes) as usize
    }

    pub fn total_steps(&self) -> usize {
        self.steps_per_hour() * self.hours
    }

    pub fn entry(&self, pair: usize, step: usize) -> MebEntry {
        self.entries[pair][step]
    }

    /// Writes the table as audit CSV with one row per (step, pair).
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "step,market,power,e_dch_mwh,e_ch_mwh")?;
        for t in 0..self.total_steps() {
            for (j, pair) in self.pairs.iter().enumerate() {
                let e = self.entries[j][t];
                writeln!(
                    out,
                    "{t},{},{},{},{}",
                    pair.market.label(),
                    pair.power,
                    e.e_dch,
                    e.e_ch
                )?;
            }
        }
        Ok(())
    }
}

/// Builds the MEB table for a trace and pair list.
///
/// Frequency pairs integrate the per-minute droop response over each step;
/// spot pairs spread the hourly quantity uniformly over the hour's steps.
/// `step_minutes` must divide 60 and the trace must cover `hours`.
pub fn build_meb(
    trace: &FrequencyTrace,
    pairs: &[MarketPowerPair],
    step_minutes: u32,
    hours: usize,
    cfg: &DroopConfig,
) -> Result<MebTable, DroopError> {
    cfg.validate()?;
    if step_minutes == 0 || 60 % step_minutes != 0 {
        return Err(DroopError::BadStepLength(step_minutes));
    }
    if trace.hours() < hours {
        return Err(DroopError::TraceTooShort {
            have: trace.hours(),
            need: hours,
        });
    }
    let steps_per_hour = (60 / step_minutes) as usize;
    let total_steps = steps_per_hour * hours;
    let minutes_per_step = step_minutes as usize;

    let mut entries = Vec::with_capacity(pairs.len());
    for pair in pairs {
        let mut col = Vec::with_capacity(total_steps);
        for t in 0..total_steps {
            let first_minute = t * minutes_per_step;
            let window = &trace.values[first_minute..first_minute + minutes_per_step];
            let e = match pair.market {
                Market::N => {
                    let (mut dch, mut ch) = (0.0, 0.0);
                    for &f in window {
                        let a = fcr_n_activation(f, cfg);
                        dch += a.max(0.0) * pair.power / 60.0;
                        ch += (-a).max(0.0) * pair.power / 60.0;
                    }
                    MebEntry { e_dch: dch, e_ch: ch }
                }
                Market::D => {
                    let mut dch = 0.0;
                    for &f in window {
                        dch += fcr_d_activation(f, cfg) * pair.power / 60.0;
                    }
                    MebEntry { e_dch: dch, e_ch: 0.0 }
                }
                Market::SpotDischarge => MebEntry {
                    e_dch: pair.power / steps_per_hour as f64,
                    e_ch: 0.0,
                },
                Market::SpotCharge => MebEntry {
                    e_dch: 0.0,
                    e_ch: pair.power / steps_per_hour as f64,
                },
            };
            col.push(e);
        }
        entries.push(col);
    }
    Ok(MebTable {
        pairs: pairs.to_vec(),
        step_minutes,
        hours,
        entries,
    })
}
