// SPDX-License-Identifier: Apache-2.0

//! Data-center fleet fault models.
//!
//! Each chip slot draws faults from its own stream, seeded by the scenario
//! seed and the chip id, so single-fault (SFA) and variable-fault (VFA)
//! fleets run on identical randomness.

mod analytic;
mod sim;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use analytic::{binomial_tail, expected_replacements};
pub use sim::{run_seeds, simulate, simulate_fixed_throughput, simulate_fixed_time};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AcceleratorKind {
    /// Dies on its first fault.
    Sfa,
    /// Degrades per fault and dies at `max_faults`.
    Vfa,
}

impl fmt::Display for AcceleratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AcceleratorKind::Sfa => "sfa",
            AcceleratorKind::Vfa => "vfa",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// Fixed chip count; count replacements.
    FixedTime,
    /// Keep aggregate capacity at `target` chip-equivalents; count purchases.
    FixedThroughput { target: f64 },
}

impl Regime {
    pub fn name(&self) -> &'static str {
        match self {
            Regime::FixedTime => "fixed-time",
            Regime::FixedThroughput { .. } => "fixed-throughput",
        }
    }
}

/// Default VFA schedule: full speed, then half, then a third.
pub const DEFAULT_VFA_DEGRADATION: [f64; 3] = [1.0, 0.5, 1.0 / 3.0];

#[derive(Clone, Debug, Error, PartialEq)]
pub enum FleetError {
    #[error("fault probability {0} is not in [0, 1]")]
    BadProbability(f64),
    #[error("degradation schedule must start at 1.0 and be non-increasing within (0, 1]")]
    BadDegradation,
    #[error("throughput target {0} must be positive")]
    BadTarget(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DcScenario {
    pub chips: u64,
    pub ticks: u64,
    pub fault_prob: f64,
    pub kind: AcceleratorKind,
    /// Throughput multiplier by accumulated fault count; its length is the
    /// number of faults that kills a chip. An SFA uses `[1.0]`.
    pub degradation: Vec<f64>,
    pub regime: Regime,
    pub seed: u64,
}

impl DcScenario {
    pub fn sfa(chips: u64, ticks: u64, fault_prob: f64, seed: u64) -> Result<Self, FleetError> {
        Self::new(chips, ticks, fault_prob, AcceleratorKind::Sfa, vec![1.0], seed)
    }

    pub fn vfa(chips: u64, ticks: u64, fault_prob: f64, degradation: Vec<f64>, seed: u64) -> Result<Self, FleetError> {
        Self::new(chips, ticks, fault_prob, AcceleratorKind::Vfa, degradation, seed)
    }

    /// A fixed-time scenario. SFA kinds ignore `degradation`.
    pub fn new(
        chips: u64,
        ticks: u64,
        fault_prob: f64,
        kind: AcceleratorKind,
        degradation: Vec<f64>,
        seed: u64,
    ) -> Result<Self, FleetError> {
        if !(0.0..=1.0).contains(&fault_prob) {
            return Err(FleetError::BadProbability(fault_prob));
        }
        let degradation = match kind {
            AcceleratorKind::Sfa => vec![1.0],
            AcceleratorKind::Vfa => degradation,
        };
        let ok = degradation.first() == Some(&1.0)
            && degradation.iter().all(|&d| d > 0.0 && d <= 1.0)
            && degradation.windows(2).all(|w| w[1] <= w[0]);
        if !ok {
            return Err(FleetError::BadDegradation);
        }
        Ok(DcScenario { chips, ticks, fault_prob, kind, degradation, regime: Regime::FixedTime, seed })
    }

    /// Switches to the fixed-throughput regime.
    pub fn fixed_throughput(mut self, target: f64) -> Result<Self, FleetError> {
        if target.is_nan() || target <= 0.0 {
            return Err(FleetError::BadTarget(target));
        }
        self.regime = Regime::FixedThroughput { target };
        Ok(self)
    }

    pub fn max_faults(&self) -> usize {
        self.degradation.len()
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        DcScenario { seed, ..self.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FleetResult {
    /// Replacements (fixed time) or purchases (fixed throughput).
    pub replacements_or_purchases: u64,
    /// Sum over ticks of fleet capacity, in chip-ticks.
    pub aggregate_throughput: f64,
    /// Fault events observed.
    pub faults: u64,
}
