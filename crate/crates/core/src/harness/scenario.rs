use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::baseline::BaselineParameters;
use crate::error::{Error, Result};
use crate::physics::SystemConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioId {
    Fig2Detuning,
    Fig3Multifreq,
    Fig4Temperature,
    Fig5DetuningCoefficient,
    Custom,
}

impl ScenarioId {
    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioId::Fig2Detuning => "fig2_detuning",
            ScenarioId::Fig3Multifreq => "fig3_multifreq",
            ScenarioId::Fig4Temperature => "fig4_temperature",
            ScenarioId::Fig5DetuningCoefficient => "fig5_detuning_coefficient",
            ScenarioId::Custom => "custom",
        }
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [
            ScenarioId::Fig2Detuning,
            ScenarioId::Fig3Multifreq,
            ScenarioId::Fig4Temperature,
            ScenarioId::Fig5DetuningCoefficient,
            ScenarioId::Custom,
        ]
        .into_iter()
        .find(|id| id.as_str() == s)
        .ok_or_else(|| Error::InvalidInput(format!("unknown scenario `{s}`")))
    }
}

/// What the sweep axis changes in the base configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisKind {
    /// Every cavity gets `sign * x * omega_m`.
    UniformDetuning,
    /// Bath temperature in K.
    Temperature,
    /// Pair `k` (0-based) gets `sign * (k + 1) * x * omega_m`.
    DetuningCoefficient,
}

impl FromStr for AxisKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "detuning" => Ok(AxisKind::UniformDetuning),
            "temperature" => Ok(AxisKind::Temperature),
            "dc" | "detuning_coefficient" => Ok(AxisKind::DetuningCoefficient),
            other => Err(Error::InvalidInput(format!("unknown axis `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Logarithmic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Axis {
    pub kind: AxisKind,
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl Axis {
    pub fn detuning(min: f64, max: f64, points: usize) -> Self {
        Self {
            kind: AxisKind::UniformDetuning,
            name: "delta_w/omega_m".into(),
            min,
            max,
            points,
            spacing: Spacing::Linear,
        }
    }

    pub fn temperature(min: f64, max: f64, points: usize) -> Self {
        Self {
            kind: AxisKind::Temperature,
            name: "temperature_K".into(),
            min,
            max,
            points,
            spacing: Spacing::Logarithmic,
        }
    }

    pub fn detuning_coefficient(min: f64, max: f64, points: usize) -> Self {
        Self {
            kind: AxisKind::DetuningCoefficient,
            name: "dc".into(),
            min,
            max,
            points,
            spacing: Spacing::Linear,
        }
    }

    pub fn of_kind(kind: AxisKind, min: f64, max: f64, points: usize) -> Self {
        match kind {
            AxisKind::UniformDetuning => Self::detuning(min, max, points),
            AxisKind::Temperature => Self::temperature(min, max, points),
            AxisKind::DetuningCoefficient => Self::detuning_coefficient(min, max, points),
        }
    }

    /// Grid points. Linear grids are computed as a weighted mean of the
    /// endpoints so that a grid symmetric about zero is exactly symmetric.
    pub fn values(&self) -> Vec<f64> {
        let k = self.points;
        if k == 1 {
            return vec![self.min];
        }
        let last = (k - 1) as f64;
        (0..k)
            .map(|i| {
                let (lo, hi) = ((k - 1 - i) as f64, i as f64);
                match self.spacing {
                    Spacing::Linear => (self.min * lo + self.max * hi) / last,
                    Spacing::Logarithmic => ((self.min.ln() * lo + self.max.ln() * hi) / last).exp(),
                }
            })
            .collect()
    }
}

/// A pair of microwave cavities (0-based) to report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Observable {
    pub a: usize,
    pub b: usize,
    pub label: String,
}

impl Observable {
    pub fn new(a: usize, b: usize, label: impl Into<String>) -> Self {
        Self {
            a,
            b,
            label: label.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub id: ScenarioId,
    pub base_config: SystemConfig,
    pub axis: Axis,
    pub observables: Vec<Observable>,
}

/// Default grid size for every sweep.
pub const DEFAULT_POINTS: usize = 101;

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        let a = &self.axis;
        if !(a.min.is_finite() && a.max.is_finite()) || a.points < 2 {
            return Err(Error::InvalidInput(format!(
                "axis `{}` needs finite bounds and at least 2 points",
                a.name
            )));
        }
        if a.spacing == Spacing::Logarithmic && !(a.min > 0.0 && a.max > 0.0) {
            return Err(Error::InvalidInput(
                "logarithmic axis bounds must be positive".into(),
            ));
        }
        let n = self.base_config.n_microwaves();
        for o in &self.observables {
            if o.a >= n || o.b >= n || o.a == o.b {
                return Err(Error::InvalidInput(format!(
                    "observable `{}` does not index two distinct cavities out of {n}",
                    o.label
                )));
            }
            if o.label.contains(',') || o.label.contains('"') {
                return Err(Error::InvalidInput(format!(
                    "observable label `{}` may not contain commas or quotes",
                    o.label
                )));
            }
        }
        Ok(())
    }

    /// Base configuration with the axis value applied.
    pub fn materialize(&self, x: f64) -> SystemConfig {
        let mut cfg = self.base_config.clone();
        let wm = cfg.mech.omega_m;
        match self.axis.kind {
            AxisKind::UniformDetuning => {
                for w in &mut cfg.microwaves {
                    w.delta_w = w.sign.value() * x * wm;
                }
            }
            AxisKind::Temperature => cfg.mech.temperature = x,
            AxisKind::DetuningCoefficient => {
                for (j, w) in cfg.microwaves.iter_mut().enumerate() {
                    let pair = (j / 2) as f64 + 1.0;
                    w.delta_w = w.sign.value() * pair * x * wm;
                }
            }
        }
        cfg
    }

    pub fn with_points(mut self, points: usize) -> Self {
        self.axis.points = points;
        self
    }
}

fn cavity_label(config: &SystemConfig, j: usize) -> String {
    let w = &config.microwaves[j];
    format!("w{}{}", w.pair_id, w.sign.symbol())
}

fn ghz_label(nu_ghz: f64, sign: char) -> String {
    format!("{nu_ghz}{sign}")
}

fn pair_label(a: &str, b: &str) -> String {
    format!("{a}:{b}")
}

/// Identical 9 GHz pairs swept over the uniform detuning.
pub fn scenario_fig2(pair_count: usize) -> Result<Scenario> {
    if pair_count < 1 {
        return Err(Error::InvalidInput("pair_count must be >= 1".into()));
    }
    let base = BaselineParameters::default().identical_pairs(pair_count, 0.0);
    let mut observables = vec![Observable::new(
        0,
        1,
        pair_label(&cavity_label(&base, 0), &cavity_label(&base, 1)),
    )];
    if pair_count >= 2 {
        observables.push(Observable::new(
            0,
            2,
            pair_label(&cavity_label(&base, 0), &cavity_label(&base, 2)),
        ));
    }
    Ok(Scenario {
        id: ScenarioId::Fig2Detuning,
        base_config: base,
        axis: Axis::detuning(-1.0, 1.0, DEFAULT_POINTS),
        observables,
    })
}

pub const FIG3_FREQUENCIES_GHZ: [f64; 3] = [9.0, 37.5, 60.0];

fn fig3_config(delta_w_over_wm: f64) -> SystemConfig {
    let hz: Vec<f64> = FIG3_FREQUENCIES_GHZ.iter().map(|g| g * 1e9).collect();
    BaselineParameters::default().config(&hz, delta_w_over_wm)
}

fn fig3_label(j: usize) -> String {
    let sign = if j.is_multiple_of(2) { '+' } else { '-' };
    ghz_label(FIG3_FREQUENCIES_GHZ[j / 2], sign)
}

fn fig3_within_pairs() -> Vec<Observable> {
    (0..3)
        .map(|k| Observable::new(2 * k, 2 * k + 1, pair_label(&fig3_label(2 * k), &fig3_label(2 * k + 1))))
        .collect()
}

/// Three pairs at 9, 37.5 and 60 GHz swept over the uniform detuning.
pub fn scenario_fig3() -> Scenario {
    let mut observables = fig3_within_pairs();
    for (a, b) in [(0, 3), (1, 2), (2, 5), (3, 4), (0, 5), (1, 4), (0, 2)] {
        observables.push(Observable::new(a, b, pair_label(&fig3_label(a), &fig3_label(b))));
    }
    Scenario {
        id: ScenarioId::Fig3Multifreq,
        base_config: fig3_config(0.0),
        axis: Axis::detuning(-1.0, 1.0, DEFAULT_POINTS),
        observables,
    }
}

/// Which network the temperature sweep runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fig4Model {
    /// Identical 9 GHz pairs.
    IdenticalPairs(usize),
    /// The 9 / 37.5 / 60 GHz three-pair network.
    MultiFrequency,
}

pub const FIG4_DETUNING: f64 = -0.1;
pub const FIG4_T_MIN: f64 = 1e-3;
pub const FIG4_T_MAX: f64 = 0.25;

/// Temperature sweep at `Delta_w = -0.1 omega_m`, 1 mK to 250 mK.
pub fn scenario_fig4(model: Fig4Model) -> Result<Scenario> {
    let (base, observables) = match model {
        Fig4Model::IdenticalPairs(pairs) => {
            if pairs < 1 {
                return Err(Error::InvalidInput("pair count must be >= 1".into()));
            }
            let base = BaselineParameters::default().identical_pairs(pairs, FIG4_DETUNING);
            let obs = vec![Observable::new(
                0,
                1,
                pair_label(&cavity_label(&base, 0), &cavity_label(&base, 1)),
            )];
            (base, obs)
        }
        Fig4Model::MultiFrequency => (fig3_config(FIG4_DETUNING), fig3_within_pairs()),
    };
    Ok(Scenario {
        id: ScenarioId::Fig4Temperature,
        base_config: base,
        axis: Axis::temperature(FIG4_T_MIN, FIG4_T_MAX, DEFAULT_POINTS),
        observables,
    })
}

/// Two identical pairs; the second pair is detuned twice as far as the first.
pub fn scenario_fig5() -> Scenario {
    let base = BaselineParameters::default().identical_pairs(2, 0.0);
    let label = |j| cavity_label(&base, j);
    let observables = vec![
        Observable::new(0, 1, pair_label(&label(0), &label(1))),
        Observable::new(0, 2, pair_label(&label(0), &label(2))),
        Observable::new(0, 3, pair_label(&label(0), &label(3))),
    ];
    Scenario {
        id: ScenarioId::Fig5DetuningCoefficient,
        base_config: base,
        axis: Axis::detuning_coefficient(-1.0, 1.0, DEFAULT_POINTS),
        observables,
    }
}

/// User-supplied network; reports every within-pair entanglement.
pub fn scenario_custom(config: SystemConfig, axis: Axis) -> Scenario {
    let observables = (0..config.n_microwaves() / 2)
        .map(|k| {
            Observable::new(
                2 * k,
                2 * k + 1,
                pair_label(&cavity_label(&config, 2 * k), &cavity_label(&config, 2 * k + 1)),
            )
        })
        .collect();
    Scenario {
        id: ScenarioId::Custom,
        base_config: config,
        axis,
        observables,
    }
}
