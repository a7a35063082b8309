//! JSON configuration files. Every field is optional and falls back to the
//! baseline parameter set. Quantities are either bare SI numbers (angular
//! rates in rad/s) or strings carrying a unit, e.g. `"9 GHz"`, `"30 mW"`,
//! `"0.02 wm"` (multiples of the mechanical angular frequency).

use std::path::Path;

use serde::Deserialize;

use super::baseline::BaselineParameters;
use crate::constants::TWO_PI;
use crate::error::{Error, Result};
use crate::physics::{MicrowaveCavityParams, Sign, SystemConfig};

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Quantity {
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    /// Converted to an angular frequency.
    Frequency,
    /// Like `Frequency`, and also accepts multiples of `omega_m`.
    Rate,
    Power,
    Length,
    Mass,
    Temperature,
    Dimensionless,
}

fn unit_factor(dim: Dimension, unit: &str, omega_m: Option<f64>) -> Option<f64> {
    use Dimension::*;
    let f = match (dim, unit) {
        (Frequency | Rate, "rad/s") => 1.0,
        (Frequency | Rate, "Hz") => TWO_PI,
        (Frequency | Rate, "kHz") => TWO_PI * 1e3,
        (Frequency | Rate, "MHz") => TWO_PI * 1e6,
        (Frequency | Rate, "GHz") => TWO_PI * 1e9,
        (Frequency | Rate, "THz") => TWO_PI * 1e12,
        (Rate, "wm") => omega_m?,
        (Power, "W") => 1.0,
        (Power, "mW") => 1e-3,
        (Power, "uW" | "µW") => 1e-6,
        (Power, "nW") => 1e-9,
        (Length, "m") => 1.0,
        (Length, "mm") => 1e-3,
        (Length, "um" | "µm") => 1e-6,
        (Length, "nm") => 1e-9,
        (Length, "pm") => 1e-12,
        (Mass, "kg") => 1.0,
        (Mass, "g") => 1e-3,
        (Mass, "mg") => 1e-6,
        (Mass, "ug" | "µg") => 1e-9,
        (Mass, "ng") => 1e-12,
        (Mass, "pg") => 1e-15,
        (Temperature, "K") => 1.0,
        (Temperature, "mK") => 1e-3,
        (Temperature, "uK" | "µK") => 1e-6,
        _ => return None,
    };
    Some(f)
}

/// Parses `"<number> <unit>"` (space optional) into SI.
pub fn parse_quantity(text: &str, dim: Dimension, omega_m: Option<f64>) -> std::result::Result<f64, String> {
    let text = text.trim();
    // The longest numeric prefix, so exponents like `1e-3` stay with the number.
    let (value, unit) = text
        .char_indices()
        .map(|(i, _)| i)
        .chain([text.len()])
        .rev()
        .find_map(|i| {
            let (num, unit) = text.split_at(i);
            num.trim().parse::<f64>().ok().map(|v| (v, unit))
        })
        .ok_or_else(|| format!("`{text}` does not start with a number"))?;
    let unit = unit.trim();
    if unit.is_empty() {
        return Ok(value);
    }
    if dim == Dimension::Dimensionless {
        return Err(format!("`{text}` must be dimensionless"));
    }
    let factor = unit_factor(dim, unit, omega_m)
        .ok_or_else(|| format!("unit `{unit}` is not valid for a {dim:?} quantity"))?;
    Ok(value * factor)
}

impl Quantity {
    fn resolve(&self, field: &str, dim: Dimension, omega_m: Option<f64>) -> std::result::Result<f64, String> {
        let v = match self {
            Quantity::Number(x) => *x,
            Quantity::Text(s) => parse_quantity(s, dim, omega_m).map_err(|m| format!("{field}: {m}"))?,
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("{field}: value is not finite"))
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MechanicalSection {
    pub frequency: Option<Quantity>,
    pub quality_factor: Option<Quantity>,
    pub mass: Option<Quantity>,
    pub temperature: Option<Quantity>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpticalSection {
    pub wavelength: Option<Quantity>,
    pub kappa: Option<Quantity>,
    pub power: Option<Quantity>,
    pub length: Option<Quantity>,
    pub detuning: Option<Quantity>,
}

/// Shared defaults for microwave cavities.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MicrowaveDefaults {
    pub frequency: Option<Quantity>,
    pub kappa: Option<Quantity>,
    pub power: Option<Quantity>,
    pub gap: Option<Quantity>,
    pub mu: Option<Quantity>,
}

/// Shorthand for one pair: both cavities share a frequency, the `+` cavity
/// gets `detuning` and the `-` cavity its negative.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairEntry {
    pub frequency: Option<Quantity>,
    pub detuning: Option<Quantity>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavityEntry {
    pub pair_id: u32,
    pub sign: Sign,
    pub frequency: Option<Quantity>,
    pub kappa: Option<Quantity>,
    pub power: Option<Quantity>,
    pub gap: Option<Quantity>,
    pub mu: Option<Quantity>,
    pub detuning: Option<Quantity>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub mechanical: MechanicalSection,
    #[serde(default)]
    pub optical: OpticalSection,
    #[serde(default)]
    pub microwave: MicrowaveDefaults,
    pub pairs: Option<Vec<PairEntry>>,
    pub microwaves: Option<Vec<CavityEntry>>,
}

fn set(slot: &mut f64, q: &Option<Quantity>, field: &str, dim: Dimension, wm: Option<f64>) -> std::result::Result<(), String> {
    if let Some(q) = q {
        *slot = q.resolve(field, dim, wm)?;
    }
    Ok(())
}

impl ConfigFile {
    pub fn from_json(text: &str) -> std::result::Result<Self, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }

    /// Resolves units and fills defaults. Physical validity is checked
    /// separately by `validate_config`.
    pub fn to_system_config(&self) -> std::result::Result<SystemConfig, String> {
        use Dimension::*;
        let base = BaselineParameters::default();
        let mut cfg = base.identical_pairs(1, 0.0);

        let m = &self.mechanical;
        set(&mut cfg.mech.omega_m, &m.frequency, "mechanical.frequency", Frequency, None)?;
        let wm = Some(cfg.mech.omega_m);
        set(&mut cfg.mech.quality_factor, &m.quality_factor, "mechanical.quality_factor", Dimensionless, wm)?;
        set(&mut cfg.mech.mass, &m.mass, "mechanical.mass", Mass, wm)?;
        set(&mut cfg.mech.temperature, &m.temperature, "mechanical.temperature", Temperature, wm)?;

        // Rates given in multiples of omega_m follow the configured mechanical frequency.
        cfg.optical.kappa_c = base.kappa_c_over_wm * cfg.mech.omega_m;
        cfg.optical.delta_c = base.delta_c_over_wm * cfg.mech.omega_m;
        let o = &self.optical;
        set(&mut cfg.optical.drive_wavelength, &o.wavelength, "optical.wavelength", Length, wm)?;
        set(&mut cfg.optical.kappa_c, &o.kappa, "optical.kappa", Rate, wm)?;
        set(&mut cfg.optical.drive_power, &o.power, "optical.power", Power, wm)?;
        set(&mut cfg.optical.cavity_length, &o.length, "optical.length", Length, wm)?;
        set(&mut cfg.optical.delta_c, &o.detuning, "optical.detuning", Rate, wm)?;

        let mut proto = cfg.microwaves[0];
        proto.kappa_w = base.kappa_w_over_wm * cfg.mech.omega_m;
        proto.delta_w = 0.0;
        let d = &self.microwave;
        set(&mut proto.omega_w, &d.frequency, "microwave.frequency", Frequency, wm)?;
        set(&mut proto.kappa_w, &d.kappa, "microwave.kappa", Rate, wm)?;
        set(&mut proto.drive_power, &d.power, "microwave.power", Power, wm)?;
        set(&mut proto.gap, &d.gap, "microwave.gap", Length, wm)?;
        set(&mut proto.mu, &d.mu, "microwave.mu", Dimensionless, wm)?;

        cfg.microwaves = match (&self.pairs, &self.microwaves) {
            (Some(_), Some(_)) => return Err("give either `pairs` or `microwaves`, not both".into()),
            (Some(pairs), None) => {
                let mut out = Vec::with_capacity(2 * pairs.len());
                for (k, p) in pairs.iter().enumerate() {
                    let mut cav = proto;
                    let field = format!("pairs[{k}]");
                    set(&mut cav.omega_w, &p.frequency, &format!("{field}.frequency"), Frequency, wm)?;
                    let mut delta = 0.0;
                    set(&mut delta, &p.detuning, &format!("{field}.detuning"), Rate, wm)?;
                    for sign in [Sign::Plus, Sign::Minus] {
                        out.push(MicrowaveCavityParams {
                            delta_w: sign.value() * delta,
                            pair_id: k as u32 + 1,
                            sign,
                            ..cav
                        });
                    }
                }
                out
            }
            (None, Some(cavities)) => {
                let mut out = Vec::with_capacity(cavities.len());
                for (j, c) in cavities.iter().enumerate() {
                    let mut cav = MicrowaveCavityParams {
                        pair_id: c.pair_id,
                        sign: c.sign,
                        ..proto
                    };
                    let f = |name: &str| format!("microwaves[{j}].{name}");
                    set(&mut cav.omega_w, &c.frequency, &f("frequency"), Frequency, wm)?;
                    set(&mut cav.kappa_w, &c.kappa, &f("kappa"), Rate, wm)?;
                    set(&mut cav.drive_power, &c.power, &f("power"), Power, wm)?;
                    set(&mut cav.gap, &c.gap, &f("gap"), Length, wm)?;
                    set(&mut cav.mu, &c.mu, &f("mu"), Dimensionless, wm)?;
                    set(&mut cav.delta_w, &c.detuning, &f("detuning"), Rate, wm)?;
                    out.push(cav);
                }
                out
            }
            (None, None) => vec![
                MicrowaveCavityParams { sign: Sign::Plus, ..proto },
                MicrowaveCavityParams { sign: Sign::Minus, ..proto },
            ],
        };
        Ok(cfg)
    }
}

pub fn load_config(path: &Path) -> Result<SystemConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parse_err = |message| Error::Parse {
        path: path.to_path_buf(),
        message,
    };
    ConfigFile::from_json(&text)
        .and_then(|f| f.to_system_config())
        .map_err(parse_err)
}
