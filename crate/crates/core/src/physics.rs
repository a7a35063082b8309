//! Physical parameters of the hybrid network and the closed-form quantities
//! derived from them: thermal occupations, drive amplitudes, semiclassical
//! fixed points and the effective linearized couplings.
//!
//! All values are SI with angular frequencies in rad/s. Unit-suffixed input
//! is handled by [`crate::harness::config_file`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::constants::{C, HBAR, K_B, TWO_PI};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MechanicalParams {
    /// Resonance, rad/s.
    pub omega_m: f64,
    pub quality_factor: f64,
    /// Effective mass, kg.
    pub mass: f64,
    /// Bath temperature shared by every subsystem, K.
    pub temperature: f64,
}

impl MechanicalParams {
    pub fn kappa_m(&self) -> f64 {
        self.omega_m / self.quality_factor
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticalParams {
    /// Drive laser wavelength, m.
    pub drive_wavelength: f64,
    pub kappa_c: f64,
    /// Input laser power, W.
    pub drive_power: f64,
    /// Fabry-Perot length, m.
    pub cavity_length: f64,
    /// Effective detuning, rad/s.
    pub delta_c: f64,
}

impl OpticalParams {
    /// Drive (laser) angular frequency.
    pub fn drive_frequency(&self) -> f64 {
        TWO_PI * C / self.drive_wavelength
    }

    /// Cavity resonance, drive frequency plus effective detuning.
    pub fn resonance(&self) -> f64 {
        self.drive_frequency() + self.delta_c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MicrowaveCavityParams {
    /// Resonance, rad/s.
    pub omega_w: f64,
    pub kappa_w: f64,
    /// Input microwave power, W.
    pub drive_power: f64,
    /// Equilibrium plate distance, m.
    pub gap: f64,
    /// Capacitance ratio, in (0, 1).
    pub mu: f64,
    /// Effective detuning, rad/s.
    pub delta_w: f64,
    pub pair_id: u32,
    pub sign: Sign,
}

impl MicrowaveCavityParams {
    /// Drive frequency reconstructed from the effective detuning.
    pub fn drive_frequency(&self) -> f64 {
        self.omega_w - self.delta_w
    }
}

/// Full description of the network. Microwave cavities are ordered
/// `[pair1(+), pair1(-), pair2(+), pair2(-), ...]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub mech: MechanicalParams,
    pub optical: OpticalParams,
    pub microwaves: Vec<MicrowaveCavityParams>,
}

impl SystemConfig {
    pub fn n_microwaves(&self) -> usize {
        self.microwaves.len()
    }

    /// Dimension of the fluctuation vector, `2n + 4`.
    pub fn dimension(&self) -> usize {
        2 * self.microwaves.len() + 4
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerivedCouplings {
    /// Effective optomechanical coupling, rad/s.
    pub g_c: f64,
    /// Effective electromechanical couplings, one per microwave cavity.
    pub g_w: Vec<f64>,
    pub nbar_m: f64,
    pub n_thermal_w: Vec<f64>,
    pub alpha_s: f64,
    pub beta_s: Vec<f64>,
    pub q_s: f64,
    /// Single-photon couplings.
    pub g0_c: f64,
    pub g0_w: Vec<f64>,
    /// Drive rates, 1/s.
    pub e_c: f64,
    pub e_w: Vec<f64>,
}

/// Bose-Einstein occupation `1 / (exp(hbar*omega / k_B T) - 1)`.
pub fn thermal_occupation(omega: f64, temperature: f64) -> Result<f64> {
    if !omega.is_finite() || !temperature.is_finite() {
        return Err(Error::NonFinite("thermal_occupation input".into()));
    }
    if omega <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "thermal occupation needs omega > 0, got {omega}"
        )));
    }
    if temperature < 0.0 {
        return Err(Error::InvalidInput(format!(
            "temperature must be >= 0, got {temperature}"
        )));
    }
    if temperature == 0.0 {
        return Ok(0.0);
    }
    let x = HBAR * omega / (K_B * temperature);
    Ok(1.0 / x.exp_m1())
}

/// Single-photon optomechanical coupling `(omega_c / L) sqrt(hbar / (m omega_m))`.
fn g0_optical(config: &SystemConfig) -> f64 {
    let zpf = (HBAR / (config.mech.mass * config.mech.omega_m)).sqrt();
    config.optical.resonance() / config.optical.cavity_length * zpf
}

fn g0_microwave(config: &SystemConfig, w: &MicrowaveCavityParams) -> f64 {
    let zpf = (HBAR / (config.mech.mass * config.mech.omega_m)).sqrt();
    w.mu * w.omega_w / (2.0 * w.gap) * zpf
}

pub fn derive_couplings(config: &SystemConfig) -> Result<DerivedCouplings> {
    let mech = &config.mech;
    let opt = &config.optical;
    let m_wm = mech.mass * mech.omega_m;

    let w0c = opt.drive_frequency();
    let wc = opt.resonance();
    let g_c = (2.0 * wc / opt.cavity_length)
        * (opt.drive_power * opt.kappa_c
            / (m_wm * w0c * (opt.kappa_c.powi(2) + opt.delta_c.powi(2))))
        .sqrt();
    let e_c = (2.0 * opt.drive_power * opt.kappa_c / (HBAR * w0c)).sqrt();
    let alpha_s = e_c / opt.kappa_c.hypot(opt.delta_c);
    let g0_c = g0_optical(config);

    let n = config.microwaves.len();
    let mut g_w = Vec::with_capacity(n);
    let mut e_w = Vec::with_capacity(n);
    let mut beta_s = Vec::with_capacity(n);
    let mut g0_w = Vec::with_capacity(n);
    let mut n_thermal_w = Vec::with_capacity(n);
    for w in &config.microwaves {
        let w0 = w.drive_frequency();
        g_w.push(
            (w.mu * w.omega_w / w.gap)
                * (w.drive_power * w.kappa_w
                    / (m_wm * w0 * (w.kappa_w.powi(2) + w.delta_w.powi(2))))
                .sqrt(),
        );
        let e = (2.0 * w.drive_power * w.kappa_w / (HBAR * w0)).sqrt();
        beta_s.push(e / w.kappa_w.hypot(w.delta_w));
        e_w.push(e);
        g0_w.push(g0_microwave(config, w));
        n_thermal_w.push(thermal_occupation(w.omega_w, mech.temperature)?);
    }

    let q_s = (g0_c * alpha_s.powi(2)
        + g0_w
            .iter()
            .zip(&beta_s)
            .map(|(g, b)| g * b * b)
            .sum::<f64>())
        / mech.omega_m;

    let derived = DerivedCouplings {
        g_c,
        g_w,
        nbar_m: thermal_occupation(mech.omega_m, mech.temperature)?,
        n_thermal_w,
        alpha_s,
        beta_s,
        q_s,
        g0_c,
        g0_w,
        e_c,
        e_w,
    };
    let all_finite = [derived.g_c, derived.alpha_s, derived.q_s, derived.e_c]
        .iter()
        .chain(&derived.g_w)
        .chain(&derived.beta_s)
        .all(|v| v.is_finite());
    if !all_finite {
        return Err(Error::NonFinite("derived couplings".into()));
    }
    Ok(derived)
}

/// Bare detunings `(Delta_0c, [Delta_0wj])` implied by the static mechanical
/// shift. Reported only; the dynamics use the effective detunings.
pub fn bare_detunings(config: &SystemConfig, derived: &DerivedCouplings) -> (f64, Vec<f64>) {
    let d0c = config.optical.delta_c + derived.g0_c * derived.q_s;
    let d0w = config
        .microwaves
        .iter()
        .zip(&derived.g0_w)
        .map(|(w, g0)| w.delta_w + g0 * derived.q_s)
        .collect();
    (d0c, d0w)
}

/// A broken invariant, naming the offending field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

fn check_positive(out: &mut Vec<Violation>, field: &str, value: f64) {
    if !(value.is_finite() && value > 0.0) {
        out.push(Violation {
            field: field.to_string(),
            message: format!("must be finite and > 0, got {value}"),
        });
    }
}

pub fn validate_config(config: &SystemConfig) -> Vec<Violation> {
    let mut out = Vec::new();
    let m = &config.mech;
    check_positive(&mut out, "mechanical.omega_m", m.omega_m);
    check_positive(&mut out, "mechanical.quality_factor", m.quality_factor);
    check_positive(&mut out, "mechanical.mass", m.mass);
    check_positive(&mut out, "mechanical.temperature", m.temperature);

    let o = &config.optical;
    check_positive(&mut out, "optical.drive_wavelength", o.drive_wavelength);
    check_positive(&mut out, "optical.kappa_c", o.kappa_c);
    check_positive(&mut out, "optical.drive_power", o.drive_power);
    check_positive(&mut out, "optical.cavity_length", o.cavity_length);
    if !o.delta_c.is_finite() {
        out.push(Violation {
            field: "optical.delta_c".into(),
            message: "must be finite".into(),
        });
    }

    let n = config.microwaves.len();
    if n < 2 || !n.is_multiple_of(2) {
        out.push(Violation {
            field: "microwaves".into(),
            message: format!("n must be even and >= 2, got {n}"),
        });
    }
    for (j, w) in config.microwaves.iter().enumerate() {
        let f = |name: &str| format!("microwaves[{j}].{name}");
        check_positive(&mut out, &f("omega_w"), w.omega_w);
        check_positive(&mut out, &f("kappa_w"), w.kappa_w);
        check_positive(&mut out, &f("gap"), w.gap);
        // A zero drive is a legitimate decoupling; only reject negative power.
        if !(w.drive_power.is_finite() && w.drive_power >= 0.0) {
            out.push(Violation {
                field: f("drive_power"),
                message: format!("must be finite and >= 0, got {}", w.drive_power),
            });
        }
        if !(w.mu > 0.0 && w.mu < 1.0) {
            out.push(Violation {
                field: f("mu"),
                message: format!("mu out of (0,1): {}", w.mu),
            });
        }
        if !w.delta_w.is_finite() {
            out.push(Violation {
                field: f("delta_w"),
                message: "must be finite".into(),
            });
        } else if w.drive_frequency() <= 0.0 {
            out.push(Violation {
                field: f("delta_w"),
                message: "detuning leaves a non-positive drive frequency".into(),
            });
        }
    }

    // Pair structure: cavity 2k is pair k (+), cavity 2k+1 is pair k (-).
    for (k, pair) in config.microwaves.chunks(2).enumerate() {
        if let [a, b] = pair {
            if a.pair_id != b.pair_id || a.sign != Sign::Plus || b.sign != Sign::Minus {
                out.push(Violation {
                    field: format!("microwaves[{}..={}]", 2 * k, 2 * k + 1),
                    message: "pairs must be ordered as (pair_id, +), (pair_id, -)".into(),
                });
            }
        }
    }
    for (k, pair) in config.microwaves.chunks(2).enumerate() {
        if pair.len() == 2
            && config.microwaves.chunks(2).skip(k + 1).any(|p| p[0].pair_id == pair[0].pair_id)
        {
            out.push(Violation {
                field: format!("microwaves[{}].pair_id", 2 * k),
                message: format!("pair_id {} used by more than one pair", pair[0].pair_id),
            });
        }
    }
    out
}

/// Non-fatal remarks: conditions the model assumes but does not enforce.
pub fn config_warnings(config: &SystemConfig) -> Vec<String> {
    let mut out = Vec::new();
    if config.mech.quality_factor < 100.0 {
        out.push(format!(
            "mechanical quality factor {} < 100; the Brownian noise model assumes Q >> 1",
            config.mech.quality_factor
        ));
    }
    for pair in config.microwaves.chunks(2) {
        if let [a, b] = pair {
            if a.delta_w != -b.delta_w {
                out.push(format!(
                    "pair {} detunings are not opposite ({:e}, {:e})",
                    a.pair_id, a.delta_w, b.delta_w
                ));
            }
        }
    }
    out
}
