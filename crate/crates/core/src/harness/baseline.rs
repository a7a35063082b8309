use serde::Serialize;

use crate::constants::TWO_PI;
use crate::physics::{MechanicalParams, MicrowaveCavityParams, OpticalParams, Sign, SystemConfig};

/// Reference parameter set. Frequencies quoted in Hz are ordinary
/// frequencies; rates given as multiples of `omega_m` are angular.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BaselineParameters {
    pub wavelength: f64,
    pub kappa_c_over_wm: f64,
    pub optical_power: f64,
    pub cavity_length: f64,
    pub delta_c_over_wm: f64,
    pub mass: f64,
    pub mechanical_frequency_hz: f64,
    pub quality_factor: f64,
    pub kappa_w_over_wm: f64,
    pub microwave_power: f64,
    pub gap: f64,
    pub mu: f64,
    pub temperature: f64,
    pub microwave_frequency_hz: f64,
}

impl Default for BaselineParameters {
    fn default() -> Self {
        Self {
            wavelength: 1550e-9,
            kappa_c_over_wm: 0.08,
            optical_power: 30e-3,
            cavity_length: 1e-3,
            delta_c_over_wm: 0.5,
            mass: 10e-12,
            mechanical_frequency_hz: 10e6,
            quality_factor: 5e4,
            kappa_w_over_wm: 0.02,
            microwave_power: 30e-3,
            gap: 100e-9,
            mu: 0.008,
            temperature: 15e-3,
            microwave_frequency_hz: 9e9,
        }
    }
}

impl BaselineParameters {
    pub fn omega_m(&self) -> f64 {
        TWO_PI * self.mechanical_frequency_hz
    }

    /// One microwave pair per entry of `pair_frequencies_hz`, with the
    /// uniform detuning convention `Delta_w1 = -Delta_w2 = ... = delta_w_over_wm * omega_m`.
    pub fn config(&self, pair_frequencies_hz: &[f64], delta_w_over_wm: f64) -> SystemConfig {
        let wm = self.omega_m();
        let mut microwaves = Vec::with_capacity(2 * pair_frequencies_hz.len());
        for (k, &nu) in pair_frequencies_hz.iter().enumerate() {
            for sign in [Sign::Plus, Sign::Minus] {
                microwaves.push(MicrowaveCavityParams {
                    omega_w: TWO_PI * nu,
                    kappa_w: self.kappa_w_over_wm * wm,
                    drive_power: self.microwave_power,
                    gap: self.gap,
                    mu: self.mu,
                    delta_w: sign.value() * delta_w_over_wm * wm,
                    pair_id: k as u32 + 1,
                    sign,
                });
            }
        }
        SystemConfig {
            mech: MechanicalParams {
                omega_m: wm,
                quality_factor: self.quality_factor,
                mass: self.mass,
                temperature: self.temperature,
            },
            optical: OpticalParams {
                drive_wavelength: self.wavelength,
                kappa_c: self.kappa_c_over_wm * wm,
                drive_power: self.optical_power,
                cavity_length: self.cavity_length,
                delta_c: self.delta_c_over_wm * wm,
            },
            microwaves,
        }
    }

    /// `pairs` identical pairs at the default microwave frequency.
    pub fn identical_pairs(&self, pairs: usize, delta_w_over_wm: f64) -> SystemConfig {
        self.config(&vec![self.microwave_frequency_hz; pairs], delta_w_over_wm)
    }
}
