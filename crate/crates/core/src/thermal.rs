//! Steady-state heating: controller power to fridge, device and electron
//! temperatures, and from there to the white-noise level.

use serde::{Deserialize, Serialize};

use crate::physics::NoiseModel;

/// Boltzmann constant in eV/K.
pub const K_B_EV: f64 = 8.617_333_262e-5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FridgeModel {
    pub t_base: f64,
    /// Cooling-power coefficient, W/K².
    pub kappa: f64,
    pub p_parasitic: f64,
}

impl Default for FridgeModel {
    fn default() -> Self {
        // kappa puts 1 mW of cooling power at 100 mK
        FridgeModel {
            t_base: 7e-3,
            kappa: 1e-3 / (0.1f64.powi(2) - 7e-3f64.powi(2)),
            p_parasitic: 0.0,
        }
    }
}

impl FridgeModel {
    pub fn cooling_power(&self, t: f64) -> f64 {
        self.kappa * (t * t - self.t_base * self.t_base)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElectronThermalModel {
    pub t_e_base: f64,
    pub blend_exponent: f64,
}

impl Default for ElectronThermalModel {
    fn default() -> Self {
        ElectronThermalModel {
            t_e_base: 0.85,
            blend_exponent: 5.0,
        }
    }
}

/// Local heating of the qubit die by the neighbouring controller.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceHeating {
    /// Same quadratic law as the fridge but for the package path, W/K².
    /// `None` means the die sits at the mixing-chamber temperature.
    pub kappa_local: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalConfig {
    pub fridge: FridgeModel,
    pub electron: ElectronThermalModel,
    pub device: DeviceHeating,
    /// Electron temperature at which the white-noise PSDs take their `_0`
    /// values.
    pub t_ref: f64,
}

impl Default for ThermalConfig {
    fn default() -> Self {
        ThermalConfig {
            fridge: FridgeModel::default(),
            electron: ElectronThermalModel::default(),
            device: DeviceHeating {
                kappa_local: Some(4.0e-5),
            },
            t_ref: 0.85,
        }
    }
}

impl ThermalConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.fridge.t_base > 0.0) {
            return Err("thermal.fridge.t_base must be positive".into());
        }
        if !(self.fridge.kappa > 0.0) {
            return Err("thermal.fridge.kappa must be positive".into());
        }
        if !(self.fridge.p_parasitic >= 0.0) {
            return Err("thermal.fridge.p_parasitic must be non-negative".into());
        }
        if !(self.electron.t_e_base > 0.0 && self.electron.blend_exponent > 0.0) {
            return Err("thermal.electron parameters must be positive".into());
        }
        if let Some(k) = self.device.kappa_local {
            if !(k > 0.0) {
                return Err("thermal.device.kappa_local must be positive".into());
            }
        }
        if !(self.t_ref > 0.0) {
            return Err("thermal.t_ref must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalState {
    pub p_total: f64,
    pub t_mxc: f64,
    pub t_device: f64,
    pub t_e: f64,
}

/// Positive root of `p + p_parasitic = kappa (T² − t_base²)`.
pub fn mixing_chamber_temp(fridge: &FridgeModel, p_applied: f64) -> f64 {
    let load = p_applied + fridge.p_parasitic;
    (load / fridge.kappa + fridge.t_base * fridge.t_base).sqrt()
}

/// Power-mean blend `(t_e_base^n + T^n)^(1/n)`.
pub fn electron_temp(model: &ElectronThermalModel, t_mxc: f64) -> f64 {
    let n = model.blend_exponent;
    // factor out the larger term to stay finite for large n or T
    let hi = model.t_e_base.max(t_mxc);
    let lo = model.t_e_base.min(t_mxc);
    hi * (1.0 + (lo / hi).powf(n)).powf(1.0 / n)
}

pub fn device_temp(heating: &DeviceHeating, t_mxc: f64, p_applied: f64) -> f64 {
    match heating.kappa_local {
        Some(k) => (t_mxc * t_mxc + p_applied / k).sqrt(),
        None => t_mxc,
    }
}

pub fn thermal_state(cfg: &ThermalConfig, p_applied: f64) -> ThermalState {
    let t_mxc = mixing_chamber_temp(&cfg.fridge, p_applied);
    let t_device = device_temp(&cfg.device, t_mxc, p_applied);
    ThermalState {
        p_total: p_applied,
        t_mxc,
        t_device,
        t_e: electron_temp(&cfg.electron, t_device),
    }
}

/// Copy of `noise` with the white PSDs scaled by `(t_e/t_ref)^temp_exponent`.
/// Quasi-static spreads are left alone.
pub fn scale_noise(noise: &NoiseModel, t_e: f64, t_ref: f64) -> NoiseModel {
    NoiseModel {
        white_scale: (t_e / t_ref).powf(noise.temp_exponent),
        ..*noise
    }
}

/// Occupation of a level `lever_arm·detuning` above the Fermi energy.
pub fn fermi_occupation(detuning: f64, lever_arm: f64, t_e: f64) -> f64 {
    let x = lever_arm * detuning / (K_B_EV * t_e);
    // logistic written to avoid overflow on either tail
    if x >= 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

/// Full width between the 25% and 75% points, volts.
pub fn fermi_width(lever_arm: f64, t_e: f64) -> f64 {
    2.0 * 3f64.ln() * K_B_EV * t_e / lever_arm
}
