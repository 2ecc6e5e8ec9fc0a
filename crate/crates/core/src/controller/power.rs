//! Chip dissipation model.

use serde::{Deserialize, Serialize};

use super::fsm::ControllerState;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerModel {
    /// Fixed digital overhead, watts.
    pub p_digital_base: f64,
    /// Ring-oscillator cost per hertz of undivided tap frequency, W/Hz.
    pub k_tap: f64,
    /// State-machine clocking cost per hertz of divided frequency, W/Hz.
    pub k_divided: f64,
    /// CLFG switching cost per cell per hertz of pulse rate, W/Hz.
    pub p_cell_per_hz: f64,
}

impl Default for PowerModel {
    fn default() -> Self {
        PowerModel {
            p_digital_base: 20e-6,
            k_tap: 0.1e-12,
            k_divided: 0.05e-12,
            // 20 nW/MHz
            p_cell_per_hz: 20e-9 / 1e6,
        }
    }
}

impl PowerModel {
    pub fn digital(&self, state: &ControllerState) -> f64 {
        let osc = &state.osc;
        if !osc.enabled {
            return self.p_digital_base;
        }
        let f_tap = osc.tap_frequency();
        let f_out = f_tap / osc.divider.max(1) as f64;
        self.p_digital_base + self.k_tap * f_tap + self.k_divided * f_out
    }
}

/// Total dissipation with every armed cell switching at `pulse_rate` hertz.
pub fn controller_power(state: &ControllerState, pulse_rate: f64, model: &PowerModel) -> f64 {
    let active = state.armed_cells().count() as f64;
    model.digital(state) + active * model.p_cell_per_hz * pulse_rate + state.artificial_power
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controller::{CellParams, Command, Input, OscillatorConfig, TriggerSource};

    fn state_with_armed(n: u8) -> ControllerState {
        let mut s = ControllerState::new(CellParams::default(), OscillatorConfig::default());
        let mut t = 0.0;
        for c in 0..n {
            s.step(Command::lock(c).unwrap().into(), t).unwrap();
            t += 1e-6;
        }
        for c in 0..n {
            s.step(Input::Command(Command::arm(c, TriggerSource::External).unwrap()), t)
                .unwrap();
            t += 1e-6;
        }
        s
    }

    #[test]
    fn idle_floor() {
        let m = PowerModel::default();
        let s = state_with_armed(0);
        assert_eq!(controller_power(&s, 30e6, &m), m.p_digital_base);
    }

    #[test]
    fn one_cell_at_30_mhz_adds_600_nw() {
        let m = PowerModel::default();
        let s = state_with_armed(1);
        let p = controller_power(&s, 30e6, &m);
        assert!((p - m.p_digital_base - 600e-9).abs() < 1e-18);
    }

    #[test]
    fn artificial_power_adds() {
        let m = PowerModel::default();
        let mut s = state_with_armed(1);
        let before = controller_power(&s, 30e6, &m);
        s.step(Command::artificial_power(50e-6).unwrap().into(), 1.0)
            .unwrap();
        let after = controller_power(&s, 30e6, &m);
        assert!((after - before - 50e-6).abs() < 1e-15);
    }

    #[test]
    fn cells_add_linearly() {
        let m = PowerModel::default();
        let base = controller_power(&state_with_armed(0), 1e6, &m);
        let one = controller_power(&state_with_armed(1), 1e6, &m) - base;
        for n in [2u8, 7, 32] {
            let p = controller_power(&state_with_armed(n), 1e6, &m);
            assert!((p - (base + n as f64 * one)).abs() < 1e-18);
        }
    }

    #[test]
    fn lower_divider_costs_more() {
        let m = PowerModel::default();
        let mut s = state_with_armed(0);
        s.osc.enabled = true;
        s.osc.divider = 255;
        let slow = controller_power(&s, 0.0, &m);
        s.osc.divider = 1;
        let fast = controller_power(&s, 0.0, &m);
        assert!(fast > slow);
        assert!(slow > m.p_digital_base);
    }
}
