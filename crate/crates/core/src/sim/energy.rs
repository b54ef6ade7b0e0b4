use serde::{Deserialize, Serialize};

/// Electrical power model of one UAV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerModel {
    /// Hover and avionics.
    pub base_w: f64,
    pub flight_per_mps_w: f64,
    pub llm_idle_w: f64,
    pub llm_infer_w: f64,
}

impl Default for PowerModel {
    fn default() -> Self {
        Self {
            base_w: 45.0,
            flight_per_mps_w: 8.0,
            llm_idle_w: 5.0,
            llm_infer_w: 10.0,
        }
    }
}

impl PowerModel {
    pub fn power_draw(&self, speed_mps: f64, inference_active: bool) -> f64 {
        let llm = if inference_active { self.llm_infer_w } else { self.llm_idle_w };
        self.base_w + self.flight_per_mps_w * speed_mps + llm
    }
}

/// Battery charge and nominal voltage converted to joules.
pub fn battery_energy_j(capacity_mah: f64, voltage_v: f64) -> f64 {
    capacity_mah * voltage_v * 3.6
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draw_examples() {
        let p = PowerModel::default();
        assert_eq!(p.power_draw(15.0, false), 170.0);
        assert_eq!(p.power_draw(0.0, true), 55.0);
        assert_eq!(p.power_draw(10.0, false), 130.0);
    }

    #[test]
    fn default_battery() {
        assert!((battery_energy_j(9600.0, 14.8) - 511_488.0).abs() < 1e-6);
    }
}
