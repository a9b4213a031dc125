use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Values of the reduced Planck constant and the Boltzmann constant.
///
/// The defaults are natural units, ħ = k_B = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UnitSystem {
    pub hbar: f64,
    pub boltzmann: f64,
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            boltzmann: 1.0,
        }
    }
}

impl UnitSystem {
    pub fn new(hbar: f64, boltzmann: f64) -> Result<Self> {
        let units = Self { hbar, boltzmann };
        units.validate()?;
        Ok(units)
    }

    pub fn natural() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.hbar > 0.0 && self.hbar.is_finite()) {
            return Err(invalid("hbar", format!("must be positive, got {}", self.hbar)));
        }
        if !(self.boltzmann > 0.0 && self.boltzmann.is_finite()) {
            return Err(invalid(
                "boltzmann",
                format!("must be positive, got {}", self.boltzmann),
            ));
        }
        Ok(())
    }

    /// Thermal angular frequency k_B T / ħ.
    pub fn thermal_frequency(&self, temperature: f64) -> f64 {
        self.boltzmann * temperature / self.hbar
    }
}
