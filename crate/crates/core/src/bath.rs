//! Correlation kernels of an ohmic oscillator bath with a sharp cutoff.
//!
//! With τ = t − s the kernels are
//!
//! ```text
//! α_R(τ) = (η/π) ∫₀^Ω ω coth(ħω/2k_BT) cos ωτ dω
//! α_I(τ) = (η/π)(Ω/τ)[cos Ωτ − sin Ωτ/(Ωτ)]
//! ```
//!
//! The closed form of α_I is the one implemented. It equals
//! −(η/π)∫₀^Ω ω sin ωτ dω, i.e. −2 times the half-weight integral it is often
//! quoted alongside.
//!
//! and at T = 0 the real part has the closed form
//! `(η/π) Ω sin Ωτ/τ − (η/2π)(sin(Ωτ/2)/(τ/2))²`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::quadrature::{integrate, QuadratureOptions};
use crate::units::UnitSystem;

/// |Ωτ| below which the zero-temperature real kernel switches to its series.
pub const REAL_SERIES_SWITCH: f64 = 1e-4;
/// |Ωτ| below which the imaginary kernel switches to its series.
///
/// The closed form loses about |Ωτ|⁻² ulps to cancellation, so the switch sits
/// higher than for the real kernel.
pub const IMAG_SERIES_SWITCH: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathSpec {
    /// Damping coefficient η.
    pub eta: f64,
    /// Cutoff angular frequency Ω.
    pub omega_cut: f64,
    #[serde(default)]
    pub temperature: f64,
}

impl BathSpec {
    pub fn new(eta: f64, omega_cut: f64, temperature: f64) -> Result<Self> {
        let bath = Self {
            eta,
            omega_cut,
            temperature,
        };
        bath.validate()?;
        Ok(bath)
    }

    pub fn zero_temperature(eta: f64, omega_cut: f64) -> Result<Self> {
        Self::new(eta, omega_cut, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(invalid("eta", format!("must be non-negative, got {}", self.eta)));
        }
        if !(self.omega_cut > 0.0 && self.omega_cut.is_finite()) {
            return Err(invalid(
                "omega_cut",
                format!("must be positive, got {}", self.omega_cut),
            ));
        }
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(invalid(
                "temperature",
                format!("must be non-negative, got {}", self.temperature),
            ));
        }
        Ok(())
    }

    pub fn is_zero_temperature(&self) -> bool {
        self.temperature == 0.0
    }

    /// Dephasing rate scale ηΩ/πħ of the master equation.
    pub fn dephasing_rate(&self, units: &UnitSystem) -> f64 {
        self.eta * self.omega_cut / (PI * units.hbar)
    }
}

/// Imaginary (dissipative) kernel α_I(τ); odd in τ.
pub fn alpha_imag(tau: f64, bath: &BathSpec) -> f64 {
    let omega = bath.omega_cut;
    let u = omega * tau;
    let shape = if u.abs() < IMAG_SERIES_SWITCH {
        // (cos u − sin u / u)/u = Σ_{k≥1} (−1)^k 2k u^{2k−1}/(2k+1)!
        let u2 = u * u;
        let mut term = u; // u^{2k-1}
        let mut factorial = 6.0; // (2k+1)!
        let mut sum = 0.0;
        for k in 1..=8 {
            let sign = if k % 2 == 1 { -1.0 } else { 1.0 };
            sum += sign * (2 * k) as f64 * term / factorial;
            term *= u2;
            factorial *= ((2 * k + 2) * (2 * k + 3)) as f64;
        }
        sum
    } else {
        (u.cos() - u.sin() / u) / u
    };
    bath.eta / PI * omega * omega * shape
}

/// Zero-temperature real kernel; even in τ with limit ηΩ²/2π at τ = 0.
pub fn alpha_real_zero_temp(tau: f64, bath: &BathSpec) -> f64 {
    let omega = bath.omega_cut;
    let u = omega * tau;
    let shape = if u.abs() < REAL_SERIES_SWITCH {
        // sin u/u − ½ sinc²(u/2) = ½ − u²/8 + u⁴/144 − …
        let u2 = u * u;
        0.5 - u2 / 8.0 + u2 * u2 / 144.0
    } else {
        let half = 0.5 * u;
        let sinc_half = half.sin() / half;
        u.sin() / u - 0.5 * sinc_half * sinc_half
    };
    bath.eta / PI * omega * omega * shape
}

/// ω coth(ħω/2k_BT), with its ω → 0 limit 2k_BT/ħ for T > 0 and ω itself at T = 0.
pub fn omega_coth(omega: f64, temperature: f64, units: &UnitSystem) -> f64 {
    if temperature == 0.0 {
        return omega;
    }
    let thermal = units.thermal_frequency(temperature);
    let x = omega / (2.0 * thermal);
    if x.abs() < 1e-4 {
        2.0 * thermal * (1.0 + x * x / 3.0)
    } else if x.abs() > 20.0 {
        omega.abs()
    } else {
        omega / x.tanh()
    }
}

/// Integrand of the real kernel: (η/π) ω coth(ħω/2k_BT) cos ωτ.
pub fn real_kernel_integrand(omega: f64, tau: f64, bath: &BathSpec, units: &UnitSystem) -> f64 {
    bath.eta / PI * omega_coth(omega, bath.temperature, units) * (omega * tau).cos()
}

/// Quadrature options used for the finite-temperature real kernel at lag τ:
/// roughly one initial panel per half oscillation of cos ωτ.
pub fn kernel_quadrature_options(tau: f64, bath: &BathSpec) -> QuadratureOptions {
    let half_periods = (bath.omega_cut * tau.abs() / PI).ceil() as usize;
    QuadratureOptions {
        abs_tol: 1e-10,
        rel_tol: 1e-10,
        max_subdivisions: 50_000,
        initial_panels: 4 * half_periods + 4,
    }
}

/// Real kernel α_R(τ) at arbitrary temperature.
///
/// T = 0 uses the closed form exactly; T > 0 integrates adaptively.
pub fn alpha_real_finite_temp(tau: f64, bath: &BathSpec, units: &UnitSystem) -> Result<f64> {
    if bath.is_zero_temperature() {
        return Ok(alpha_real_zero_temp(tau, bath));
    }
    let options = kernel_quadrature_options(tau, bath);
    let result = integrate(
        |w| real_kernel_integrand(w, tau, bath, units),
        0.0,
        bath.omega_cut,
        &options,
    )?;
    Ok(result.value)
}
