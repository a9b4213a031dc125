//! Discretized influence functional of an ohmic bath on a pair of oscillator
//! paths, and the decoherence-time estimators that follow from it.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bath::{alpha_imag, alpha_real_finite_temp, alpha_real_zero_temp, BathSpec};
use crate::error::{invalid, Error, Result};
use crate::grid::trapezoid_weights;
use crate::oscillator::OscillatorSystem;
use crate::units::UnitSystem;

/// Rows per parallel block in the double sums. Partial sums are reduced in
/// block order, so results are bitwise reproducible for a fixed block size.
pub const ROW_BLOCK: usize = 128;

const UNIFORM_TOL: f64 = 1e-12;
/// Allowed |x(t_f) − y(t_f)| for the final-time delta constraint.
pub const ENDPOINT_TOL: f64 = 1e-9;

/// Two amplitude histories x(t), y(t) on a shared uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PathPair {
    t_grid: Vec<f64>,
    x: Vec<f64>,
    y: Vec<f64>,
}

impl PathPair {
    pub fn new(t_grid: Vec<f64>, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = t_grid.len();
        if n < 2 {
            return Err(invalid("t_grid", "need at least two nodes"));
        }
        if x.len() != n || y.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: if x.len() != n { x.len() } else { y.len() },
            });
        }
        let span = t_grid[n - 1] - t_grid[0];
        if !(span > 0.0) {
            return Err(invalid("t_grid", "must be strictly increasing"));
        }
        let h = span / (n - 1) as f64;
        for (k, pair) in t_grid.windows(2).enumerate() {
            let step = pair[1] - pair[0];
            if !(step > 0.0) {
                return Err(invalid("t_grid", format!("not increasing at node {k}")));
            }
            if ((step - h) / h).abs() > UNIFORM_TOL * n as f64 {
                return Err(invalid("t_grid", format!("not uniform at node {k}")));
            }
        }
        Ok(Self { t_grid, x, y })
    }

    /// Samples `x_fn` and `y_fn` on n_steps + 1 uniform nodes spanning [0, t_final].
    pub fn from_fns(
        t_final: f64,
        n_steps: usize,
        x_fn: impl Fn(f64) -> f64,
        y_fn: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        if n_steps < 1 {
            return Err(invalid("n_steps", "must be at least 1"));
        }
        if !(t_final > 0.0) {
            return Err(invalid("t_final", "must be positive"));
        }
        let t_grid: Vec<f64> = (0..=n_steps)
            .map(|k| t_final * k as f64 / n_steps as f64)
            .collect();
        let x = t_grid.iter().map(|&t| x_fn(t)).collect();
        let y = t_grid.iter().map(|&t| y_fn(t)).collect();
        Self::new(t_grid, x, y)
    }

    /// Paths held a constant distance `separation` apart (x = +Δ/2, y = −Δ/2).
    pub fn constant_separation(t_final: f64, n_steps: usize, separation: f64) -> Result<Self> {
        Self::from_fns(t_final, n_steps, |_| 0.5 * separation, |_| -0.5 * separation)
    }

    pub fn t_grid(&self) -> &[f64] {
        &self.t_grid
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.t_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_grid.is_empty()
    }

    pub fn n_steps(&self) -> usize {
        self.len() - 1
    }

    pub fn step(&self) -> f64 {
        (self.t_grid[self.len() - 1] - self.t_grid[0]) / self.n_steps() as f64
    }

    pub fn duration(&self) -> f64 {
        self.t_grid[self.len() - 1] - self.t_grid[0]
    }

    /// x(t) − y(t) at each node.
    pub fn separation(&self) -> Vec<f64> {
        self.x.iter().zip(&self.y).map(|(a, b)| a - b).collect()
    }

    /// Both paths run backwards in time on the same grid.
    pub fn time_reversed(&self) -> Self {
        let mut x = self.x.clone();
        let mut y = self.y.clone();
        x.reverse();
        y.reverse();
        Self {
            t_grid: self.t_grid.clone(),
            x,
            y,
        }
    }

    fn weights(&self) -> Vec<f64> {
        trapezoid_weights(self.len(), self.step())
    }
}

/// Region of the (t, s) plane covered by the influence-phase double integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum IntegrationRegion {
    /// 0 ≤ s ≤ t ≤ t_f, iterated trapezoid.
    #[default]
    Ordered,
    /// [0, t_f]², tensor-product trapezoid.
    FullSquare,
}

impl IntegrationRegion {
    pub fn name(self) -> &'static str {
        match self {
            IntegrationRegion::Ordered => "ordered",
            IntegrationRegion::FullSquare => "full_square",
        }
    }
}

fn require_zero_temperature(bath: &BathSpec) -> Result<()> {
    if bath.is_zero_temperature() {
        Ok(())
    } else {
        Err(Error::Regime {
            temperature: bath.temperature,
        })
    }
}

/// Σ_i Σ_j a_i b_j K(i − j) over the full square, with `lag(d)` giving K at signed lag d.
fn full_square_sum(a: &[f64], b: &[f64], lag_value: impl Fn(isize) -> f64 + Sync) -> f64 {
    let n = a.len();
    let partials: Vec<f64> = (0..n.div_ceil(ROW_BLOCK))
        .into_par_iter()
        .map(|block| {
            let lo = block * ROW_BLOCK;
            let hi = (lo + ROW_BLOCK).min(n);
            let mut acc = 0.0;
            for i in lo..hi {
                if a[i] == 0.0 {
                    continue;
                }
                let mut row = 0.0;
                for (j, bj) in b.iter().enumerate() {
                    row += bj * lag_value(i as isize - j as isize);
                }
                acc += a[i] * row;
            }
            acc
        })
        .collect();
    partials.iter().sum()
}

/// Σ_i w_i a_i Σ_{j ≤ i} v^{(i)}_j b_j K(i − j) with inner trapezoid weights on [0, t_i].
fn ordered_sum(a: &[f64], b: &[f64], h: f64, lag_value: impl Fn(usize) -> f64 + Sync) -> f64 {
    let n = a.len();
    let outer = trapezoid_weights(n, h);
    let partials: Vec<f64> = (0..n.div_ceil(ROW_BLOCK))
        .into_par_iter()
        .map(|block| {
            let lo = block * ROW_BLOCK;
            let hi = (lo + ROW_BLOCK).min(n);
            let mut acc = 0.0;
            for i in lo.max(1)..hi {
                if a[i] == 0.0 {
                    continue;
                }
                let mut row = 0.5 * (b[0] * lag_value(i) + b[i] * lag_value(0));
                for j in 1..i {
                    row += b[j] * lag_value(i - j);
                }
                acc += outer[i] * a[i] * h * row;
            }
            acc
        })
        .collect();
    partials.iter().sum()
}

/// Finite-cutoff imaginary influence phase at T = 0 over the full square:
///
/// (η/π) ∬ Δ(t)Δ(s) [Ω sin Ωτ/τ − ½ (sin(Ωτ/2)/(τ/2))²] dt ds,  τ = t − s.
pub fn w_imag_discrete(paths: &PathPair, bath: &BathSpec) -> Result<f64> {
    require_zero_temperature(bath)?;
    let h = paths.step();
    let kernel: Vec<f64> = (0..paths.len())
        .map(|k| alpha_real_zero_temp(k as f64 * h, bath))
        .collect();
    let weighted: Vec<f64> = paths
        .separation()
        .iter()
        .zip(paths.weights())
        .map(|(d, w)| d * w)
        .collect();
    Ok(full_square_sum(&weighted, &weighted, |lag| kernel[lag.unsigned_abs()]))
}

/// Large-cutoff imaginary phase (ηΩ/2)∫Δ² dt and its dimensionless form W_I/ħ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticPhase {
    pub w_imag: f64,
    pub exponent: f64,
}

pub fn w_imag_asymptotic(paths: &PathPair, bath: &BathSpec, units: &UnitSystem) -> Result<AsymptoticPhase> {
    require_zero_temperature(bath)?;
    // unit-weight trapezoid sum scaled once, so constant integrands are exact
    let squares: Vec<f64> = paths.separation().iter().map(|d| d * d).collect();
    let n = squares.len();
    let unit_sum = squares[1..n - 1].iter().sum::<f64>() + 0.5 * (squares[0] + squares[n - 1]);
    let integral = unit_sum * paths.duration() / paths.n_steps() as f64;
    let w_imag = 0.5 * bath.eta * bath.omega_cut * integral;
    Ok(AsymptoticPhase {
        w_imag,
        exponent: w_imag / units.hbar,
    })
}

/// Real-kernel values α_R(k h) for k = 0..n.
fn real_kernel_table(n: usize, h: f64, bath: &BathSpec, units: &UnitSystem) -> Result<Vec<f64>> {
    if bath.is_zero_temperature() {
        return Ok((0..n).map(|k| alpha_real_zero_temp(k as f64 * h, bath)).collect());
    }
    (0..n)
        .into_par_iter()
        .map(|k| alpha_real_finite_temp(k as f64 * h, bath, units))
        .collect()
}

/// Complex influence phase
///
/// W = i ∬ [x(t) − y(t)][α(t−s) x(s) − α*(t−s) y(s)] ds dt
///
/// with α = α_R + iα_I, over the chosen region.
pub fn influence_phase(
    paths: &PathPair,
    bath: &BathSpec,
    units: &UnitSystem,
    region: IntegrationRegion,
) -> Result<Complex64> {
    bath.validate()?;
    let n = paths.len();
    let h = paths.step();
    let delta = paths.separation();
    if bath.eta == 0.0 || delta.iter().all(|&d| d == 0.0) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let sum: Vec<f64> = paths.x.iter().zip(&paths.y).map(|(a, b)| a + b).collect();
    let real_kernel = real_kernel_table(n, h, bath, units)?;
    let imag_kernel: Vec<f64> = (0..n).map(|k| alpha_imag(k as f64 * h, bath)).collect();

    // α x − α* y = α_R Δ + i α_I Σ, so W = −∬Δ α_I Σ + i ∬Δ α_R Δ
    let (re, im) = match region {
        IntegrationRegion::FullSquare => {
            let w = paths.weights();
            let a: Vec<f64> = delta.iter().zip(&w).map(|(d, w)| d * w).collect();
            let s: Vec<f64> = sum.iter().zip(&w).map(|(d, w)| d * w).collect();
            let im = full_square_sum(&a, &a, |lag| real_kernel[lag.unsigned_abs()]);
            let re = -full_square_sum(&a, &s, |lag| {
                let value = imag_kernel[lag.unsigned_abs()];
                if lag < 0 {
                    -value
                } else {
                    value
                }
            });
            (re, im)
        }
        IntegrationRegion::Ordered => {
            let im = ordered_sum(&delta, &delta, h, |lag| real_kernel[lag]);
            let re = -ordered_sum(&delta, &sum, h, |lag| imag_kernel[lag]);
            (re, im)
        }
    };
    Ok(Complex64::new(re, im))
}

/// Discretized harmonic action ∫(½mẋ² − ½mω²x²)dt: difference-quotient
/// velocities on each step, trapezoidal potential term.
pub fn discrete_action(t_grid: &[f64], path: &[f64], mass: f64, omega: f64) -> f64 {
    let n = t_grid.len();
    let h = (t_grid[n - 1] - t_grid[0]) / (n - 1) as f64;
    let kinetic: f64 = path
        .windows(2)
        .map(|p| {
            let v = (p[1] - p[0]) / h;
            0.5 * mass * v * v * h
        })
        .sum();
    let potential: f64 = trapezoid_weights(n, h)
        .iter()
        .zip(path)
        .map(|(w, x)| w * 0.5 * mass * omega * omega * x * x)
        .sum();
    kinetic - potential
}

/// Decoherence-functional weight of one path pair:
/// e^{i[S(x) − S(y)]/ħ} e^{iW} ρ(y(0), x(0)), with W over the ordered region.
pub fn decoherence_weight(
    paths: &PathPair,
    rho0: impl Fn(f64, f64) -> Complex64,
    system: &OscillatorSystem,
    bath: &BathSpec,
    units: &UnitSystem,
) -> Result<Complex64> {
    let last = paths.len() - 1;
    let mismatch = (paths.x[last] - paths.y[last]).abs();
    if mismatch > ENDPOINT_TOL {
        return Err(Error::EndpointMismatch { mismatch });
    }
    let s_x = discrete_action(&paths.t_grid, &paths.x, system.mass(), system.omega());
    let s_y = discrete_action(&paths.t_grid, &paths.y, system.mass(), system.omega());
    let w = influence_phase(paths, bath, units, IntegrationRegion::Ordered)?;
    let i = Complex64::new(0.0, 1.0);
    Ok((i * (s_x - s_y) / units.hbar).exp() * (i * w).exp() * rho0(paths.y[0], paths.x[0]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    ZeroTemperature,
    HighTemperature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecoherenceEstimate {
    pub t_d: f64,
    pub regime: Regime,
    pub delta_x: f64,
    pub eta: f64,
    pub omega_cut: f64,
    pub temperature: Option<f64>,
    /// Thermal estimate over the zero-temperature one, ħΩ/k_BT.
    pub ratio_to_zero_temperature: Option<f64>,
}

/// Zero-temperature decoherence time t_d = ħ/(ηΩ|Δx|²).
pub fn decoherence_time_zero_temp(delta_x: f64, bath: &BathSpec, units: &UnitSystem) -> Result<DecoherenceEstimate> {
    if !(delta_x > 0.0) {
        return Err(invalid("delta_x", format!("must be positive, got {delta_x}")));
    }
    let rate = bath.eta * bath.omega_cut * delta_x * delta_x;
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::Domain(format!("ηΩΔx² = {rate} has no finite inverse")));
    }
    Ok(DecoherenceEstimate {
        t_d: units.hbar / rate,
        regime: Regime::ZeroTemperature,
        delta_x,
        eta: bath.eta,
        omega_cut: bath.omega_cut,
        temperature: None,
        ratio_to_zero_temperature: None,
    })
}

/// High-temperature decoherence time t_d = ħ²/(η k_B T |Δx|²).
pub fn decoherence_time_thermal(delta_x: f64, bath: &BathSpec, units: &UnitSystem) -> Result<DecoherenceEstimate> {
    if !(delta_x > 0.0) {
        return Err(invalid("delta_x", format!("must be positive, got {delta_x}")));
    }
    let temperature = bath.temperature;
    if !(temperature > 0.0) {
        return Err(Error::Regime { temperature });
    }
    let rate = bath.eta * units.boltzmann * temperature * delta_x * delta_x;
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::Domain(format!("ηk_BTΔx² = {rate} has no finite inverse")));
    }
    Ok(DecoherenceEstimate {
        t_d: units.hbar * units.hbar / rate,
        regime: Regime::HighTemperature,
        delta_x,
        eta: bath.eta,
        omega_cut: bath.omega_cut,
        temperature: Some(temperature),
        ratio_to_zero_temperature: Some(units.hbar * bath.omega_cut / (units.boltzmann * temperature)),
    })
}

/// Optical amplifier parameters in CGS units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpticalSpec {
    pub n_photons: f64,
    /// Amplifier gain in cm⁻¹.
    pub gain: f64,
    /// Speed of light in cm/s.
    #[serde(default = "OpticalSpec::default_light_speed")]
    pub light_speed: f64,
}

impl OpticalSpec {
    pub const LIGHT_SPEED_CGS: f64 = 2.998e10;

    fn default_light_speed() -> f64 {
        Self::LIGHT_SPEED_CGS
    }

    pub fn new(n_photons: f64, gain: f64) -> Result<Self> {
        let spec = Self {
            n_photons,
            gain,
            light_speed: Self::LIGHT_SPEED_CGS,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.n_photons >= 1.0) {
            return Err(invalid("n_photons", "must be at least 1"));
        }
        if !(self.gain > 0.0 && self.light_speed > 0.0) {
            return Err(invalid("gain", "gain and light speed must be positive"));
        }
        Ok(())
    }
}

/// Decoherence time in seconds of an N-photon optical amplifier with gain g,
/// reading ηΩ|Δx|²/ħ as c·g·N.
pub fn optical_estimate(spec: &OpticalSpec) -> Result<f64> {
    spec.validate()?;
    Ok(1.0 / (spec.light_speed * spec.gain * spec.n_photons))
}

/// Ratio of the finite-cutoff phase to its large-cutoff form, reported rather
/// than asserted.
pub fn discrete_to_asymptotic_ratio(paths: &PathPair, bath: &BathSpec, units: &UnitSystem) -> Result<f64> {
    let discrete = w_imag_discrete(paths, bath)?;
    let asymptotic = w_imag_asymptotic(paths, bath, units)?;
    Ok(discrete / asymptotic.w_imag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn cold(eta: f64, omega: f64) -> BathSpec {
        BathSpec::zero_temperature(eta, omega).unwrap()
    }

    fn wiggly(n: usize) -> PathPair {
        PathPair::from_fns(
            1.0,
            n,
            |t| 0.7 * (3.0 * t).sin() + 0.2,
            |t| -0.4 * (2.0 * t).cos() + 0.1 * t,
        )
        .unwrap()
    }

    #[test]
    fn identical_paths_give_zero() {
        let p = PathPair::from_fns(1.0, 64, |t| t.sin(), |t| t.sin()).unwrap();
        let b = cold(1.0, 10.0);
        assert_eq!(w_imag_discrete(&p, &b).unwrap(), 0.0);
        assert_eq!(w_imag_asymptotic(&p, &b, &UnitSystem::natural()).unwrap().w_imag, 0.0);
        assert_eq!(
            influence_phase(&p, &b, &UnitSystem::natural(), IntegrationRegion::Ordered).unwrap(),
            Complex64::new(0.0, 0.0)
        );
    }

    #[test]
    fn doubled_separation_quadruples_phase() {
        let b = cold(1.0, 40.0);
        let p = wiggly(200);
        let doubled = PathPair::new(
            p.t_grid().to_vec(),
            p.x().iter().map(|v| 2.0 * v).collect(),
            p.y().iter().map(|v| 2.0 * v).collect(),
        )
        .unwrap();
        assert_eq!(w_imag_discrete(&doubled, &b).unwrap(), 4.0 * w_imag_discrete(&p, &b).unwrap());
    }

    #[test]
    fn finite_temperature_rejected_by_zero_temperature_forms() {
        let p = wiggly(16);
        let warm = BathSpec::new(1.0, 10.0, 0.5).unwrap();
        assert!(matches!(w_imag_discrete(&p, &warm), Err(Error::Regime { .. })));
        assert!(matches!(
            w_imag_asymptotic(&p, &warm, &UnitSystem::natural()),
            Err(Error::Regime { .. })
        ));
    }

    #[test]
    fn asymptotic_constant_separation() {
        let p = PathPair::constant_separation(1.0, 100, 1.0).unwrap();
        let phase = w_imag_asymptotic(&p, &cold(1.0, 100.0), &UnitSystem::natural()).unwrap();
        assert_eq!(phase.w_imag, 50.0);
        assert_eq!(phase.exponent, 50.0);
        let half_hbar = UnitSystem::new(0.5, 1.0).unwrap();
        let phase2 = w_imag_asymptotic(&p, &cold(1.0, 100.0), &half_hbar).unwrap();
        assert_eq!(phase2.exponent, 2.0 * phase.exponent);
    }

    #[test]
    fn full_square_imaginary_part_matches_discrete_phase() {
        let b = cold(0.8, 25.0);
        let p = wiggly(300);
        let w = influence_phase(&p, &b, &UnitSystem::natural(), IntegrationRegion::FullSquare).unwrap();
        let direct = w_imag_discrete(&p, &b).unwrap();
        assert!((w.im - direct).abs() <= 1e-10 * direct.abs().max(1.0));
    }

    #[test]
    fn ordered_region_matches_brute_force() {
        // oracle: explicit iterated trapezoid over s ≤ t with complex kernels
        let b = cold(1.0, 6.0);
        let p = wiggly(40);
        let h = p.step();
        let n = p.len();
        let alpha = |tau: f64| Complex64::new(alpha_real_zero_temp(tau, &b), alpha_imag(tau, &b));
        let mut total = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let wi = if i == 0 || i == n - 1 { 0.5 * h } else { h };
            let mut inner = Complex64::new(0.0, 0.0);
            for j in 0..=i {
                let wj = if j == 0 || j == i { 0.5 * h } else { h };
                if i == 0 {
                    continue;
                }
                let a = alpha((i as f64 - j as f64) * h);
                inner += wj * (a * p.x()[j] - a.conj() * p.y()[j]);
            }
            total += wi * (p.x()[i] - p.y()[i]) * inner;
        }
        let expected = Complex64::new(0.0, 1.0) * total;
        let w = influence_phase(&p, &b, &UnitSystem::natural(), IntegrationRegion::Ordered).unwrap();
        assert!((w - expected).norm() < 1e-10 * expected.norm());
    }

    #[test]
    fn influence_phase_converges_under_refinement() {
        let b = cold(1.0, 10.0);
        let units = UnitSystem::natural();
        let coarse = influence_phase(&wiggly(2048), &b, &units, IntegrationRegion::Ordered).unwrap();
        let fine = influence_phase(&wiggly(4096), &b, &units, IntegrationRegion::Ordered).unwrap();
        assert_relative_eq!(coarse.re, fine.re, max_relative = 1e-4);
        assert_relative_eq!(coarse.im, fine.im, max_relative = 1e-4);
    }

    #[test]
    fn zero_eta_gives_zero_phase() {
        let w = influence_phase(&wiggly(32), &cold(0.0, 10.0), &UnitSystem::natural(), IntegrationRegion::Ordered)
            .unwrap();
        assert_eq!(w, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn finite_temperature_phase_is_finite() {
        let warm = BathSpec::new(0.5, 5.0, 2.0).unwrap();
        let w = influence_phase(&wiggly(128), &warm, &UnitSystem::natural(), IntegrationRegion::Ordered).unwrap();
        assert!(w.re.is_finite() && w.im.is_finite());
        assert!(w.im > 0.0);
    }

    #[test]
    fn harmonic_action_matches_analytic() {
        // x = cos t: S(T) = −¼ sin 2T for m = ω = 1
        for t_final in [std::f64::consts::PI, std::f64::consts::FRAC_PI_4, 1.0] {
            let n = 2000;
            let grid: Vec<f64> = (0..=n).map(|k| t_final * k as f64 / n as f64).collect();
            let path: Vec<f64> = grid.iter().map(|t| t.cos()).collect();
            let s = discrete_action(&grid, &path, 1.0, 1.0);
            assert!((s + 0.25 * (2.0 * t_final).sin()).abs() < 1e-5, "T = {t_final}");
        }
    }

    #[test]
    fn weight_on_identical_paths_is_density() {
        let p = PathPair::from_fns(1.0, 50, |t| 0.3 * t.cos(), |t| 0.3 * t.cos()).unwrap();
        let gaussian = |y: f64, x: f64| {
            Complex64::new((-(x * x + y * y) / 2.0).exp() / std::f64::consts::PI.sqrt(), 0.0)
        };
        let sys = OscillatorSystem::default();
        let w = decoherence_weight(&p, gaussian, &sys, &cold(1.0, 10.0), &UnitSystem::natural()).unwrap();
        assert_eq!(w.im, 0.0);
        assert_relative_eq!(w.re, gaussian(0.3, 0.3).re, max_relative = 1e-15);
    }

    #[test]
    fn weight_modulus_identity() {
        let p = PathPair::from_fns(1.0, 100, |t| (1.0 - t) * 0.8 + 0.1, |t| (1.0 - t) * -0.5 + 0.1).unwrap();
        let rho = |y: f64, x: f64| Complex64::new(0.4 * (-(x - y).powi(2)).exp(), 0.1 * x);
        let b = cold(0.5, 8.0);
        let units = UnitSystem::natural();
        let sys = OscillatorSystem::default();
        let w = decoherence_weight(&p, rho, &sys, &b, &units).unwrap();
        let phase = influence_phase(&p, &b, &units, IntegrationRegion::Ordered).unwrap();
        let expected = (-phase.im).exp() * rho(p.y()[0], p.x()[0]).norm();
        assert_relative_eq!(w.norm(), expected, max_relative = 1e-12);
        assert!(w.norm() <= rho(p.y()[0], p.x()[0]).norm() * phase.im.abs().exp() * (1.0 + 1e-12));
    }

    #[test]
    fn weight_rejects_open_endpoints() {
        let p = PathPair::constant_separation(1.0, 10, 0.1).unwrap();
        let err = decoherence_weight(
            &p,
            |_, _| Complex64::new(1.0, 0.0),
            &OscillatorSystem::default(),
            &cold(1.0, 1.0),
            &UnitSystem::natural(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::EndpointMismatch { .. }));
    }

    #[test]
    fn decoherence_times() {
        let units = UnitSystem::natural();
        assert_eq!(decoherence_time_zero_temp(1.0, &cold(1.0, 1.0), &units).unwrap().t_d, 1.0);
        assert_relative_eq!(
            decoherence_time_zero_temp(1.0, &cold(2.0, 5.0), &units).unwrap().t_d,
            0.1,
            max_relative = 1e-15
        );
        let b = cold(1.3, 2.0);
        let t1 = decoherence_time_zero_temp(0.7, &b, &units).unwrap().t_d;
        let t2 = decoherence_time_zero_temp(1.4, &b, &units).unwrap().t_d;
        assert_relative_eq!(t2, t1 / 4.0, max_relative = 1e-15);
        assert!(matches!(
            decoherence_time_zero_temp(1.0, &cold(0.0, 1.0), &units),
            Err(Error::Domain(_))
        ));

        let warm = BathSpec::new(1.0, 10.0, 1.0).unwrap();
        assert_eq!(decoherence_time_thermal(1.0, &warm, &units).unwrap().t_d, 1.0);
        let hotter = BathSpec::new(1.0, 10.0, 2.0).unwrap();
        assert_eq!(decoherence_time_thermal(1.0, &hotter, &units).unwrap().t_d, 0.5);
        let at_ten = BathSpec::new(1.0, 10.0, 10.0).unwrap();
        assert_eq!(
            decoherence_time_thermal(1.0, &at_ten, &units).unwrap().ratio_to_zero_temperature,
            Some(1.0)
        );
        assert!(matches!(
            decoherence_time_thermal(1.0, &cold(1.0, 1.0), &units),
            Err(Error::Regime { .. })
        ));
    }

    #[test]
    fn optical_scaling() {
        let one = optical_estimate(&OpticalSpec::new(1.0, 1.0).unwrap()).unwrap();
        assert!((1e-11..=1e-10).contains(&one));
        let ten = optical_estimate(&OpticalSpec::new(10.0, 1.0).unwrap()).unwrap();
        assert_relative_eq!(ten, one / 10.0, max_relative = 1e-15);
        let doubled_gain = optical_estimate(&OpticalSpec::new(1.0, 2.0).unwrap()).unwrap();
        assert_relative_eq!(doubled_gain, one / 2.0, max_relative = 1e-15);
    }

    #[test]
    fn nonuniform_grid_rejected() {
        assert!(PathPair::new(vec![0.0, 0.1, 0.3], vec![0.0; 3], vec![0.0; 3]).is_err());
        assert!(PathPair::new(vec![0.0], vec![0.0], vec![0.0]).is_err());
    }

    proptest! {
        #[test]
        fn asymptotic_phase_nonnegative_and_reversal_invariant(
            a in -2.0f64..2.0, b in -2.0f64..2.0, c in -3.0f64..3.0
        ) {
            let p = PathPair::from_fns(1.5, 64, |t| a * t + c * t * t, |t| b * (t * c).sin()).unwrap();
            let bath = cold(0.7, 30.0);
            let units = UnitSystem::natural();
            let fwd = w_imag_asymptotic(&p, &bath, &units).unwrap().w_imag;
            let rev = w_imag_asymptotic(&p.time_reversed(), &bath, &units).unwrap().w_imag;
            prop_assert!(fwd >= 0.0);
            prop_assert!((fwd - rev).abs() <= 1e-12 * fwd.max(1e-300));
        }

        #[test]
        fn times_product_is_unity(dx in 0.01f64..10.0, eta in 0.01f64..10.0, omega in 0.1f64..100.0) {
            let units = UnitSystem::natural();
            let est = decoherence_time_zero_temp(dx, &cold(eta, omega), &units).unwrap();
            prop_assert!((est.t_d * eta * omega * dx * dx - 1.0).abs() < 1e-14);
        }
    }
}
