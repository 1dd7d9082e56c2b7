//! Propagation-constant and phase-matching engine.
//!
//! Dispersion is ingested as Taylor coefficients of the propagation constant
//! `beta(omega)` about a reference frequency (user-fit to a simulated or
//! measured GVD curve), never computed from waveguide geometry. Phase
//! mismatches are evaluated at the linear-dispersion level; nonlinear pump
//! phase is accounted for separately where it matters (the SFWM classifier)
//! and absorbed into the cavity detuning optimum otherwise.

use crate::error::{ensure_finite, Error, Result};

/// Taylor-expanded propagation constant over a validity window.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionProfile {
    reference_omega: f64,
    /// `coefficients[n]` is `beta_n` in s^n/m.
    coefficients: Vec<f64>,
    window: (f64, f64),
}

impl DispersionProfile {
    /// Build a profile from `beta_0..beta_n` (s^n/m, `n >= 2`) about
    /// `reference_omega` (rad/s), valid on `window` (rad/s).
    pub fn new(reference_omega: f64, coefficients: Vec<f64>, window: (f64, f64)) -> Result<Self> {
        ensure_finite(reference_omega, "reference frequency")?;
        if reference_omega <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "reference frequency must be positive, got {reference_omega}"
            )));
        }
        if coefficients.len() < 3 {
            return Err(Error::InvalidParameter(format!(
                "need Taylor coefficients through at least beta_2, got {} entries",
                coefficients.len()
            )));
        }
        for (n, c) in coefficients.iter().enumerate() {
            ensure_finite(*c, &format!("beta_{n}"))?;
        }
        if !(window.0.is_finite() && window.1.is_finite() && window.0 < window.1) {
            return Err(Error::InvalidParameter(format!(
                "validity window must be finite with min < max, got {window:?}"
            )));
        }
        Ok(Self {
            reference_omega,
            coefficients,
            window,
        })
    }

    pub fn reference_omega(&self) -> f64 {
        self.reference_omega
    }

    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    fn check_window(&self, omega: f64) -> Result<()> {
        if omega < self.window.0 || omega > self.window.1 {
            Err(Error::OutOfWindow {
                omega,
                window: self.window,
            })
        } else {
            Ok(())
        }
    }

    /// Propagation constant `beta(omega)` (1/m):
    /// `sum_n beta_n (omega - omega_0)^n / n!`, evaluated by Horner's rule.
    pub fn beta(&self, omega: f64) -> Result<f64> {
        self.check_window(omega)?;
        let d = omega - self.reference_omega;
        let mut acc = 0.0;
        for (n, &c) in self.coefficients.iter().enumerate().rev() {
            acc = acc * d + c / factorial(n);
        }
        Ok(acc)
    }

    /// Group-velocity dispersion `beta_2(omega)` (s^2/m), the analytic second
    /// derivative of the Taylor series. Positive is normal, negative
    /// anomalous.
    pub fn gvd(&self, omega: f64) -> Result<f64> {
        self.check_window(omega)?;
        let d = omega - self.reference_omega;
        let mut acc = 0.0;
        for (n, &c) in self.coefficients.iter().enumerate().skip(2).rev() {
            acc = acc * d + c / factorial(n - 2);
        }
        Ok(acc)
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// The four frequencies taking part in the Bragg-scattering process, with
/// energy conservation `omega_idler = omega_signal + omega_pump_hi -
/// omega_pump_lo` holding exactly by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyQuartet {
    omega_signal: f64,
    omega_idler: f64,
    omega_pump_hi: f64,
    omega_pump_lo: f64,
}

impl FrequencyQuartet {
    /// Fix the idler by energy conservation from the signal and the two
    /// pumps (`omega_pump_hi > omega_pump_lo`, all rad/s).
    pub fn from_three(omega_signal: f64, omega_pump_hi: f64, omega_pump_lo: f64) -> Result<Self> {
        ensure_finite(omega_signal, "signal frequency")?;
        ensure_finite(omega_pump_hi, "high pump frequency")?;
        ensure_finite(omega_pump_lo, "low pump frequency")?;
        if omega_signal <= 0.0 || omega_pump_lo <= 0.0 {
            return Err(Error::InvalidParameter(
                "frequencies must be positive".into(),
            ));
        }
        if omega_pump_hi < omega_pump_lo {
            return Err(Error::InvalidParameter(format!(
                "pump ordering violated: {omega_pump_hi} < {omega_pump_lo}"
            )));
        }
        let omega_idler = omega_signal + omega_pump_hi - omega_pump_lo;
        if omega_idler <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "energy conservation gives a nonpositive idler frequency {omega_idler}"
            )));
        }
        Ok(Self {
            omega_signal,
            omega_idler,
            omega_pump_hi,
            omega_pump_lo,
        })
    }

    pub fn omega_signal(&self) -> f64 {
        self.omega_signal
    }

    pub fn omega_idler(&self) -> f64 {
        self.omega_idler
    }

    pub fn omega_pump_hi(&self) -> f64 {
        self.omega_pump_hi
    }

    pub fn omega_pump_lo(&self) -> f64 {
        self.omega_pump_lo
    }

    /// Signal-idler span as an ordinary frequency (Hz); equals the pump
    /// separation by energy conservation.
    pub fn span_hz(&self) -> f64 {
        (self.omega_idler - self.omega_signal).abs() / std::f64::consts::TAU
    }
}

/// Phase mismatch of the Bragg-scattering process (1/m):
/// `beta(signal) + beta(pump_hi) - beta(idler) - beta(pump_lo)`.
///
/// Purely linear-dispersion; invariant under adding any affine term to the
/// profile because the quartet conserves energy.
pub fn bsfwm_mismatch(profile: &DispersionProfile, quartet: &FrequencyQuartet) -> Result<f64> {
    Ok(
        profile.beta(quartet.omega_signal)? + profile.beta(quartet.omega_pump_hi)?
            - profile.beta(quartet.omega_idler)?
            - profile.beta(quartet.omega_pump_lo)?,
    )
}

/// Phase mismatch of spontaneous pair generation at offset `delta` (rad/s)
/// from a pump (1/m):
/// `2 beta(pump) - beta(pump + delta) - beta(pump - delta) - 2 gamma P`.
///
/// Nonnegative values mean the sideband pair at `+-delta` is phase-matched.
pub fn sfwm_mismatch(
    profile: &DispersionProfile,
    omega_pump: f64,
    delta: f64,
    pump_power_w: f64,
    gamma: f64,
) -> Result<f64> {
    ensure_finite(delta, "sideband offset")?;
    if pump_power_w < 0.0 || !pump_power_w.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "pump power must be nonnegative, got {pump_power_w}"
        )));
    }
    if gamma < 0.0 || !gamma.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "nonlinear parameter must be nonnegative, got {gamma}"
        )));
    }
    Ok(2.0 * profile.beta(omega_pump)?
        - profile.beta(omega_pump + delta)?
        - profile.beta(omega_pump - delta)?
        - 2.0 * gamma * pump_power_w)
}

/// Outcome of scanning [`sfwm_mismatch`] over all sideband offsets that fit
/// in the profile window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SfwmClassification {
    /// The mismatch stays negative everywhere: pair generation is
    /// suppressed.
    NotPhaseMatched,
    /// The mismatch reaches zero at the given offset (rad/s).
    PhaseMatched { delta: f64 },
}

/// Classify whether spontaneous pair generation around `omega_pump` is
/// phase-matchable anywhere inside the profile window, scanning sideband
/// offsets on a dense grid with bisection refinement of the first crossing.
pub fn classify_sfwm(
    profile: &DispersionProfile,
    omega_pump: f64,
    pump_power_w: f64,
    gamma: f64,
) -> Result<SfwmClassification> {
    profile.check_window(omega_pump)?;
    let (lo, hi) = profile.window();
    // back off one part in 1e12 so omega_pump +- delta never rounds outside
    let delta_max = (hi - omega_pump).min(omega_pump - lo) * (1.0 - 1e-12);
    if delta_max <= 0.0 {
        return Ok(SfwmClassification::NotPhaseMatched);
    }
    const POINTS: usize = 2001;
    let mismatch = |d: f64| sfwm_mismatch(profile, omega_pump, d, pump_power_w, gamma);
    let mut prev_d = 0.0;
    let mut prev = mismatch(0.0)?; // equals -2 gamma P
    for k in 1..=POINTS {
        let d = delta_max * k as f64 / POINTS as f64;
        let value = mismatch(d)?;
        if value >= 0.0 {
            // refine the crossing between prev_d and d
            let (mut a, mut b) = (prev_d, d);
            if prev >= 0.0 {
                return Ok(SfwmClassification::PhaseMatched { delta: prev_d });
            }
            for _ in 0..60 {
                let mid = 0.5 * (a + b);
                if mismatch(mid)? >= 0.0 {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            return Ok(SfwmClassification::PhaseMatched { delta: b });
        }
        prev = value;
        prev_d = d;
    }
    Ok(SfwmClassification::NotPhaseMatched)
}
