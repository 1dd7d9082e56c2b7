//! Closed-form conversion efficiency, cooperativity, and optimal detunings.

use num_complex::Complex64;

use crate::error::{ensure_finite, Error, Result};

use super::{ModeParams, PumpState, ResonatorGeometry, SINGULARITY_TOLERANCE};

/// Width of the boundary band around cooperativity 1 for the regime flag.
/// Both branch formulas agree there, so the flag choice is inert.
pub const BOUNDARY_TOLERANCE: f64 = 1e-9;

/// Pumping regime relative to the cooperativity threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Underpumped,
    Boundary,
    Overpumped,
}

impl Regime {
    pub fn from_cooperativity(c: f64) -> Self {
        if (c - 1.0).abs() <= BOUNDARY_TOLERANCE {
            Regime::Boundary
        } else if c < 1.0 {
            Regime::Underpumped
        } else {
            Regime::Overpumped
        }
    }
}

/// Result of a detuning-optimized conversion calculation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConversionResult {
    /// Peak conversion efficiency `|D_out / C_in|^2` over detunings.
    pub efficiency: f64,
    /// Cooperativity.
    pub cooperativity: f64,
    /// Regime flag consistent with the cooperativity.
    pub regime: Regime,
    /// Detunings `(Delta_C, Delta_D)` achieving the peak.
    pub optimal_detunings: (f64, f64),
}

fn check_power(p: f64, what: &str) -> Result<f64> {
    ensure_finite(p, what)?;
    if p < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "{what} must be nonnegative, got {p}"
        )));
    }
    Ok(p)
}

/// Cooperativity: the squared ratio of pump-mediated coupling to linear
/// dissipation, `16 gamma_s gamma_i L^2 P1 P2 / (alpha_s alpha_i)`.
///
/// `p1_w`, `p2_w` are intracavity pump powers in watts.
pub fn cooperativity(
    signal: &ModeParams,
    idler: &ModeParams,
    geometry: &ResonatorGeometry,
    p1_w: f64,
    p2_w: f64,
) -> Result<f64> {
    check_power(p1_w, "pump 1 power")?;
    check_power(p2_w, "pump 2 power")?;
    if signal.total_loss == 0.0 || idler.total_loss == 0.0 {
        return Err(Error::InvalidParameter(
            "cooperativity undefined for zero total loss".into(),
        ));
    }
    let l = geometry.circumference_m();
    Ok(
        16.0 * signal.nonlinearity * idler.nonlinearity * l * l * p1_w * p2_w
            / (signal.total_loss * idler.total_loss),
    )
}

/// Detunings `(Delta_C, Delta_D)` that maximize the conversion efficiency at
/// fixed pump powers.
///
/// Below cooperativity 1 the optimum compensates the cross-phase-modulation
/// shift of each mode, `Delta = 2 gamma L (P1 + P2)`. Above it the optimum
/// bifurcates into a symmetric pair; the branch with
/// `Delta - xpm = -(alpha/2) sqrt(C - 1)` on both modes is returned.
pub fn optimal_detunings(
    signal: &ModeParams,
    idler: &ModeParams,
    geometry: &ResonatorGeometry,
    p1_w: f64,
    p2_w: f64,
) -> Result<(f64, f64)> {
    check_power(p1_w, "pump 1 power")?;
    check_power(p2_w, "pump 2 power")?;
    let l = geometry.circumference_m();
    let total = p1_w + p2_w;
    let xpm_c = 2.0 * signal.nonlinearity * l * total;
    let xpm_d = 2.0 * idler.nonlinearity * l * total;
    if total == 0.0 {
        return Ok((xpm_c, xpm_d));
    }
    // A zero-loss mode cannot be overpumped in the sense of the branch
    // formula (the cooperativity is undefined); treat as the XPM point.
    if signal.total_loss == 0.0 || idler.total_loss == 0.0 {
        return Ok((xpm_c, xpm_d));
    }
    let c = cooperativity(signal, idler, geometry, p1_w, p2_w)?;
    if c <= 1.0 {
        Ok((xpm_c, xpm_d))
    } else {
        let split = (c - 1.0).sqrt();
        Ok((
            xpm_c - signal.total_loss / 2.0 * split,
            xpm_d - idler.total_loss / 2.0 * split,
        ))
    }
}

/// Conversion efficiency `|D_out / C_in|^2` at the given detunings, with no
/// idler input, evaluated in closed form:
///
/// ```text
/// eta = 4 gamma_D^2 L^2 theta_C theta_D |A|^2 |B|^2 / |det M|^2
/// ```
///
/// Agrees with the steady-state/output-coupling composition to roundoff.
pub fn transfer_efficiency(
    signal: &ModeParams,
    idler: &ModeParams,
    geometry: &ResonatorGeometry,
    pumps: &[PumpState; 2],
    detunings: (f64, f64),
) -> Result<f64> {
    let l = geometry.circumference_m();
    let p1 = pumps[0].power_w();
    let p2 = pumps[1].power_w();
    let total = p1 + p2;
    let zeta = |mode: &ModeParams, detuning: f64| {
        Complex64::new(
            -mode.total_loss / 2.0,
            2.0 * mode.nonlinearity * l * total - detuning,
        )
    };
    let det = zeta(signal, detunings.0) * zeta(idler, detunings.1)
        + 4.0 * signal.nonlinearity * idler.nonlinearity * l * l * p1 * p2;
    let scale = zeta(signal, detunings.0)
        .norm()
        .max(zeta(idler, detunings.1).norm())
        .max(2.0 * (signal.nonlinearity * idler.nonlinearity).sqrt() * l * (p1 * p2).sqrt());
    if det.norm() <= SINGULARITY_TOLERANCE * scale * scale {
        return Err(Error::SingularSystem {
            det_magnitude: det.norm(),
        });
    }
    let numerator = 4.0
        * idler.nonlinearity
        * idler.nonlinearity
        * l
        * l
        * signal.coupling
        * idler.coupling
        * p1
        * p2;
    Ok(numerator / det.norm_sqr())
}

/// Peak conversion efficiency over detunings, with the cooperativity, the
/// regime flag, and the optimal detunings.
///
/// The branch structure is
///
/// ```text
/// eta_max = (gamma_D / gamma_C) (theta_C theta_D / (alpha_C alpha_D))
///           * { 4C/(1+C)^2   below C = 1
///             { 1             above C = 1
/// ```
///
/// continuous across the threshold. The leading nonlinearity ratio reduces
/// to 1 for equal signal/idler `gamma` (where `|D_out/C_in|^2` is also the
/// photon-flux ratio); it reflects that the efficiency here is a power
/// ratio, which for upconversion can exceed the coupling-ratio ceiling by
/// exactly that factor.
pub fn max_efficiency(
    signal: &ModeParams,
    idler: &ModeParams,
    geometry: &ResonatorGeometry,
    p1_w: f64,
    p2_w: f64,
) -> Result<ConversionResult> {
    let detunings = optimal_detunings(signal, idler, geometry, p1_w, p2_w)?;
    if p1_w * p2_w == 0.0 {
        let c = if signal.total_loss > 0.0 && idler.total_loss > 0.0 {
            cooperativity(signal, idler, geometry, p1_w, p2_w)?
        } else {
            0.0
        };
        return Ok(ConversionResult {
            efficiency: 0.0,
            cooperativity: c,
            regime: Regime::from_cooperativity(c),
            optimal_detunings: detunings,
        });
    }
    let c = cooperativity(signal, idler, geometry, p1_w, p2_w)?;
    let regime = Regime::from_cooperativity(c);
    let branch = match regime {
        Regime::Underpumped | Regime::Boundary => 4.0 * c / ((1.0 + c) * (1.0 + c)),
        Regime::Overpumped => 1.0,
    };
    let gamma_ratio = if signal.nonlinearity == 0.0 {
        // zero nonlinearity on either mode means no conversion at all
        0.0
    } else {
        idler.nonlinearity / signal.nonlinearity
    };
    let ceiling = signal.coupling_ratio() * idler.coupling_ratio();
    Ok(ConversionResult {
        efficiency: gamma_ratio * ceiling * branch,
        cooperativity: c,
        regime,
        optimal_detunings: detunings,
    })
}

/// Intracavity pump power from an on-chip (bus waveguide) pump power, using
/// the single-mode steady-state buildup
/// `P_cav = theta P_in / ((alpha/2)^2 + Delta^2)`.
pub fn pump_buildup(mode: &ModeParams, on_chip_power_w: f64, detuning: f64) -> Result<f64> {
    check_power(on_chip_power_w, "on-chip pump power")?;
    ensure_finite(detuning, "pump detuning")?;
    let denom = (mode.total_loss / 2.0).powi(2) + detuning * detuning;
    if denom == 0.0 {
        return Err(Error::InvalidParameter(
            "pump buildup singular: zero loss exactly on resonance".into(),
        ));
    }
    Ok(mode.coupling * on_chip_power_w / denom)
}

/// Loaded linewidth `nu / Q` in Hz.
pub fn loaded_linewidth_hz(q_loaded: f64, wavelength_m: f64) -> f64 {
    crate::units::SPEED_OF_LIGHT / wavelength_m / q_loaded
}

/// Per-roundtrip loss from a loaded quality factor: `alpha = omega t_R / Q`.
pub fn q_to_loss(q_loaded: f64, wavelength_m: f64, geometry: &ResonatorGeometry) -> Result<f64> {
    ensure_finite(q_loaded, "quality factor")?;
    if q_loaded <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "quality factor must be positive, got {q_loaded}"
        )));
    }
    let omega = crate::units::wavelength_to_angular(wavelength_m);
    Ok(omega * geometry.roundtrip_time_s() / q_loaded)
}

/// Inverse of [`q_to_loss`]: `Q = omega t_R / alpha`.
pub fn loss_to_q(total_loss: f64, wavelength_m: f64, geometry: &ResonatorGeometry) -> Result<f64> {
    ensure_finite(total_loss, "total loss")?;
    if total_loss <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "total loss must be positive, got {total_loss}"
        )));
    }
    let omega = crate::units::wavelength_to_angular(wavelength_m);
    Ok(omega * geometry.roundtrip_time_s() / total_loss)
}
