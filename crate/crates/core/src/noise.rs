//! Noise channels of a dual-pump converter and their suppression.
//!
//! Three mechanisms are modeled by their power scaling and polarization
//! contrast:
//!
//! * fluorescence — saturating, `a P / (1 + P/P_sat)`, weakly polarized;
//! * spontaneous four-wave mixing — quadratic `b P^2`, co-polarized;
//! * Raman scattering — linear `r P`, co-polarized.
//!
//! Measured (power, angle, rate) tables can be classified back into a
//! mechanism by least-squares fitting of the three families. Filter chains
//! act multiplicatively on in-band transmission, and add dB suppression for
//! broadband sources only; cavity-resonant noise rides the filter peak.

use crate::batch;
use crate::error::{ensure_finite, Error, Result};

/// Spectral character of a noise source, deciding how periodic filters act
/// on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralCharacter {
    /// Spread over many filter periods; receives out-of-band suppression.
    Broadband,
    /// Concentrated on cavity resonances aligned with the filter peak;
    /// receives in-band transmission only.
    CavityResonant,
}

/// Noise generation mechanism with its mechanism-specific parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mechanism {
    /// Saturating defect/bandtail emission; `saturation_power_w > 0`.
    Fluorescence { saturation_power_w: f64 },
    /// Spontaneous four-wave mixing, quadratic in pump power.
    Sfwm,
    /// Spontaneous Raman scattering, linear in pump power.
    Raman,
}

/// A parameterized noise channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSource {
    pub mechanism: Mechanism,
    /// Rate coefficient: counts/s per W (fluorescence, Raman) or per W^2
    /// (SFWM).
    pub amplitude: f64,
    /// Polarization contrast in [0, 1]: 0 unpolarized, 1 fully
    /// co-polarized with the pump.
    pub polarization_contrast: f64,
    pub spectral: SpectralCharacter,
}

impl NoiseSource {
    pub fn new(
        mechanism: Mechanism,
        amplitude: f64,
        polarization_contrast: f64,
        spectral: SpectralCharacter,
    ) -> Result<Self> {
        ensure_finite(amplitude, "noise amplitude")?;
        ensure_finite(polarization_contrast, "polarization contrast")?;
        if amplitude < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "noise amplitude must be nonnegative, got {amplitude}"
            )));
        }
        if !(0.0..=1.0).contains(&polarization_contrast) {
            return Err(Error::InvalidParameter(format!(
                "polarization contrast must lie in [0, 1], got {polarization_contrast}"
            )));
        }
        if let Mechanism::Fluorescence { saturation_power_w } = mechanism {
            if !(saturation_power_w.is_finite() && saturation_power_w > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "fluorescence saturation power must be positive and finite, got {saturation_power_w}"
                )));
            }
        }
        Ok(Self {
            mechanism,
            amplitude,
            polarization_contrast,
            spectral,
        })
    }
}

/// Noise rate (counts/s) generated at pump power `pump_power_w`.
pub fn noise_rate(source: &NoiseSource, pump_power_w: f64) -> Result<f64> {
    ensure_finite(pump_power_w, "pump power")?;
    if pump_power_w < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "pump power must be nonnegative, got {pump_power_w}"
        )));
    }
    Ok(match source.mechanism {
        Mechanism::Fluorescence { saturation_power_w } => {
            source.amplitude * pump_power_w / (1.0 + pump_power_w / saturation_power_w)
        }
        Mechanism::Sfwm => source.amplitude * pump_power_w * pump_power_w,
        Mechanism::Raman => source.amplitude * pump_power_w,
    })
}

/// Noise rate behind a polarization analyzer at `analyzer_angle` (rad) from
/// the pump polarization: a Malus-law mixture
/// `rate(P) * ((1 - rho) + rho cos^2(angle))`.
pub fn polarized_rate(source: &NoiseSource, pump_power_w: f64, analyzer_angle: f64) -> Result<f64> {
    ensure_finite(analyzer_angle, "analyzer angle")?;
    let rho = source.polarization_contrast;
    let c = analyzer_angle.cos();
    Ok(noise_rate(source, pump_power_w)? * ((1.0 - rho) + rho * c * c))
}

// ---------------------------------------------------------------------------
// classification

/// One calibrated noise measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub power_w: f64,
    pub angle_rad: f64,
    pub rate_cps: f64,
}

/// Mechanism family label used by the classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Fluorescence,
    Sfwm,
    Raman,
}

/// Classifier output: best-fitting family, its parameters, and any families
/// whose residuals tie within [`AMBIGUITY_MARGIN`].
#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub family: Family,
    /// Rate coefficient of the winning family.
    pub amplitude: f64,
    /// Saturation power; present only for fluorescence.
    pub saturation_power_w: Option<f64>,
    pub polarization_contrast: f64,
    /// Root-mean-square relative residual of the winning fit.
    pub residual: f64,
    /// Families (with residuals) within the ambiguity margin of the winner.
    pub ambiguous_with: Vec<(Family, f64)>,
}

/// Relative residual margin under which two families are reported as tied.
pub const AMBIGUITY_MARGIN: f64 = 0.05;

/// Polarization-contrast boundary between the weakly polarized fluorescence
/// family and the co-polarized Raman family. The fit ranges are what make a
/// linear unpolarized curve and a linear co-polarized curve distinguishable
/// at all: fluorescence is fit with `rho` in [0, 0.5], Raman with `rho` in
/// [0.5, 1], matching the observed contrasts of the two mechanisms.
pub const POLARIZATION_SPLIT: f64 = 0.5;

struct FitOutcome {
    amplitude: f64,
    saturation_power_w: Option<f64>,
    rho: f64,
    residual: f64,
}

fn weighted_fit(data: &[Measurement], shape: impl Fn(f64) -> f64, rho: f64) -> (f64, f64) {
    // Best nonnegative amplitude for a fixed shape/contrast, minimizing
    // sum(((A g_i - y_i)/s_i)^2) with s_i = max(y_i, floor).
    let mean_rate = data.iter().map(|m| m.rate_cps).sum::<f64>() / data.len() as f64;
    let floor = (mean_rate * 1e-3).max(1e-300);
    let mut num = 0.0;
    let mut den = 0.0;
    for m in data {
        let c = m.angle_rad.cos();
        let g = shape(m.power_w) * ((1.0 - rho) + rho * c * c);
        let s2 = m.rate_cps.max(floor).powi(2);
        num += g * m.rate_cps / s2;
        den += g * g / s2;
    }
    let a = if den > 0.0 { (num / den).max(0.0) } else { 0.0 };
    let mut sse = 0.0;
    for m in data {
        let c = m.angle_rad.cos();
        let g = shape(m.power_w) * ((1.0 - rho) + rho * c * c);
        let r = (a * g - m.rate_cps) / m.rate_cps.max(floor);
        sse += r * r;
    }
    (a, (sse / data.len() as f64).sqrt())
}

fn fit_over_rho(
    data: &[Measurement],
    shape: impl Fn(f64) -> f64 + Copy,
    rho_range: (f64, f64),
) -> (f64, f64, f64) {
    // Grid over the contrast followed by golden-section refinement.
    const GRID: usize = 51;
    let (lo, hi) = rho_range;
    let mut best = (f64::INFINITY, lo, 0.0);
    for k in 0..GRID {
        let rho = lo + (hi - lo) * k as f64 / (GRID - 1) as f64;
        let (a, res) = weighted_fit(data, shape, rho);
        if res < best.0 {
            best = (res, rho, a);
        }
    }
    let cell = (hi - lo) / (GRID - 1) as f64;
    let (mut a, mut b) = ((best.1 - cell).max(lo), (best.1 + cell).min(hi));
    const PHI: f64 = 0.618_033_988_749_894_8;
    for _ in 0..40 {
        let x1 = b - PHI * (b - a);
        let x2 = a + PHI * (b - a);
        let r1 = weighted_fit(data, shape, x1).1;
        let r2 = weighted_fit(data, shape, x2).1;
        if r1 < r2 {
            b = x2;
        } else {
            a = x1;
        }
    }
    let rho = 0.5 * (a + b);
    let (amp, res) = weighted_fit(data, shape, rho);
    (res, rho, amp)
}

fn fit_family(data: &[Measurement], family: Family) -> FitOutcome {
    match family {
        Family::Sfwm => {
            let (residual, rho, amplitude) = fit_over_rho(data, |p| p * p, (0.0, 1.0));
            FitOutcome {
                amplitude,
                saturation_power_w: None,
                rho,
                residual,
            }
        }
        Family::Raman => {
            let (residual, rho, amplitude) = fit_over_rho(data, |p| p, (POLARIZATION_SPLIT, 1.0));
            FitOutcome {
                amplitude,
                saturation_power_w: None,
                rho,
                residual,
            }
        }
        Family::Fluorescence => {
            // log grid over the saturation power, then local refinement
            let p_max = data.iter().map(|m| m.power_w).fold(0.0, f64::max);
            let p_min = data
                .iter()
                .map(|m| m.power_w)
                .filter(|p| *p > 0.0)
                .fold(f64::INFINITY, f64::min);
            let (lo, hi) = ((p_min / 3.0).max(1e-12), p_max * 300.0);
            const GRID: usize = 61;
            let mut best = (f64::INFINITY, lo, 0.0, 0.0);
            for k in 0..GRID {
                let psat = lo * (hi / lo).powf(k as f64 / (GRID - 1) as f64);
                let (res, rho, amp) =
                    fit_over_rho(data, |p| p / (1.0 + p / psat), (0.0, POLARIZATION_SPLIT));
                if res < best.0 {
                    best = (res, psat, rho, amp);
                }
            }
            let step = (hi / lo).powf(1.0 / (GRID - 1) as f64);
            let (mut a, mut b) = (best.1 / step, best.1 * step);
            for _ in 0..40 {
                let x1 = (a * a * b).cbrt();
                let x2 = (a * b * b).cbrt();
                let r1 = fit_over_rho(data, |p| p / (1.0 + p / x1), (0.0, POLARIZATION_SPLIT)).0;
                let r2 = fit_over_rho(data, |p| p / (1.0 + p / x2), (0.0, POLARIZATION_SPLIT)).0;
                if r1 < r2 {
                    b = x2;
                } else {
                    a = x1;
                }
            }
            let psat = (a * b).sqrt();
            let (residual, rho, amplitude) =
                fit_over_rho(data, |p| p / (1.0 + p / psat), (0.0, POLARIZATION_SPLIT));
            FitOutcome {
                amplitude,
                saturation_power_w: Some(psat),
                rho,
                residual,
            }
        }
    }
}

/// Classify a measurement set into one of the three mechanism families by
/// least-squares fitting all three and returning the lowest-residual one.
///
/// Requires at least 6 points spanning at least one decade of power and at
/// least two analyzer angles. Families with residuals within
/// [`AMBIGUITY_MARGIN`] of the winner are reported in `ambiguous_with`.
pub fn classify_source(data: &[Measurement]) -> Result<Classification> {
    if data.len() < 6 {
        return Err(Error::InsufficientData(format!(
            "need at least 6 measurements, got {}; coverage must span one decade of power and two analyzer angles",
            data.len()
        )));
    }
    for m in data {
        ensure_finite(m.power_w, "measurement power")?;
        ensure_finite(m.angle_rad, "measurement angle")?;
        ensure_finite(m.rate_cps, "measurement rate")?;
    }
    let positive: Vec<f64> = data
        .iter()
        .map(|m| m.power_w)
        .filter(|p| *p > 0.0)
        .collect();
    let p_max = positive.iter().copied().fold(0.0, f64::max);
    let p_min = positive.iter().copied().fold(f64::INFINITY, f64::min);
    if positive.is_empty() || p_max / p_min < 10.0 {
        return Err(Error::InsufficientData(format!(
            "power values must span at least one decade, got [{p_min:.3e}, {p_max:.3e}] W"
        )));
    }
    let mut angles: Vec<f64> = data.iter().map(|m| m.angle_rad).collect();
    angles.sort_by(f64::total_cmp);
    angles.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    if angles.len() < 2 {
        return Err(Error::InsufficientData(
            "need measurements at two or more analyzer angles to constrain the polarization contrast".into(),
        ));
    }

    let families = [Family::Fluorescence, Family::Sfwm, Family::Raman];
    let fits = batch::map(&families, |f| fit_family(data, *f));
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| fits[a].residual.total_cmp(&fits[b].residual));
    let winner = order[0];
    let win = &fits[winner];
    let mut ambiguous = Vec::new();
    for &k in &order[1..] {
        let scale = win.residual.max(1e-12);
        if (fits[k].residual - win.residual) / scale <= AMBIGUITY_MARGIN {
            ambiguous.push((families[k], fits[k].residual));
        }
    }
    Ok(Classification {
        family: families[winner],
        amplitude: win.amplitude,
        saturation_power_w: win.saturation_power_w,
        polarization_contrast: win.rho,
        residual: win.residual,
        ambiguous_with: ambiguous,
    })
}

// ---------------------------------------------------------------------------
// filtering and budgets

/// Kind of spectral filter in a detection chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterKind {
    Bandpass,
    Etalon,
    FiberBragg,
    FreeSpaceGrating,
}

/// One stage of a detection filter chain.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterStage {
    pub kind: FilterKind,
    /// In-band transmission, in (0, 1].
    pub transmission: f64,
    /// Additional suppression applied to broadband sources (dB, >= 0).
    pub broadband_suppression_db: f64,
    /// Free-text bandwidth descriptor, carried for provenance.
    pub bandwidth: Option<String>,
}

impl FilterStage {
    pub fn new(kind: FilterKind, transmission: f64, broadband_suppression_db: f64) -> Result<Self> {
        ensure_finite(transmission, "filter transmission")?;
        ensure_finite(broadband_suppression_db, "filter suppression")?;
        if !(transmission > 0.0 && transmission <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "filter transmission must lie in (0, 1], got {transmission}"
            )));
        }
        if broadband_suppression_db < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "filter suppression must be nonnegative dB, got {broadband_suppression_db}"
            )));
        }
        Ok(Self {
            kind,
            transmission,
            broadband_suppression_db,
            bandwidth: None,
        })
    }

    pub fn with_bandwidth(mut self, descriptor: impl Into<String>) -> Self {
        self.bandwidth = Some(descriptor.into());
        self
    }
}

/// One line of a noise budget.
#[derive(Debug, Clone, PartialEq)]
pub struct BudgetEntry {
    pub label: String,
    pub source: NoiseSource,
    /// Rate generated on-chip (counts/s).
    pub on_chip_cps: f64,
    /// Rate at the detector after the efficiency chain and filters
    /// (counts/s).
    pub detected_cps: f64,
}

/// Per-source on-chip and detected rates, with the off-chip detection
/// efficiency (losses after the chip and detector quantum efficiency).
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseBudget {
    pub entries: Vec<BudgetEntry>,
    pub detection_efficiency: f64,
}

impl NoiseBudget {
    /// Start a budget from labeled sources and their on-chip rates; detected
    /// rates are initialized through the detection efficiency alone.
    pub fn new(
        sources: Vec<(String, NoiseSource, f64)>,
        detection_efficiency: f64,
    ) -> Result<Self> {
        ensure_finite(detection_efficiency, "detection efficiency")?;
        if !(0.0..=1.0).contains(&detection_efficiency) {
            return Err(Error::InvalidParameter(format!(
                "detection efficiency must lie in [0, 1], got {detection_efficiency}"
            )));
        }
        let mut entries = Vec::with_capacity(sources.len());
        for (label, source, on_chip_cps) in sources {
            ensure_finite(on_chip_cps, "on-chip rate")?;
            if on_chip_cps < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "on-chip rate must be nonnegative, got {on_chip_cps}"
                )));
            }
            entries.push(BudgetEntry {
                label,
                source,
                on_chip_cps,
                detected_cps: on_chip_cps * detection_efficiency,
            });
        }
        Ok(Self {
            entries,
            detection_efficiency,
        })
    }

    pub fn total_on_chip_cps(&self) -> f64 {
        self.entries.iter().map(|e| e.on_chip_cps).sum()
    }

    pub fn total_detected_cps(&self) -> f64 {
        self.entries.iter().map(|e| e.detected_cps).sum()
    }
}

/// Apply a filter chain to a budget: every source is multiplied by the
/// product of in-band transmissions; broadband sources additionally receive
/// the summed dB suppression; cavity-resonant sources pass the filter peaks
/// and see transmission only.
pub fn apply_filters(budget: &NoiseBudget, chain: &[FilterStage]) -> Result<NoiseBudget> {
    if chain.is_empty() {
        return Err(Error::InvalidParameter(
            "filter chain must be nonempty".into(),
        ));
    }
    let transmission: f64 = chain.iter().map(|s| s.transmission).product();
    let total_db: f64 = chain.iter().map(|s| s.broadband_suppression_db).sum();
    let broadband_factor = 10f64.powf(-total_db / 10.0);
    let mut out = budget.clone();
    for e in &mut out.entries {
        let f = match e.source.spectral {
            SpectralCharacter::Broadband => transmission * broadband_factor,
            SpectralCharacter::CavityResonant => transmission,
        };
        e.detected_cps = e.on_chip_cps * budget.detection_efficiency * f;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// pump imbalance optimization

/// Noise sources attributed to one pump; total rate is the sum of the
/// member rates at that pump's power.
#[derive(Debug, Clone, Default)]
pub struct PumpNoiseModel {
    pub sources: Vec<NoiseSource>,
}

impl PumpNoiseModel {
    pub fn rate(&self, power_w: f64) -> Result<f64> {
        let mut total = 0.0;
        for s in &self.sources {
            total += noise_rate(s, power_w)?;
        }
        Ok(total)
    }
}

/// Result of [`optimize_imbalance`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImbalanceSolution {
    pub p1_w: f64,
    pub p2_w: f64,
    pub noise_cps: f64,
}

/// Minimize total noise over pump powers subject to the conversion
/// constraint `P1 * P2 >= product_min_w2` and the bounds `P1 <= p1_max_w`,
/// `P2 <= p2_max_w`.
///
/// Noise rates are nondecreasing in power, so the optimum lies on the
/// product boundary; the boundary is searched on a log grid with
/// golden-section refinement. Flat objectives tie-break to balanced pumps.
pub fn optimize_imbalance(
    pump1: &PumpNoiseModel,
    pump2: &PumpNoiseModel,
    product_min_w2: f64,
    p1_max_w: f64,
    p2_max_w: f64,
) -> Result<ImbalanceSolution> {
    ensure_finite(product_min_w2, "product constraint")?;
    ensure_finite(p1_max_w, "pump 1 bound")?;
    ensure_finite(p2_max_w, "pump 2 bound")?;
    if product_min_w2 <= 0.0 || p1_max_w <= 0.0 || p2_max_w <= 0.0 {
        return Err(Error::InvalidParameter(
            "product constraint and pump bounds must be positive".into(),
        ));
    }
    if p1_max_w * p2_max_w < product_min_w2 {
        return Err(Error::Infeasible(format!(
            "pump bounds give a maximum product {:.3e} W^2 below the required {:.3e} W^2",
            p1_max_w * p2_max_w,
            product_min_w2
        )));
    }
    let lo = product_min_w2 / p2_max_w;
    let hi = p1_max_w;
    let objective =
        |p1: f64| -> Result<f64> { Ok(pump1.rate(p1)? + pump2.rate(product_min_w2 / p1)?) };

    // log-grid scan of the product boundary
    const GRID: usize = 2001;
    let mut best_p1 = lo;
    let mut best = objective(lo)?;
    for k in 1..GRID {
        let p1 = if k == GRID - 1 {
            hi
        } else {
            lo * (hi / lo).powf(k as f64 / (GRID - 1) as f64)
        };
        let v = objective(p1)?;
        if v < best {
            best = v;
            best_p1 = p1;
        }
    }
    // golden-section polish around the best cell
    let step = (hi / lo).powf(1.0 / (GRID - 1) as f64);
    let (mut a, mut b) = ((best_p1 / step).max(lo), (best_p1 * step).min(hi));
    for _ in 0..80 {
        let x1 = (a * a * b).cbrt();
        let x2 = (a * b * b).cbrt();
        if objective(x1)? < objective(x2)? {
            b = x2;
        } else {
            a = x1;
        }
    }
    let refined = f64::clamp((a * b).sqrt(), lo, hi);

    // Candidate set with a deterministic tie preference: balanced pumps
    // first, then the exact boundary endpoints, then the refined interior.
    // Endpoint candidates carry the exact bound on the other axis so a
    // pinned optimum is returned without division noise.
    let balanced = product_min_w2.sqrt();
    let mut candidates: Vec<(f64, f64)> = Vec::new();
    if balanced >= lo && balanced <= hi {
        candidates.push((balanced, balanced));
    }
    candidates.push((lo, p2_max_w));
    candidates.push((hi, product_min_w2 / hi));
    candidates.push((refined, product_min_w2 / refined));
    let mut sol = candidates[0];
    let mut sol_obj = pump1.rate(sol.0)? + pump2.rate(sol.1)?;
    for &(p1, p2) in &candidates[1..] {
        let v = pump1.rate(p1)? + pump2.rate(p2)?;
        if v < sol_obj * (1.0 - 1e-12) {
            sol_obj = v;
            sol = (p1, p2);
        }
    }
    Ok(ImbalanceSolution {
        p1_w: sol.0,
        p2_w: sol.1,
        noise_cps: sol_obj,
    })
}
