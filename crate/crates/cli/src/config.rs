//! Scenario configuration: a flat, sectioned key-value text format with
//! units spelled out in key names (`power_w`, `wavelength_nm`, ...).
//!
//! ```text
//! # comment
//! [signal]
//! wavelength_nm = 1260.0
//! loaded_q = 4.5e5
//! coupling_ratio = 0.5
//! nonlinear_param_per_w_m = 2.0
//! ```
//!
//! Unknown keys are rejected with their `section.key` path; defaults are
//! filled in during resolution and echoed back so the provenance hash
//! covers the complete effective configuration.

use std::collections::BTreeMap;

use qfc_core::cmt::{q_to_loss, ModeParams, ResonatorGeometry};
use qfc_core::dispersion::DispersionProfile;
use qfc_core::noise::{
    FilterKind, FilterStage, Mechanism, NoiseSource, PumpNoiseModel, SpectralCharacter,
};
use qfc_core::photon::SourceConfig;
use qfc_core::units::{nm_to_angular, thz_to_angular};

use crate::error::CliError;
use crate::table::fnv1a64;

/// Parsed but unresolved config text: ordered map of sections to key/value
/// strings. Kept around so sweeps can override a single key and re-resolve.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut sections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        let mut current: Option<String> = None;
        for (idx, raw_line) in text.lines().enumerate() {
            let line = match raw_line.find('#') {
                Some(pos) => &raw_line[..pos],
                None => raw_line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let lineno = idx + 1;
            if let Some(name) = line.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or_else(|| {
                    CliError::Config(format!(
                        "line {lineno}: unterminated section header {line:?}"
                    ))
                })?;
                let name = name.trim();
                if name.is_empty() {
                    return Err(CliError::Config(format!(
                        "line {lineno}: empty section name"
                    )));
                }
                sections.entry(name.to_string()).or_default();
                current = Some(name.to_string());
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!(
                    "line {lineno}: expected `key = value`, found {line:?}"
                ))
            })?;
            let section = current.clone().ok_or_else(|| {
                CliError::Config(format!("line {lineno}: key before any [section] header"))
            })?;
            let entry = sections.entry(section.clone()).or_default();
            let key = key.trim().to_string();
            if entry.contains_key(&key) {
                return Err(CliError::Config(format!(
                    "line {lineno}: duplicate key {section}.{key}"
                )));
            }
            entry.insert(key, value.trim().to_string());
        }
        Ok(Self { sections })
    }

    /// Override one `section.key` path (the path splits at the last dot).
    pub fn set(&mut self, path: &str, value: &str) -> Result<(), CliError> {
        let (section, key) = path
            .rsplit_once('.')
            .ok_or_else(|| CliError::Config(format!("bad parameter path {path:?}")))?;
        self.sections
            .get_mut(section)
            .and_then(|s| s.get_mut(key))
            .map(|v| *v = value.to_string())
            .ok_or_else(|| CliError::Config(format!("sweep parameter path {path} not found")))
    }

    pub fn contains(&self, path: &str) -> bool {
        path.rsplit_once('.')
            .map(|(section, key)| {
                self.sections
                    .get(section)
                    .map(|s| s.contains_key(key))
                    .unwrap_or(false)
            })
            .unwrap_or(false)
    }

    fn section_names(&self) -> Vec<String> {
        self.sections.keys().cloned().collect()
    }
}

/// Tracks key consumption so unknown keys can be reported, and records the
/// effective (default-applied) value of every consumed key for the echo.
struct Reader<'a> {
    raw: &'a RawConfig,
    consumed: BTreeMap<String, Vec<String>>,
    echo: BTreeMap<String, String>,
}

/// Compact, re-parseable float formatting for the canonical echo.
fn fmt_f64(v: f64) -> String {
    if v == 0.0 || (v.abs() >= 1e-3 && v.abs() < 1e7) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

impl<'a> Reader<'a> {
    fn new(raw: &'a RawConfig) -> Self {
        Self {
            raw,
            consumed: BTreeMap::new(),
            echo: BTreeMap::new(),
        }
    }

    fn has_section(&self, section: &str) -> bool {
        self.raw.sections.contains_key(section)
    }

    fn raw_value(&mut self, section: &str, key: &str) -> Option<String> {
        let v = self
            .raw
            .sections
            .get(section)
            .and_then(|s| s.get(key))
            .cloned();
        if v.is_some() {
            self.consumed
                .entry(section.to_string())
                .or_default()
                .push(key.to_string());
        }
        v
    }

    fn record(&mut self, section: &str, key: &str, value: impl std::fmt::Display) {
        self.echo
            .insert(format!("{section}.{key}"), value.to_string());
    }

    fn f64_opt(&mut self, section: &str, key: &str) -> Result<Option<f64>, CliError> {
        match self.raw_value(section, key) {
            None => Ok(None),
            Some(v) => {
                let parsed: f64 = v.parse().map_err(|_| {
                    CliError::Config(format!("{section}.{key}: expected a number, got {v:?}"))
                })?;
                self.record(section, key, fmt_f64(parsed));
                Ok(Some(parsed))
            }
        }
    }

    fn f64_required(&mut self, section: &str, key: &str) -> Result<f64, CliError> {
        self.f64_opt(section, key)?
            .ok_or_else(|| CliError::Config(format!("{section}.{key}: missing required key")))
    }

    fn f64_default(&mut self, section: &str, key: &str, default: f64) -> Result<f64, CliError> {
        match self.f64_opt(section, key)? {
            Some(v) => Ok(v),
            None => {
                self.record(section, key, fmt_f64(default));
                Ok(default)
            }
        }
    }

    fn u64_default(&mut self, section: &str, key: &str, default: u64) -> Result<u64, CliError> {
        match self.raw_value(section, key) {
            None => {
                self.record(section, key, default);
                Ok(default)
            }
            Some(v) => {
                let parsed: u64 = v.parse().map_err(|_| {
                    CliError::Config(format!("{section}.{key}: expected an integer, got {v:?}"))
                })?;
                self.record(section, key, parsed);
                Ok(parsed)
            }
        }
    }

    fn i64_default(&mut self, section: &str, key: &str, default: i64) -> Result<i64, CliError> {
        match self.raw_value(section, key) {
            None => {
                self.record(section, key, default);
                Ok(default)
            }
            Some(v) => {
                let parsed: i64 = v.parse().map_err(|_| {
                    CliError::Config(format!("{section}.{key}: expected an integer, got {v:?}"))
                })?;
                self.record(section, key, parsed);
                Ok(parsed)
            }
        }
    }

    fn string_opt(&mut self, section: &str, key: &str) -> Option<String> {
        let v = self.raw_value(section, key);
        if let Some(ref s) = v {
            self.record(section, key, s);
        }
        v
    }

    fn string_required(&mut self, section: &str, key: &str) -> Result<String, CliError> {
        self.string_opt(section, key)
            .ok_or_else(|| CliError::Config(format!("{section}.{key}: missing required key")))
    }

    fn f64_list(&mut self, section: &str, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        match self.raw_value(section, key) {
            None => Ok(None),
            Some(v) => {
                let parsed: Result<Vec<f64>, _> =
                    v.split(',').map(|t| t.trim().parse::<f64>()).collect();
                let list = parsed.map_err(|_| {
                    CliError::Config(format!(
                        "{section}.{key}: expected a number list, got {v:?}"
                    ))
                })?;
                self.record(
                    section,
                    key,
                    list.iter()
                        .copied()
                        .map(fmt_f64)
                        .collect::<Vec<_>>()
                        .join(", "),
                );
                Ok(Some(list))
            }
        }
    }

    /// Error out on any key the resolver never consumed.
    fn finish_unknown_check(self) -> Result<BTreeMap<String, String>, CliError> {
        for (section, keys) in &self.raw.sections {
            let consumed = self.consumed.get(section);
            for key in keys.keys() {
                let seen = consumed.map(|c| c.contains(key)).unwrap_or(false);
                if !seen {
                    return Err(CliError::Config(format!("unknown key: {section}.{key}")));
                }
            }
        }
        Ok(self.echo)
    }
}

/// Which quantity `run`/`sweep` evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Conversion,
    CouplingStudy,
    Noise,
    NoiseImbalance,
    Coincidence,
}

impl Quantity {
    fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "conversion" => Ok(Self::Conversion),
            "coupling_study" => Ok(Self::CouplingStudy),
            "noise" => Ok(Self::Noise),
            "noise_imbalance" => Ok(Self::NoiseImbalance),
            "coincidence" => Ok(Self::Coincidence),
            other => Err(CliError::Config(format!(
                "run.quantity: unknown quantity {other:?} (expected conversion, coupling_study, noise, noise_imbalance, coincidence)"
            ))),
        }
    }
}

/// One pump: its cavity mode parameters, on-chip drive power, and detuning.
#[derive(Debug, Clone, PartialEq)]
pub struct PumpSpec {
    pub mode: ModeParams,
    pub on_chip_power_w: f64,
    pub detuning: f64,
}

/// A labeled noise source with its pump attribution.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedSource {
    pub label: String,
    pub source: NoiseSource,
    /// true = high-frequency pump, false = low-frequency pump
    pub pump_high: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub parameter: String,
    pub min: f64,
    pub max: f64,
    pub log_spacing: bool,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImbalanceSpec {
    pub product_min_w2: f64,
    pub p1_max_w: f64,
    pub p2_max_w: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhotonSpec {
    pub source: SourceConfig,
    pub hist_bin_ps: i64,
    pub hist_range_ps: i64,
    /// Half-width of the coincidence peak window around the arm delay (ps).
    pub peak_window_ps: i64,
}

/// Fully resolved scenario: validated domain objects plus the canonical
/// echo text and its hash.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub quantity: Quantity,
    pub geometry: Option<ResonatorGeometry>,
    pub signal: Option<ModeParams>,
    pub idler: Option<ModeParams>,
    pub pump_high: Option<PumpSpec>,
    pub pump_low: Option<PumpSpec>,
    pub dispersion: Option<DispersionProfile>,
    pub noise_sources: Vec<NamedSource>,
    pub filters: Vec<FilterStage>,
    pub detection_efficiency: f64,
    pub photon: Option<PhotonSpec>,
    pub sweep: Option<SweepSpec>,
    pub imbalance: Option<ImbalanceSpec>,
    pub coupling_ratios: Vec<f64>,
    /// Optional provenance qualifier (e.g. "calibrated"), echoed into
    /// result tables.
    pub provenance_note: Option<String>,
    /// Canonical echo of every effective key, one `section.key = value`
    /// line, sorted.
    pub echo: String,
    /// FNV-1a of the echo, hex.
    pub config_hash: String,
}

fn mode_from(
    reader: &mut Reader,
    section: &str,
    geometry: Option<&ResonatorGeometry>,
) -> Result<ModeParams, CliError> {
    let wavelength_nm = reader.f64_required(section, "wavelength_nm")?;
    let wavelength_m = wavelength_nm * 1e-9;
    let loss = match reader.f64_opt(section, "loss_per_roundtrip")? {
        Some(a) => a,
        None => {
            let q = reader.f64_opt(section, "loaded_q")?.ok_or_else(|| {
                CliError::Config(format!("{section}: need loss_per_roundtrip or loaded_q"))
            })?;
            let geom = geometry.ok_or_else(|| {
                CliError::Config(format!(
                    "{section}.loaded_q: requires a [geometry] section to convert into a roundtrip loss"
                ))
            })?;
            q_to_loss(q, wavelength_m, geom)
                .map_err(|e| CliError::Config(format!("{section}.loaded_q: {e}")))?
        }
    };
    let coupling = match reader.f64_opt(section, "coupling_per_roundtrip")? {
        Some(t) => t,
        None => {
            let ratio = reader.f64_opt(section, "coupling_ratio")?.ok_or_else(|| {
                CliError::Config(format!(
                    "{section}: need coupling_per_roundtrip or coupling_ratio"
                ))
            })?;
            ratio * loss
        }
    };
    let gamma = reader.f64_required(section, "nonlinear_param_per_w_m")?;
    ModeParams::new(wavelength_m, loss, coupling, gamma)
        .map_err(|e| CliError::Config(format!("{section}: {e}")))
}

fn pump_from(
    reader: &mut Reader,
    section: &str,
    geometry: Option<&ResonatorGeometry>,
) -> Result<PumpSpec, CliError> {
    let mode = mode_from(reader, section, geometry)?;
    let on_chip_power_w = reader.f64_required(section, "on_chip_power_w")?;
    if !(on_chip_power_w.is_finite() && on_chip_power_w >= 0.0) {
        return Err(CliError::Config(format!(
            "{section}.on_chip_power_w: must be nonnegative, got {on_chip_power_w}"
        )));
    }
    let detuning = reader.f64_default(section, "detuning_rad", 0.0)?;
    Ok(PumpSpec {
        mode,
        on_chip_power_w,
        detuning,
    })
}

fn noise_source_from(reader: &mut Reader, section: &str) -> Result<NamedSource, CliError> {
    let label = section
        .strip_prefix("noise.")
        .unwrap_or(section)
        .to_string();
    let mech_name = reader.string_required(section, "mechanism")?;
    let rho = reader.f64_default(section, "polarization_contrast", 0.0)?;
    let spectral = match reader
        .string_opt(section, "spectral")
        .unwrap_or_else(|| "broadband".into())
        .as_str()
    {
        "broadband" => SpectralCharacter::Broadband,
        "cavity_resonant" => SpectralCharacter::CavityResonant,
        other => {
            return Err(CliError::Config(format!(
                "{section}.spectral: expected broadband or cavity_resonant, got {other:?}"
            )))
        }
    };
    let (mechanism, amplitude) = match mech_name.as_str() {
        "fluorescence" => {
            let a = reader.f64_required(section, "amplitude_cps_per_w")?;
            let psat = reader.f64_required(section, "saturation_power_w")?;
            (
                Mechanism::Fluorescence {
                    saturation_power_w: psat,
                },
                a,
            )
        }
        "raman" => (
            Mechanism::Raman,
            reader.f64_required(section, "amplitude_cps_per_w")?,
        ),
        "sfwm" => (
            Mechanism::Sfwm,
            reader.f64_required(section, "amplitude_cps_per_w2")?,
        ),
        other => {
            return Err(CliError::Config(format!(
                "{section}.mechanism: expected fluorescence, sfwm or raman, got {other:?}"
            )))
        }
    };
    let source = NoiseSource::new(mechanism, amplitude, rho, spectral)
        .map_err(|e| CliError::Config(format!("{section}: {e}")))?;
    let pump_high = match reader
        .string_opt(section, "pump")
        .unwrap_or_else(|| "high".into())
        .as_str()
    {
        "high" => true,
        "low" => false,
        other => {
            return Err(CliError::Config(format!(
                "{section}.pump: expected high or low, got {other:?}"
            )))
        }
    };
    Ok(NamedSource {
        label,
        source,
        pump_high,
    })
}

fn filter_from(reader: &mut Reader, section: &str) -> Result<FilterStage, CliError> {
    let kind = match reader.string_required(section, "kind")?.as_str() {
        "bandpass" => FilterKind::Bandpass,
        "etalon" => FilterKind::Etalon,
        "fbg" => FilterKind::FiberBragg,
        "free_space_grating" => FilterKind::FreeSpaceGrating,
        other => {
            return Err(CliError::Config(format!(
            "{section}.kind: expected bandpass, etalon, fbg or free_space_grating, got {other:?}"
        )))
        }
    };
    let transmission = reader.f64_required(section, "transmission")?;
    let suppression = reader.f64_default(section, "suppression_db", 0.0)?;
    let stage = FilterStage::new(kind, transmission, suppression)
        .map_err(|e| CliError::Config(format!("{section}: {e}")))?;
    Ok(match reader.string_opt(section, "bandwidth") {
        Some(b) => stage.with_bandwidth(b),
        None => stage,
    })
}

impl ScenarioConfig {
    pub fn resolve(raw: &RawConfig) -> Result<Self, CliError> {
        let mut reader = Reader::new(raw);

        let quantity = Quantity::parse(
            &reader
                .string_opt("run", "quantity")
                .unwrap_or_else(|| "conversion".into()),
        )?;
        reader.record(
            "run",
            "quantity",
            match quantity {
                Quantity::Conversion => "conversion",
                Quantity::CouplingStudy => "coupling_study",
                Quantity::Noise => "noise",
                Quantity::NoiseImbalance => "noise_imbalance",
                Quantity::Coincidence => "coincidence",
            },
        );
        let provenance_note = reader.string_opt("run", "provenance_note");

        let geometry = if reader.has_section("geometry") {
            let l = reader.f64_required("geometry", "circumference_m")?;
            let geom = match reader.f64_opt("geometry", "roundtrip_time_s")? {
                Some(tr) => ResonatorGeometry::new(l, tr),
                None => {
                    let ng = reader.f64_required("geometry", "group_index")?;
                    ResonatorGeometry::from_group_index(l, ng)
                }
            }
            .map_err(|e| CliError::Config(format!("geometry: {e}")))?;
            Some(geom)
        } else {
            None
        };

        let mode_section =
            |reader: &mut Reader, name: &str| -> Result<Option<ModeParams>, CliError> {
                if reader.has_section(name) {
                    Ok(Some(mode_from(reader, name, geometry.as_ref())?))
                } else {
                    Ok(None)
                }
            };
        let signal = mode_section(&mut reader, "signal")?;
        let idler = mode_section(&mut reader, "idler")?;
        let pump_high = if reader.has_section("pump_high") {
            Some(pump_from(&mut reader, "pump_high", geometry.as_ref())?)
        } else {
            None
        };
        let pump_low = if reader.has_section("pump_low") {
            Some(pump_from(&mut reader, "pump_low", geometry.as_ref())?)
        } else {
            None
        };

        let dispersion = if reader.has_section("dispersion") {
            let omega0 = match reader.f64_opt("dispersion", "ref_frequency_thz")? {
                Some(thz) => thz_to_angular(thz),
                None => nm_to_angular(reader.f64_required("dispersion", "ref_wavelength_nm")?),
            };
            let coeffs = reader
                .f64_list("dispersion", "beta_coeffs")?
                .ok_or_else(|| {
                    CliError::Config("dispersion.beta_coeffs: missing required key".into())
                })?;
            let window = (
                thz_to_angular(reader.f64_required("dispersion", "window_min_thz")?),
                thz_to_angular(reader.f64_required("dispersion", "window_max_thz")?),
            );
            Some(
                DispersionProfile::new(omega0, coeffs, window)
                    .map_err(|e| CliError::Config(format!("dispersion: {e}")))?,
            )
        } else {
            None
        };

        let mut noise_sources = Vec::new();
        for section in raw.section_names() {
            if section.starts_with("noise.") {
                noise_sources.push(noise_source_from(&mut reader, &section)?);
            }
        }
        let mut filters = Vec::new();
        for section in raw.section_names() {
            if section.starts_with("filter.") {
                filters.push(filter_from(&mut reader, &section)?);
            }
        }
        let detection_efficiency = if reader.has_section("detection") {
            reader.f64_default("detection", "efficiency", 1.0)?
        } else {
            1.0
        };

        let photon = if reader.has_section("photon_stats") {
            let source = SourceConfig {
                pair_rate_hz: reader.f64_required("photon_stats", "pair_rate_hz")?,
                herald_efficiency: reader.f64_required("photon_stats", "herald_efficiency")?,
                converted_efficiency: reader
                    .f64_required("photon_stats", "converted_efficiency")?,
                herald_noise_cps: reader.f64_default("photon_stats", "herald_noise_cps", 0.0)?,
                converted_noise_cps: reader.f64_default(
                    "photon_stats",
                    "converted_noise_cps",
                    0.0,
                )?,
                herald_jitter_s: reader.f64_default("photon_stats", "herald_jitter_ps", 100.0)?
                    * 1e-12,
                converted_jitter_s: reader.f64_default(
                    "photon_stats",
                    "converted_jitter_ps",
                    100.0,
                )? * 1e-12,
                arm_delay_s: reader.f64_default("photon_stats", "arm_delay_ps", 0.0)? * 1e-12,
                duration_s: reader.f64_required("photon_stats", "duration_s")?,
                seed: reader.u64_default("photon_stats", "seed", 1)?,
            };
            source
                .validate()
                .map_err(|e| CliError::Config(format!("photon_stats: {e}")))?;
            Some(PhotonSpec {
                source,
                hist_bin_ps: reader.i64_default("photon_stats", "hist_bin_ps", 100)?,
                hist_range_ps: reader.i64_default("photon_stats", "hist_range_ps", 5000)?,
                peak_window_ps: reader.i64_default("photon_stats", "peak_window_ps", 500)?,
            })
        } else {
            None
        };

        let sweep = if reader.has_section("sweep") {
            let parameter = reader.string_required("sweep", "parameter")?;
            if !raw.contains(&parameter) {
                return Err(CliError::Config(format!(
                    "sweep.parameter: path {parameter} not present in the config"
                )));
            }
            let points = reader.u64_default("sweep", "points", 10)? as usize;
            if points < 2 {
                return Err(CliError::Config(format!(
                    "sweep.points: need at least 2 points, got {points}"
                )));
            }
            let min = reader.f64_required("sweep", "min")?;
            let max = reader.f64_required("sweep", "max")?;
            if min == max {
                return Err(CliError::Config(
                    "sweep: zero-length range (min == max)".into(),
                ));
            }
            let log_spacing = match reader
                .string_opt("sweep", "spacing")
                .unwrap_or_else(|| "linear".into())
                .as_str()
            {
                "linear" => false,
                "log" => true,
                other => {
                    return Err(CliError::Config(format!(
                        "sweep.spacing: expected linear or log, got {other:?}"
                    )))
                }
            };
            if log_spacing && (min <= 0.0 || max <= 0.0) {
                return Err(CliError::Config(
                    "sweep: log spacing requires positive bounds".into(),
                ));
            }
            Some(SweepSpec {
                parameter,
                min,
                max,
                log_spacing,
                points,
            })
        } else {
            None
        };

        let imbalance = if reader.has_section("imbalance") {
            Some(ImbalanceSpec {
                product_min_w2: reader.f64_required("imbalance", "product_min_w2")?,
                p1_max_w: reader.f64_required("imbalance", "p1_max_w")?,
                p2_max_w: reader.f64_required("imbalance", "p2_max_w")?,
            })
        } else {
            None
        };

        let coupling_ratios = if reader.has_section("coupling_study") {
            reader
                .f64_list("coupling_study", "ratios")?
                .unwrap_or_else(|| vec![0.8, 0.5, 0.2])
        } else {
            vec![0.8, 0.5, 0.2]
        };

        // quantity-specific section requirements
        let need = |ok: bool, what: &str| -> Result<(), CliError> {
            if ok {
                Ok(())
            } else {
                Err(CliError::Config(format!(
                    "quantity requires a [{what}] section"
                )))
            }
        };
        match quantity {
            Quantity::Conversion | Quantity::CouplingStudy => {
                need(geometry.is_some(), "geometry")?;
                need(signal.is_some(), "signal")?;
                need(idler.is_some(), "idler")?;
                need(pump_high.is_some(), "pump_high")?;
                need(pump_low.is_some(), "pump_low")?;
            }
            Quantity::Noise => {
                need(!noise_sources.is_empty(), "noise.<label>")?;
                need(pump_high.is_some(), "pump_high")?;
                need(pump_low.is_some(), "pump_low")?;
            }
            Quantity::NoiseImbalance => {
                need(!noise_sources.is_empty(), "noise.<label>")?;
                need(imbalance.is_some(), "imbalance")?;
            }
            Quantity::Coincidence => need(photon.is_some(), "photon_stats")?,
        }

        let echo_map = reader.finish_unknown_check()?;
        let mut echo = String::new();
        for (path, value) in &echo_map {
            echo.push_str(path);
            echo.push_str(" = ");
            echo.push_str(value);
            echo.push('\n');
        }
        let config_hash = format!("{:016x}", fnv1a64(echo.as_bytes()));

        Ok(Self {
            quantity,
            geometry,
            signal,
            idler,
            pump_high,
            pump_low,
            dispersion,
            noise_sources,
            filters,
            detection_efficiency,
            photon,
            sweep,
            imbalance,
            coupling_ratios,
            provenance_note,
            echo,
            config_hash,
        })
    }

    /// Noise models per pump, for the imbalance optimizer.
    pub fn pump_noise_models(&self) -> (PumpNoiseModel, PumpNoiseModel) {
        let mut high = PumpNoiseModel::default();
        let mut low = PumpNoiseModel::default();
        for s in &self.noise_sources {
            if s.pump_high {
                high.sources.push(s.source);
            } else {
                low.sources.push(s.source);
            }
        }
        (high, low)
    }
}

/// Shipped scenario presets, selectable by name wherever a config path is
/// accepted.
pub const PRESET_NAMES: [&str; 4] = [
    "paper-device",
    "fig1a-coupling",
    "noise-imbalance",
    "coincidence",
];

pub fn preset(name: &str) -> Option<&'static str> {
    match name {
        "paper-device" => Some(include_str!("../presets/paper_device.cfg")),
        "fig1a-coupling" => Some(include_str!("../presets/fig1a_coupling.cfg")),
        "noise-imbalance" => Some(include_str!("../presets/noise_imbalance.cfg")),
        "coincidence" => Some(include_str!("../presets/coincidence.cfg")),
        _ => None,
    }
}

/// Load config text from a filesystem path or a preset name.
pub fn load_config_text(path_or_preset: &str) -> Result<String, CliError> {
    let p = std::path::Path::new(path_or_preset);
    if p.exists() {
        return std::fs::read_to_string(p)
            .map_err(|e| CliError::Io(format!("{path_or_preset}: {e}")));
    }
    if let Some(text) = preset(path_or_preset) {
        return Ok(text.to_string());
    }
    Err(CliError::Io(format!(
        "{path_or_preset}: no such file, and not a preset (presets: {})",
        PRESET_NAMES.join(", ")
    )))
}

/// Parse and resolve a config from a path or preset name.
pub fn load_config(path_or_preset: &str) -> Result<(RawConfig, ScenarioConfig), CliError> {
    let text = load_config_text(path_or_preset)?;
    let raw = RawConfig::parse(&text)?;
    let scenario = ScenarioConfig::resolve(&raw)?;
    Ok((raw, scenario))
}
