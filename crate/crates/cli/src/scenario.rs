//! Scenario evaluation: turns a resolved config into result-table rows for
//! the configured quantity, and runs sweeps over any numeric config path.

use qfc_core::cmt::{max_efficiency, pump_buildup, ModeParams, Regime};
use qfc_core::dispersion::{bsfwm_mismatch, classify_sfwm, FrequencyQuartet, SfwmClassification};
use qfc_core::noise::{apply_filters, noise_rate, optimize_imbalance, NoiseBudget};
use qfc_core::photon::{
    coincidence_metrics, delay_histogram, generate_stream, CONVERTED_CHANNEL, HERALD_CHANNEL,
};
use qfc_core::units::{angular_to_nm, angular_to_thz, wavelength_to_angular};
use qfc_core::{batch, Error};

use crate::config::{Quantity, RawConfig, ScenarioConfig};
use crate::error::CliError;
use crate::table::{Column, Provenance, ResultTable, Row};

fn regime_flag(regime: Regime) -> f64 {
    match regime {
        Regime::Underpumped => -1.0,
        Regime::Boundary => 0.0,
        Regime::Overpumped => 1.0,
    }
}

/// Column layout of one quantity under a given scenario. Static so sweep
/// tables stay rectangular even when individual points fail.
pub fn columns_for(scenario: &ScenarioConfig) -> Vec<Column> {
    match scenario.quantity {
        Quantity::Conversion => {
            let mut cols = vec![
                Column::new("p1_intracavity", "W"),
                Column::new("p2_intracavity", "W"),
                Column::new("cooperativity", "-"),
                Column::new("regime", "-1:under|0:boundary|1:over"),
                Column::new("eta_max", "-"),
                Column::new("eta_ceiling", "-"),
                Column::new("delta_c_opt", "rad"),
                Column::new("delta_d_opt", "rad"),
            ];
            if scenario.dispersion.is_some() {
                cols.extend([
                    Column::new("quartet_idler", "nm"),
                    Column::new("signal_idler_span", "THz"),
                    Column::new("bsfwm_mismatch", "1/m"),
                    Column::new("gvd_pump_high", "s^2/m"),
                    Column::new("gvd_pump_low", "s^2/m"),
                    Column::new("sfwm_matched_high", "0|1"),
                    Column::new("sfwm_matched_low", "0|1"),
                ]);
            }
            cols
        }
        Quantity::CouplingStudy => {
            let mut cols = vec![Column::new("cooperativity", "-")];
            for (i, _) in scenario.coupling_ratios.iter().enumerate() {
                cols.push(Column::new(format!("coupling_ratio_{}", i + 1), "-"));
                cols.push(Column::new(format!("eta_{}", i + 1), "-"));
            }
            cols
        }
        Quantity::Noise => {
            let mut cols = Vec::new();
            for s in &scenario.noise_sources {
                cols.push(Column::new(format!("on_chip_{}", s.label), "counts/s"));
                cols.push(Column::new(format!("detected_{}", s.label), "counts/s"));
            }
            cols.push(Column::new("total_on_chip", "counts/s"));
            cols.push(Column::new("total_detected", "counts/s"));
            cols
        }
        Quantity::NoiseImbalance => vec![
            Column::new("p1", "W"),
            Column::new("p2", "W"),
            Column::new("power_product", "W^2"),
            Column::new("predicted_noise", "counts/s"),
        ],
        Quantity::Coincidence => vec![
            Column::new("herald_counts", "counts"),
            Column::new("converted_counts", "counts"),
            Column::new("peak_counts", "counts"),
            Column::new("accidental_per_bin", "counts"),
            Column::new("true_rate", "counts/s"),
            Column::new("accidental_rate", "counts/s"),
            Column::new("car", "-"),
            Column::new("car_infinite", "0|1"),
        ],
    }
}

fn eval_err(e: Error) -> CliError {
    CliError::Eval(e.to_string())
}

fn conversion_row(scenario: &ScenarioConfig) -> Result<Vec<f64>, CliError> {
    let geometry = scenario.geometry.as_ref().expect("validated");
    let signal = scenario.signal.as_ref().expect("validated");
    let idler = scenario.idler.as_ref().expect("validated");
    let hi = scenario.pump_high.as_ref().expect("validated");
    let lo = scenario.pump_low.as_ref().expect("validated");
    let p1 = pump_buildup(&hi.mode, hi.on_chip_power_w, hi.detuning).map_err(eval_err)?;
    let p2 = pump_buildup(&lo.mode, lo.on_chip_power_w, lo.detuning).map_err(eval_err)?;
    let res = max_efficiency(signal, idler, geometry, p1, p2).map_err(eval_err)?;
    let ceiling =
        signal.coupling_ratio() * idler.coupling_ratio() * idler.nonlinearity / signal.nonlinearity;
    let mut row = vec![
        p1,
        p2,
        res.cooperativity,
        regime_flag(res.regime),
        res.efficiency,
        ceiling,
        res.optimal_detunings.0,
        res.optimal_detunings.1,
    ];
    if let Some(profile) = &scenario.dispersion {
        let w_s = wavelength_to_angular(signal.wavelength_m);
        let w_hi = wavelength_to_angular(hi.mode.wavelength_m);
        let w_lo = wavelength_to_angular(lo.mode.wavelength_m);
        let quartet = FrequencyQuartet::from_three(w_s, w_hi, w_lo).map_err(eval_err)?;
        let matched = |pump_omega: f64, power: f64, gamma: f64| -> Result<f64, CliError> {
            Ok(
                match classify_sfwm(profile, pump_omega, power, gamma).map_err(eval_err)? {
                    SfwmClassification::PhaseMatched { .. } => 1.0,
                    SfwmClassification::NotPhaseMatched => 0.0,
                },
            )
        };
        row.extend([
            angular_to_nm(quartet.omega_idler()),
            angular_to_thz(quartet.omega_idler() - quartet.omega_signal()),
            bsfwm_mismatch(profile, &quartet).map_err(eval_err)?,
            profile.gvd(w_hi).map_err(eval_err)?,
            profile.gvd(w_lo).map_err(eval_err)?,
            matched(w_hi, p1, hi.mode.nonlinearity)?,
            matched(w_lo, p2, lo.mode.nonlinearity)?,
        ]);
    }
    Ok(row)
}

fn coupling_study_row(scenario: &ScenarioConfig) -> Result<Vec<f64>, CliError> {
    let geometry = scenario.geometry.as_ref().expect("validated");
    let signal = scenario.signal.as_ref().expect("validated");
    let idler = scenario.idler.as_ref().expect("validated");
    let hi = scenario.pump_high.as_ref().expect("validated");
    let lo = scenario.pump_low.as_ref().expect("validated");
    let p1 = pump_buildup(&hi.mode, hi.on_chip_power_w, hi.detuning).map_err(eval_err)?;
    let p2 = pump_buildup(&lo.mode, lo.on_chip_power_w, lo.detuning).map_err(eval_err)?;
    // cooperativity is coupling-independent: one shared column
    let base = max_efficiency(signal, idler, geometry, p1, p2).map_err(eval_err)?;
    let mut row = vec![base.cooperativity];
    for &ratio in &scenario.coupling_ratios {
        let with_ratio = |m: &ModeParams| {
            ModeParams::new(
                m.wavelength_m,
                m.total_loss,
                ratio * m.total_loss,
                m.nonlinearity,
            )
        };
        let s = with_ratio(signal).map_err(eval_err)?;
        let i = with_ratio(idler).map_err(eval_err)?;
        let res = max_efficiency(&s, &i, geometry, p1, p2).map_err(eval_err)?;
        row.push(ratio);
        row.push(res.efficiency);
    }
    Ok(row)
}

fn noise_row(scenario: &ScenarioConfig) -> Result<Vec<f64>, CliError> {
    let hi = scenario.pump_high.as_ref().expect("validated");
    let lo = scenario.pump_low.as_ref().expect("validated");
    let mut labeled = Vec::new();
    for s in &scenario.noise_sources {
        let power = if s.pump_high {
            hi.on_chip_power_w
        } else {
            lo.on_chip_power_w
        };
        let on_chip = noise_rate(&s.source, power).map_err(eval_err)?;
        labeled.push((s.label.clone(), s.source, on_chip));
    }
    let budget = NoiseBudget::new(labeled, scenario.detection_efficiency).map_err(eval_err)?;
    let budget = if scenario.filters.is_empty() {
        budget
    } else {
        apply_filters(&budget, &scenario.filters).map_err(eval_err)?
    };
    let mut row = Vec::new();
    for e in &budget.entries {
        row.push(e.on_chip_cps);
        row.push(e.detected_cps);
    }
    row.push(budget.total_on_chip_cps());
    row.push(budget.total_detected_cps());
    Ok(row)
}

fn imbalance_row(scenario: &ScenarioConfig) -> Result<Vec<f64>, CliError> {
    let spec = scenario.imbalance.as_ref().expect("validated");
    let (high, low) = scenario.pump_noise_models();
    let sol = optimize_imbalance(
        &high,
        &low,
        spec.product_min_w2,
        spec.p1_max_w,
        spec.p2_max_w,
    )
    .map_err(eval_err)?;
    Ok(vec![sol.p1_w, sol.p2_w, sol.p1_w * sol.p2_w, sol.noise_cps])
}

fn coincidence_row(
    scenario: &ScenarioConfig,
    seed_override: Option<u64>,
) -> Result<Vec<f64>, CliError> {
    let spec = scenario.photon.as_ref().expect("validated");
    let mut cfg = spec.source.clone();
    if let Some(seed) = seed_override {
        cfg.seed = seed;
    }
    let stream = generate_stream(&cfg).map_err(eval_err)?;
    let hist = delay_histogram(
        &stream,
        HERALD_CHANNEL,
        CONVERTED_CHANNEL,
        spec.hist_bin_ps,
        (-spec.hist_range_ps, spec.hist_range_ps),
    )
    .map_err(eval_err)?;
    let delay_ps = (cfg.arm_delay_s * 1e12).round() as i64;
    let metrics = coincidence_metrics(
        &hist,
        (
            delay_ps - spec.peak_window_ps,
            delay_ps + spec.peak_window_ps,
        ),
    )
    .map_err(eval_err)?;
    Ok(vec![
        stream.channel_count(HERALD_CHANNEL) as f64,
        stream.channel_count(CONVERTED_CHANNEL) as f64,
        metrics.peak_counts as f64,
        metrics.accidental_per_bin,
        metrics.true_rate_cps,
        metrics.accidental_rate_cps,
        metrics.car.unwrap_or(f64::NAN),
        if metrics.car.is_none() { 1.0 } else { 0.0 },
    ])
}

/// Evaluate the configured quantity once.
pub fn evaluate(
    scenario: &ScenarioConfig,
    seed_override: Option<u64>,
) -> Result<Vec<f64>, CliError> {
    match scenario.quantity {
        Quantity::Conversion => conversion_row(scenario),
        Quantity::CouplingStudy => coupling_study_row(scenario),
        Quantity::Noise => noise_row(scenario),
        Quantity::NoiseImbalance => imbalance_row(scenario),
        Quantity::Coincidence => coincidence_row(scenario, seed_override),
    }
}

/// Effective seed recorded in provenance: explicit override, else the
/// photon seed, else 0.
pub fn effective_seed(scenario: &ScenarioConfig, seed_override: Option<u64>) -> u64 {
    seed_override.unwrap_or_else(|| scenario.photon.as_ref().map(|p| p.source.seed).unwrap_or(0))
}

fn provenance(scenario: &ScenarioConfig, seed_override: Option<u64>) -> Provenance {
    Provenance {
        config_hash: scenario.config_hash.clone(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: effective_seed(scenario, seed_override),
        note: scenario.provenance_note.clone(),
    }
}

/// `run`: a single-row table for the configured quantity.
pub fn run_once(
    scenario: &ScenarioConfig,
    seed_override: Option<u64>,
) -> Result<ResultTable, CliError> {
    let values = evaluate(scenario, seed_override)?;
    Ok(ResultTable {
        columns: columns_for(scenario),
        rows: vec![Row {
            values,
            error: None,
        }],
        provenance: provenance(scenario, seed_override),
    })
}

/// The sweep grid: exact endpoints, linear or logarithmic interior points.
/// A descending range (`min > max`) yields exactly the ascending grid in
/// reversed order, so reversed sweeps reproduce identical values.
pub fn sweep_grid(min: f64, max: f64, points: usize, log_spacing: bool) -> Vec<f64> {
    if min > max {
        let mut grid = sweep_grid(max, min, points, log_spacing);
        grid.reverse();
        return grid;
    }
    let n = points.max(2);
    (0..n)
        .map(|k| {
            if k == 0 {
                min
            } else if k == n - 1 {
                max
            } else {
                let t = k as f64 / (n - 1) as f64;
                if log_spacing {
                    (min.ln() + (max.ln() - min.ln()) * t).exp()
                } else {
                    min + (max - min) * t
                }
            }
        })
        .collect()
}

/// `sweep`: evaluate the quantity over the configured grid. Each grid point
/// re-resolves the config with the swept key overridden; per-point failures
/// become NaN rows tagged with the error message, and the run continues.
/// Points are evaluated in parallel (with the `parallel` feature) and
/// assembled in grid order.
pub fn run_sweep(
    raw: &RawConfig,
    scenario: &ScenarioConfig,
    seed_override: Option<u64>,
) -> Result<ResultTable, CliError> {
    let sweep = scenario
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("sweep requested but no [sweep] section".into()))?;
    let grid = sweep_grid(sweep.min, sweep.max, sweep.points, sweep.log_spacing);
    let mut columns = vec![Column::new(sweep.parameter.clone(), "swept")];
    columns.extend(columns_for(scenario));
    let n_value_cols = columns.len() - 1;

    let rows: Vec<Row> = batch::map(&grid, |&value| {
        let point = (|| -> Result<Vec<f64>, CliError> {
            let mut raw_point = raw.clone();
            raw_point.set(&sweep.parameter, &format!("{value}"))?;
            let scenario_point = ScenarioConfig::resolve(&raw_point)?;
            evaluate(&scenario_point, seed_override)
        })();
        match point {
            Ok(mut values) => {
                let mut row = vec![value];
                row.append(&mut values);
                Row {
                    values: row,
                    error: None,
                }
            }
            Err(e) => {
                let mut row = vec![value];
                row.extend(std::iter::repeat_n(f64::NAN, n_value_cols));
                Row {
                    values: row,
                    error: Some(e.to_string()),
                }
            }
        }
    });

    Ok(ResultTable {
        columns,
        rows,
        provenance: provenance(scenario, seed_override),
    })
}
