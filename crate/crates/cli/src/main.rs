use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use qfc_cli::config::{load_config, load_config_text, PRESET_NAMES};
use qfc_cli::error::CliError;
use qfc_cli::scenario::{run_once, run_sweep};
use qfc_cli::table::{fnv1a64, Column, Provenance, ResultTable, Row};
use qfc_core::batch;
use qfc_core::noise::{classify_source, Family, Measurement};
use qfc_core::photon::{delay_histogram, parse_timetags};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Parser)]
#[command(
    name = "qfc",
    version,
    about = "Cavity BS-FWM frequency-converter studies: runs, sweeps, noise classification, coincidence histograms",
    after_help = format!("CONFIG accepts a file path or a preset name ({}).", PRESET_NAMES.join(", "))
)]
struct Cli {
    /// Write the result table here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,
    /// Override the scenario RNG seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Limit the worker thread count for sweeps.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the configured quantity once.
    Run { config: String },
    /// Evaluate the configured quantity over the sweep grid.
    Sweep { config: String },
    /// Classify measured noise rates (CSV: power_w,angle_rad,rate_cps).
    ClassifyNoise { csv: String },
    /// Histogram delays between two channels of a time-tag file.
    Histogram {
        timetags: String,
        #[arg(long)]
        ch_a: u32,
        #[arg(long)]
        ch_b: u32,
        /// Bin width in picoseconds.
        #[arg(long)]
        bin_ps: i64,
        /// Half range in picoseconds; delays span [-range, +range].
        #[arg(long)]
        range_ps: i64,
    },
    /// Parse and validate a config, echoing the effective values.
    Validate { config: String },
}

fn emit(table: &ResultTable, format: Format, out: Option<&PathBuf>) -> Result<(), CliError> {
    let text = match format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(),
    };
    match out {
        None => {
            print!("{text}");
            std::io::stdout()
                .flush()
                .map_err(|e| CliError::Io(format!("stdout: {e}")))
        }
        Some(path) => {
            std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
        }
    }
}

fn classify_noise_cmd(csv_path: &str) -> Result<ResultTable, CliError> {
    let text =
        std::fs::read_to_string(csv_path).map_err(|e| CliError::Io(format!("{csv_path}: {e}")))?;
    let mut lines = text.lines().enumerate();
    let header = lines
        .next()
        .ok_or_else(|| CliError::Config(format!("{csv_path}: empty file")))?
        .1
        .trim()
        .to_lowercase();
    if header != "power_w,angle_rad,rate_cps" {
        return Err(CliError::Config(format!(
            "{csv_path}: expected header power_w,angle_rad,rate_cps, found {header:?}"
        )));
    }
    let mut data = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(CliError::Config(format!(
                "{csv_path}: line {}: expected 3 fields",
                idx + 1
            )));
        }
        let parse = |s: &str, what: &str| -> Result<f64, CliError> {
            s.parse().map_err(|_| {
                CliError::Config(format!("{csv_path}: line {}: bad {what} {s:?}", idx + 1))
            })
        };
        data.push(Measurement {
            power_w: parse(fields[0], "power")?,
            angle_rad: parse(fields[1], "angle")?,
            rate_cps: parse(fields[2], "rate")?,
        });
    }
    let result = classify_source(&data).map_err(|e| CliError::Eval(e.to_string()))?;
    let family_code = |f: Family| match f {
        Family::Fluorescence => 0.0,
        Family::Sfwm => 1.0,
        Family::Raman => 2.0,
    };
    Ok(ResultTable {
        columns: vec![
            Column::new("family", "0:fluorescence|1:sfwm|2:raman"),
            Column::new("amplitude", "cps/W|cps/W^2"),
            Column::new("saturation_power", "W"),
            Column::new("polarization_contrast", "-"),
            Column::new("residual", "-"),
            Column::new("ambiguous", "0|1"),
        ],
        rows: vec![Row {
            values: vec![
                family_code(result.family),
                result.amplitude,
                result.saturation_power_w.unwrap_or(f64::NAN),
                result.polarization_contrast,
                result.residual,
                if result.ambiguous_with.is_empty() {
                    0.0
                } else {
                    1.0
                },
            ],
            error: None,
        }],
        provenance: Provenance {
            config_hash: format!("{:016x}", fnv1a64(text.as_bytes())),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: 0,
            note: None,
        },
    })
}

fn histogram_cmd(
    path: &str,
    ch_a: u32,
    ch_b: u32,
    bin_ps: i64,
    range_ps: i64,
) -> Result<ResultTable, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{path}: {e}")))?;
    let stream = parse_timetags(&text).map_err(|e| CliError::Eval(e.to_string()))?;
    let hist = delay_histogram(&stream, ch_a, ch_b, bin_ps, (-range_ps, range_ps))
        .map_err(|e| CliError::Eval(e.to_string()))?;
    let rows = (0..hist.n_bins())
        .map(|k| Row {
            values: vec![hist.bin_center_ps(k), hist.counts[k] as f64],
            error: None,
        })
        .collect();
    let args_echo =
        format!("histogram: ch_a={ch_a} ch_b={ch_b} bin_ps={bin_ps} range_ps={range_ps}\n{text}");
    Ok(ResultTable {
        columns: vec![
            Column::new("delay_ps", "ps"),
            Column::new("counts", "counts"),
        ],
        rows,
        provenance: Provenance {
            config_hash: format!("{:016x}", fnv1a64(args_echo.as_bytes())),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: 0,
            note: None,
        },
    })
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Run { config } => {
            let (_, scenario) = load_config(config)?;
            let table = batch::with_thread_limit(cli.jobs, || run_once(&scenario, cli.seed))?;
            emit(&table, cli.format, cli.out.as_ref())
        }
        Command::Sweep { config } => {
            let (raw, scenario) = load_config(config)?;
            let table =
                batch::with_thread_limit(cli.jobs, || run_sweep(&raw, &scenario, cli.seed))?;
            emit(&table, cli.format, cli.out.as_ref())
        }
        Command::ClassifyNoise { csv } => {
            let table = classify_noise_cmd(csv)?;
            emit(&table, cli.format, cli.out.as_ref())
        }
        Command::Histogram {
            timetags,
            ch_a,
            ch_b,
            bin_ps,
            range_ps,
        } => {
            let table = histogram_cmd(timetags, *ch_a, *ch_b, *bin_ps, *range_ps)?;
            emit(&table, cli.format, cli.out.as_ref())
        }
        Command::Validate { config } => {
            let text = load_config_text(config)?;
            let raw = qfc_cli::config::RawConfig::parse(&text)?;
            let scenario = qfc_cli::config::ScenarioConfig::resolve(&raw)?;
            print!("{}", scenario.echo);
            println!("# config_hash = {}", scenario.config_hash);
            println!("# ok");
            Ok(())
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
