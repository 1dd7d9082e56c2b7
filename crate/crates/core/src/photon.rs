//! Monte-Carlo time-tag streams and coincidence analysis for a heralded
//! photon-pair source feeding a frequency converter.
//!
//! Pairs are emitted as a Poisson process; each member independently
//! survives its arm (herald arm, or the converted arm whose efficiency
//! folds conversion, collection, and detector efficiency together), picks
//! up a fixed arm delay plus Gaussian timing jitter, and is merged with
//! independent Poisson noise on each detector channel. Timestamps are
//! integer picoseconds so streams serialize exactly; generation is
//! single-threaded per stream and bit-reproducible from the seed. Detector
//! dead time and afterpulsing are not modeled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{ensure_finite, Error, Result};

/// Channel id used for the heralding detector.
pub const HERALD_CHANNEL: u32 = 1;
/// Channel id used for the converted/partner detector.
pub const CONVERTED_CHANNEL: u32 = 2;

/// Configuration of one simulated run.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceConfig {
    /// Pair emission rate (pairs/s).
    pub pair_rate_hz: f64,
    /// Survival probability of the heralding arm.
    pub herald_efficiency: f64,
    /// Total survival probability of the converted arm
    /// (conversion x collection x detector).
    pub converted_efficiency: f64,
    /// Uncorrelated background rate on the herald channel (counts/s).
    pub herald_noise_cps: f64,
    /// Uncorrelated background rate on the converted channel (counts/s).
    pub converted_noise_cps: f64,
    /// Gaussian timing jitter sigma on the herald channel (s).
    pub herald_jitter_s: f64,
    /// Gaussian timing jitter sigma on the converted channel (s).
    pub converted_jitter_s: f64,
    /// Fixed delay of the converted arm relative to the herald (s).
    pub arm_delay_s: f64,
    /// Emission window length (s). Bounds pair and noise emission times;
    /// delayed or jittered detection timestamps may land past it.
    pub duration_s: f64,
    /// RNG seed; equal seeds and configs give bit-identical streams.
    pub seed: u64,
}

impl SourceConfig {
    pub fn validate(&self) -> Result<()> {
        for (v, what) in [
            (self.pair_rate_hz, "pair rate"),
            (self.herald_noise_cps, "herald noise rate"),
            (self.converted_noise_cps, "converted noise rate"),
            (self.herald_jitter_s, "herald jitter"),
            (self.converted_jitter_s, "converted jitter"),
        ] {
            ensure_finite(v, what)?;
            if v < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{what} must be nonnegative, got {v}"
                )));
            }
        }
        for (v, what) in [
            (self.herald_efficiency, "herald efficiency"),
            (self.converted_efficiency, "converted efficiency"),
        ] {
            ensure_finite(v, what)?;
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!(
                    "{what} must lie in [0, 1], got {v}"
                )));
            }
        }
        ensure_finite(self.arm_delay_s, "arm delay")?;
        ensure_finite(self.duration_s, "duration")?;
        if self.duration_s <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "duration must be positive, got {}",
                self.duration_s
            )));
        }
        Ok(())
    }
}

/// One detector event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeTag {
    pub channel: u32,
    pub timestamp_ps: i64,
}

/// An ordered stream of detector events, sorted by (timestamp, channel);
/// per-channel timestamps are therefore nondecreasing.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TimeTagStream {
    events: Vec<TimeTag>,
}

impl TimeTagStream {
    /// Build from unordered events; sorts into canonical order.
    pub fn from_events(mut events: Vec<TimeTag>) -> Self {
        events.sort_by_key(|e| (e.timestamp_ps, e.channel));
        Self { events }
    }

    pub fn events(&self) -> &[TimeTag] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Number of events on one channel.
    pub fn channel_count(&self, channel: u32) -> usize {
        self.events.iter().filter(|e| e.channel == channel).count()
    }

    /// Timestamps of one channel, in order.
    pub fn channel_timestamps(&self, channel: u32) -> Vec<i64> {
        self.events
            .iter()
            .filter(|e| e.channel == channel)
            .map(|e| e.timestamp_ps)
            .collect()
    }
}

fn exp_gap(rng: &mut ChaCha8Rng, rate_hz: f64) -> f64 {
    let u: f64 = rng.random();
    -(1.0 - u).ln() / rate_hz
}

fn to_ps(t_s: f64) -> i64 {
    (t_s * 1e12).round() as i64
}

/// Generate a detector time-tag stream for the configured run. Pairs are
/// Poissonian at `pair_rate_hz`; arm survival is an independent coin per
/// photon; survivors get their arm delay plus Gaussian jitter; independent
/// Poisson noise is merged per channel. Events jittered to negative times
/// are dropped.
pub fn generate_stream(cfg: &SourceConfig) -> Result<TimeTagStream> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut events = Vec::new();

    if cfg.pair_rate_hz > 0.0 {
        let mut t = 0.0;
        loop {
            t += exp_gap(&mut rng, cfg.pair_rate_hz);
            if t >= cfg.duration_s {
                break;
            }
            let herald: bool = rng.random::<f64>() < cfg.herald_efficiency;
            let converted: bool = rng.random::<f64>() < cfg.converted_efficiency;
            if herald {
                let jitter: f64 = StandardNormal.sample(&mut rng);
                let ts = to_ps(t + jitter * cfg.herald_jitter_s);
                if ts >= 0 {
                    events.push(TimeTag {
                        channel: HERALD_CHANNEL,
                        timestamp_ps: ts,
                    });
                }
            }
            if converted {
                let jitter: f64 = StandardNormal.sample(&mut rng);
                let ts = to_ps(t + cfg.arm_delay_s + jitter * cfg.converted_jitter_s);
                if ts >= 0 {
                    events.push(TimeTag {
                        channel: CONVERTED_CHANNEL,
                        timestamp_ps: ts,
                    });
                }
            }
        }
    }
    for (channel, rate) in [
        (HERALD_CHANNEL, cfg.herald_noise_cps),
        (CONVERTED_CHANNEL, cfg.converted_noise_cps),
    ] {
        if rate > 0.0 {
            let mut t = 0.0;
            loop {
                t += exp_gap(&mut rng, rate);
                if t >= cfg.duration_s {
                    break;
                }
                events.push(TimeTag {
                    channel,
                    timestamp_ps: to_ps(t),
                });
            }
        }
    }
    Ok(TimeTagStream::from_events(events))
}

// ---------------------------------------------------------------------------
// serialization

/// Header line of the time-tag interchange format.
pub const TIMETAG_HEADER: &str = "#timetags v1";

/// Serialize a stream: header line, then one `channel<TAB>timestamp_ps`
/// line per event in stream order.
pub fn serialize_timetags(stream: &TimeTagStream) -> String {
    let mut out = String::with_capacity(16 + stream.len() * 16);
    out.push_str(TIMETAG_HEADER);
    out.push('\n');
    for e in stream.events() {
        out.push_str(&e.channel.to_string());
        out.push('\t');
        out.push_str(&e.timestamp_ps.to_string());
        out.push('\n');
    }
    out
}

/// Parse the time-tag interchange format. Empty input parses as an empty
/// stream; any nonempty input must begin with the `#timetags v1` header.
/// Malformed channels or timestamps, and per-channel timestamp regressions,
/// are reported with their line numbers.
pub fn parse_timetags(input: &str) -> Result<TimeTagStream> {
    if input.trim().is_empty() {
        return Ok(TimeTagStream::default());
    }
    let mut lines = input.lines().enumerate();
    match lines.next() {
        Some((_, first)) if first.trim_end() == TIMETAG_HEADER => {}
        Some((_, first)) => {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected header {TIMETAG_HEADER:?}, found {first:?}"),
            })
        }
        None => return Ok(TimeTagStream::default()),
    }
    let mut events = Vec::new();
    let mut last_per_channel: std::collections::BTreeMap<u32, i64> = Default::default();
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split('\t');
        let (ch_str, ts_str) = match (fields.next(), fields.next(), fields.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("expected `channel<TAB>timestamp_ps`, found {line:?}"),
                })
            }
        };
        let channel: u32 = ch_str.trim().parse().map_err(|e| Error::Parse {
            line: lineno,
            message: format!("bad channel {ch_str:?}: {e}"),
        })?;
        let timestamp_ps: i64 = ts_str.trim().parse().map_err(|e| Error::Parse {
            line: lineno,
            message: format!("bad timestamp {ts_str:?}: {e}"),
        })?;
        if let Some(&last) = last_per_channel.get(&channel) {
            if timestamp_ps < last {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!(
                        "non-monotone timestamp on channel {channel}: {timestamp_ps} after {last}"
                    ),
                });
            }
        }
        last_per_channel.insert(channel, timestamp_ps);
        events.push(TimeTag {
            channel,
            timestamp_ps,
        });
    }
    Ok(TimeTagStream::from_events(events))
}

// ---------------------------------------------------------------------------
// histograms and coincidence metrics

/// Histogram of inter-channel delays `t_b - t_a`.
///
/// Bin `k` covers the half-open interval
/// `(min + k w, min + (k+1) w]` ps — delays exactly on an interior bin edge
/// go to the lower bin — except that a delay exactly at the histogram lower
/// edge is kept in bin 0.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayHistogram {
    /// Bin width (ps).
    pub bin_width_ps: i64,
    /// Lower edge of the first bin (ps).
    pub min_delay_ps: i64,
    /// Counts per bin.
    pub counts: Vec<u64>,
    /// Observation span of the participating channels (ps), used to convert
    /// counts into rates.
    pub span_ps: i64,
}

impl DelayHistogram {
    pub fn n_bins(&self) -> usize {
        self.counts.len()
    }

    /// Upper edge of the last bin (ps).
    pub fn max_delay_ps(&self) -> i64 {
        self.min_delay_ps + self.bin_width_ps * self.counts.len() as i64
    }

    /// Center of bin `k` (ps).
    pub fn bin_center_ps(&self, k: usize) -> f64 {
        self.min_delay_ps as f64 + (k as f64 + 0.5) * self.bin_width_ps as f64
    }

    pub fn total_counts(&self) -> u64 {
        self.counts.iter().sum()
    }

    fn bin_index(&self, delay_ps: i64) -> Option<usize> {
        let off = delay_ps - self.min_delay_ps;
        if off < 0 {
            return None;
        }
        let idx = if off == 0 {
            0
        } else {
            (off - 1).div_euclid(self.bin_width_ps) as usize
        };
        (idx < self.counts.len()).then_some(idx)
    }
}

/// Histogram the delays `t_b - t_a` between all event pairs of channels
/// `ch_a` and `ch_b` falling inside `range_ps`, with a linear two-pointer
/// sweep over the sorted streams. Swapping the channels mirrors the
/// histogram about zero delay.
pub fn delay_histogram(
    stream: &TimeTagStream,
    ch_a: u32,
    ch_b: u32,
    bin_width_ps: i64,
    range_ps: (i64, i64),
) -> Result<DelayHistogram> {
    if bin_width_ps <= 0 {
        return Err(Error::InvalidParameter(format!(
            "bin width must be positive, got {bin_width_ps} ps"
        )));
    }
    let (min, max) = range_ps;
    if max <= min {
        return Err(Error::InvalidParameter(format!(
            "delay range must have max > min, got [{min}, {max}] ps"
        )));
    }
    // whole bins only: the histogram covers [min, min + n_bins * width],
    // never extending past the requested range
    let n_bins = ((max - min) / bin_width_ps) as usize;
    if n_bins < 3 {
        return Err(Error::InvalidParameter(format!(
            "delay range must span at least 3 bins, got {n_bins}"
        )));
    }
    let a = stream.channel_timestamps(ch_a);
    if a.is_empty() {
        return Err(Error::UnknownChannel(ch_a));
    }
    let b = stream.channel_timestamps(ch_b);
    if b.is_empty() {
        return Err(Error::UnknownChannel(ch_b));
    }

    let mut hist = DelayHistogram {
        bin_width_ps,
        min_delay_ps: min,
        counts: vec![0; n_bins],
        span_ps: {
            let lo = a[0].min(b[0]);
            let hi = *a.last().unwrap().max(b.last().unwrap());
            (hi - lo).max(1)
        },
    };
    let span = bin_width_ps * n_bins as i64;
    let (mut lo, mut hi) = (0usize, 0usize);
    for &ta in &a {
        let w_lo = ta + min;
        let w_hi = ta + min + span;
        while lo < b.len() && b[lo] < w_lo {
            lo += 1;
        }
        if hi < lo {
            hi = lo;
        }
        while hi < b.len() && b[hi] <= w_hi {
            hi += 1;
        }
        for &tb in &b[lo..hi] {
            if let Some(k) = hist.bin_index(tb - ta) {
                hist.counts[k] += 1;
            }
        }
    }
    Ok(hist)
}

/// Coincidence figures extracted from a delay histogram.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoincidenceMetrics {
    /// Raw counts inside the peak window.
    pub peak_counts: u64,
    /// Number of bins inside the peak window.
    pub peak_bins: usize,
    /// Accidental estimate per bin, the mean of all bins lying outside
    /// three times the peak window.
    pub accidental_per_bin: f64,
    /// Background-subtracted coincidence rate (counts/s).
    pub true_rate_cps: f64,
    /// Accidental rate inside the peak window (counts/s).
    pub accidental_rate_cps: f64,
    /// Coincidence-to-accidental ratio `(peak - accidentals)/accidentals`;
    /// `None` flags a zero accidental estimate (infinite CAR).
    pub car: Option<f64>,
}

/// Compute coincidence metrics from a histogram given a peak window
/// `(lo, hi)` in ps. Bins whose centers fall inside the window form the
/// peak; accidentals are estimated from bins outside a 3x-widened window.
pub fn coincidence_metrics(
    hist: &DelayHistogram,
    peak_window_ps: (i64, i64),
) -> Result<CoincidenceMetrics> {
    let (w_lo, w_hi) = peak_window_ps;
    if w_hi <= w_lo {
        return Err(Error::InvalidParameter(format!(
            "peak window must have hi > lo, got [{w_lo}, {w_hi}] ps"
        )));
    }
    if w_lo < hist.min_delay_ps || w_hi > hist.max_delay_ps() {
        return Err(Error::InvalidParameter(format!(
            "peak window [{w_lo}, {w_hi}] ps outside histogram range [{}, {}] ps",
            hist.min_delay_ps,
            hist.max_delay_ps()
        )));
    }
    let center = 0.5 * (w_lo + w_hi) as f64;
    let half = 0.5 * (w_hi - w_lo) as f64;
    let mut peak_counts = 0u64;
    let mut peak_bins = 0usize;
    let mut off_sum = 0u64;
    let mut off_bins = 0usize;
    for (k, &c) in hist.counts.iter().enumerate() {
        let x = hist.bin_center_ps(k);
        if (x - center).abs() <= half {
            peak_counts += c;
            peak_bins += 1;
        } else if (x - center).abs() > 3.0 * half {
            off_sum += c;
            off_bins += 1;
        }
    }
    if peak_bins == 0 {
        return Err(Error::InvalidParameter(
            "peak window narrower than one bin: no bin centers inside".into(),
        ));
    }
    let accidental_per_bin = if off_bins > 0 {
        off_sum as f64 / off_bins as f64
    } else {
        0.0
    };
    let accidental_in_peak = accidental_per_bin * peak_bins as f64;
    let span_s = hist.span_ps as f64 * 1e-12;
    let car = if accidental_in_peak > 0.0 {
        Some((peak_counts as f64 - accidental_in_peak) / accidental_in_peak)
    } else {
        None
    };
    Ok(CoincidenceMetrics {
        peak_counts,
        peak_bins,
        accidental_per_bin,
        true_rate_cps: (peak_counts as f64 - accidental_in_peak) / span_s,
        accidental_rate_cps: accidental_in_peak / span_s,
        car,
    })
}
