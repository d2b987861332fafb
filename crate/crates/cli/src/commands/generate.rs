use super::FormatArg;
use crate::error::{CliError, CliResult};
use crate::manifest::{resolve_out, sibling, Manifest, Recorder};
use crate::physics::PhysicsArgs;
use clap::Args;
use qrng_core::bitpipe::{
    empirical_ber, error_log_csv, format, split_records, BitExtractor, ClockConfig,
};
use qrng_core::timetag::{
    CoincidenceFilter, EventStream, MonitorReport, MonitorVerdict, SourceConfig, PS_PER_SECOND,
};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct GenerateArgs {
    /// Counting clock frequency, Hz.
    #[arg(long, default_value_t = 500_000.0)]
    pub clock: f64,
    /// Simulated acquisition time, s.
    #[arg(long, default_value_t = 60.0)]
    pub duration: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Interferometer delay, fs.
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub delay: f64,
    #[arg(long, value_enum, default_value_t = FormatArg::Ascii)]
    pub format: FormatArg,
    /// Output bit file [default: $QRNG_OUT_DIR/bits.txt or bits.bin].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Target bit generation rate R_B at zero delay, Hz.
    #[arg(long, default_value_t = 668.0)]
    pub rate: f64,
    /// Pair emission rate, Hz; overrides --rate.
    #[arg(long)]
    pub pair_rate: Option<f64>,
    /// Alarm when one monitor interval holds more isolated cross-arm
    /// coincidences. Accidentals from two emissions that each leave a single
    /// click arrive at about 1e-3 /s at the default rate.
    #[arg(long, default_value_t = 1)]
    pub monitor_threshold: u64,
    /// Monitor interval, s.
    #[arg(long, default_value_t = 1.0)]
    pub monitor_interval: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub physics: PhysicsArgs,
}

/// Cross-arm coincidence counts over tumbling intervals.
struct IntervalMonitor {
    interval_ps: i64,
    threshold: u64,
    current: Option<i64>,
    count: u64,
    total: u64,
    max_count: u64,
}

impl IntervalMonitor {
    fn observe(&mut self, time_ps: i64) -> MonitorReport {
        let interval = time_ps.div_euclid(self.interval_ps);
        if self.current != Some(interval) {
            self.current = Some(interval);
            self.count = 0;
        }
        self.count += 1;
        self.total += 1;
        self.max_count = self.max_count.max(self.count);
        MonitorReport::from_count(self.count, self.threshold)
    }
}

pub fn run(mut args: GenerateArgs) -> CliResult<Manifest> {
    if !(args.monitor_interval.is_finite() && args.monitor_interval > 0.0) {
        return Err(CliError::Usage(format!(
            "--monitor-interval must be positive, got {}",
            args.monitor_interval
        )));
    }
    let interval_ps = (args.monitor_interval * PS_PER_SECOND).round() as i64;
    if interval_ps < 1 {
        return Err(CliError::Usage("--monitor-interval is below 1 ps".into()));
    }
    let clock = ClockConfig::new(args.clock).map_err(CliError::usage)?;
    let default_name = match args.format {
        FormatArg::Ascii => "bits.txt",
        FormatArg::Packed => "bits.bin",
    };
    let out = resolve_out(args.out.as_deref(), default_name);
    args.out = Some(out.clone());

    let pair_rate = match args.pair_rate {
        Some(r) => r,
        None => args.physics.pair_rate_for_bit_rate(args.rate)?,
    };
    let source = SourceConfig::new(pair_rate, args.duration, args.seed).map_err(CliError::usage)?;
    let interf = args.physics.interferometer(args.delay)?;
    let timing = args.physics.timing()?;
    let stream = EventStream::new(&source, &interf, &args.physics.bank()?, &timing)
        .map_err(CliError::usage)?;
    let mut filter = CoincidenceFilter::new(stream, &timing);
    let mut monitor = IntervalMonitor {
        interval_ps,
        threshold: args.monitor_threshold,
        current: None,
        count: 0,
        total: 0,
        max_count: 0,
    };
    let mut extractor = BitExtractor::new(clock);
    let mut records = Vec::new();
    let mut multi_pair_cross_arm = 0u64;
    while let Some(tagged) = filter.next_tagged() {
        let c = tagged.event;
        if c.pair.is_cross_arm() && tagged.multi_click {
            multi_pair_cross_arm += 1;
            continue;
        }
        if c.pair.is_cross_arm() {
            let report = monitor.observe(c.time_ps);
            if report.verdict == MonitorVerdict::Alarm {
                eprintln!(
                    "alarm at t = {:.6} s ({} in the {} s interval)",
                    c.time_ps as f64 / PS_PER_SECOND,
                    c.pair,
                    args.monitor_interval
                );
                return Err(CliError::Alarm(report));
            }
            continue;
        }
        records.extend(extractor.push(&c).map_err(CliError::usage)?);
    }
    records.extend(extractor.finish());

    let ber = empirical_ber(&records);
    let (bits, errors) = split_records(&records);
    let encoded = format::encode(&bits, args.format.into());
    println!(
        "{} bits, {} error periods (BER {:.3e}), {} isolated cross-arm coincidences, {} more in multi-click windows",
        bits.len(),
        errors.len(),
        ber,
        monitor.total,
        multi_pair_cross_arm
    );

    let mut rec = Recorder::new("generate", &args, Some(args.seed));
    let mut configs = args.physics.configs_json(&interf)?;
    configs["source"] = serde_json::to_value(source).expect("serializes");
    configs["clock"] = serde_json::to_value(clock).expect("serializes");
    rec.configs(configs);
    rec.summary(serde_json::json!({
        "bits": bits.len(),
        "ones": bits.ones(),
        "error_periods": errors.len(),
        "empirical_ber": ber,
        "coincidence_stats": filter.stats(),
        "monitor": {
            "verdict": MonitorVerdict::Ok,
            "threshold": args.monitor_threshold,
            "interval_s": args.monitor_interval,
            "cross_arm_total": monitor.total,
            "cross_arm_max_per_interval": monitor.max_count,
            "cross_arm_multi_click": multi_pair_cross_arm,
        },
    }));
    rec.output("bits", &out, &encoded)?;
    rec.output("errors", &sibling(&out, ".errors.csv"), error_log_csv(&errors).as_bytes())?;
    println!("wrote {}", out.display());
    rec.finish(&sibling(&out, ".manifest.json"))
}
