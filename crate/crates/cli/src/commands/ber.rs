use crate::error::{CliError, CliResult};
use crate::manifest::{resolve_out, sibling, Manifest, Recorder};
use crate::physics::PhysicsArgs;
use clap::Args;
use qrng_core::bitpipe::{ber_model, ber_poisson, empirical_ber, extract_bits, ClockConfig, Symbol};
use qrng_core::timetag::{CoincidenceFilter, EventStream, SourceConfig};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::PathBuf;

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct BerArgs {
    /// Target bit generation rate R_B (D1D2 + D3D4 coincidences), Hz.
    #[arg(long, default_value_t = 668.0)]
    pub rate: f64,
    /// Counting clock frequencies, Hz.
    #[arg(long, value_delimiter = ',', default_value = "1000,2000,5000,10000,20000,50000")]
    pub freqs: Vec<f64>,
    /// Simulated time, s.
    #[arg(long, default_value_t = 2000.0)]
    pub duration: f64,
    /// Interferometer delay, fs.
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub delay: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV [default: $QRNG_OUT_DIR/ber.csv].
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub physics: PhysicsArgs,
}

pub const CSV_HEADER: &str =
    "frequency_hz,rate_hz,model_ber,poisson_ber,empirical_ber,sigma,records,errors\n";

pub fn run(mut args: BerArgs) -> CliResult<Manifest> {
    if args.freqs.is_empty() {
        return Err(CliError::Usage("--freqs needs at least one frequency".into()));
    }
    let clocks = args
        .freqs
        .iter()
        .map(|&f| {
            let clock = ClockConfig::new(f).map_err(CliError::usage)?;
            let model = ber_model(args.rate, &clock).map_err(CliError::usage)?;
            Ok((clock, model))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let out = resolve_out(args.out.as_deref(), "ber.csv");
    args.out = Some(out.clone());

    let pair_rate = args.physics.pair_rate_for_bit_rate(args.rate)?;
    let source = SourceConfig::new(pair_rate, args.duration, args.seed).map_err(CliError::usage)?;
    let interf = args.physics.interferometer(args.delay)?;
    let timing = args.physics.timing()?;
    let stream = EventStream::new(&source, &interf, &args.physics.bank()?, &timing).map_err(CliError::usage)?;
    let mut filter = CoincidenceFilter::new(stream, &timing);
    let same_arm: Vec<_> = filter.by_ref().filter(|c| !c.pair.is_cross_arm()).collect();
    let measured_rate = same_arm.len() as f64 / args.duration;

    let mut csv = String::from(CSV_HEADER);
    let mut rows = Vec::new();
    for (clock, model) in &clocks {
        let records = extract_bits(&same_arm, clock).map_err(CliError::usage)?;
        let empirical = empirical_ber(&records);
        let errors = records.iter().filter(|r| r.symbol == Symbol::Error).count();
        let n = records.len() as f64;
        let sigma = if n > 0.0 { (model * (1.0 - model) / n).sqrt() } else { 0.0 };
        let poisson = ber_poisson(args.rate, clock).map_err(CliError::usage)?;
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            clock.frequency_hz(),
            measured_rate,
            model,
            poisson,
            empirical,
            sigma,
            records.len(),
            errors
        )
        .expect("write to string");
        println!(
            "f = {:>9} Hz  model {:.6}  empirical {:.6} ± {:.6}  ({} records)",
            clock.frequency_hz(),
            model,
            empirical,
            sigma,
            records.len()
        );
        rows.push(serde_json::json!({
            "frequency_hz": clock.frequency_hz(),
            "model_ber": model,
            "empirical_ber": empirical,
            "sigma": sigma,
        }));
    }

    let mut rec = Recorder::new("ber-scan", &args, Some(args.seed));
    let mut configs = args.physics.configs_json(&interf)?;
    configs["source"] = serde_json::to_value(source).expect("serializes");
    rec.configs(configs);
    rec.summary(serde_json::json!({
        "measured_rate_hz": measured_rate,
        "coincidence_stats": filter.stats(),
        "points": rows,
    }));
    rec.output("ber", &out, csv.as_bytes())?;
    println!("wrote {}", out.display());
    rec.finish(&sibling(&out, ".manifest.json"))
}
