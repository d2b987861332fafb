use crate::error::{CliError, CliResult};
use crate::manifest::{resolve_out, sibling, Manifest, Recorder};
use crate::physics::PhysicsArgs;
use clap::Args;
use qrng_core::timetag::{fit_gaussian_feature, scan_delay, PairLabel, SourceConfig};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::PathBuf;

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ScanArgs {
    /// First delay, fs.
    #[arg(long, allow_negative_numbers = true, default_value_t = -600.0)]
    pub from: f64,
    /// Last delay, fs.
    #[arg(long, allow_negative_numbers = true, default_value_t = 600.0)]
    pub to: f64,
    /// Number of delay points (at least 2).
    #[arg(long, default_value_t = 61)]
    pub steps: usize,
    /// Simulated pairs per delay point (mean).
    #[arg(long, default_value_t = 2e5)]
    pub pairs_per_point: f64,
    /// Pair emission rate, Hz.
    #[arg(long, default_value_t = 1000.0)]
    pub pair_rate: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV [default: $QRNG_OUT_DIR/dip.csv].
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub physics: PhysicsArgs,
}

pub const CSV_HEADER: &str = "delay_fs,pair_label,counts,duration_s,rate_hz,sigma_hz\n";

pub fn run(mut args: ScanArgs) -> CliResult<Manifest> {
    if args.steps < 2 {
        return Err(CliError::Usage(format!("--steps must be at least 2, got {}", args.steps)));
    }
    if !(args.pair_rate > 0.0 && args.pairs_per_point > 0.0) {
        return Err(CliError::Usage("--pair-rate and --pairs-per-point must be positive".into()));
    }
    let out = resolve_out(args.out.as_deref(), "dip.csv");
    args.out = Some(out.clone());

    let duration_s = args.pairs_per_point / args.pair_rate;
    let source = SourceConfig::new(args.pair_rate, duration_s, args.seed).map_err(CliError::usage)?;
    let interf = args.physics.interferometer(0.0)?;
    let bank = args.physics.bank()?;
    let timing = args.physics.timing()?;
    let span = args.to - args.from;
    let delays: Vec<f64> = (0..args.steps)
        .map(|i| args.from + span * i as f64 / (args.steps - 1) as f64)
        .collect();
    let points = scan_delay(&delays, &source, &interf, &bank, &timing).map_err(CliError::usage)?;

    let mut csv = String::from(CSV_HEADER);
    for p in &points {
        let rows = PairLabel::ALL
            .iter()
            .map(|&l| (l.name(), p.rate(l)))
            .chain(std::iter::once(("cross", p.cross_arm())));
        for (label, r) in rows {
            writeln!(
                csv,
                "{},{},{},{},{},{}",
                p.delay_fs,
                label,
                r.counts,
                r.duration_s,
                r.rate_hz(),
                r.sigma_hz()
            )
            .expect("write to string");
        }
    }

    let cross: Vec<_> = points.iter().map(|p| (p.delay_fs, p.cross_arm())).collect();
    let fit = fit_gaussian_feature(&cross);
    match &fit {
        Ok(f) => println!(
            "cross-arm dip: visibility {:.4} ± {:.4}, center {:.1} ± {:.1} fs, width {:.1} ± {:.1} fs, chi2/dof {:.2}",
            f.visibility,
            f.visibility_sigma,
            f.center,
            f.sigmas[2],
            f.width,
            f.sigmas[3],
            f.chi2 / f.dof.max(1) as f64
        ),
        Err(e) => println!("cross-arm dip: no fit ({e})"),
    }

    let mut rec = Recorder::new("scan-delay", &args, Some(args.seed));
    let mut configs = args.physics.configs_json(&interf)?;
    configs["source"] = serde_json::to_value(source).expect("serializes");
    rec.configs(configs);
    rec.summary(serde_json::json!({
        "points": points.len(),
        "fit": fit.as_ref().ok(),
        "fit_error": fit.as_ref().err().map(|e| e.to_string()),
    }));
    rec.output("scan", &out, csv.as_bytes())?;
    println!("wrote {}", out.display());
    rec.finish(&sibling(&out, ".manifest.json"))
}
