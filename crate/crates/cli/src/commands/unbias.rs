use super::FormatArg;
use crate::error::{CliError, CliResult};
use crate::manifest::{read_file, sibling, Manifest, Recorder};
use clap::Args;
use qrng_core::bitpipe::{bias_estimate, format, von_neumann};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct UnbiasArgs {
    /// Input bit file (ASCII or packed, detected).
    pub input: PathBuf,
    pub output: PathBuf,
    /// Output format [default: same as the input].
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Keep only the first N unbiased bits.
    #[arg(long)]
    pub max_bits: Option<usize>,
}

pub fn run(mut args: UnbiasArgs) -> CliResult<Manifest> {
    let data = read_file(&args.input)?;
    let (bits, detected) = format::decode_auto(&data).map_err(|e| CliError::bad_input(&args.input, e))?;
    let out_format = args.format.unwrap_or(detected.into());
    args.format = Some(out_format);
    let mut unbiased = von_neumann(&bits);
    let produced = unbiased.len();
    if let Some(n) = args.max_bits.filter(|&n| n < produced) {
        unbiased = unbiased.iter().take(n).collect();
    }

    let yield_ratio = (!bits.is_empty()).then(|| produced as f64 / bits.len() as f64);
    let bias = bias_estimate(&unbiased).ok();
    let fmt_opt = |v: Option<f64>| v.map_or_else(|| "undefined".to_string(), |x| format!("{x:.6}"));
    println!("input bits:  {} ({})", bits.len(), detected);
    println!("output bits: {} of {produced}", unbiased.len());
    println!("yield:       {}", fmt_opt(yield_ratio));
    match bias {
        Some((p, s)) => println!("output p(1): {p:.6} ± {s:.6}"),
        None => println!("output p(1): undefined"),
    }

    let mut rec = Recorder::new("unbias", &args, None);
    rec.input("bits", &args.input, &data);
    rec.summary(serde_json::json!({
        "input_bits": bits.len(),
        "input_format": detected,
        "unbiased_bits": produced,
        "output_bits": unbiased.len(),
        "yield": yield_ratio,
        "output_p_one": bias.map(|b| b.0),
        "output_p_one_sigma": bias.map(|b| b.1),
    }));
    rec.output("bits", &args.output, &format::encode(&unbiased, out_format.into()))?;
    println!("wrote {}", args.output.display());
    rec.finish(&sibling(&args.output, ".manifest.json"))
}
