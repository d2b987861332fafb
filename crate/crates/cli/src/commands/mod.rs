pub mod ber;
pub mod generate;
pub mod replay;
pub mod scan;
pub mod unbias;

use crate::error::{CliError, CliResult};
use crate::manifest::Manifest;
use clap::ValueEnum;
use qrng_core::bitpipe::BitFormat;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormatArg {
    /// One '0'/'1' character per bit.
    Ascii,
    /// 8-byte little-endian bit count, then bits MSB first.
    Packed,
}

impl From<FormatArg> for BitFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Ascii => BitFormat::Ascii,
            FormatArg::Packed => BitFormat::Packed,
        }
    }
}

impl From<BitFormat> for FormatArg {
    fn from(f: BitFormat) -> Self {
        match f {
            BitFormat::Ascii => FormatArg::Ascii,
            BitFormat::Packed => FormatArg::Packed,
        }
    }
}

/// Exit status carried by a finished run: only `test` can fail after writing
/// its outputs.
pub fn verdict(manifest: &Manifest) -> CliResult<()> {
    if manifest.command == "test" && manifest.summary["overall_pass"] == false {
        let failed = manifest.summary["failed_tests"].as_array().map(Vec::len).unwrap_or(0);
        return Err(CliError::Failed(format!(
            "randomness tests failed ({failed} failing, overall_pass=false)"
        )));
    }
    Ok(())
}
