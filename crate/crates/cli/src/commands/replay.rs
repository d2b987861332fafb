use super::{ber, generate, scan, test, unbias};
use crate::error::{CliError, CliResult};
use crate::manifest::{load_manifest, read_file, sha256_hex, Manifest};
use clap::Args;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    /// Manifest written by an earlier run.
    pub manifest: PathBuf,
    /// Directory for the regenerated outputs [default: a fresh temporary directory].
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

/// Outcome of comparing one recorded output against its regenerated copy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputCheck {
    pub role: String,
    pub expected: String,
    pub actual: Option<String>,
}

impl OutputCheck {
    pub fn matches(&self) -> bool {
        self.actual.as_deref() == Some(self.expected.as_str())
    }
}

fn parse_args<T: DeserializeOwned>(path: &Path, m: &Manifest) -> CliResult<T> {
    serde_json::from_value(m.args.clone()).map_err(|e| CliError::bad_input(path, e))
}

fn relocate(out_dir: &Path, original: Option<&Path>) -> Option<PathBuf> {
    original.and_then(Path::file_name).map(|n| out_dir.join(n))
}

/// Re-run the manifest's command with outputs redirected to `out_dir`.
pub fn replay(manifest_path: &Path, out_dir: &Path) -> CliResult<Vec<OutputCheck>> {
    let original = load_manifest(manifest_path)?;
    for input in &original.inputs {
        let data = read_file(&input.path)?;
        if sha256_hex(&data) != input.sha256 {
            return Err(CliError::Failed(format!(
                "input {} ({}) no longer matches its recorded digest",
                input.role,
                input.path.display()
            )));
        }
    }
    let rerun = match original.command.as_str() {
        "scan-delay" => {
            let mut a: scan::ScanArgs = parse_args(manifest_path, &original)?;
            a.out = relocate(out_dir, a.out.as_deref());
            scan::run(a)?
        }
        "ber-scan" => {
            let mut a: ber::BerArgs = parse_args(manifest_path, &original)?;
            a.out = relocate(out_dir, a.out.as_deref());
            ber::run(a)?
        }
        "generate" => {
            let mut a: generate::GenerateArgs = parse_args(manifest_path, &original)?;
            a.out = relocate(out_dir, a.out.as_deref());
            generate::run(a)?
        }
        "unbias" => {
            let mut a: unbias::UnbiasArgs = parse_args(manifest_path, &original)?;
            a.output = relocate(out_dir, Some(&a.output)).unwrap_or_else(|| out_dir.join("unbiased"));
            unbias::run(a)?
        }
        "test" => {
            let mut a: test::TestArgs = parse_args(manifest_path, &original)?;
            a.out = relocate(out_dir, a.out.as_deref());
            test::run(a)?
        }
        other => {
            return Err(CliError::bad_input(manifest_path, format!("cannot replay command {other:?}")))
        }
    };
    Ok(original
        .outputs
        .iter()
        .map(|o| OutputCheck {
            role: o.role.clone(),
            expected: o.sha256.clone(),
            actual: rerun.outputs.iter().find(|r| r.role == o.role).map(|r| r.sha256.clone()),
        })
        .collect())
}

pub fn run(args: ReplayArgs) -> CliResult<()> {
    let out_dir = args.out_dir.clone().unwrap_or_else(|| {
        std::env::temp_dir().join(format!("qrng-replay-{}-{}", std::process::id(), crate::manifest::unix_ms()))
    });
    let checks = replay(&args.manifest, &out_dir)?;
    let mut mismatches = 0;
    for c in &checks {
        let status = if c.matches() { "match" } else { "MISMATCH" };
        println!("{:<8} {:<10} {}", status, c.role, c.expected);
        if !c.matches() {
            mismatches += 1;
        }
    }
    println!("regenerated outputs in {}", out_dir.display());
    if mismatches > 0 {
        return Err(CliError::Failed(format!("{mismatches} of {} outputs differ", checks.len())));
    }
    println!("all {} outputs reproduced", checks.len());
    Ok(())
}
