use std::path::PathBuf;

use clap::Args;
use hmt_core::sinr::{verify_ambiguity, verify_appendix_a, verify_appendix_b, ValidationReport};
use hmt_core::{defaults, LatticeSpec, ScatteringKind, ScatteringSpec, SinrParams};

use crate::{CmdResult, Failure};

#[derive(Args, Debug)]
pub struct ValidateArgs {
    /// Spread factor of the channels used by the derivation checks.
    #[arg(long, default_value_t = 0.1)]
    spread: f64,
    #[arg(long, default_value_t = 20.0)]
    snr: f64,
    /// Pulse dispersion in s^2 (default T / (sqrt(3) F)).
    #[arg(long, allow_hyphen_values = true)]
    sigma: Option<f64>,
    /// Grid points per check.
    #[arg(long, default_value_t = 201)]
    points: usize,
    /// Also write the reports as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
}

fn print_report(r: &ValidationReport) {
    println!("[{}]", r.suite);
    for c in &r.checks {
        println!(
            "  {:<4}  {:<42} value {:>11.3e}  tol {:>9.1e}  {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.tolerance,
            c.detail
        );
    }
}

pub fn run(args: &ValidateArgs) -> CmdResult<u8> {
    let lattice = LatticeSpec::reference();
    let sigma = args.sigma.unwrap_or_else(defaults::pulse_sigma);
    let params = |kind| -> CmdResult<SinrParams> {
        let scat = ScatteringSpec::lattice_matched(kind, args.spread, &lattice)?;
        Ok(SinrParams::new(scat, lattice, sigma, args.snr)?)
    };
    let (uni, exp) = (params(ScatteringKind::Uni)?, params(ScatteringKind::Exp)?);
    let reports = vec![
        verify_ambiguity(sigma, defaults::SAMPLING_INTERVAL, 21)?,
        verify_appendix_a(&uni, args.points)?,
        verify_appendix_b(&exp, args.points)?,
    ];
    for r in &reports {
        print_report(r);
    }
    if let Some(path) = &args.report {
        let text = serde_json::to_string_pretty(&reports).map_err(|e| Failure::runtime(e.to_string()))?;
        std::fs::write(path, text + "\n")
            .map_err(|e| Failure::runtime(format!("cannot write {}: {e}", path.display())))?;
    }
    let failed = reports.iter().flat_map(|r| &r.checks).filter(|c| !c.passed).count();
    let total: usize = reports.iter().map(|r| r.checks.len()).sum();
    println!("{} of {total} checks passed", total - failed);
    Ok(if failed == 0 { 0 } else { 1 })
}
