//! `hmt`: reproducible HMT link experiments.
//!
//! Every experiment command resolves a [`SimConfig`] from built-in defaults,
//! an optional flat `key = value` file, convenience flags and `--set`
//! overrides (in that order), writes a run manifest, then the result CSV.
//!
//! Exit codes: 0 ok, 1 validation check failed, 2 bad input, 3 runtime error.

mod manifest;
mod validate;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hmt_core::montecarlo::{
    analytic_curve, measure_ber, measure_sinr, parse_range, robustness_sweep, spread_sweep, write_csv, Method,
};
use hmt_core::{CurvePoint, Error, ScatteringKind, ScatteringSpec, SimConfig};

use manifest::RunManifest;

#[derive(Parser, Debug)]
#[command(
    name = "hmt",
    version,
    about = "HMT link experiments over doubly dispersive channels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// SINR against SNR for each receiver.
    SinrCurve {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = MethodArg::Mc)]
        method: MethodArg,
    },
    /// SINR against the channel spread factor at a fixed SNR (default 20 dB).
    SpreadSweep {
        #[command(flatten)]
        common: Common,
        /// Spread factors: `a,b,c` or `start:step:stop`.
        #[arg(long, default_value = "0.05:0.05:0.35")]
        spreads: String,
        #[arg(long, value_enum, default_value_t = MethodArg::Mc)]
        method: MethodArg,
    },
    /// Uncoded BER against Eb/N0 with genie equalization.
    BerCurve {
        #[command(flatten)]
        common: Common,
        /// Eb/N0 points in dB: `a,b,c` or `start:step:stop` [default: 0:2.5:30].
        #[arg(long)]
        ebn0: Option<String>,
        /// Bit errors per point before stopping early.
        #[arg(long)]
        target_errors: Option<u64>,
    },
    /// Max-SINR with delay-spread estimation errors vs upper bound and TPR.
    Robustness {
        #[command(flatten)]
        common: Common,
        /// `uniform-half-span` (default) or `none`.
        #[arg(long)]
        est_error: Option<String>,
    },
    /// Numerical checks of the pulse ambiguity and the offset derivations.
    Validate(validate::ValidateArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    Analytic,
    Mc,
    Both,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `uni` or `exp`.
    #[arg(long)]
    channel: Option<String>,
    /// Spread factor; delay and Doppler split matched to the lattice.
    #[arg(long)]
    spread: Option<f64>,
    /// SNR points in dB: `a,b,c` or `start:step:stop`.
    #[arg(long)]
    snr: Option<String>,
    /// Receivers, comma separated: tpr, maxsinr, ub, manual:<dt>:<df>.
    #[arg(long)]
    receiver: Option<String>,
    #[arg(long)]
    realizations: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Any config key, e.g. `--set paths=32`. Repeatable; applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Result CSV path; the manifest goes next to it as `<stem>.manifest.json`.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParameter { .. }
            | Error::DimensionMismatch { .. }
            | Error::UnsupportedConstellation(_)
            | Error::WrongScattering { .. }
            | Error::InsufficientRealizations { .. } => 2,
            _ => 3,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    fn runtime(message: impl Into<String>) -> Self {
        Failure {
            code: 3,
            message: message.into(),
        }
    }
}

type CmdResult<T> = Result<T, Failure>;

impl Common {
    /// Defaults (built-in, then the command's own), then file, then flags,
    /// then `--set`.
    fn resolve(&self, defaults: &[(&str, &str)], flags: &[(&str, Option<String>)]) -> CmdResult<SimConfig> {
        let base = SimConfig::reference(
            ScatteringSpec::lattice_matched(ScatteringKind::Uni, 0.2, &hmt_core::LatticeSpec::reference())
                .map_err(Failure::from)?,
        );
        let mut pairs: Vec<(String, String)> = defaults.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::input(format!("cannot read config {}: {e}", path.display())))?;
            pairs.extend(SimConfig::parse_pairs(&text)?);
        }
        let mut flag = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                pairs.push((k.to_string(), v));
            }
        };
        flag("channel", self.channel.clone());
        flag("spread", self.spread.map(|s| s.to_string()));
        flag("snr_db", self.snr.clone());
        flag("receivers", self.receiver.clone());
        flag("realizations", self.realizations.map(|v| v.to_string()));
        flag("seed", self.seed.map(|v| v.to_string()));
        for (k, v) in flags {
            flag(k, v.clone());
        }
        for s in &self.set {
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| Failure::input(format!("--set expects KEY=VALUE, got `{s}`")))?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        let cfg = base.apply_pairs(&pairs)?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn out_path(&self, default: &str) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from(default))
    }
}

fn manifest_path(csv: &Path) -> PathBuf {
    let stem = csv.file_stem().and_then(|s| s.to_str()).unwrap_or("results");
    csv.with_file_name(format!("{stem}.manifest.json"))
}

/// Writes the manifest, runs `body`, writes the CSV and finalizes the manifest.
fn run_experiment<F>(
    command: &str,
    cfg: &SimConfig,
    args: serde_json::Value,
    csv: PathBuf,
    notes: Vec<String>,
    body: F,
) -> CmdResult<()>
where
    F: FnOnce() -> hmt_core::Result<Vec<CurvePoint>>,
{
    if let Some(dir) = csv.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Failure::runtime(format!("cannot create {}: {e}", dir.display())))?;
    }
    let mpath = manifest_path(&csv);
    let mut manifest = RunManifest::start(command, cfg, args, &csv, &mpath, notes);
    manifest.write(&mpath).map_err(Failure::runtime)?;
    let result = body().map_err(Failure::from).and_then(|points| {
        let file = std::fs::File::create(&csv)
            .map_err(|e| Failure::runtime(format!("cannot write {}: {e}", csv.display())))?;
        write_csv(std::io::BufWriter::new(file), &points)?;
        Ok(points.len())
    });
    match &result {
        Ok(rows) => {
            manifest.finish("ok", None);
            println!("{command}: wrote {rows} rows to {}", csv.display());
        }
        Err(f) => manifest.finish("error", Some(f.message.clone())),
    }
    manifest.write(&mpath).map_err(Failure::runtime)?;
    result.map(|_| ())
}

fn methods(m: MethodArg) -> &'static [Method] {
    match m {
        MethodArg::Analytic => &[Method::Analytic],
        MethodArg::Mc => &[Method::MonteCarlo],
        MethodArg::Both => &[Method::Analytic, Method::MonteCarlo],
    }
}

fn method_name(m: MethodArg) -> &'static str {
    match m {
        MethodArg::Analytic => "analytic",
        MethodArg::Mc => "mc",
        MethodArg::Both => "both",
    }
}

fn run(cli: Cli) -> CmdResult<u8> {
    match cli.command {
        Command::SinrCurve { common, method } => {
            let cfg = common.resolve(&[], &[])?;
            let args = serde_json::json!({ "method": method_name(method) });
            run_experiment(
                "sinr-curve",
                &cfg,
                args,
                common.out_path("sinr_curve.csv"),
                vec![],
                || {
                    let mut pts = Vec::new();
                    for m in methods(method) {
                        pts.extend(match m {
                            Method::Analytic => analytic_curve(&cfg)?,
                            Method::MonteCarlo => measure_sinr(&cfg)?,
                        });
                    }
                    Ok(pts)
                },
            )?;
        }
        Command::SpreadSweep {
            common,
            spreads,
            method,
        } => {
            let cfg = common.resolve(&[("snr_db", "20")], &[])?;
            let spreads = parse_range("spreads", &spreads)?;
            if spreads.is_empty() {
                return Err(Failure::input("spread list is empty"));
            }
            let args = serde_json::json!({ "spreads": spreads, "method": method_name(method) });
            run_experiment(
                "spread-sweep",
                &cfg,
                args,
                common.out_path("spread_sweep.csv"),
                vec![],
                || {
                    let mut pts = Vec::new();
                    for &m in methods(method) {
                        pts.extend(spread_sweep(&cfg, &spreads, m)?);
                    }
                    Ok(pts)
                },
            )?;
        }
        Command::BerCurve {
            common,
            ebn0,
            target_errors,
        } => {
            let cfg = common.resolve(
                &[("snr_db", "0:2.5:30")],
                &[
                    ("snr_db", ebn0),
                    ("ber_target_errors", target_errors.map(|t| t.to_string())),
                ],
            )?;
            let bits = cfg.constellation.bits_per_symbol() as f64;
            let notes = vec![format!(
                "x is Eb/N0 in dB; Eb = sigma_c2 / (rho * bits) with rho = {} and {bits} bits/symbol, \
                 so SNR = Eb/N0 + {:.4} dB",
                cfg.lattice.density(),
                10.0 * (cfg.lattice.density() * bits).log10()
            )];
            run_experiment(
                "ber-curve",
                &cfg,
                serde_json::json!({}),
                common.out_path("ber_curve.csv"),
                notes,
                || measure_ber(&cfg),
            )?;
        }
        Command::Robustness { common, est_error } => {
            let cfg = common.resolve(
                &[("estimation_error", "uniform-half-span")],
                &[("estimation_error", est_error)],
            )?;
            let notes = vec!["receivers fixed to ub, maxsinr-est and tpr".to_string()];
            run_experiment(
                "robustness",
                &cfg,
                serde_json::json!({}),
                common.out_path("robustness.csv"),
                notes,
                || robustness_sweep(&cfg),
            )?;
        }
        Command::Validate(args) => return validate::run(&args),
    }
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
