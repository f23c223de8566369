use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use spherical_sensing::acceptance::{Suite, CRITERIA};
use spherical_sensing::analytic::{self, MAX_MOMENT_ORDER};
use spherical_sensing::config::{ExperimentConfig, OutputFormat};
use spherical_sensing::linalg::{ChannelMode, CovarianceModel};
use spherical_sensing::output::{fmt_sig, fmt_trim, pd_table_csv, roc_csv};
use spherical_sensing::simulate::{pd_vs_snr, roc_experiment, Scenario};
use spherical_sensing::{DetectorKind, Error};

const EXIT_VALIDATION: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_CONVERGENCE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "stsense",
    version,
    about = "Spherical-test spectrum sensing: thresholds, ROC curves and Monte-Carlo checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Threshold ζ giving a target false-alarm probability
    Threshold {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        pfa: f64,
    },
    /// False-alarm probability of threshold ζ
    Pfa {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        zeta: f64,
    },
    /// Moments and Beta parameters under H0, and under H1 if a covariance is given
    Moments {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        /// Population eigenvalues of Σ, comma separated
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        sigma_eigs: Vec<f64>,
        /// Primary-user SNRs in dB (repeatable); channels drawn from --seed
        #[arg(long = "snr-db", allow_negative_numbers = true)]
        snr_db: Vec<f64>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_enum)]
        channel_mode: Option<ChannelModeArg>,
    },
    /// Empirical ROC of each detector plus the analytic ST curve, as CSV or JSON
    Roc(ExperimentArgs),
    /// Detection probability versus SNR with two users, SNR₂ = SNR₁ + offset
    Pd {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Target false-alarm probability
        #[arg(long)]
        pfa: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        snr_offset_db: Option<f64>,
        #[arg(long)]
        channel_draws: Option<usize>,
        #[arg(long)]
        h0_trials: Option<usize>,
    },
    /// Print the effective experiment configuration as JSON
    Config(ExperimentArgs),
    /// Run the acceptance suite; exits 1 if any criterion fails
    Validate {
        /// Criterion numbers to run (default: all)
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<u8>,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ChannelModeArg {
    Independent,
    Orthonormal,
}

impl From<ChannelModeArg> for ChannelMode {
    fn from(m: ChannelModeArg) -> Self {
        match m {
            ChannelModeArg::Independent => ChannelMode::Independent,
            ChannelModeArg::Orthonormal => ChannelMode::Orthonormal,
        }
    }
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

/// Flags override the values read from `--config`.
#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    sigma2: Option<f64>,
    /// SNR in dB, repeatable (for `pd`: the SNR₁ grid)
    #[arg(long = "snr-db", allow_negative_numbers = true)]
    snr_db: Vec<f64>,
    #[arg(long)]
    mu_db: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated detector names: ST, ER, JOHN, LE, SLE, ED
    #[arg(long)]
    detectors: Option<String>,
    #[arg(long, value_enum)]
    channel_mode: Option<ChannelModeArg>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if matches!(e, Error::Convergence(_)) { EXIT_CONVERGENCE } else { EXIT_USAGE };
        Failure { code, message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, message: message.into() }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn parse_detectors(text: &str) -> CliResult<Vec<DetectorKind>> {
    text.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|s| s.parse().map_err(Failure::from)).collect()
}

impl ExperimentArgs {
    fn resolve(&self) -> CliResult<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => {
                let text =
                    fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
                ExperimentConfig::from_json(&text)?
            }
            None => ExperimentConfig::default(),
        };
        let s = &mut c.scenario;
        if let Some(k) = self.k {
            s.k = k;
        }
        if let Some(n) = self.n {
            s.n = n;
        }
        if let Some(v) = self.sigma2 {
            s.sigma2 = v;
        }
        if let Some(v) = self.mu_db {
            s.mu_db = v;
        }
        if let Some(v) = self.trials {
            s.trials = v;
        }
        if let Some(v) = self.seed {
            s.seed = v;
        }
        if let Some(d) = &self.detectors {
            s.detectors = parse_detectors(d)?;
        }
        if let Some(m) = self.channel_mode {
            s.channel_mode = m.into();
        }
        if self.out.is_some() {
            c.out = self.out.clone();
        }
        if let Some(f) = self.format {
            c.format = match f {
                FormatArg::Csv => OutputFormat::Csv,
                FormatArg::Json => OutputFormat::Json,
            };
        }
        Ok(c)
    }
}

fn emit(config: &ExperimentConfig, csv: String, json: String) -> CliResult<()> {
    let text = match config.format {
        OutputFormat::Csv => csv,
        OutputFormat::Json => json + "\n",
    };
    match &config.out {
        Some(path) => fs::write(path, text).map_err(|e| usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(usage(format!("cannot write output: {e}"))),
                _ => Ok(()),
            }
        }
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("results are always serializable")
}

fn cmd_moments(
    k: usize,
    n: usize,
    sigma_eigs: &[f64],
    snr_db: &[f64],
    seed: u64,
    mode: Option<ChannelModeArg>,
) -> CliResult<()> {
    let m = analytic::h0_moments(k, n, MAX_MOMENT_ORDER)?;
    for (i, v) in m.values.iter().enumerate() {
        println!("M{} = {}", i + 1, fmt_trim(*v, 12));
    }
    let p = analytic::h0_beta(k, n)?;
    println!("alpha = {}", fmt_trim(p.alpha, 12));
    println!("beta = {}", fmt_trim(p.beta, 12));
    let model = if !sigma_eigs.is_empty() {
        if sigma_eigs.len() != k {
            return Err(usage(format!("--sigma-eigs has {} values, expected K = {k}", sigma_eigs.len())));
        }
        Some(CovarianceModel::diagonal(sigma_eigs)?)
    } else if !snr_db.is_empty() {
        let s = Scenario {
            seed,
            channel_mode: mode.map(Into::into).unwrap_or_default(),
            ..Scenario::new(k, n, snr_db.to_vec())
        };
        Some(s.channel_model(0)?)
    } else {
        None
    };
    if let Some(model) = model {
        let eigs: Vec<String> = model.sigma_eigs().iter().map(|e| fmt_trim(*e, 12)).collect();
        println!("sigma_eigs = {}", eigs.join(","));
        let m = analytic::h1_moments(&model, n, MAX_MOMENT_ORDER)?;
        for (i, v) in m.values.iter().enumerate() {
            println!("N{} = {}", i + 1, fmt_trim(*v, 12));
        }
        let p = analytic::h1_beta(&model, n)?;
        println!("alpha1 = {}", fmt_trim(p.alpha, 12));
        println!("beta1 = {}", fmt_trim(p.beta, 12));
    }
    Ok(())
}

fn cmd_validate(criteria: &[u8]) -> CliResult<bool> {
    let ids: Vec<u8> = if criteria.is_empty() { CRITERIA.iter().map(|c| c.0).collect() } else { criteria.to_vec() };
    if let Some(bad) = ids.iter().find(|id| !CRITERIA.iter().any(|c| c.0 == **id)) {
        return Err(usage(format!("no acceptance criterion {bad} (expected 1..={})", CRITERIA.len())));
    }
    let mut suite = Suite::new();
    let mut all = true;
    for id in ids {
        let r = suite.run(id);
        println!("{r}");
        all &= r.passed;
    }
    println!("{}", if all { "all criteria passed" } else { "some criteria FAILED" });
    Ok(all)
}

fn run(cli: Cli) -> CliResult<u8> {
    match cli.command {
        Command::Threshold { k, n, pfa } => {
            println!("{}", fmt_sig(analytic::threshold_for_pfa(pfa, k, n)?, 12));
        }
        Command::Pfa { k, n, zeta } => {
            if !(0.0..=1.0).contains(&zeta) {
                return Err(usage(format!("zeta must lie in [0,1], got {zeta}")));
            }
            println!("{}", fmt_sig(analytic::pfa(zeta, k, n)?, 12));
        }
        Command::Moments { k, n, sigma_eigs, snr_db, seed, channel_mode } => {
            cmd_moments(k, n, &sigma_eigs, &snr_db, seed, channel_mode)?;
        }
        Command::Roc(args) => {
            let mut c = args.resolve()?;
            if !args.snr_db.is_empty() {
                c.scenario.snrs_db = args.snr_db.clone();
            }
            c.scenario.validate()?;
            let curves = roc_experiment(&c.scenario, &c.pfa_grid.values()?)?;
            emit(&c, roc_csv(&curves), to_json(&curves))?;
        }
        Command::Pd { exp, pfa, snr_offset_db, channel_draws, h0_trials } => {
            let mut c = exp.resolve()?;
            if !exp.snr_db.is_empty() {
                c.pd_table.snr1_grid_db = exp.snr_db.clone();
            }
            if let Some(v) = pfa {
                c.pd_table.pfa = v;
            }
            if let Some(v) = snr_offset_db {
                c.pd_table.snr_offset_db = v;
            }
            if let Some(v) = channel_draws {
                c.pd_table.channel_draws = v;
            }
            if let Some(v) = h0_trials {
                c.pd_table.h0_trials = v;
            }
            c.scenario.validate()?;
            let rows = pd_vs_snr(&c.scenario, &c.pd_table)?;
            emit(&c, pd_table_csv(&rows), to_json(&rows))?;
        }
        Command::Config(args) => {
            let mut c = args.resolve()?;
            if !args.snr_db.is_empty() {
                c.scenario.snrs_db = args.snr_db.clone();
            }
            println!("{}", c.to_json());
        }
        Command::Validate { criteria } => {
            if !cmd_validate(&criteria)? {
                return Ok(EXIT_VALIDATION);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
