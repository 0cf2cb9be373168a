//! Command-line front end: configuration, orchestration and artifacts.
//!
//! Precedence, lowest to highest: built-in defaults, the TOML file given by
//! `--config`, command-line flags. The subcommand names the experiment; a
//! config file that names a different one is rejected.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::domains::DomainKind;
use crate::error::{Error, Result};
use crate::multipliers::{validate_coefficients, HypoCoefficients};
use crate::suite::{self, CriterionOutcome, Status, SuiteParams, Table};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
/// Largest grid resolution accepted from a config.
pub const MAX_RESOLUTION: usize = 16_384;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    VerifyOperators,
    CertifyLinear,
    ScanRegimes,
    BetaIdentities,
    Bootstrap,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::VerifyOperators => "verify-operators",
            Experiment::CertifyLinear => "certify-linear",
            Experiment::ScanRegimes => "scan-regimes",
            Experiment::BetaIdentities => "beta-identities",
            Experiment::Bootstrap => "bootstrap",
        }
    }

    /// Acceptance criteria exercised by the experiment.
    pub fn criteria(self) -> &'static [u8] {
        match self {
            Experiment::VerifyOperators => &[1, 2, 8],
            Experiment::CertifyLinear => &[3, 4, 6],
            Experiment::ScanRegimes => &[5],
            Experiment::BetaIdentities => &[7],
            Experiment::Bootstrap => &[9],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    /// `plane`, `half-plane`, `channel` or `beta-plane`; unset runs every domain the experiment covers.
    pub kind: Option<String>,
    /// Restricts ν sweeps to this single value.
    pub nu: Option<f64>,
}

/// Contents of a config file; every field is optional.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub experiment: Option<Experiment>,
    #[serde(default)]
    pub domain: DomainConfig,
    pub coefficients: Option<HypoCoefficients>,
    pub resolution: Option<usize>,
    pub horizon: Option<f64>,
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
}

/// Fully resolved run description. Its JSON form is what the config hash covers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub domain: Option<DomainKind>,
    pub nu: Option<f64>,
    pub coefficients: HypoCoefficients,
    pub resolution: Option<usize>,
    pub horizon: Option<f64>,
    pub output_dir: PathBuf,
    pub seed: u64,
    #[serde(skip)]
    pub workers: usize,
}

impl RunConfig {
    pub fn params(&self) -> SuiteParams {
        SuiteParams {
            coeffs: self.coefficients,
            nu: self.nu,
            kind: self.domain,
            resolution: self.resolution,
            horizon: self.horizon,
            workers: self.workers,
            seed: self.seed,
        }
    }

    /// First 16 hex digits of SHA-256 over the canonical JSON of the config,
    /// leaving out where the artifacts go and how many threads ran.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(&RunConfig { output_dir: PathBuf::new(), workers: 0, ..self.clone() }).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        validate_coefficients(&self.coefficients).require_structural()?;
        if let Some(n) = self.resolution {
            if n > MAX_RESOLUTION {
                return Err(Error::ResolutionCap { got: n, cap: MAX_RESOLUTION });
            }
        }
        if let Some(nu) = self.nu {
            if !(nu > 0.0 && nu < 1.0) {
                return Err(Error::ViscosityOutOfRange(nu));
            }
        }
        if let Some(h) = self.horizon {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::Config(format!("horizon must be positive, got {h}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Parser)]
#[command(name = "shearflow", version, about = "Couette-flow stability experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// 𝔍_k paths, operator bounds and the ghost multiplier (criteria 1, 2, 8).
    VerifyOperators,
    /// Kelvin oracle, per-mode decay certificates, inviscid damping (criteria 3, 4, 6).
    CertifyLinear,
    /// Decay-rate scaling slopes (criterion 5).
    ScanRegimes,
    /// β-plane cancellations and certificates (criterion 7).
    BetaIdentities,
    /// Nonlinear bootstrap run (criterion 9).
    Bootstrap,
}

impl Command {
    fn experiment(&self) -> Experiment {
        match self {
            Command::VerifyOperators => Experiment::VerifyOperators,
            Command::CertifyLinear => Experiment::CertifyLinear,
            Command::ScanRegimes => Experiment::ScanRegimes,
            Command::BetaIdentities => Experiment::BetaIdentities,
            Command::Bootstrap => Experiment::Bootstrap,
        }
    }
}

#[derive(Debug, Args, Default)]
pub struct Flags {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory for CSV/JSON artifacts.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; defaults to the available cores.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Grid nodes in y, capped at 16384.
    #[arg(long, global = true)]
    pub resolution: Option<usize>,
    /// Viscosity in (0, 1); unset uses each experiment's grid.
    #[arg(long, global = true)]
    pub nu: Option<f64>,
    /// plane, half-plane, channel or beta-plane.
    #[arg(long, global = true)]
    pub domain: Option<String>,
    /// Final time; unset uses each experiment's natural horizon.
    #[arg(long, global = true)]
    pub horizon: Option<f64>,
    /// Seed for the randomized test profiles.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

/// Parse a config file body, reporting line and field on failure.
pub fn parse_config(text: &str) -> Result<FileConfig> {
    toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
}

/// Merge defaults, file and flags into a [`RunConfig`].
pub fn resolve(experiment: Experiment, file: FileConfig, flags: &Flags) -> Result<RunConfig> {
    if let Some(named) = file.experiment {
        if named != experiment {
            return Err(Error::Config(format!(
                "config names experiment `{}` but the command is `{}`",
                named.name(),
                experiment.name()
            )));
        }
    }
    let domain = match flags.domain.as_deref().or(file.domain.kind.as_deref()) {
        Some(name) => Some(DomainKind::parse(name)?),
        None => None,
    };
    let cfg = RunConfig {
        experiment,
        domain,
        nu: flags.nu.or(file.domain.nu),
        coefficients: file.coefficients.unwrap_or_default(),
        resolution: flags.resolution.or(file.resolution),
        horizon: flags.horizon.or(file.horizon),
        output_dir: flags.out.clone().or(file.output_dir).unwrap_or_else(|| PathBuf::from("out")),
        seed: flags.seed.or(file.seed).unwrap_or(SuiteParams::default().seed),
        workers: flags.workers.or(file.workers).unwrap_or_else(crate::pool::default_workers).max(1),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn ensure_writable(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let probe = dir.join(".write-probe");
    fs::write(&probe, b"")?;
    fs::remove_file(probe)?;
    Ok(())
}

fn header_line(cfg: &RunConfig) -> String {
    format!("# shearflow {TOOL_VERSION} config-hash {} experiment {}", cfg.hash(), cfg.experiment.name())
}

/// Write a table as CSV with the provenance header line.
pub fn write_csv(path: &Path, header: &str, table: &Table) -> Result<()> {
    let mut out = String::new();
    out.push_str(header);
    out.push('\n');
    out.push_str(&table.header.join(","));
    out.push('\n');
    for row in &table.rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

#[derive(Serialize)]
struct VerdictFile<'a> {
    tool: &'static str,
    version: &'static str,
    config_hash: String,
    config: &'a RunConfig,
    criteria: &'a [CriterionOutcome],
    pass: bool,
}

fn run_criterion(id: u8, p: &SuiteParams) -> CriterionOutcome {
    match id {
        1 => suite::plane_equivalence(p),
        2 => suite::operator_bounds(p),
        3 => suite::kelvin_match(p),
        4 => suite::linear_certificates(p),
        5 => suite::rate_scaling(p),
        6 => suite::inviscid_damping(p),
        7 => suite::beta_plane(p),
        8 => suite::ghost_bounds(p),
        _ => suite::nonlinear_bootstrap(p),
    }
}

/// Run the configured experiment and write its artifacts. Returns whether
/// every asserted criterion passed.
pub fn run(cfg: &RunConfig, log: &mut impl Write) -> Result<bool> {
    ensure_writable(&cfg.output_dir)?;
    let params = cfg.params();
    let header = header_line(cfg);
    writeln!(log, "{header}")?;
    let mut outcomes = Vec::new();
    for &id in cfg.experiment.criteria() {
        let o = run_criterion(id, &params);
        writeln!(log, "criterion {} [{}] {}: {}", o.id, o.status.as_str(), o.title, o.summary)?;
        for t in &o.tables {
            write_csv(&cfg.output_dir.join(format!("{}.csv", t.name)), &header, t)?;
        }
        outcomes.push(o);
    }
    let pass = outcomes.iter().all(|o| o.status != Status::Fail);
    let verdict = VerdictFile {
        tool: "shearflow",
        version: TOOL_VERSION,
        config_hash: cfg.hash(),
        config: cfg,
        criteria: &outcomes,
        pass,
    };
    let json = serde_json::to_string_pretty(&verdict).map_err(|e| Error::Config(e.to_string()))?;
    fs::write(cfg.output_dir.join("verdicts.json"), json + "\n")?;
    let summary: String = outcomes
        .iter()
        .map(|o| format!("criterion {} [{}] {}: {}\n", o.id, o.status.as_str(), o.title, o.summary))
        .collect();
    fs::write(cfg.output_dir.join("summary.txt"), format!("{header}\n{summary}"))?;
    writeln!(log, "{}", if pass { "all asserted criteria pass" } else { "some asserted criteria fail" })?;
    Ok(pass)
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_with(args: impl IntoIterator<Item = std::ffi::OsString>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let outcome = (|| -> Result<bool> {
        let file = match &cli.flags.config {
            Some(path) => {
                let text = fs::read_to_string(path)?;
                parse_config(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
            }
            None => FileConfig::default(),
        };
        let cfg = resolve(cli.command.experiment(), file, &cli.flags)?;
        run(&cfg, &mut std::io::stdout())
    })();
    match outcome {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
