//! Batch front end: configuration parsing, report emission and the four
//! subcommands. Configurations and reports are TOML; site-indexed dumps are CSV.
//!
//! Exit codes: 0 success, 1 certificate failure, 2 validation error, 3 I/O error.

mod args;

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use args::{Cli, Command, ObservableArg};

use crate::composite::site_marginals;
use crate::protocol::{run_naive_sorkin, Arm, Protocol, ScenarioConfig, SignalingReport, Stage};
use crate::qcore::{spin, BasisTag, LinearOperator, C64};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CERTIFICATE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Io(String),
    #[error("spacelike certificate failed")]
    CertificateFailed,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Io(_) => EXIT_IO,
            CliError::CertificateFailed => EXIT_CERTIFICATE,
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| io_error(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| io_error(path, e))
}

/// Provenance block embedded in every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub tool_version: String,
    pub wall_clock_seconds: f64,
    pub seed: u64,
    pub config: ScenarioConfig,
}

/// On-disk report: the signaling report plus its manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportFile {
    pub p_q1_kick: f64,
    pub p_q1_nokick: f64,
    pub delta: f64,
    pub arrival_prob: f64,
    pub max_antisym_violation: f64,
    pub branch_count_kick: usize,
    pub branch_count_nokick: usize,
    pub certificate: crate::lattice::SpacelikeCertificate,
    pub manifest: RunManifest,
}

impl ReportFile {
    pub fn new(report: &SignalingReport, manifest: RunManifest) -> Self {
        Self {
            p_q1_kick: report.p_q1_kick,
            p_q1_nokick: report.p_q1_nokick,
            delta: report.delta,
            arrival_prob: report.arrival_prob,
            max_antisym_violation: report.max_antisym_violation,
            branch_count_kick: report.branch_count_kick,
            branch_count_nokick: report.branch_count_nokick,
            certificate: report.certificate,
            manifest,
        }
    }

    pub fn report(&self) -> SignalingReport {
        SignalingReport {
            p_q1_kick: self.p_q1_kick,
            p_q1_nokick: self.p_q1_nokick,
            delta: self.delta,
            arrival_prob: self.arrival_prob,
            certificate: self.certificate,
            max_antisym_violation: self.max_antisym_violation,
            branch_count_kick: self.branch_count_kick,
            branch_count_nokick: self.branch_count_nokick,
        }
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Validation(format!("cannot encode report: {e}")))
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Validation(format!("malformed report: {e}")))
    }
}

/// Parses and validates a scenario configuration from TOML text.
pub fn parse_config_str(text: &str) -> Result<ScenarioConfig, CliError> {
    let cfg: ScenarioConfig =
        toml::from_str(text).map_err(|e| CliError::Validation(format!("config parse error: {e}")))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Reads, parses and validates a scenario configuration file.
pub fn parse_config(path: &Path) -> Result<ScenarioConfig, CliError> {
    parse_config_str(&read_text(path)?)
        .map_err(|e| match e {
            CliError::Validation(msg) => CliError::Validation(format!("{}: {msg}", path.display())),
            other => other,
        })
}

/// Fixed-point rendering with `digits` decimals that never prints `-0.000…`.
fn fixed(value: f64, digits: usize) -> String {
    let s = format!("{value:.digits$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixFile {
    re: Vec<Vec<f64>>,
    #[serde(default)]
    im: Option<Vec<Vec<f64>>>,
}

/// Reads a 2×2 observable from TOML (`re = [[..], [..]]`, optional `im`).
pub fn read_observable(path: &Path) -> Result<LinearOperator, CliError> {
    let m: MatrixFile = toml::from_str(&read_text(path)?)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    let im = m.im.unwrap_or_else(|| vec![vec![0.0; 2]; 2]);
    let shape_ok = |rows: &Vec<Vec<f64>>| rows.len() == 2 && rows.iter().all(|r| r.len() == 2);
    if !shape_ok(&m.re) || !shape_ok(&im) {
        return Err(CliError::Validation(format!("{}: observable must be 2x2", path.display())));
    }
    let entries = (0..2).flat_map(|r| (0..2).map(move |c| (r, c))).map(|(r, c)| (r, c, C64::new(m.re[r][c], im[r][c])));
    Ok(LinearOperator::from_triplets(2, 2, entries, BasisTag::spin())?)
}

/// `naive`: expectation of the observable on spin 2, printed with 12 decimals.
pub fn cmd_naive(observable: ObservableArg, file: Option<&Path>, kick: bool) -> Result<String, CliError> {
    let c = match observable {
        ObservableArg::Sx => spin::sigma_x(),
        ObservableArg::Sy => spin::sigma_y(),
        ObservableArg::Sz => spin::sigma_z(),
        ObservableArg::Identity => spin::identity(),
        ObservableArg::File => {
            let path = file.ok_or_else(|| CliError::Validation("--observable file needs --file <PATH>".into()))?;
            read_observable(path)?
        }
    };
    Ok(fixed(run_naive_sorkin(&c, kick)?, 12))
}

/// `simulate`: runs both arms and writes the TOML report to `out`.
pub fn cmd_simulate(
    config: &Path,
    out: &Path,
    seed: u64,
    dump_state: Option<&Path>,
) -> Result<ReportFile, CliError> {
    let cfg = parse_config(config)?;
    let start = Instant::now();
    let protocol = Protocol::new(&cfg)?;
    let report = protocol.run()?;
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        seed,
        config: cfg,
    };
    let file = ReportFile::new(&report, manifest);
    write_text(out, &file.to_toml()?)?;
    if let Some(path) = dump_state {
        write_text(path, &state_dump(&protocol)?)?;
    }
    Ok(file)
}

/// Final-stage amplitudes of every branch of both arms as CSV rows
/// `arm,branch,weight,index,re,im`; zero amplitudes are omitted.
pub fn state_dump(protocol: &Protocol) -> Result<String, CliError> {
    let mut out = String::from("arm,branch,weight,index,re,im\n");
    for (name, arm) in [("kick", Arm::Kick), ("nokick", Arm::Nokick)] {
        let trace = protocol.run_arm(arm)?;
        for (b, branch) in trace.final_state.branches().iter().enumerate() {
            for (i, a) in branch.state.amps().iter().enumerate() {
                if a.norm_sqr() > 0.0 {
                    let _ = writeln!(out, "{name},{b},{:e},{i},{:e},{:e}", branch.weight, a.re, a.im);
                }
            }
        }
    }
    Ok(out)
}

/// `check-spacelike`: certificate for the configured initial state over `t1 + t2`.
pub fn cmd_check_spacelike(config: &Path) -> Result<(String, bool), CliError> {
    let cfg = parse_config(config)?;
    let cert = Protocol::new(&cfg)?.certificate()?;
    let mut text = toml::to_string(&cert).map_err(|e| CliError::Validation(e.to_string()))?;
    for (name, value) in [
        ("leak_13", cert.leak_13),
        ("leak_31", cert.leak_31),
        ("overlap_O1", cert.overlap_o1),
        ("overlap_O3", cert.overlap_o3),
    ] {
        if value > cert.epsilon {
            let _ = writeln!(text, "# {name} = {value:e} exceeds epsilon = {:e}", cert.epsilon);
        }
    }
    Ok((text, cert.pass))
}

/// `dump-density`: per-site marginal occupancies of one arm at one stage.
pub fn cmd_dump_density(config: &Path, out: &Path, arm: Arm, stage: Stage) -> Result<String, CliError> {
    let cfg = parse_config(config)?;
    let protocol = Protocol::new(&cfg)?;
    let trace = protocol.run_arm(arm)?;
    let n = cfg.n;
    let (mut first, mut second) = (vec![0.0; n], vec![0.0; n]);
    for b in trace.stage(stage).branches() {
        let (f, s) = site_marginals(protocol.space(), &b.state)?;
        for x in 0..n {
            first[x] += b.weight * f[x];
            second[x] += b.weight * s[x];
        }
    }
    let mut csv = String::from("site,occ_particle_slot1,occ_particle_slot2,occ_symmetrized\n");
    for x in 0..n {
        let _ = writeln!(
            csv,
            "{x},{},{},{}",
            fixed(first[x], 12),
            fixed(second[x], 12),
            fixed(first[x] + second[x], 12)
        );
    }
    write_text(out, &csv)?;
    Ok(csv)
}

/// Dispatches a parsed command line; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    if cli.threads > 0 {
        // Only fails if a global pool already exists, in which case it is reused.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global();
    }
    let result = match cli.command {
        Command::Naive { observable, file, kick } => {
            cmd_naive(observable, file.as_deref(), kick).map(|v| println!("{v}"))
        }
        Command::Simulate { config, out, dump_state } => {
            cmd_simulate(&config, &out, cli.seed, dump_state.as_deref()).map(|r| {
                println!(
                    "delta = {:e}  arrival_prob = {:.6}  certificate.pass = {}  -> {}",
                    r.delta,
                    r.arrival_prob,
                    r.certificate.pass,
                    out.display()
                )
            })
        }
        Command::CheckSpacelike { config } => cmd_check_spacelike(&config).and_then(|(text, pass)| {
            print!("{text}");
            if pass {
                Ok(())
            } else {
                Err(CliError::CertificateFailed)
            }
        }),
        Command::DumpDensity { config, out, arm, stage } => {
            cmd_dump_density(&config, &out, arm.into(), stage.into()).map(|_| ())
        }
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
