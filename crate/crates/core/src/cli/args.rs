use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::protocol::{Arm, Stage};

#[derive(Debug, Parser)]
#[command(name = "sorkin", version, about = "Localized impossible-measurement simulator")]
pub struct Cli {
    /// Seed recorded in the run manifest.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads (0 = automatic).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Two-spin calculation without spatial structure.
    Naive {
        #[arg(long, value_enum)]
        observable: ObservableArg,
        /// 2x2 observable in TOML (`re`, optional `im`), with `--observable file`.
        #[arg(long)]
        file: Option<PathBuf>,
        #[arg(long)]
        kick: bool,
    },
    /// Run both arms of a scenario and write the report.
    Simulate {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write final branch amplitudes as `arm,branch,weight,index,re,im` CSV.
        #[arg(long)]
        dump_state: Option<PathBuf>,
    },
    /// Print the spacelike certificate; exit 1 when it fails.
    CheckSpacelike { config: PathBuf },
    /// Write per-site occupancies of one arm at one stage as CSV.
    DumpDensity {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        arm: ArmArg,
        #[arg(long, value_enum)]
        stage: StageArg,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ObservableArg {
    Sx,
    Sy,
    Sz,
    Identity,
    File,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ArmArg {
    Kick,
    Nokick,
}

impl From<ArmArg> for Arm {
    fn from(a: ArmArg) -> Self {
        match a {
            ArmArg::Kick => Arm::Kick,
            ArmArg::Nokick => Arm::Nokick,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum StageArg {
    Prepared,
    PostKick,
    PostO2,
    Final,
}

impl From<StageArg> for Stage {
    fn from(s: StageArg) -> Self {
        match s {
            StageArg::Prepared => Stage::Prepared,
            StageArg::PostKick => Stage::PostKick,
            StageArg::PostO2 => Stage::PostO2,
            StageArg::Final => Stage::Final,
        }
    }
}
