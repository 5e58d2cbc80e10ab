use clap::Parser;

use sorkin_lattice::cli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}
