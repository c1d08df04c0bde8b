use clap::Parser;
use crb_kit::cli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}
