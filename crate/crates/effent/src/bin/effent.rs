use clap::Parser;
use effent::cli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}
