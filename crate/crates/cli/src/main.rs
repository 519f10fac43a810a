mod commands;
mod config;
mod svg;

use clap::Parser;

fn main() {
    let cli = config::Cli::parse();
    std::process::exit(commands::run(cli));
}
