use clap::Parser;

use ppa_rate::cli::{execute, Cli};

fn main() {
    let cli = Cli::parse();
    let code = execute(&cli, &mut std::io::stderr());
    std::process::exit(code);
}
