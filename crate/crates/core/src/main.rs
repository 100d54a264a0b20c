use clap::Parser;

use corrclust::cli::{self, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = cli::run(cli) {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
