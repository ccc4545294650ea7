use clap::Parser;

use mftg_cli::canonical::to_canonical_line;
use mftg_cli::{run, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let cli = Cli::parse();
    if let Err(e) = run(cli, &argv) {
        eprintln!("{}", to_canonical_line(&e.to_json()));
        std::process::exit(e.exit_code());
    }
}
