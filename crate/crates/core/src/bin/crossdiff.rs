use clap::Parser;

use crossdiff::io::cli::{error_record, execute, exit_code, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(outcome) => {
            print!("{}", outcome.stdout);
            std::process::exit(outcome.exit_code);
        }
        Err(e) => {
            eprintln!("{}", error_record(&e));
            std::process::exit(exit_code(&e));
        }
    }
}
