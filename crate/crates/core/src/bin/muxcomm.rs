use clap::Parser;

use muxcomm::cli::{execute, render, Cli};

fn main() {
    let cli = Cli::parse();
    let output = cli.command.common().output;
    match execute(&cli.command) {
        Ok(report) => {
            print!("{}", render(&report, output));
        }
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(err.exit_code());
        }
    }
}
