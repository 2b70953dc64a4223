use clap::Parser;

use nonmarkov_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
        }
        Err(e) => {
            eprintln!("nonmarkov {}: {e}", cli.command.name());
            std::process::exit(e.exit_code());
        }
    }
}
