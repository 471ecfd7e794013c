use clap::Parser;

use monetif_cli::app::{run, Cli};

fn main() {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    if let Err(e) = run(cli, &mut stdout.lock()) {
        eprintln!("monetif: {e}");
        std::process::exit(e.exit_code());
    }
}
