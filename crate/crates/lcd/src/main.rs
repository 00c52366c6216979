use clap::Parser;

fn main() {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let cli = lcd::cli::Cli::parse();
    match lcd::cli::run(cli, argv) {
        Ok(()) => std::process::exit(lcd::EXIT_OK),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
