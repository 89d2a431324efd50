use clap::Parser;

fn main() {
    let cli = cohomolab::cli::Cli::parse();
    if let Err(e) = cohomolab::run(&cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
