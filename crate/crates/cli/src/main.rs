use clap::Parser;

fn main() {
    let args = biokz_cli::cli::Args::parse();
    if let Err(e) = biokz_cli::cli::run(args) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
