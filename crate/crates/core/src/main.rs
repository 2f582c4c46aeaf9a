use clap::Parser;

fn main() {
    let cli = rgdu::cli::Cli::parse();
    match rgdu::cli::run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    }
}
