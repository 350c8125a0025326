use clap::Parser;

fn main() {
    let cli = gaussmap_cli::Cli::parse();
    std::process::exit(gaussmap_cli::run(&cli));
}
