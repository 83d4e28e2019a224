use clap::Parser;

fn main() {
    let cli = spotvol::cli::Cli::parse();
    std::process::exit(spotvol::cli::run(cli));
}
