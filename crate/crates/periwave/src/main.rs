use clap::Parser;

fn main() {
    let cli = periwave::cli::Cli::parse();
    std::process::exit(periwave::cli::run(cli));
}
