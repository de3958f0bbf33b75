use clap::Parser;

fn main() {
    let cli = qclab::cli::Cli::parse();
    std::process::exit(qclab::cli::run(&cli));
}
