use clap::Parser;

fn main() {
    let cli = ruc_cli::Cli::parse();
    std::process::exit(ruc_cli::run(cli));
}
