use clap::Parser;

fn main() {
    let cli = gooddeal::cli::Cli::parse();
    std::process::exit(gooddeal::cli::run(&cli));
}
