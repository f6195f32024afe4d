use clap::Parser;

fn main() {
    std::process::exit(skewmix::cli::execute(skewmix::cli::Cli::parse()));
}
