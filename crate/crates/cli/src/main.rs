use clap::Parser;

fn main() {
    let args = isac_bench::config::Args::parse();
    if let Err(err) = isac_bench::run(args) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
