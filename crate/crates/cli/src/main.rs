use clap::Parser;

fn main() {
    let cli = ddins::Cli::parse();
    if let Err(e) = ddins::run(&cli) {
        eprintln!("ddins: {e}");
        std::process::exit(e.exit_code());
    }
}
