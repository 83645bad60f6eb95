use clap::Parser;
use glvortex::cli_io::{configure_workers, exit_code, run, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = configure_workers() {
        eprintln!("glvortex: {e}");
        std::process::exit(exit_code(&e));
    }
    // clap prints help/usage itself and exits with 2 on malformed flags.
    let cli = Cli::parse();
    let outcome = cli.into_config().and_then(|cfg| run(&cfg));
    match outcome {
        Ok(out) => {
            for f in &out.files {
                println!("{}", f.display());
            }
        }
        Err(e) => {
            eprintln!("glvortex: {e}");
            std::process::exit(exit_code(&e));
        }
    }
}
