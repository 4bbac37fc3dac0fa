use clap::Parser;
use gibbslab_cli::error::EXIT_VALIDATION;
use gibbslab_cli::{configure_threads, run, Cli};
use serde_json::json;

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() && std::env::args().any(|a| a == "--json-errors") => {
            let envelope = json!({
                "error": { "kind": "UsageError", "message": e.to_string(), "exit_code": EXIT_VALIDATION, "details": null }
            });
            eprintln!("{envelope}");
            std::process::exit(EXIT_VALIDATION);
        }
        Err(e) => e.exit(),
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let outcome = configure_threads().and_then(|()| run(&cli.command));
    match outcome {
        Ok(paths) => {
            for p in paths {
                println!("{p}");
            }
        }
        Err(e) => {
            if cli.json_errors {
                eprintln!("{}", e.envelope());
            } else {
                eprintln!("error: {e}");
            }
            std::process::exit(e.exit_code());
        }
    }
}
