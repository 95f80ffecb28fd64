use clap::Parser;

use ptwishart_cli::{emit, run, Cli};

fn main() {
    env_logger::init();
    if let Some(threads) = std::env::var("PTWISHART_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    let cli = Cli::parse();
    match run(&cli).and_then(|output| emit(&output, &cli.output)) {
        Ok(()) => {}
        Err(err) => {
            eprintln!("{}", err.to_json());
            std::process::exit(err.exit_code());
        }
    }
}
