mod args;
mod commands;
mod config;
mod csvio;

use clap::Parser;

use args::{Cli, Command};

fn run(cli: &Cli) -> anyhow::Result<i32> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global()?;
    }
    match &cli.command {
        Command::CheckMixing(a) => commands::check_mixing_cmd(a),
        Command::Simulate(a) => commands::simulate_cmd(a),
        Command::Test(a) => commands::test_cmd(a),
        Command::DemoNonorthogonal(a) => commands::demo_cmd(a),
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("LOG_LEVEL", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { commands::EXIT_ERROR } else { commands::EXIT_OK };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let code = match run(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            commands::EXIT_ERROR
        }
    };
    std::process::exit(code);
}
