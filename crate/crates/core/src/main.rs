use std::process::ExitCode;

use tow_bandit::cli::{execute, parse_args, threads_from_env, ParseError};

fn main() -> ExitCode {
    let command = match parse_args(std::env::args_os()) {
        Ok(c) => c,
        Err(ParseError::Usage(e)) => e.exit(),
        Err(ParseError::Invalid(e)) => {
            eprintln!("tow-bandit: {e}");
            return ExitCode::from(2);
        }
    };
    let threads = match threads_from_env() {
        Ok(n) => n,
        Err(e) => {
            eprintln!("tow-bandit: {e}");
            return ExitCode::from(2);
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("tow-bandit: cannot start worker threads: {e}");
            return ExitCode::FAILURE;
        }
    };
    match pool.install(|| execute(&command, &mut std::io::stdout().lock())) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tow-bandit: {e}");
            ExitCode::FAILURE
        }
    }
}
