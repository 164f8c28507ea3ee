use std::process::ExitCode;

fn main() -> ExitCode {
    let env_seed = std::env::var(pullback_cli::config::SEED_ENV).ok();
    ExitCode::from(pullback_cli::main_with(std::env::args_os(), env_seed.as_deref()))
}
