//! Binary entry point; all logic lives in [`mindgrid::cli`].

fn main() {
    std::process::exit(mindgrid::cli::run_cli(std::env::args()));
}
