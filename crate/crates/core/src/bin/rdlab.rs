//! Command-line front end; all logic lives in the library's `cli` module.

fn main() {
    std::process::exit(rdlab::cli::cli_main());
}
