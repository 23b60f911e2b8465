//! `ctfim` command-line entry point; see [`ctfim::cli`].

fn main() {
    std::process::exit(ctfim::cli::main_with_args(std::env::args_os()));
}
