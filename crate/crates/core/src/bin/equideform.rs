//! The `equideform` command-line tool; see [`equideform::cli`].

fn main() {
    std::process::exit(equideform::cli::run(std::env::args_os()));
}
