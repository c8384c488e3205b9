fn main() {
    let mut stdout = std::io::stdout().lock();
    std::process::exit(aircomp::cli::run_from(std::env::args_os(), &mut stdout));
}
