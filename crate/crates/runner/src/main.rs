fn main() {
    std::process::exit(csoc_runner::cli::main());
}
