fn main() {
    std::process::exit(regbench_cli::run(std::env::args()));
}
