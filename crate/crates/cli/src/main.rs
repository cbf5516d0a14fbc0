fn main() {
    std::process::exit(relkepler_cli::run());
}
