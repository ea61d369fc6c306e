fn main() {
    std::process::exit(ctm_routing::cli::run());
}
