fn main() {
    std::process::exit(vespa_sim::cli::main_entry());
}
