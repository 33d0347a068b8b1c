fn main() {
    std::process::exit(mooring_fd::cli::main_entry());
}
