fn main() {
    std::process::exit(siggan::cli::main_entry());
}
