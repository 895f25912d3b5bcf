fn main() {
    std::process::exit(tamelift::cli::main_entry());
}
