fn main() {
    std::process::exit(potentialforge::cli::main());
}
