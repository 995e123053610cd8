fn main() {
    std::process::exit(mnb_lab::cli::run());
}
