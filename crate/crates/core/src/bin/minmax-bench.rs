fn main() {
    std::process::exit(saddle_newton::harness::cli_main(std::env::args_os()));
}
