fn main() {
    std::process::exit(ncsc_harness::cli_main(std::env::args_os()));
}
