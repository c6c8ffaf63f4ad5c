fn main() {
    std::process::exit(ofdm_cvqkd_cli::cli_main(std::env::args_os()));
}
