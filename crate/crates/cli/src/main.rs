fn main() {
    std::process::exit(pll_lockin_cli::main_with(std::env::args_os()));
}
