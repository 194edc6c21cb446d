fn main() { std::process::exit(ponomarev::cli::main_with_args(std::env::args_os())); }
