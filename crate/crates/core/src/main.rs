use refined_stark::cli;

fn main() {
    let code = cli::main_with_args(std::env::args_os());
    std::process::exit(code);
}
