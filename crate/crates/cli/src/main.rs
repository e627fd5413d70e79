fn main() {
    std::process::exit(aptqfi::main_with(std::env::args_os()));
}
