fn main() {
    let code = morrey_lab::cli::run(std::env::args().collect());
    std::process::exit(code as i32);
}
