fn main() {
    std::process::exit(utm_qp::cli::run(std::env::args_os()));
}
