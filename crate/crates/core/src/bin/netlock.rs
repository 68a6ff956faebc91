fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("NETLOCK_LOG", "warn")).init();
    std::process::exit(netlock::cli::main_with_args(std::env::args_os()));
}
