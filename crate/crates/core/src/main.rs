use std::io;

fn main() {
    let threads = std::env::var(segproc::cli::THREADS_ENV).ok();
    let code = segproc::cli::run(std::env::args_os(), threads.as_deref(), &mut io::stdout().lock(), &mut io::stderr().lock());
    std::process::exit(code);
}
