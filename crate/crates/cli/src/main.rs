use std::io::Write;

fn main() {
    let argv: Vec<String> = std::env::args().collect();
    let code = std::panic::catch_unwind(|| {
        let stdout = std::io::stdout();
        let mut out = stdout.lock();
        let code = surfest_cli::run(&argv, &mut out, &mut std::io::stderr());
        let _ = out.flush();
        code
    })
    .unwrap_or(2);
    std::process::exit(code);
}
