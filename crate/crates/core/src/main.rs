use std::io::Write;

fn main() {
    let preset = std::env::var(wcolab::cli::PRESET_ENV).ok();
    let out = wcolab::cli::run_from(std::env::args_os(), preset.as_deref());
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    let _ = std::io::stdout().flush();
    std::process::exit(out.code);
}
