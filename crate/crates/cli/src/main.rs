use clap::Parser;

fn main() {
    let cli = match tropcyl_cli::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    std::process::exit(tropcyl_cli::main_with(&cli));
}
