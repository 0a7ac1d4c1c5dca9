use clap::Parser;

fn main() {
    let cli = mcsbr_cli::Cli::parse();
    match mcsbr_cli::execute(cli) {
        Ok(lines) => {
            for l in lines {
                println!("{l}");
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(1);
        }
    }
}
