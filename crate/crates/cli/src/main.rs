use clap::Parser;
use personable_cli::{run, Cli};

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    if let Some(out) = run(cli)? {
        println!("{out}");
    }
    Ok(())
}
