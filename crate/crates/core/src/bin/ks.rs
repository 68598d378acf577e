use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use kslift::cli::{run, Options, SUBCOMMANDS};

/// JSON front end for the KS lift toolkit. Reads the input document from
/// standard input unless `--input` is given.
#[derive(Parser)]
#[command(name = "ks", version)]
struct Args {
    #[arg(value_parser = clap::builder::PossibleValuesParser::new(SUBCOMMANDS))]
    command: String,
    /// Read the input document from a file.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 12)]
    max_degree: u32,
    /// Verification tolerance; the default depends on the check.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Significant digits for printed reals.
    #[arg(long, default_value_t = 15)]
    precision: usize,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let text = match &args.input {
        Some(path) => std::fs::read_to_string(path),
        None => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).map(|_| s)
        }
    };
    let text = match text {
        Ok(t) => t,
        Err(e) => {
            eprintln!("ks: cannot read input: {e}");
            return ExitCode::from(2);
        }
    };
    let opts = Options {
        max_degree: args.max_degree,
        tol: args.tol,
        samples: args.samples,
        seed: args.seed,
        precision: args.precision,
    };
    let out = run(&args.command, &text, &opts);
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(out.stdout.as_bytes());
    ExitCode::from(out.code as u8)
}
