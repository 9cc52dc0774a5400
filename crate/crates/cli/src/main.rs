use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use keller_cli::{
    error_report, parse_input, parse_matrix, parse_point, render, run_job, CliError, Command,
    Construction,
};

/// Unimodularity checks, lifting and constructions for polynomial maps over
/// finite local rings.
#[derive(Parser, Debug)]
#[command(name = "keller", version)]
struct Args {
    /// Input document, or `-` for standard input.
    input: PathBuf,
    /// check, lift, fiber, construct, restrict, probe or bound.
    #[arg(long = "cmd", default_value = "check")]
    cmd: String,
    /// Comma separated integers, e.g. `1,0,3`.
    #[arg(long, allow_hyphen_values = true)]
    point: Option<String>,
    #[arg(long, default_value_t = 20)]
    trials: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Maximum number of points a scan may visit.
    #[arg(long, default_value_t = keller_core::ring::DEFAULT_BUDGET)]
    budget: u64,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
    /// char-p, g-example, quasi-druzkowski, extension or sl-completion.
    #[arg(long)]
    construction: Option<String>,
    /// Rows separated by `;`, entries by `,`. Column j holds the cube
    /// coefficients of `H_j`.
    #[arg(long, allow_hyphen_values = true)]
    matrix: Option<String>,
    #[arg(long)]
    degree: Option<u64>,
}

fn run(args: &Args, command: Command) -> Result<String, CliError> {
    let text = if args.input.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        s
    } else {
        std::fs::read_to_string(&args.input)?
    };
    let mut spec = parse_input(&text)?;
    spec.command = command;
    let o = &mut spec.options;
    o.point = args.point.as_deref().map(parse_point).transpose()?;
    o.trials = args.trials;
    o.seed = args.seed;
    o.budget = args.budget;
    o.out = args.out.clone();
    o.json = args.json;
    o.construction = args.construction.as_deref().map(Construction::parse).transpose()?;
    o.matrix = args.matrix.as_deref().map(parse_matrix).transpose()?;
    o.degree = args.degree;
    let report = run_job(&spec)?;
    Ok(render(&report, args.json))
}

fn emit(args: &Args, text: &str) -> std::io::Result<()> {
    match &args.out {
        Some(path) => std::fs::write(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let command = Command::parse(&args.cmd);
    let outcome = command.and_then(|c| run(&args, c).map(|t| (c, t)));
    match outcome {
        Ok((_, text)) => match emit(&args, &text) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("keller: {e}");
                ExitCode::from(2)
            }
        },
        Err(e) => {
            let report = error_report(Command::parse(&args.cmd).ok(), &e);
            let text = render(&report, args.json);
            if emit(&args, &text).is_err() {
                eprint!("{text}");
            }
            eprintln!("keller: {e}");
            ExitCode::from(1)
        }
    }
}
