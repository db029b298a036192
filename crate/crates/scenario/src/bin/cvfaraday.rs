use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use cvfaraday_scenario::ast::StatementKind;
use cvfaraday_scenario::{
    emit_result, emit_table, execute_with, figure_table, parse_bytes, sweep_scenario, Figure, Format,
    ScenarioAst,
};

const DEFAULT_SEED: u64 = 1;

#[derive(Parser)]
#[command(name = "cvfaraday", version, about = "Gaussian atom-light interface simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::Csv => Format::Csv,
            OutputFormat::Json => Format::Json,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FigureName {
    Fig3,
    Fig5,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a scenario once and print its reports.
    Run {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, value_enum, default_value = "csv")]
        format: OutputFormat,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override a declared parameter, `name=value`.
        #[arg(long = "set", value_parser = parse_assignment)]
        set: Vec<(String, f64)>,
    },
    /// Re-run a scenario over a grid of one parameter.
    Sweep {
        file: PathBuf,
        #[arg(long, requires = "range")]
        param: Option<String>,
        /// `start:stop:step`.
        #[arg(long, value_parser = parse_range, requires = "param")]
        range: Option<(f64, f64, f64)>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, value_enum, default_value = "csv")]
        format: OutputFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Regenerate a figure dataset.
    Figures {
        #[arg(value_enum)]
        figure: FigureName,
        #[arg(long, value_enum, default_value = "csv")]
        format: OutputFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_assignment(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or("expected name=value")?;
    let v: f64 = v.parse().map_err(|_| format!("`{v}` is not a number"))?;
    Ok((k.to_string(), v))
}

fn parse_range(s: &str) -> Result<(f64, f64, f64), String> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.parse::<f64>().map_err(|_| format!("`{p}` is not a number")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [a, b, c] => Ok((a, b, c)),
        _ => Err("expected start:stop:step".into()),
    }
}

enum Failure {
    Parse(String),
    Runtime(String),
}

fn load(path: &Path) -> Result<ScenarioAst, Failure> {
    let bytes = fs::read(path).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
    parse_bytes(&bytes).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))
}

fn write(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Runtime(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let runtime = |e: &dyn std::fmt::Display| Failure::Runtime(e.to_string());
    match cli.command {
        Command::Run {
            file,
            seed,
            format,
            out,
            set,
        } => {
            let ast = load(&file)?;
            let overrides: Vec<(&str, f64)> = set.iter().map(|(k, v)| (k.as_str(), *v)).collect();
            let result = execute_with(&ast, seed, &overrides).map_err(|e| runtime(&e))?;
            write(out.as_deref(), &emit_result(&result, format.into(), ast.wants_state()))
        }
        Command::Sweep {
            file,
            param,
            range,
            seed,
            format,
            out,
        } => {
            let ast = load(&file)?;
            let jobs: Vec<(String, (f64, f64, f64))> = match (param, range) {
                (Some(p), Some(r)) => vec![(p, r)],
                _ => ast
                    .sweeps()
                    .filter_map(|s| match &s.node {
                        StatementKind::Sweep {
                            param,
                            start,
                            stop,
                            step,
                        } => Some((param.node.clone(), (*start, *stop, *step))),
                        _ => None,
                    })
                    .collect(),
            };
            if jobs.is_empty() {
                return Err(Failure::Runtime(
                    "no sweep: pass --param and --range or add a `sweep` line".into(),
                ));
            }
            let mut text = String::new();
            for (i, (p, r)) in jobs.iter().enumerate() {
                let table = sweep_scenario(&ast, seed, p, *r).map_err(|e| runtime(&e))?;
                if i > 0 {
                    text.push('\n');
                }
                text += &emit_table(&table, format.into());
            }
            write(out.as_deref(), &text)
        }
        Command::Figures { figure, format, out } => {
            let f = match figure {
                FigureName::Fig3 => Figure::Fig3,
                FigureName::Fig5 => Figure::Fig5,
            };
            let table = figure_table(f).map_err(|e| runtime(&e))?;
            write(out.as_deref(), &emit_table(&table, format.into()))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Parse(msg)) => {
            eprintln!("parse error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
