use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

use su3_kbasis::compare::compare;
use su3_kbasis::coupled::{decompose_product, Tolerances};
use su3_kbasis::io::{csv_string, json_string, read_cg, ValueFormat};
use su3_kbasis::kbasis::alt2_from_cg;
use su3_kbasis::oracle::validation_suite;
use su3_kbasis::{build_table, BasisChoice, BuildOptions, BuiltTable, IrrepLabel};

#[derive(Parser)]
#[command(name = "su3k", version, about = "SU(3) quadrupole matrix elements in SO(3)-coupled bases")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the irreps of (λ1,0) x (λ2,0) with dimensions and Casimir values.
    Decompose { lambda1: u32, lambda2: u32 },
    /// Write the reduced quadrupole table of (λ,μ) in one basis.
    Table {
        lambda: u32,
        mu: u32,
        /// gtw, alt1, alt2, alt3, asymptotic or rotor
        #[arg(long, default_value = "alt3")]
        basis: BasisChoice,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        build: BuildArgs,
        /// Significant digits; 0 writes values that parse back exactly.
        #[arg(long, default_value_t = 9)]
        precision: usize,
        #[arg(long)]
        scientific: bool,
    },
    /// Print tables of (λ,μ) in several bases side by side.
    Compare {
        lambda: u32,
        mu: u32,
        #[arg(required = true, num_args = 2..)]
        bases: Vec<BasisChoice>,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        build: BuildArgs,
    },
    /// Run the explicit-matrix validation checks.
    Check {
        #[arg(long, default_value_t = 4)]
        max_lambda: u32,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct BuildArgs {
    /// Coefficient file for alt2.
    #[arg(long)]
    cg_file: Option<PathBuf>,
    /// Parent irreps (λ1,0) x (λ2,0) as `λ1,λ2`.
    #[arg(long, value_parser = parse_parents)]
    parents: Option<(u32, u32)>,
    #[arg(long, default_value_t = Tolerances::default().cluster)]
    cluster_tol: f64,
    #[arg(long, default_value_t = Tolerances::default().degeneracy)]
    degeneracy_tol: f64,
}

impl BuildArgs {
    fn options(&self) -> BuildOptions {
        BuildOptions {
            parents: self.parents,
            tolerances: Tolerances { cluster: self.cluster_tol, degeneracy: self.degeneracy_tol },
        }
    }
}

fn parse_parents(s: &str) -> Result<(u32, u32), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected `λ1,λ2`, got `{s}`"))?;
    let num = |x: &str| x.trim().parse::<u32>().map_err(|_| format!("bad parent label `{x}`"));
    Ok((num(a)?, num(b)?))
}

fn usage_error(kind: ErrorKind, msg: impl std::fmt::Display) -> ! {
    Cli::command().error(kind, msg).exit()
}

fn build(irrep: IrrepLabel, basis: BasisChoice, args: &BuildArgs) -> su3_kbasis::Result<BuiltTable> {
    if basis != BasisChoice::AltII {
        return build_table(irrep, basis, &args.options());
    }
    let Some(path) = &args.cg_file else {
        usage_error(ErrorKind::MissingRequiredArgument, "basis alt2 needs --cg-file");
    };
    let cg = read_cg(BufReader::new(File::open(path)?))?;
    let (table, warnings) = alt2_from_cg(&cg, irrep)?;
    Ok(BuiltTable { table, warnings })
}

fn write_out(out: Option<&PathBuf>, text: &str) -> io::Result<()> {
    match out {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            w.write_all(text.as_bytes())?;
            w.flush()
        }
        None => io::stdout().lock().write_all(text.as_bytes()),
    }
}

fn run(cli: Cli) -> su3_kbasis::Result<bool> {
    match cli.command {
        Command::Decompose { lambda1, lambda2 } => {
            if lambda1 < lambda2 {
                usage_error(ErrorKind::ValueValidation, format!("need λ1 >= λ2, got {lambda1} < {lambda2}"));
            }
            let mut text = String::new();
            for irrep in decompose_product(lambda1, lambda2)? {
                text += &format!("{irrep} {} {}\n", irrep.dimension(), irrep.casimir2());
            }
            write_out(None, &text)?;
            Ok(true)
        }
        Command::Table { lambda, mu, basis, format, out, build: args, precision, scientific } => {
            let irrep = IrrepLabel::new(lambda, mu);
            let built = build(irrep, basis, &args)?;
            for w in &built.warnings {
                eprintln!("warning: {w}");
            }
            let text = match format {
                Format::Csv => csv_string(&built.table, ValueFormat { precision, scientific }),
                Format::Json => json_string(&built.table, &built.warnings),
            };
            write_out(out.as_ref(), &text)?;
            Ok(true)
        }
        Command::Compare { lambda, mu, bases, json, build: args } => {
            let irrep = IrrepLabel::new(lambda, mu);
            let mut tables = Vec::new();
            for b in bases {
                let built = build(irrep, b, &args)?;
                for w in &built.warnings {
                    eprintln!("warning: {b}: {w}");
                }
                tables.push(built.table);
            }
            let report = compare(&tables);
            let text = if json { serde_json::to_string_pretty(&report)? + "\n" } else { report.render() };
            write_out(None, &text)?;
            Ok(true)
        }
        Command::Check { max_lambda } => {
            let results = validation_suite(max_lambda);
            let mut text = String::new();
            for r in &results {
                let status = if r.passed { "PASS" } else { "FAIL" };
                text += &format!("{status} {} = {:.3e} (tol {:.0e})\n", r.name, r.value, r.tolerance);
            }
            write_out(None, &text)?;
            Ok(results.iter().all(|r| r.passed))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(su3_kbasis::Error::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
