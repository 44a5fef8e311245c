use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use varschouten::harness::{
    self, FuzzParams, ParityTarget, EXIT_DEFECT, EXIT_OK, EXIT_USAGE, SEED_ENV,
};
use varschouten::{
    euler, expand_trace, format, format_trace, functional_parity, is_exact, jacobi_defect,
    parse_density, schouten_bracket, ContextSpec, Expression, FieldContext, Functional,
    OutputFormat, Side,
};

#[derive(Parser)]
#[command(
    name = "varschouten",
    version,
    about = "Variational Schouten brackets and their Jacobi identity"
)]
struct Cli {
    /// Context file (`indep x` / `field q even antifield p` lines). Defaults
    /// to one variable x and an even field q with antifield p.
    #[arg(long, global = true)]
    ctx: Option<PathBuf>,

    /// Output format: plain, json or latex.
    #[arg(long, global = true, default_value = "plain")]
    format: OutputFormat,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Triple {
    #[arg(long = "F")]
    f: String,
    #[arg(long = "G")]
    g: String,
    #[arg(long = "H")]
    h: String,
}

#[derive(Subcommand)]
enum Command {
    /// Directed Euler derivative of a density.
    Euler {
        #[arg(long)]
        density: String,
        /// Field or antifield name.
        #[arg(long)]
        wrt: String,
        #[arg(long, default_value = "right")]
        side: Side,
    },
    /// Density of [[F,G]].
    Bracket {
        #[arg(long = "F")]
        f: String,
        #[arg(long = "G")]
        g: String,
    },
    /// Jacobi defect of (F,G,H); prints ZERO or NONZERO.
    Jacobi(Triple),
    /// Labeled term-by-term expansion of the Jacobi identity.
    Trace(Triple),
    /// Seeded random Jacobi trials.
    Fuzz {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 2)]
        max_jet_order: u16,
        #[arg(long, default_value_t = 3)]
        max_degree: u32,
        #[arg(long, default_value_t = 4)]
        max_monomials: usize,
        /// Disable exp/sin/cos factors.
        #[arg(long)]
        no_funcs: bool,
        #[arg(long, default_value = "any")]
        parity: ParityTarget,
    },
    /// Canonical form of a density.
    Normalize {
        #[arg(long)]
        density: String,
    },
}

fn context(path: &Option<PathBuf>) -> Result<Arc<FieldContext>> {
    match path {
        Some(p) => Ok(harness::load_context(p)?),
        None => Ok(ContextSpec::default().build()?),
    }
}

fn density(ctx: &Arc<FieldContext>, name: &str, text: &str) -> Result<Expression> {
    parse_density(text, ctx).with_context(|| format!("cannot parse {name} = {text:?}"))
}

fn functional(ctx: &Arc<FieldContext>, name: &str, text: &str) -> Result<Functional> {
    let f = Functional::labeled(density(ctx, name, text)?, name);
    functional_parity(&f).with_context(|| format!("{name} must be parity-homogeneous"))?;
    Ok(f)
}

fn triple(ctx: &Arc<FieldContext>, t: &Triple) -> Result<[Functional; 3]> {
    Ok([
        functional(ctx, "F", &t.f)?,
        functional(ctx, "G", &t.g)?,
        functional(ctx, "H", &t.h)?,
    ])
}

fn seed_override(seed: u64) -> Result<u64> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| anyhow!("{SEED_ENV} must be an unsigned 64-bit integer, got {v:?}")),
        Err(_) => Ok(seed),
    }
}

fn run(cli: Cli) -> Result<i32> {
    let ctx = context(&cli.ctx)?;
    let style = cli.format;
    match cli.command {
        Command::Normalize { density: text } => {
            println!("{}", format(&density(&ctx, "density", &text)?, style));
            Ok(EXIT_OK)
        }
        Command::Euler {
            density: text,
            wrt,
            side,
        } => {
            let e = density(&ctx, "density", &text)?;
            let owner = ctx
                .lookup(&wrt)
                .ok_or_else(|| anyhow!("`{wrt}` is not a declared field or antifield"))?;
            println!("{}", format(&euler(&e, owner, side), style));
            Ok(EXIT_OK)
        }
        Command::Bracket { f, g } => {
            let f = functional(&ctx, "F", &f)?;
            let g = functional(&ctx, "G", &g)?;
            let b = schouten_bracket(&f, &g)?;
            println!("{}", format(b.value.density(), style));
            Ok(EXIT_OK)
        }
        Command::Jacobi(t) => {
            let [f, g, h] = triple(&ctx, &t)?;
            let d = jacobi_defect(&f, &g, &h)?;
            let zero = is_exact(d.density());
            let status = if zero { "ZERO" } else { "NONZERO" };
            match style {
                OutputFormat::Json => println!(
                    "{}",
                    json!({ "defect": serde_json::from_str::<serde_json::Value>(&format(d.density(), style))?, "status": status })
                ),
                _ => {
                    println!("defect: {}", format(d.density(), style));
                    println!("{status}");
                }
            }
            Ok(if zero { EXIT_OK } else { EXIT_DEFECT })
        }
        Command::Trace(t) => {
            let [f, g, h] = triple(&ctx, &t)?;
            let report = expand_trace(&f, &g, &h)?;
            print!("{}", format_trace(&report, style));
            if style == OutputFormat::Json {
                println!();
            }
            Ok(if report.verdict.is_verified() {
                EXIT_OK
            } else {
                EXIT_DEFECT
            })
        }
        Command::Fuzz {
            seed,
            count,
            max_jet_order,
            max_degree,
            max_monomials,
            no_funcs,
            parity,
        } => {
            let params = FuzzParams {
                seed: seed_override(seed)?,
                count,
                max_jet_order,
                max_degree,
                max_monomials,
                allow_funcs: !no_funcs,
                parity_target: parity,
            };
            let report = harness::run_fuzz(&params, &ctx)?;
            match style {
                OutputFormat::Json => println!("{}", report.to_json()),
                _ => print!("{}", report.to_plain()),
            }
            Ok(if report.all_verified() {
                EXIT_OK
            } else {
                EXIT_DEFECT
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                EXIT_USAGE as u8
            } else {
                EXIT_OK as u8
            });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE as u8)
        }
    }
}
