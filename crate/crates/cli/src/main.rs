use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lieforge::catalog::{DEP, VARS};
use lieforge::expr::JetVar;
use lieforge::lie::prolong;
use lieforge_cli::audit::{self, Context};
use lieforge_cli::report::{Observation, Report};
use serde_json::json;

#[derive(Parser)]
#[command(name = "lieforge", version, about = "Point symmetries, reductions and solution audits for the potential CBS equation")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Parameter values, e.g. a=1,b=2,c=3,d=1. Defaults to the manifest's.
    #[arg(long, global = true)]
    params: Option<String>,
    /// Kernel specialization, e.g. lambda=0,gamma=0.
    #[arg(long, global = true)]
    spec: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Fixture directory. Overrides LIEFORGE_FIXTURES.
    #[arg(long, global = true)]
    fixtures: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Cmd {
    /// Prints every prolongation coefficient of a field.
    Prolong {
        field: String,
        #[arg(long, default_value_t = 1)]
        order: u32,
    },
    /// Generates the determining system of the equation.
    Determining {
        /// Print every equation.
        #[arg(long)]
        full: bool,
    },
    /// Substitutes a field into the determining system.
    Check { field: String },
    /// Commutator table of a basis.
    Table {
        /// Comma separated field names.
        #[arg(long, value_delimiter = ',')]
        basis: Option<Vec<String>>,
    },
    /// Pulls an equation back through a reduction ansatz.
    Reduce {
        /// `cbs` or a reduced equation name.
        input: String,
        ansatz: String,
        /// Compare with this printed reduced equation.
        #[arg(long)]
        printed: Option<String>,
    },
    /// Symbolic and sampled residual of a catalog solution.
    Verify { solution: String },
    /// Residual along the flow of a generator applied to a solution.
    Orbit {
        solution: String,
        index: usize,
        #[arg(long)]
        first_order: bool,
        #[arg(long, value_delimiter = ',')]
        eps: Option<Vec<f64>>,
    },
    /// Runs every check and compares with the manifest.
    Audit,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Config(#[from] audit::ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {err}")]
    Write { path: String, err: std::io::Error },
}

fn run(cli: Cli) -> Result<Report, CliError> {
    let c = &cli.common;
    let ctx = Context::load(c.fixtures.clone(), c.params.as_deref(), c.spec.as_deref(), c.seed)?;
    let usage = CliError::Usage;
    let items = match &cli.cmd {
        Cmd::Prolong { field, order } => {
            let v = field_of(&ctx, field).map_err(usage)?;
            let pv = prolong(&v, *order).map_err(|e| CliError::Usage(e.to_string()))?;
            pv.eta_j
                .iter()
                .map(|(j, e)| {
                    let name = if j.is_zero() { "eta".to_string() } else { format!("eta[{}]", JetVar::new(DEP, j.clone())) };
                    let o = Observation::pass(format!("{e}")).with_data(json!({ "index": name, "value": e.to_string() }));
                    ctx.item(&format!("prolong.{field}.{name}"), "prolong", o)
                })
                .collect()
        }
        Cmd::Determining { full } => {
            let (sys, secs) = ctx.system().map_err(usage)?;
            let mut items = vec![ctx.item(
                "determining.system",
                "determining",
                Observation::pass(format!("{} equations in {secs:.2}s", sys.len())).metric("seconds", *secs),
            )];
            if *full {
                for (k, (m, e)) in sys.equations.iter().enumerate() {
                    let label = lieforge::expr::Expr::monomial_expr(m);
                    items.push(ctx.item(&format!("determining.eq{}", k + 1), "determining", Observation::pass(format!("[{label}] {e} = 0"))));
                }
            }
            items
        }
        Cmd::Check { field } => {
            let v = field_of(&ctx, field).map_err(usage)?;
            vec![ctx.item(&format!("determining.{field}"), "determining", audit::check_field(&ctx, &v))]
        }
        Cmd::Table { basis } => {
            let names = basis.clone().unwrap_or_else(audit::default_basis);
            audit::basis(&ctx, &names).map_err(usage)?;
            judge_all(&ctx, audit::table_of(&ctx, &names))
        }
        Cmd::Reduce { input, ansatz, printed } => {
            if input != "cbs" {
                ctx.cat.reduced_equation(input).map_err(|e| CliError::Usage(e.to_string()))?;
            }
            ctx.cat.ansatz(ansatz).map_err(|e| CliError::Usage(e.to_string()))?;
            let o = audit::compare_pullback(&ctx, input, ansatz, printed.as_deref());
            let id = audit::PULLBACKS
                .iter()
                .find(|p| p.1 == input && p.2 == ansatz && Some(p.3) == printed.as_deref())
                .map_or_else(|| format!("reduce.{input}.{ansatz}"), |p| p.0.to_string());
            vec![ctx.item(&id, "reduction", o)]
        }
        Cmd::Verify { solution } => {
            ctx.cat.solution(solution, &ctx.params).map_err(|e| CliError::Usage(e.to_string()))?;
            vec![
                ctx.item(&format!("solution.{solution}.symbolic"), "solution", audit::solution_symbolic(&ctx, solution)),
                ctx.item(&format!("solution.{solution}.numeric"), "solution", audit::solution_numeric(&ctx, solution)),
            ]
        }
        Cmd::Orbit { solution, index, first_order, eps } => {
            ctx.cat.solution(solution, &ctx.params).map_err(|e| CliError::Usage(e.to_string()))?;
            if !(1..=6).contains(index) {
                return Err(CliError::Usage(format!("generator index {index} is not in 1..=6")));
            }
            let kind = if *first_order { "first-order" } else { "exact" };
            let o = audit::orbit(&ctx, solution, *index, *first_order, eps.as_deref());
            vec![ctx.item(&format!("orbit.{solution}.X{index}.{kind}"), "orbit", o)]
        }
        Cmd::Audit => audit::run(&ctx),
    };
    let name = match cli.cmd {
        Cmd::Prolong { .. } => "prolong",
        Cmd::Determining { .. } => "determining",
        Cmd::Check { .. } => "check",
        Cmd::Table { .. } => "table",
        Cmd::Reduce { .. } => "reduce",
        Cmd::Verify { .. } => "verify",
        Cmd::Orbit { .. } => "orbit",
        Cmd::Audit => "audit",
    };
    Ok(ctx.report(name, items))
}

fn field_of(ctx: &Context, name: &str) -> Result<lieforge::lie::VectorField, String> {
    if let Some(v) = audit::translation(name) {
        return Ok(v);
    }
    ctx.cat.field(name, &ctx.spec).map_err(|e| e.to_string()).and_then(|v| {
        if v.var_refs() == VARS {
            Ok(v)
        } else {
            Err(format!("`{name}` does not act on ({})", VARS.join(",")))
        }
    })
}

fn judge_all(ctx: &Context, found: Vec<(String, &'static str, Observation)>) -> Vec<lieforge_cli::report::Item> {
    found.into_iter().map(|(id, cat, o)| ctx.item(&id, cat, o)).collect()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (format, out) = (cli.common.format, cli.common.out.clone());
    let report = match run(cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let text = match format {
        Format::Json => report.to_json(),
        Format::Text => report.to_text(),
    };
    match out {
        Some(p) => {
            if let Err(err) = std::fs::write(&p, &text) {
                eprintln!("error: {}", CliError::Write { path: p.display().to_string(), err });
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::from(report.exit_code as u8)
}
