use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fdq_cli::ops;
use fdq_cli::report::{emit, input_error_report, CommandOutput, EXIT_INPUT_ERROR};
use fdq_cli::workspace::{load_workspace, InputError, Workspace};

/// Exact symbolic engine for formal star products, deformed modules and
/// commutant lifting. Reports are JSON; exit codes: 0 pass, 1 fail with
/// witness, 2 inconclusive, 3 input error.
#[derive(Parser)]
#[command(name = "fdq", version, about)]
struct Cli {
    /// Workspace file (variables, tensor, star product, truncation).
    #[arg(long, global = true)]
    workspace: Option<PathBuf>,

    /// Override the workspace truncation order.
    #[arg(long, global = true)]
    order: Option<usize>,

    /// Monomial degree bound for exhaustive checks.
    #[arg(long, global = true)]
    degree_bound: Option<u32>,

    /// Ansatz bounds as `diffop_order,coeff_degree,base_derivatives`.
    #[arg(long, global = true)]
    bounds: Option<String>,

    /// Solve inside the translation-invariant subcomplex.
    #[arg(long, global = true)]
    equivariant: bool,

    /// Write the report to a file instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Report format (only `json`).
    #[arg(long, global = true, default_value = "json")]
    format: String,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Star product of two base expressions.
    Star { f: String, g: String },
    /// Star commutator of two base expressions.
    Commutator { f: String, g: String },
    /// Exhaustive associativity check of the workspace product.
    AssocCheck,
    /// Exhaustive Hermitian check of the workspace product.
    HermitianCheck,
    /// First-order antisymmetrized bracket of two base expressions.
    Poisson { f: String, g: String },
    /// Cyclic obstruction to the Jacobi identity of the tensor.
    Schouten,
    /// Deform a classically idempotent matrix.
    DeformProjector {
        /// Matrix expression, e.g. `[1 - x*y, y; x - x^2*y, x*y]`.
        matrix: String,
    },
    /// Deformed Hermitian metric value on two module columns.
    Metric { matrix: String, phi: String, psi: String },
    /// Verify the module axioms of a bundle deformation.
    ModuleCheck {
        /// Stage file; defaults to the product-bundle deformation.
        #[arg(long)]
        stages: Option<PathBuf>,
    },
    /// Extend a module deformation order by order.
    ExtendModule {
        #[arg(long)]
        stages: Option<PathBuf>,
        /// Stage to reach; defaults to the truncation order.
        #[arg(long)]
        target_order: Option<usize>,
    },
    /// Solve for an equivariant equivalence between two deformations.
    EquivSolve {
        #[arg(long)]
        stages_a: Option<PathBuf>,
        #[arg(long)]
        stages_b: Option<PathBuf>,
    },
    /// Lift a vertical operator into the commutant.
    LiftVertical {
        /// Operator JSON (inline or a file path).
        op: String,
    },
    /// Induced product of two vertical operators.
    StarPrime { op: String, op2: String },
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Star { .. } => "star",
        Command::Commutator { .. } => "commutator",
        Command::AssocCheck => "assoc-check",
        Command::HermitianCheck => "hermitian-check",
        Command::Poisson { .. } => "poisson",
        Command::Schouten => "schouten",
        Command::DeformProjector { .. } => "deform-projector",
        Command::Metric { .. } => "metric",
        Command::ModuleCheck { .. } => "module-check",
        Command::ExtendModule { .. } => "extend-module",
        Command::EquivSolve { .. } => "equiv-solve",
        Command::LiftVertical { .. } => "lift-vertical",
        Command::StarPrime { .. } => "star-prime",
    }
}

fn load(cli: &Cli) -> Result<Workspace, InputError> {
    if cli.format != "json" {
        return Err(InputError(format!("unsupported format '{}'", cli.format)));
    }
    let path = cli
        .workspace
        .as_ref()
        .ok_or_else(|| InputError("--workspace is required".into()))?;
    let mut ws = load_workspace(path)?;
    if let Some(order) = cli.order {
        if order < 1 {
            return Err(InputError("order must be at least 1".into()));
        }
        // rebuild the workspace at the overridden truncation
        let text = std::fs::read_to_string(path)
            .map_err(|e| InputError(format!("cannot read workspace: {e}")))?;
        let mut file: fdq_cli::workspace::WorkspaceFile =
            serde_json::from_str(&text).map_err(|e| InputError(format!("workspace JSON: {e}")))?;
        file.truncation_order = order;
        ws = fdq_cli::workspace::workspace_from_file(
            file,
            path.parent().unwrap_or(std::path::Path::new(".")),
        )?;
    }
    if let Some(d) = cli.degree_bound {
        ws.degree_bound = d;
    }
    if let Some(spec) = &cli.bounds {
        let parts: Vec<&str> = spec.split(',').collect();
        if parts.len() != 3 {
            return Err(InputError(
                "--bounds expects diffop_order,coeff_degree,base_derivatives".into(),
            ));
        }
        let parse = |s: &str| -> Result<u32, InputError> {
            s.trim()
                .parse()
                .map_err(|_| InputError(format!("bad bound '{s}'")))
        };
        ws.bounds = fdq_core::AnsatzBounds {
            max_diffop_order: parse(parts[0])?,
            max_coeff_degree: parse(parts[1])?,
            max_base_derivatives: parse(parts[2])?,
        };
    }
    Ok(ws)
}

fn run(cli: &Cli) -> Result<CommandOutput, InputError> {
    let ws = load(cli)?;
    let degree = ws.degree_bound;
    match &cli.command {
        Command::Star { f, g } => ops::cmd_star(&ws, f, g),
        Command::Commutator { f, g } => ops::cmd_commutator(&ws, f, g),
        Command::AssocCheck => ops::cmd_assoc_check(&ws, degree),
        Command::HermitianCheck => ops::cmd_hermitian_check(&ws, degree),
        Command::Poisson { f, g } => ops::cmd_poisson(&ws, f, g),
        Command::Schouten => ops::cmd_schouten(&ws),
        Command::DeformProjector { matrix } => ops::cmd_deform_projector(&ws, matrix),
        Command::Metric { matrix, phi, psi } => ops::cmd_metric(&ws, matrix, phi, psi),
        Command::ModuleCheck { stages } => {
            ops::cmd_module_check(&ws, stages.as_deref(), degree)
        }
        Command::ExtendModule { stages, target_order } => ops::cmd_extend_module(
            &ws,
            stages.as_deref(),
            target_order.unwrap_or(ws.order),
            cli.equivariant,
        ),
        Command::EquivSolve { stages_a, stages_b } => {
            ops::cmd_equiv_solve(&ws, stages_a.as_deref(), stages_b.as_deref(), degree)
        }
        Command::LiftVertical { op } => {
            ops::cmd_lift_vertical(&ws, op, degree, cli.equivariant)
        }
        Command::StarPrime { op, op2 } => ops::cmd_star_prime(&ws, op, op2),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e)
            if matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            ) =>
        {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            // malformed invocations are input errors under the exit contract
            let report = input_error_report("argv", &e.to_string());
            let _ = emit(&report, None);
            return ExitCode::from(EXIT_INPUT_ERROR as u8);
        }
    };
    let (report, code) = match run(&cli) {
        Ok(out) => (out.report, out.exit),
        Err(err) => (
            input_error_report(command_name(&cli.command), &err.0),
            EXIT_INPUT_ERROR,
        ),
    };
    if let Err(e) = emit(&report, cli.output.as_deref()) {
        eprintln!("cannot write report: {e}");
        return ExitCode::from(EXIT_INPUT_ERROR as u8);
    }
    ExitCode::from(code as u8)
}
