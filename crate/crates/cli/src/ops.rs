//! Subcommand implementations: every command loads exact inputs,
//! dispatches into the engine and renders a machine-readable report
//! carrying the identity tag it verifies, the verdict, witnesses and the
//! bounds in force.

use std::path::Path;

use serde_json::json;

use fdq_core::commutant::{
    check_commutant, induced_star_prime, lift_vertical, CommutantError,
};
use fdq_core::diffop::op_series_apply;
use fdq_core::hochschild::HochschildError;
use fdq_core::module::{deform_idempotent, deform_metric, project_to_module, ModuleError};
use fdq_core::poly::monomials_up_to;
use fdq_core::principal::{
    check_module_structure, extend_module_order, product_bundle_module, solve_module_equivalence,
    GroupActionModel, ModuleDeformation, PrincipalError,
};
use fdq_core::series::{OpSeries, PolySeries};
use fdq_core::star::{check_associativity, check_hermitian, extract_poisson, schouten_square};
use fdq_core::Polynomial;

use crate::parser::{eval_matrix, eval_series, series_orders};
use crate::report::{
    CommandOutput, EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_PASS,
};
use crate::workspace::{
    load_operator, load_stages, mono_string, operator_to_file, stages_to_file, InputError,
    Workspace,
};

fn base_series(ws: &Workspace, text: &str, what: &str) -> Result<PolySeries, InputError> {
    eval_series(text, &ws.base_ctx()).map_err(|e| InputError(format!("{what}: {e}")))
}

/// Requires an expression with no deformation-parameter part.
fn base_poly(ws: &Workspace, text: &str, what: &str) -> Result<Polynomial, InputError> {
    let s = base_series(ws, text, what)?;
    for r in 1..=s.order() {
        if !s.coeff(r).is_zero() {
            return Err(InputError(format!(
                "{what}: deformation parameter not allowed here"
            )));
        }
    }
    Ok(s.coeff(0).clone())
}

pub fn cmd_star(ws: &Workspace, f: &str, g: &str) -> Result<CommandOutput, InputError> {
    let fs = base_series(ws, f, "left factor")?;
    let gs = base_series(ws, g, "right factor")?;
    let product = ws.star()?.multiply(&fs, &gs);
    let names = ws.base_names();
    Ok(CommandOutput::new(
        json!({
            "command": "star",
            "equation_tag": "Eq. (3)",
            "verdict": "pass",
            "truncation_order": ws.order,
            "result": series_orders(&product, &names),
        }),
        EXIT_PASS,
    ))
}

pub fn cmd_commutator(ws: &Workspace, f: &str, g: &str) -> Result<CommandOutput, InputError> {
    let fs = base_series(ws, f, "left factor")?;
    let gs = base_series(ws, g, "right factor")?;
    let comm = ws.star()?.commutator(&fs, &gs);
    let names = ws.base_names();
    Ok(CommandOutput::new(
        json!({
            "command": "commutator",
            "equation_tag": "Eq. (1)",
            "verdict": "pass",
            "truncation_order": ws.order,
            "result": series_orders(&comm, &names),
        }),
        EXIT_PASS,
    ))
}

pub fn cmd_assoc_check(ws: &Workspace, degree_bound: u32) -> Result<CommandOutput, InputError> {
    let report = check_associativity(ws.star()?, degree_bound);
    let names = ws.base_names();
    let mut body = json!({
        "command": "assoc-check",
        "equation_tag": "Eq. (3)",
        "verdict": if report.pass { "pass" } else { "fail" },
        "truncation_order": ws.order,
        "degree_bound": degree_bound,
        "complete_at_degree": report.complete_at,
        "triples_checked": report.triples_checked,
    });
    if let Some(f) = &report.failure {
        body["failing_order"] = json!(f.order);
        body["witness"] = json!({
            "f": mono_string(&f.witness.0, &names),
            "g": mono_string(&f.witness.1, &names),
            "h": mono_string(&f.witness.2, &names),
        });
    }
    Ok(CommandOutput::new(body, if report.pass { EXIT_PASS } else { EXIT_FAIL }))
}

pub fn cmd_hermitian_check(ws: &Workspace, degree_bound: u32) -> Result<CommandOutput, InputError> {
    let report = check_hermitian(ws.star()?, degree_bound);
    let names = ws.base_names();
    let mut body = json!({
        "command": "hermitian-check",
        "equation_tag": "Eq. (13)",
        "verdict": if report.pass { "pass" } else { "fail" },
        "truncation_order": ws.order,
        "degree_bound": degree_bound,
        "complete_at_degree": report.complete_at,
        "pairs_checked": report.pairs_checked,
    });
    if let Some(f) = &report.failure {
        body["failing_order"] = json!(f.order);
        body["witness"] = json!({
            "f": mono_string(&f.witness.0, &names),
            "g": mono_string(&f.witness.1, &names),
        });
    }
    Ok(CommandOutput::new(body, if report.pass { EXIT_PASS } else { EXIT_FAIL }))
}

pub fn cmd_poisson(ws: &Workspace, f: &str, g: &str) -> Result<CommandOutput, InputError> {
    let fp = base_poly(ws, f, "left argument")?;
    let gp = base_poly(ws, g, "right argument")?;
    let bracket = extract_poisson(ws.star()?);
    let value = bracket.apply2(&fp, &gp);
    let names = ws.base_names();
    Ok(CommandOutput::new(
        json!({
            "command": "poisson",
            "equation_tag": "Eq. (3)",
            "verdict": "pass",
            "truncation_order": ws.order,
            "result": value.display_with(&names),
        }),
        EXIT_PASS,
    ))
}

pub fn cmd_schouten(ws: &Workspace) -> Result<CommandOutput, InputError> {
    let comps = schouten_square(&ws.theta);
    let names = ws.base_names();
    let mut rendered = Vec::new();
    let mut witness = None;
    for ((mu, nu, ka), p) in &comps {
        let entry = json!({
            "indices": [names[*mu], names[*nu], names[*ka]],
            "value": p.display_with(&names),
        });
        if !p.is_zero() && witness.is_none() {
            witness = Some(entry.clone());
        }
        rendered.push(entry);
    }
    let pass = witness.is_none();
    let mut body = json!({
        "command": "schouten",
        "equation_tag": "Eq. (4)",
        "verdict": if pass { "pass" } else { "fail" },
        "truncation_order": ws.order,
        "components": rendered,
    });
    if let Some(w) = witness {
        body["witness"] = w;
    }
    Ok(CommandOutput::new(body, if pass { EXIT_PASS } else { EXIT_FAIL }))
}

fn classical_matrix(
    ws: &Workspace,
    text: &str,
    what: &str,
) -> Result<fdq_core::Matrix<Polynomial>, InputError> {
    let m = eval_matrix(text, &ws.base_ctx()).map_err(|e| InputError(format!("{what}: {e}")))?;
    for r in 1..=m.order() {
        if !m.coeff(r).is_zero() {
            return Err(InputError(format!(
                "{what}: deformation parameter not allowed here"
            )));
        }
    }
    Ok(m.coeff(0).clone())
}

pub fn cmd_deform_projector(ws: &Workspace, matrix: &str) -> Result<CommandOutput, InputError> {
    let e0 = classical_matrix(ws, matrix, "projector")?;
    let deformed = match deform_idempotent(ws.star()?, &e0) {
        Ok(d) => d,
        Err(ModuleError::NotIdempotent) => {
            return Err(InputError("matrix is not classically idempotent".into()))
        }
        Err(e) => return Err(InputError(e.to_string())),
    };
    let names = ws.base_names();
    let n = e0.rows();
    let mut entries = Vec::new();
    for i in 0..n {
        let mut row = Vec::new();
        for j in 0..n {
            let series = fdq_core::module::entry_series(&deformed.matrix, i, j);
            row.push(json!(series_orders(&series, &names)));
        }
        entries.push(json!(row));
    }
    Ok(CommandOutput::new(
        json!({
            "command": "deform-projector",
            "equation_tag": "Thm. 3.6",
            "verdict": "pass",
            "truncation_order": ws.order,
            "size": n,
            "defect_orders_per_step": deformed.defect_orders,
            "entries": entries,
        }),
        EXIT_PASS,
    ))
}

pub fn cmd_metric(
    ws: &Workspace,
    matrix: &str,
    phi: &str,
    psi: &str,
) -> Result<CommandOutput, InputError> {
    let e0 = classical_matrix(ws, matrix, "projector")?;
    let deformed = match deform_idempotent(ws.star()?, &e0) {
        Ok(d) => d.matrix,
        Err(e) => return Err(InputError(e.to_string())),
    };
    let metric = match deform_metric(ws.star()?, &deformed) {
        Ok(h) => h,
        Err(e) => return Err(InputError(e.to_string())),
    };
    let ctx = ws.base_ctx();
    let phi_col = eval_matrix(phi, &ctx).map_err(|e| InputError(format!("phi: {e}")))?;
    let psi_col = eval_matrix(psi, &ctx).map_err(|e| InputError(format!("psi: {e}")))?;
    if phi_col.coeff(0).cols() != 1 || psi_col.coeff(0).cols() != 1 {
        return Err(InputError("module elements must be column vectors".into()));
    }
    if phi_col.coeff(0).rows() != e0.rows() || psi_col.coeff(0).rows() != e0.rows() {
        return Err(InputError("column length must match the projector size".into()));
    }
    let phi_m = project_to_module(ws.star()?, metric.projector(), &phi_col);
    let psi_m = project_to_module(ws.star()?, metric.projector(), &psi_col);
    let value = metric.eval(&phi_m, &psi_m);
    use fdq_core::Conjugate;
    let symmetric = value.conj() == metric.eval(&psi_m, &phi_m);
    let names = ws.base_names();
    Ok(CommandOutput::new(
        json!({
            "command": "metric",
            "equation_tag": "Eq. (15)",
            "verdict": if symmetric { "pass" } else { "fail" },
            "truncation_order": ws.order,
            "value": series_orders(&value, &names),
            "symmetry": symmetric,
        }),
        if symmetric { EXIT_PASS } else { EXIT_FAIL },
    ))
}

fn module_for(ws: &Workspace, stages: Option<&Path>) -> Result<ModuleDeformation, InputError> {
    if ws.fiber_vars.is_empty() {
        return Err(InputError("this command needs at least one fiber variable".into()));
    }
    match stages {
        None => Ok(product_bundle_module(ws.star()?, ws.model())),
        Some(path) => {
            let stages = load_stages(path, ws)?;
            Ok(ModuleDeformation::new(ws.star()?.clone(), ws.model(), stages))
        }
    }
}

pub fn cmd_module_check(
    ws: &Workspace,
    stages: Option<&Path>,
    degree_bound: u32,
) -> Result<CommandOutput, InputError> {
    let rho = module_for(ws, stages)?;
    let group = GroupActionModel::standard(ws.fiber_vars.len());
    let report = check_module_structure(&rho, degree_bound, &group);
    let names = ws.names();
    let base_names = ws.base_names();
    let mut body = json!({
        "command": "module-check",
        "equation_tag": "Def. 4.3",
        "axiom_tags": {
            "associativity": "Eq. (20)",
            "equivariance": "Eq. (21)",
            "unitality": "Eq. (23)",
        },
        "verdict": if report.pass { "pass" } else { "fail" },
        "truncation_order": ws.order,
        "degree_bound": degree_bound,
        "cases_checked": report.cases_checked,
    });
    if !report.pass {
        body["axiom"] = json!(report.axiom.unwrap());
        body["failing_order"] = json!(report.order.unwrap());
        use fdq_core::principal::StructureWitness as W;
        body["witness"] = match report.witness.unwrap() {
            W::Associativity { big_f, f, g } => json!({
                "F": mono_string(&big_f, &names),
                "f": mono_string(&f, &base_names),
                "g": mono_string(&g, &base_names),
            }),
            W::Unitality { big_f } => json!({ "F": mono_string(&big_f, &names) }),
            W::Equivariance { shift, big_f, f } => json!({
                "shift_index": shift,
                "F": mono_string(&big_f, &names),
                "f": mono_string(&f, &base_names),
            }),
        };
    }
    Ok(CommandOutput::new(body, if report.pass { EXIT_PASS } else { EXIT_FAIL }))
}

fn inconclusive(command: &str, tag: &str, ws: &Workspace, what: &str) -> CommandOutput {
    CommandOutput::new(
        json!({
            "command": command,
            "equation_tag": tag,
            "verdict": "inconclusive",
            "truncation_order": ws.order,
            "reason": what,
            "bounds_used": {
                "diffop_order": ws.bounds.max_diffop_order,
                "coeff_degree": ws.bounds.max_coeff_degree,
                "base_derivatives": ws.bounds.max_base_derivatives,
            },
        }),
        EXIT_INCONCLUSIVE,
    )
}

pub fn cmd_extend_module(
    ws: &Workspace,
    stages: Option<&Path>,
    target_order: usize,
    equivariant: bool,
) -> Result<CommandOutput, InputError> {
    if target_order > ws.order {
        return Err(InputError(format!(
            "target order {target_order} exceeds the truncation order {}",
            ws.order
        )));
    }
    let mut rho = match stages {
        None => {
            if ws.fiber_vars.is_empty() {
                return Err(InputError("this command needs at least one fiber variable".into()));
            }
            ModuleDeformation::undeformed(ws.star()?.clone(), ws.model())
        }
        Some(path) => module_for(ws, Some(path))?,
    };
    while rho.stage_count() < target_order {
        match extend_module_order(&rho, &ws.bounds, equivariant) {
            Ok(next) => rho = next,
            Err(PrincipalError::Hochschild(HochschildError::NoSolutionInTruncation { .. })) => {
                return Ok(inconclusive(
                    "extend-module",
                    "Eq. (31)",
                    ws,
                    &format!("no solution within the ansatz at stage {}", rho.stage_count()),
                ));
            }
            Err(e) => return Err(InputError(e.to_string())),
        }
    }
    let group = GroupActionModel::standard(ws.fiber_vars.len());
    let degree = ws.degree_bound.min(2);
    let recheck = check_module_structure(&rho, degree, &group);
    let stages_json = serde_json::to_value(stages_to_file(rho.stages(), ws)).unwrap();
    Ok(CommandOutput::new(
        json!({
            "command": "extend-module",
            "equation_tag": "Eq. (31)",
            "verdict": if recheck.pass { "pass" } else { "fail" },
            "bounds_used": {
                "diffop_order": ws.bounds.max_diffop_order,
                "coeff_degree": ws.bounds.max_coeff_degree,
                "base_derivatives": ws.bounds.max_base_derivatives,
            },
            "truncation_order": ws.order,
            "target_order": target_order,
            "equivariant": equivariant,
            "recheck_degree_bound": degree,
            "stages": stages_json["stages"],
        }),
        if recheck.pass { EXIT_PASS } else { EXIT_FAIL },
    ))
}

/// Exhaustive re-verification of the intertwining identity on monomials.
fn verify_equivalence(
    rho: &ModuleDeformation,
    rho_tilde: &ModuleDeformation,
    t: &OpSeries,
    degree_bound: u32,
) -> bool {
    let model = rho.model();
    let n = rho.star().order();
    let total = monomials_up_to(model.nvars(), degree_bound);
    let base = monomials_up_to(model.base, degree_bound);
    for fm in &total {
        let big = Polynomial::monomial(model.base, model.fiber, fm.clone(), fdq_core::scalar::s_one());
        let t_big = op_series_apply(t, &rho.series(big.clone()));
        for f in &base {
            let fp = Polynomial::monomial(model.base, 0, f.clone(), fdq_core::scalar::s_one());
            let lhs = op_series_apply(t, &rho.act_poly(&big, &fp));
            let rhs = rho_tilde.act(&t_big, &PolySeries::constant(fp, n));
            if lhs != rhs {
                return false;
            }
        }
    }
    true
}

pub fn cmd_equiv_solve(
    ws: &Workspace,
    stages_a: Option<&Path>,
    stages_b: Option<&Path>,
    degree_bound: u32,
) -> Result<CommandOutput, InputError> {
    let rho_a = module_for(ws, stages_a)?;
    let rho_b = module_for(ws, stages_b)?;
    let t = match solve_module_equivalence(&rho_a, &rho_b, &ws.bounds, true) {
        Ok(t) => t,
        Err(PrincipalError::Hochschild(HochschildError::NoSolutionInTruncation { .. })) => {
            return Ok(inconclusive(
                "equiv-solve",
                "Eqs. (24)-(25)",
                ws,
                "no equivariant transformation within the ansatz",
            ));
        }
        Err(e) => return Err(InputError(e.to_string())),
    };
    let verified = verify_equivalence(&rho_a, &rho_b, &t, degree_bound);
    let stages: Vec<serde_json::Value> = (0..=t.order())
        .map(|r| serde_json::to_value(operator_to_file(t.coeff(r), ws)).unwrap())
        .collect();
    Ok(CommandOutput::new(
        json!({
            "command": "equiv-solve",
            "equation_tag": "Eqs. (24)-(25)",
            "verdict": if verified { "pass" } else { "fail" },
            "bounds_used": {
                "diffop_order": ws.bounds.max_diffop_order,
                "coeff_degree": ws.bounds.max_coeff_degree,
                "base_derivatives": ws.bounds.max_base_derivatives,
            },
            "truncation_order": ws.order,
            "degree_bound": degree_bound,
            "transform_orders": stages,
        }),
        if verified { EXIT_PASS } else { EXIT_FAIL },
    ))
}

pub fn cmd_lift_vertical(
    ws: &Workspace,
    op_spec: &str,
    degree_bound: u32,
    equivariant: bool,
) -> Result<CommandOutput, InputError> {
    let rho = module_for(ws, None)?;
    let d0 = load_operator(op_spec, ws)?;
    let lift = match lift_vertical(&d0, &rho, &ws.bounds, equivariant) {
        Ok(l) => l,
        Err(CommutantError::NotVertical) => {
            return Err(InputError("operator is not vertical".into()))
        }
        Err(CommutantError::Hochschild(HochschildError::NoSolutionInTruncation { .. })) => {
            return Ok(inconclusive(
                "lift-vertical",
                "Eq. (43)",
                ws,
                "no lift within the ansatz",
            ));
        }
        Err(e) => return Err(InputError(e.to_string())),
    };
    let recheck = check_commutant(&lift, &rho, degree_bound);
    let stages: Vec<serde_json::Value> = (0..=lift.order())
        .map(|r| serde_json::to_value(operator_to_file(lift.coeff(r), ws)).unwrap())
        .collect();
    Ok(CommandOutput::new(
        json!({
            "command": "lift-vertical",
            "equation_tag": "Eq. (43)",
            "commutant_tag": "Eq. (39)",
            "verdict": if recheck.pass { "pass" } else { "fail" },
            "bounds_used": {
                "diffop_order": ws.bounds.max_diffop_order,
                "coeff_degree": ws.bounds.max_coeff_degree,
                "base_derivatives": ws.bounds.max_base_derivatives,
            },
            "truncation_order": ws.order,
            "degree_bound": degree_bound,
            "cases_checked": recheck.cases_checked,
            "lift_orders": stages,
        }),
        if recheck.pass { EXIT_PASS } else { EXIT_FAIL },
    ))
}

pub fn cmd_star_prime(
    ws: &Workspace,
    op_spec: &str,
    op2_spec: &str,
) -> Result<CommandOutput, InputError> {
    let rho = module_for(ws, None)?;
    let d = load_operator(op_spec, ws)?;
    let e = load_operator(op2_spec, ws)?;
    let product = match induced_star_prime(&d, &e, &rho, &ws.bounds) {
        Ok(p) => p,
        Err(CommutantError::NotVertical) => {
            return Err(InputError("both operators must be vertical".into()))
        }
        Err(CommutantError::Hochschild(HochschildError::NoSolutionInTruncation { .. })) => {
            return Ok(inconclusive(
                "star-prime",
                "Thm. 5.1",
                ws,
                "no lift within the ansatz",
            ));
        }
        Err(e) => return Err(InputError(e.to_string())),
    };
    let stages: Vec<serde_json::Value> = (0..=product.order())
        .map(|r| serde_json::to_value(operator_to_file(product.coeff(r), ws)).unwrap())
        .collect();
    Ok(CommandOutput::new(
        json!({
            "command": "star-prime",
            "equation_tag": "Thm. 5.1",
            "verdict": "pass",
            "bounds_used": {
                "diffop_order": ws.bounds.max_diffop_order,
                "coeff_degree": ws.bounds.max_coeff_degree,
                "base_derivatives": ws.bounds.max_base_derivatives,
            },
            "truncation_order": ws.order,
            "product_orders": stages,
        }),
        EXIT_PASS,
    ))
}
