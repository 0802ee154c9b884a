//! Workspace files and the JSON schemas for star-product cochains,
//! differential operators and module stages.
//!
//! Rationals are carried as strings end to end, so nothing is ever
//! rounded. All maps serialize with sorted keys; identical inputs
//! produce byte-identical reports.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use fdq_core::hochschild::{AnsatzBounds, Cochain, CochainKey, SubmersionModel};
use fdq_core::poly::{mono_zero, Mono};
use fdq_core::scalar::Scalar;
use fdq_core::{DiffOp, Matrix, MultiDiffOp, Polynomial, PoissonTensor, StarProduct};

use crate::parser::{eval_series, EvalContext};

/// A user-facing input problem: reported with exit code 3.
#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

impl std::error::Error for InputError {}

fn bad(msg: impl Into<String>) -> InputError {
    InputError(msg.into())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum StarSpec {
    Moyal,
    CochainFile { path: String },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundsFile {
    pub diffop_order: u32,
    pub coeff_degree: u32,
    pub base_derivatives: u32,
}

/// On-disk workspace schema.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WorkspaceFile {
    pub base_vars: Vec<String>,
    #[serde(default)]
    pub fiber_vars: Vec<String>,
    /// Full antisymmetric matrix of expression strings in the base
    /// variables (constant entries for the exponential product).
    pub theta: Vec<Vec<String>>,
    #[serde(default = "default_star")]
    pub star: StarSpec,
    pub truncation_order: usize,
    #[serde(default)]
    pub degree_bound: Option<u32>,
    #[serde(default)]
    pub ansatz_bounds: Option<BoundsFile>,
}

fn default_star() -> StarSpec {
    StarSpec::Moyal
}

/// A loaded and validated workspace.
pub struct Workspace {
    pub base_vars: Vec<String>,
    pub fiber_vars: Vec<String>,
    pub theta: PoissonTensor,
    star: Option<StarProduct>,
    star_error: Option<String>,
    pub order: usize,
    pub degree_bound: u32,
    pub bounds: AnsatzBounds,
}

impl Workspace {
    /// The workspace star product; commands that need one surface the
    /// construction error (e.g. a non-constant tensor) as an input error.
    pub fn star(&self) -> Result<&StarProduct, InputError> {
        match &self.star {
            Some(s) => Ok(s),
            None => Err(bad(format!(
                "star product: {}",
                self.star_error.as_deref().unwrap_or("unavailable")
            ))),
        }
    }

    pub fn model(&self) -> SubmersionModel {
        SubmersionModel::new(self.base_vars.len(), self.fiber_vars.len())
    }

    /// Context for expressions over all variables (base then fiber).
    pub fn total_ctx(&self) -> EvalContext {
        EvalContext::new(&self.base_vars, &self.fiber_vars, self.order)
    }

    /// Context for base-only expressions.
    pub fn base_ctx(&self) -> EvalContext {
        EvalContext::new(&self.base_vars, &[], self.order)
    }

    pub fn names(&self) -> Vec<&str> {
        self.base_vars
            .iter()
            .chain(self.fiber_vars.iter())
            .map(|s| s.as_str())
            .collect()
    }

    pub fn base_names(&self) -> Vec<&str> {
        self.base_vars.iter().map(|s| s.as_str()).collect()
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_alphanumeric() || c == '_')
}

/// Parses an expression string into a plain (order-free) polynomial.
fn constant_poly(text: &str, ctx: &EvalContext, what: &str) -> Result<Polynomial, InputError> {
    let series = eval_series(text, ctx).map_err(|e| bad(format!("{what}: {e}")))?;
    for r in 1..=series.order() {
        if !series.coeff(r).is_zero() {
            return Err(bad(format!("{what}: deformation parameter not allowed here")));
        }
    }
    Ok(series.coeff(0).clone())
}

pub fn load_workspace(path: &Path) -> Result<Workspace, InputError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| bad(format!("cannot read workspace {}: {e}", path.display())))?;
    let file: WorkspaceFile =
        serde_json::from_str(&text).map_err(|e| bad(format!("workspace JSON: {e}")))?;
    workspace_from_file(file, path.parent().unwrap_or(Path::new(".")))
}

pub fn workspace_from_file(file: WorkspaceFile, dir: &Path) -> Result<Workspace, InputError> {
    if file.truncation_order < 1 {
        return Err(bad("truncation_order must be at least 1"));
    }
    let mut seen = std::collections::BTreeSet::new();
    for v in file.base_vars.iter().chain(file.fiber_vars.iter()) {
        if !is_identifier(v) || v == "i" || v == "lam" {
            return Err(bad(format!("bad variable name '{v}'")));
        }
        if !seen.insert(v.clone()) {
            return Err(bad(format!("duplicate variable name '{v}'")));
        }
    }
    let m = file.base_vars.len();
    if m == 0 {
        return Err(bad("at least one base variable is required"));
    }
    if file.theta.len() != m || file.theta.iter().any(|row| row.len() != m) {
        return Err(bad(format!("theta must be a {m}x{m} matrix")));
    }
    let base_ctx = EvalContext::new(&file.base_vars, &[], file.truncation_order);
    let mut entries = Matrix::from_fn(m, m, |_, _| Polynomial::zero(m, 0));
    for (i, row) in file.theta.iter().enumerate() {
        for (j, cell) in row.iter().enumerate() {
            entries.set(i, j, constant_poly(cell, &base_ctx, &format!("theta[{i}][{j}]"))?);
        }
    }
    let theta = PoissonTensor::new(entries).map_err(|e| bad(format!("theta: {e}")))?;
    let (star, star_error) = match &file.star {
        StarSpec::Moyal => match StarProduct::moyal(&theta, file.truncation_order) {
            Ok(s) => (Some(s), None),
            Err(e) => (None, Some(e.to_string())),
        },
        StarSpec::CochainFile { path } => {
            let full = dir.join(path);
            (Some(load_cochain_star(&full, &file.base_vars, file.truncation_order)?), None)
        }
    };
    let bounds = match &file.ansatz_bounds {
        Some(b) => AnsatzBounds {
            max_diffop_order: b.diffop_order,
            max_coeff_degree: b.coeff_degree,
            max_base_derivatives: b.base_derivatives,
        },
        None => AnsatzBounds {
            max_diffop_order: file.truncation_order as u32 + 1,
            max_coeff_degree: 2,
            max_base_derivatives: file.truncation_order as u32 + 1,
        },
    };
    Ok(Workspace {
        base_vars: file.base_vars,
        fiber_vars: file.fiber_vars,
        theta,
        star,
        star_error,
        order: file.truncation_order,
        degree_bound: file.degree_bound.unwrap_or(3),
        bounds,
    })
}

/// One bidifferential term: derivative orders per variable name on each
/// slot, and a coefficient expression in the base variables.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CochainTermFile {
    pub coeff: String,
    #[serde(default)]
    pub left: BTreeMap<String, u32>,
    #[serde(default)]
    pub right: BTreeMap<String, u32>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StarCochainFile {
    pub order: usize,
    pub terms: Vec<CochainTermFile>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CochainListFile {
    pub cochains: Vec<StarCochainFile>,
    #[serde(default)]
    pub hermitian_claimed: bool,
}

fn mono_from_names(
    map: &BTreeMap<String, u32>,
    vars: &[String],
    what: &str,
) -> Result<Mono, InputError> {
    let mut m = mono_zero(vars.len());
    for (name, power) in map {
        let idx = vars
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| bad(format!("{what}: unknown variable '{name}'")))?;
        m[idx] = *power;
    }
    Ok(m)
}

pub fn load_cochain_star(
    path: &Path,
    base_vars: &[String],
    order: usize,
) -> Result<StarProduct, InputError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| bad(format!("cannot read cochain file {}: {e}", path.display())))?;
    let file: CochainListFile =
        serde_json::from_str(&text).map_err(|e| bad(format!("cochain JSON: {e}")))?;
    let m = base_vars.len();
    let ctx = EvalContext::new(&base_vars.to_vec(), &[], order);
    let mut cochains = vec![MultiDiffOp::product(m, 0)];
    cochains.resize(order + 1, MultiDiffOp::zero(2, m, 0));
    for entry in &file.cochains {
        if entry.order == 0 || entry.order > order {
            return Err(bad(format!(
                "cochain order {} outside 1..={order}",
                entry.order
            )));
        }
        let mut op = MultiDiffOp::zero(2, m, 0);
        for term in &entry.terms {
            let coeff = constant_poly(&term.coeff, &ctx, "cochain coefficient")?;
            let left = mono_from_names(&term.left, base_vars, "cochain left slot")?;
            let right = mono_from_names(&term.right, base_vars, "cochain right slot")?;
            op.add_term(vec![left, right], coeff);
        }
        cochains[entry.order] = op;
    }
    StarProduct::from_cochains(cochains, file.hermitian_claimed)
        .map_err(|e| bad(format!("cochain star: {e}")))
}

/// One differential-operator term on the total space.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OperatorTermFile {
    pub coeff: String,
    #[serde(default)]
    pub derivs: BTreeMap<String, u32>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OperatorFile {
    pub terms: Vec<OperatorTermFile>,
}

pub fn operator_from_file(
    file: &OperatorFile,
    ws: &Workspace,
) -> Result<DiffOp, InputError> {
    let ctx = ws.total_ctx();
    let all_vars: Vec<String> = ws
        .base_vars
        .iter()
        .chain(ws.fiber_vars.iter())
        .cloned()
        .collect();
    let model = ws.model();
    let mut op = DiffOp::zero(model.base, model.fiber);
    for term in &file.terms {
        let coeff = constant_poly(&term.coeff, &ctx, "operator coefficient")?;
        let idx = mono_from_names(&term.derivs, &all_vars, "operator derivatives")?;
        op.add_term(idx, coeff);
    }
    Ok(op)
}

pub fn load_operator(spec: &str, ws: &Workspace) -> Result<DiffOp, InputError> {
    // accept inline JSON or a file path
    let text = if spec.trim_start().starts_with('{') {
        spec.to_string()
    } else {
        std::fs::read_to_string(spec)
            .map_err(|e| bad(format!("cannot read operator {spec}: {e}")))?
    };
    let file: OperatorFile =
        serde_json::from_str(&text).map_err(|e| bad(format!("operator JSON: {e}")))?;
    operator_from_file(&file, ws)
}

pub fn operator_to_file(op: &DiffOp, ws: &Workspace) -> OperatorFile {
    let names = ws.names();
    let mut terms = Vec::new();
    for (idx, coeff) in op.terms() {
        let mut derivs = BTreeMap::new();
        for (v, &e) in idx.iter().enumerate() {
            if e > 0 {
                derivs.insert(names[v].to_string(), e);
            }
        }
        terms.push(OperatorTermFile { coeff: coeff.display_with(&names), derivs });
    }
    OperatorFile { terms }
}

/// One module-stage term: operator derivatives on the total space,
/// argument derivatives on the base, coefficient on the total space.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StageTermFile {
    pub coeff: String,
    #[serde(default)]
    pub op_derivs: BTreeMap<String, u32>,
    #[serde(default)]
    pub arg_derivs: BTreeMap<String, u32>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StageFile {
    pub order: usize,
    pub terms: Vec<StageTermFile>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StagesFile {
    pub stages: Vec<StageFile>,
}

pub fn stages_from_file(file: &StagesFile, ws: &Workspace) -> Result<Vec<Cochain>, InputError> {
    let model = ws.model();
    let ctx = ws.total_ctx();
    let all_vars: Vec<String> = ws
        .base_vars
        .iter()
        .chain(ws.fiber_vars.iter())
        .cloned()
        .collect();
    let max_order = file.stages.iter().map(|s| s.order).max().unwrap_or(0);
    if max_order > ws.order {
        return Err(bad(format!("stage order {max_order} exceeds truncation {}", ws.order)));
    }
    let mut stages = vec![Cochain::zero(1, model); max_order];
    for stage in &file.stages {
        if stage.order == 0 {
            return Err(bad("stage order must be at least 1"));
        }
        let mut c = Cochain::zero(1, model);
        for term in &stage.terms {
            let coeff = constant_poly(&term.coeff, &ctx, "stage coefficient")?;
            let op = mono_from_names(&term.op_derivs, &all_vars, "stage operator derivatives")?;
            let arg = mono_from_names(&term.arg_derivs, &ws.base_vars, "stage argument derivatives")?;
            for (cm, sc) in coeff.terms() {
                c.add_term(
                    CochainKey { coeff: cm.clone(), op: op.clone(), args: vec![arg.clone()] },
                    sc.clone(),
                );
            }
        }
        stages[stage.order - 1] = c;
    }
    Ok(stages)
}

pub fn load_stages(path: &Path, ws: &Workspace) -> Result<Vec<Cochain>, InputError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| bad(format!("cannot read stages {}: {e}", path.display())))?;
    let file: StagesFile =
        serde_json::from_str(&text).map_err(|e| bad(format!("stages JSON: {e}")))?;
    stages_from_file(&file, ws)
}

pub fn stages_to_file(stages: &[Cochain], ws: &Workspace) -> StagesFile {
    let names = ws.names();
    let base_names = ws.base_names();
    let mut out = Vec::new();
    for (i, stage) in stages.iter().enumerate() {
        let mut terms = Vec::new();
        for (key, sc) in stage.terms() {
            let mut op_derivs = BTreeMap::new();
            for (v, &e) in key.op.iter().enumerate() {
                if e > 0 {
                    op_derivs.insert(names[v].to_string(), e);
                }
            }
            let mut arg_derivs = BTreeMap::new();
            for (v, &e) in key.args[0].iter().enumerate() {
                if e > 0 {
                    arg_derivs.insert(base_names[v].to_string(), e);
                }
            }
            let coeff = Polynomial::monomial(
                ws.base_vars.len(),
                ws.fiber_vars.len(),
                key.coeff.clone(),
                sc.clone(),
            );
            terms.push(StageTermFile {
                coeff: coeff.display_with(&names),
                op_derivs,
                arg_derivs,
            });
        }
        out.push(StageFile { order: i + 1, terms });
    }
    StagesFile { stages: out }
}

/// Monomial rendered with variable names (constant prints as "1").
pub fn mono_string(m: &Mono, names: &[&str]) -> String {
    let p = Polynomial::monomial(
        names.len(),
        0,
        m.clone(),
        fdq_core::scalar::s_one(),
    );
    p.display_with(names)
}

pub fn scalar_string(s: &Scalar) -> String {
    fdq_core::scalar::scalar_string(s)
}

pub fn resolve_relative(base: &Path, spec: &str) -> PathBuf {
    let p = Path::new(spec);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}
