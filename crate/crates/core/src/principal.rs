//! Right-module deformations of the trivial bundle model: total-space
//! functions become a right module over the base star-product algebra,
//! order by order. The failure to extend a truncated module structure by
//! one more order is a Hochschild 2-cocycle; extension is an exact
//! coboundary solve, and equivalence of two deformations is an exact
//! sequence of 0-cochain solves.
//!
//! The structure group is modelled by fiber translations, so
//! equivariance of any datum is simply fiber-independence of its
//! coefficients, an exactly decidable property.

use alloc::vec::Vec;
use alloc::vec;

use crate::diffop::DiffOp;
use crate::hochschild::{
    is_cocycle, solve_coboundary, AnsatzBounds, Cochain, CocycleReport, HochschildError,
    SubmersionModel,
};
use crate::poly::{monomials_up_to, Mono, Polynomial};
use crate::scalar::Rational;
use crate::series::{OpSeries, PolySeries};
use crate::star::StarProduct;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PrincipalError {
    /// The input fails the module law at or below the claimed order.
    NotModuleToOrder { order: usize },
    Hochschild(HochschildError),
}

impl From<HochschildError> for PrincipalError {
    fn from(e: HochschildError) -> Self {
        PrincipalError::Hochschild(e)
    }
}

impl core::fmt::Display for PrincipalError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            PrincipalError::NotModuleToOrder { order } => {
                write!(f, "module law fails at deformation order {order}")
            }
            PrincipalError::Hochschild(e) => write!(f, "{e}"),
        }
    }
}

/// Fiber-translation group model: a generating set of exact rational
/// shift vectors acting by substitution.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupActionModel {
    pub shifts: Vec<Vec<Rational>>,
}

impl GroupActionModel {
    /// Unit translations along every fiber direction plus one mixed
    /// non-integral shift.
    pub fn standard(fiber: usize) -> Self {
        let mut shifts = Vec::new();
        for j in 0..fiber {
            let mut v = vec![crate::scalar::rat(0); fiber];
            v[j] = crate::scalar::rat(1);
            shifts.push(v);
        }
        shifts.push(vec![crate::scalar::ratio(-2, 3); fiber]);
        GroupActionModel { shifts }
    }

    pub fn act(&self, idx: usize, p: &Polynomial) -> Polynomial {
        p.translate_fiber(&self.shifts[idx])
    }

    pub fn act_series(&self, idx: usize, f: &PolySeries) -> PolySeries {
        f.map(|p| self.act(idx, p))
    }
}

/// A module deformation truncated at some stage: the order-zero action
/// is multiplication by the pulled-back function, the listed stages are
/// the corrections.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModuleDeformation {
    star: StarProduct,
    model: SubmersionModel,
    stages: Vec<Cochain>, // stages[i] = rho_{i+1}
}

impl ModuleDeformation {
    pub fn new(star: StarProduct, model: SubmersionModel, stages: Vec<Cochain>) -> Self {
        assert_eq!(star.base(), model.base);
        for st in &stages {
            assert_eq!(st.arity(), 1);
            assert_eq!(st.model(), model);
        }
        assert!(stages.len() <= star.order());
        ModuleDeformation { star, model, stages }
    }

    /// Only the order-zero action (a module structure modulo the first
    /// deformation order).
    pub fn undeformed(star: StarProduct, model: SubmersionModel) -> Self {
        ModuleDeformation::new(star, model, Vec::new())
    }

    pub fn star(&self) -> &StarProduct {
        &self.star
    }

    pub fn model(&self) -> SubmersionModel {
        self.model
    }

    /// Number of correction stages present; the module law is claimed
    /// modulo one order beyond.
    pub fn stage_count(&self) -> usize {
        self.stages.len()
    }

    pub fn stage(&self, r: usize) -> Cochain {
        if r == 0 {
            Cochain::mult_unit(self.model)
        } else {
            self.stages
                .get(r - 1)
                .cloned()
                .unwrap_or_else(|| Cochain::zero(1, self.model))
        }
    }

    pub fn stages(&self) -> &[Cochain] {
        &self.stages
    }

    pub fn truncate(&self, k: usize) -> Self {
        ModuleDeformation::new(
            self.star.clone(),
            self.model,
            self.stages[..k.min(self.stages.len())].to_vec(),
        )
    }

    pub fn with_stage(&self, stage: Cochain) -> Self {
        let mut stages = self.stages.clone();
        stages.push(stage);
        ModuleDeformation::new(self.star.clone(), self.model, stages)
    }

    /// The action on plain polynomials, as a series.
    pub fn act_poly(&self, big_f: &Polynomial, f: &Polynomial) -> PolySeries {
        let n = self.star.order();
        let coeffs = (0..=n)
            .map(|r| self.stage(r).evaluate(&[f]).apply(big_f))
            .collect();
        PolySeries::from_coeffs(coeffs)
    }

    /// The action on truncated series.
    pub fn act(&self, big_f: &PolySeries, f: &PolySeries) -> PolySeries {
        let n = self.star.order();
        assert_eq!(big_f.order(), n);
        assert_eq!(f.order(), n);
        let mut coeffs = vec![Polynomial::zero(self.model.base, self.model.fiber); n + 1];
        for r in 0..=n {
            let stage = self.stage(r);
            if stage.is_zero() {
                continue;
            }
            for b in 0..=(n - r) {
                if f.coeff(b).is_zero() {
                    continue;
                }
                let op = stage.evaluate(&[f.coeff(b)]);
                for a in 0..=(n - r - b) {
                    if big_f.coeff(a).is_zero() {
                        continue;
                    }
                    let v = op.apply(big_f.coeff(a));
                    coeffs[r + a + b] = coeffs[r + a + b].add(&v);
                }
            }
        }
        PolySeries::from_coeffs(coeffs)
    }

    /// Lifts a total-space polynomial to a constant series.
    pub fn series(&self, p: Polynomial) -> PolySeries {
        PolySeries::constant(p, self.star.order())
    }

    /// All stage coefficients fiber-free (translation equivariant).
    pub fn is_equivariant(&self) -> bool {
        self.stages.iter().all(Cochain::coeffs_fiber_free)
    }
}

/// The product-bundle module: base cochains act along the base
/// directions of the total space.
pub fn product_bundle_module(s: &StarProduct, model: SubmersionModel) -> ModuleDeformation {
    assert_eq!(s.base(), model.base);
    let mut stages = Vec::new();
    for r in 1..=s.order() {
        let mut stage = Cochain::zero(1, model);
        for (slots, p) in s.cochain(r).terms() {
            for (u, sc) in p.terms() {
                stage.add_term(
                    crate::hochschild::CochainKey {
                        coeff: model.embed(u),
                        op: model.embed(&slots[0]),
                        args: vec![slots[1].clone()],
                    },
                    sc.clone(),
                );
            }
        }
        stages.push(stage);
    }
    ModuleDeformation::new(s.clone(), model, stages)
}

/// The order-`n` defect of the module law,
/// `sum_{r+s=n} [rho_r(., C_s(f,g)) - rho_r(rho_s(., f), g)]`
/// as an arity-2 cochain; zero iff the law holds exactly at this order.
pub fn module_defect(rho: &ModuleDeformation, n: usize) -> Cochain {
    let model = rho.model();
    let mut out = Cochain::zero(2, model);
    for r in 0..=n {
        let s = n - r;
        let stage_r = rho.stage(r);
        if stage_r.is_zero() {
            continue;
        }
        let a = Cochain::compose_arg_with_star(&stage_r, rho.star().cochain(s));
        out = out.add(&a);
        let stage_s = rho.stage(s);
        if !stage_s.is_zero() {
            let b = Cochain::compose_op_slot(&stage_r, &stage_s);
            out = out.sub(&b);
        }
    }
    out
}

fn verify_module_to_order(rho: &ModuleDeformation, k: usize) -> Result<(), PrincipalError> {
    for n in 1..=k {
        if !module_defect(rho, n).is_zero() {
            return Err(PrincipalError::NotModuleToOrder { order: n });
        }
    }
    Ok(())
}

/// The obstruction cocycle at stage `k`:
/// `R_k = sum_{r=1}^{k} [rho_r(., C_{k+1-r}(f,g)) - rho_r(rho_{k+1-r}(., f), g)]
/// + mult(pr^*(C_{k+1}(f,g)))`. Verifies the module law up to order `k`
/// first.
pub fn obstruction_cocycle(
    rho: &ModuleDeformation,
    k: usize,
) -> Result<Cochain, PrincipalError> {
    assert!(k + 1 <= rho.star().order(), "next cochain must exist at the truncation");
    verify_module_to_order(rho, k)?;
    let model = rho.model();
    let mut out = Cochain::mult_of_star(rho.star().cochain(k + 1), model);
    for r in 1..=k {
        let stage_r = rho.stage(r);
        if stage_r.is_zero() {
            continue;
        }
        out = out.add(&Cochain::compose_arg_with_star(&stage_r, rho.star().cochain(k + 1 - r)));
        let stage_s = rho.stage(k + 1 - r);
        if !stage_s.is_zero() {
            out = out.sub(&Cochain::compose_op_slot(&stage_r, &stage_s));
        }
    }
    Ok(out)
}

/// Extends a verified stage-`k` module deformation to stage `k+1` by
/// solving the coboundary equation, then re-verifies the extended law
/// exactly.
pub fn extend_module_order(
    rho: &ModuleDeformation,
    bounds: &AnsatzBounds,
    equivariant: bool,
) -> Result<ModuleDeformation, PrincipalError> {
    let k = rho.stage_count();
    let r_k = obstruction_cocycle(rho, k)?;
    let stage = solve_coboundary(&r_k, bounds, equivariant)?;
    let extended = rho.with_stage(stage);
    // independent re-check of the extended law
    if !module_defect(&extended, k + 1).is_zero() {
        return Err(PrincipalError::NotModuleToOrder { order: k + 1 });
    }
    Ok(extended)
}

/// Cocycle check of the obstruction (the solvability backdrop assertion).
pub fn obstruction_is_cocycle(
    rho: &ModuleDeformation,
    k: usize,
    degree_bound: u32,
) -> Result<CocycleReport, PrincipalError> {
    let r_k = obstruction_cocycle(rho, k)?;
    Ok(is_cocycle(&r_k, degree_bound)?)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StructureWitness {
    Associativity { big_f: Mono, f: Mono, g: Mono },
    Unitality { big_f: Mono },
    Equivariance { shift: usize, big_f: Mono, f: Mono },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureReport {
    pub pass: bool,
    pub axiom: Option<&'static str>,
    pub order: Option<usize>,
    pub witness: Option<StructureWitness>,
    pub cases_checked: usize,
}

/// Exhaustive check of the module axioms on monomials up to the degree
/// bound: the right-module law, unitality, and equivariance under the
/// generating fiber translations.
pub fn check_module_structure(
    rho: &ModuleDeformation,
    degree_bound: u32,
    group: &GroupActionModel,
) -> StructureReport {
    let model = rho.model();
    let total_monos = monomials_up_to(model.nvars(), degree_bound);
    let base_monos = monomials_up_to(model.base, degree_bound);
    let mut cases = 0usize;

    let one = crate::scalar::s_one;
    // (i) F . (f * g) = (F . f) . g
    for fm in &total_monos {
        let big_f = Polynomial::monomial(model.base, model.fiber, fm.clone(), one());
        let big_series = rho.series(big_f.clone());
        for f in &base_monos {
            let fp = Polynomial::monomial(model.base, 0, f.clone(), one());
            let f_series = PolySeries::constant(fp.clone(), rho.star().order());
            let acted = rho.act_poly(&big_f, &fp);
            for g in &base_monos {
                cases += 1;
                let gp = Polynomial::monomial(model.base, 0, g.clone(), one());
                let g_series = PolySeries::constant(gp.clone(), rho.star().order());
                let lhs = rho.act(&big_series, &rho.star().multiply(&f_series, &g_series));
                let rhs = rho.act(&acted, &g_series);
                if lhs != rhs {
                    let order = (0..=lhs.order())
                        .find(|&r| lhs.coeff(r) != rhs.coeff(r))
                        .unwrap();
                    return StructureReport {
                        pass: false,
                        axiom: Some("associativity"),
                        order: Some(order),
                        witness: Some(StructureWitness::Associativity {
                            big_f: fm.clone(),
                            f: f.clone(),
                            g: g.clone(),
                        }),
                        cases_checked: cases,
                    };
                }
            }
        }
    }
    // (ii) F . 1 = F
    for fm in &total_monos {
        cases += 1;
        let big_f = Polynomial::monomial(model.base, model.fiber, fm.clone(), one());
        let acted = rho.act_poly(&big_f, &Polynomial::one(model.base, 0));
        if acted != rho.series(big_f.clone()) {
            let diff = acted.sub(&rho.series(big_f));
            let order = diff.lowest_nonzero().unwrap();
            return StructureReport {
                pass: false,
                axiom: Some("unitality"),
                order: Some(order),
                witness: Some(StructureWitness::Unitality { big_f: fm.clone() }),
                cases_checked: cases,
            };
        }
    }
    // (iii) shift(F . f) = shift(F) . f for the generating translations
    for (si, _) in group.shifts.iter().enumerate() {
        for fm in &total_monos {
            let big_f = Polynomial::monomial(model.base, model.fiber, fm.clone(), one());
            for f in &base_monos {
                cases += 1;
                let fp = Polynomial::monomial(model.base, 0, f.clone(), one());
                let lhs = rho.act_poly(&big_f, &fp).map(|p| group.act(si, p));
                let rhs = rho.act_poly(&group.act(si, &big_f), &fp);
                if lhs != rhs {
                    let order = (0..=lhs.order())
                        .find(|&r| lhs.coeff(r) != rhs.coeff(r))
                        .unwrap();
                    return StructureReport {
                        pass: false,
                        axiom: Some("equivariance"),
                        order: Some(order),
                        witness: Some(StructureWitness::Equivariance {
                            shift: si,
                            big_f: fm.clone(),
                            f: f.clone(),
                        }),
                        cases_checked: cases,
                    };
                }
            }
        }
    }
    StructureReport { pass: true, axiom: None, order: None, witness: None, cases_checked: cases }
}

/// Solves for an equivariant equivalence `T = id + ...` with
/// `T(F . f) = T(F) .~ f`, order by order through the truncation.
pub fn solve_module_equivalence(
    rho: &ModuleDeformation,
    rho_tilde: &ModuleDeformation,
    bounds: &AnsatzBounds,
    equivariant: bool,
) -> Result<OpSeries, PrincipalError> {
    assert_eq!(rho.star(), rho_tilde.star(), "both modules must share the base product");
    let model = rho.model();
    let n = rho.star().order();
    let mut t_stages: Vec<DiffOp> = vec![DiffOp::identity(model.base, model.fiber)];
    for order in 1..=n {
        // defect W(f) = sum_{a<order} [rho~_{order-a}(T_a ., f) - T_a rho_{order-a}(., f)]
        let mut w = Cochain::zero(1, model);
        for a in 0..order {
            let t_a = &t_stages[a];
            let r = order - a;
            let tilde_stage = rho_tilde.stage(r);
            if !tilde_stage.is_zero() {
                w = w.add(&Cochain::compose_input(&tilde_stage, t_a));
            }
            let plain_stage = rho.stage(r);
            if !plain_stage.is_zero() {
                w = w.sub(&Cochain::compose_output(t_a, &plain_stage));
            }
        }
        let t_next = solve_coboundary(&w, bounds, equivariant)?;
        t_stages.push(t_next.to_diffop());
    }
    Ok(OpSeries::from_coeffs(t_stages))
}

/// The module conjugated by an invertible operator series on the total
/// space: `F .~ f = T((T^{-1} F) . f)`. Produces a deformation of the
/// same star product, equivalent to the input by construction.
pub fn conjugated_module(rho: &ModuleDeformation, t: &OpSeries) -> ModuleDeformation {
    let model = rho.model();
    let n = rho.star().order();
    assert_eq!(t.order(), n);
    let t_inv = crate::diffop::op_series_invert(t);
    let mut stages = Vec::new();
    for order in 1..=n {
        let mut stage = Cochain::zero(1, model);
        for a in 0..=order {
            for b in 0..=(order - a) {
                let c = order - a - b;
                let inner = rho.stage(b);
                if inner.is_zero() {
                    continue;
                }
                let composed = Cochain::compose_output(
                    t.coeff(a),
                    &Cochain::compose_input(&inner, t_inv.coeff(c)),
                );
                stage = stage.add(&composed);
            }
        }
        stages.push(stage);
    }
    ModuleDeformation::new(rho.star().clone(), model, stages)
}

/// The module induced by an equivalence of the base product:
/// `F .~ f = F . Phi(f)`, a deformation over the transformed product.
pub fn transformed_module(
    rho: &ModuleDeformation,
    phi: &crate::star::EquivalenceTransform,
) -> Result<ModuleDeformation, crate::star::StarError> {
    let new_star = crate::star::apply_equivalence(phi, rho.star())?;
    let model = rho.model();
    let n = rho.star().order();
    let phi_series = phi.as_series(n);
    let mut stages = Vec::new();
    for order in 1..=n {
        let mut stage = Cochain::zero(1, model);
        for s in 0..=order {
            let r = order - s;
            let inner = rho.stage(r);
            if inner.is_zero() {
                continue;
            }
            // the stage argument operators live on the base; lift them
            let phi_s = phi_series.coeff(s);
            if phi_s.is_zero() {
                continue;
            }
            stage = stage.add(&Cochain::compose_arg_with_op(&inner, phi_s));
        }
        stages.push(stage);
    }
    Ok(ModuleDeformation::new(new_star, model, stages))
}
