//! The differential Hochschild complex of base functions with values in
//! differential operators on the total space of a trivial-bundle model.
//!
//! A `k`-cochain is stored in a flattened normal form: a finite scalar
//! combination of primitive terms `(u; a; d_1..d_k)` acting as
//!
//! ```text
//! (f_1, .., f_k)  |->  mult(u * prod_i pr^*(d^{d_i} f_i)) . d^a
//! ```
//!
//! with `u` a total-space monomial, `a` a total-space derivative index
//! and the `d_i` base derivative indices. Multidifferential operators on
//! polynomial algebras are uniquely determined by these coefficients, so
//! structural equality of the term maps is semantic equality of the
//! cochains — the property the exact solver rests on.
//!
//! The bimodule actions are `(f . D) = D . mult(pr^* f)` (left) and
//! `(D . g) = mult(pr^* g) . D` (right); with them `delta` of a
//! 0-cochain measures the failure to be vertical, and the differential
//! preserves both the coefficient monomial and the total derivative
//! weight of a term. The coboundary equation therefore splits into small
//! independent blocks indexed by `(u, weight)`, each solved exactly.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use alloc::vec;

use crate::diffop::{DiffOp, MultiDiffOp};
use crate::linalg::solve_dense;
use crate::poly::{
    bigint_scalar, mono_add, mono_deg, mono_is_zero, mono_le, mono_sub, mono_zero, multi_binom,
    sub_indices, Mono, Polynomial,
};
use crate::scalar::{s_zero, Scalar};

/// Trivial-bundle model: base variables first, fiber variables after;
/// the projection forgets the fiber variables.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SubmersionModel {
    pub base: usize,
    pub fiber: usize,
}

impl SubmersionModel {
    pub fn new(base: usize, fiber: usize) -> Self {
        SubmersionModel { base, fiber }
    }

    pub fn nvars(&self) -> usize {
        self.base + self.fiber
    }

    /// Pull-back of a base polynomial to the total space.
    pub fn pr_star(&self, f: &Polynomial) -> Polynomial {
        f.pr_star(self.fiber)
    }

    /// Embeds a base multi-index into the total space.
    pub fn embed(&self, m: &Mono) -> Mono {
        let mut out = m.clone();
        out.extend(core::iter::repeat(0).take(self.fiber));
        out
    }

    fn base_part(&self, m: &Mono) -> Mono {
        m[..self.base].to_vec()
    }

    fn fiber_is_zero(&self, m: &Mono) -> bool {
        m[self.base..].iter().all(|&e| e == 0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnsatzBounds {
    pub max_diffop_order: u32,
    pub max_coeff_degree: u32,
    pub max_base_derivatives: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HochschildError {
    ArityUnsupported { arity: usize },
    /// The right-hand side fails the necessary cocycle condition; this
    /// signals an upstream bug, not a solvable situation.
    NotACocycle,
    /// No solution exists inside the given ansatz. Never a claim about
    /// the cohomology itself.
    NoSolutionInTruncation { bounds: AnsatzBounds },
}

impl core::fmt::Display for HochschildError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            HochschildError::ArityUnsupported { arity } => write!(f, "unsupported arity {arity}"),
            HochschildError::NotACocycle => write!(f, "right-hand side is not a cocycle"),
            HochschildError::NoSolutionInTruncation { bounds } => write!(
                f,
                "no solution within ansatz (order <= {}, coeff degree <= {}, base derivatives <= {})",
                bounds.max_diffop_order, bounds.max_coeff_degree, bounds.max_base_derivatives
            ),
        }
    }
}

/// Primitive-term key of the flattened normal form.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct CochainKey {
    /// Coefficient monomial on the total space.
    pub coeff: Mono,
    /// Derivative index applied to the acted-on function.
    pub op: Mono,
    /// Base derivative indices applied to the arguments.
    pub args: Vec<Mono>,
}

/// Differential Hochschild cochain in flattened normal form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cochain {
    arity: usize,
    model: SubmersionModel,
    terms: BTreeMap<CochainKey, Scalar>,
}

impl Cochain {
    pub fn zero(arity: usize, model: SubmersionModel) -> Self {
        Cochain { arity, model, terms: BTreeMap::new() }
    }

    /// The unit 1-cochain `f -> mult(pr^* f)`.
    pub fn mult_unit(model: SubmersionModel) -> Self {
        let mut c = Cochain::zero(1, model);
        c.add_term(
            CochainKey {
                coeff: mono_zero(model.nvars()),
                op: mono_zero(model.nvars()),
                args: vec![mono_zero(model.base)],
            },
            crate::scalar::s_one(),
        );
        c
    }

    /// A 0-cochain from a differential operator (coefficients flattened).
    pub fn from_diffop(d: &DiffOp, model: SubmersionModel) -> Self {
        assert_eq!((d.base(), d.fiber()), (model.base, model.fiber));
        let mut c = Cochain::zero(0, model);
        for (a, p) in d.terms() {
            for (u, s) in p.terms() {
                c.add_term(
                    CochainKey { coeff: u.clone(), op: a.clone(), args: Vec::new() },
                    s.clone(),
                );
            }
        }
        c
    }

    pub fn to_diffop(&self) -> DiffOp {
        assert_eq!(self.arity, 0);
        let mut out = DiffOp::zero(self.model.base, self.model.fiber);
        for (key, s) in &self.terms {
            out.add_term(
                key.op.clone(),
                Polynomial::monomial(self.model.base, self.model.fiber, key.coeff.clone(), s.clone()),
            );
        }
        out
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn model(&self) -> SubmersionModel {
        self.model
    }

    pub fn terms(&self) -> &BTreeMap<CochainKey, Scalar> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, key: CochainKey, s: Scalar) {
        if num_traits::Zero::is_zero(&s) {
            return;
        }
        debug_assert_eq!(key.args.len(), self.arity);
        debug_assert_eq!(key.coeff.len(), self.model.nvars());
        debug_assert_eq!(key.op.len(), self.model.nvars());
        match self.terms.entry(key) {
            alloc::collections::btree_map::Entry::Vacant(e) => {
                e.insert(s);
            }
            alloc::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get() + s;
                if num_traits::Zero::is_zero(&sum) {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.arity, other.arity);
        let mut out = self.clone();
        for (k, s) in &other.terms {
            out.add_term(k.clone(), s.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for s in out.terms.values_mut() {
            *s = -s.clone();
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        let mut out = Cochain::zero(self.arity, self.model);
        for (k, s) in &self.terms {
            out.add_term(k.clone(), s * c);
        }
        out
    }

    /// Evaluation on base polynomials, producing an operator on the
    /// total space.
    pub fn evaluate(&self, args: &[&Polynomial]) -> DiffOp {
        assert_eq!(args.len(), self.arity);
        let m = self.model;
        let mut out = DiffOp::zero(m.base, m.fiber);
        for (key, s) in &self.terms {
            let mut coeff = Polynomial::monomial(m.base, m.fiber, key.coeff.clone(), s.clone());
            let mut dead = false;
            for (i, d) in key.args.iter().enumerate() {
                let df = args[i].deriv_multi(d);
                if df.is_zero() {
                    dead = true;
                    break;
                }
                coeff = coeff.mul(&m.pr_star(&df));
            }
            if !dead {
                out.add_term(key.op.clone(), coeff);
            }
        }
        out
    }

    /// Largest derivative order applied to the acted-on function.
    pub fn max_op_order(&self) -> u32 {
        self.terms.keys().map(|k| mono_deg(&k.op)).max().unwrap_or(0)
    }

    /// Largest derivative order applied to any argument slot.
    pub fn max_arg_order(&self) -> u32 {
        self.terms
            .keys()
            .flat_map(|k| k.args.iter().map(mono_deg))
            .max()
            .unwrap_or(0)
    }

    pub fn max_coeff_degree(&self) -> u32 {
        self.terms.keys().map(|k| mono_deg(&k.coeff)).max().unwrap_or(0)
    }

    /// All coefficient monomials free of fiber variables: the exact
    /// criterion for invariance under all fiber translations.
    pub fn coeffs_fiber_free(&self) -> bool {
        self.terms.keys().all(|k| self.model.fiber_is_zero(&k.coeff))
    }

    /// The Hochschild differential. Arities 0..=2 are supported (a
    /// 3-cochain appears only as output, for verification).
    pub fn delta(&self) -> Result<Cochain, HochschildError> {
        if self.arity > 2 {
            return Err(HochschildError::ArityUnsupported { arity: self.arity });
        }
        let m = self.model;
        let mut out = Cochain::zero(self.arity + 1, m);
        for (key, s) in &self.terms {
            // Left action: the operator eats `F pr^* f_0`, so the base
            // part of the op index Leibniz-splits onto the new first
            // argument slot.
            let base_op = m.base_part(&key.op);
            for g in sub_indices(&base_op) {
                let emb = m.embed(&g);
                let c = multi_binom(&base_op, &g);
                let mut args = Vec::with_capacity(self.arity + 1);
                args.push(g.clone());
                args.extend(key.args.iter().cloned());
                out.add_term(
                    CochainKey {
                        coeff: key.coeff.clone(),
                        op: mono_sub(&key.op, &emb).unwrap(),
                        args,
                    },
                    s * bigint_scalar(&c),
                );
            }
            // Alternating slot merges: slot `i` of the old cochain eats
            // the product f_i f_{i+1}, Leibniz-split onto two slots.
            for i in 0..self.arity {
                let sign = if i % 2 == 0 { -s.clone() } else { s.clone() };
                let d = &key.args[i];
                for e in sub_indices(d) {
                    let c = multi_binom(d, &e);
                    let rest = mono_sub(d, &e).unwrap();
                    let mut args = Vec::with_capacity(self.arity + 1);
                    args.extend(key.args[..i].iter().cloned());
                    args.push(e.clone());
                    args.push(rest);
                    args.extend(key.args[i + 1..].iter().cloned());
                    out.add_term(
                        CochainKey { coeff: key.coeff.clone(), op: key.op.clone(), args },
                        sign.clone() * bigint_scalar(&c),
                    );
                }
            }
            // Right action: multiply the output by the last argument — a
            // fresh final slot with derivative index zero, sign (-1)^(k+1).
            let sign = if self.arity % 2 == 0 { -s.clone() } else { s.clone() };
            let mut args = key.args.clone();
            args.push(mono_zero(m.base));
            out.add_term(CochainKey { coeff: key.coeff.clone(), op: key.op.clone(), args }, sign);
        }
        Ok(out)
    }
}

/// Composition builders used by the obstruction calculus. All of them
/// stay in normal form by expanding the Leibniz rule explicitly.
impl Cochain {
    /// `(F, f, g) -> F * pr^*(C(f, g))` for a base arity-2 operator.
    pub fn mult_of_star(c: &MultiDiffOp, model: SubmersionModel) -> Self {
        assert_eq!(c.arity(), 2);
        assert_eq!((c.base(), c.fiber()), (model.base, 0));
        let mut out = Cochain::zero(2, model);
        for (slots, p) in c.terms() {
            for (u, s) in p.terms() {
                out.add_term(
                    CochainKey {
                        coeff: model.embed(u),
                        op: mono_zero(model.nvars()),
                        args: vec![slots[0].clone(), slots[1].clone()],
                    },
                    s.clone(),
                );
            }
        }
        out
    }

    /// `(F, f, g) -> rho(F, C(f, g))` for an arity-1 cochain and a base
    /// arity-2 operator.
    pub fn compose_arg_with_star(rho: &Cochain, c: &MultiDiffOp) -> Self {
        assert_eq!(rho.arity, 1);
        assert_eq!(c.arity(), 2);
        let m = rho.model;
        assert_eq!((c.base(), c.fiber()), (m.base, 0));
        let mut out = Cochain::zero(2, m);
        for (key, s) in &rho.terms {
            let d = &key.args[0];
            for (slots, p) in c.terms() {
                for (u, sc) in p.terms() {
                    // d^d (u * d^{b1} f * d^{b2} g): trinomial Leibniz
                    for (g0, g1, g2, mult) in crate::poly::splits3(d) {
                        if !mono_le(&g0, u) {
                            continue;
                        }
                        let fall = crate::poly::falling_product(u, &g0);
                        let coeff = s * sc * bigint_scalar(&mult) * bigint_scalar(&fall);
                        let coeff_mono =
                            mono_add(&key.coeff, &m.embed(&mono_sub(u, &g0).unwrap()));
                        out.add_term(
                            CochainKey {
                                coeff: coeff_mono,
                                op: key.op.clone(),
                                args: vec![mono_add(&slots[0], &g1), mono_add(&slots[1], &g2)],
                            },
                            coeff,
                        );
                    }
                }
            }
        }
        out
    }

    /// `(F, f, g) -> outer(inner(F, f), g)` for two arity-1 cochains.
    pub fn compose_op_slot(outer: &Cochain, inner: &Cochain) -> Self {
        assert_eq!(outer.arity, 1);
        assert_eq!(inner.arity, 1);
        let m = outer.model;
        assert_eq!(inner.model, m);
        let mut out = Cochain::zero(2, m);
        for (ko, so) in &outer.terms {
            for (ki, si) in &inner.terms {
                // d^a (v * pr^*(d^e f) * d^b F): trinomial Leibniz over
                // the total-space index a; the middle factor only
                // survives base-direction derivatives.
                for (g0, g1, g2, mult) in crate::poly::splits3(&ko.op) {
                    if !mono_le(&g0, &ki.coeff) {
                        continue;
                    }
                    if !m.fiber_is_zero(&g1) {
                        continue;
                    }
                    let fall = crate::poly::falling_product(&ki.coeff, &g0);
                    let coeff = so * si * bigint_scalar(&mult) * bigint_scalar(&fall);
                    out.add_term(
                        CochainKey {
                            coeff: mono_add(&ko.coeff, &mono_sub(&ki.coeff, &g0).unwrap()),
                            op: mono_add(&ki.op, &g2),
                            args: vec![
                                mono_add(&ki.args[0], &m.base_part(&g1)),
                                ko.args[0].clone(),
                            ],
                        },
                        coeff,
                    );
                }
            }
        }
        out
    }

    /// `f -> d . c(f)` (apply the operator after the cochain value).
    pub fn compose_output(d: &DiffOp, c: &Cochain) -> Self {
        assert_eq!(c.arity, 1);
        let m = c.model;
        assert_eq!((d.base(), d.fiber()), (m.base, m.fiber));
        let mut out = Cochain::zero(1, m);
        for (kappa, w) in d.terms() {
            for (wu, ws) in w.terms() {
                for (key, s) in &c.terms {
                    for (g0, g1, g2, mult) in crate::poly::splits3(kappa) {
                        if !mono_le(&g0, &key.coeff) {
                            continue;
                        }
                        if !m.fiber_is_zero(&g1) {
                            continue;
                        }
                        let fall = crate::poly::falling_product(&key.coeff, &g0);
                        let coeff = ws * s * bigint_scalar(&mult) * bigint_scalar(&fall);
                        out.add_term(
                            CochainKey {
                                coeff: mono_add(wu, &mono_sub(&key.coeff, &g0).unwrap()),
                                op: mono_add(&key.op, &g2),
                                args: vec![mono_add(&key.args[0], &m.base_part(&g1))],
                            },
                            coeff,
                        );
                    }
                }
            }
        }
        out
    }

    /// `f -> c(f) . d` (pre-compose the acted-on slot with the operator).
    pub fn compose_input(c: &Cochain, d: &DiffOp) -> Self {
        let m = c.model;
        assert_eq!((d.base(), d.fiber()), (m.base, m.fiber));
        let mut out = Cochain::zero(c.arity, m);
        for (key, s) in &c.terms {
            for (kappa, w) in d.terms() {
                for (wu, ws) in w.terms() {
                    // d^a (w d^kappa F) = sum binom(a,g) d^g w d^{a-g+kappa} F
                    for g in sub_indices(&key.op) {
                        if !mono_le(&g, wu) {
                            continue;
                        }
                        let fall = crate::poly::falling_product(wu, &g);
                        let coeff = s
                            * ws
                            * bigint_scalar(&multi_binom(&key.op, &g))
                            * bigint_scalar(&fall);
                        out.add_term(
                            CochainKey {
                                coeff: mono_add(&key.coeff, &mono_sub(wu, &g).unwrap()),
                                op: mono_add(&mono_sub(&key.op, &g).unwrap(), kappa),
                                args: key.args.clone(),
                            },
                            coeff,
                        );
                    }
                }
            }
        }
        out
    }

    /// `f -> c(d(f))` for a base operator acting on the argument slot of
    /// an arity-1 cochain.
    pub fn compose_arg_with_op(c: &Cochain, d: &DiffOp) -> Self {
        assert_eq!(c.arity, 1);
        let m = c.model;
        assert_eq!((d.base(), d.fiber()), (m.base, 0));
        let mut out = Cochain::zero(1, m);
        for (key, s) in &c.terms {
            let dd = &key.args[0];
            for (kappa, w) in d.terms() {
                for (wu, ws) in w.terms() {
                    for g in sub_indices(dd) {
                        if !mono_le(&g, wu) {
                            continue;
                        }
                        let fall = crate::poly::falling_product(wu, &g);
                        let coeff =
                            s * ws * bigint_scalar(&multi_binom(dd, &g)) * bigint_scalar(&fall);
                        out.add_term(
                            CochainKey {
                                coeff: mono_add(&key.coeff, &m.embed(&mono_sub(wu, &g).unwrap())),
                                op: key.op.clone(),
                                args: vec![mono_add(&mono_sub(dd, &g).unwrap(), kappa)],
                            },
                            coeff,
                        );
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CocycleWitness {
    /// Base monomial arguments on which the differential fails.
    pub args: Vec<Mono>,
    /// Total-space monomial separating the operator from zero.
    pub target: Mono,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CocycleReport {
    pub pass: bool,
    pub witness: Option<CocycleWitness>,
    pub degree_bound: u32,
    /// Operator order of the differential; applications to total-space
    /// monomials up to this degree decide vanishing.
    pub derived_bound: u32,
    pub tuples_checked: usize,
}

/// Evaluates the differential of a cochain on all base monomial tuples
/// up to `degree_bound` and tests exact operator vanishing by
/// application to total-space monomials up to the derived bound.
pub fn is_cocycle(c: &Cochain, degree_bound: u32) -> Result<CocycleReport, HochschildError> {
    let dc = c.delta()?;
    let m = c.model();
    let derived = dc.max_op_order();
    let base_monos = crate::poly::monomials_up_to(m.base, degree_bound);
    let total_monos = crate::poly::monomials_up_to(m.nvars(), derived);
    let arity = dc.arity();
    let mut tuples_checked = 0usize;
    let mut idx = vec![0usize; arity];
    loop {
        let args: Vec<Polynomial> = idx
            .iter()
            .map(|&i| Polynomial::monomial(m.base, 0, base_monos[i].clone(), crate::scalar::s_one()))
            .collect();
        let refs: Vec<&Polynomial> = args.iter().collect();
        let op = dc.evaluate(&refs);
        tuples_checked += 1;
        if !op.is_zero() {
            // locate a separating monomial
            for t in &total_monos {
                let f = Polynomial::monomial(m.base, m.fiber, t.clone(), crate::scalar::s_one());
                if !op.apply(&f).is_zero() {
                    return Ok(CocycleReport {
                        pass: false,
                        witness: Some(CocycleWitness {
                            args: idx.iter().map(|&i| base_monos[i].clone()).collect(),
                            target: t.clone(),
                        }),
                        degree_bound,
                        derived_bound: derived,
                        tuples_checked,
                    });
                }
            }
            unreachable!("nonzero operator must act nontrivially below its order");
        }
        // advance the tuple index
        let mut pos = 0;
        loop {
            if pos == arity {
                return Ok(CocycleReport {
                    pass: true,
                    witness: None,
                    degree_bound,
                    derived_bound: derived,
                    tuples_checked,
                });
            }
            idx[pos] += 1;
            if idx[pos] < base_monos.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// The total derivative weight of a term: op index plus embedded
/// argument indices. Preserved by the differential.
fn term_weight(model: &SubmersionModel, key: &CochainKey) -> Mono {
    let mut w = key.op.clone();
    for d in &key.args {
        w = mono_add(&w, &model.embed(d));
    }
    w
}

/// Candidate unknown keys of arity `k-1` inside the block `(u, w)`.
fn block_candidates(
    model: &SubmersionModel,
    arity: usize,
    coeff: &Mono,
    weight: &Mono,
    bounds: &AnsatzBounds,
    equivariant: bool,
) -> Vec<CochainKey> {
    if mono_deg(coeff) > bounds.max_coeff_degree {
        return Vec::new();
    }
    if equivariant && !model.fiber_is_zero(coeff) {
        return Vec::new();
    }
    let base_weight = model.base_part(weight);
    let mut out = Vec::new();
    match arity {
        0 => {
            // a 0-cochain term carries the whole weight on the operator;
            // vertical candidates are excluded: they span the kernel and
            // the canonical solution leaves them at zero
            if mono_deg(weight) <= bounds.max_diffop_order && !mono_is_zero(&base_weight) {
                out.push(CochainKey { coeff: coeff.clone(), op: weight.clone(), args: Vec::new() });
            }
        }
        1 => {
            for d in sub_indices(&base_weight) {
                if mono_deg(&d) > bounds.max_base_derivatives {
                    continue;
                }
                let op = mono_sub(weight, &model.embed(&d)).unwrap();
                if mono_deg(&op) > bounds.max_diffop_order {
                    continue;
                }
                out.push(CochainKey { coeff: coeff.clone(), op, args: vec![d] });
            }
        }
        _ => unreachable!("solver targets arity 1 or 2"),
    }
    out
}

/// Solves `delta(phi) = r` exactly inside the term ansatz, blockwise over
/// the invariants of the differential. The returned solution is the
/// canonical one: free variables are zero and (for operator unknowns)
/// no vertical component is introduced.
pub fn solve_coboundary(
    r: &Cochain,
    bounds: &AnsatzBounds,
    equivariant: bool,
) -> Result<Cochain, HochschildError> {
    if r.arity() == 0 || r.arity() > 2 {
        return Err(HochschildError::ArityUnsupported { arity: r.arity() });
    }
    // Necessary condition, checked exactly on the normal form.
    if !r.delta()?.is_zero() {
        return Err(HochschildError::NotACocycle);
    }
    let model = r.model();
    let unknown_arity = r.arity() - 1;

    // Group the right-hand side into blocks.
    let mut blocks: BTreeMap<(Mono, Mono), Vec<(CochainKey, Scalar)>> = BTreeMap::new();
    for (key, s) in r.terms() {
        let w = term_weight(&model, key);
        blocks
            .entry((key.coeff.clone(), w))
            .or_default()
            .push((key.clone(), s.clone()));
    }

    let mut solution = Cochain::zero(unknown_arity, model);
    for ((coeff, weight), rhs_terms) in blocks {
        let candidates =
            block_candidates(&model, unknown_arity, &coeff, &weight, bounds, equivariant);
        if candidates.is_empty() {
            return Err(HochschildError::NoSolutionInTruncation { bounds: bounds.clone() });
        }
        // Images of the candidates under the differential.
        let mut row_index: BTreeMap<CochainKey, usize> = BTreeMap::new();
        let mut images: Vec<Vec<(usize, Scalar)>> = Vec::with_capacity(candidates.len());
        for cand in &candidates {
            let mut single = Cochain::zero(unknown_arity, model);
            single.add_term(cand.clone(), crate::scalar::s_one());
            let image = single.delta()?;
            let mut cols = Vec::new();
            for (k, v) in image.terms() {
                let next = row_index.len();
                let idx = *row_index.entry(k.clone()).or_insert(next);
                cols.push((idx, v.clone()));
            }
            images.push(cols);
        }
        for (k, _) in &rhs_terms {
            let next = row_index.len();
            row_index.entry(k.clone()).or_insert(next);
        }
        let nrows = row_index.len();
        let mut matrix = vec![vec![s_zero(); candidates.len()]; nrows];
        for (col, cols) in images.iter().enumerate() {
            for (row, v) in cols {
                matrix[*row][col] = v.clone();
            }
        }
        let mut rhs = vec![s_zero(); nrows];
        for (k, v) in &rhs_terms {
            rhs[row_index[k]] = v.clone();
        }
        let x = solve_dense(&matrix, &rhs)
            .ok_or(HochschildError::NoSolutionInTruncation { bounds: bounds.clone() })?;
        for (cand, v) in candidates.into_iter().zip(x) {
            solution.add_term(cand, v);
        }
    }
    debug_assert_eq!(solution.delta()?, *r);
    Ok(solution)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::monomials_up_to;
    use crate::scalar::{rat, ratio, s_i, s_one};
    use crate::star::{moyal_cochain, PoissonTensor};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn model() -> SubmersionModel {
        SubmersionModel::new(2, 1)
    }

    fn random_cochain(rng: &mut ChaCha8Rng, arity: usize, m: SubmersionModel) -> Cochain {
        let mut c = Cochain::zero(arity, m);
        let total_monos = monomials_up_to(m.nvars(), 2);
        let base_monos = monomials_up_to(m.base, 2);
        for _ in 0..4 {
            let coeff = total_monos[rng.gen_range(0..total_monos.len())].clone();
            let op = total_monos[rng.gen_range(0..total_monos.len())].clone();
            let args = (0..arity)
                .map(|_| base_monos[rng.gen_range(0..base_monos.len())].clone())
                .collect();
            let num = rng.gen_range(-3i64..=3);
            let den = rng.gen_range(1i64..=3);
            c.add_term(
                CochainKey { coeff, op, args },
                crate::scalar::s_ratio(num, den) + s_i() * crate::scalar::s_ratio(num - 1, den),
            );
        }
        c
    }

    #[test]
    fn vertical_operators_are_exactly_the_zero_cocycles() {
        let m = model();
        // d/dt is vertical: delta vanishes
        let dt = DiffOp::partial(2, 1, 2);
        let c = Cochain::from_diffop(&dt, m);
        assert!(c.delta().unwrap().is_zero());

        // mult(t x) is vertical as well
        let tx = Polynomial::var(2, 1, 2).mul(&Polynomial::var(2, 1, 0));
        assert!(Cochain::from_diffop(&DiffOp::mult(&tx), m).delta().unwrap().is_zero());

        // d/dx is not: its differential is f -> mult(pr^*(df/dx))
        let dx = DiffOp::partial(2, 1, 0);
        let d = Cochain::from_diffop(&dx, m).delta().unwrap();
        let mut expect = Cochain::zero(1, m);
        expect.add_term(
            CochainKey { coeff: mono_zero(3), op: mono_zero(3), args: vec![vec![1, 0]] },
            s_one(),
        );
        assert_eq!(d, expect);

        // both directions, syntactically and semantically, on a basis of
        // operators of order <= 2
        let total_monos = monomials_up_to(3, 2);
        let f_monos = monomials_up_to(2, 3);
        for op_idx in &total_monos {
            for coeff in &total_monos {
                let op = DiffOp::term(
                    op_idx.clone(),
                    Polynomial::monomial(2, 1, coeff.clone(), s_one()),
                );
                let is_vert = op.is_vertical();
                let dz = Cochain::from_diffop(&op, m).delta().unwrap().is_zero();
                assert_eq!(is_vert, dz, "op {op_idx:?} coeff {coeff:?}");
                // semantic route: commutators with pulled-back mults
                let commutes = f_monos.iter().all(|fm| {
                    let f = Polynomial::monomial(2, 0, fm.clone(), s_one());
                    let mult = DiffOp::mult(&m.pr_star(&f));
                    op.commutator(&mult).is_zero()
                });
                assert_eq!(is_vert, commutes);
            }
        }
    }

    #[test]
    fn delta_squared_vanishes() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = model();
        for _ in 0..6 {
            let c0 = random_cochain(&mut rng, 0, m);
            assert!(c0.delta().unwrap().delta().unwrap().is_zero());
            let c1 = random_cochain(&mut rng, 1, m);
            assert!(c1.delta().unwrap().delta().unwrap().is_zero());
        }
    }

    #[test]
    fn delta_matches_direct_bimodule_formula() {
        // (delta phi)(f, g) = phi(g) . mult(pr^*f) - phi(fg) + mult(pr^*g) . phi(f)
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = model();
        let phi = random_cochain(&mut rng, 1, m);
        let d = phi.delta().unwrap();
        let base_monos = monomials_up_to(2, 2);
        for fm in &base_monos {
            for gm in &base_monos {
                let f = Polynomial::monomial(2, 0, fm.clone(), s_one());
                let g = Polynomial::monomial(2, 0, gm.clone(), s_one());
                let direct = phi
                    .evaluate(&[&g])
                    .compose(&DiffOp::mult(&m.pr_star(&f)))
                    .sub(&phi.evaluate(&[&f.mul(&g)]))
                    .add(&DiffOp::mult(&m.pr_star(&g)).compose(&phi.evaluate(&[&f])));
                assert_eq!(d.evaluate(&[&f, &g]), direct);
            }
        }
    }

    #[test]
    fn cocycle_checks() {
        let m = model();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        // coboundaries are cocycles
        let psi = random_cochain(&mut rng, 1, m);
        let r = psi.delta().unwrap();
        assert!(is_cocycle(&r, 2).unwrap().pass);

        // mult of the first exponential cochain is a cocycle (order-one
        // associativity of the underlying product)
        let th = PoissonTensor::constant(2, &[(0, 1, rat(1))]).unwrap();
        let c1 = moyal_cochain(&th, 1).unwrap();
        let r = Cochain::mult_of_star(&c1, m);
        assert!(is_cocycle(&r, 3).unwrap().pass);

        // mult(pr^*(f dg/dx)) is not a cocycle for these actions
        let mut c = MultiDiffOp::zero(2, 2, 0);
        c.add_term(vec![vec![0, 0], vec![1, 0]], Polynomial::one(2, 0));
        let r = Cochain::mult_of_star(&c, m);
        let report = is_cocycle(&r, 2).unwrap();
        assert!(!report.pass);
        assert!(report.witness.is_some());
    }

    #[test]
    fn solver_round_trips_coboundaries() {
        let m = model();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let bounds = AnsatzBounds {
            max_diffop_order: 4,
            max_coeff_degree: 4,
            max_base_derivatives: 4,
        };
        for trial in 0..4 {
            let psi = random_cochain(&mut rng, 1, m);
            let r = psi.delta().unwrap();
            let phi = solve_coboundary(&r, &bounds, false).unwrap();
            // soundness re-check, independent of the linear algebra:
            // evaluate both sides on monomial pairs
            let d_phi = phi.delta().unwrap();
            let base_monos = monomials_up_to(2, 2);
            for fm in &base_monos {
                for gm in &base_monos {
                    let f = Polynomial::monomial(2, 0, fm.clone(), s_one());
                    let g = Polynomial::monomial(2, 0, gm.clone(), s_one());
                    assert_eq!(
                        d_phi.evaluate(&[&f, &g]),
                        r.evaluate(&[&f, &g]),
                        "trial {trial}"
                    );
                }
            }
        }
        // R = 0 accepts the zero solution
        let z = Cochain::zero(2, m);
        assert!(solve_coboundary(&z, &bounds, false).unwrap().is_zero());
    }

    #[test]
    fn solver_respects_ansatz_bounds() {
        let m = model();
        // psi = d^3/dx^3 as a 1-cochain value: delta(psi) needs the full
        // third-order operator, so an order-2 ansatz must fail
        let mut psi = Cochain::zero(1, m);
        psi.add_term(
            CochainKey { coeff: mono_zero(3), op: vec![3, 0, 0], args: vec![vec![0, 0]] },
            s_one(),
        );
        let r = psi.delta().unwrap();
        let tight = AnsatzBounds {
            max_diffop_order: 2,
            max_coeff_degree: 0,
            max_base_derivatives: 3,
        };
        assert!(matches!(
            solve_coboundary(&r, &tight, false),
            Err(HochschildError::NoSolutionInTruncation { .. })
        ));
        let loose = AnsatzBounds {
            max_diffop_order: 3,
            max_coeff_degree: 0,
            max_base_derivatives: 3,
        };
        let phi = solve_coboundary(&r, &loose, false).unwrap();
        assert_eq!(phi.delta().unwrap(), r);

        // derivatives on the argument slot cannot be traded away either:
        // a cocycle with first base derivatives in the arguments is
        // unsolvable with max_base_derivatives = 0
        let th = PoissonTensor::constant(2, &[(0, 1, rat(1))]).unwrap();
        let c1 = moyal_cochain(&th, 1).unwrap();
        let r = Cochain::mult_of_star(&c1, m);
        let no_derivs = AnsatzBounds {
            max_diffop_order: 3,
            max_coeff_degree: 2,
            max_base_derivatives: 0,
        };
        assert!(matches!(
            solve_coboundary(&r, &no_derivs, false),
            Err(HochschildError::NoSolutionInTruncation { .. })
        ));

        // a non-cocycle is rejected up front
        let mut c = MultiDiffOp::zero(2, 2, 0);
        c.add_term(vec![vec![0, 0], vec![1, 0]], Polynomial::one(2, 0));
        let bad = Cochain::mult_of_star(&c, m);
        assert!(matches!(
            solve_coboundary(&bad, &no_derivs, false),
            Err(HochschildError::NotACocycle)
        ));
    }

    #[test]
    fn fiber_free_data_solves_inside_the_invariant_complex() {
        let m = model();
        let th = PoissonTensor::constant(2, &[(0, 1, ratio(1, 2))]).unwrap();
        let c1 = moyal_cochain(&th, 1).unwrap();
        let r = Cochain::mult_of_star(&c1, m);
        assert!(r.coeffs_fiber_free());
        let bounds = AnsatzBounds {
            max_diffop_order: 2,
            max_coeff_degree: 2,
            max_base_derivatives: 2,
        };
        let plain = solve_coboundary(&r, &bounds, false).unwrap();
        let invariant = solve_coboundary(&r, &bounds, true).unwrap();
        // fiber-free right-hand sides stay in fiber-free blocks, so the
        // two solutions coincide and are translation invariant
        assert_eq!(plain, invariant);
        assert!(invariant.coeffs_fiber_free());
        assert_eq!(invariant.delta().unwrap(), r);
    }

    #[test]
    fn composition_builders_match_direct_evaluation() {
        let m = model();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let rho = random_cochain(&mut rng, 1, m);
        let sigma = random_cochain(&mut rng, 1, m);
        let th = PoissonTensor::constant(2, &[(0, 1, rat(2))]).unwrap();
        let c1 = moyal_cochain(&th, 1).unwrap();
        let d_total = DiffOp::term(vec![1, 0, 1], Polynomial::var(2, 1, 2))
            .add(&DiffOp::mult(&Polynomial::var(2, 1, 0)));
        let d_base =
            DiffOp::term(vec![0, 1], Polynomial::var(2, 0, 0)).add(&DiffOp::partial(2, 0, 0));

        let base_monos = monomials_up_to(2, 2);
        let total_monos = monomials_up_to(3, 3);
        let arg_star = Cochain::compose_arg_with_star(&rho, &c1);
        let op_slot = Cochain::compose_op_slot(&rho, &sigma);
        let mult_star = Cochain::mult_of_star(&c1, m);
        let out = Cochain::compose_output(&d_total, &rho);
        let inp = Cochain::compose_input(&rho, &d_total);
        let arg_op = Cochain::compose_arg_with_op(&rho, &d_base);

        for fm in &base_monos {
            for gm in &base_monos {
                let f = Polynomial::monomial(2, 0, fm.clone(), s_one());
                let g = Polynomial::monomial(2, 0, gm.clone(), s_one());
                assert_eq!(
                    arg_star.evaluate(&[&f, &g]),
                    rho.evaluate(&[&c1.apply2(&f, &g)])
                );
                assert_eq!(
                    op_slot.evaluate(&[&f, &g]),
                    rho.evaluate(&[&g]).compose(&sigma.evaluate(&[&f]))
                );
                assert_eq!(
                    mult_star.evaluate(&[&f, &g]),
                    DiffOp::mult(&m.pr_star(&c1.apply2(&f, &g)))
                );
            }
            let f = Polynomial::monomial(2, 0, fm.clone(), s_one());
            assert_eq!(out.evaluate(&[&f]), d_total.compose(&rho.evaluate(&[&f])));
            assert_eq!(inp.evaluate(&[&f]), rho.evaluate(&[&f]).compose(&d_total));
            assert_eq!(arg_op.evaluate(&[&f]), rho.evaluate(&[&d_base.apply(&f)]));
            // spot-check actual application agreement on the total space
            for tm in total_monos.iter().take(6) {
                let big = Polynomial::monomial(2, 1, tm.clone(), s_one());
                assert_eq!(
                    out.evaluate(&[&f]).apply(&big),
                    d_total.apply(&rho.evaluate(&[&f]).apply(&big))
                );
            }
        }
    }

    #[test]
    fn unsupported_arities_error() {
        let m = model();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c1 = random_cochain(&mut rng, 1, m);
        let c3 = c1.delta().unwrap().delta().unwrap();
        assert_eq!(c3.arity(), 3);
        assert!(matches!(
            c3.delta(),
            Err(HochschildError::ArityUnsupported { arity: 3 })
        ));
    }
}
