//! Deformation of projective modules over a star-product algebra.
//!
//! A classical idempotent matrix is carried to a star-idempotent one by
//! the iteration `e <- 3 e*e - 2 e*e*e`, which doubles the deformation
//! order of the idempotency defect at every step and never touches the
//! classical part. Columns of the deformed idempotent span the module;
//! the right action is componentwise star multiplication and the
//! deformed fiber metric is `h(phi, psi) = sum_i conj(phi_i) * psi_i`.

use alloc::boxed::Box;
use alloc::vec::Vec;
use alloc::{format, string::String, vec};

use crate::diffop::DiffOp;
use crate::matrix::{Matrix, ScalarScale};
use crate::poly::Polynomial;
use crate::ring::Ring;
use crate::scalar::s_int;
use crate::series::{invert_unit_series, FormalSeries, MatrixSeries, PolySeries};
use crate::star::{check_hermitian, star_matrix_mul, StarProduct};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ModuleError {
    /// The classical input fails `e * e = e` pointwise.
    NotIdempotent,
    /// The element is not fixed by the deformed projector.
    NotInModule,
    /// The star product fails the Hermitian identity.
    NonHermitianStar,
    /// The classical projector is not conjugate-transpose invariant.
    NonHermitianProjector,
}

impl core::fmt::Display for ModuleError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let msg = match self {
            ModuleError::NotIdempotent => "classical matrix is not idempotent",
            ModuleError::NotInModule => "element is not fixed by the projector",
            ModuleError::NonHermitianStar => "star product is not Hermitian",
            ModuleError::NonHermitianProjector => "classical projector is not Hermitian",
        };
        f.write_str(msg)
    }
}

/// A star-idempotent deformation of a classical projector, together with
/// the idempotency-defect order observed after each iteration step.
#[derive(Clone, Debug)]
pub struct DeformedIdempotent {
    pub matrix: MatrixSeries,
    /// Lowest deformation order of `e*e - e` after each step
    /// (truncation order + 1 once the defect vanishes entirely).
    pub defect_orders: Vec<usize>,
}

/// `e*e - e` with the star-matrix product.
pub fn idempotency_defect(s: &StarProduct, e: &MatrixSeries) -> MatrixSeries {
    star_matrix_mul(s, e, e).sub(e)
}

fn series_matrix_lowest(m: &MatrixSeries) -> usize {
    m.lowest_nonzero().unwrap_or(m.order() + 1)
}

/// Deforms a classical idempotent into a star-idempotent matrix by the
/// precision-doubling iteration; terminates after `ceil(log2(N+1))`
/// steps.
pub fn deform_idempotent(
    s: &StarProduct,
    e0: &Matrix<Polynomial>,
) -> Result<DeformedIdempotent, ModuleError> {
    if e0.mul(e0) != *e0 {
        return Err(ModuleError::NotIdempotent);
    }
    let n = s.order();
    let mut e = MatrixSeries::constant(e0.clone(), n);
    let mut defect_orders = Vec::new();
    let mut precision = 1usize; // defect vanishes below this order
    while precision < n + 1 {
        let e2 = star_matrix_mul(s, &e, &e);
        let e3 = star_matrix_mul(s, &e2, &e);
        e = e2
            .scale_scalar(&s_int(3))
            .sub(&e3.scale_scalar(&s_int(2)));
        precision *= 2;
        let defect = idempotency_defect(s, &e);
        defect_orders.push(series_matrix_lowest(&defect));
    }
    debug_assert!(idempotency_defect(s, &e).is_zero());
    debug_assert_eq!(e.coeff(0), e0);
    Ok(DeformedIdempotent { matrix: e, defect_orders })
}

/// Projects an arbitrary column onto the module of `e`: `e * v` is
/// always a module element when the star product is associative.
pub fn project_to_module(s: &StarProduct, e: &MatrixSeries, v: &MatrixSeries) -> MatrixSeries {
    star_matrix_mul(s, e, v)
}

pub fn is_module_element(s: &StarProduct, e: &MatrixSeries, phi: &MatrixSeries) -> bool {
    star_matrix_mul(s, e, phi) == *phi
}

/// Right action `phi . f`: componentwise star multiplication. Errors when
/// `phi` is not in the module of `e`.
pub fn module_action(
    s: &StarProduct,
    e: &MatrixSeries,
    phi: &MatrixSeries,
    f: &PolySeries,
) -> Result<MatrixSeries, ModuleError> {
    if !is_module_element(s, e, phi) {
        return Err(ModuleError::NotInModule);
    }
    Ok(free_action(s, phi, f))
}

/// The same componentwise action on the free module (no membership check).
pub fn free_action(s: &StarProduct, phi: &MatrixSeries, f: &PolySeries) -> MatrixSeries {
    let f_mat = f.map(|p| Matrix::from_rows(vec![vec![p.clone()]]));
    star_matrix_mul(s, phi, &f_mat)
}

/// The deformed Hermitian fiber metric of a projector:
/// `h(phi, psi) = sum_i conj(phi_i) * psi_i` restricted to the module.
pub struct DeformedMetric<'a> {
    star: &'a StarProduct,
    projector: MatrixSeries,
}

impl<'a> DeformedMetric<'a> {
    pub fn projector(&self) -> &MatrixSeries {
        &self.projector
    }

    pub fn eval(&self, phi: &MatrixSeries, psi: &MatrixSeries) -> PolySeries {
        let phi_h = phi.map(|m| m.conj_transpose());
        let prod = star_matrix_mul(self.star, &phi_h, psi);
        prod.map(|m| m.get(0, 0).clone())
    }
}

/// Builds the deformed metric for a Hermitian projector over a Hermitian
/// star product. A non-Hermitian deformed projector with Hermitian
/// classical part is replaced by the (Hermitian) iteration output of its
/// classical part; a non-Hermitian classical part is rejected.
pub fn deform_metric<'a>(
    s: &'a StarProduct,
    e: &MatrixSeries,
) -> Result<DeformedMetric<'a>, ModuleError> {
    // Hermitian-ness of the product is decidable: the scan is complete at
    // the cochains' slot order.
    if !check_hermitian(s, s.max_slot_order()).pass {
        return Err(ModuleError::NonHermitianStar);
    }
    let herm = e.map(|m| m.conj_transpose());
    let projector = if herm == *e {
        e.clone()
    } else {
        let e0 = e.coeff(0);
        if e0.conj_transpose() != *e0 {
            return Err(ModuleError::NonHermitianProjector);
        }
        deform_idempotent(s, e0)?.matrix
    };
    Ok(DeformedMetric { star: s, projector })
}

/// Equivalence transformation on module columns: a formal series of
/// operator matrices starting at the identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModuleTransform {
    size: usize,
    base: usize,
    stages: Vec<Matrix<DiffOp>>, // stages[i] = T_{i+1}
}

impl ModuleTransform {
    pub fn new(size: usize, base: usize, stages: Vec<Matrix<DiffOp>>) -> Self {
        for st in &stages {
            assert_eq!((st.rows(), st.cols()), (size, size));
        }
        ModuleTransform { size, base, stages }
    }

    pub fn identity(size: usize, base: usize) -> Self {
        ModuleTransform { size, base, stages: Vec::new() }
    }

    /// Left star-multiplication by an invertible matrix series `u`
    /// (order-zero part the identity), as an operator-matrix series:
    /// stage `m` has entries `sum_{r+a=m} C_r(u_a[i][k], .)`.
    pub fn from_left_mult(s: &StarProduct, u: &MatrixSeries) -> Self {
        let n = u.order();
        let size = u.coeff(0).rows();
        let base = s.base();
        let zero = Matrix::zero_like_entry(&DiffOp::zero(base, 0), size, size);
        let mut stages = vec![zero; n];
        for r in 0..=n {
            for a in 0..=(n - r) {
                if r + a == 0 {
                    continue;
                }
                let c = s.cochain(r);
                let stage = &mut stages[r + a - 1];
                for i in 0..size {
                    for k in 0..size {
                        let op = c.curry_left(u.coeff(a).get(i, k));
                        stage.set(i, k, stage.get(i, k).add(&op));
                    }
                }
            }
        }
        ModuleTransform { size, base, stages }
    }

    fn op_identity(&self) -> Matrix<DiffOp> {
        Matrix::identity(self.size, DiffOp::identity(self.base, 0))
    }

    pub fn as_series(&self, order: usize) -> FormalSeries<Matrix<DiffOp>> {
        let mut coeffs = Vec::with_capacity(order + 1);
        coeffs.push(self.op_identity());
        for r in 1..=order {
            coeffs.push(self.stages.get(r - 1).cloned().unwrap_or_else(|| {
                Matrix::zero_like_entry(&DiffOp::zero(self.base, 0), self.size, self.size)
            }));
        }
        FormalSeries::from_coeffs(coeffs)
    }

    pub fn inverse(&self, order: usize) -> ModuleTransform {
        let inv = invert_unit_series(&self.as_series(order), &self.op_identity());
        let stages = (1..=order).map(|r| inv.coeff(r).clone()).collect();
        ModuleTransform { size: self.size, base: self.base, stages }
    }

    /// Applies the operator-matrix series to a column series.
    pub fn apply(&self, phi: &MatrixSeries) -> MatrixSeries {
        let n = phi.order();
        let t = self.as_series(n);
        let zero = phi.coeff(0).zero_like();
        let mut coeffs = vec![zero; n + 1];
        for r in 0..=n {
            for a in 0..=(n - r) {
                let stage = t.coeff(r);
                let col = phi.coeff(a);
                let mut out = col.zero_like();
                for i in 0..self.size {
                    let mut acc = Polynomial::zero(self.base, 0);
                    for j in 0..self.size {
                        acc = acc.add(&stage.get(i, j).apply(col.get(j, 0)));
                    }
                    out.set(i, 0, acc);
                }
                coeffs[r + a] = coeffs[r + a].add(&out);
            }
        }
        MatrixSeries::from_coeffs(coeffs)
    }
}

/// A right-module action on column series.
pub trait ModuleAction {
    fn act(&self, phi: &MatrixSeries, f: &PolySeries) -> MatrixSeries;
}

/// The concrete componentwise star action.
pub struct StarAction<'a> {
    pub star: &'a StarProduct,
}

impl ModuleAction for StarAction<'_> {
    fn act(&self, phi: &MatrixSeries, f: &PolySeries) -> MatrixSeries {
        free_action(self.star, phi, f)
    }
}

/// The action transported through an equivalence:
/// `phi .~ f = T((T^{-1} phi) . f)`.
pub struct TransformedAction<'a> {
    pub inner: &'a dyn ModuleAction,
    pub transform: &'a ModuleTransform,
}

impl ModuleAction for TransformedAction<'_> {
    fn act(&self, phi: &MatrixSeries, f: &PolySeries) -> MatrixSeries {
        let inv = self.transform.inverse(phi.order());
        self.transform.apply(&self.inner.act(&inv.apply(phi), f))
    }
}

/// An action perturbed by an extra bilinear stage entering at a fixed
/// deformation order (used to build deliberately inequivalent
/// deformations).
pub struct PerturbedAction<'a> {
    pub inner: &'a dyn ModuleAction,
    pub order: usize,
    pub perturbation: Box<dyn Fn(&Matrix<Polynomial>, &Polynomial) -> Matrix<Polynomial> + 'a>,
}

impl ModuleAction for PerturbedAction<'_> {
    fn act(&self, phi: &MatrixSeries, f: &PolySeries) -> MatrixSeries {
        let base = self.inner.act(phi, f);
        let n = phi.order();
        let mut extra = base.zero_like();
        for a in 0..=n {
            for b in 0..=(n - a) {
                let v = (self.perturbation)(phi.coeff(a), f.coeff(b));
                extra.set_coeff(a + b, extra.coeff(a + b).add(&v));
            }
        }
        base.add(&extra.shift(self.order))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivFailure {
    pub kind: String,
    pub phi_index: usize,
    pub partner_index: usize,
    pub order: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivalenceReport {
    pub pass: bool,
    pub failure: Option<EquivFailure>,
    pub elements_checked: usize,
}

/// Verifies `T(phi . f) = T(phi) .~ f` on the given test elements, and
/// the isometry identity `h(phi, psi) = h~(T phi, T psi)` when metrics
/// are supplied.
pub fn check_module_equivalence(
    t: &ModuleTransform,
    action: &dyn ModuleAction,
    action_tilde: &dyn ModuleAction,
    phis: &[MatrixSeries],
    fs: &[PolySeries],
    metrics: Option<(&DeformedMetric<'_>, &DeformedMetric<'_>)>,
) -> EquivalenceReport {
    let mut checked = 0usize;
    for (pi, phi) in phis.iter().enumerate() {
        for (fi, f) in fs.iter().enumerate() {
            checked += 1;
            let lhs = t.apply(&action.act(phi, f));
            let rhs = action_tilde.act(&t.apply(phi), f);
            if lhs != rhs {
                let order = (0..=lhs.order())
                    .find(|&r| lhs.coeff(r) != rhs.coeff(r))
                    .unwrap();
                return EquivalenceReport {
                    pass: false,
                    failure: Some(EquivFailure {
                        kind: format!("module-map"),
                        phi_index: pi,
                        partner_index: fi,
                        order,
                    }),
                    elements_checked: checked,
                };
            }
        }
    }
    if let Some((h, h_tilde)) = metrics {
        for (pi, phi) in phis.iter().enumerate() {
            for (qi, psi) in phis.iter().enumerate() {
                checked += 1;
                let lhs = h.eval(phi, psi);
                let rhs = h_tilde.eval(&t.apply(phi), &t.apply(psi));
                if lhs != rhs {
                    let order = (0..=lhs.order())
                        .find(|&r| lhs.coeff(r) != rhs.coeff(r))
                        .unwrap();
                    return EquivalenceReport {
                        pass: false,
                        failure: Some(EquivFailure {
                            kind: format!("isometry"),
                            phi_index: pi,
                            partner_index: qi,
                            order,
                        }),
                        elements_checked: checked,
                    };
                }
            }
        }
    }
    EquivalenceReport { pass: true, failure: None, elements_checked: checked }
}

/// The intertwiner `u = e2*e1 + (1 - e2)*(1 - e1)` between two deformed
/// idempotents with the same classical part: `u` starts at the identity
/// and satisfies `e2 * u = u * e1`, so left multiplication by `u` maps
/// the module of `e1` onto the module of `e2`.
pub fn idempotent_intertwiner(
    s: &StarProduct,
    e1: &MatrixSeries,
    e2: &MatrixSeries,
) -> MatrixSeries {
    let n = s.order();
    let size = e1.coeff(0).rows();
    let one = Matrix::identity(size, Polynomial::one(s.base(), 0));
    let id = MatrixSeries::constant(one, n);
    let c1 = id.sub(e1);
    let c2 = id.sub(e2);
    star_matrix_mul(s, e2, e1).add(&star_matrix_mul(s, &c2, &c1))
}

/// A column of polynomial series as an `n x 1` matrix series.
pub fn column(entries: Vec<PolySeries>) -> MatrixSeries {
    let n = entries[0].order();
    let rows = entries.len();
    let mut coeffs = Vec::with_capacity(n + 1);
    for r in 0..=n {
        coeffs.push(Matrix::from_fn(rows, 1, |i, _| entries[i].coeff(r).clone()));
    }
    MatrixSeries::from_coeffs(coeffs)
}

pub fn entry_series(m: &MatrixSeries, i: usize, j: usize) -> PolySeries {
    m.map(|mat| mat.get(i, j).clone())
}
