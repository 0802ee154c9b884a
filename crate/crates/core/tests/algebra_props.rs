//! Seeded randomized invariants for the operator algebra and the star
//! products: composition associativity, the exponential product's
//! structural identities, and equivalence-transformation round trips.

use fdq_core::diffop::op_series_apply;
use fdq_core::poly::monomials_up_to;
use fdq_core::scalar::{ratio, s_imag, s_one, s_real, Rational, Scalar};
use fdq_core::series::PolySeries;
use fdq_core::star::{
    apply_equivalence, check_associativity, check_hermitian, extract_poisson, tensor_bracket,
};
use fdq_core::{DiffOp, EquivalenceTransform, Matrix, Polynomial, PoissonTensor, StarProduct};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_rational(rng: &mut ChaCha8Rng) -> Rational {
    ratio(rng.gen_range(-6i64..=6), rng.gen_range(1i64..=4))
}

fn random_scalar(rng: &mut ChaCha8Rng) -> Scalar {
    s_real(random_rational(rng)) + s_imag(random_rational(rng))
}

fn random_poly(rng: &mut ChaCha8Rng, nvars: usize, deg: u32) -> Polynomial {
    let monos = monomials_up_to(nvars, deg);
    let mut p = Polynomial::zero(nvars, 0);
    for _ in 0..3 {
        let m = monos[rng.gen_range(0..monos.len())].clone();
        p.add_term(m, random_scalar(rng));
    }
    p
}

fn random_op(rng: &mut ChaCha8Rng, nvars: usize, order: u32, deg: u32) -> DiffOp {
    let monos = monomials_up_to(nvars, order);
    let mut d = DiffOp::zero(nvars, 0);
    for _ in 0..3 {
        let a = monos[rng.gen_range(0..monos.len())].clone();
        d.add_term(a, random_poly(rng, nvars, deg));
    }
    d
}

fn random_antisymmetric(rng: &mut ChaCha8Rng, m: usize) -> PoissonTensor {
    let mut entries = Matrix::from_fn(m, m, |_, _| Polynomial::zero(m, 0));
    for i in 0..m {
        for j in (i + 1)..m {
            let v = random_rational(rng);
            entries.set(i, j, Polynomial::constant(m, 0, s_real(v.clone())));
            entries.set(j, i, Polynomial::constant(m, 0, s_real(-v)));
        }
    }
    PoissonTensor::new(entries).unwrap()
}

#[test]
fn operator_composition_is_associative() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let monos = monomials_up_to(2, 6);
    for _ in 0..8 {
        let a = random_op(&mut rng, 2, 2, 2);
        let b = random_op(&mut rng, 2, 2, 2);
        let c = random_op(&mut rng, 2, 2, 2);
        let left = a.compose(&b).compose(&c);
        let right = a.compose(&b.compose(&c));
        assert_eq!(left, right);
        // and composition matches iterated application on monomials
        for m in monos.iter().step_by(5) {
            let f = Polynomial::monomial(2, 0, m.clone(), s_one());
            assert_eq!(left.apply(&f), a.apply(&b.apply(&c.apply(&f))));
        }
    }
}

#[test]
fn exponential_products_of_random_tensors_associate() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for m in 2..=3usize {
        for _ in 0..2 {
            let th = random_antisymmetric(&mut rng, m);
            let s = StarProduct::moyal(&th, 4).unwrap();
            let report = check_associativity(&s, 3);
            assert!(report.pass, "m = {m}: {report:?}");
            assert!(check_hermitian(&s, 3).pass);

            // commutation relations of the coordinates
            for mu in 0..m {
                for nu in 0..m {
                    let xm = s.series(Polynomial::var(m, 0, mu));
                    let xn = s.series(Polynomial::var(m, 0, nu));
                    let comm = s.commutator(&xm, &xn);
                    let mut expect = PolySeries::constant(Polynomial::zero(m, 0), 4);
                    expect.set_coeff(
                        1,
                        th.entry(mu, nu).scale(&fdq_core::scalar::s_i()),
                    );
                    assert_eq!(comm, expect);
                }
            }
        }
    }
}

#[test]
fn four_variable_tensors_associate_too() {
    // smaller bounds in four variables; exactness is what matters
    let mut rng = ChaCha8Rng::seed_from_u64(4444);
    let th = random_antisymmetric(&mut rng, 4);
    let s = StarProduct::moyal(&th, 3).unwrap();
    let report = check_associativity(&s, 2);
    assert!(report.pass, "{report:?}");
}

#[test]
fn poisson_limit_satisfies_jacobi_on_cubics() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let th = random_antisymmetric(&mut rng, 3);
    let s = StarProduct::moyal(&th, 3).unwrap();
    let bracket = extract_poisson(&s);
    assert_eq!(bracket, tensor_bracket(&th));
    let monos = monomials_up_to(3, 3);
    for f in monos.iter().step_by(3) {
        for g in monos.iter().step_by(4) {
            for h in monos.iter().step_by(5) {
                let fp = Polynomial::monomial(3, 0, f.clone(), s_one());
                let gp = Polynomial::monomial(3, 0, g.clone(), s_one());
                let hp = Polynomial::monomial(3, 0, h.clone(), s_one());
                let defect = bracket
                    .apply2(&bracket.apply2(&fp, &gp), &hp)
                    .add(&bracket.apply2(&bracket.apply2(&gp, &hp), &fp))
                    .add(&bracket.apply2(&bracket.apply2(&hp, &fp), &gp));
                assert!(defect.is_zero());
            }
        }
    }
}

#[test]
fn equivalences_preserve_structure_and_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    let th = random_antisymmetric(&mut rng, 2);
    let n = 4;
    let s = StarProduct::moyal(&th, n).unwrap();

    // a real random first stage keeps the product Hermitian
    let mut real_stage = DiffOp::zero(2, 0);
    for a in monomials_up_to(2, 2) {
        if a.iter().sum::<u32>() == 0 {
            continue; // keep the unit fixed
        }
        let mut coeff = Polynomial::zero(2, 0);
        coeff.add_term(vec![0, 0], s_real(random_rational(&mut rng)));
        real_stage.add_term(a, coeff);
    }
    let t = EquivalenceTransform::new(2, vec![real_stage]);
    assert!(t.is_real());
    let sp = apply_equivalence(&t, &s).unwrap();
    assert!(check_associativity(&sp, 3).pass);
    assert!(check_hermitian(&sp, 3).pass);
    // the first-order antisymmetrization is untouched
    assert_eq!(extract_poisson(&sp), extract_poisson(&s));

    // round trip: transforming back restores every cochain
    let back = apply_equivalence(&t.inverse(n), &sp).unwrap();
    for r in 0..=n {
        assert_eq!(back.cochain(r), s.cochain(r));
    }

    // homomorphism identity on a random pair
    let f = s.series(random_poly(&mut rng, 2, 2));
    let g = s.series(random_poly(&mut rng, 2, 2));
    let lhs = op_series_apply(&t.as_series(n), &sp.multiply(&f, &g));
    let rhs = s.multiply(
        &op_series_apply(&t.as_series(n), &f),
        &op_series_apply(&t.as_series(n), &g),
    );
    assert_eq!(lhs, rhs);
}
