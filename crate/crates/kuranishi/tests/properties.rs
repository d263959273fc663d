use std::sync::{LazyLock, Mutex};

use kuranishi::arith::{qi, Mono, TruncatedPoly};
use kuranishi::bundle::{Bundle, Connection, Covering};
use kuranishi::cech::{bound_stability, HyperComplex, TwoTermComplex};
use kuranishi::curve::CurveModel;
use kuranishi::kuranishi::{classify_first_order, first_obstruction, gauge_shift, DeformationProblem, FirstOrderDatum};
use kuranishi::linalg::{solve, Matrix, QuotientSpace, Subspace};
use kuranishi::Rational;
use num_traits::Zero;
use proptest::prelude::*;

fn trivial_rank2() -> Connection {
    let c = CurveModel::default_elliptic();
    let cov = Covering::standard(&c).unwrap();
    Connection::trivial(&Bundle::trivial(&cov, 2)).unwrap()
}

struct Fixture {
    p: DeformationProblem,
    doubled: DeformationProblem,
    basis: Vec<FirstOrderDatum>,
}

static RANK2: LazyLock<Mutex<Fixture>> = LazyLock::new(|| {
    let conn = trivial_rank2();
    let p = DeformationProblem::connection(&conn, None).unwrap();
    let doubled = DeformationProblem::connection(&conn, Some(2 * p.bound())).unwrap();
    let basis = classify_first_order(&p);
    Mutex::new(Fixture { p, doubled, basis })
});

fn combine(basis: &[FirstOrderDatum], c: &[i64]) -> FirstOrderDatum {
    let c: Vec<Rational> = c.iter().map(|&v| qi(v)).collect();
    let mut u = basis[0].clone();
    u.a = u.a.iter().map(|m| m.scale(&Rational::zero())).collect();
    u.connection = u.connection.iter().map(|m| m.scale(&Rational::zero())).collect();
    for (b, k) in basis.iter().zip(&c) {
        u.a = u.a.iter().zip(&b.a).map(|(s, t)| s.add(&t.scale(k))).collect();
        u.connection = u.connection.iter().zip(&b.connection).map(|(s, t)| s.add(&t.scale(k))).collect();
    }
    u.coords = c;
    u
}

fn class(p: &mut DeformationProblem, u: &FirstOrderDatum) -> Vec<Rational> {
    first_obstruction(p, u).unwrap().class
}

fn coeffs() -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-2i64..=2, 8)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn first_obstruction_is_quadratic(u in coeffs(), v in coeffs(), w in coeffs(), s in -3i64..=3) {
        let mut fx = RANK2.lock().unwrap();
        let basis = fx.basis.clone();
        let p = &mut fx.p;
        let q = |p: &mut DeformationProblem, c: &[i64]| class(p, &combine(&basis, c));
        let sum = |a: &[i64], b: &[i64]| a.iter().zip(b).map(|(x, y)| x + y).collect::<Vec<_>>();
        let qu = q(p, &u);
        let scaled: Vec<i64> = u.iter().map(|x| s * x).collect();
        prop_assert_eq!(q(p, &scaled), qu.iter().map(|x| x * qi(s * s)).collect::<Vec<_>>());
        // the third difference of a quadratic form vanishes
        let terms = [
            (sum(&sum(&u, &v), &w), 1i64), (sum(&u, &v), -1), (sum(&u, &w), -1), (sum(&v, &w), -1),
            (u.clone(), 1), (v.clone(), 1), (w.clone(), 1),
        ];
        let mut acc = vec![Rational::zero(); qu.len()];
        for (c, sign) in terms {
            for (a, x) in acc.iter_mut().zip(q(p, &c)) {
                *a = a.clone() + x * qi(sign);
            }
        }
        prop_assert!(acc.iter().all(|x| x.is_zero()));
    }

    #[test]
    fn gauge_shift_keeps_classes(c in coeffs(), h in prop::collection::vec((0usize..64, -3i64..=3), 1..4)) {
        let mut fx = RANK2.lock().unwrap();
        let basis = fx.basis.clone();
        let p = &mut fx.p;
        let u = combine(&basis, &c);
        let c0 = p.hyper().c0();
        let mut x = vec![Rational::zero(); c0.dim(0)];
        for (i, v) in h {
            x[i % c0.dim(0)] = qi(v);
        }
        let shift = c0.element(0, &x);
        let moved = gauge_shift(p, &u, &shift).unwrap();
        prop_assert_eq!(&moved.coords, &u.coords);
        prop_assert_eq!(p.classes().h1_class(&moved.a, &moved.connection).unwrap(), u.coords.clone());
        prop_assert_eq!(class(p, &moved), class(p, &u));
    }

    #[test]
    fn doubling_the_bound_keeps_the_obstruction(c in coeffs()) {
        let mut fx = RANK2.lock().unwrap();
        let basis = fx.basis.clone();
        let u = combine(&basis, &c);
        let a = class(&mut fx.p, &u);
        let mut v = u.clone();
        v.coords = fx.doubled.classes().h1_class(&u.a, &u.connection).unwrap();
        prop_assert_eq!(&v.coords, &u.coords);
        prop_assert_eq!(class(&mut fx.doubled, &v), a);
    }
}

#[test]
fn dimensions_survive_doubling() {
    let c = CurveModel::default_elliptic();
    let cov = Covering::standard(&c).unwrap();
    for r in 1..=2 {
        let tc = TwoTermComplex::connection(&Connection::trivial(&Bundle::trivial(&cov, r)).unwrap());
        let (d1, d2) = bound_stability(&tc, HyperComplex::default_bound(&tc)).unwrap();
        assert_eq!(d1, d2);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn kernel_and_rank(entries in prop::collection::vec(-4i64..=4, 12)) {
        let a = Matrix::from_rows(4, entries.chunks(4).map(|r| r.iter().map(|&v| qi(v)).collect()).collect());
        let k = a.kernel();
        prop_assert_eq!(k.len() + a.rank(), 4);
        for v in &k {
            prop_assert!(a.mul_vec(v).unwrap().iter().all(|x| x.is_zero()));
        }
    }

    #[test]
    fn solutions_solve(entries in prop::collection::vec(-4i64..=4, 12), x in prop::collection::vec(-4i64..=4, 4)) {
        let a = Matrix::from_rows(4, entries.chunks(4).map(|r| r.iter().map(|&v| qi(v)).collect()).collect());
        let x: Vec<Rational> = x.into_iter().map(qi).collect();
        let b = a.mul_vec(&x).unwrap();
        let y = solve(&a, &b).unwrap().expect("consistent by construction");
        prop_assert_eq!(a.mul_vec(&y).unwrap(), b);
    }

    #[test]
    fn quotient_sections_project_back(gens in prop::collection::vec(prop::collection::vec(-3i64..=3, 4), 0..3), c in prop::collection::vec(-3i64..=3, 4)) {
        let div = Subspace::span(4, gens.iter().map(|g| g.iter().map(|&v| qi(v)).collect()).collect());
        let qs = QuotientSpace::new(Subspace::full(4), div.clone()).unwrap();
        let c: Vec<Rational> = c.into_iter().take(qs.dim()).map(qi).collect();
        prop_assert_eq!(qs.project(&qs.sigma(&c).unwrap()).unwrap(), c);
        for b in div.basis() {
            prop_assert!(qs.project(b).unwrap().iter().all(|x| x.is_zero()));
        }
    }

    #[test]
    fn truncated_multiplication_is_associative(a in prop::collection::vec(-3i64..=3, 6), b in prop::collection::vec(-3i64..=3, 6), c in prop::collection::vec(-3i64..=3, 6)) {
        let monos = [vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 3]];
        let poly = |v: &[i64]| TruncatedPoly::from_terms(2, 3, monos.iter().zip(v).map(|(m, &k)| (Mono(m.clone()), qi(k))));
        let (a, b, c) = (poly(&a), poly(&b), poly(&c));
        let l = a.truncated_mul(&b).unwrap().truncated_mul(&c).unwrap();
        let r = a.truncated_mul(&b.truncated_mul(&c).unwrap()).unwrap();
        prop_assert_eq!(&l, &r);
        let d = a.truncated_mul(&b.add(&c).unwrap()).unwrap();
        prop_assert_eq!(d, a.truncated_mul(&b).unwrap().add(&a.truncated_mul(&c).unwrap()).unwrap());
    }
}
