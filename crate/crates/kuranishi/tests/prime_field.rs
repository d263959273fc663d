//! The linear algebra and truncated polynomials run over any `Field`. Here
//! they run over GF(p), where small cases can be checked by enumeration.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use kuranishi::arith::{qi, Field, Mono, TruncatedPoly};
use kuranishi::linalg::{invert, solve, Matrix, QuotientSpace, Subspace};
use kuranishi::Rational;
use num_traits::{One, Zero};
use proptest::prelude::*;

#[derive(Clone, Copy, PartialEq, Eq)]
struct Fp<const P: u64>(u64);

impl<const P: u64> Fp<P> {
    fn new(v: i64) -> Self {
        Fp(v.rem_euclid(P as i64) as u64)
    }

    fn pow(self, mut e: u64) -> Self {
        let (mut b, mut r) = (self, Fp(1));
        while e > 0 {
            if e & 1 == 1 {
                r = r * b;
            }
            b = b * b;
            e >>= 1;
        }
        r
    }
}

impl<const P: u64> fmt::Debug for Fp<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl<const P: u64> Zero for Fp<P> {
    fn zero() -> Self {
        Fp(0)
    }
    fn is_zero(&self) -> bool {
        self.0 == 0
    }
}

impl<const P: u64> One for Fp<P> {
    fn one() -> Self {
        Fp(1 % P)
    }
}

impl<const P: u64> Neg for Fp<P> {
    type Output = Self;
    fn neg(self) -> Self {
        Fp((P - self.0) % P)
    }
}

impl<const P: u64> Add for Fp<P> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Fp((self.0 + o.0) % P)
    }
}

impl<const P: u64> Sub for Fp<P> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Fp((self.0 + P - o.0) % P)
    }
}

impl<const P: u64> Mul for Fp<P> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Fp(((self.0 as u128 * o.0 as u128) % P as u128) as u64)
    }
}

impl<const P: u64> Div for Fp<P> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        assert!(o.0 != 0, "division by zero in GF({P})");
        self * o.pow(P - 2)
    }
}

macro_rules! by_ref {
    ($($tr:ident $m:ident),*) => {$(
        impl<'a, const P: u64> $tr<&'a Fp<P>> for Fp<P> {
            type Output = Fp<P>;
            fn $m(self, o: &'a Fp<P>) -> Fp<P> {
                $tr::$m(self, *o)
            }
        }
    )*};
}
by_ref!(Add add, Sub sub, Mul mul, Div div);

impl<const P: u64> Field for Fp<P> {
    fn render(&self) -> String {
        self.0.to_string()
    }
}

type F5 = Fp<5>;
type Big = Fp<1_000_003>;

fn mat<const P: u64>(cols: usize, v: &[i64]) -> Matrix<Fp<P>> {
    Matrix::from_rows(cols, v.chunks(cols).map(|r| r.iter().map(|&x| Fp::new(x)).collect()).collect())
}

fn qmat(cols: usize, v: &[i64]) -> Matrix<Rational> {
    Matrix::from_rows(cols, v.chunks(cols).map(|r| r.iter().map(|&x| qi(x)).collect()).collect())
}

/// All vectors of GF(5)^n.
fn all_vectors(n: usize) -> Vec<Vec<F5>> {
    (0..5u64.pow(n as u32))
        .map(|mut k| {
            (0..n)
                .map(|_| {
                    let d = k % 5;
                    k /= 5;
                    Fp(d)
                })
                .collect()
        })
        .collect()
}

#[test]
fn singular_over_gf5_regular_over_q() {
    // det = 5
    let q = qmat(2, &[1, 2, -1, 3]);
    assert_eq!(q.rank(), 2);
    let f: Matrix<F5> = mat(2, &[1, 2, -1, 3]);
    assert_eq!(f.rank(), 1);
    let k = f.kernel();
    assert_eq!(k.len(), 1);
    assert!(f.mul_vec(&k[0]).unwrap().iter().all(|v| v.is_zero()));
    assert!(invert(&f).is_none());
    assert!(invert(&q).is_some());
}

#[test]
fn quotient_over_gf5() {
    let full = Subspace::<F5>::full(3);
    let plane = Subspace::span(3, vec![vec![Fp(1), Fp(2), Fp(0)], vec![Fp(0), Fp(1), Fp(4)]]);
    let qs = QuotientSpace::new(full, plane.clone()).unwrap();
    assert_eq!(qs.dim(), 1);
    for v in all_vectors(3) {
        let c = qs.project(&v).unwrap();
        assert_eq!(c[0].is_zero(), plane.contains(&v));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_size_matches_enumeration(entries in prop::collection::vec(0i64..5, 9)) {
        let a: Matrix<F5> = mat(3, &entries);
        let zeros = all_vectors(3).into_iter().filter(|v| a.mul_vec(v).unwrap().iter().all(|x| x.is_zero())).count();
        prop_assert_eq!(zeros, 5usize.pow((3 - a.rank()) as u32));
        let span = Subspace::span(3, a.kernel());
        prop_assert_eq!(span.dim(), 3 - a.rank());
    }

    #[test]
    fn solve_matches_enumeration(entries in prop::collection::vec(0i64..5, 6), b in prop::collection::vec(0i64..5, 2)) {
        let a: Matrix<F5> = mat(3, &entries);
        let b: Vec<F5> = b.into_iter().map(Fp::new).collect();
        let consistent = all_vectors(3).iter().any(|x| a.mul_vec(x).unwrap() == b);
        match solve(&a, &b).unwrap() {
            Some(x) => prop_assert_eq!(a.mul_vec(&x).unwrap(), b),
            None => prop_assert!(!consistent),
        }
    }

    #[test]
    fn reduction_mod_p_never_raises_rank(entries in prop::collection::vec(-20i64..20, 12)) {
        let q = qmat(4, &entries);
        let p: Matrix<Big> = mat(4, &entries);
        prop_assert!(p.rank() <= q.rank());
        let (r, piv) = p.rref();
        prop_assert_eq!(r.rref().1, piv);
    }

    #[test]
    fn truncated_inverse_over_gf_p(c in 1i64..1_000_003, a in -50i64..50, b in -50i64..50) {
        let order = 4;
        let mut f = TruncatedPoly::<Big>::constant(2, order, Fp::new(c));
        f.add_term(Mono(vec![1, 0]), Fp::new(a));
        f.add_term(Mono(vec![1, 1]), Fp::new(b));
        let g = f.truncated_inverse().unwrap();
        prop_assert_eq!(f.truncated_mul(&g).unwrap(), TruncatedPoly::one(2, order));
    }
}
