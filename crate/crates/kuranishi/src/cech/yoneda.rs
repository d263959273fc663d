use crate::arith::Rational;
use crate::bundle::{frame_change, FMat};

use super::{CechError, HyperComplex};

/// The pair `(c^{2,0}, c^{1,1})` in `C²(K⁰) ⊕ C¹(K¹)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct YonedaSquare {
    pub c20: Vec<FMat>,
    pub c11: Vec<FMat>,
}

fn check_cocycle(hc: &HyperComplex, u: &[Rational]) -> Result<(), CechError> {
    if u.len() != hc.ldim(1) {
        return Err(CechError::Shape(1));
    }
    if hc.d(1).mul_vec(u)?.iter().any(|v| !num_traits::Zero::is_zero(v)) {
        return Err(CechError::NotCocycle("first-order datum violates ď(a) = 0, ď(𝒜) = ∇(a)".into()));
    }
    Ok(())
}

/// `c^{1,1}(u, v)_{αβ} = 𝒜^u_α a^v_{αβ} - a^v_{αβ} 𝒜^u_β` and
/// `c^{2,0}(u, v)_{αβγ} = a^u_{αβ} a^v_{βγ} + a^u_{βγ} a^v_{γα} + a^u_{αβ} a^v_{γα}`,
/// every factor taken in the frame of the first chart of the tuple.
pub fn yoneda_bilinear(hc: &HyperComplex, u: &[Rational], v: &[Rational]) -> Result<YonedaSquare, CechError> {
    check_cocycle(hc, u)?;
    check_cocycle(hc, v)?;
    let c0 = hc.c0();
    let spec = hc.k0_spec();
    let (au, yu) = hc.element(1, u);
    let (av, _) = hc.element(1, v);
    // a on an ordered pair, in the frame of its first index
    let a_on = |a: &[FMat], i: usize, j: usize| -> FMat {
        if i < j {
            a[c0.tuple_index(1, &[i, j]).expect("pair")].clone()
        } else {
            let (l, r) = frame_change(spec, j, i);
            l.mul(&a[c0.tuple_index(1, &[j, i]).expect("pair")]).mul(&r).neg()
        }
    };
    let to_frame = |m: &FMat, from: usize, to: usize| -> FMat {
        let (l, r) = frame_change(spec, from, to);
        l.mul(m).mul(&r)
    };
    let mut c20 = Vec::new();
    for t in c0.tuples(2) {
        let (a, b, g) = (t[0], t[1], t[2]);
        let ab_u = a_on(&au, a, b);
        let bg_u = to_frame(&a_on(&au, b, g), b, a);
        let bg_v = to_frame(&a_on(&av, b, g), b, a);
        let ga_v = to_frame(&a_on(&av, g, a), g, a);
        c20.push(ab_u.mul(&bg_v).add(&bg_u.mul(&ga_v)).add(&ab_u.mul(&ga_v)));
    }
    let mut c11 = Vec::new();
    if hc.has_k1() {
        for (s, t) in c0.tuples(1).iter().enumerate() {
            let (a, b) = (t[0], t[1]);
            let x = &av[s];
            let ya = &yu[a];
            let yb = to_frame(&yu[b], b, a);
            c11.push(ya.mul(x).sub(&x.mul(&yb)));
        }
    }
    Ok(YonedaSquare { c20, c11 })
}

pub fn yoneda_square_cocycle(hc: &HyperComplex, u: &[Rational]) -> Result<YonedaSquare, CechError> {
    yoneda_bilinear(hc, u, u)
}
