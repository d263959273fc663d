use num_traits::One;

use crate::arith::{Rational, UniPoly};

use super::laurent::EXACT;
use super::{CurveModel, Differential, FFElement, Laurent, Location, PointClass, PointId};

/// Expansions of the coordinate functions at one marked point, computed to a
/// working precision and reused for many elements.
#[derive(Clone, Debug)]
pub struct LocalFrame {
    x: Laurent,
    y: Option<Laurent>,
    dx: Laurent,
    /// series of `x - c` for every support coordinate
    factors: Vec<Laurent>,
    factor_invs: Vec<Laurent>,
}

pub(crate) fn eval_poly(p: &UniPoly, x: &Laurent) -> Laurent {
    let mut acc = Laurent::zero(EXACT);
    for c in p.coeffs().iter().rev() {
        acc = acc.mul(x).add(&Laurent::constant(c.clone(), EXACT));
    }
    acc
}

impl LocalFrame {
    pub(crate) fn new(curve: &CurveModel, p: PointId, w: i64) -> Self {
        let w = w.max(4);
        let (x, y) = match (curve.is_elliptic(), curve.class(p), &curve.point(p).location) {
            (false, PointClass::Infinity, _) => (Laurent::monomial(Rational::one(), -1, w), None),
            (false, _, Location::Finite { x: a, .. }) => (linear(a, w), None),
            (true, PointClass::Ordinary, Location::Finite { x: a, y: Some(b) }) => {
                let x = linear(a, w);
                let c = eval_poly(curve.cubic(), &x);
                let y = c.sqrt_with(b);
                (x, Some(y))
            }
            (true, PointClass::TwoTorsion, Location::Finite { x: e, .. }) => {
                let (h, _) = curve.cubic().div_linear(e);
                let u2 = Laurent::monomial(Rational::one(), 2, w);
                let mut s = Laurent::zero(w);
                let ec = Laurent::constant(e.clone(), w);
                for _ in 0..(w / 2 + 1) {
                    let hv = eval_poly(&h, &ec.add(&s)).truncate(w);
                    s = u2.mul(&hv.inv().expect("h(e) is nonzero")).truncate(w);
                }
                (ec.add(&s), Some(Laurent::monomial(Rational::one(), 1, w)))
            }
            (true, PointClass::Infinity, _) => {
                let lambda = curve.lambda().unwrap().clone();
                let u2 = Laurent::monomial(Rational::one(), 2, w);
                let one = Laurent::constant(Rational::one(), w);
                let a = -(Rational::one() + &lambda);
                let mut v = Laurent::zero(w);
                for _ in 0..(w / 2 + 1) {
                    let inner = one.add(&v.scale(&a)).add(&v.mul(&v).scale(&lambda));
                    v = u2.mul(&inner).truncate(w);
                }
                let x = v.inv().expect("v has valuation 2");
                let y = x.shift(-1);
                (x, Some(y))
            }
            _ => unreachable!("point class and location disagree"),
        };
        let dx = x.derivative();
        let factors: Vec<Laurent> =
            curve.support().iter().map(|c| x.add(&Laurent::constant(-c.clone(), x.precision()))).collect();
        let factor_invs = factors.iter().map(|f| f.inv().expect("x - c is a nonzero series")).collect();
        LocalFrame { x, y, dx, factors, factor_invs }
    }

    pub fn x(&self) -> &Laurent {
        &self.x
    }

    pub fn y(&self) -> Option<&Laurent> {
        self.y.as_ref()
    }

    /// `dx/du` (or `dz/du`).
    pub fn dx(&self) -> &Laurent {
        &self.dx
    }

    pub fn poly(&self, p: &UniPoly) -> Laurent {
        eval_poly(p, &self.x)
    }

    /// Series of `Π (x - c_i)^{-e_i}`.
    pub fn denominator_inverse(&self, den: &[u32]) -> Laurent {
        let mut acc: Option<Laurent> = None;
        for (i, &e) in den.iter().enumerate() {
            for _ in 0..e {
                acc = Some(match acc {
                    None => self.factor_invs[i].clone(),
                    Some(a) => a.mul(&self.factor_invs[i]),
                });
            }
        }
        acc.unwrap_or_else(|| Laurent::constant(Rational::one(), EXACT))
    }

    pub fn factor(&self, i: usize) -> &Laurent {
        &self.factors[i]
    }

    pub fn expand(&self, f: &FFElement) -> Laurent {
        if f.is_zero() {
            return Laurent::zero(EXACT);
        }
        let mut num = self.poly(f.p());
        if !f.q().is_zero() {
            let y = self.y.as_ref().expect("y part on the projective line");
            num = num.add(&self.poly(f.q()).mul(y));
        }
        num.mul(&self.denominator_inverse(f.den()))
    }

    pub fn expand_differential(&self, w: &Differential) -> Laurent {
        self.expand(w.coeff()).mul(&self.dx)
    }
}

fn linear(a: &Rational, w: i64) -> Laurent {
    Laurent::monomial(a.clone(), 0, w).add(&Laurent::monomial(Rational::one(), 1, w))
}
