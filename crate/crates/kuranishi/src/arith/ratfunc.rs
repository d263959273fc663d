use std::fmt;

use num_traits::{One, Zero};

use super::field::Rational;
use super::unipoly::UniPoly;
use super::ArithError;

/// Reduced quotient of univariate polynomials with monic denominator.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatFunc {
    num: UniPoly,
    den: UniPoly,
}

impl RatFunc {
    pub fn new(num: UniPoly, den: UniPoly) -> Result<Self, ArithError> {
        if den.is_zero() {
            return Err(ArithError::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(Self::zero());
        }
        let g = UniPoly::gcd(&num, &den);
        let (n, _) = num.div_rem(&g);
        let (d, _) = den.div_rem(&g);
        let l = d.lead();
        let inv = Rational::one() / l;
        Ok(RatFunc { num: n.scale(&inv), den: d.scale(&inv) })
    }

    pub fn zero() -> Self {
        RatFunc { num: UniPoly::zero(), den: UniPoly::one() }
    }

    pub fn one() -> Self {
        Self::from_poly(UniPoly::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::from_poly(UniPoly::constant(c))
    }

    pub fn from_poly(p: UniPoly) -> Self {
        RatFunc { num: p, den: UniPoly::one() }
    }

    pub fn numer(&self) -> &UniPoly {
        &self.num
    }

    pub fn denom(&self) -> &UniPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn add(&self, o: &RatFunc) -> RatFunc {
        let n = &(&self.num * &o.den) + &(&o.num * &self.den);
        RatFunc::new(n, &self.den * &o.den).expect("nonzero denominators")
    }

    pub fn sub(&self, o: &RatFunc) -> RatFunc {
        let n = &(&self.num * &o.den) - &(&o.num * &self.den);
        RatFunc::new(n, &self.den * &o.den).expect("nonzero denominators")
    }

    pub fn mul(&self, o: &RatFunc) -> RatFunc {
        RatFunc::new(&self.num * &o.num, &self.den * &o.den).expect("nonzero denominators")
    }

    pub fn div(&self, o: &RatFunc) -> Result<RatFunc, ArithError> {
        if o.is_zero() {
            return Err(ArithError::DivisionByZero);
        }
        RatFunc::new(&self.num * &o.den, &self.den * &o.num)
    }

    pub fn neg(&self) -> RatFunc {
        RatFunc { num: -&self.num, den: self.den.clone() }
    }

    pub fn derivative(&self) -> RatFunc {
        let n = &(&self.num.derivative() * &self.den) - &(&self.num * &self.den.derivative());
        RatFunc::new(n, &self.den * &self.den).expect("nonzero denominators")
    }

    pub fn eval(&self, x: &Rational) -> Option<Rational> {
        let d = self.den.eval(x);
        if d.is_zero() {
            None
        } else {
            Some(self.num.eval(x) / d)
        }
    }

    pub fn render(&self, var: &str) -> String {
        if self.den == UniPoly::one() {
            return self.num.render(var);
        }
        format!("({})/({})", self.num.render(var), self.den.render(var))
    }
}

impl fmt::Debug for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render("x"))
    }
}

impl Default for RatFunc {
    fn default() -> Self {
        Self::zero()
    }
}

impl Zero for RatFunc {
    fn zero() -> Self {
        RatFunc::zero()
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

impl std::ops::Add for RatFunc {
    type Output = RatFunc;
    fn add(self, o: RatFunc) -> RatFunc {
        RatFunc::add(&self, &o)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::field::qi;

    fn p(v: &[i64]) -> UniPoly {
        UniPoly::from_coeffs(v.iter().map(|&c| qi(c)).collect())
    }

    #[test]
    fn proportional_pairs_normalize_equal() {
        let a = RatFunc::new(p(&[1, 1]), p(&[0, 2])).unwrap();
        let b = RatFunc::new(p(&[3, 6, 3]), p(&[0, 6, 6])).unwrap();
        assert_eq!(a, b);
        assert!(a.denom().lead().is_one());
    }

    #[test]
    fn derivative_of_inverse() {
        let f = RatFunc::new(p(&[1]), p(&[0, 1])).unwrap();
        let expect = RatFunc::new(p(&[-1]), p(&[0, 0, 1])).unwrap();
        assert_eq!(f.derivative(), expect);
    }
}
