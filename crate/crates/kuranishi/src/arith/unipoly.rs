use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::field::{render_rational, Rational};

/// Dense univariate polynomial over Q, lowest degree first, no trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct UniPoly {
    coeffs: Vec<Rational>,
}

impl UniPoly {
    pub fn zero() -> Self {
        UniPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::from_coeffs(vec![c])
    }

    /// The monomial `c * x^k`.
    pub fn monomial(c: Rational, k: usize) -> Self {
        let mut v = vec![Rational::zero(); k + 1];
        v[k] = c;
        Self::from_coeffs(v)
    }

    pub fn x() -> Self {
        Self::monomial(Rational::one(), 1)
    }

    /// `x - a`
    pub fn linear_root(a: &Rational) -> Self {
        Self::from_coeffs(vec![-a.clone(), Rational::one()])
    }

    pub fn from_coeffs(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Rational {
        self.coeffs.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lead(&self) -> Rational {
        self.coeffs.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        UniPoly { coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    /// Multiply by `x^k`.
    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut v = vec![Rational::zero(); k];
        v.extend(self.coeffs.iter().cloned());
        UniPoly { coeffs: v }
    }

    pub fn derivative(&self) -> Self {
        let v = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * Rational::from_integer((i as i64).into()))
            .collect();
        Self::from_coeffs(v)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let l = self.lead();
        UniPoly { coeffs: self.coeffs.iter().map(|c| c / &l).collect() }
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, d: &UniPoly) -> (UniPoly, UniPoly) {
        assert!(!d.is_zero(), "polynomial division by zero");
        let dd = d.degree().unwrap();
        let mut r = self.coeffs.clone();
        if r.len() < d.coeffs.len() {
            return (Self::zero(), self.clone());
        }
        let l = d.lead();
        let mut quo = vec![Rational::zero(); r.len() - dd];
        for k in (0..quo.len()).rev() {
            let c = &r[k + dd] / &l;
            if !c.is_zero() {
                for (j, dc) in d.coeffs.iter().enumerate() {
                    let t = &c * dc;
                    r[k + j] -= t;
                }
            }
            quo[k] = c;
        }
        r.truncate(dd);
        (Self::from_coeffs(quo), Self::from_coeffs(r))
    }

    /// Division by `x - a` (synthetic). Returns quotient and remainder p(a).
    pub fn div_linear(&self, a: &Rational) -> (UniPoly, Rational) {
        if self.is_zero() {
            return (Self::zero(), Rational::zero());
        }
        let n = self.coeffs.len();
        let mut quo = vec![Rational::zero(); n - 1];
        let mut carry = Rational::zero();
        for k in (0..n).rev() {
            let v = &self.coeffs[k] + &carry * a;
            if k == 0 {
                carry = v;
            } else {
                quo[k - 1] = v.clone();
                carry = v;
            }
        }
        (Self::from_coeffs(quo), carry)
    }

    /// Monic gcd.
    pub fn gcd(a: &UniPoly, b: &UniPoly) -> UniPoly {
        let mut x = a.clone();
        let mut y = b.clone();
        while !y.is_zero() {
            let (_, r) = x.div_rem(&y);
            x = y;
            y = r.monic();
        }
        x.monic()
    }

    pub fn render(&self, var: &str) -> String {
        let mut out = String::new();
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            push_term(&mut out, c, &mono_text(var, k));
        }
        if out.is_empty() {
            "0".to_string()
        } else {
            out
        }
    }
}

fn mono_text(var: &str, k: usize) -> String {
    match k {
        0 => String::new(),
        1 => var.to_string(),
        _ => format!("{var}^{k}"),
    }
}

/// Append `c*m` to a sum with explicit signs; `m` empty means a constant.
pub(crate) fn push_term(out: &mut String, c: &Rational, m: &str) {
    let neg = c < &Rational::zero();
    let abs = if neg { -c.clone() } else { c.clone() };
    if out.is_empty() {
        if neg {
            out.push('-');
        }
    } else if neg {
        out.push_str(" - ");
    } else {
        out.push_str(" + ");
    }
    if m.is_empty() {
        out.push_str(&render_rational(&abs));
    } else if abs.is_one() {
        out.push_str(m);
    } else {
        out.push_str(&render_rational(&abs));
        out.push('*');
        out.push_str(m);
    }
}

impl fmt::Debug for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render("x"))
    }
}

impl<'a> Add<&'a UniPoly> for &'a UniPoly {
    type Output = UniPoly;
    fn add(self, o: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        let v = (0..n)
            .map(|i| match (self.coeffs.get(i), o.coeffs.get(i)) {
                (Some(a), Some(b)) => a + b,
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => unreachable!(),
            })
            .collect();
        UniPoly::from_coeffs(v)
    }
}

impl<'a> Sub<&'a UniPoly> for &'a UniPoly {
    type Output = UniPoly;
    fn sub(self, o: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        let v = (0..n)
            .map(|i| match (self.coeffs.get(i), o.coeffs.get(i)) {
                (Some(a), Some(b)) => a - b,
                (Some(a), None) => a.clone(),
                (None, Some(b)) => -b.clone(),
                (None, None) => unreachable!(),
            })
            .collect();
        UniPoly::from_coeffs(v)
    }
}

impl<'a> Mul<&'a UniPoly> for &'a UniPoly {
    type Output = UniPoly;
    fn mul(self, o: &UniPoly) -> UniPoly {
        if self.is_zero() || o.is_zero() {
            return UniPoly::zero();
        }
        let mut v = vec![Rational::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    v[i + j] += a * b;
                }
            }
        }
        UniPoly::from_coeffs(v)
    }
}

impl Neg for &UniPoly {
    type Output = UniPoly;
    fn neg(self) -> UniPoly {
        UniPoly { coeffs: self.coeffs.iter().map(|c| -c.clone()).collect() }
    }
}

impl Add for UniPoly {
    type Output = UniPoly;
    fn add(self, o: UniPoly) -> UniPoly {
        &self + &o
    }
}

impl Sub for UniPoly {
    type Output = UniPoly;
    fn sub(self, o: UniPoly) -> UniPoly {
        &self - &o
    }
}

impl Mul for UniPoly {
    type Output = UniPoly;
    fn mul(self, o: UniPoly) -> UniPoly {
        &self * &o
    }
}

impl Neg for UniPoly {
    type Output = UniPoly;
    fn neg(self) -> UniPoly {
        -&self
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
    fn div_rem_reconstructs() {
        let a = p(&[1, -3, 0, 2, 5]);
        let d = p(&[2, 1, 3]);
        let (qq, r) = a.div_rem(&d);
        assert_eq!(&(&qq * &d) + &r, a);
        assert!(r.degree().unwrap_or(0) < 2);
    }

    #[test]
    fn gcd_of_shared_factor() {
        let f = p(&[-1, 1]); // x - 1
        let a = &f * &p(&[2, 0, 1]);
        let b = &f * &p(&[3, 1]);
        assert_eq!(UniPoly::gcd(&a, &b), f);
    }

    #[test]
    fn synthetic_division_matches_long_division() {
        let a = p(&[4, 0, -1, 7]);
        let (qq, r) = a.div_linear(&qi(2));
        let (q2, r2) = a.div_rem(&UniPoly::linear_root(&qi(2)));
        assert_eq!(qq, q2);
        assert_eq!(UniPoly::constant(r.clone()), r2);
        assert_eq!(r, a.eval(&qi(2)));
    }

    #[test]
    fn render_has_explicit_signs() {
        assert_eq!(p(&[0, 2, -3]).render("x"), "2*x - 3*x^2");
        assert_eq!(p(&[-1, 0, 1]).render("z"), "-1 + z^2");
    }
}
