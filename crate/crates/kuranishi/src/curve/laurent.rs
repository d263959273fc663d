use num_traits::{One, Zero};

use crate::arith::Rational;

/// Precision used for series that are exact (constants, polynomials in `u`).
pub const EXACT: i64 = 1 << 40;

/// Truncated Laurent series `Σ c_k u^k`, known exactly for exponents below `prec`.
///
/// Coefficients are stored from the leading exponent up to the last nonzero
/// one; later coefficients below `prec` are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Laurent {
    val: i64,
    coeffs: Vec<Rational>,
    prec: i64,
}

impl Laurent {
    /// Zero known up to (excluding) `u^prec`.
    pub fn zero(prec: i64) -> Self {
        Laurent { val: prec, coeffs: Vec::new(), prec }
    }

    pub fn monomial(c: Rational, k: i64, prec: i64) -> Self {
        if k >= prec || c.is_zero() {
            return Self::zero(prec);
        }
        Laurent { val: k, coeffs: vec![c], prec }
    }

    pub fn constant(c: Rational, prec: i64) -> Self {
        Self::monomial(c, 0, prec)
    }

    /// Series from coefficients of `u^start, u^{start+1}, …` with the given precision.
    pub fn from_coeffs(start: i64, coeffs: Vec<Rational>, prec: i64) -> Self {
        Self::normalized(start, coeffs, prec)
    }

    fn normalized(mut val: i64, mut coeffs: Vec<Rational>, prec: i64) -> Self {
        let Some(k) = coeffs.iter().position(|c| !c.is_zero()) else {
            return Self::zero(prec);
        };
        coeffs.drain(..k);
        val += k as i64;
        if val >= prec {
            return Self::zero(prec);
        }
        coeffs.truncate((prec - val) as usize);
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Laurent { val, coeffs, prec }
    }

    pub fn precision(&self) -> i64 {
        self.prec
    }

    /// Leading exponent, or `None` when the series is zero to its precision.
    pub fn valuation(&self) -> Option<i64> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.val)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of `u^k`; `None` beyond the precision.
    pub fn coeff(&self, k: i64) -> Option<Rational> {
        if k >= self.prec {
            return None;
        }
        if k < self.val {
            return Some(Rational::zero());
        }
        Some(self.coeffs.get((k - self.val) as usize).cloned().unwrap_or_else(Rational::zero))
    }

    pub fn lead(&self) -> Option<&Rational> {
        self.coeffs.first()
    }

    /// Coefficients of `u^from ..= u^to`; panics if `to` is beyond precision.
    pub fn coeffs_range(&self, from: i64, to: i64) -> Vec<Rational> {
        assert!(to < self.prec, "series precision {} too low for u^{}", self.prec, to);
        (from..=to).map(|k| self.coeff(k).unwrap()).collect()
    }

    pub fn truncate(&self, prec: i64) -> Self {
        let p = prec.min(self.prec);
        Self::normalized(self.val, self.coeffs.clone(), p)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(self.prec);
        }
        Laurent { val: self.val, coeffs: self.coeffs.iter().map(|a| a * c).collect(), prec: self.prec }
    }

    /// Multiply by `u^k`.
    pub fn shift(&self, k: i64) -> Self {
        Laurent { val: self.val + k, coeffs: self.coeffs.clone(), prec: self.prec + k }
    }

    pub fn add(&self, o: &Laurent) -> Self {
        let prec = self.prec.min(o.prec);
        if self.is_zero() {
            return o.truncate(prec);
        }
        if o.is_zero() {
            return self.truncate(prec);
        }
        let start = self.val.min(o.val);
        let end = (self.val + self.coeffs.len() as i64).max(o.val + o.coeffs.len() as i64).min(prec);
        if end <= start {
            return Self::zero(prec);
        }
        let mut c = vec![Rational::zero(); (end - start) as usize];
        for s in [self, o] {
            for (i, a) in s.coeffs.iter().enumerate() {
                let k = s.val + i as i64;
                if k >= end {
                    break;
                }
                c[(k - start) as usize] += a;
            }
        }
        Self::normalized(start, c, prec)
    }

    pub fn neg(&self) -> Self {
        Laurent { val: self.val, coeffs: self.coeffs.iter().map(|a| -a.clone()).collect(), prec: self.prec }
    }

    pub fn sub(&self, o: &Laurent) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Laurent) -> Self {
        match (self.valuation(), o.valuation()) {
            (None, None) => return Self::zero(self.prec.saturating_add(o.prec).min(EXACT)),
            (None, Some(v)) => return Self::zero(self.prec + v),
            (Some(v), None) => return Self::zero(o.prec + v),
            _ => {}
        }
        let val = self.val + o.val;
        let prec = (self.prec + o.val).min(o.prec + self.val);
        let n = ((prec - val) as usize).min(self.coeffs.len() + o.coeffs.len() - 1);
        let mut c = vec![Rational::zero(); n];
        for (i, a) in self.coeffs.iter().enumerate().take(n) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate().take(n - i) {
                if !b.is_zero() {
                    c[i + j] += a * b;
                }
            }
        }
        Self::normalized(val, c, prec)
    }

    /// Multiplicative inverse; `None` when the series is zero to its precision.
    pub fn inv(&self) -> Option<Self> {
        let a0 = self.lead()?.clone();
        let n = (self.prec - self.val) as usize;
        assert!(n < 1 << 20, "inverse of an exact series needs a finite precision");
        let inv0 = Rational::one() / &a0;
        let mut b = vec![Rational::zero(); n];
        b[0] = inv0.clone();
        for k in 1..n {
            let mut s = Rational::zero();
            for j in 1..=k.min(self.coeffs.len() - 1) {
                let a = &self.coeffs[j];
                if !a.is_zero() {
                    s += a * &b[k - j];
                }
            }
            b[k] = -(s * &inv0);
        }
        let val = -self.val;
        Some(Self::normalized(val, b, val + n as i64))
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Laurent::constant(Rational::one(), EXACT);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Formal derivative in `u`.
    pub fn derivative(&self) -> Self {
        let c: Vec<Rational> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, a)| a * Rational::from_integer((self.val + i as i64).into()))
            .collect();
        Self::normalized(self.val - 1, c, self.prec - 1)
    }

    /// Square root of a unit series whose constant term is `root0^2`; the
    /// result has constant term `root0`.
    pub fn sqrt_with(&self, root0: &Rational) -> Self {
        assert_eq!(self.valuation(), Some(0), "square root needs a unit series");
        let n = self.prec as usize;
        assert!(n < 1 << 20, "square root of an exact series needs a finite precision");
        let mut y = vec![Rational::zero(); n];
        y[0] = root0.clone();
        let two_y0 = root0 * Rational::from_integer(2.into());
        for k in 1..n {
            let mut s = self.coeff(k as i64).unwrap();
            for i in 1..k {
                s -= &y[i] * &y[k - i];
            }
            y[k] = s / &two_y0;
        }
        Self::normalized(0, y, n as i64)
    }

    pub fn render(&self, var: &str) -> String {
        let mut out = String::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let k = self.val + i as i64;
            let m = match k {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{k}"),
            };
            crate::arith::push_term(&mut out, c, &m);
        }
        if out.is_empty() {
            out.push('0');
        }
        if self.prec < EXACT / 2 {
            out.push_str(&format!(" + O({var}^{})", self.prec));
        }
        out
    }
}
