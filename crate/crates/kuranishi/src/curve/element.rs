use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::arith::{render_rational, push_term, RatFunc, Rational, UniPoly};

use super::{CurveError, CurveModel};

/// Element `(p(x) + q(x) y) / Π (x - c_i)^{e_i}` of the function field, where
/// the `c_i` are the marked finite x-coordinates. On the projective line `q = 0`
/// and `x` is the coordinate `z`. The form is reduced: no factor `x - c_i`
/// divides both `p` and `q` while `e_i > 0`.
#[derive(Clone)]
pub struct FFElement {
    curve: CurveModel,
    p: UniPoly,
    q: UniPoly,
    den: Vec<u32>,
}

fn factor_pow(c: &Rational, e: u32) -> UniPoly {
    UniPoly::linear_root(c).pow(e)
}

/// Write `poly = lead * Π (x - c_i)^{k_i}` over the support coordinates.
pub(crate) fn split_over_support(curve: &CurveModel, poly: &UniPoly) -> Result<(Rational, Vec<u32>), CurveError> {
    if poly.is_zero() {
        return Err(CurveError::DivisionByZero);
    }
    let mut rest = poly.clone();
    let mut ks = vec![0u32; curve.support().len()];
    for (i, c) in curve.support().iter().enumerate() {
        loop {
            if rest.degree() == Some(0) {
                break;
            }
            let (qq, r) = rest.div_linear(c);
            if !r.is_zero() {
                break;
            }
            rest = qq;
            ks[i] += 1;
        }
    }
    if rest.degree() != Some(0) {
        return Err(CurveError::Support(poly.render(curve.coord_name())));
    }
    Ok((rest.lead(), ks))
}

impl FFElement {
    pub(crate) fn zero(curve: &CurveModel) -> Self {
        FFElement { curve: curve.clone(), p: UniPoly::zero(), q: UniPoly::zero(), den: vec![0; curve.support().len()] }
    }

    pub(crate) fn constant(curve: &CurveModel, c: Rational) -> Self {
        FFElement { curve: curve.clone(), p: UniPoly::constant(c), q: UniPoly::zero(), den: vec![0; curve.support().len()] }
    }

    /// Build from numerator parts and support exponents, reducing.
    pub(crate) fn from_parts(curve: &CurveModel, p: UniPoly, q: UniPoly, den: Option<Vec<u32>>) -> Self {
        assert!(curve.is_elliptic() || q.is_zero(), "y part on the projective line");
        let den = den.unwrap_or_else(|| vec![0; curve.support().len()]);
        let mut f = FFElement { curve: curve.clone(), p, q, den };
        f.reduce();
        f
    }

    /// `p(x) + q(x) y` with polynomial parts.
    pub fn from_poly(curve: &CurveModel, p: UniPoly, q: UniPoly) -> Result<Self, CurveError> {
        if !curve.is_elliptic() && !q.is_zero() {
            return Err(CurveError::CurveMismatch);
        }
        Ok(Self::from_parts(curve, p, q, None))
    }

    /// `a(x) + b(x) y`; denominators must split over the marked coordinates.
    pub fn from_ratfuncs(curve: &CurveModel, a: &RatFunc, b: &RatFunc) -> Result<Self, CurveError> {
        if !curve.is_elliptic() && !b.is_zero() {
            return Err(CurveError::CurveMismatch);
        }
        let (la, ka) = split_over_support(curve, a.denom())?;
        let (lb, kb) = split_over_support(curve, b.denom())?;
        let den: Vec<u32> = ka.iter().zip(&kb).map(|(x, y)| *x.max(y)).collect();
        let mut p = a.numer().scale(&(Rational::one() / la));
        let mut q = b.numer().scale(&(Rational::one() / lb));
        for (i, c) in curve.support().iter().enumerate() {
            p = &p * &factor_pow(c, den[i] - ka[i]);
            q = &q * &factor_pow(c, den[i] - kb[i]);
        }
        Ok(Self::from_parts(curve, p, q, Some(den)))
    }

    fn reduce(&mut self) {
        if self.p.is_zero() && self.q.is_zero() {
            self.den.iter_mut().for_each(|e| *e = 0);
            return;
        }
        let support = self.curve.support().to_vec();
        for (i, c) in support.iter().enumerate() {
            while self.den[i] > 0 {
                let (pq, pr) = self.p.div_linear(c);
                if !pr.is_zero() {
                    break;
                }
                let (qq, qr) = self.q.div_linear(c);
                if !qr.is_zero() {
                    break;
                }
                self.p = pq;
                self.q = qq;
                self.den[i] -= 1;
            }
        }
    }

    pub fn curve(&self) -> &CurveModel {
        &self.curve
    }

    /// `(p, q)` when the element is the polynomial `p + q y`.
    pub fn polynomial_parts(&self) -> Option<(UniPoly, UniPoly)> {
        if self.den.iter().all(|&e| e == 0) {
            Some((self.p.clone(), self.q.clone()))
        } else {
            None
        }
    }

    pub(crate) fn p(&self) -> &UniPoly {
        &self.p
    }

    pub(crate) fn q(&self) -> &UniPoly {
        &self.q
    }

    pub(crate) fn den(&self) -> &[u32] {
        &self.den
    }

    pub fn denominator(&self) -> UniPoly {
        let mut d = UniPoly::one();
        for (c, &e) in self.curve.support().iter().zip(&self.den) {
            d = &d * &factor_pow(c, e);
        }
        d
    }

    /// The `a(x)` part of `a + b y`.
    pub fn a(&self) -> RatFunc {
        RatFunc::new(self.p.clone(), self.denominator()).expect("nonzero denominator")
    }

    /// The `b(x)` part of `a + b y`.
    pub fn b(&self) -> RatFunc {
        RatFunc::new(self.q.clone(), self.denominator()).expect("nonzero denominator")
    }

    pub fn is_zero(&self) -> bool {
        self.p.is_zero() && self.q.is_zero()
    }

    pub fn is_constant(&self) -> bool {
        self.q.is_zero() && self.den.iter().all(|&e| e == 0) && self.p.degree().unwrap_or(0) == 0
    }

    pub fn constant_value(&self) -> Option<Rational> {
        if self.is_constant() {
            Some(self.p.coeff(0))
        } else {
            None
        }
    }

    fn check(&self, o: &FFElement) {
        assert!(self.curve == o.curve, "elements of different curves");
    }

    fn lifted(&self, target: &[u32]) -> (UniPoly, UniPoly) {
        let mut p = self.p.clone();
        let mut q = self.q.clone();
        for (i, c) in self.curve.support().iter().enumerate() {
            let d = target[i] - self.den[i];
            if d > 0 {
                let f = factor_pow(c, d);
                p = &p * &f;
                q = &q * &f;
            }
        }
        (p, q)
    }

    pub fn add(&self, o: &FFElement) -> FFElement {
        self.check(o);
        if o.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return o.clone();
        }
        let den: Vec<u32> = self.den.iter().zip(&o.den).map(|(a, b)| *a.max(b)).collect();
        let (p1, q1) = self.lifted(&den);
        let (p2, q2) = o.lifted(&den);
        Self::from_parts(&self.curve, &p1 + &p2, &q1 + &q2, Some(den))
    }

    pub fn neg(&self) -> FFElement {
        FFElement { curve: self.curve.clone(), p: -&self.p, q: -&self.q, den: self.den.clone() }
    }

    pub fn sub(&self, o: &FFElement) -> FFElement {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &FFElement) -> FFElement {
        self.check(o);
        if self.is_zero() || o.is_zero() {
            return Self::zero(&self.curve);
        }
        let mut p = &self.p * &o.p;
        if !self.q.is_zero() && !o.q.is_zero() {
            p = &p + &(&(&self.q * &o.q) * self.curve.cubic());
        }
        let q = &(&self.p * &o.q) + &(&self.q * &o.p);
        let den = self.den.iter().zip(&o.den).map(|(a, b)| a + b).collect();
        Self::from_parts(&self.curve, p, q, Some(den))
    }

    pub fn scale(&self, c: &Rational) -> FFElement {
        if c.is_zero() {
            return Self::zero(&self.curve);
        }
        FFElement { curve: self.curve.clone(), p: self.p.scale(c), q: self.q.scale(c), den: self.den.clone() }
    }

    /// `p^2 - q^2 · cubic`, the norm of the numerator.
    fn numerator_norm(&self) -> UniPoly {
        let pp = &self.p * &self.p;
        if self.q.is_zero() {
            return pp;
        }
        &pp - &(&(&self.q * &self.q) * self.curve.cubic())
    }

    pub fn inv(&self) -> Result<FFElement, CurveError> {
        if self.is_zero() {
            return Err(CurveError::DivisionByZero);
        }
        let n = self.numerator_norm();
        let (lead, ks) = split_over_support(&self.curve, &n)?;
        let d = self.denominator().scale(&(Rational::one() / lead));
        let p = &self.p * &d;
        let q = -&(&self.q * &d);
        Ok(Self::from_parts(&self.curve, p, q, Some(ks)))
    }

    pub fn div(&self, o: &FFElement) -> Result<FFElement, CurveError> {
        Ok(self.mul(&o.inv()?))
    }

    pub fn pow(&self, e: i64) -> Result<FFElement, CurveError> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut acc = Self::constant(&self.curve, Rational::one());
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul(&base);
        }
        Ok(acc)
    }

    /// Exterior derivative, as a coefficient of `dx` (or `dz`).
    pub fn exterior_d(&self) -> Differential {
        let curve = &self.curve;
        if self.is_zero() {
            return Differential::zero(curve);
        }
        // d(P/D) = P'/D - Σ e_i P / ((x - c_i) D), with P = p + q y and
        // dy = c'/(2y) dx = c' y / (2c) dx.
        let mut acc = Self::from_parts(curve, self.p.derivative(), self.q.derivative(), Some(self.den.clone()));
        for (i, &e) in self.den.iter().enumerate() {
            if e == 0 {
                continue;
            }
            let mut den = self.den.clone();
            den[i] += 1;
            let er = Rational::from_integer(e.into());
            let t = Self::from_parts(curve, self.p.scale(&er), self.q.scale(&er), Some(den));
            acc = acc.sub(&t);
        }
        if !self.q.is_zero() {
            let half = Rational::new(1.into(), 2.into());
            let num = (&self.q * &curve.cubic().derivative()).scale(&half);
            let mut den = self.den.clone();
            for r in [Rational::zero(), Rational::one(), curve.lambda().unwrap().clone()] {
                let i = curve.support().iter().position(|c| c == &r).expect("2-torsion points are marked");
                den[i] += 1;
            }
            acc = acc.add(&Self::from_parts(curve, UniPoly::zero(), num, Some(den)));
        }
        Differential::new(acc)
    }

    /// Canonical text: `N` or `(N)/(D)` with `D` a product of marked factors.
    pub fn render(&self) -> String {
        let v = self.curve.coord_name();
        let mut num = String::new();
        let mut terms: Vec<(&Rational, String)> = Vec::new();
        for (k, c) in self.p.coeffs().iter().enumerate() {
            terms.push((c, mono(v, k, false)));
        }
        for (k, c) in self.q.coeffs().iter().enumerate() {
            terms.push((c, mono(v, k, true)));
        }
        for (c, m) in terms {
            if !c.is_zero() {
                push_term(&mut num, c, &m);
            }
        }
        if num.is_empty() {
            return "0".to_string();
        }
        let mut den = Vec::new();
        for (c, &e) in self.curve.support().iter().zip(&self.den) {
            if e == 0 {
                continue;
            }
            let base = if c.is_zero() {
                v.to_string()
            } else if c > &Rational::zero() {
                format!("({v} - {})", render_rational(c))
            } else {
                format!("({v} + {})", render_rational(&-c.clone()))
            };
            den.push(if e == 1 { base } else { format!("{base}^{e}") });
        }
        if den.is_empty() {
            return num;
        }
        let wrapped = if num.contains(' ') || num.starts_with('-') { format!("({num})") } else { num };
        let d = den.join("*");
        let d = if den.len() > 1 { format!("({d})") } else { d };
        format!("{wrapped}/{d}")
    }
}

fn mono(v: &str, k: usize, with_y: bool) -> String {
    let xs = match k {
        0 => String::new(),
        1 => v.to_string(),
        _ => format!("{v}^{k}"),
    };
    match (with_y, xs.is_empty()) {
        (false, _) => xs,
        (true, true) => "y".to_string(),
        (true, false) => format!("{xs}*y"),
    }
}

impl PartialEq for FFElement {
    fn eq(&self, o: &Self) -> bool {
        self.p == o.p && self.q == o.q && self.den == o.den
    }
}

impl Eq for FFElement {}

impl Hash for FFElement {
    fn hash<H: Hasher>(&self, h: &mut H) {
        self.p.hash(h);
        self.q.hash(h);
        self.den.hash(h);
    }
}

impl fmt::Debug for FFElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

impl<'a> Add<&'a FFElement> for &'a FFElement {
    type Output = FFElement;
    fn add(self, o: &FFElement) -> FFElement {
        FFElement::add(self, o)
    }
}

impl<'a> Sub<&'a FFElement> for &'a FFElement {
    type Output = FFElement;
    fn sub(self, o: &FFElement) -> FFElement {
        FFElement::sub(self, o)
    }
}

impl<'a> Mul<&'a FFElement> for &'a FFElement {
    type Output = FFElement;
    fn mul(self, o: &FFElement) -> FFElement {
        FFElement::mul(self, o)
    }
}

impl Neg for &FFElement {
    type Output = FFElement;
    fn neg(self) -> FFElement {
        FFElement::neg(self)
    }
}

/// `c · dx` on the elliptic curve, `c · dz` on the line.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Differential {
    coeff: FFElement,
}

impl Differential {
    pub fn new(coeff: FFElement) -> Self {
        Differential { coeff }
    }

    pub fn zero(curve: &CurveModel) -> Self {
        Differential { coeff: FFElement::zero(curve) }
    }

    /// `dx/y` on the elliptic curve, `dz` on the line.
    pub fn base(curve: &CurveModel) -> Self {
        if curve.is_elliptic() {
            Differential { coeff: curve.y().inv().expect("y is invertible") }
        } else {
            Differential { coeff: curve.one() }
        }
    }

    pub fn coeff(&self) -> &FFElement {
        &self.coeff
    }

    pub fn curve(&self) -> &CurveModel {
        self.coeff.curve()
    }

    pub fn is_zero(&self) -> bool {
        self.coeff.is_zero()
    }

    pub fn add(&self, o: &Differential) -> Differential {
        Differential { coeff: self.coeff.add(&o.coeff) }
    }

    pub fn sub(&self, o: &Differential) -> Differential {
        Differential { coeff: self.coeff.sub(&o.coeff) }
    }

    pub fn neg(&self) -> Differential {
        Differential { coeff: self.coeff.neg() }
    }

    pub fn scale(&self, c: &Rational) -> Differential {
        Differential { coeff: self.coeff.scale(c) }
    }

    /// `f · ω`.
    pub fn mul_fn(&self, f: &FFElement) -> Differential {
        Differential { coeff: self.coeff.mul(f) }
    }

    /// `ω / η` as a function.
    pub fn ratio(&self, o: &Differential) -> Result<FFElement, CurveError> {
        self.coeff.div(&o.coeff)
    }

    pub fn render(&self) -> String {
        let c = self.coeff.render();
        let d = if self.curve().is_elliptic() { "dx" } else { "dz" };
        if c == "0" {
            return "0".to_string();
        }
        if c == "1" {
            return d.to_string();
        }
        format!("({c})*{d}")
    }
}

impl fmt::Debug for Differential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}
