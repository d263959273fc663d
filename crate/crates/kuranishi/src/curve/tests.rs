use super::*;
use crate::arith::{q, qi};

fn ell() -> CurveModel {
    CurveModel::default_elliptic()
}

fn xy(c: &CurveModel) -> (FFElement, FFElement) {
    (c.coord(), c.y())
}

#[test]
fn y_squared_reduces_to_cubic() {
    let c = ell();
    let (x, y) = xy(&c);
    let cubic = &(&(&x * &x) * &x) - &(&(&x * &x).scale(&qi(3)) - &x.scale(&qi(2)));
    assert_eq!(&y * &y, cubic);
}

#[test]
fn square_of_y_over_x() {
    let c = ell();
    let (x, y) = xy(&c);
    let f = y.div(&x).unwrap();
    let expect = (&(&x - &c.one()) * &(&x - &c.constant(qi(2)))).div(&x).unwrap();
    assert_eq!(&f * &f, expect);
    assert_eq!(f.render(), "y/x");
    assert_eq!(&f * &f.inv().unwrap(), c.one());
}

#[test]
fn valuations_at_origin_and_infinity() {
    let c = ell();
    let (x, y) = xy(&c);
    let o = c.find("p0").unwrap();
    let inf = c.infinity();
    let f = y.div(&x).unwrap();
    assert_eq!(c.valuation(&f, o).unwrap(), -1);
    assert_eq!(c.valuation(&f, inf).unwrap(), -1);
    assert_eq!(c.valuation(&x, inf).unwrap(), -2);
    assert_eq!(c.valuation(&y, inf).unwrap(), -3);
    assert_eq!(c.valuation(&x, o).unwrap(), 2);
    assert!(c.valuation(&c.zero(), o).is_err());
}

#[test]
fn x_at_origin_leading_coefficient() {
    let c = ell();
    let s = c.local_expansion(&c.coord(), c.find("p0").unwrap(), 4);
    assert_eq!(s.coeff(2), Some(q(1, 2)));
    assert_eq!(s.valuation(), Some(2));
}

#[test]
fn line_coordinate_expansion() {
    let c = CurveModel::projective_line(vec![MarkedPoint::line("o", qi(0))]).unwrap();
    let s = c.local_expansion(&c.coord(), c.find("o").unwrap(), 3);
    assert_eq!(s.coeffs_range(0, 3), vec![qi(0), qi(1), qi(0), qi(0)]);
}

#[test]
fn dy_over_x_splitting() {
    let c = ell();
    let (x, y) = xy(&c);
    let dx = Differential::new(c.one());
    let dy = y.exterior_d();
    let x2 = &x * &x;
    let w_plus = dy.mul_fn(&x.inv().unwrap()).scale(&qi(2)).sub(&dx.mul_fn(&y.div(&x2).unwrap()));
    let w_minus = dy.mul_fn(&x.inv().unwrap());
    let df = y.div(&x).unwrap().exterior_d();
    assert_eq!(df, w_plus.sub(&w_minus));
}

#[test]
fn residues() {
    let c = CurveModel::projective_line(vec![MarkedPoint::line("o", qi(0))]).unwrap();
    let w = Differential::new(c.coord().inv().unwrap());
    assert_eq!(c.residue(&w, c.find("o").unwrap()), qi(1));
    assert_eq!(c.residue(&w, c.infinity()), qi(-1));
    let e = ell();
    let inv = Differential::base(&e);
    assert_eq!(e.residue(&inv, e.infinity()), qi(0));
    for p in e.point_ids() {
        assert_eq!(e.differential_valuation(&inv, p).unwrap(), 0);
    }
}

#[test]
fn auto_marking_and_support_errors() {
    let bad = CurveModel::legendre(qi(2), vec![MarkedPoint::affine("P", qi(-1), qi(1))]);
    assert!(matches!(bad, Err(CurveError::NotOnCurve(_))));
    let c = CurveModel::legendre(qi(-3), vec![MarkedPoint::affine("P", qi(-1), qi(2))]).unwrap();
    let labels: Vec<&str> = c.points().iter().map(|p| p.label.as_str()).collect();
    assert_eq!(labels, vec!["P", "p0", "inf", "p1", "plam", "P'"]);
    let (x, y) = xy(&c);
    let p = c.find("P").unwrap();
    let pc = c.find("P'").unwrap();
    let f = &y - &c.constant(qi(2));
    assert_eq!(c.valuation(&f, p).unwrap(), 1);
    assert_eq!(c.valuation(&f, pc).unwrap(), 0);
    let g = &x - &c.constant(qi(-1));
    assert_eq!(c.valuation(&g, p).unwrap(), 1);
    assert_eq!(c.valuation(&g, pc).unwrap(), 1);
    // x - 5 vanishes at unmarked points
    assert!(matches!((&x - &c.constant(qi(5))).inv(), Err(CurveError::Support(_))));
}
