//! Task runners. Each returns named result sections, a verification table
//! and canonical summary lines.

use std::collections::BTreeMap;

use kuranishi::arith::{render_rational, Mono, Rational};
use kuranishi::bundle::{atiyah_class, degree, family_atiyah_class, restriction_map, Bundle, FMat, FamilyBundle, PMat, SheafSpec, Twist};
use kuranishi::cech::{bound_stability, CechComplex, CechError, Classes, HyperComplex, HyperDims, TwoTermComplex};
use kuranishi::curve::{CurveModel, Differential, FFElement};
use kuranishi::kuranishi::{classify_first_order, first_obstruction, kuranishi, validate_first_order, DeformationProblem, FirstOrderDatum, KuranishiError, KuranishiResult};
use kuranishi::parabolic::{self, build_b_complex, build_g_complex, degree_residue_identity, is_stable, moduli_dimension, par_deg, parabolic_kuranishi, ParabolicError};
use kuranishi::report::Report;
use kuranishi::sections::{default_bound, PoleProfile};
use serde_json::{json, Value};

use crate::scenario::{Parabolic, Scenario, Task};

/// Default order of the Kuranishi induction.
pub const DEFAULT_ORDER: u32 = 4;

/// Degree bound of the line subsheaves enumerated by the stability test.
const STABILITY_BOUND: i64 = 3;

#[derive(Debug, Clone, thiserror::Error)]
pub enum TaskError {
    #[error("scenario does not support this task: {0}")]
    Unsupported(String),
    #[error("{0}")]
    Engine(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl From<KuranishiError> for TaskError {
    fn from(e: KuranishiError) -> Self {
        match e {
            KuranishiError::Internal(m) => TaskError::Internal(m),
            KuranishiError::Cech(CechError::Internal(m)) => TaskError::Internal(m),
            e => TaskError::Engine(e.to_string()),
        }
    }
}

impl From<CechError> for TaskError {
    fn from(e: CechError) -> Self {
        match e {
            CechError::Internal(m) => TaskError::Internal(m),
            e => TaskError::Engine(e.to_string()),
        }
    }
}

impl From<ParabolicError> for TaskError {
    fn from(e: ParabolicError) -> Self {
        match e {
            ParabolicError::Kuranishi(k) => k.into(),
            ParabolicError::Cech(c) => c.into(),
            e => TaskError::Engine(e.to_string()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Options {
    pub order: u32,
    pub pole_bound: Option<i64>,
    pub emit_family: bool,
}

#[derive(Debug, Default)]
pub struct Outcome {
    pub sections: BTreeMap<String, Value>,
    pub verification: Report,
    pub summary: Vec<String>,
}

impl Outcome {
    fn section(&mut self, name: &str, v: Value) {
        self.sections.insert(name.to_string(), v);
    }
}

pub fn run(sc: &Scenario, task: &Task, opts: &Options) -> Result<Outcome, TaskError> {
    let mut out = Outcome::default();
    match task {
        Task::Cohomology => cohomology(sc, opts, &mut out)?,
        Task::Atiyah => atiyah(sc, &mut out)?,
        Task::FirstOrder => first_order(sc, opts, &mut out)?,
        Task::Obstruction => obstruction(sc, opts, &mut out)?,
        Task::Kuranishi => kuranishi_task(sc, opts, &mut out)?,
        Task::PaperExample => paper_example(sc, &mut out)?,
    }
    Ok(out)
}

fn rq(r: &Rational) -> String {
    render_rational(r)
}

fn rqs(v: &[Rational]) -> Vec<String> {
    v.iter().map(rq).collect()
}

fn dims_json(d: &HyperDims) -> Value {
    json!({"h0": d.h0, "h1": d.h1, "h2": d.h2, "w_prime": d.w_prime, "w_second": d.w_second, "k0": d.k0, "k1": d.k1})
}

fn complex_of(sc: &Scenario) -> Option<TwoTermComplex> {
    sc.connection.as_ref().map(TwoTermComplex::connection)
}

fn bound_for(sc: &Scenario, opts: &Options, profile: &PoleProfile) -> i64 {
    opts.pole_bound.or(sc.pole_bound).unwrap_or_else(|| default_bound(&sc.curve, profile))
}

/// Exactness bookkeeping of `H⁰(K⁰) -> H⁰(K¹) -> ℍ¹ -> H¹(K⁰) -> H¹(K¹) -> ℍ²`
/// for dimensions computed sheaf by sheaf.
fn long_exact_checks(d: &HyperDims, r: &mut Report) {
    r.push("ℍ⁰ ⊂ H⁰(K⁰)", d.h0 <= d.k0[0], format!("{} ≤ {}", d.h0, d.k0[0]));
    r.push("W′ is a quotient of H⁰(K¹)", d.w_prime <= d.k1[0] && d.k0[0] - d.h0 == d.k1[0] - d.w_prime, format!("rank of H⁰∇ = {} = {}", d.k0[0] - d.h0, d.k1[0] - d.w_prime));
    r.push("W″ ⊂ H¹(K⁰)", d.w_second <= d.k0[1], format!("{} ≤ {}", d.w_second, d.k0[1]));
    r.push("ℍ² is a quotient of H¹(K¹)", d.h2 <= d.k1[1] && d.k0[1] - d.w_second == d.k1[1] - d.h2, format!("rank of H¹∇ = {} = {}", d.k0[1] - d.w_second, d.k1[1] - d.h2));
    r.push("dim ℍ¹ = dim W′ + dim W″", d.h1 == d.w_prime + d.w_second, format!("{} = {} + {}", d.h1, d.w_prime, d.w_second));
}

fn cohomology(sc: &Scenario, opts: &Options, out: &mut Outcome) -> Result<(), TaskError> {
    let f = sc.bundle.frames();
    let n = bound_for(sc, opts, &PoleProfile::empty());
    let end = CechComplex::build(&SheafSpec::end(f, Twist::None), n)?;
    let de = end.dims();
    out.section("end", json!({"bound": n, "h0": de[0], "h1": de[1]}));
    out.summary.push(format!("h⁰(End E) = {}, h¹(End E) = {}", de[0], de[1]));
    if sc.bundle.rank() == 1 && degree(&sc.bundle) == 0 && sc.family.is_none() {
        let id = FMat::identity(&sc.curve, 1);
        if sc.covering.tuples(1).iter().all(|t| sc.bundle.transition(t[0], t[1]) == id) {
            out.summary.push(format!("h¹(O) = {}", de[1]));
        }
    }
    out.verification.push("H² of End E vanishes on a curve", de[2] == 0, "");
    if let Some(tc) = complex_of(sc) {
        let conn = sc.connection.as_ref().expect("connection");
        let n = bound_for(sc, opts, conn.divisor());
        let hc = HyperComplex::build(&tc, n)?;
        let d = hc.dims();
        out.section("hyper", json!({"bound": n, "dims": dims_json(&d)}));
        out.summary.push(format!("dim ℍ⁰ = {}, dim ℍ¹ = {} (W′ {} + W″ {}), dim ℍ² = {}", d.h0, d.h1, d.w_prime, d.w_second, d.h2));
        out.verification.extend(hc.check());
        long_exact_checks(&d, &mut out.verification);
        let (a, b) = bound_stability(&tc, n)?;
        out.verification.push("dimensions unchanged when the pole bound doubles", a == b, format!("bounds {n} and {}", 2 * n));
        if !conn.divisor().orders().is_empty() && conn.divisor().max_order() == 1 {
            out.verification.extend(degree_residue_identity(conn));
        }
    }
    match &sc.parabolic {
        Some(Parabolic::Connection(pc)) => {
            out.verification.extend(parabolic::validate_parabolic(pc));
            let tc = build_g_complex(pc);
            let n = bound_for(sc, opts, &pc.divisor());
            let hc = HyperComplex::build(&tc, n)?;
            let d = hc.dims();
            out.verification.extend(hc.check());
            let (g, r, k) = (sc.curve.genus(), pc.bundle().rank(), pc.structure.points.len());
            let formula = moduli_dimension(r, g, k);
            let stab = is_stable(&pc.parabolic_bundle(), STABILITY_BOUND).ok();
            out.section(
                "parabolic",
                json!({
                    "bound": n,
                    "dims": dims_json(&d),
                    "moduli_formula": formula,
                    "caveat": "dim ℍ¹(G•) agrees with 2r²(g-1) + nr(r-1) + 2 exactly when the parabolic connection is α-stable (the moduli space is then smooth of that dimension at this point)",
                    "par_deg": rq(&par_deg(&pc.parabolic_bundle())),
                    "bundle_stability": stab,
                    "stability_bound": STABILITY_BOUND,
                }),
            );
            out.summary.push(format!("dim ℍ⁰(G•) = {}, dim ℍ¹(G•) = {}, dim ℍ²(G•) = {}; formula value {formula}", d.h0, d.h1, d.h2));
        }
        Some(Parabolic::Bundle(pb)) => {
            let v = is_stable(pb, STABILITY_BOUND)?;
            out.summary.push(format!("par deg = {}, {} among line subsheaves of degree ≤ {STABILITY_BOUND}", rq(&par_deg(pb)), if v.stable { "stable" } else if v.semistable { "semistable, not stable" } else { "unstable" }));
            out.section("parabolic", json!({"par_deg": rq(&par_deg(pb)), "stability": v}));
            if let Some(h) = &sc.higgs {
                let tc = build_b_complex(pb, h)?;
                let n = bound_for(sc, opts, &h.divisor);
                let hc = HyperComplex::build(&tc, n)?;
                let d = hc.dims();
                out.verification.extend(hc.check());
                out.section("higgs", json!({"bound": n, "dims": dims_json(&d)}));
                out.summary.push(format!("dim ℍ⁰(B•) = {}, dim ℍ¹(B•) = {}, dim ℍ²(B•) = {}", d.h0, d.h1, d.h2));
            }
        }
        None => {}
    }
    Ok(())
}

fn render_pmats(v: &[PMat]) -> Vec<String> {
    v.iter().map(|m| m.render()).collect()
}

fn render_fmats(v: &[FMat]) -> Vec<String> {
    v.iter().map(|m| m.render()).collect()
}

fn atiyah(sc: &Scenario, out: &mut Outcome) -> Result<(), TaskError> {
    let twist = match &sc.connection {
        Some(c) if !c.divisor().orders().is_empty() => Twist::OmegaD(c.divisor().clone()),
        _ => Twist::Omega,
    };
    let fb = sc.family.clone().unwrap_or_else(|| sc.bundle.as_family());
    let at = if sc.family.is_some() { family_atiyah_class(&fb, twist)? } else { atiyah_class(&sc.bundle, twist)? };
    out.section(
        "atiyah",
        json!({
            "h1_dim": at.h1_dim,
            "coords": rqs(&at.coords),
            "zero": at.is_zero(),
            "cocycle": render_pmats(&at.cocycle),
            "witness": at.witness.as_ref().map(|w| render_pmats(w)),
        }),
    );
    out.summary.push(format!("At = {} in H¹ of dimension {}", if at.is_zero() { "0".to_string() } else { format!("({})", rqs(&at.coords).join(", ")) }, at.h1_dim));
    if let Some(w) = &at.witness {
        let ok = fb.covering().tuples(1).iter().enumerate().all(|(s, t)| fb.transition(t[0], t[1]).mul(&w[t[1]]).mul(&fb.transition(t[1], t[0])).sub(&w[t[0]]) == at.cocycle[s]);
        out.verification.push("witness splits the Atiyah cocycle", ok, "");
    }
    if fb.order() >= 1 {
        let k = fb.order();
        let res = restriction_map(&fb, k, k - 1, Twist::None)?;
        out.section(
            "restriction",
            json!({
                "from": k, "to": k - 1,
                "source_dim": res.source_dim, "target_dim": res.target_dim, "rank": res.rank,
                "surjective": res.is_surjective(),
                "cokernel": res.cokernel.iter().map(|c| render_pmats(c)).collect::<Vec<_>>(),
            }),
        );
        out.summary.push(format!("res_{k}{} on H⁰(End): rank {} of {}, {}", k - 1, res.rank, res.target_dim, if res.is_surjective() { "surjective" } else { "not surjective" }));
        for c in &res.cokernel {
            out.verification.push("cokernel witness is not a restriction", res.preimage(c)?.is_none(), render_pmats(c).join("; "));
        }
    }
    Ok(())
}

fn problem(sc: &Scenario, opts: &Options) -> Result<DeformationProblem, TaskError> {
    let bound = opts.pole_bound.or(sc.pole_bound);
    if sc.family.is_some() {
        return Err(TaskError::Unsupported("deformation tasks take a bundle without base variables".into()));
    }
    Ok(match &sc.connection {
        Some(c) => DeformationProblem::connection(c, bound)?,
        None => DeformationProblem::bundle(&sc.bundle, bound)?,
    })
}

fn datum_json(u: &FirstOrderDatum) -> Value {
    json!({"coords": rqs(&u.coords), "a": render_fmats(&u.a), "connection": render_fmats(&u.connection)})
}

fn first_order(sc: &Scenario, opts: &Options, out: &mut Outcome) -> Result<(), TaskError> {
    let p = problem(sc, opts)?;
    let d = p.dims();
    let basis = classify_first_order(&p);
    for (i, u) in basis.iter().enumerate() {
        let mut r = validate_first_order(&p, u);
        for c in &mut r.checks {
            c.name = format!("u{}: {}", i + 1, c.name);
        }
        out.verification.extend(r);
    }
    out.section("first_order", json!({"mode": p.mode(), "bound": p.bound(), "dims": dims_json(&d), "basis": basis.iter().map(datum_json).collect::<Vec<_>>()}));
    out.summary.push(format!("{} first-order deformations: W′ {} + W″ {}", basis.len(), d.w_prime, d.w_second));
    Ok(())
}

/// `Σ c_i u_i` of the basis data.
fn combine(basis: &[FirstOrderDatum], c: &[Rational]) -> FirstOrderDatum {
    let mut u = basis[0].clone();
    for m in u.a.iter_mut().chain(u.connection.iter_mut()) {
        *m = m.scale(&Rational::from_integer(0.into()));
    }
    for (b, k) in basis.iter().zip(c) {
        for (x, y) in u.a.iter_mut().zip(&b.a) {
            *x = x.add(&y.scale(k));
        }
        for (x, y) in u.connection.iter_mut().zip(&b.connection) {
            *x = x.add(&y.scale(k));
        }
    }
    u.coords = c.to_vec();
    u
}

fn obstruction(sc: &Scenario, opts: &Options, out: &mut Outcome) -> Result<(), TaskError> {
    let mut p = problem(sc, opts)?;
    let basis = classify_first_order(&p);
    if basis.is_empty() {
        out.section("obstruction", json!({"data": []}));
        out.summary.push("no first-order deformations".into());
        return Ok(());
    }
    let data: Vec<FirstOrderDatum> = match &sc.datum {
        Some(c) if c.len() == basis.len() => vec![combine(&basis, c)],
        Some(c) => return Err(TaskError::Unsupported(format!("datum has {} coordinates, ℍ¹ has dimension {}", c.len(), basis.len()))),
        None => basis.clone(),
    };
    let mut rows = Vec::new();
    for u in &data {
        let ob = first_obstruction(&mut p, u)?;
        let lift_ok = ob.lift.as_ref().map(|fb| kuranishi::bundle::validate_family(fb).passed());
        if let Some(ok) = lift_ok {
            out.verification.push(format!("lift of ({}) is a family over k[ε]/ε³", rqs(&u.coords).join(", ")), ok, "");
        }
        out.verification.push(format!("lift exists for ({}) exactly when the class vanishes", rqs(&u.coords).join(", ")), ob.vanishes() == ob.lift.is_some(), "");
        out.summary.push(format!("ob({}) = ({})", rqs(&u.coords).join(", "), rqs(&ob.class).join(", ")));
        rows.push(json!({"datum": datum_json(u), "class": rqs(&ob.class), "vanishes": ob.vanishes()}));
    }
    out.section("obstruction", json!({"data": rows}));
    Ok(())
}

fn family_json(kr: &KuranishiResult) -> Value {
    let fb = &kr.family;
    let cov = fb.covering();
    let g: Vec<Value> = cov.tuples(1).iter().map(|t| json!({"charts": [t[0], t[1]], "g": fb.transition(t[0], t[1]).render()})).collect();
    let a = fb.connection().map(|(_, a)| render_pmats(a));
    json!({"ring": fb.ring().render(), "transitions": g, "connection": a})
}

fn kuranishi_task(sc: &Scenario, opts: &Options, out: &mut Outcome) -> Result<(), TaskError> {
    let kr = match &sc.parabolic {
        Some(Parabolic::Connection(pc)) => parabolic_kuranishi(pc, opts.order, opts.pole_bound.or(sc.pole_bound))?,
        Some(Parabolic::Bundle(_)) => return Err(TaskError::Unsupported("parabolic Kuranishi spaces need a parabolic connection".into())),
        None => {
            let mut p = problem(sc, opts)?;
            kuranishi(&mut p, opts.order)?
        }
    };
    kuranishi_outcome(sc, &kr, opts, out);
    Ok(())
}

fn kuranishi_outcome(sc: &Scenario, kr: &KuranishiResult, opts: &Options, out: &mut Outcome) {
    let series: Vec<Value> = kr
        .series
        .degrees
        .iter()
        .map(|(k, fs)| json!({"degree": k, "f": fs.iter().map(|f| f.render(&kr.series.names)).collect::<Vec<_>>()}))
        .collect();
    let mut sec = json!({
        "mode": kr.mode,
        "order": kr.order,
        "dims": dims_json(&kr.dims),
        "variables": kr.series.names,
        "n_prime": kr.n_prime(),
        "n_second": kr.n_second(),
        "series": series,
        "unobstructed": kr.series.is_zero(),
        "total": kr.series.total().iter().map(|f| f.render(&kr.series.names)).collect::<Vec<_>>(),
        "ring_dim": kr.family.ring().dim(),
    });
    if opts.emit_family {
        sec["family"] = family_json(kr);
    }
    if let Some(Parabolic::Connection(pc)) = &sc.parabolic {
        let want = moduli_dimension(pc.bundle().rank(), sc.curve.genus(), pc.structure.points.len());
        sec["moduli_formula"] = json!(want);
        sec["caveat"] = json!("agreement with the formula is expected exactly when the parabolic connection is α-stable");
    }
    out.section("kuranishi", sec);
    out.summary.push(format!("T¹ = ⟨{}⟩, T² = ⟨{}⟩", kr.dims.h1, kr.dims.h2));
    if kr.series.is_zero() {
        out.summary.push(format!("unobstructed to order {}", kr.order));
    } else {
        out.summary.extend(kr.series.render());
    }
    out.verification.extend(kr.verification.clone());
}

fn regular_on(curve: &CurveModel, w: &Differential, chart: &kuranishi::sections::ChartSpec) -> (bool, Vec<String>) {
    let mut bad = Vec::new();
    if !w.is_zero() {
        for p in curve.point_ids().filter(|&p| chart.contains(p)) {
            if curve.differential_valuation(w, p).expect("nonzero") < 0 {
                bad.push(curve.point(p).label.clone());
            }
        }
    }
    (bad.is_empty(), bad)
}

fn eps_part(m: &PMat, ring: &kuranishi::bundle::BaseRing) -> FMat {
    let i = ring.monos().iter().position(|x| *x == Mono(vec![1])).expect("ε in the ring");
    m.term(i).clone()
}

/// The elliptic example: the extension family with `g = [[1, εf], [0, 1]]`,
/// its Atiyah class, the restriction `res₁₀`, and the class of `f` in
/// `H¹(O)` with the residue obstruction to splitting it.
fn paper_example(sc: &Scenario, out: &mut Outcome) -> Result<(), TaskError> {
    let fb: FamilyBundle = sc.family.clone().ok_or_else(|| TaskError::Unsupported("the example is a family over k[ε]/ε²".into()))?;
    let c = sc.curve.clone();
    if !c.is_elliptic() || fb.rank() != 2 || fb.order() != 1 || fb.covering().len() != 2 {
        return Err(TaskError::Unsupported("the example is a rank-2 family over k[ε]/ε² on the elliptic curve with two charts".into()));
    }
    let cov = fb.covering().clone();
    let ring = fb.ring().clone();
    let g = fb.transition(0, 1);
    let f: FFElement = eps_part(&g, &ring).get(0, 1).clone();
    let df = c.exterior_d(&f);
    let (x, y) = (c.coord(), c.y());
    let dy = c.exterior_d(&y);
    let dx = Differential::new(c.one());

    // Atiyah class and the engine's splitting
    let at = family_atiyah_class(&fb, Twist::Omega)?;
    let coc = eps_part(&at.cocycle[0], &ring);
    out.verification.push("dg g⁻¹ = [[0, ε df], [0, 0]]", coc == FMat::unit(&c, 2, 2, 0, 1, df.coeff().clone()), coc.render());
    out.verification.push("At(E₁) = 0", at.is_zero(), format!("coordinates ({})", rqs(&at.coords).join(", ")));
    let mut witness = Value::Null;
    if let Some(w) = &at.witness {
        let wp = Differential::new(eps_part(&w[0], &ring).get(0, 1).clone());
        let wm = Differential::new(eps_part(&w[1], &ring).get(0, 1).clone());
        let (r0, b0) = regular_on(&c, &wp, cov.chart(0));
        let (r1, b1) = regular_on(&c, &wm, cov.chart(1));
        out.verification.push("witness entry on U₊ is regular there", r0, b0.join(", "));
        out.verification.push("witness entry on U₋ is regular there", r1, b1.join(", "));
        out.verification.push("df = (witness on U₋) - (witness on U₊)", df == wm.sub(&wp), "");
        witness = json!({"U+": wp.render(), "U-": wm.render()});
    }
    // the displayed split, rewritten in the dx basis
    let two = Rational::from_integer(2.into());
    let xi = x.inv().map_err(|e| TaskError::Internal(e.to_string()))?;
    let om_plus = dy.scale(&two).mul_fn(&xi).sub(&dx.mul_fn(&y.mul(&xi).mul(&xi)));
    let om_minus = dy.mul_fn(&xi);
    out.verification.push("df = ω₊ - ω₋ with ω₊ = 2dy/x - y dx/x², ω₋ = dy/x", df == om_plus.sub(&om_minus), format!("df = {}", df.render()));
    let (rp, bp) = regular_on(&c, &om_plus, cov.chart(0));
    let (rm, bm) = regular_on(&c, &om_minus, cov.chart(1));
    out.section(
        "atiyah",
        json!({
            "df": df.render(),
            "omega_plus": om_plus.render(),
            "omega_minus": om_minus.render(),
            "omega_plus_regular_on_U+": rp,
            "omega_plus_poles_on_U+": bp,
            "omega_minus_regular_on_U-": rm,
            "omega_minus_poles_on_U-": bm,
            "zero": at.is_zero(),
            "witness": witness,
        }),
    );
    out.summary.push(format!("df = {}", df.render()));
    out.summary.push("At(E₁) = 0".to_string());
    if !rm {
        out.summary.push(format!("ω₋ = dy/x has a pole at {} ∈ U₋; the witness gives a regular split", bm.join(", ")));
    }

    // res₁₀
    let res = restriction_map(&fb, 1, 0, Twist::None)?;
    let ring0 = res.target_family().ring().clone();
    let e22 = PMat::constant(&ring0, FMat::unit(&c, 2, 2, 1, 1, c.one()));
    let pre = res.preimage(&[e22.clone(), e22])?;
    out.verification.push("res₁₀ is not surjective", !res.is_surjective(), format!("rank {} of {}", res.rank, res.target_dim));
    out.verification.push("diag(0, 1) is not in the image of res₁₀", pre.is_none(), "the linear system for a preimage is inconsistent");
    out.section(
        "restriction",
        json!({"source_dim": res.source_dim, "target_dim": res.target_dim, "rank": res.rank, "surjective": res.is_surjective(), "cokernel": res.cokernel.iter().map(|c| render_pmats(c)).collect::<Vec<_>>()}),
    );
    out.summary.push(format!("res₁₀: rank {} of {}, diag(0, 1) outside the image", res.rank, res.target_dim));

    // [f] in H¹(O)
    let o = Bundle::trivial(&cov, 1);
    let spec = SheafSpec::end(o.frames(), Twist::None);
    let n = default_bound(&c, &PoleProfile::empty());
    let mut cl = Classes::bundle(&spec, n)?;
    let h1 = cl.base().dims().h1;
    let coords = cl.h1_class(&[FMat::from_rows(vec![vec![f.clone()]])], &[])?;
    let nonzero = coords.iter().any(|v| !num_traits::Zero::is_zero(v));
    out.verification.push("[f] ≠ 0 and spans H¹(O)", nonzero && h1 == 1, format!("h¹(O) = {h1}, [f] = ({})", rqs(&coords).join(", ")));
    // f = h₊ - h₋ would give res_∞(f ω) = res_∞(h₊ ω) - res_∞(h₋ ω) = 0 for ω = dx/y
    let omega = Differential::new(y.inv().map_err(|e| TaskError::Internal(e.to_string()))?);
    let inf = c.infinity();
    let r_inf = c.residue(&omega.mul_fn(&f), inf);
    let r_sum: Rational = c.point_ids().map(|p| c.residue(&omega.mul_fn(&f), p)).sum();
    out.verification.push("res_∞(f·dx/y) ≠ 0 forbids f = h₊ - h₋", !num_traits::Zero::is_zero(&r_inf) && num_traits::Zero::is_zero(&r_sum), format!("res_∞ = {}, Σ res = {}", rq(&r_inf), rq(&r_sum)));
    out.section("h1_structure_sheaf", json!({"h1": h1, "class_of_f": rqs(&coords), "residue_at_infinity": rq(&r_inf)}));
    out.summary.push(format!("[f] generates H¹(O) (res_∞(f·dx/y) = {})", rq(&r_inf)));
    Ok(())
}
