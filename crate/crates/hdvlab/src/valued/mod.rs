//! Henselian discrete valued fields with value group normalized to Z.
//!
//! Four models are provided:
//! * truncated p-adics Q_p,
//! * equal-characteristic Laurent series K((t)) over any residue field,
//! * totally ramified extensions by a monic Eisenstein polynomial
//!   (renormalized so the new uniformizer has valuation 1),
//! * rational function fields K(x_1, ..) under the Gauss valuation
//!   (the residue field gains the same variables).
//!
//! Elements carry their precision; arithmetic degrades precision honestly
//! and reports `InsufficientPrecision` rather than guessing.

pub(crate) mod padic;
pub(crate) mod series;

use std::fmt;
use std::sync::Arc;

use crate::error::{CResult, Error};
use crate::residue::mpoly::{cmp_mono, Mono};
use crate::residue::{RData, ResidueElement, ResidueField};
use padic::Padic;
use series::Series;

// ---------------------------------------------------------------------------
// valuation views
// ---------------------------------------------------------------------------

/// What is known about a valuation at the current precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValView {
    /// The valuation is exactly this integer.
    Exact(i64),
    /// Only a lower bound is known (cancellation ate the leading digits).
    AtLeast(i64),
    /// The element is exactly zero.
    Infinite,
}

impl ValView {
    pub(crate) fn shift(self, k: i64) -> ValView {
        match self {
            ValView::Exact(v) => ValView::Exact(v + k),
            ValView::AtLeast(b) => ValView::AtLeast(b + k),
            ValView::Infinite => ValView::Infinite,
        }
    }

    pub(crate) fn scale(self, e: i64) -> ValView {
        match self {
            ValView::Exact(v) => ValView::Exact(v * e),
            ValView::AtLeast(b) => ValView::AtLeast(b * e),
            ValView::Infinite => ValView::Infinite,
        }
    }
}

/// Minimum of several valuation views: exact if the smallest exact value
/// cannot be undercut by any mere lower bound.
pub(crate) fn combine_min(views: impl IntoIterator<Item = ValView>) -> ValView {
    let mut min_exact: Option<i64> = None;
    let mut min_bound: Option<i64> = None;
    for v in views {
        match v {
            ValView::Exact(m) => min_exact = Some(min_exact.map_or(m, |x: i64| x.min(m))),
            ValView::AtLeast(b) => min_bound = Some(min_bound.map_or(b, |x: i64| x.min(b))),
            ValView::Infinite => {}
        }
    }
    match (min_exact, min_bound) {
        (None, None) => ValView::Infinite,
        (Some(m), None) => ValView::Exact(m),
        (None, Some(b)) => ValView::AtLeast(b),
        (Some(m), Some(b)) => {
            if m <= b {
                ValView::Exact(m)
            } else {
                ValView::AtLeast(b)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// fields
// ---------------------------------------------------------------------------

#[derive(Debug)]
pub(crate) enum Model {
    Padic { p: u64 },
    EqualChar,
    Eisenstein { base: ValuedField, minpoly: Vec<VElem>, e: i64 },
    Gauss { base: ValuedField, vars: Vec<String> },
}

#[derive(Debug)]
pub(crate) struct VfRepr {
    pub model: Model,
    pub residue: ResidueField,
    pub default_prec: i64,
    /// v(p) in the normalized value group; None in equal characteristic.
    pub vp: Option<i64>,
}

/// A Henselian discrete valued field with value group Z.
#[derive(Debug, Clone)]
pub struct ValuedField(pub(crate) Arc<VfRepr>);

impl PartialEq for ValuedField {
    fn eq(&self, other: &Self) -> bool {
        if Arc::ptr_eq(&self.0, &other.0) {
            return true;
        }
        match (&self.0.model, &other.0.model) {
            (Model::Padic { p: a }, Model::Padic { p: b }) => a == b,
            (Model::EqualChar, Model::EqualChar) => self.0.residue == other.0.residue,
            (
                Model::Eisenstein { base: b1, minpoly: m1, .. },
                Model::Eisenstein { base: b2, minpoly: m2, .. },
            ) => b1 == b2 && m1.len() == m2.len() && m1.iter().zip(m2).all(|(x, y)| x == y),
            (Model::Gauss { base: b1, vars: v1 }, Model::Gauss { base: b2, vars: v2 }) => {
                b1 == b2 && v1 == v2
            }
            _ => false,
        }
    }
}
impl Eq for ValuedField {}

impl ValuedField {
    /// The field Q_p of truncated p-adic numbers.
    pub fn padic(p: u64, prec: i64) -> CResult<ValuedField> {
        if prec < 4 {
            return Err(Error::PreconditionViolated("precision must be at least 4".into()));
        }
        let residue = ResidueField::finite(p, 1)?;
        Ok(ValuedField(Arc::new(VfRepr {
            model: Model::Padic { p },
            residue,
            default_prec: prec,
            vp: Some(1),
        })))
    }

    /// The Laurent series field residue((t)) in equal characteristic.
    pub fn laurent(residue: ResidueField, prec: i64) -> CResult<ValuedField> {
        if prec < 4 {
            return Err(Error::PreconditionViolated("precision must be at least 4".into()));
        }
        Ok(ValuedField(Arc::new(VfRepr {
            model: Model::EqualChar,
            residue,
            default_prec: prec,
            vp: None,
        })))
    }

    /// Totally ramified extension base[X]/(X^e + a_{e-1} X^{e-1} + ... + a_0)
    /// by a monic Eisenstein polynomial given through its lower coefficients.
    /// The valuation is renormalized so the class of X has valuation 1.
    pub fn eisenstein(base: &ValuedField, low_coeffs: Vec<VElem>) -> CResult<ValuedField> {
        let e = low_coeffs.len() as i64;
        if e < 2 {
            return Err(Error::NotEisenstein("degree must be at least 2".into()));
        }
        for (i, c) in low_coeffs.iter().enumerate() {
            if c.field != *base {
                return Err(Error::MismatchedFields("Eisenstein coefficients".into()));
            }
            match c.val_view() {
                ValView::Exact(v) => {
                    if i == 0 && v != 1 {
                        return Err(Error::NotEisenstein(format!(
                            "constant coefficient has valuation {v}, need exactly 1"
                        )));
                    }
                    if v < 1 {
                        return Err(Error::NotEisenstein(format!(
                            "coefficient of X^{i} has valuation {v}, need at least 1"
                        )));
                    }
                }
                ValView::AtLeast(b) => {
                    if i == 0 {
                        return Err(Error::NotEisenstein(
                            "constant coefficient valuation is not known exactly".into(),
                        ));
                    }
                    if b < 1 {
                        return Err(Error::NotEisenstein(format!(
                            "coefficient of X^{i} is only known to valuation {b}"
                        )));
                    }
                }
                ValView::Infinite => {
                    if i == 0 {
                        return Err(Error::NotEisenstein(
                            "constant coefficient is zero".into(),
                        ));
                    }
                }
            }
        }
        Ok(ValuedField(Arc::new(VfRepr {
            residue: base.0.residue.clone(),
            default_prec: base.0.default_prec,
            vp: base.0.vp.map(|v| v * e),
            model: Model::Eisenstein { base: base.clone(), minpoly: low_coeffs, e },
        })))
    }

    /// Eisenstein extension by X^e + sum c_i X^i with integer coefficients.
    pub fn eisenstein_int(base: &ValuedField, low_coeffs: &[i64]) -> CResult<ValuedField> {
        let coeffs = low_coeffs.iter().map(|&c| base.from_int(c)).collect();
        ValuedField::eisenstein(base, coeffs)
    }

    /// Rational function field base(vars...) under the Gauss valuation.
    /// The residue field gains the same variables.
    pub fn gauss(base: &ValuedField, vars: &[&str]) -> CResult<ValuedField> {
        if vars.is_empty() {
            return Err(Error::PreconditionViolated("gauss extension needs variables".into()));
        }
        let br = &base.0.residue;
        let mut all: Vec<&str> = br.vars().iter().map(|s| s.as_str()).collect();
        all.extend_from_slice(vars);
        let residue = ResidueField::rational(br.p(), br.coeff_degree(), &all)?;
        Ok(ValuedField(Arc::new(VfRepr {
            residue,
            default_prec: base.0.default_prec,
            vp: base.0.vp,
            model: Model::Gauss { base: base.clone(), vars: vars.iter().map(|s| s.to_string()).collect() },
        })))
    }

    /// Residual characteristic.
    pub fn p(&self) -> u64 {
        self.0.residue.p()
    }

    pub fn residue_field(&self) -> ResidueField {
        self.0.residue.clone()
    }

    /// v(p) in the normalized (Z-valued) valuation; None in equal
    /// characteristic, where p = 0 in the field.
    pub fn v_of_p(&self) -> Option<i64> {
        self.0.vp
    }

    pub fn char_zero(&self) -> bool {
        self.0.vp.is_some()
    }

    pub fn default_prec(&self) -> i64 {
        self.0.default_prec
    }

    pub(crate) fn base(&self) -> Option<&ValuedField> {
        match &self.0.model {
            Model::Eisenstein { base, .. } | Model::Gauss { base, .. } => Some(base),
            _ => None,
        }
    }

    /// Ramification index over the base model (Eisenstein only).
    pub fn ram_index(&self) -> Option<i64> {
        match &self.0.model {
            Model::Eisenstein { e, .. } => Some(*e),
            _ => None,
        }
    }

    // -- element constructors ------------------------------------------------

    pub fn zero(&self) -> VElem {
        let data = match &self.0.model {
            Model::Padic { .. } => VData::Padic(Padic::Zero),
            Model::EqualChar => VData::Series(Series::zero()),
            Model::Eisenstein { base, e, .. } => {
                VData::Poly(vec![base.zero(); *e as usize])
            }
            Model::Gauss { base, vars } => VData::Frac(Box::new(VFrac {
                num: VMPoly { nvars: vars.len(), terms: vec![] },
                den: VMPoly::constant(vars.len(), base.one()),
            })),
        };
        VElem { field: self.clone(), data }
    }

    pub fn one(&self) -> VElem {
        self.from_int(1)
    }

    pub fn from_int(&self, n: i64) -> VElem {
        let data = match &self.0.model {
            Model::Padic { p } => VData::Padic(Padic::from_int(*p, n, self.0.default_prec)),
            Model::EqualChar => VData::Series(Series::from_coeff(self.0.residue.from_int(n), 0)),
            Model::Eisenstein { base, e, .. } => {
                let mut v = vec![base.zero(); *e as usize];
                v[0] = base.from_int(n);
                VData::Poly(v)
            }
            Model::Gauss { base, vars } => {
                let k = vars.len();
                let num = if n == 0 {
                    VMPoly { nvars: k, terms: vec![] }
                } else {
                    VMPoly::constant(k, base.from_int(n))
                };
                VData::Frac(Box::new(VFrac { num, den: VMPoly::constant(k, base.one()) }))
            }
        };
        VElem { field: self.clone(), data }
    }

    /// The distinguished uniformizer: p, t, the Eisenstein root, or the
    /// base uniformizer for a Gauss extension.
    pub fn uniformizer(&self) -> VElem {
        let data = match &self.0.model {
            Model::Padic { p } => {
                VData::Padic(Padic::from_int(*p, *p as i64, self.0.default_prec))
            }
            Model::EqualChar => VData::Series(Series::from_coeff(self.0.residue.one(), 1)),
            Model::Eisenstein { base, e, .. } => {
                let mut v = vec![base.zero(); *e as usize];
                v[1] = base.one();
                VData::Poly(v)
            }
            Model::Gauss { base, vars } => VData::Frac(Box::new(VFrac {
                num: VMPoly::constant(vars.len(), base.uniformizer()),
                den: VMPoly::constant(vars.len(), base.one()),
            })),
        };
        VElem { field: self.clone(), data }
    }

    /// A transcendental variable as a field element: a Gauss variable, or
    /// the lift of a residue field variable in equal characteristic.
    pub fn var(&self, name: &str) -> CResult<VElem> {
        if matches!(&self.0.model, Model::EqualChar) {
            let r = self.0.residue.var(name)?;
            return self.lift(&r);
        }
        let Model::Gauss { base, vars } = &self.0.model else {
            return Err(Error::ParseError(format!(
                "field {self} has no transcendental variable {name}"
            )));
        };
        let idx = vars
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| Error::ParseError(format!("unknown variable {name}")))?;
        let mut mono = vec![0u32; vars.len()];
        mono[idx] = 1;
        Ok(VElem {
            field: self.clone(),
            data: VData::Frac(Box::new(VFrac {
                num: VMPoly { nvars: vars.len(), terms: vec![(mono, base.one())] },
                den: VMPoly::constant(vars.len(), base.one()),
            })),
        })
    }

    /// Inject an element of the base model (Eisenstein/Gauss only).
    pub fn inject(&self, x: &VElem) -> CResult<VElem> {
        match &self.0.model {
            Model::Eisenstein { base, e, .. } => {
                if x.field != *base {
                    return Err(Error::MismatchedFields("inject".into()));
                }
                let mut v = vec![base.zero(); *e as usize];
                v[0] = x.clone();
                Ok(VElem { field: self.clone(), data: VData::Poly(v) })
            }
            Model::Gauss { base, vars } => {
                if x.field != *base {
                    return Err(Error::MismatchedFields("inject".into()));
                }
                Ok(VElem {
                    field: self.clone(),
                    data: VData::Frac(Box::new(VFrac {
                        num: VMPoly::constant(vars.len(), x.clone()),
                        den: VMPoly::constant(vars.len(), base.one()),
                    })),
                })
            }
            _ => Err(Error::UnsupportedField("inject needs an extension model".into())),
        }
    }

    /// Lift a residue element to a valuation-zero representative (or zero).
    pub fn lift(&self, r: &ResidueElement) -> CResult<VElem> {
        if *r.field() != self.0.residue {
            return Err(Error::MismatchedFields("lift".into()));
        }
        let data = match &self.0.model {
            Model::Padic { p } => {
                let RData::Fin(c) = &r.data else { unreachable!("finite residue") };
                VData::Padic(Padic::from_int(*p, c.first().copied().unwrap_or(0) as i64, self.0.default_prec))
            }
            Model::EqualChar => VData::Series(Series::from_coeff(r.clone(), 0)),
            Model::Eisenstein { base, e, .. } => {
                let mut v = vec![base.zero(); *e as usize];
                v[0] = base.lift(r)?;
                VData::Poly(v)
            }
            Model::Gauss { base, vars } => {
                let lift_poly = |mp: &crate::residue::mpoly::MPoly| -> CResult<VMPoly> {
                    let base_res = base.residue_field();
                    let nbase = base_res.p_degree();
                    let mut acc: std::collections::BTreeMap<Mono, ResidueElement> =
                        std::collections::BTreeMap::new();
                    for (mono, c) in &mp.terms {
                        let (bpart, gpart) = mono.split_at(nbase);
                        let mut coeff = base_res.from_ffelem(c.clone());
                        for (i, &e) in bpart.iter().enumerate() {
                            if e > 0 {
                                let v = base_res.var(&base_res.vars()[i].clone())?;
                                coeff = coeff.mul(&v.pow(e as i64)?);
                            }
                        }
                        let entry =
                            acc.entry(gpart.to_vec()).or_insert_with(|| base_res.zero());
                        *entry = entry.add(&coeff);
                    }
                    let mut terms = Vec::new();
                    for (mono, r) in acc {
                        if !r.is_zero() {
                            terms.push((mono, base.lift(&r)?));
                        }
                    }
                    terms.sort_by(|a, b| cmp_mono(&b.0, &a.0));
                    Ok(VMPoly { nvars: vars.len(), terms })
                };
                let RData::Rat(fr) = &r.data else {
                    // finite residue element in a field that has variables
                    unreachable!("gauss residue fields always carry variables")
                };
                VData::Frac(Box::new(VFrac { num: lift_poly(&fr.num)?, den: lift_poly(&fr.den)? }))
            }
        };
        Ok(VElem { field: self.clone(), data })
    }
}

impl fmt::Display for ValuedField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0.model {
            Model::Padic { p } => write!(f, "padic({p})"),
            Model::EqualChar => write!(f, "laurent({})", self.0.residue),
            Model::Eisenstein { base, e, .. } => write!(f, "eis({base}; deg {e})"),
            Model::Gauss { base, vars } => write!(f, "gauss({base}; {})", vars.join(",")),
        }
    }
}

// ---------------------------------------------------------------------------
// elements
// ---------------------------------------------------------------------------

/// Sparse multivariate polynomial with valued coefficients (Gauss models).
#[derive(Debug, Clone)]
pub(crate) struct VMPoly {
    pub nvars: usize,
    pub terms: Vec<(Mono, VElem)>,
}

#[derive(Debug, Clone)]
pub(crate) struct VFrac {
    pub num: VMPoly,
    pub den: VMPoly,
}

/// An element of a [`ValuedField`], carrying its field handle and precision.
#[derive(Debug, Clone)]
pub struct VElem {
    pub(crate) field: ValuedField,
    pub(crate) data: VData,
}

#[derive(Debug, Clone)]
pub(crate) enum VData {
    Padic(Padic),
    Series(Series),
    Poly(Vec<VElem>),
    Frac(Box<VFrac>),
}

/// Structural equality: identical known digits. Semantic equality of field
/// elements is only decidable to precision; use `agrees_with` for that.
impl PartialEq for VElem {
    fn eq(&self, other: &Self) -> bool {
        if self.field != other.field {
            return false;
        }
        match (&self.data, &other.data) {
            (VData::Padic(a), VData::Padic(b)) => a == b,
            (VData::Series(a), VData::Series(b)) => a == b,
            (VData::Poly(a), VData::Poly(b)) => a == b,
            (VData::Frac(a), VData::Frac(b)) => {
                vmp_eq(&a.num, &b.num) && vmp_eq(&a.den, &b.den)
            }
            _ => false,
        }
    }
}
impl Eq for VElem {}

fn vmp_eq(a: &VMPoly, b: &VMPoly) -> bool {
    a.nvars == b.nvars
        && a.terms.len() == b.terms.len()
        && a.terms.iter().zip(&b.terms).all(|(x, y)| x.0 == y.0 && x.1 == y.1)
}

impl VFrac {
    /// Exact denominator absorption: a single-term denominator divides into
    /// the numerator, because coefficient inversion is field arithmetic and
    /// monomial content cancels structurally. Only genuinely polynomial
    /// denominators survive, which keeps inverse-heavy chains (determinants
    /// and characteristic polynomials over extension towers) from
    /// compounding fraction degrees with every operation.
    fn reduced(num: VMPoly, den: VMPoly) -> VFrac {
        if den.terms.len() != 1 {
            return VFrac { num, den };
        }
        let (dmono, dcoeff) = (&den.terms[0].0, &den.terms[0].1);
        let Ok(dinv) = dcoeff.inv() else {
            return VFrac { num, den };
        };
        // The monomial content shared by the denominator and every
        // numerator term cancels; the rest of the monomial stays below.
        let mut shift: Mono = dmono.clone();
        for (m, _) in &num.terms {
            for (s, e) in shift.iter_mut().zip(m) {
                *s = (*s).min(*e);
            }
            if shift.iter().all(|&s| s == 0) {
                break;
            }
        }
        let terms: Vec<(Mono, VElem)> = num
            .terms
            .iter()
            .map(|(m, c)| {
                let m2: Mono = m.iter().zip(&shift).map(|(a, b)| a - b).collect();
                (m2, c.mul(&dinv))
            })
            .collect();
        let rest: Mono = dmono.iter().zip(&shift).map(|(a, b)| a - b).collect();
        VFrac {
            num: VMPoly { nvars: num.nvars, terms }.normalize(),
            den: VMPoly { nvars: den.nvars, terms: vec![(rest, dcoeff.field.one())] },
        }
    }
}

impl VMPoly {
    fn constant(nvars: usize, c: VElem) -> VMPoly {
        VMPoly { nvars, terms: vec![(vec![0; nvars], c)] }
    }

    fn normalize(mut self) -> VMPoly {
        self.terms.retain(|(_, c)| !c.is_exact_zero());
        self.terms.sort_by(|a, b| cmp_mono(&b.0, &a.0));
        self
    }

    fn add(&self, other: &VMPoly) -> VMPoly {
        let mut acc: std::collections::BTreeMap<Mono, VElem> = std::collections::BTreeMap::new();
        for (m, c) in self.terms.iter().chain(&other.terms) {
            match acc.entry(m.clone()) {
                std::collections::btree_map::Entry::Vacant(e) => {
                    e.insert(c.clone());
                }
                std::collections::btree_map::Entry::Occupied(mut e) => {
                    let s = e.get().add(c);
                    e.insert(s);
                }
            }
        }
        VMPoly { nvars: self.nvars, terms: acc.into_iter().collect() }.normalize()
    }

    fn neg(&self) -> VMPoly {
        VMPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.neg())).collect(),
        }
    }

    /// Monomial-aligned subtraction. Coefficients subtract through the
    /// structural path, so x - x cancels exactly instead of leaving fuzz.
    fn sub(&self, other: &VMPoly) -> VMPoly {
        let mut acc: std::collections::BTreeMap<Mono, VElem> = std::collections::BTreeMap::new();
        for (m, c) in &self.terms {
            acc.insert(m.clone(), c.clone());
        }
        for (m, c) in &other.terms {
            match acc.entry(m.clone()) {
                std::collections::btree_map::Entry::Vacant(e) => {
                    e.insert(c.neg());
                }
                std::collections::btree_map::Entry::Occupied(mut e) => {
                    let s = e.get().sub(c);
                    e.insert(s);
                }
            }
        }
        VMPoly { nvars: self.nvars, terms: acc.into_iter().collect() }.normalize()
    }

    pub(crate) fn mul(&self, other: &VMPoly) -> VMPoly {
        let mut acc: std::collections::BTreeMap<Mono, VElem> = std::collections::BTreeMap::new();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let m: Mono = m1.iter().zip(m2).map(|(a, b)| a + b).collect();
                let c = c1.mul(c2);
                match acc.entry(m) {
                    std::collections::btree_map::Entry::Vacant(e) => {
                        e.insert(c);
                    }
                    std::collections::btree_map::Entry::Occupied(mut e) => {
                        let s = e.get().add(&c);
                        e.insert(s);
                    }
                }
            }
        }
        VMPoly { nvars: self.nvars, terms: acc.into_iter().collect() }.normalize()
    }

    fn val_view(&self) -> ValView {
        combine_min(self.terms.iter().map(|(_, c)| c.val_view()))
    }

    fn is_exact_zero(&self) -> bool {
        self.terms.iter().all(|(_, c)| c.is_exact_zero())
    }
}

impl VElem {
    pub fn field(&self) -> &ValuedField {
        &self.field
    }

    pub fn is_exact_zero(&self) -> bool {
        match &self.data {
            VData::Padic(p) => *p == Padic::Zero,
            VData::Series(s) => s.is_exact_zero(),
            VData::Poly(v) => v.iter().all(|c| c.is_exact_zero()),
            VData::Frac(f) => f.num.is_exact_zero(),
        }
    }

    /// What is known about v(self).
    pub fn val_view(&self) -> ValView {
        match &self.data {
            VData::Padic(p) => match p {
                Padic::Zero => ValView::Infinite,
                Padic::Fuzz { abs } => ValView::AtLeast(*abs),
                Padic::Unit { shift, .. } => ValView::Exact(*shift),
            },
            VData::Series(s) => match s.lead() {
                Some((k, _)) => ValView::Exact(k),
                None => match s.prec {
                    None => ValView::Infinite,
                    Some(a) => ValView::AtLeast(a),
                },
            },
            VData::Poly(v) => {
                let e = self.field.ram_index().expect("poly data implies eisenstein");
                combine_min(
                    v.iter()
                        .enumerate()
                        .map(|(i, c)| c.val_view().scale(e).shift(i as i64)),
                )
            }
            VData::Frac(f) => {
                let vn = f.num.val_view();
                match f.den.val_view() {
                    ValView::Exact(d) => vn.shift(-d),
                    _ => match vn {
                        ValView::Infinite => ValView::Infinite,
                        _ => ValView::AtLeast(i64::MIN / 4),
                    },
                }
            }
        }
    }

    /// The valuation, normalized to Z. Errors on exact zero and on elements
    /// whose leading digits were lost to cancellation.
    pub fn val(&self) -> CResult<i64> {
        match self.val_view() {
            ValView::Exact(v) => Ok(v),
            ValView::AtLeast(b) => Err(Error::prec("valuation", b)),
            ValView::Infinite => {
                Err(Error::PreconditionViolated("valuation of zero is infinite".into()))
            }
        }
    }

    fn check_same(&self, other: &VElem) {
        assert!(
            self.field == other.field,
            "mixed valued fields: {} vs {}",
            self.field,
            other.field
        );
    }

    pub fn add(&self, other: &VElem) -> VElem {
        self.check_same(other);
        let data = match (&self.data, &other.data) {
            (VData::Padic(a), VData::Padic(b)) => {
                VData::Padic(a.add(self.field.p(), b))
            }
            (VData::Series(a), VData::Series(b)) => VData::Series(a.add(b)),
            (VData::Poly(a), VData::Poly(b)) => {
                VData::Poly(a.iter().zip(b).map(|(x, y)| x.add(y)).collect())
            }
            (VData::Frac(a), VData::Frac(b)) => {
                let f = if vmp_eq(&a.den, &b.den) {
                    VFrac { num: a.num.add(&b.num), den: a.den.clone() }
                } else {
                    VFrac::reduced(
                        a.num.mul(&b.den).add(&b.num.mul(&a.den)),
                        a.den.mul(&b.den),
                    )
                };
                VData::Frac(Box::new(f))
            }
            _ => unreachable!("same field implies same representation"),
        };
        VElem { field: self.field.clone(), data }
    }

    pub fn neg(&self) -> VElem {
        let data = match &self.data {
            VData::Padic(a) => VData::Padic(a.neg(self.field.p())),
            VData::Series(a) => VData::Series(a.neg()),
            VData::Poly(a) => VData::Poly(a.iter().map(|c| c.neg()).collect()),
            VData::Frac(a) => {
                VData::Frac(Box::new(VFrac { num: a.num.neg(), den: a.den.clone() }))
            }
        };
        VElem { field: self.field.clone(), data }
    }

    pub fn sub(&self, other: &VElem) -> VElem {
        self.check_same(other);
        match (&self.data, &other.data) {
            (VData::Padic(a), VData::Padic(b)) => VElem {
                field: self.field.clone(),
                data: VData::Padic(a.sub(self.field.p(), b)),
            },
            (VData::Series(a), VData::Series(b)) => {
                VElem { field: self.field.clone(), data: VData::Series(a.sub(b)) }
            }
            (VData::Poly(a), VData::Poly(b)) => VElem {
                field: self.field.clone(),
                data: VData::Poly(a.iter().zip(b).map(|(x, y)| x.sub(y)).collect()),
            },
            (VData::Frac(a), VData::Frac(b)) => {
                let f = if vmp_eq(&a.den, &b.den) {
                    VFrac { num: a.num.sub(&b.num), den: a.den.clone() }
                } else {
                    VFrac::reduced(
                        a.num.mul(&b.den).sub(&b.num.mul(&a.den)),
                        a.den.mul(&b.den),
                    )
                };
                VElem { field: self.field.clone(), data: VData::Frac(Box::new(f)) }
            }
            _ => self.add(&other.neg()),
        }
    }

    pub fn mul(&self, other: &VElem) -> VElem {
        self.check_same(other);
        let data = match (&self.data, &other.data) {
            (VData::Padic(a), VData::Padic(b)) => {
                VData::Padic(a.mul(self.field.p(), b))
            }
            (VData::Series(a), VData::Series(b)) => VData::Series(a.mul(b)),
            (VData::Poly(a), VData::Poly(b)) => VData::Poly(self.field.eis_mul(a, b)),
            (VData::Frac(a), VData::Frac(b)) => VData::Frac(Box::new(VFrac::reduced(
                a.num.mul(&b.num),
                a.den.mul(&b.den),
            ))),
            _ => unreachable!(),
        };
        VElem { field: self.field.clone(), data }
    }

    pub fn inv(&self) -> CResult<VElem> {
        let data = match &self.data {
            VData::Padic(a) => VData::Padic(a.inv(self.field.p())?),
            VData::Series(a) => VData::Series(a.inv(self.field.0.default_prec)?),
            VData::Poly(a) => VData::Poly(self.field.eis_inv(a)?),
            VData::Frac(a) => {
                if a.num.is_exact_zero() {
                    return Err(Error::DivisionByZero);
                }
                VData::Frac(Box::new(VFrac::reduced(a.den.clone(), a.num.clone())))
            }
        };
        Ok(VElem { field: self.field.clone(), data })
    }

    pub fn div(&self, other: &VElem) -> CResult<VElem> {
        self.check_same(other);
        Ok(self.mul(&other.inv()?))
    }

    pub fn pow(&self, e: i64) -> CResult<VElem> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut acc = self.field.one();
        let mut sq = base;
        let mut n = e.unsigned_abs();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&sq);
            }
            n >>= 1;
            if n > 0 {
                sq = sq.mul(&sq);
            }
        }
        Ok(acc)
    }

    /// The residue of a valuation >= 0 element (zero for positive valuation).
    pub fn residue(&self) -> CResult<ResidueElement> {
        let rf = self.field.residue_field();
        match &self.data {
            VData::Padic(a) => {
                let r = a.residue_scalar(self.field.p())?;
                Ok(rf.from_int(r as i64))
            }
            VData::Series(a) => a.residue(&rf),
            VData::Poly(v) => match self.val_view() {
                ValView::Infinite => Ok(rf.zero()),
                ValView::AtLeast(b) if b >= 1 => Ok(rf.zero()),
                ValView::AtLeast(b) => Err(Error::prec("residue", b)),
                ValView::Exact(m) if m > 0 => Ok(rf.zero()),
                ValView::Exact(m) if m < 0 => Err(Error::PreconditionViolated(
                    "residue of an element of negative valuation".into(),
                )),
                ValView::Exact(_) => v[0].residue(),
            },
            VData::Frac(f) => self.frac_residue(f, &rf),
        }
    }

    fn frac_residue(&self, f: &VFrac, rf: &ResidueField) -> CResult<ResidueElement> {
        match self.val_view() {
            ValView::Infinite => return Ok(rf.zero()),
            ValView::AtLeast(b) if b >= 1 => return Ok(rf.zero()),
            ValView::AtLeast(b) => return Err(Error::prec("residue", b)),
            ValView::Exact(m) if m > 0 => return Ok(rf.zero()),
            ValView::Exact(m) if m < 0 => {
                return Err(Error::PreconditionViolated(
                    "residue of an element of negative valuation".into(),
                ))
            }
            ValView::Exact(_) => {}
        }
        let base = self.field.base().expect("frac implies gauss").clone();
        let base_rf = base.residue_field();
        let Model::Gauss { vars, .. } = &self.field.0.model else { unreachable!() };
        // reduce a VMPoly at level v: sum over terms with coefficient
        // valuation exactly v of res(c * pi^-v) * monomial
        let reduce = |mp: &VMPoly, v: i64| -> CResult<ResidueElement> {
            let shift = base.uniformizer().pow(-v)?;
            let mut acc = rf.zero();
            for (mono, c) in &mp.terms {
                match c.val_view() {
                    ValView::Infinite => continue,
                    ValView::AtLeast(b) => {
                        if b > v {
                            continue;
                        }
                        return Err(Error::prec("residue coefficient", b));
                    }
                    ValView::Exact(cv) => {
                        if cv > v {
                            continue;
                        }
                        debug_assert!(cv == v, "valuation below the Gauss minimum");
                        let r = c.mul(&shift).residue()?;
                        let mut term = base_rf.embed(&r, rf)?;
                        for (i, &e) in mono.iter().enumerate() {
                            if e > 0 {
                                term = term.mul(&rf.var(&vars[i])?.pow(e as i64)?);
                            }
                        }
                        acc = acc.add(&term);
                    }
                }
            }
            Ok(acc)
        };
        let ValView::Exact(vn) = f.num.val_view() else {
            return Err(Error::prec("residue numerator", 0));
        };
        let ValView::Exact(vd) = f.den.val_view() else {
            return Err(Error::prec("residue denominator", 0));
        };
        let rn = reduce(&f.num, vn)?;
        let rd = reduce(&f.den, vd)?;
        rn.div(&rd)
    }

    /// Do the two elements agree at the current precision (their difference
    /// is zero or indistinguishable from zero)?
    pub fn agrees_with(&self, other: &VElem) -> bool {
        match self.sub(other).val_view() {
            ValView::Exact(v) => v >= self.field.default_prec() / 2,
            _ => true,
        }
    }
}

impl ValuedField {
    fn eis_mul(&self, a: &[VElem], b: &[VElem]) -> Vec<VElem> {
        let Model::Eisenstein { base, minpoly, e } = &self.0.model else { unreachable!() };
        let e = *e as usize;
        let mut prod = vec![base.zero(); 2 * e - 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_exact_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if y.is_exact_zero() {
                    continue;
                }
                prod[i + j] = prod[i + j].add(&x.mul(y));
            }
        }
        // reduce: theta^e = -(minpoly), applied from the top down
        for k in (e..prod.len()).rev() {
            let c = prod[k].clone();
            if c.is_exact_zero() {
                continue;
            }
            prod[k] = base.zero();
            for (j, m) in minpoly.iter().enumerate() {
                let sub = c.mul(m);
                prod[k - e + j] = prod[k - e + j].sub(&sub);
            }
        }
        prod.truncate(e);
        prod
    }

    /// Inverse in base[X]/(f) by solving the linear system g*x = 1 in the
    /// power basis, pivoting on the lowest exactly-known valuation.
    fn eis_inv(&self, g: &[VElem]) -> CResult<Vec<VElem>> {
        let Model::Eisenstein { base, e, .. } = &self.0.model else { unreachable!() };
        let e = *e as usize;
        if g.iter().all(|c| c.is_exact_zero()) {
            return Err(Error::DivisionByZero);
        }
        // columns: g * theta^j in basis coordinates
        let mut cols: Vec<Vec<VElem>> = Vec::with_capacity(e);
        let mut cur = g.to_vec();
        for _ in 0..e {
            cols.push(cur.clone());
            // multiply by theta: shift up and reduce
            let mut shifted = vec![base.zero(); e + 1];
            for (i, c) in cur.iter().enumerate() {
                shifted[i + 1] = c.clone();
            }
            let mut padded_a = shifted;
            let Model::Eisenstein { minpoly, .. } = &self.0.model else { unreachable!() };
            let top = padded_a[e].clone();
            if !top.is_exact_zero() {
                padded_a[e] = base.zero();
                for (j, m) in minpoly.iter().enumerate() {
                    let sub = top.mul(m);
                    padded_a[j] = padded_a[j].sub(&sub);
                }
            }
            padded_a.truncate(e);
            cur = padded_a;
        }
        // solve sum_j x_j * cols[j] = e_0
        let mut m: Vec<Vec<VElem>> = (0..e)
            .map(|row| (0..e).map(|col| cols[col][row].clone()).collect())
            .collect();
        let mut rhs: Vec<VElem> = (0..e)
            .map(|row| if row == 0 { base.one() } else { base.zero() })
            .collect();
        let mut used = vec![false; e];
        let mut pivot_of_col = vec![usize::MAX; e];
        for col in 0..e {
            // choose an unused row whose entry has the smallest exact valuation
            let mut best: Option<(usize, i64)> = None;
            for (row, row_used) in used.iter().enumerate() {
                if *row_used {
                    continue;
                }
                if let ValView::Exact(v) = m[row][col].val_view() {
                    if best.map_or(true, |(_, bv)| v < bv) {
                        best = Some((row, v));
                    }
                }
            }
            let Some((prow, _)) = best else {
                // check solvability: all remaining entries fuzzy or zero
                let lost = (0..e).any(|row| {
                    !used[row] && matches!(m[row][col].val_view(), ValView::AtLeast(_))
                });
                if lost {
                    return Err(Error::prec("inverse in a ramified extension", 0));
                }
                return Err(Error::DivisionByZero);
            };
            used[prow] = true;
            pivot_of_col[col] = prow;
            let pinv = m[prow][col].inv()?;
            for c in 0..e {
                m[prow][c] = m[prow][c].mul(&pinv);
            }
            rhs[prow] = rhs[prow].mul(&pinv);
            for row in 0..e {
                if row == prow || m[row][col].is_exact_zero() {
                    continue;
                }
                let f = m[row][col].clone();
                for c in 0..e {
                    let sub = m[prow][c].mul(&f);
                    m[row][c] = m[row][c].sub(&sub);
                }
                let sub = rhs[prow].mul(&f);
                rhs[row] = rhs[row].sub(&sub);
            }
        }
        Ok((0..e).map(|col| rhs[pivot_of_col[col]].clone()).collect())
    }
}

macro_rules! ve_ops {
    ($trait:ident, $m:ident) => {
        impl std::ops::$trait for &VElem {
            type Output = VElem;
            fn $m(self, rhs: &VElem) -> VElem {
                VElem::$m(self, rhs)
            }
        }
        impl std::ops::$trait for VElem {
            type Output = VElem;
            fn $m(self, rhs: VElem) -> VElem {
                VElem::$m(&self, &rhs)
            }
        }
    };
}
ve_ops!(Add, add);
ve_ops!(Sub, sub);
ve_ops!(Mul, mul);

impl std::ops::Neg for &VElem {
    type Output = VElem;
    fn neg(self) -> VElem {
        VElem::neg(self)
    }
}

// ---------------------------------------------------------------------------
// display
// ---------------------------------------------------------------------------

impl fmt::Display for VElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match &self.data {
                VData::Padic(a) => {
                    let p = self.field.p();
                    match a {
                        Padic::Zero => write!(f, "0"),
                        Padic::Fuzz { abs } => write!(f, "O({p}^{abs})"),
                        Padic::Unit { shift, unit, rel } => {
                            if *shift == 0 {
                                write!(f, "{unit} + O({p}^{rel})")
                            } else {
                                write!(f, "{unit}*{p}^{shift} + O({p}^{})", shift + rel)
                            }
                        }
                    }
                }
                VData::Series(s) => {
                    let mut parts: Vec<String> = s
                        .map
                        .iter()
                        .map(|(k, c)| match k {
                            0 => format!("({c})"),
                            1 => format!("({c})*t"),
                            _ => format!("({c})*t^{k}"),
                        })
                        .collect();
                    if let Some(pr) = s.prec {
                        parts.push(format!("O(t^{pr})"));
                    }
                    if parts.is_empty() {
                        write!(f, "0")
                    } else {
                        write!(f, "{}", parts.join(" + "))
                    }
                }
                VData::Poly(v) => {
                    let parts: Vec<String> = v
                        .iter()
                        .enumerate()
                        .filter(|(_, c)| !c.is_exact_zero())
                        .map(|(i, c)| match i {
                            0 => format!("({c})"),
                            1 => format!("({c})*th"),
                            _ => format!("({c})*th^{i}"),
                        })
                        .collect();
                    if parts.is_empty() {
                        write!(f, "0")
                    } else {
                        write!(f, "{}", parts.join(" + "))
                    }
                }
                VData::Frac(fr) => {
                    let Model::Gauss { vars, .. } = &self.field.0.model else {
                        unreachable!()
                    };
                    let poly = |mp: &VMPoly| -> String {
                        if mp.terms.is_empty() {
                            return "0".into();
                        }
                        mp.terms
                            .iter()
                            .map(|(m, c)| {
                                let mut s = format!("({c})");
                                for (i, &e) in m.iter().enumerate() {
                                    match e {
                                        0 => {}
                                        1 => s.push_str(&format!("*{}", vars[i])),
                                        _ => s.push_str(&format!("*{}^{e}", vars[i])),
                                    }
                                }
                                s
                            })
                            .collect::<Vec<_>>()
                            .join(" + ")
                    };
                    let n = poly(&fr.num);
                    if fr.den.terms.len() == 1
                        && fr.den.terms[0].0.iter().all(|&e| e == 0)
                        && fr.den.terms[0].1 == self.field.base().unwrap().one()
                    {
                        write!(f, "{n}")
                    } else {
                        write!(f, "[{n}] / [{}]", poly(&fr.den))
                    }
                }
            }
        }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q2() -> ValuedField {
        ValuedField::padic(2, 64).unwrap()
    }

    #[test]
    fn padic_valuations_and_residues() {
        let k = q2();
        assert_eq!(k.from_int(12).val().unwrap(), 2);
        assert_eq!(k.from_int(-3).val().unwrap(), 0);
        assert!(k.zero().val().is_err());
        assert_eq!(k.v_of_p(), Some(1));
        // 5/3 is a unit with residue 1
        let x = k.from_int(5).div(&k.from_int(3)).unwrap();
        assert_eq!(x.val().unwrap(), 0);
        assert!(x.residue().unwrap().is_one());
        // (1/3)*3 lands exactly on the representation of 1, so the identity
        // cancels structurally to exact zero
        let a = k.one().div(&k.from_int(3)).unwrap();
        let b = a.mul(&k.from_int(3)).sub(&k.one());
        assert!(b.is_exact_zero());
        assert!(b.agrees_with(&k.zero()));
    }

    #[test]
    fn laurent_basics() {
        let rf = ResidueField::rational(2, 1, &["x"]).unwrap();
        let k = ValuedField::laurent(rf.clone(), 32).unwrap();
        let t = k.uniformizer();
        assert_eq!(t.val().unwrap(), 1);
        assert_eq!(k.v_of_p(), None);
        let x = k.lift(&rf.var("x").unwrap()).unwrap();
        let a = x.mul(&t.pow(-2).unwrap());
        assert_eq!(a.val().unwrap(), -2);
        assert!(a.residue().is_err());
        assert_eq!(x.residue().unwrap(), rf.var("x").unwrap());
        // (1+t) * 1/(1+t) agrees with 1
        let u = k.one().add(&t);
        let w = u.inv().unwrap().mul(&u);
        assert!(w.agrees_with(&k.one()));
    }

    #[test]
    fn eisenstein_sqrt2_model() {
        let k = q2();
        let l = ValuedField::eisenstein_int(&k, &[-2, 0]).unwrap(); // X^2 - 2
        let th = l.uniformizer();
        assert_eq!(th.val().unwrap(), 1);
        assert_eq!(l.from_int(2).val().unwrap(), 2);
        assert_eq!(l.v_of_p(), Some(2));
        // theta^2 = 2 exactly (structural cancellation)
        let d = th.mul(&th).sub(&l.from_int(2));
        assert!(d.is_exact_zero());
        // v(theta + 2) = 1: distinct valuations mod e never tie
        assert_eq!(th.add(&l.from_int(2)).val().unwrap(), 1);
        // inverse of theta is theta/2
        let i = th.inv().unwrap();
        assert!(i.mul(&th).agrees_with(&l.one()));
        assert_eq!(i.val().unwrap(), -1);
        // residue of theta^2/2 is 1
        let r = th.mul(&th).div(&l.from_int(2)).unwrap().residue().unwrap();
        assert!(r.is_one());
    }

    #[test]
    fn eisenstein_rejects_non_eisenstein_polys() {
        let k = q2();
        assert!(matches!(
            ValuedField::eisenstein_int(&k, &[-8, 0]),
            Err(Error::NotEisenstein(_))
        )); // v(8) = 3
        assert!(matches!(
            ValuedField::eisenstein_int(&k, &[-1, 0]),
            Err(Error::NotEisenstein(_))
        )); // v(1) = 0
        assert!(matches!(
            ValuedField::eisenstein_int(&k, &[-2, 1]),
            Err(Error::NotEisenstein(_))
        )); // middle coefficient is a unit
        assert!(ValuedField::eisenstein_int(&k, &[-6, 2]).is_ok()); // X^2 + 2X - 6
    }

    #[test]
    fn eisenstein_cube_root_of_three() {
        let k = ValuedField::padic(3, 64).unwrap();
        let l = ValuedField::eisenstein_int(&k, &[-3, 0, 0]).unwrap(); // X^3 - 3
        assert_eq!(l.uniformizer().val().unwrap(), 1);
        assert_eq!(l.from_int(3).val().unwrap(), 3);
        assert_eq!(l.v_of_p(), Some(3));
        let u = l.uniformizer().pow(2).unwrap().add(&l.from_int(3));
        assert_eq!(u.val().unwrap(), 2);
        // (th^2 + 3)^-1 * (th^2 + 3) = 1
        let w = u.inv().unwrap().mul(&u);
        assert!(w.agrees_with(&l.one()));
    }

    #[test]
    fn gauss_valuation_and_residue() {
        let k = q2();
        let g = ValuedField::gauss(&k, &["x"]).unwrap();
        let x = g.var("x").unwrap();
        assert_eq!(x.val().unwrap(), 0);
        let rf = g.residue_field();
        assert_eq!(rf.to_string(), "RatFun(2,1;x)");
        assert_eq!(x.residue().unwrap(), rf.var("x").unwrap());
        // v(2x + 4) = 1 and (2x+4)/2 has residue x
        let a = g.from_int(2).mul(&x).add(&g.from_int(4));
        assert_eq!(a.val().unwrap(), 1);
        let r = a.div(&g.from_int(2)).unwrap().residue().unwrap();
        assert_eq!(r, rf.var("x").unwrap());
        // w = x / (1 + 2x): val 0, residue x
        let w = x.div(&g.one().add(&g.from_int(2).mul(&x))).unwrap();
        assert_eq!(w.val().unwrap(), 0);
        assert_eq!(w.residue().unwrap(), rf.var("x").unwrap());
    }

    #[test]
    fn gauss_lift_round_trip() {
        let k = q2();
        let g = ValuedField::gauss(&k, &["x"]).unwrap();
        let rf = g.residue_field();
        let x = rf.var("x").unwrap();
        // x^2 / (x + 1)
        let r = x.pow(2).unwrap().div(&x.add(&rf.one())).unwrap();
        let lifted = g.lift(&r).unwrap();
        assert_eq!(lifted.val().unwrap(), 0);
        assert_eq!(lifted.residue().unwrap(), r);
    }

    #[test]
    fn gauss_over_eisenstein_mixed_model() {
        let k = q2();
        let e = ValuedField::eisenstein_int(&k, &[-2, 0]).unwrap();
        let g = ValuedField::gauss(&e, &["y"]).unwrap();
        let y = g.var("y").unwrap();
        let th = g.inject(&e.uniformizer()).unwrap();
        // v(theta*y + 2) = 1 (theta coefficient dominates)
        let a = th.mul(&y).add(&g.from_int(2));
        assert_eq!(a.val().unwrap(), 1);
        // (theta*y + 2)/theta = y + theta, residue y
        let r = a.div(&th).unwrap().residue().unwrap();
        assert_eq!(r, g.residue_field().var("y").unwrap());
        assert_eq!(g.v_of_p(), Some(2));
    }

    #[test]
    fn gauss_over_laurent_char_p() {
        let rf = ResidueField::rational(2, 1, &["x"]).unwrap();
        let l = ValuedField::laurent(rf, 32).unwrap();
        let g = ValuedField::gauss(&l, &["y"]).unwrap();
        let y = g.var("y").unwrap();
        let t = g.uniformizer();
        let x = g.inject(&l.lift(&l.residue_field().var("x").unwrap()).unwrap()).unwrap();
        // v(t*y + x) = 0, residue x
        let a = t.mul(&y).add(&x);
        assert_eq!(a.val().unwrap(), 0);
        let grf = g.residue_field();
        assert_eq!(a.residue().unwrap(), grf.var("x").unwrap());
        // v(t*y + t*x) = 1, residue after /t is y + x
        let b = t.mul(&y).add(&t.mul(&x));
        assert_eq!(b.val().unwrap(), 1);
        let r = b.div(&t).unwrap().residue().unwrap();
        assert_eq!(r, grf.var("x").unwrap().add(&grf.var("y").unwrap()));
    }

    #[test]
    fn display_smoke() {
        let k = q2();
        assert_eq!(k.to_string(), "padic(2)");
        assert_eq!(k.zero().to_string(), "0");
        let e = ValuedField::eisenstein_int(&k, &[-2, 0]).unwrap();
        assert!(e.uniformizer().to_string().contains("th"));
        let g = ValuedField::gauss(&k, &["x"]).unwrap();
        assert!(g.var("x").unwrap().to_string().contains('x'));
    }
}
