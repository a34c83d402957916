//! Algebraic extensions of the valued base models: adjunction of a root of a
//! low-degree polynomial, norm-based valuation transfer, and the
//! totally-ramified / inertial / inseparable-residue trichotomy for degree-p
//! steps. Extensions stack into short towers (height at most 3), and every
//! tower level implements [`LocalField`], so Hensel lifting, normality
//! classification, and p-th power tests run unchanged on tower elements.

pub mod families;

use std::fmt;
use std::sync::Arc;

use num_integer::Integer;
use num_rational::Ratio;

use crate::error::{CResult, Error};
use crate::hensel::{hensel_root, poly_eval};
use crate::local::LocalField;
use crate::residue::{poly_roots, ResidueElement, ResidueField};
use crate::roots::field_roots;
use crate::valued::{ValView, ValuedField, VElem};

// ---------------------------------------------------------------------------
// classification outcome
// ---------------------------------------------------------------------------

/// How a finite extension sits over its base: value group growth against
/// residue field growth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExtClassification {
    /// e = n: the value group index accounts for the whole degree.
    TotallyRamified,
    /// e = 1 and the residue field grows by a separable extension of degree n.
    Inertial,
    /// e = 1 and the residue field grows by a purely inseparable extension
    /// (adjunction of a p-th root).
    InseparableResidue,
    /// Proper splitting between ramification and residue growth (only
    /// possible for composite degree, which towers report stepwise).
    Mixed { e: i64, fdeg: i64 },
}

impl ExtClassification {
    pub fn kind(&self) -> &'static str {
        match self {
            ExtClassification::TotallyRamified => "TotallyRamified",
            ExtClassification::Inertial => "Inertial",
            ExtClassification::InseparableResidue => "InseparableResidue",
            ExtClassification::Mixed { .. } => "Mixed",
        }
    }
}

// ---------------------------------------------------------------------------
// towers and their elements
// ---------------------------------------------------------------------------

/// A field that extensions can be built over: either one of the concrete
/// valued models or a previously built extension level.
#[derive(Clone)]
pub enum Tower {
    Model(ValuedField),
    Ext(Arc<ExtensionField>),
}

/// An element of a [`Tower`]: a model element at ground level, or a
/// coordinate vector over the base at an extension level.
#[derive(Clone, Debug)]
pub enum TElem {
    Model(VElem),
    Ext(ExtElem),
}

/// Coordinates of an extension element in the power basis 1, w, ..., w^(n-1)
/// of the generator w.
#[derive(Clone, Debug)]
pub struct ExtElem {
    field: Arc<ExtensionField>,
    coords: Vec<TElem>,
}

impl PartialEq for Tower {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Tower::Model(a), Tower::Model(b)) => a == b,
            (Tower::Ext(a), Tower::Ext(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

impl PartialEq for TElem {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (TElem::Model(a), TElem::Model(b)) => a == b,
            (TElem::Ext(a), TElem::Ext(b)) => {
                Arc::ptr_eq(&a.field, &b.field) && a.coords == b.coords
            }
            _ => false,
        }
    }
}

impl fmt::Display for TElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TElem::Model(a) => write!(f, "{a}"),
            TElem::Ext(a) => {
                let name = &a.field.gen_name;
                let mut first = true;
                for (i, c) in a.coords.iter().enumerate() {
                    if Tower::is_zero_coord(c) {
                        continue;
                    }
                    if !first {
                        write!(f, " + ")?;
                    }
                    first = false;
                    match i {
                        0 => write!(f, "({c})")?,
                        1 => write!(f, "({c})*{name}")?,
                        _ => write!(f, "({c})*{name}^{i}")?,
                    }
                }
                if first {
                    write!(f, "0")?;
                }
                Ok(())
            }
        }
    }
}

/// A root of a monic irreducible polynomial adjoined to a base tower,
/// with its ramification data computed once at construction time.
pub struct ExtensionField {
    base: Tower,
    /// Monic defining polynomial, ascending, length n+1, leading one.
    f: Vec<TElem>,
    n: usize,
    height: usize,
    class: ExtClassification,
    e: i64,
    fdeg: i64,
    /// Power-basis coordinates of a uniformizer.
    unif_coords: Vec<TElem>,
    /// Minimal polynomial over the base residue field of a residue generator,
    /// for the residue-extending cases (ascending residue coefficients).
    res_ext_minpoly: Option<Vec<ResidueElement>>,
    gen_name: String,
}

impl fmt::Display for ExtensionField {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(out, "{}[{}]/(", self.base, self.gen_name)?;
        for (i, c) in self.f.iter().enumerate().rev() {
            if i == self.n {
                write!(out, "{}^{}", self.gen_name, self.n)?;
            } else if !Tower::is_zero_coord(c) {
                if i == 0 {
                    write!(out, " + ({c})")?;
                } else {
                    write!(out, " + ({c})*{}^{}", self.gen_name, i)?;
                }
            }
        }
        write!(out, ")")
    }
}

impl fmt::Display for Tower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tower::Model(k) => write!(f, "{k}"),
            Tower::Ext(l) => write!(f, "{l}"),
        }
    }
}

impl fmt::Debug for Tower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tower({self})")
    }
}

impl fmt::Debug for ExtensionField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExtensionField({self})")
    }
}

impl Tower {
    pub fn model(k: &ValuedField) -> Tower {
        Tower::Model(k.clone())
    }

    pub fn height(&self) -> usize {
        match self {
            Tower::Model(_) => 0,
            Tower::Ext(l) => l.height,
        }
    }

    /// The ground model underneath all extension levels.
    pub fn ground(&self) -> &ValuedField {
        match self {
            Tower::Model(k) => k,
            Tower::Ext(l) => l.base.ground(),
        }
    }

    /// Does this element belong to this tower level?
    fn owns(&self, x: &TElem) -> bool {
        match (self, x) {
            (Tower::Model(k), TElem::Model(a)) => k == a.field(),
            (Tower::Ext(l), TElem::Ext(a)) => Arc::ptr_eq(l, &a.field),
            _ => false,
        }
    }

    fn is_zero_coord(x: &TElem) -> bool {
        match x {
            TElem::Model(a) => a.is_exact_zero(),
            TElem::Ext(a) => a.coords.iter().all(Tower::is_zero_coord),
        }
    }

    /// Embed a base-level element one level up (identity at ground level
    /// when the element already lives here).
    pub fn embed(&self, x: &TElem) -> TElem {
        match self {
            Tower::Model(_) => {
                debug_assert!(self.owns(x));
                x.clone()
            }
            Tower::Ext(l) => {
                debug_assert!(l.base.owns(x));
                let mut coords = vec![l.base.zero(); l.n];
                coords[0] = x.clone();
                TElem::Ext(ExtElem { field: l.clone(), coords })
            }
        }
    }

    /// Embed a ground-model element through every level of the tower.
    pub fn embed_ground(&self, x: &VElem) -> TElem {
        match self {
            Tower::Model(k) => {
                assert!(k == x.field(), "element from a different ground model");
                TElem::Model(x.clone())
            }
            Tower::Ext(l) => {
                let below = l.base.embed_ground(x);
                self.embed(&below)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// construction
// ---------------------------------------------------------------------------

/// Iteration budget for the unit-peeling classifier.
fn peel_budget(base: &Tower) -> usize {
    (LocalField::default_prec(base).max(8) as usize).min(256)
}

impl ExtensionField {
    /// Adjoin a root of the monic polynomial `f` (ascending coefficients,
    /// length n+1) of degree 2 or 3 over `base`. Irreducibility is verified
    /// by the absence of roots, which settles degrees up to 3.
    pub fn adjoin(base: &Tower, f: &[TElem]) -> CResult<Arc<ExtensionField>> {
        let n = f.len().saturating_sub(1);
        if !(2..=3).contains(&n) {
            return Err(Error::UnsupportedField(format!(
                "adjunction handles degrees 2 and 3, got {n}"
            )));
        }
        if base.height() + 1 > 3 {
            return Err(Error::TowerHeightExceeded(base.height() + 1));
        }
        for c in f {
            if !base.owns(c) {
                return Err(Error::MismatchedFields(
                    "defining polynomial coefficients must live in the base".into(),
                ));
            }
        }
        let lead_gap = LocalField::sub(base, &f[n], &LocalField::one(base));
        if !LocalField::is_exact_zero(base, &lead_gap) {
            return Err(Error::PreconditionViolated("defining polynomial must be monic".into()));
        }
        let roots = field_roots(base, f)?;
        if !roots.is_empty() {
            return Err(Error::NotIrreducible(format!(
                "degree-{n} polynomial has a root in the base"
            )));
        }
        Self::finish(base, f, n, None)
    }

    /// Adjoin a root of X^n - beta.
    pub fn adjoin_root_of(base: &Tower, beta: &TElem, n: usize) -> CResult<Arc<ExtensionField>> {
        let mut f = vec![LocalField::neg(base, beta)];
        f.extend(std::iter::repeat_with(|| LocalField::zero(base)).take(n.saturating_sub(1)));
        f.push(LocalField::one(base));
        Self::adjoin(base, &f)
    }

    /// Adjoin a root of the lift of a monic irreducible separable residue
    /// polynomial: an inertial extension by construction.
    pub fn lift_inertial(base: &Tower, ghat: &[ResidueElement]) -> CResult<Arc<ExtensionField>> {
        let n = ghat.len().saturating_sub(1);
        if !(2..=3).contains(&n) {
            return Err(Error::UnsupportedField(format!(
                "inertial lifts handle degrees 2 and 3, got {n}"
            )));
        }
        if base.height() + 1 > 3 {
            return Err(Error::TowerHeightExceeded(base.height() + 1));
        }
        if !ghat[n].is_one() {
            return Err(Error::PreconditionViolated("residue polynomial must be monic".into()));
        }
        if !poly_roots(ghat)?.is_empty() {
            return Err(Error::NotIrreducible("residue polynomial has a residue root".into()));
        }
        if residue_derivative(ghat).iter().all(|c| c.is_zero()) {
            return Err(Error::NotSeparable("residue polynomial has zero derivative".into()));
        }
        let f: Vec<TElem> =
            ghat.iter().map(|c| LocalField::lift(base, c)).collect::<CResult<_>>()?;
        let ext = Constructed {
            class: ExtClassification::Inertial,
            e: 1,
            fdeg: n as i64,
            eta: None,
            res_ext_minpoly: Some(ghat.to_vec()),
        };
        Self::finish(base, &f, n, Some(ext))
    }

    fn finish(
        base: &Tower,
        f: &[TElem],
        n: usize,
        precomputed: Option<Constructed>,
    ) -> CResult<Arc<ExtensionField>> {
        let height = base.height() + 1;
        let gen_name = match height {
            1 => "w".to_string(),
            h => format!("w{h}"),
        };
        let mut ext = ExtensionField {
            base: base.clone(),
            f: f.to_vec(),
            n,
            height,
            class: ExtClassification::Mixed { e: 1, fdeg: 1 },
            e: 1,
            fdeg: 1,
            unif_coords: vec![],
            res_ext_minpoly: None,
            gen_name,
        };
        let data = match precomputed {
            Some(d) => d,
            None => classify_by_peeling(&ext)?,
        };
        ext.class = data.class;
        ext.e = data.e;
        ext.fdeg = data.fdeg;
        ext.res_ext_minpoly = data.res_ext_minpoly;
        ext.unif_coords = uniformizer_coords(&ext, data.eta)?;
        Ok(Arc::new(ext))
    }

    pub fn base(&self) -> &Tower {
        &self.base
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn classification(&self) -> &ExtClassification {
        &self.class
    }

    pub fn ram_degree(&self) -> i64 {
        self.e
    }

    pub fn residue_degree(&self) -> i64 {
        self.fdeg
    }

    /// Minimal polynomial over the base residue field of the residue
    /// generator, when the residue field grows.
    pub fn residue_ext_minpoly(&self) -> Option<&[ResidueElement]> {
        self.res_ext_minpoly.as_deref()
    }

    pub fn defining_poly(&self) -> &[TElem] {
        &self.f
    }

    pub fn gen_name(&self) -> &str {
        &self.gen_name
    }

    /// The adjoined root as an element.
    pub fn gen(self: &Arc<Self>) -> TElem {
        let mut coords = vec![self.base.zero(); self.n];
        coords[1] = self.base.one();
        TElem::Ext(ExtElem { field: self.clone(), coords })
    }

    fn elem(self: &Arc<Self>, coords: Vec<TElem>) -> TElem {
        debug_assert_eq!(coords.len(), self.n);
        TElem::Ext(ExtElem { field: self.clone(), coords })
    }

    fn coords_of<'a>(&self, x: &'a TElem) -> &'a [TElem] {
        match x {
            TElem::Ext(a) => &a.coords,
            TElem::Model(_) => panic!("extension operation applied to a ground element"),
        }
    }

    /// The field norm down to the base: the determinant of the
    /// multiplication matrix of `x` in the power basis.
    pub fn norm(&self, x: &TElem) -> TElem {
        let m = self.mul_matrix(self.coords_of(x));
        det(&self.base, &m)
    }

    /// Valuation of `x` in base-normalized units: val(norm)/n, a rational
    /// in (1/e)Z.
    pub fn ext_val(&self, x: &TElem) -> CResult<Ratio<i64>> {
        let nrm = self.norm(x);
        match LocalField::val_view(&self.base, &nrm) {
            ValView::Exact(v) => Ok(Ratio::new(v, self.n as i64)),
            ValView::AtLeast(b) => Err(Error::prec("extension valuation via the norm", b)),
            ValView::Infinite => {
                Err(Error::PreconditionViolated("valuation of zero is infinite".into()))
            }
        }
    }

    /// Characteristic polynomial of `x` over the base (ascending, monic,
    /// length n+1), computed by expanding det(Y·I - M_x) over permutations.
    /// No division happens, so residual characteristic p is safe.
    pub fn charpoly(&self, x: &TElem) -> Vec<TElem> {
        let m = self.mul_matrix(self.coords_of(x));
        charpoly_from_matrix(&self.base, &m)
    }

    /// Columns of the multiplication-by-x matrix in the power basis.
    fn mul_matrix(&self, coords: &[TElem]) -> Vec<Vec<TElem>> {
        let mut cols = Vec::with_capacity(self.n);
        let mut cur = coords.to_vec();
        for j in 0..self.n {
            cols.push(cur.clone());
            if j + 1 < self.n {
                cur = self.shift_by_gen(&cur);
            }
        }
        cols
    }

    /// Multiply a coordinate vector by the generator, reducing by f.
    fn shift_by_gen(&self, coords: &[TElem]) -> Vec<TElem> {
        let b = &self.base;
        let top = coords[self.n - 1].clone();
        let mut out = vec![LocalField::zero(b); self.n];
        for i in 1..self.n {
            out[i] = coords[i - 1].clone();
        }
        for (i, slot) in out.iter_mut().enumerate() {
            let drop = LocalField::mul(b, &top, &self.f[i]);
            *slot = LocalField::sub(b, slot, &drop);
        }
        out
    }

    fn add_elem(&self, a: &[TElem], b: &[TElem]) -> Vec<TElem> {
        a.iter().zip(b).map(|(x, y)| LocalField::add(&self.base, x, y)).collect()
    }

    fn sub_elem(&self, a: &[TElem], b: &[TElem]) -> Vec<TElem> {
        a.iter().zip(b).map(|(x, y)| LocalField::sub(&self.base, x, y)).collect()
    }

    fn neg_elem(&self, a: &[TElem]) -> Vec<TElem> {
        a.iter().map(|x| LocalField::neg(&self.base, x)).collect()
    }

    fn mul_elem(&self, a: &[TElem], b: &[TElem]) -> Vec<TElem> {
        let bfield = &self.base;
        let mut raw = vec![LocalField::zero(bfield); 2 * self.n - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                let prod = LocalField::mul(bfield, x, y);
                raw[i + j] = LocalField::add(bfield, &raw[i + j], &prod);
            }
        }
        // reduce degrees n..2n-2 by w^n = -(f_0 + ... + f_{n-1} w^{n-1})
        for d in (self.n..raw.len()).rev() {
            let top = raw[d].clone();
            raw[d] = LocalField::zero(bfield);
            for i in 0..self.n {
                let drop = LocalField::mul(bfield, &top, &self.f[i]);
                raw[d - self.n + i] = LocalField::sub(bfield, &raw[d - self.n + i], &drop);
            }
        }
        raw.truncate(self.n);
        raw
    }

    /// Multiplicative inverse via the characteristic polynomial: from
    /// x^n + c_{n-1} x^{n-1} + ... + c_0 = 0, the inverse is
    /// -(x^{n-1} + c_{n-1} x^{n-2} + ... + c_1)/c_0.
    fn inv_elem(self: &Arc<Self>, x: &TElem) -> CResult<TElem> {
        let coords = self.coords_of(x);
        if coords.iter().all(Tower::is_zero_coord) {
            return Err(Error::DivisionByZero);
        }
        let h = {
            let m = self.mul_matrix(coords);
            charpoly_from_matrix(&self.base, &m)
        };
        let c0_inv = LocalField::inv(&self.base, &h[0])?;
        // horner-style accumulation of x^{n-1} + c_{n-1} x^{n-2} + ... + c_1
        let mut acc = vec![LocalField::zero(&self.base); self.n];
        acc[0] = LocalField::one(&self.base);
        for k in (1..self.n).rev() {
            acc = self.mul_elem(&acc, coords);
            acc[0] = LocalField::add(&self.base, &acc[0], &h[k]);
        }
        let scaled: Vec<TElem> = acc
            .iter()
            .map(|c| {
                let t = LocalField::mul(&self.base, c, &c0_inv);
                LocalField::neg(&self.base, &t)
            })
            .collect();
        Ok(self.elem(scaled))
    }

    fn val_view_elem(&self, x: &TElem) -> ValView {
        let nrm = self.norm(x);
        let e = self.e;
        let n = self.n as i64;
        match LocalField::val_view(&self.base, &nrm) {
            ValView::Infinite => ValView::Infinite,
            ValView::Exact(v) => {
                let scaled = v * e;
                assert!(
                    scaled % n == 0,
                    "norm valuation {v} inconsistent with ramification data e={e}, n={n}"
                );
                ValView::Exact(scaled / n)
            }
            ValView::AtLeast(b) => ValView::AtLeast(num_integer::Integer::div_ceil(&(b * e), &n)),
        }
    }

    /// Residue of a unit via its characteristic polynomial: the residue
    /// charpoly of an element whose residue lies in the base residue field
    /// must be (X - r)^n; recover r and verify.
    fn residue_unit(&self, x: &TElem) -> CResult<ResidueElement> {
        let h = self.charpoly(x);
        let hres: Vec<ResidueElement> =
            h.iter().map(|c| LocalField::residue(&self.base, c)).collect::<CResult<_>>()?;
        let rf = hres[0].field().clone();
        let n = self.n as i64;
        let p = LocalField::p(&self.base) as i64;
        let r = if n % p == 0 {
            // (X - r)^n with n = p: middle coefficients must vanish and the
            // constant term is (-r)^p
            for c in &hres[1..self.n] {
                if !c.is_zero() {
                    return Err(Error::UnsupportedField(
                        "residue lies outside the base residue field".into(),
                    ));
                }
            }
            let target = if p % 2 == 0 { hres[0].clone() } else { hres[0].neg() };
            target.pth_power_root().ok_or_else(|| {
                Error::UnsupportedField("residue lies outside the base residue field".into())
            })?
        } else {
            // characteristic does not divide n: r = -c_{n-1}/n
            let n_in_rf = rf.from_int(n);
            hres[self.n - 1].neg().div(&n_in_rf)?
        };
        // verify (X - r)^n matches the residue charpoly
        let mut pw = vec![rf.one()];
        for _ in 0..self.n {
            let mut next = vec![rf.zero(); pw.len() + 1];
            for (i, c) in pw.iter().enumerate() {
                next[i + 1] = next[i + 1].add(c);
                next[i] = next[i].sub(&c.mul(&r));
            }
            pw = next;
        }
        if pw != hres {
            return Err(Error::UnsupportedField(
                "residue lies outside the base residue field".into(),
            ));
        }
        Ok(r)
    }
}

/// Precomputed classification data handed to `finish` by construction routes
/// that already know the answer.
struct Constructed {
    class: ExtClassification,
    e: i64,
    fdeg: i64,
    /// Element of fractional valuation witnessing total ramification
    /// (coordinates in the power basis), when there is one.
    eta: Option<Vec<TElem>>,
    res_ext_minpoly: Option<Vec<ResidueElement>>,
}

/// Formal derivative of a residue polynomial.
fn residue_derivative(g: &[ResidueElement]) -> Vec<ResidueElement> {
    g.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c.mul(&c.field().from_int(i as i64)))
        .collect()
}

/// The unit-peeling classifier for a freshly adjoined root. Walks the ladder
/// theta -> theta/pi^w - r until the valuation leaves the base value group
/// (totally ramified), the residue charpoly becomes irreducible separable
/// (inertial), or it becomes X^p - c with c not a p-th power (inseparable
/// residue growth).
fn classify_by_peeling(ext: &ExtensionField) -> CResult<Constructed> {
    let base = &ext.base;
    let n = ext.n;
    let ni = n as i64;
    let p = LocalField::p(base) as i64;

    // Eisenstein fast path: the generator itself has valuation 1/n.
    if is_eisenstein(base, &ext.f).unwrap_or(false) {
        let mut eta = vec![LocalField::zero(base); n];
        eta[1] = LocalField::one(base);
        return Ok(Constructed {
            class: ExtClassification::TotallyRamified,
            e: ni,
            fdeg: 1,
            eta: Some(eta),
            res_ext_minpoly: None,
        });
    }

    // work on raw coordinate vectors to avoid needing the Arc
    let mut theta = vec![LocalField::zero(base); n];
    theta[1] = LocalField::one(base);

    for _ in 0..peel_budget(base) {
        let nrm = det(base, &ext.mul_matrix(&theta));
        let w_num = match LocalField::val_view(base, &nrm) {
            ValView::Exact(v) => v,
            ValView::AtLeast(b) => {
                return Err(Error::UnclassifiableAtPrecision(format!(
                    "norm valuation only bounded below by {b}"
                )))
            }
            ValView::Infinite => {
                return Err(Error::UnclassifiableAtPrecision(
                    "peeling reached an exact zero; the defining polynomial was reducible".into(),
                ))
            }
        };
        if w_num % ni != 0 {
            // fractional valuation: the value group grows by a full factor n
            return Ok(Constructed {
                class: ExtClassification::TotallyRamified,
                e: ni,
                fdeg: 1,
                eta: Some(theta),
                res_ext_minpoly: None,
            });
        }
        let w = w_num / ni;
        // u = theta / pi^w is a unit
        let piw = LocalField::pow(base, &LocalField::uniformizer(base), w)?;
        let piw_inv = LocalField::inv(base, &piw)?;
        let u: Vec<TElem> = theta.iter().map(|c| LocalField::mul(base, c, &piw_inv)).collect();
        let h = charpoly_from_matrix(base, &ext.mul_matrix(&u));
        let hres: Vec<ResidueElement> =
            h.iter().map(|c| LocalField::residue(base, c)).collect::<CResult<_>>()?;
        let deriv = residue_derivative(&hres);
        let deriv_zero = deriv.iter().all(|c| c.is_zero());
        if deriv_zero && ni == p {
            // X^p - c: either peel (c a p-th power) or inseparable growth
            let c = if p % 2 == 0 { hres[0].clone() } else { hres[0].neg() };
            match c.pth_power_root() {
                Some(r) => {
                    let lifted = LocalField::lift(base, &r)?;
                    theta = u;
                    theta[0] = LocalField::sub(base, &theta[0], &lifted);
                    continue;
                }
                None => {
                    let rf = hres[0].field().clone();
                    let mut minpoly = vec![rf.zero(); n + 1];
                    minpoly[0] = c.neg();
                    minpoly[n] = rf.one();
                    return Ok(Constructed {
                        class: ExtClassification::InseparableResidue,
                        e: 1,
                        fdeg: ni,
                        eta: None,
                        res_ext_minpoly: Some(minpoly),
                    });
                }
            }
        }
        let roots = poly_roots(&hres)?;
        if roots.is_empty() {
            // rootless of degree <= 3 means irreducible; with a nonzero
            // derivative it is separable: residue field grows inertially
            return Ok(Constructed {
                class: ExtClassification::Inertial,
                e: 1,
                fdeg: ni,
                eta: None,
                res_ext_minpoly: Some(hres),
            });
        }
        // a residue root of an irreducible charpoly must be total: (X - r)^n
        let full = roots.iter().find(|r| {
            let mut pw = vec![r.field().one()];
            for _ in 0..n {
                let mut next = vec![r.field().zero(); pw.len() + 1];
                for (i, c) in pw.iter().enumerate() {
                    next[i + 1] = next[i + 1].add(c);
                    next[i] = next[i].sub(&c.mul(r));
                }
                pw = next;
            }
            pw == hres
        });
        match full {
            Some(r) => {
                let lifted = LocalField::lift(base, r)?;
                theta = u;
                theta[0] = LocalField::sub(base, &theta[0], &lifted);
            }
            None => {
                // a simple residue root would have lifted to a base root of
                // the defining polynomial, contradicting irreducibility
                return Err(Error::UnclassifiableAtPrecision(
                    "residue charpoly acquired a partial factorization".into(),
                ));
            }
        }
    }
    Err(Error::UnclassifiableAtPrecision("unit peeling exhausted its budget".into()))
}

/// Coordinates of a uniformizer: base uniformizer when e = 1, otherwise
/// eta^a * pi^b with a·v(eta) + b·e = 1 by Bezout.
fn uniformizer_coords(ext: &ExtensionField, eta: Option<Vec<TElem>>) -> CResult<Vec<TElem>> {
    let base = &ext.base;
    if ext.e == 1 {
        let mut coords = vec![LocalField::zero(base); ext.n];
        coords[0] = LocalField::uniformizer(base);
        return Ok(coords);
    }
    let eta = eta.expect("totally ramified classification must supply a witness");
    // valuation of eta in the extension-normalized group (e * ext_val)
    let nrm = det(base, &ext.mul_matrix(&eta));
    let v_nrm = match LocalField::val_view(base, &nrm) {
        ValView::Exact(v) => v,
        _ => {
            return Err(Error::UnclassifiableAtPrecision(
                "uniformizer witness valuation not exact".into(),
            ))
        }
    };
    let v_eta = v_nrm * ext.e / (ext.n as i64);
    let gcd = v_eta.extended_gcd(&ext.e);
    debug_assert_eq!(gcd.gcd, 1);
    let (a, b) = (gcd.x, gcd.y);
    // eta^a computed inside the extension, pi^b in the base
    let mut acc = vec![LocalField::zero(base); ext.n];
    acc[0] = LocalField::one(base);
    let pos = ext.pow_coords(&eta, a.unsigned_abs())?;
    let pos = if a < 0 { ext.inv_coords(&pos)? } else { pos };
    acc = ext.mul_elem(&acc, &pos);
    let pib = LocalField::pow(base, &LocalField::uniformizer(base), b)?;
    Ok(acc.iter().map(|c| LocalField::mul(base, c, &pib)).collect())
}

impl ExtensionField {
    fn pow_coords(&self, x: &[TElem], mut k: u64) -> CResult<Vec<TElem>> {
        let mut acc = vec![LocalField::zero(&self.base); self.n];
        acc[0] = LocalField::one(&self.base);
        let mut sq = x.to_vec();
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul_elem(&acc, &sq);
            }
            k >>= 1;
            if k > 0 {
                sq = self.mul_elem(&sq, &sq);
            }
        }
        Ok(acc)
    }

    /// Inverse on raw coordinates (used before the Arc exists).
    fn inv_coords(&self, x: &[TElem]) -> CResult<Vec<TElem>> {
        if x.iter().all(Tower::is_zero_coord) {
            return Err(Error::DivisionByZero);
        }
        // A base-field element inverts coordinate-wise; the general route
        // below would return c/c^n and inflate fraction coordinates for no
        // benefit.
        if x[1..].iter().all(Tower::is_zero_coord) {
            let mut out = vec![LocalField::zero(&self.base); self.n];
            out[0] = LocalField::inv(&self.base, &x[0])?;
            return Ok(out);
        }
        let h = charpoly_from_matrix(&self.base, &self.mul_matrix(x));
        let c0_inv = LocalField::inv(&self.base, &h[0])?;
        let mut acc = vec![LocalField::zero(&self.base); self.n];
        acc[0] = LocalField::one(&self.base);
        for k in (1..self.n).rev() {
            acc = self.mul_elem(&acc, x);
            acc[0] = LocalField::add(&self.base, &acc[0], &h[k]);
        }
        Ok(acc
            .iter()
            .map(|c| {
                let t = LocalField::mul(&self.base, c, &c0_inv);
                LocalField::neg(&self.base, &t)
            })
            .collect())
    }
}

// ---------------------------------------------------------------------------
// determinants and characteristic polynomials (n <= 3, permutation expansion)
// ---------------------------------------------------------------------------

const PERMS_2: [([usize; 2], i64); 2] = [([0, 1], 1), ([1, 0], -1)];
const PERMS_3: [([usize; 3], i64); 6] = [
    ([0, 1, 2], 1),
    ([1, 2, 0], 1),
    ([2, 0, 1], 1),
    ([0, 2, 1], -1),
    ([2, 1, 0], -1),
    ([1, 0, 2], -1),
];

/// Determinant of a small matrix given by columns.
fn det<F: LocalField>(k: &F, cols: &[Vec<F::Elem>]) -> F::Elem {
    let n = cols.len();
    let entry = |row: usize, col: usize| &cols[col][row];
    let term = |perm: &[usize], sign: i64| {
        let mut t = k.one();
        for (col, &row) in perm.iter().enumerate() {
            t = k.mul(&t, entry(row, col));
        }
        if sign < 0 {
            k.neg(&t)
        } else {
            t
        }
    };
    match n {
        1 => cols[0][0].clone(),
        2 => {
            let mut acc = k.zero();
            for (perm, sign) in PERMS_2 {
                acc = k.add(&acc, &term(&perm, sign));
            }
            acc
        }
        3 => {
            let mut acc = k.zero();
            for (perm, sign) in PERMS_3 {
                acc = k.add(&acc, &term(&perm, sign));
            }
            acc
        }
        _ => unreachable!("towers cap the degree at 3"),
    }
}

/// det(Y·I - M) expanded over permutations, as ascending coefficients in Y.
/// Entries are degree-<=1 polynomials; products never divide, so this works
/// in any residual characteristic.
fn charpoly_from_matrix<F: LocalField>(k: &F, cols: &[Vec<F::Elem>]) -> Vec<F::Elem> {
    let n = cols.len();
    // entry (row, col) of Y·I - M as [constant, linear] coefficients
    let entry = |row: usize, col: usize| -> [F::Elem; 2] {
        let c = k.neg(&cols[col][row]);
        let lin = if row == col { k.one() } else { k.zero() };
        [c, lin]
    };
    let mul_poly = |a: &[F::Elem], b: &[F::Elem]| -> Vec<F::Elem> {
        let mut out = vec![k.zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                let prod = k.mul(x, y);
                out[i + j] = k.add(&out[i + j], &prod);
            }
        }
        out
    };
    let mut acc = vec![k.zero(); n + 1];
    let mut add_term = |perm: &[usize], sign: i64| {
        let mut t: Vec<F::Elem> = vec![k.one()];
        for (col, &row) in perm.iter().enumerate() {
            t = mul_poly(&t, &entry(row, col));
        }
        for (i, c) in t.into_iter().enumerate() {
            let c = if sign < 0 { k.neg(&c) } else { c };
            acc[i] = k.add(&acc[i], &c);
        }
    };
    match n {
        1 => {
            acc[0] = k.neg(&cols[0][0]);
            acc[1] = k.one();
        }
        2 => {
            for (perm, sign) in PERMS_2 {
                add_term(&perm, sign);
            }
        }
        3 => {
            for (perm, sign) in PERMS_3 {
                add_term(&perm, sign);
            }
        }
        _ => unreachable!("towers cap the degree at 3"),
    }
    acc
}

// ---------------------------------------------------------------------------
// LocalField for towers
// ---------------------------------------------------------------------------

impl LocalField for Tower {
    type Elem = TElem;

    fn p(&self) -> u64 {
        self.ground().p()
    }

    fn char_zero(&self) -> bool {
        self.ground().char_zero()
    }

    fn v_of_p(&self) -> Option<i64> {
        match self {
            Tower::Model(k) => k.v_of_p(),
            Tower::Ext(l) => l.base.v_of_p().map(|v| v * l.e),
        }
    }

    fn residue_field(&self) -> ResidueField {
        match self {
            Tower::Model(k) => k.residue_field(),
            Tower::Ext(l) => {
                let below = l.base.residue_field();
                match l.class {
                    ExtClassification::Inertial => {
                        let d = below.coeff_degree() * l.fdeg as usize;
                        let vars: Vec<&str> = below.vars().iter().map(|s| s.as_str()).collect();
                        if vars.is_empty() {
                            ResidueField::finite(below.p(), d)
                                .expect("inertial residue extension descriptor")
                        } else {
                            ResidueField::rational(below.p(), d, &vars)
                                .expect("inertial residue extension descriptor")
                        }
                    }
                    // totally ramified: same residue field; inseparable
                    // growth: arithmetic stays in the base residue field and
                    // elements outside it are reported unsupported
                    _ => below,
                }
            }
        }
    }

    fn default_prec(&self) -> i64 {
        match self {
            Tower::Model(k) => k.default_prec(),
            Tower::Ext(l) => LocalField::default_prec(&l.base) * l.e,
        }
    }

    fn zero(&self) -> TElem {
        match self {
            Tower::Model(k) => TElem::Model(k.zero()),
            Tower::Ext(l) => l.elem(vec![LocalField::zero(&l.base); l.n]),
        }
    }

    fn one(&self) -> TElem {
        match self {
            Tower::Model(k) => TElem::Model(k.one()),
            Tower::Ext(l) => {
                let mut coords = vec![LocalField::zero(&l.base); l.n];
                coords[0] = LocalField::one(&l.base);
                l.elem(coords)
            }
        }
    }

    fn from_int(&self, n: i64) -> TElem {
        match self {
            Tower::Model(k) => TElem::Model(k.from_int(n)),
            Tower::Ext(l) => {
                let mut coords = vec![LocalField::zero(&l.base); l.n];
                coords[0] = LocalField::from_int(&l.base, n);
                l.elem(coords)
            }
        }
    }

    fn uniformizer(&self) -> TElem {
        match self {
            Tower::Model(k) => TElem::Model(k.uniformizer()),
            Tower::Ext(l) => l.elem(l.unif_coords.clone()),
        }
    }

    fn lift(&self, r: &ResidueElement) -> CResult<TElem> {
        match self {
            Tower::Model(k) => Ok(TElem::Model(k.lift(r)?)),
            Tower::Ext(l) => {
                let below = l.base.residue_field();
                if r.field() != &below {
                    return Err(Error::UnsupportedField(
                        "lifting from an extended residue field".into(),
                    ));
                }
                let lifted = LocalField::lift(&l.base, r)?;
                Ok(self.embed(&lifted))
            }
        }
    }

    fn add(&self, a: &TElem, b: &TElem) -> TElem {
        match (self, a, b) {
            (Tower::Model(_), TElem::Model(x), TElem::Model(y)) => TElem::Model(x.add(y)),
            (Tower::Ext(l), TElem::Ext(x), TElem::Ext(y)) => {
                l.elem(l.add_elem(&x.coords, &y.coords))
            }
            _ => panic!("tower elements from different levels"),
        }
    }

    fn sub(&self, a: &TElem, b: &TElem) -> TElem {
        match (self, a, b) {
            (Tower::Model(_), TElem::Model(x), TElem::Model(y)) => TElem::Model(x.sub(y)),
            (Tower::Ext(l), TElem::Ext(x), TElem::Ext(y)) => {
                l.elem(l.sub_elem(&x.coords, &y.coords))
            }
            _ => panic!("tower elements from different levels"),
        }
    }

    fn mul(&self, a: &TElem, b: &TElem) -> TElem {
        match (self, a, b) {
            (Tower::Model(_), TElem::Model(x), TElem::Model(y)) => TElem::Model(x.mul(y)),
            (Tower::Ext(l), TElem::Ext(x), TElem::Ext(y)) => {
                l.elem(l.mul_elem(&x.coords, &y.coords))
            }
            _ => panic!("tower elements from different levels"),
        }
    }

    fn neg(&self, a: &TElem) -> TElem {
        match (self, a) {
            (Tower::Model(_), TElem::Model(x)) => TElem::Model(x.neg()),
            (Tower::Ext(l), TElem::Ext(x)) => l.elem(l.neg_elem(&x.coords)),
            _ => panic!("tower elements from different levels"),
        }
    }

    fn inv(&self, a: &TElem) -> CResult<TElem> {
        match (self, a) {
            (Tower::Model(_), TElem::Model(x)) => Ok(TElem::Model(x.inv()?)),
            (Tower::Ext(l), TElem::Ext(_)) => l.inv_elem(a),
            _ => panic!("tower elements from different levels"),
        }
    }

    fn val_view(&self, a: &TElem) -> ValView {
        match (self, a) {
            (Tower::Model(_), TElem::Model(x)) => x.val_view(),
            (Tower::Ext(l), TElem::Ext(_)) => l.val_view_elem(a),
            _ => panic!("tower elements from different levels"),
        }
    }

    fn residue(&self, a: &TElem) -> CResult<ResidueElement> {
        match (self, a) {
            (Tower::Model(_), TElem::Model(x)) => x.residue(),
            (Tower::Ext(l), TElem::Ext(_)) => {
                let rf = self.residue_field();
                match l.val_view_elem(a) {
                    ValView::Infinite => Ok(rf.zero()),
                    ValView::Exact(v) if v > 0 => Ok(rf.zero()),
                    ValView::Exact(v) if v < 0 => Err(Error::NotAUnit {
                        val: Ratio::from_integer(v),
                    }),
                    ValView::Exact(_) => {
                        let r = l.residue_unit(a)?;
                        if r.field() == &rf {
                            Ok(r)
                        } else {
                            r.field().embed(&r, &rf)
                        }
                    }
                    ValView::AtLeast(b) => {
                        if b > 0 {
                            Ok(rf.zero())
                        } else {
                            Err(Error::prec("residue of an imprecise element", b))
                        }
                    }
                }
            }
            _ => panic!("tower elements from different levels"),
        }
    }

    fn is_exact_zero(&self, a: &TElem) -> bool {
        Tower::is_zero_coord(a)
    }

    fn as_model(&self) -> Option<&ValuedField> {
        match self {
            Tower::Model(k) => Some(k),
            Tower::Ext(_) => None,
        }
    }

    fn model_elem(&self, x: &TElem) -> Option<VElem> {
        match (self, x) {
            (Tower::Model(_), TElem::Model(a)) => Some(a.clone()),
            _ => None,
        }
    }

    fn from_model_elem(&self, x: VElem) -> Option<TElem> {
        match self {
            Tower::Model(_) => Some(TElem::Model(x)),
            Tower::Ext(_) => None,
        }
    }
}

// ---------------------------------------------------------------------------
// degree-p classification front end
// ---------------------------------------------------------------------------

/// The trichotomy for a degree-p step, read off the construction-time cache.
/// The defectless identity e·fdeg = p is re-audited on every call.
pub fn classify_deg_p_ext(l: &ExtensionField) -> CResult<ExtClassification> {
    let p = LocalField::p(&l.base) as usize;
    if l.n != p {
        return Err(Error::PreconditionViolated(format!(
            "classification applies to degree-p steps; degree is {} and p is {p}",
            l.n
        )));
    }
    if l.e * l.fdeg != l.n as i64 {
        return Err(Error::CheckFailed(format!(
            "ramification bookkeeping violated: e={} fdeg={} degree={}",
            l.e, l.fdeg, l.n
        )));
    }
    Ok(l.class.clone())
}

// ---------------------------------------------------------------------------
// Eisenstein machinery
// ---------------------------------------------------------------------------

/// Is a monic polynomial Eisenstein: integral coefficients, positive
/// valuation below the leading one, constant term of valuation exactly 1?
pub fn is_eisenstein<F: LocalField>(k: &F, f: &[F::Elem]) -> CResult<bool> {
    let n = f.len().saturating_sub(1);
    if n == 0 {
        return Err(Error::PreconditionViolated("constant polynomial".into()));
    }
    let lead_gap = k.sub(&f[n], &k.one());
    if !k.is_exact_zero(&lead_gap) {
        return Err(Error::PreconditionViolated("polynomial must be monic".into()));
    }
    for c in f.iter().take(n) {
        match k.val_view(c) {
            ValView::Infinite => {}
            ValView::Exact(v) => {
                if v < 0 {
                    return Err(Error::PreconditionViolated(
                        "coefficients must be integral".into(),
                    ));
                }
            }
            ValView::AtLeast(b) => {
                if b <= 0 {
                    return Err(Error::prec("Eisenstein coefficient test", b));
                }
            }
        }
    }
    // non-leading coefficients need v > 0, the constant needs v = 1
    for c in f.iter().take(n).skip(1) {
        match k.val_view(c) {
            ValView::Infinite => {}
            ValView::Exact(v) if v > 0 => {}
            ValView::Exact(_) => return Ok(false),
            ValView::AtLeast(b) if b > 0 => {}
            ValView::AtLeast(b) => return Err(Error::prec("Eisenstein coefficient test", b)),
        }
    }
    match k.val_view(&f[0]) {
        ValView::Exact(1) => Ok(true),
        ValView::Exact(_) | ValView::Infinite => Ok(false),
        ValView::AtLeast(b) if b > 1 => Ok(false),
        ValView::AtLeast(b) => Err(Error::prec("Eisenstein constant term", b)),
    }
}

/// Reinterpret an Eisenstein polynomial with integer coefficients (Eisenstein
/// for the p-adic valuation on the rationals) over a larger field and adjoin.
/// Requires the value-group index, the valuation of p in the target, to be
/// prime to p; the reinterpreted polynomial must still be Eisenstein.
pub fn eisenstein_transfer(k: &Tower, int_coeffs: &[i64]) -> CResult<Arc<ExtensionField>> {
    let p = LocalField::p(k) as i64;
    let n = int_coeffs.len().saturating_sub(1);
    if !(2..=3).contains(&n) {
        return Err(Error::UnsupportedField(format!("transfer handles degrees 2 and 3, got {n}")));
    }
    if int_coeffs[n] != 1 {
        return Err(Error::PreconditionViolated("polynomial must be monic".into()));
    }
    let padic_val = |m: i64| -> u32 {
        let mut m = m.unsigned_abs();
        let mut v = 0;
        while m != 0 && m % (p as u64) == 0 {
            m /= p as u64;
            v += 1;
        }
        v
    };
    for &c in &int_coeffs[1..n] {
        if c != 0 && padic_val(c) == 0 {
            return Err(Error::NotEisenstein("a middle coefficient is a unit".into()));
        }
    }
    if int_coeffs[0] == 0 || padic_val(int_coeffs[0]) != 1 {
        return Err(Error::NotEisenstein(format!(
            "constant term {} does not have valuation 1 for the {p}-adic valuation",
            int_coeffs[0]
        )));
    }
    let index = k
        .v_of_p()
        .ok_or_else(|| Error::WrongCharacteristic("transfer needs characteristic zero".into()))?;
    if index % p == 0 {
        return Err(Error::IndexDivisible(format!(
            "v(p) = {index} in the target is divisible by p = {p}"
        )));
    }
    let f: Vec<TElem> = int_coeffs.iter().map(|&c| k.from_int(c)).collect();
    if !is_eisenstein(k, &f)? {
        return Err(Error::NotEisenstein(
            "reinterpreted polynomial is not Eisenstein over the target".into(),
        ));
    }
    let ext = ExtensionField::adjoin(k, &f)?;
    if ext.class != ExtClassification::TotallyRamified {
        return Err(Error::CheckFailed(
            "transferred Eisenstein polynomial must generate a totally ramified step".into(),
        ));
    }
    Ok(ext)
}

// ---------------------------------------------------------------------------
// Artin-Schreier machinery (equal characteristic p)
// ---------------------------------------------------------------------------

/// Adjoin a root of X^p - X - c in characteristic p, for c of negative
/// valuation prime to p. Such a step is totally ramified of degree p.
pub fn artin_schreier_adjoin(base: &Tower, c: &TElem) -> CResult<Arc<ExtensionField>> {
    let p = LocalField::p(base) as i64;
    if base.char_zero() {
        return Err(Error::WrongCharacteristic(
            "Artin-Schreier adjunction lives in characteristic p".into(),
        ));
    }
    if base.height() + 1 > 3 {
        return Err(Error::TowerHeightExceeded(base.height() + 1));
    }
    let v = base.val(c)?;
    if v >= 0 || v % p == 0 {
        return Err(Error::PreconditionViolated(format!(
            "the right side must have negative valuation prime to p, got v = {v}"
        )));
    }
    let mut f = vec![base.neg(c), base.neg(&base.one())];
    f.extend(std::iter::repeat_with(|| base.zero()).take((p - 2).max(0) as usize));
    f.push(base.one());
    debug_assert_eq!(f.len() as i64, p + 1);
    // newton slope -v/p is fractional, so the step is totally ramified and
    // the root itself witnesses the fractional valuation
    let n = p as usize;
    let mut eta = vec![base.zero(); n];
    eta[1] = base.one();
    let data = Constructed {
        class: ExtClassification::TotallyRamified,
        e: p,
        fdeg: 1,
        eta: Some(eta),
        res_ext_minpoly: None,
    };
    ExtensionField::finish(base, &f, n, Some(data))
}

/// Membership in the image of the map w -> w^p - w. Values of image elements
/// lie in pZ_{<0} or Z_{>=0}; the test peels leading terms until the value
/// pattern or a residue obstruction decides.
pub fn in_artin_schreier_image(k: &Tower, s: &TElem) -> CResult<bool> {
    Ok(artin_schreier_step_class(k, s)?.is_none())
}

/// What the degree-p step X^p - X - s looks like, read off the value/residue
/// data of s after peeling away image parts: `None` when s lies in the image
/// of w -> w^p - w (the step splits), otherwise the classification of the
/// field extension the step generates — totally ramified for a pole order
/// prime to p, inseparable-residue for a pole order in pZ whose leading
/// coefficient is not a residue p-th power, inertial for a unit whose
/// residue equation has no root.
pub fn artin_schreier_step_class(k: &Tower, s: &TElem) -> CResult<Option<ExtClassification>> {
    let p = LocalField::p(k) as i64;
    if k.char_zero() {
        return Err(Error::WrongCharacteristic(
            "the Artin-Schreier image test lives in characteristic p".into(),
        ));
    }
    let mut s = s.clone();
    let budget = (LocalField::default_prec(k).max(8) as usize).min(256) * 2;
    for _ in 0..budget {
        let v = match k.val_view(&s) {
            ValView::Infinite => return Ok(None),
            ValView::AtLeast(b) if b > 0 => return Ok(None),
            ValView::AtLeast(b) => return Err(Error::prec("Artin-Schreier image test", b)),
            ValView::Exact(v) => v,
        };
        if v > 0 {
            // a root exists by Newton lifting from zero
            return Ok(None);
        }
        if v < 0 {
            if v % p != 0 {
                return Ok(Some(ExtClassification::TotallyRamified));
            }
            // leading term must be a p-th power to match some w^p
            let m = -v / p;
            let pim = k.pow(&k.uniformizer(), -v)?;
            let lead = k.residue(&k.mul(&s, &pim))?;
            let r = match lead.pth_power_root() {
                Some(r) => r,
                None => return Ok(Some(ExtClassification::InseparableResidue)),
            };
            let w = k.mul(&k.lift(&r)?, &k.pow(&k.uniformizer(), -m)?);
            let image = k.sub(&k.pow(&w, p)?, &w);
            s = k.sub(&s, &image);
            continue;
        }
        // v = 0: the residue equation X^p - X - res(s) must have a root
        let rf = k.residue_field();
        let shat = k.residue(&s)?;
        let mut coeffs = vec![shat.neg(), rf.from_int(-1)];
        coeffs.extend(std::iter::repeat_with(|| rf.zero()).take((p - 2).max(0) as usize));
        coeffs.push(rf.one());
        let roots = poly_roots(&coeffs)?;
        match roots.first() {
            None => return Ok(Some(ExtClassification::Inertial)),
            Some(r) => {
                let w = k.lift(r)?;
                let image = k.sub(&k.pow(&w, p)?, &w);
                s = k.sub(&s, &image);
                // now v(s) > 0 and the next round returns None
            }
        }
    }
    Err(Error::IterationBudgetExceeded("Artin-Schreier image peeling".into()))
}

/// Rank of the span of the given right-hand sides modulo the image of
/// w -> w^p - w: the number of independent Artin-Schreier adjunctions the
/// family supports. Checks every nonzero vector of F_p-exponents.
pub fn artin_schreier_rank(k: &Tower, cs: &[TElem]) -> CResult<u32> {
    let p = LocalField::p(k) as i64;
    if cs.len() > 6 {
        return Err(Error::UnsupportedField(
            "Artin-Schreier rank is computed for at most 6 generators".into(),
        ));
    }
    let total = (p as u64).pow(cs.len() as u32);
    let mut in_image = 0u64;
    for mask in 0..total {
        let mut combo = k.zero();
        let mut m = mask;
        for c in cs {
            let e = (m % p as u64) as i64;
            m /= p as u64;
            for _ in 0..e {
                combo = k.add(&combo, c);
            }
        }
        if in_artin_schreier_image(k, &combo)? {
            in_image += 1;
        }
    }
    // the combinations falling into the image form an F_p-subspace
    let mut dim = 0u32;
    while (p as u64).pow(dim) < in_image {
        dim += 1;
    }
    if (p as u64).pow(dim) != in_image {
        return Err(Error::CheckFailed(format!(
            "image combinations do not form a subspace: {in_image} of {total}"
        )));
    }
    Ok(cs.len() as u32 - dim)
}

// ---------------------------------------------------------------------------
// cyclic actions on degree-p steps
// ---------------------------------------------------------------------------

/// A generator image defining an order-p automorphism of a degree-p step.
#[derive(Clone)]
pub struct CyclicAction {
    pub ext: Arc<ExtensionField>,
    /// Image of the generator under the chosen automorphism.
    pub gen_image: TElem,
    /// How the action was found, for reports.
    pub recipe: String,
}

impl CyclicAction {
    /// Apply the action to an arbitrary element by substituting the
    /// generator image into its coordinate expression.
    pub fn apply(&self, x: &TElem) -> TElem {
        let l = &self.ext;
        let tower = Tower::Ext(l.clone());
        let coords = match x {
            TElem::Ext(a) => &a.coords,
            TElem::Model(_) => panic!("action applied to a ground element"),
        };
        let mut acc = tower.zero();
        for c in coords.iter().rev() {
            acc = tower.mul(&acc, &self.gen_image);
            acc = tower.add(&acc, &tower.embed(c));
        }
        acc
    }
}

/// Find an order-p automorphism of a degree-p step by producing a second
/// root of the defining polynomial inside the extension: the negated-trace
/// shortcut for quadratics, the shift for Artin-Schreier steps, the
/// eps-twist for Kummer cubics, and a Frobenius lift for inertial cubics
/// over a finite residue field.
pub fn cyclic_action(l: &Arc<ExtensionField>) -> CResult<CyclicAction> {
    let tower = Tower::Ext(l.clone());
    let base = &l.base;
    let p = LocalField::p(base) as usize;
    if l.n != p {
        return Err(Error::PreconditionViolated(format!(
            "cyclic actions are searched on degree-p steps; degree is {}",
            l.n
        )));
    }
    let theta = l.gen();
    let fl: Vec<TElem> = l.f.iter().map(|c| tower.embed(c)).collect();
    let check = |cand: TElem, recipe: &str| -> Option<CyclicAction> {
        let value = poly_eval(&tower, &fl, &cand);
        let vanishes = !matches!(tower.val_view(&value), ValView::Exact(_));
        let distinct = !tower.agrees(&cand, &theta);
        if vanishes && distinct {
            Some(CyclicAction { ext: l.clone(), gen_image: cand, recipe: recipe.into() })
        } else {
            None
        }
    };
    if p == 2 {
        // the other root of a quadratic is -(trace coefficient) - theta
        let cand = tower.neg(&tower.add(&tower.embed(&l.f[1]), &theta));
        if let Some(a) = check(cand, "negated trace") {
            return Ok(a);
        }
    }
    if !base.char_zero() {
        // Artin-Schreier shape: theta + 1
        let cand = tower.add(&theta, &tower.one());
        if let Some(a) = check(cand, "Artin-Schreier shift") {
            return Ok(a);
        }
    }
    if p == 3 && base.char_zero() {
        // Kummer shape X^3 - lambda with a cube root of unity in the base
        if let Tower::Model(k) = base {
            if let Ok(ctx) = crate::cyclotomic::CyclotomicContext::new(k) {
                if let Some(eps) = ctx.eps_in_base() {
                    let cand = tower.mul(&tower.embed(&TElem::Model(eps.clone())), &theta);
                    if let Some(a) = check(cand, "Kummer twist by a root of unity") {
                        return Ok(a);
                    }
                }
            }
        }
        // inertial step over a finite residue field: lift the residue
        // Frobenius by Newton iteration from theta^q
        if l.class == ExtClassification::Inertial && base.residue_field().is_finite() {
            let q = (LocalField::p(base) as i64).pow(base.residue_field().coeff_degree() as u32);
            if let Ok(start) = tower.pow(&theta, q) {
                if let Ok(root) = hensel_root(&tower, &fl, &start) {
                    if let Some(a) = check(root, "Frobenius lift") {
                        return Ok(a);
                    }
                }
            }
        }
    }
    Err(Error::NotCyclicDetectable(
        "no second root of the defining polynomial was found at working precision".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::valued::ValuedField;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn q2() -> ValuedField {
        ValuedField::padic(2, 32).unwrap()
    }

    fn q3() -> ValuedField {
        ValuedField::padic(3, 32).unwrap()
    }

    fn eis_q2_sqrt2() -> ValuedField {
        ValuedField::eisenstein_int(&ValuedField::padic(2, 32).unwrap(), &[-2, 0]).unwrap()
    }

    fn laurent_xy() -> ValuedField {
        let rf = ResidueField::rational(2, 1, &["x", "y"]).unwrap();
        ValuedField::laurent(rf, 24).unwrap()
    }

    fn int_poly(k: &Tower, cs: &[i64]) -> Vec<TElem> {
        cs.iter().map(|&c| k.from_int(c)).collect()
    }

    #[test]
    fn norm_of_one_plus_root_of_three() {
        let k = Tower::model(&q2());
        let l = ExtensionField::adjoin(&k, &int_poly(&k, &[-3, 0, 1])).unwrap();
        let tower = Tower::Ext(l.clone());
        let x = tower.add(&tower.one(), &l.gen());
        let nrm = l.norm(&x);
        let gap = k.sub(&nrm, &k.from_int(-2));
        assert!(k.is_exact_zero(&gap) || !matches!(k.val_view(&gap), ValView::Exact(_)));
    }

    #[test]
    fn norm_of_base_elements_is_the_degree_power() {
        let k = Tower::model(&q3());
        let l = ExtensionField::adjoin(&k, &int_poly(&k, &[-2, 0, 0, 1])).unwrap();
        let tower = Tower::Ext(l.clone());
        for c in [2i64, 5, -7, 12] {
            let nrm = l.norm(&tower.from_int(c));
            let expect = k.pow(&k.from_int(c), 3).unwrap();
            assert!(k.is_exact_zero(&k.sub(&nrm, &expect)));
        }
    }

    #[test]
    fn norm_multiplicativity_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let k = Tower::model(&q2());
        let l = ExtensionField::adjoin(&k, &int_poly(&k, &[-3, 0, 1])).unwrap();
        let tower = Tower::Ext(l.clone());
        for _ in 0..100 {
            let mut rand_elem = || {
                let a = rng.gen_range(-20i64..20);
                let b = rng.gen_range(-20i64..20);
                let av = tower.from_int(a);
                let bv = tower.mul(&tower.from_int(b), &l.gen());
                tower.add(&av, &bv)
            };
            let x = rand_elem();
            let y = rand_elem();
            let lhs = l.norm(&tower.mul(&x, &y));
            let rhs = k.mul(&l.norm(&x), &l.norm(&y));
            assert!(k.agrees(&lhs, &rhs), "norm is multiplicative");
        }
    }

    #[test]
    fn quadratic_over_q2_ramified_versus_inertial() {
        let k = Tower::model(&q2());
        let l3 = ExtensionField::adjoin(&k, &int_poly(&k, &[-3, 0, 1])).unwrap();
        assert_eq!(classify_deg_p_ext(&l3).unwrap(), ExtClassification::TotallyRamified);
        assert_eq!(l3.ram_degree(), 2);
        let l5 = ExtensionField::adjoin(&k, &int_poly(&k, &[-5, 0, 1])).unwrap();
        assert_eq!(classify_deg_p_ext(&l5).unwrap(), ExtClassification::Inertial);
        assert_eq!(l5.residue_degree(), 2);
        let rf = Tower::Ext(l5.clone()).residue_field();
        assert!(rf.is_finite());
        assert_eq!(rf.coeff_degree(), 2);
    }

    #[test]
    fn square_root_of_seventeen_is_rejected_as_reducible() {
        let k = Tower::model(&q2());
        let err = ExtensionField::adjoin(&k, &int_poly(&k, &[-17, 0, 1])).unwrap_err();
        assert!(matches!(err, Error::NotIrreducible(_)));
    }

    #[test]
    fn ramified_uniformizer_has_valuation_one() {
        let k = Tower::model(&q2());
        let l = ExtensionField::adjoin(&k, &int_poly(&k, &[-3, 0, 1])).unwrap();
        let tower = Tower::Ext(l.clone());
        assert_eq!(tower.val(&tower.uniformizer()).unwrap(), 1);
        assert_eq!(LocalField::v_of_p(&tower), Some(2));
        // the generator shifted by one carries the fractional valuation
        let eta = tower.sub(&l.gen(), &tower.one());
        assert_eq!(l.ext_val(&eta).unwrap(), Ratio::new(1, 2));
    }

    #[test]
    fn inseparable_residue_growth_over_the_mixed_model() {
        let base = ValuedField::gauss(&eis_q2_sqrt2(), &["x"]).unwrap();
        let k = Tower::model(&base);
        // lambda = 1 + 2x: adjoining its square root grows the residue field
        // by a square root of x
        let lam = {
            let two_x = base.from_int(2).mul(&base.var("x").unwrap());
            base.one().add(&two_x)
        };
        let l = ExtensionField::adjoin_root_of(&k, &TElem::Model(lam), 2).unwrap();
        assert_eq!(*l.classification(), ExtClassification::InseparableResidue);
        assert_eq!(l.ram_degree(), 1);
        assert_eq!(l.residue_degree(), 2);
        let tower = Tower::Ext(l.clone());
        // (theta - 1)/theta_base is a unit whose square has residue x
        let theta_base = tower.embed_ground(&base.uniformizer());
        let u = tower
            .div(&tower.sub(&l.gen(), &tower.one()), &theta_base)
            .unwrap();
        assert_eq!(tower.val(&u).unwrap(), 0);
        let sq = tower.mul(&u, &u);
        let r = tower.residue(&sq).unwrap();
        let x_res = base.var("x").unwrap().residue().unwrap();
        assert_eq!(r, x_res);
        // the residue of u itself lives outside the base residue field
        assert!(matches!(tower.residue(&u), Err(Error::UnsupportedField(_))));
    }

    #[test]
    fn eisenstein_judgments() {
        let k2 = Tower::model(&q2());
        assert!(is_eisenstein(&k2, &int_poly(&k2, &[-2, 0, 1])).unwrap());
        assert!(!is_eisenstein(&k2, &int_poly(&k2, &[-3, 0, 1])).unwrap());
        assert!(!is_eisenstein(&k2, &int_poly(&k2, &[-4, 0, 1])).unwrap());
        let lx = {
            let rf = ResidueField::rational(2, 1, &["x"]).unwrap();
            ValuedField::laurent(rf, 24).unwrap()
        };
        let k = Tower::model(&lx);
        // X^3 - t*x has constant valuation 1
        let tx = lx.uniformizer().mul(&lx.var("x").unwrap());
        let f = vec![k.neg(&TElem::Model(tx)), k.zero(), k.zero(), k.one()];
        assert!(is_eisenstein(&k, &f).unwrap());
    }

    #[test]
    fn eisenstein_extensions_are_totally_ramified_with_fractional_generator() {
        let mut rng = ChaCha8Rng::seed_from_u64(72);
        for model in [q2(), q3()] {
            let p = model.p() as i64;
            let k = Tower::model(&model);
            for _ in 0..25 {
                // random Eisenstein: constant = p*unit, middle terms divisible by p
                let unit = 1 + p * rng.gen_range(0i64..8);
                let mut f = vec![k.from_int(p * unit)];
                for _ in 1..p {
                    f.push(k.from_int(p * rng.gen_range(-4i64..5)));
                }
                f.push(k.one());
                assert!(is_eisenstein(&k, &f).unwrap());
                let l = ExtensionField::adjoin(&k, &f).unwrap();
                assert_eq!(*l.classification(), ExtClassification::TotallyRamified);
                assert_eq!(l.ext_val(&l.gen()).unwrap(), Ratio::new(1, p));
            }
        }
    }

    #[test]
    fn transfer_from_the_rationals() {
        let k = Tower::model(&q2());
        let l = eisenstein_transfer(&k, &[-2, 0, 1]).unwrap();
        assert_eq!(*l.classification(), ExtClassification::TotallyRamified);
        let l6 = eisenstein_transfer(&k, &[-6, 0, 1]).unwrap();
        assert_eq!(*l6.classification(), ExtClassification::TotallyRamified);
        assert!(matches!(eisenstein_transfer(&k, &[-4, 0, 1]), Err(Error::NotEisenstein(_))));
        // over a base with even v(p), the index condition fails
        let ke = Tower::model(&eis_q2_sqrt2());
        assert!(matches!(eisenstein_transfer(&ke, &[-2, 0, 1]), Err(Error::IndexDivisible(_))));
    }

    #[test]
    fn artin_schreier_steps_and_ranks() {
        let base = laurent_xy();
        let k = Tower::model(&base);
        let inv_t = TElem::Model(base.uniformizer().inv().unwrap());
        let l1 = artin_schreier_adjoin(&k, &inv_t).unwrap();
        assert_eq!(*l1.classification(), ExtClassification::TotallyRamified);
        assert_eq!(l1.ram_degree(), 2);
        // x^2 + x is globally of image form and is rejected
        let x = base.var("x").unwrap();
        let pe = TElem::Model(x.mul(&x).add(&x));
        assert!(matches!(artin_schreier_adjoin(&k, &pe), Err(Error::PreconditionViolated(_))));
        assert!(in_artin_schreier_image(&k, &pe).unwrap());
        // the family [1/t, x/t] is independent: rank 2
        let x_over_t = TElem::Model(x.mul(&base.uniformizer().inv().unwrap()));
        assert_eq!(artin_schreier_rank(&k, &[inv_t.clone(), x_over_t.clone()]).unwrap(), 2);
        // over the first step, x/t still resists the image, so the
        // compositum has degree 4; its valuation up there is even (-2), so
        // the second step grows the residue field by a square root of x
        // instead of ramifying further
        let t1 = Tower::Ext(l1.clone());
        let lifted = t1.embed(&x_over_t);
        assert!(!in_artin_schreier_image(&t1, &lifted).unwrap());
        assert!(matches!(
            artin_schreier_adjoin(&t1, &lifted),
            Err(Error::PreconditionViolated(_))
        ));
        let f2 = vec![t1.neg(&lifted), t1.one(), t1.one()];
        let l2 = ExtensionField::adjoin(&t1, &f2).unwrap();
        assert_eq!(*l2.classification(), ExtClassification::InseparableResidue);
        assert_eq!(l1.ram_degree() as usize * l2.degree(), 4);
    }

    #[test]
    fn artin_schreier_image_catches_deep_cancellations() {
        let base = laurent_xy();
        let k = Tower::model(&base);
        // plant w^2 - w for w = x/t^3 + 1/t: value -6 with even pattern
        let w = {
            let t3 = base.uniformizer().pow(3).unwrap();
            let x = base.var("x").unwrap();
            x.mul(&t3.inv().unwrap()).add(&base.uniformizer().inv().unwrap())
        };
        let planted = TElem::Model(w.mul(&w).sub(&w));
        assert!(in_artin_schreier_image(&k, &planted).unwrap());
        // perturbing by 1/t breaks membership
        let spoiled = k.add(&planted, &TElem::Model(base.uniformizer().inv().unwrap()));
        assert!(!in_artin_schreier_image(&k, &spoiled).unwrap());
    }

    #[test]
    fn classification_runs_inside_a_tower() {
        // adjoin sqrt(1 + theta^3) over eis(Q2, X^2-2), then classify a
        // second quadratic step over the tower
        let base = eis_q2_sqrt2();
        let k = Tower::model(&base);
        let lam = base.one().add(&base.uniformizer().pow(3).unwrap());
        let l1 = ExtensionField::adjoin_root_of(&k, &TElem::Model(lam), 2).unwrap();
        assert_eq!(*l1.classification(), ExtClassification::TotallyRamified);
        let t1 = Tower::Ext(l1.clone());
        assert_eq!(LocalField::v_of_p(&t1), Some(4));
        assert_eq!(t1.val(&t1.uniformizer()).unwrap(), 1);
        // eta = w - 1 has extension valuation 3/2 over the base
        let eta = t1.sub(&l1.gen(), &t1.one());
        assert_eq!(l1.ext_val(&eta).unwrap(), Ratio::new(3, 2));
        // 5 is still not a square up there: X^2 - 5 stays irreducible and inertial
        let l5 = ExtensionField::adjoin(&t1, &int_poly(&t1, &[-5, 0, 1])).unwrap();
        assert_eq!(classify_deg_p_ext(&l5).unwrap(), ExtClassification::Inertial);
    }

    #[test]
    fn cyclic_actions_on_the_three_shapes() {
        // quadratic over Q2: negated trace
        let k = Tower::model(&q2());
        let l3 = ExtensionField::adjoin(&k, &int_poly(&k, &[-3, 0, 1])).unwrap();
        let act = cyclic_action(&l3).unwrap();
        let tower = Tower::Ext(l3.clone());
        let twice = act.apply(&act.gen_image);
        assert!(tower.agrees(&twice, &l3.gen()), "order two");
        // the action fixes base elements
        let base_elem = tower.from_int(7);
        assert!(tower.agrees(&act.apply(&base_elem), &base_elem));

        // inertial quadratic: the action is still the negated trace,
        // realizing the residue Frobenius
        let l5 = ExtensionField::adjoin(&k, &int_poly(&k, &[-5, 0, 1])).unwrap();
        let act5 = cyclic_action(&l5).unwrap();
        let t5 = Tower::Ext(l5.clone());
        assert!(t5.agrees(&act5.apply(&act5.gen_image), &l5.gen()));

        // Artin-Schreier step: the shift
        let base = laurent_xy();
        let kl = Tower::model(&base);
        let inv_t = TElem::Model(base.uniformizer().inv().unwrap());
        let l = artin_schreier_adjoin(&kl, &inv_t).unwrap();
        let acta = cyclic_action(&l).unwrap();
        assert!(acta.recipe.contains("negated trace") || acta.recipe.contains("shift"));
        let ta = Tower::Ext(l.clone());
        assert!(ta.agrees(&acta.apply(&acta.gen_image), &l.gen()));
    }

    #[test]
    fn inertial_cubic_frobenius_lift() {
        // X^3 - X - 1 is irreducible over F_3, hence over Q3 inertially
        let k = Tower::model(&q3());
        let rf = ResidueField::finite(3, 1).unwrap();
        let ghat = vec![rf.from_int(-1), rf.from_int(-1), rf.zero(), rf.one()];
        let l = ExtensionField::lift_inertial(&k, &ghat).unwrap();
        assert_eq!(*l.classification(), ExtClassification::Inertial);
        assert_eq!(l.residue_degree(), 3);
        let act = cyclic_action(&l).unwrap();
        assert_eq!(act.recipe, "Frobenius lift");
        let tower = Tower::Ext(l.clone());
        // order three: applying the action three times returns the generator
        let once = act.apply(&act.gen_image);
        let thrice = act.apply(&once);
        assert!(tower.agrees(&thrice, &l.gen()));
        assert!(!tower.agrees(&act.gen_image, &l.gen()));
    }

    #[test]
    fn tower_height_is_capped() {
        // each level divides the previous generator by t, keeping the
        // valuation odd so the Artin-Schreier precondition holds
        let base = laurent_xy();
        let k = Tower::model(&base);
        let inv_t = TElem::Model(base.uniformizer().inv().unwrap());
        let l1 = artin_schreier_adjoin(&k, &inv_t).unwrap();
        let t1 = Tower::Ext(l1.clone());
        let c2 = t1.div(&l1.gen(), &t1.embed_ground(&base.uniformizer())).unwrap();
        assert_eq!(t1.val(&c2).unwrap(), -3);
        let l2 = artin_schreier_adjoin(&t1, &c2).unwrap();
        let t2 = Tower::Ext(l2.clone());
        let c3 = t2.div(&l2.gen(), &t2.embed_ground(&base.uniformizer())).unwrap();
        assert_eq!(t2.val(&c3).unwrap(), -7);
        let l3 = artin_schreier_adjoin(&t2, &c3).unwrap();
        let t3 = Tower::Ext(l3.clone());
        let c4 = t3.div(&l3.gen(), &t3.embed_ground(&base.uniformizer())).unwrap();
        assert!(matches!(
            artin_schreier_adjoin(&t3, &c4),
            Err(Error::TowerHeightExceeded(4))
        ));
    }

    #[test]
    fn hensel_and_pth_roots_run_on_tower_elements() {
        // over Q2(sqrt 3), 17 still has a square root and 5 becomes one too
        // (the extension is ramified, so the unit group square structure
        // changes only through the value group)
        let k = Tower::model(&q2());
        let l = ExtensionField::adjoin(&k, &int_poly(&k, &[-3, 0, 1])).unwrap();
        let tower = Tower::Ext(l.clone());
        let seventeen = tower.from_int(17);
        let verdict = crate::power::pth_root(&tower, &seventeen).unwrap();
        assert_eq!(verdict.kind(), "IsPthPower");
        let root = verdict.root().unwrap();
        let gap = tower.sub(&tower.mul(root, root), &seventeen);
        assert!(!matches!(tower.val_view(&gap), ValView::Exact(_)));
        // 3 = (generator)^2 becomes a square upstairs
        let three = tower.from_int(3);
        let v3 = crate::power::pth_root(&tower, &three).unwrap();
        assert_eq!(v3.kind(), "IsPthPower");
        // 5 stays a non-square: Q2(sqrt 3) is ramified, residue field F_2
        let five = tower.from_int(5);
        let v5 = crate::power::pth_root(&tower, &five).unwrap();
        assert_eq!(v5.kind(), "NotPthPower");
    }
}
