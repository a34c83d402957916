//! Residue fields of the workbench: F_{p^d} and rational function fields
//! F_{p^d}(x_1, ..., x_k), with exact arithmetic and the p-th power structure
//! ([K : K^p] = p^k, Frobenius inversion, p-independence, F_p-linear
//! independence).
//!
//! Elements of rational function fields are kept as reduced fractions with
//! monic denominator under a fixed term order, so equality is structural.

pub(crate) mod ff;
pub(crate) mod mpoly;

use std::fmt;
use std::sync::Arc;

use crate::error::{CResult, Error};
use ff::{FFCtx, FFElem};
use mpoly::{MFrac, MPoly};

// ---------------------------------------------------------------------------
// fields
// ---------------------------------------------------------------------------

#[derive(Debug)]
pub(crate) struct RfRepr {
    pub ffc: FFCtx,
    pub vars: Vec<String>,
}

/// A residue field: `F_{p^d}` when `vars` is empty, otherwise the rational
/// function field `F_{p^d}(vars...)`.
#[derive(Debug, Clone)]
pub struct ResidueField(pub(crate) Arc<RfRepr>);

impl PartialEq for ResidueField {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.ffc.p == other.0.ffc.p
                && self.0.ffc.d == other.0.ffc.d
                && self.0.vars == other.0.vars)
    }
}
impl Eq for ResidueField {}

impl ResidueField {
    /// The finite field F_{p^d}.
    pub fn finite(p: u64, d: usize) -> CResult<ResidueField> {
        Ok(ResidueField(Arc::new(RfRepr { ffc: FFCtx::new(p, d)?, vars: vec![] })))
    }

    /// The rational function field F_{p^d}(vars...).
    pub fn rational(p: u64, d: usize, vars: &[&str]) -> CResult<ResidueField> {
        let mut seen = std::collections::BTreeSet::new();
        for v in vars {
            if v.is_empty() || !v.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(Error::ParseError(format!("bad variable name {v:?}")));
            }
            if !seen.insert(v.to_string()) {
                return Err(Error::ParseError(format!("duplicate variable {v}")));
            }
            if matches!(*v, "t" | "p" | "th" | "g") {
                return Err(Error::ParseError(format!("variable name {v} is reserved")));
            }
        }
        if vars.is_empty() {
            return ResidueField::finite(p, d);
        }
        Ok(ResidueField(Arc::new(RfRepr {
            ffc: FFCtx::new(p, d)?,
            vars: vars.iter().map(|s| s.to_string()).collect(),
        })))
    }

    pub fn p(&self) -> u64 {
        self.0.ffc.p
    }

    pub fn coeff_degree(&self) -> usize {
        self.0.ffc.d
    }

    pub fn vars(&self) -> &[String] {
        &self.0.vars
    }

    pub fn is_finite(&self) -> bool {
        self.0.vars.is_empty()
    }

    /// A finite field is perfect; a rational function field in k >= 1
    /// variables has [K : K^p] = p^k.
    pub fn is_perfect(&self) -> bool {
        self.is_finite()
    }

    /// log_p of [K : K^p] — the number of variables.
    pub fn p_degree(&self) -> usize {
        self.0.vars.len()
    }

    pub(crate) fn ffc(&self) -> &FFCtx {
        &self.0.ffc
    }

    pub fn zero(&self) -> ResidueElement {
        self.from_int(0)
    }

    pub fn one(&self) -> ResidueElement {
        self.from_int(1)
    }

    pub fn from_int(&self, n: i64) -> ResidueElement {
        self.from_ffelem(self.0.ffc.from_int(n))
    }

    pub(crate) fn from_ffelem(&self, c: FFElem) -> ResidueElement {
        let data = if self.is_finite() {
            RData::Fin(c)
        } else {
            RData::Rat(MFrac::from_poly(
                &self.0.ffc,
                MPoly::constant(&self.0.ffc, self.0.vars.len(), c),
            ))
        };
        ResidueElement { field: self.clone(), data }
    }

    /// The generator of the coefficient field F_{p^d} over F_p (zero if d=1).
    pub fn coeff_gen(&self) -> ResidueElement {
        let g = self.0.ffc.gen();
        let data = if self.is_finite() {
            RData::Fin(g)
        } else {
            RData::Rat(MFrac::from_poly(
                &self.0.ffc,
                MPoly::constant(&self.0.ffc, self.0.vars.len(), g),
            ))
        };
        ResidueElement { field: self.clone(), data }
    }

    /// The named transcendental variable.
    pub fn var(&self, name: &str) -> CResult<ResidueElement> {
        let idx = self
            .0
            .vars
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| Error::ParseError(format!("unknown variable {name}")))?;
        Ok(ResidueElement {
            field: self.clone(),
            data: RData::Rat(MFrac::from_poly(
                &self.0.ffc,
                MPoly::var(&self.0.ffc, self.0.vars.len(), idx),
            )),
        })
    }

    /// Every element of the field, for exhaustive sweeps (finite fields only).
    pub fn enumerate(&self) -> CResult<Vec<ResidueElement>> {
        if !self.is_finite() {
            return Err(Error::UnsupportedField("cannot enumerate an infinite field".into()));
        }
        Ok(self
            .0
            .ffc
            .enumerate()
            .into_iter()
            .map(|c| ResidueElement { field: self.clone(), data: RData::Fin(c) })
            .collect())
    }

    /// Embed an element of this field into `target`, which must have the same
    /// coefficient field and a superset of the variables.
    pub fn embed(&self, elem: &ResidueElement, target: &ResidueField) -> CResult<ResidueElement> {
        assert_eq!(&elem.field, self, "element not from this field");
        if self == target {
            return Ok(elem.clone());
        }
        if self.0.ffc != target.0.ffc {
            return Err(Error::MismatchedFields(
                "embedding must preserve the coefficient field".into(),
            ));
        }
        let mut positions = Vec::with_capacity(self.0.vars.len());
        for v in &self.0.vars {
            let idx = target.0.vars.iter().position(|w| w == v).ok_or_else(|| {
                Error::MismatchedFields(format!("target field lacks variable {v}"))
            })?;
            positions.push(idx);
        }
        let remap = |p: &MPoly| -> MPoly {
            let terms = p
                .terms
                .iter()
                .map(|(m, c)| {
                    let mut m2 = vec![0u32; target.0.vars.len()];
                    for (i, &e) in m.iter().enumerate() {
                        m2[positions[i]] = e;
                    }
                    (m2, c.clone())
                })
                .collect::<Vec<_>>();
            let mut out = MPoly { nvars: target.0.vars.len(), terms };
            out.terms.sort_by(|a, b| mpoly::cmp_mono(&b.0, &a.0));
            out
        };
        let data = match &elem.data {
            RData::Fin(c) => RData::Rat(MFrac::from_poly(
                &target.0.ffc,
                MPoly::constant(&target.0.ffc, target.0.vars.len(), c.clone()),
            )),
            RData::Rat(f) => RData::Rat(MFrac { num: remap(&f.num), den: remap(&f.den) }),
        };
        Ok(ResidueElement { field: target.clone(), data })
    }
}

impl fmt::Display for ResidueField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_finite() {
            write!(f, "Fq({},{})", self.p(), self.coeff_degree())
        } else {
            write!(f, "RatFun({},{};{})", self.p(), self.coeff_degree(), self.0.vars.join(","))
        }
    }
}

impl std::str::FromStr for ResidueField {
    type Err = Error;

    fn from_str(s: &str) -> CResult<ResidueField> {
        let s = s.trim();
        let bad = || Error::ParseError(format!("bad residue field descriptor {s:?}"));
        if let Some(rest) = s.strip_prefix("Fq(").and_then(|r| r.strip_suffix(')')) {
            let mut it = rest.split(',');
            let p: u64 = it.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
            let d: usize = it.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
            if it.next().is_some() {
                return Err(bad());
            }
            return ResidueField::finite(p, d);
        }
        if let Some(rest) = s.strip_prefix("RatFun(").and_then(|r| r.strip_suffix(')')) {
            let (params, vars) = rest.split_once(';').ok_or_else(bad)?;
            let mut it = params.split(',');
            let p: u64 = it.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
            let d: usize = it.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
            if it.next().is_some() {
                return Err(bad());
            }
            let names: Vec<&str> = vars.split(',').map(|v| v.trim()).collect();
            return ResidueField::rational(p, d, &names);
        }
        Err(bad())
    }
}

// ---------------------------------------------------------------------------
// elements
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum RData {
    Fin(FFElem),
    Rat(MFrac),
}

/// An element of a [`ResidueField`], in canonical form.
#[derive(Debug, Clone)]
pub struct ResidueElement {
    pub(crate) field: ResidueField,
    pub(crate) data: RData,
}

impl PartialEq for ResidueElement {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.data == other.data
    }
}
impl Eq for ResidueElement {}

impl ResidueElement {
    pub fn field(&self) -> &ResidueField {
        &self.field
    }

    pub fn is_zero(&self) -> bool {
        match &self.data {
            RData::Fin(c) => self.field.ffc().is_zero(c),
            RData::Rat(f) => f.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        *self == self.field.one()
    }

    fn check_same(&self, other: &ResidueElement) {
        assert!(
            self.field == other.field,
            "mixed residue fields: {} vs {}",
            self.field,
            other.field
        );
    }

    fn lift2(
        &self,
        other: &ResidueElement,
        fin: impl Fn(&FFCtx, &FFElem, &FFElem) -> FFElem,
        rat: impl Fn(&FFCtx, &MFrac, &MFrac) -> CResult<MFrac>,
    ) -> ResidueElement {
        self.check_same(other);
        let ffc = self.field.ffc();
        let data = match (&self.data, &other.data) {
            (RData::Fin(a), RData::Fin(b)) => RData::Fin(fin(ffc, a, b)),
            (RData::Rat(a), RData::Rat(b)) => {
                RData::Rat(rat(ffc, a, b).expect("nonzero denominators"))
            }
            _ => unreachable!("same field implies same representation"),
        };
        ResidueElement { field: self.field.clone(), data }
    }

    pub fn add(&self, other: &ResidueElement) -> ResidueElement {
        self.lift2(other, |c, a, b| c.add(a, b), |c, a, b| a.add2(c, b))
    }

    pub fn sub(&self, other: &ResidueElement) -> ResidueElement {
        self.lift2(other, |c, a, b| c.sub(a, b), |c, a, b| a.sub2(c, b))
    }

    pub fn mul(&self, other: &ResidueElement) -> ResidueElement {
        self.lift2(other, |c, a, b| c.mul(a, b), |c, a, b| a.mul2(c, b))
    }

    pub fn neg(&self) -> ResidueElement {
        let ffc = self.field.ffc();
        let data = match &self.data {
            RData::Fin(a) => RData::Fin(ffc.neg(a)),
            RData::Rat(a) => RData::Rat(a.neg(ffc)),
        };
        ResidueElement { field: self.field.clone(), data }
    }

    pub fn div(&self, other: &ResidueElement) -> CResult<ResidueElement> {
        self.check_same(other);
        let ffc = self.field.ffc();
        let data = match (&self.data, &other.data) {
            (RData::Fin(a), RData::Fin(b)) => {
                RData::Fin(ffc.mul(a, &ffc.inv(b)?))
            }
            (RData::Rat(a), RData::Rat(b)) => RData::Rat(a.div2(ffc, b)?),
            _ => unreachable!(),
        };
        Ok(ResidueElement { field: self.field.clone(), data })
    }

    pub fn inv(&self) -> CResult<ResidueElement> {
        self.field.one().div(self)
    }

    pub fn pow(&self, e: i64) -> CResult<ResidueElement> {
        let ffc = self.field.ffc();
        let data = match &self.data {
            RData::Fin(a) => {
                let base = if e < 0 { ffc.inv(a)? } else { a.clone() };
                RData::Fin(ffc.pow(&base, e.unsigned_abs() as u128))
            }
            RData::Rat(a) => RData::Rat(a.pow(ffc, e)?),
        };
        Ok(ResidueElement { field: self.field.clone(), data })
    }

    /// Apply Frobenius: x -> x^p.
    pub fn frobenius(&self) -> ResidueElement {
        self.pow(self.field.p() as i64).expect("positive power")
    }

    /// The unique p-th root, if this element lies in K^p. Over a finite field
    /// this always succeeds; over F_q(xs) it succeeds exactly when the reduced
    /// numerator and denominator live in F_q[xs^p] (their coefficients are
    /// never an obstruction since F_q is perfect).
    pub fn pth_power_root(&self) -> Option<ResidueElement> {
        let ffc = self.field.ffc();
        let data = match &self.data {
            RData::Fin(a) => RData::Fin(ffc.pth_root(a)),
            RData::Rat(a) => RData::Rat(a.pth_root(ffc)?),
        };
        Some(ResidueElement { field: self.field.clone(), data })
    }

    /// Square root in the residue field, if one exists (any characteristic).
    pub fn sqrt(&self) -> Option<ResidueElement> {
        let ffc = self.field.ffc();
        let data = match &self.data {
            RData::Fin(a) => RData::Fin(ffc.sqrt(a)?),
            RData::Rat(f) => {
                if ffc.p == 2 {
                    RData::Rat(f.pth_root(ffc)?)
                } else {
                    // N/D = (N*D)/D^2, so the fraction is a square iff N*D is.
                    let nd = f.num.mul(ffc, &f.den);
                    let r = mpoly::mpoly_sqrt(ffc, &nd)?;
                    RData::Rat(MFrac::reduced(ffc, r, f.den.clone()).ok()?)
                }
            }
        };
        let cand = ResidueElement { field: self.field.clone(), data };
        debug_assert!(cand.mul(&cand) == *self);
        Some(cand)
    }
}

impl fmt::Display for ResidueElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ffc = self.field.ffc();
        match &self.data {
            RData::Fin(c) => write!(f, "{}", ffc.display(c)),
            RData::Rat(fr) => {
                let n = mpoly::mpoly_display(ffc, &fr.num, &self.field.0.vars);
                if fr.den == MPoly::one(ffc, self.field.0.vars.len()) {
                    write!(f, "{n}")
                } else {
                    let d = mpoly::mpoly_display(ffc, &fr.den, &self.field.0.vars);
                    let nn = if n.contains('+') { format!("({n})") } else { n };
                    let dd = if d.contains('+') { format!("({d})") } else { d };
                    write!(f, "{nn}/{dd}")
                }
            }
        }
    }
}

macro_rules! re_ops {
    ($trait:ident, $m:ident) => {
        impl std::ops::$trait for &ResidueElement {
            type Output = ResidueElement;
            fn $m(self, rhs: &ResidueElement) -> ResidueElement {
                ResidueElement::$m(self, rhs)
            }
        }
        impl std::ops::$trait for ResidueElement {
            type Output = ResidueElement;
            fn $m(self, rhs: ResidueElement) -> ResidueElement {
                ResidueElement::$m(&self, &rhs)
            }
        }
    };
}
re_ops!(Add, add);
re_ops!(Sub, sub);
re_ops!(Mul, mul);

impl std::ops::Neg for &ResidueElement {
    type Output = ResidueElement;
    fn neg(self) -> ResidueElement {
        ResidueElement::neg(self)
    }
}

// ---------------------------------------------------------------------------
// linear algebra over F_p and the p-th power lattice
// ---------------------------------------------------------------------------

/// Are the elements linearly independent over the prime field F_p?
pub fn f_linear_independent(elems: &[ResidueElement]) -> CResult<bool> {
    if elems.is_empty() {
        return Ok(true);
    }
    let field = elems[0].field.clone();
    for e in elems {
        if e.field != field {
            return Err(Error::MismatchedFields("f_linear_independent".into()));
        }
    }
    let p = field.p();
    let ffc = field.ffc();
    // Build F_p coordinate rows.
    let rows: Vec<Vec<u64>> = match &elems[0].data {
        RData::Fin(_) => elems
            .iter()
            .map(|e| match &e.data {
                RData::Fin(c) => c.clone(),
                _ => unreachable!(),
            })
            .collect(),
        RData::Rat(_) => {
            // common denominator, then monomial-coefficient coordinates
            let fracs: Vec<&MFrac> = elems
                .iter()
                .map(|e| match &e.data {
                    RData::Rat(f) => f,
                    _ => unreachable!(),
                })
                .collect();
            let mut den = MPoly::one(ffc, field.0.vars.len());
            for f in &fracs {
                let g = mpoly::mpoly_gcd(ffc, &den, &f.den);
                den = den.mul(ffc, &f.den.exact_div(ffc, &g).expect("gcd divides"));
            }
            let nums: Vec<MPoly> = fracs
                .iter()
                .map(|f| {
                    let extra = den.exact_div(ffc, &f.den).expect("lcm property");
                    f.num.mul(ffc, &extra)
                })
                .collect();
            let mut monos: Vec<mpoly::Mono> = vec![];
            for n in &nums {
                for (m, _) in &n.terms {
                    if !monos.contains(m) {
                        monos.push(m.clone());
                    }
                }
            }
            monos.sort_by(mpoly::cmp_mono);
            nums.iter()
                .map(|n| {
                    let mut row = vec![0u64; monos.len() * ffc.d];
                    for (m, c) in &n.terms {
                        let pos = monos.iter().position(|x| x == m).unwrap();
                        for (j, &cj) in c.iter().enumerate() {
                            row[pos * ffc.d + j] = cj;
                        }
                    }
                    row
                })
                .collect()
        }
    };
    Ok(rank_mod_p(p, rows) == elems.len())
}

fn rank_mod_p(p: u64, mut rows: Vec<Vec<u64>>) -> usize {
    let ncols = rows.iter().map(|r| r.len()).max().unwrap_or(0);
    for r in rows.iter_mut() {
        r.resize(ncols, 0);
    }
    let mut rank = 0;
    for col in 0..ncols {
        let Some(piv) = (rank..rows.len()).find(|&r| rows[r][col] % p != 0) else {
            continue;
        };
        rows.swap(rank, piv);
        let inv = ff::sinv(p, rows[rank][col]);
        for r in 0..rows.len() {
            if r == rank || rows[r][col] % p == 0 {
                continue;
            }
            let factor = ff::smul(p, rows[r][col], inv);
            for c in col..ncols {
                let sub = ff::smul(p, factor, rows[rank][c]);
                rows[r][c] = ff::ssub(p, rows[r][c], sub);
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// Are the elements p-independent, i.e. does each one lie outside the
/// subfield generated over K^p by the previous ones? Over a perfect field
/// every element is already in K^p, so any nonempty list is dependent.
pub fn p_independent(elems: &[ResidueElement]) -> CResult<bool> {
    if elems.is_empty() {
        return Ok(true);
    }
    let field = elems[0].field.clone();
    for e in elems {
        if e.field != field {
            return Err(Error::MismatchedFields("p_independent".into()));
        }
    }
    if field.is_perfect() {
        return Ok(false);
    }
    let p = field.p() as usize;
    let k = field.p_degree();
    for i in 0..elems.len() {
        let products = (p as u64).checked_pow(i as u32).unwrap_or(u64::MAX);
        if products.saturating_mul((p as u64).pow(k as u32)) > ff::ENUM_BUDGET {
            return Err(Error::UnsupportedField(
                "p-independence system exceeds the enumeration budget".into(),
            ));
        }
        if in_pth_span(&field, &elems[..i], &elems[i])? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Is `target` in the span of { prod gens^e : 0 <= e_j < p } over K^p?
/// Solved as a plain K-linear system: applying the p-th root isomorphism to
/// the K^p-coordinates of both sides turns "combination with K^p
/// coefficients" into "combination with K coefficients" coordinatewise.
fn in_pth_span(
    field: &ResidueField,
    gens: &[ResidueElement],
    target: &ResidueElement,
) -> CResult<bool> {
    let ffc = field.ffc();
    let p = field.p() as usize;
    let as_frac = |e: &ResidueElement| -> MFrac {
        match &e.data {
            RData::Rat(f) => f.clone(),
            RData::Fin(_) => unreachable!("rational field elements only"),
        }
    };
    // all products gens^e, odometer over exponent vectors
    let mut cols: Vec<Vec<MFrac>> = vec![];
    let total = p.pow(gens.len() as u32);
    for idx in 0..total {
        let mut rem = idx;
        let mut prod = field.one();
        for g in gens {
            let e = (rem % p) as i64;
            rem /= p;
            if e > 0 {
                prod = prod.mul(&g.pow(e)?);
            }
        }
        cols.push(as_frac(&prod).pth_coordinates(ffc)?);
    }
    let rhs = as_frac(target).pth_coordinates(ffc)?;
    // rows: one per monomial coordinate; solve for K-coefficients
    let nrows = rhs.len();
    let mut matrix: Vec<Vec<MFrac>> = (0..nrows)
        .map(|r| cols.iter().map(|c| c[r].clone()).collect())
        .collect();
    let mut b = rhs;
    // Gaussian elimination, exact
    let mut pivot_row = 0usize;
    for col in 0..cols.len() {
        let Some(pr) = (pivot_row..nrows).find(|&r| !matrix[r][col].is_zero()) else {
            continue;
        };
        matrix.swap(pivot_row, pr);
        b.swap(pivot_row, pr);
        let inv = matrix[pivot_row][col].inv(ffc)?;
        for c in 0..cols.len() {
            matrix[pivot_row][c] = matrix[pivot_row][c].mul2(ffc, &inv)?;
        }
        b[pivot_row] = b[pivot_row].mul2(ffc, &inv)?;
        for r in 0..nrows {
            if r == pivot_row || matrix[r][col].is_zero() {
                continue;
            }
            let f = matrix[r][col].clone();
            for c in 0..cols.len() {
                let sub = matrix[pivot_row][c].mul2(ffc, &f)?;
                matrix[r][c] = matrix[r][c].sub2(ffc, &sub)?;
            }
            let sub = b[pivot_row].mul2(ffc, &f)?;
            b[r] = b[r].sub2(ffc, &sub)?;
        }
        pivot_row += 1;
    }
    // consistent iff no zeroed-out row is left with a nonzero right-hand side
    for r in pivot_row..nrows {
        if !b[r].is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Is X^p + bX - a irreducible over the residue field? For p in {2, 3} the
/// degree is at most 3, so irreducibility is the absence of roots; over
/// finite fields general p is handled by a Rabin test.
pub fn irreducible_artinschreier_like(
    a: &ResidueElement,
    b: &ResidueElement,
) -> CResult<bool> {
    if a.field != b.field {
        return Err(Error::MismatchedFields("irreducible_artinschreier_like".into()));
    }
    let field = &a.field;
    let p = field.p();
    if field.is_finite() {
        let ffc = field.ffc();
        let fin = |e: &ResidueElement| match &e.data {
            RData::Fin(c) => c.clone(),
            _ => unreachable!(),
        };
        let mut coeffs = vec![ffc.zero(); p as usize + 1];
        coeffs[0] = ffc.neg(&fin(a));
        coeffs[1] = fin(b);
        coeffs[p as usize] = ffc.one();
        return ff::up_irreducible(ffc, &coeffs);
    }
    if p > 3 {
        return Err(Error::UnsupportedField(
            "irreducibility over rational function fields is limited to p in {2, 3}".into(),
        ));
    }
    let mut coeffs = vec![field.zero(); p as usize + 1];
    coeffs[0] = a.neg();
    coeffs[1] = b.clone();
    coeffs[p as usize] = field.one();
    Ok(poly_roots(&coeffs)?.is_empty())
}

/// Roots in the residue field of a polynomial with residue coefficients
/// (ascending). Over finite fields: exhaustive. Over rational function
/// fields: clear denominators, monicize, and enumerate polynomial candidates
/// up to the sound degree bound (roots of a monic polynomial over F_q[xs]
/// are polynomials since the ring is integrally closed).
pub fn poly_roots(coeffs: &[ResidueElement]) -> CResult<Vec<ResidueElement>> {
    let mut coeffs = coeffs.to_vec();
    while coeffs.last().map(|c| c.is_zero()) == Some(true) {
        coeffs.pop();
    }
    if coeffs.is_empty() {
        return Err(Error::PreconditionViolated("root search on the zero polynomial".into()));
    }
    if coeffs.len() == 1 {
        return Ok(vec![]);
    }
    let field = coeffs[0].field.clone();
    let eval = |x: &ResidueElement| -> ResidueElement {
        let mut acc = field.zero();
        for c in coeffs.iter().rev() {
            acc = acc.mul(x).add(c);
        }
        acc
    };
    if field.is_finite() {
        let mut out = vec![];
        for cand in field.enumerate()? {
            if eval(&cand).is_zero() {
                out.push(cand);
            }
        }
        return Ok(out);
    }
    // rational function field: clear to an integral monic polynomial
    let ffc = field.ffc();
    let k = field.p_degree();
    let frac = |e: &ResidueElement| match &e.data {
        RData::Rat(f) => f.clone(),
        _ => unreachable!(),
    };
    let mut den = MPoly::one(ffc, k);
    for c in &coeffs {
        let f = frac(c);
        let g = mpoly::mpoly_gcd(ffc, &den, &f.den);
        den = den.mul(ffc, &f.den.exact_div(ffc, &g).expect("gcd divides"));
    }
    let ints: Vec<MPoly> = coeffs
        .iter()
        .map(|c| {
            let f = frac(c);
            f.num.mul(ffc, &den.exact_div(ffc, &f.den).expect("lcm property"))
        })
        .collect();
    // monicize: roots of sum ints[i] X^i are y / lc for roots y of
    // Y^n + sum_{i<n} ints[i] lc^{n-1-i} Y^i
    let n = ints.len() - 1;
    let lc = ints[n].clone();
    let monic: Vec<MPoly> = (0..n)
        .map(|i| ints[i].mul(ffc, &lc.pow(ffc, (n - 1 - i) as u32)))
        .collect();
    let dbound = monic
        .iter()
        .enumerate()
        .map(|(i, c)| {
            if c.is_zero() {
                0
            } else {
                (c.total_degree() + (n - i) as u32 - 1) / (n - i) as u32
            }
        })
        .max()
        .unwrap_or(0);
    // candidate monomials of total degree <= dbound
    let mut monos: Vec<mpoly::Mono> = vec![];
    fn gen_monos(k: usize, dbound: u32, cur: &mut Vec<u32>, left: u32, out: &mut Vec<Vec<u32>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for e in 0..=left {
            cur.push(e);
            gen_monos(k, dbound, cur, left - e, out);
            cur.pop();
        }
    }
    gen_monos(k, dbound, &mut vec![], dbound, &mut monos);
    let q = ffc.q();
    let count = (q as u128).checked_pow(monos.len() as u32).unwrap_or(u128::MAX);
    if count > ff::ENUM_BUDGET as u128 {
        return Err(Error::UnsupportedField(format!(
            "root search budget exceeded ({} candidate polynomials)",
            count
        )));
    }
    let ff_elems = ffc.enumerate();
    let mut out = vec![];
    for idx in 0..count {
        let mut rem = idx;
        let mut terms = vec![];
        for m in &monos {
            let c = &ff_elems[(rem % q as u128) as usize];
            rem /= q as u128;
            if !ffc.is_zero(c) {
                terms.push((m.clone(), c.clone()));
            }
        }
        let mut cand = MPoly { nvars: k, terms };
        cand.terms.sort_by(|a, b| mpoly::cmp_mono(&b.0, &a.0));
        // Horner in the monic polynomial
        let mut acc = MPoly::one(ffc, k);
        for c in std::iter::once(None).chain(monic.iter().rev().map(Some)) {
            match c {
                None => {}
                Some(c) => {
                    acc = acc.mul(ffc, &cand).add(ffc, c);
                }
            }
        }
        if acc.is_zero() {
            // map back: x = y / lc
            let root = MFrac::reduced(ffc, cand, lc.clone())?;
            let elem = ResidueElement { field: field.clone(), data: RData::Rat(root) };
            if !out.contains(&elem) {
                out.push(elem);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_display_and_parse_round_trip() {
        let f = ResidueField::finite(2, 3).unwrap();
        assert_eq!(f.to_string(), "Fq(2,3)");
        assert_eq!(f.to_string().parse::<ResidueField>().unwrap(), f);
        let r = ResidueField::rational(3, 1, &["x", "y"]).unwrap();
        assert_eq!(r.to_string(), "RatFun(3,1;x,y)");
        assert_eq!(r.to_string().parse::<ResidueField>().unwrap(), r);
    }

    #[test]
    fn rational_arithmetic_reduces_canonically() {
        let f = ResidueField::rational(2, 1, &["x", "y"]).unwrap();
        let x = f.var("x").unwrap();
        let y = f.var("y").unwrap();
        let a = (&x + &y).mul(&x).div(&x).unwrap();
        assert_eq!(a, &x + &y);
        let b = x.div(&y).unwrap();
        let c = b.mul(&y);
        assert_eq!(c, x);
        assert_eq!(x.to_string(), "x");
        assert_eq!(b.to_string(), "x/y");
    }

    /// Oracle [frozen]: x is not a square in F_2(x). Checked two independent
    /// ways: exhaustive sweep over fractions of degree <= 3, and the parity
    /// of the numerator degree under squaring.
    #[test]
    fn x_is_not_a_square_in_f2x() {
        let f = ResidueField::rational(2, 1, &["x"]).unwrap();
        let x = f.var("x").unwrap();
        assert!(x.pth_power_root().is_none());
        // exhaustive oracle: all u/w with deg(u), deg(w) <= 3
        let polys: Vec<Vec<u64>> = (0..16u64)
            .map(|bits| (0..4).map(|i| (bits >> i) & 1).collect())
            .collect();
        let as_elem = |cs: &Vec<u64>| -> ResidueElement {
            let mut acc = f.zero();
            for (i, &c) in cs.iter().enumerate() {
                if c == 1 {
                    acc = acc.add(&x.pow(i as i64).unwrap());
                }
            }
            acc
        };
        for u in &polys {
            for w in &polys {
                let wu = as_elem(w);
                if wu.is_zero() {
                    continue;
                }
                let g = as_elem(u).div(&wu).unwrap();
                assert!(g.mul(&g) != x, "({:?})/({:?}) squared to x", u, w);
            }
        }
    }

    /// [x, y] is p-independent in F_2(x,y); appending x*y (or 1, or x^3)
    /// breaks independence.
    #[test]
    fn p_independence_in_two_variables() {
        let f = ResidueField::rational(2, 1, &["x", "y"]).unwrap();
        let x = f.var("x").unwrap();
        let y = f.var("y").unwrap();
        assert!(p_independent(&[x.clone(), y.clone()]).unwrap());
        assert!(p_independent(&[x.clone()]).unwrap());
        // x^3 = x^2 * x lies in K^p(x)
        assert!(!p_independent(&[x.clone(), x.pow(3).unwrap()]).unwrap());
        // xy is in K^p(x, y)
        assert!(!p_independent(&[x.clone(), y.clone(), x.mul(&y)]).unwrap());
        // 1 is in K^p
        assert!(!p_independent(&[f.one()]).unwrap());
        // over a perfect field, nothing is p-independent
        let fin = ResidueField::finite(2, 2).unwrap();
        assert!(!p_independent(&[fin.coeff_gen()]).unwrap());
        assert!(p_independent(&[]).unwrap());
    }

    /// y-degree parity oracle: y cannot lie in F_2(x, y^2) = K^p(x), so
    /// the span test must say "not in span" for the pair ([x], y).
    #[test]
    fn y_outside_span_of_x_over_squares() {
        let f = ResidueField::rational(2, 1, &["x", "y"]).unwrap();
        let x = f.var("x").unwrap();
        let y = f.var("y").unwrap();
        assert!(!in_pth_span(&f, &[x], &y).unwrap());
    }

    #[test]
    fn f_linear_independence_matches_hand_checks() {
        let f = ResidueField::rational(2, 1, &["x"]).unwrap();
        let x = f.var("x").unwrap();
        let one = f.one();
        assert!(f_linear_independent(&[one.clone(), x.clone()]).unwrap());
        // 1 + x and the pair {1, x} are dependent as a triple
        assert!(!f_linear_independent(&[one.clone(), x.clone(), one.add(&x)]).unwrap());
        // fractions: 1/x and (1+x)/x = 1/x + 1 and 1 are dependent
        let ix = one.div(&x).unwrap();
        let mixed = one.add(&x).div(&x).unwrap();
        assert!(!f_linear_independent(&[one.clone(), ix.clone(), mixed]).unwrap());
        assert!(f_linear_independent(&[one, ix]).unwrap());
        // finite field: F_4 over F_2 has basis {1, g}
        let f4 = ResidueField::finite(2, 2).unwrap();
        assert!(f_linear_independent(&[f4.one(), f4.coeff_gen()]).unwrap());
        assert!(!f_linear_independent(&[
            f4.one(),
            f4.coeff_gen(),
            f4.one().add(&f4.coeff_gen())
        ])
        .unwrap());
    }

    #[test]
    fn artinschreier_like_irreducibility() {
        // over F_2: X^2 + X + 1 irreducible (a = 1, b = 1)
        let f2 = ResidueField::finite(2, 1).unwrap();
        assert!(irreducible_artinschreier_like(&f2.one(), &f2.one()).unwrap());
        // X^2 + X = X(X+1) reducible (a = 0, b = 1)
        assert!(!irreducible_artinschreier_like(&f2.zero(), &f2.one()).unwrap());
        // over F_3: X^3 - 1 = (X-1)^3 reducible (a = 1, b = 0)
        let f3 = ResidueField::finite(3, 1).unwrap();
        assert!(!irreducible_artinschreier_like(&f3.one(), &f3.zero()).unwrap());
        // over F_3: X^3 + X - 1 has the root 2, hence reducible
        assert!(!irreducible_artinschreier_like(&f3.one(), &f3.one()).unwrap());
        // over F_3: X^3 - X - 1 takes the value 2 at 0, 1, 2 => irreducible
        assert!(irreducible_artinschreier_like(&f3.one(), &f3.from_int(-1)).unwrap());
        // over F_2(x): X^2 + X - x irreducible (degree parity)
        let fx = ResidueField::rational(2, 1, &["x"]).unwrap();
        let x = fx.var("x").unwrap();
        assert!(irreducible_artinschreier_like(&x, &fx.one()).unwrap());
        // over F_2(x): X^2 - x^2 = (X+x)^2 reducible
        assert!(!irreducible_artinschreier_like(&x.mul(&x), &fx.zero()).unwrap());
    }

    #[test]
    fn root_search_over_rational_function_fields() {
        let f = ResidueField::rational(2, 1, &["x"]).unwrap();
        let x = f.var("x").unwrap();
        // (X - x)(X - (x+1)) = X^2 + X + x^2 + x  (char 2)
        let c0 = x.mul(&x).add(&x);
        let c1 = f.one();
        let roots = poly_roots(&[c0, c1, f.one()]).unwrap();
        assert_eq!(roots.len(), 2);
        assert!(roots.contains(&x));
        assert!(roots.contains(&x.add(&f.one())));
        // X^2 + X + x has none
        let none = poly_roots(&[x.clone(), f.one(), f.one()]).unwrap();
        assert!(none.is_empty());
        // fraction roots come back too: (X - 1/x) * (X - x)
        let ix = f.one().div(&x).unwrap();
        let c0 = f.one(); // product of roots = 1
        let c1 = ix.add(&x).neg();
        let roots = poly_roots(&[c0, c1, f.one()]).unwrap();
        assert_eq!(roots.len(), 2);
        assert!(roots.contains(&ix));
    }

    #[test]
    fn embedding_into_more_variables() {
        let small = ResidueField::rational(2, 1, &["x"]).unwrap();
        let big = ResidueField::rational(2, 1, &["x", "y"]).unwrap();
        let x_small = small.var("x").unwrap();
        let e = small.embed(&x_small, &big).unwrap();
        assert_eq!(e, big.var("x").unwrap());
        let fin = ResidueField::finite(2, 1).unwrap();
        let c = fin.embed(&fin.one(), &big);
        assert!(c.is_ok());
    }
}
