//! The field K(eps) obtained by adjoining a primitive p-th root of unity,
//! and the bookkeeping around it (the automorphism, the exponents used to
//! average over the Galois action, the value of 1 - eps).
//!
//! Supported shapes, for residual characteristic 0:
//!   p = 2       eps = -1 lies in K; everything happens in K itself.
//!   p = 3       either a root of X^2 + X + 1 already lies in K, or K(eps)
//!               is the quadratic extension K[Y]/(Y^2 + Y + 1). That
//!               extension is ramified exactly when v(3) is odd; then its
//!               value group is re-normalized to Z via the norm, and
//!               residue arithmetic carries over from K. When v(3) is even
//!               the extension is inertial and only arithmetic (no residue
//!               map) is offered.
//!   p >= 5      out of scope.

use std::fmt;
use std::sync::Arc;

use crate::error::{CResult, Error};
use crate::local::LocalField;
use crate::residue::{ResidueElement, ResidueField};
use crate::roots::field_roots;
use crate::valued::{combine_min, VElem, ValView, ValuedField};

// ---------------------------------------------------------------------------
// K(eps) as a quadratic extension (p = 3, eps not in K)
// ---------------------------------------------------------------------------

#[derive(Debug)]
struct CycRepr {
    base: ValuedField,
    /// v_K(3).
    w: i64,
    /// Ramified mode: v(3) odd, value group re-normalized via the norm so
    /// that v_eps restricted to K is 2 v_K. Otherwise inertial: v_eps = v_K
    /// on K, residue arithmetic unsupported.
    ramified: bool,
}

/// K[Y]/(Y^2 + Y + 1) with eps = Y, for p = 3.
#[derive(Clone, Debug)]
pub struct CycField(Arc<CycRepr>);

impl PartialEq for CycField {
    fn eq(&self, other: &Self) -> bool {
        self.0.base == other.0.base && self.0.ramified == other.0.ramified
    }
}

impl fmt::Display for CycField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(eps)", self.0.base)
    }
}

/// c0 + c1 * eps with eps^2 = -1 - eps.
#[derive(Clone, Debug, PartialEq)]
pub struct CycElem {
    pub c0: VElem,
    pub c1: VElem,
}

impl fmt::Display for CycElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) + ({})*eps", self.c0, self.c1)
    }
}

impl CycField {
    /// Build K(eps) over a characteristic-0 base with p = 3. The caller is
    /// expected to have checked that X^2 + X + 1 has no root in K.
    pub fn new(base: &ValuedField) -> CResult<CycField> {
        if LocalField::p(base) != 3 {
            return Err(Error::UnsupportedField(
                "the quadratic eps-extension only arises for p = 3".into(),
            ));
        }
        if !base.char_zero() {
            return Err(Error::WrongCharacteristic(
                "K(eps) as a quadratic extension is a characteristic-0 construction".into(),
            ));
        }
        let w = base.v_of_p().expect("char 0 has v(p)");
        Ok(CycField(Arc::new(CycRepr { base: base.clone(), w, ramified: w % 2 != 0 })))
    }

    pub fn base(&self) -> &ValuedField {
        &self.0.base
    }

    pub fn is_ramified(&self) -> bool {
        self.0.ramified
    }

    pub fn embed(&self, x: &VElem) -> CycElem {
        CycElem { c0: x.clone(), c1: LocalField::zero(&self.0.base) }
    }

    pub fn eps(&self) -> CycElem {
        CycElem { c0: LocalField::zero(&self.0.base), c1: LocalField::one(&self.0.base) }
    }

    pub fn one_minus_eps(&self) -> CycElem {
        CycElem { c0: LocalField::one(&self.0.base), c1: self.0.base.from_int(-1) }
    }

    /// The automorphism eps -> eps^2 = -1 - eps (complex conjugation).
    pub fn conj(&self, x: &CycElem) -> CycElem {
        CycElem { c0: x.c0.sub(&x.c1), c1: x.c1.neg() }
    }

    /// Norm to K: x * conj(x), which lands in K.
    pub fn norm(&self, x: &CycElem) -> VElem {
        let n = LocalField::mul(self, x, &self.conj(x));
        debug_assert!(
            !matches!(n.c1.val_view(), ValView::Exact(_)),
            "norm left the base field: eps-component {}",
            n.c1
        );
        n.c0
    }
}

impl LocalField for CycField {
    type Elem = CycElem;

    fn p(&self) -> u64 {
        3
    }
    fn char_zero(&self) -> bool {
        true
    }
    fn v_of_p(&self) -> Option<i64> {
        Some(if self.0.ramified { 2 * self.0.w } else { self.0.w })
    }
    fn residue_field(&self) -> ResidueField {
        LocalField::residue_field(&self.0.base)
    }
    fn default_prec(&self) -> i64 {
        let b = LocalField::default_prec(&self.0.base);
        if self.0.ramified {
            2 * b
        } else {
            b
        }
    }
    fn zero(&self) -> CycElem {
        self.embed(&LocalField::zero(&self.0.base))
    }
    fn one(&self) -> CycElem {
        self.embed(&LocalField::one(&self.0.base))
    }
    fn from_int(&self, n: i64) -> CycElem {
        self.embed(&self.0.base.from_int(n))
    }

    fn uniformizer(&self) -> CycElem {
        if self.0.ramified {
            // (1 - eps) * pi^b with w + 2b = 1; both exponents are exact.
            let b = (1 - self.0.w) / 2;
            let pw = LocalField::pow(&self.0.base, &self.0.base.uniformizer(), b)
                .expect("uniformizer power");
            let ome = self.one_minus_eps();
            LocalField::mul(self, &ome, &self.embed(&pw))
        } else {
            self.embed(&self.0.base.uniformizer())
        }
    }

    fn lift(&self, r: &ResidueElement) -> CResult<CycElem> {
        Ok(self.embed(&self.0.base.lift(r)?))
    }

    fn add(&self, a: &CycElem, b: &CycElem) -> CycElem {
        CycElem { c0: a.c0.add(&b.c0), c1: a.c1.add(&b.c1) }
    }
    fn sub(&self, a: &CycElem, b: &CycElem) -> CycElem {
        CycElem { c0: a.c0.sub(&b.c0), c1: a.c1.sub(&b.c1) }
    }
    fn mul(&self, a: &CycElem, b: &CycElem) -> CycElem {
        // (a0 + a1 Y)(b0 + b1 Y) with Y^2 = -1 - Y.
        let cross = a.c1.mul(&b.c1);
        CycElem {
            c0: a.c0.mul(&b.c0).sub(&cross),
            c1: a.c0.mul(&b.c1).add(&a.c1.mul(&b.c0)).sub(&cross),
        }
    }
    fn neg(&self, a: &CycElem) -> CycElem {
        CycElem { c0: a.c0.neg(), c1: a.c1.neg() }
    }

    fn inv(&self, a: &CycElem) -> CResult<CycElem> {
        let n = self.norm(a);
        let ni = n.inv()?;
        let c = self.conj(a);
        Ok(CycElem { c0: c.c0.mul(&ni), c1: c.c1.mul(&ni) })
    }

    fn val_view(&self, a: &CycElem) -> ValView {
        if self.0.ramified {
            // a = (c0 + c1) - c1 (1 - eps); the two parts sit at distinct
            // parities of the normalized value group, so their minimum is
            // never a tie.
            let even = a.c0.add(&a.c1).val_view().scale(2);
            let odd = a.c1.val_view().scale(2).shift(self.0.w);
            combine_min([even, odd])
        } else {
            match self.norm(a).val_view() {
                ValView::Exact(v) => ValView::Exact(v.div_euclid(2)),
                ValView::AtLeast(b) => ValView::AtLeast(b.div_euclid(2)),
                ValView::Infinite => ValView::Infinite,
            }
        }
    }

    fn residue(&self, a: &CycElem) -> CResult<ResidueElement> {
        if !self.0.ramified {
            // The inertial quadratic has a genuinely larger residue field.
            match self.val_view(a) {
                ValView::Infinite => return Ok(self.residue_field().zero()),
                ValView::Exact(v) if v > 0 => return Ok(self.residue_field().zero()),
                ValView::AtLeast(b) if b > 0 => return Ok(self.residue_field().zero()),
                _ => {
                    return Err(Error::UnsupportedField(
                        "residue arithmetic in the inertial eps-extension".into(),
                    ))
                }
            }
        }
        match self.val_view(a) {
            ValView::Infinite => Ok(self.residue_field().zero()),
            ValView::AtLeast(b) if b > 0 => Ok(self.residue_field().zero()),
            ValView::AtLeast(b) => Err(Error::prec("residue of an eps-extension element", b)),
            ValView::Exact(v) if v < 0 => {
                Err(Error::NotAUnit { val: num_rational::Ratio::from_integer(v) })
            }
            ValView::Exact(v) if v > 0 => Ok(self.residue_field().zero()),
            ValView::Exact(_) => {
                // Unit: the even branch carries the residue.
                a.c0.add(&a.c1).residue()
            }
        }
    }

    fn is_exact_zero(&self, a: &CycElem) -> bool {
        a.c0.is_exact_zero() && a.c1.is_exact_zero()
    }
}

// ---------------------------------------------------------------------------
// the context object
// ---------------------------------------------------------------------------

/// Where the primitive p-th root of unity lives relative to K, plus the
/// Galois data (automorphism exponent s with phi(eps) = eps^s, and the
/// averaging exponent l with s l = 1 mod p).
#[derive(Clone, Debug)]
pub enum CycMode {
    /// eps lies in K itself; degree m = 1 and phi is the identity.
    InField { eps: VElem },
    /// p = 3, v(3) odd: K(eps) is ramified quadratic, fully supported.
    Ramified { ext: CycField },
    /// p = 3, v(3) even, eps not in K: inertial quadratic, arithmetic only.
    Inertial { ext: CycField },
}

/// An element of K(eps), presented either through K itself or through the
/// quadratic extension, matching where eps lives for the context at hand.
#[derive(Clone, Debug)]
pub enum EpsElem {
    Base(VElem),
    Ext(CycElem),
}

impl EpsElem {
    pub fn as_base(&self) -> Option<&VElem> {
        match self {
            EpsElem::Base(x) => Some(x),
            EpsElem::Ext(_) => None,
        }
    }

    pub fn as_ext(&self) -> Option<&CycElem> {
        match self {
            EpsElem::Ext(x) => Some(x),
            EpsElem::Base(_) => None,
        }
    }
}

impl fmt::Display for EpsElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EpsElem::Base(x) => write!(f, "{x}"),
            EpsElem::Ext(x) => write!(f, "{x}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CyclotomicContext {
    base: ValuedField,
    mode: CycMode,
}

impl CyclotomicContext {
    pub fn new(base: &ValuedField) -> CResult<CyclotomicContext> {
        if !base.char_zero() {
            return Err(Error::WrongCharacteristic(
                "the eps-context is a characteristic-0 construction".into(),
            ));
        }
        let p = LocalField::p(base);
        let mode = match p {
            2 => CycMode::InField { eps: base.from_int(-1) },
            3 => {
                let f = [base.one(), base.one(), base.one()];
                let rs = field_roots(base, &f)?;
                if let Some(r) = rs.into_iter().next() {
                    CycMode::InField { eps: r }
                } else {
                    let ext = CycField::new(base)?;
                    if ext.is_ramified() {
                        CycMode::Ramified { ext }
                    } else {
                        CycMode::Inertial { ext }
                    }
                }
            }
            _ => {
                return Err(Error::UnsupportedField(format!(
                    "eps-context is implemented for p in {{2, 3}}, got p = {p}"
                )))
            }
        };
        let ctx = CyclotomicContext { base: base.clone(), mode };
        ctx.verify_one_minus_eps_value()?;
        Ok(ctx)
    }

    /// v(1 - eps) = v(p)/(p - 1), in the value group of the field where eps
    /// lives. Checked at construction.
    fn verify_one_minus_eps_value(&self) -> CResult<()> {
        let p = LocalField::p(&self.base) as i64;
        let vp = self.base.v_of_p().expect("char 0");
        match &self.mode {
            CycMode::InField { eps } => {
                let d = self.base.one().sub(eps);
                let v = d.val()?;
                if v * (p - 1) != vp {
                    return Err(Error::CheckFailed(format!(
                        "v(1 - eps) = {v} but v(p)/(p-1) = {vp}/{}",
                        p - 1
                    )));
                }
            }
            CycMode::Ramified { ext } => {
                let v = LocalField::val(ext, &ext.one_minus_eps())?;
                let vp_ext = LocalField::v_of_p(ext).unwrap();
                if v * (p - 1) != vp_ext {
                    return Err(Error::CheckFailed(format!(
                        "v(1 - eps) = {v} in K(eps) but v(p)/(p-1) = {vp_ext}/{}",
                        p - 1
                    )));
                }
            }
            CycMode::Inertial { .. } => {
                // v(1 - eps) = v(3)/2 is not in the value group of an
                // inertial quadratic; this mode exists for arithmetic only
                // and is rejected by the operations that need the invariant.
            }
        }
        Ok(())
    }

    pub fn base(&self) -> &ValuedField {
        &self.base
    }

    pub fn mode(&self) -> &CycMode {
        &self.mode
    }

    /// Degree m = [K(eps) : K], either 1 or 2 here.
    pub fn m(&self) -> i64 {
        match self.mode {
            CycMode::InField { .. } => 1,
            _ => 2,
        }
    }

    /// phi(eps) = eps^s for the generator phi of Gal(K(eps)/K).
    pub fn s(&self) -> i64 {
        match self.mode {
            CycMode::InField { .. } => 1,
            _ => 2,
        }
    }

    /// l with s * l = 1 mod p, used as the averaging exponent.
    pub fn l(&self) -> i64 {
        match self.mode {
            CycMode::InField { .. } => 1,
            _ => 2,
        }
    }

    /// eps as an element of K, when it lies there.
    pub fn eps_in_base(&self) -> Option<&VElem> {
        match &self.mode {
            CycMode::InField { eps } => Some(eps),
            _ => None,
        }
    }

    /// The extension field, when eps is not in K.
    pub fn extension(&self) -> Option<&CycField> {
        match &self.mode {
            CycMode::Ramified { ext } | CycMode::Inertial { ext } => Some(ext),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vanishes(x: &VElem) -> bool {
        !matches!(x.val_view(), ValView::Exact(_))
    }

    fn cyc_vanishes(ext: &CycField, x: &CycElem) -> bool {
        !matches!(LocalField::val_view(ext, x), ValView::Exact(_))
    }

    #[test]
    fn q2_context_is_in_field() {
        let k = ValuedField::padic(2, 24).unwrap();
        let ctx = CyclotomicContext::new(&k).unwrap();
        assert_eq!(ctx.m(), 1);
        let eps = ctx.eps_in_base().unwrap();
        assert!(vanishes(&eps.add(&k.one())));
    }

    #[test]
    fn q3_context_is_ramified_quadratic() {
        let k = ValuedField::padic(3, 24).unwrap();
        let ctx = CyclotomicContext::new(&k).unwrap();
        assert_eq!(ctx.m(), 2);
        assert_eq!((ctx.s(), ctx.l()), (2, 2));
        let ext = ctx.extension().unwrap();
        assert!(ext.is_ramified());
        // v_eps(1 - eps) = v_K(3) = 1 in the re-normalized group where
        // v_eps(3) = 2.
        let ome = ext.one_minus_eps();
        assert_eq!(LocalField::val(ext, &ome).unwrap(), 1);
        assert_eq!(LocalField::val(ext, &ext.embed(&k.from_int(3))).unwrap(), 2);
        // N(1 - eps) = 3.
        let n = ext.norm(&ome);
        assert!(vanishes(&n.sub(&k.from_int(3))));
    }

    #[test]
    fn eps_arithmetic_identities() {
        let k = ValuedField::padic(3, 24).unwrap();
        let ext = CycField::new(&k).unwrap();
        let eps = ext.eps();
        // eps^3 = 1 and 1 + eps + eps^2 = 0.
        let e2 = LocalField::mul(&ext, &eps, &eps);
        let e3 = LocalField::mul(&ext, &e2, &eps);
        assert!(cyc_vanishes(&ext, &LocalField::sub(&ext, &e3, &ext.one())));
        let s = LocalField::add(&ext, &LocalField::add(&ext, &ext.one(), &eps), &e2);
        assert!(cyc_vanishes(&ext, &s));
        // (1 - eps)^2 = -3 eps.
        let ome = ext.one_minus_eps();
        let sq = LocalField::mul(&ext, &ome, &ome);
        let rhs = LocalField::mul(&ext, &ext.from_int(-3), &eps);
        assert!(cyc_vanishes(&ext, &LocalField::sub(&ext, &sq, &rhs)));
    }

    #[test]
    fn inverse_and_residue_in_ramified_mode() {
        let k = ValuedField::padic(3, 24).unwrap();
        let ext = CycField::new(&k).unwrap();
        let x = LocalField::add(&ext, &ext.from_int(2), &ext.eps()); // 2 + eps
        let xi = LocalField::inv(&ext, &x).unwrap();
        let prod = LocalField::mul(&ext, &x, &xi);
        let diff = LocalField::sub(&ext, &prod, &ext.one());
        assert!(!matches!(LocalField::val_view(&ext, &diff), ValView::Exact(_)));
        // 2 + eps is a unit with residue (2 + 1) mod 3 = 0? No: v(2 + eps):
        // even branch v(2 + 1) = v(3) = 1 > 0, odd branch v(1)*2 + 1 = 1
        // (tie cannot happen; both are at value 2 and 1 resp.) so v = 1.
        assert_eq!(LocalField::val(&ext, &x).unwrap(), 1);
        // A genuine unit: eps itself (norm 1).
        assert_eq!(LocalField::val(&ext, &ext.eps()).unwrap(), 0);
        let r = LocalField::residue(&ext, &ext.eps()).unwrap();
        assert!(r.is_one());
    }

    #[test]
    fn uniformizer_has_value_one_over_eisenstein_base() {
        // Base with v(3) = 3: eis(Q_3, X^3 - 3). Then v_eps(3) = 6 and the
        // uniformizer (1 - eps) * pi^-1 has value 3 - 2 = 1.
        let q3 = ValuedField::padic(3, 20).unwrap();
        let k = ValuedField::eisenstein_int(&q3, &[-3, 0, 0]).unwrap();
        let ext = CycField::new(&k).unwrap();
        assert_eq!(LocalField::v_of_p(&ext), Some(6));
        let u = LocalField::uniformizer(&ext);
        assert_eq!(LocalField::val(&ext, &u).unwrap(), 1);
        let ctx = CyclotomicContext::new(&k).unwrap();
        assert_eq!(ctx.m(), 2);
    }

    #[test]
    fn p5_rejected() {
        let k = ValuedField::padic(5, 16).unwrap();
        assert!(matches!(
            CyclotomicContext::new(&k),
            Err(Error::UnsupportedField(_))
        ));
    }
}
