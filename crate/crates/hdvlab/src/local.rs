//! The common interface of every discrete valued field the workbench can
//! compute in: the four base models, the cyclotomic quadratic extension
//! K(eps), and degree-p tower stories. All implementations present their
//! value group normalized to Z, so threshold comparisons and the generic
//! algorithms (Newton lifting, p-th power analysis, normality
//! classification) are written once.

use num_rational::Ratio;

use crate::error::{CResult, Error};
use crate::residue::{ResidueElement, ResidueField};
use crate::valued::{VElem, ValView, ValuedField};

pub trait LocalField: Clone + PartialEq + std::fmt::Display {
    type Elem: Clone + PartialEq + std::fmt::Debug + std::fmt::Display;

    /// Residual characteristic.
    fn p(&self) -> u64;
    fn char_zero(&self) -> bool;
    /// v(p) in the normalized value group; None in equal characteristic.
    fn v_of_p(&self) -> Option<i64>;
    fn residue_field(&self) -> ResidueField;
    fn default_prec(&self) -> i64;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_int(&self, n: i64) -> Self::Elem;
    fn uniformizer(&self) -> Self::Elem;
    fn lift(&self, r: &ResidueElement) -> CResult<Self::Elem>;

    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> CResult<Self::Elem>;

    fn val_view(&self, a: &Self::Elem) -> ValView;
    fn residue(&self, a: &Self::Elem) -> CResult<ResidueElement>;
    fn is_exact_zero(&self, a: &Self::Elem) -> bool;

    /// The underlying base model, when this field is one.
    fn as_model(&self) -> Option<&ValuedField> {
        None
    }
    /// Convert an element to the base-model representation, when possible.
    fn model_elem(&self, _x: &Self::Elem) -> Option<VElem> {
        None
    }
    /// Convert a base-model element into this field's representation; only
    /// base models themselves support it.
    fn from_model_elem(&self, _x: VElem) -> Option<Self::Elem> {
        None
    }

    // ---- provided ----------------------------------------------------------

    fn val(&self, a: &Self::Elem) -> CResult<i64> {
        match self.val_view(a) {
            ValView::Exact(v) => Ok(v),
            ValView::AtLeast(b) => Err(Error::prec("valuation", b)),
            ValView::Infinite => {
                Err(Error::PreconditionViolated("valuation of zero is infinite".into()))
            }
        }
    }

    fn div(&self, a: &Self::Elem, b: &Self::Elem) -> CResult<Self::Elem> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    fn pow(&self, a: &Self::Elem, e: i64) -> CResult<Self::Elem> {
        let base = if e < 0 { self.inv(a)? } else { a.clone() };
        let mut acc = self.one();
        let mut sq = base;
        let mut n = e.unsigned_abs();
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(&acc, &sq);
            }
            n >>= 1;
            if n > 0 {
                sq = self.mul(&sq, &sq);
            }
        }
        Ok(acc)
    }

    /// Do a and b agree at working precision? Exact arithmetic can leave a
    /// residual whose valuation is exactly known but far beyond the digits
    /// anyone asked for; such residuals count as agreement once they pass
    /// half the precision window.
    fn agrees(&self, a: &Self::Elem, b: &Self::Elem) -> bool {
        match self.val_view(&self.sub(a, b)) {
            ValView::Exact(v) => v >= self.default_prec() / 2,
            _ => true,
        }
    }

    /// v(a - 1) as a view.
    fn vm1(&self, a: &Self::Elem) -> ValView {
        self.val_view(&self.sub(a, &self.one()))
    }

    /// The exact p-th power membership threshold p*v(p)/(p-1) (char 0 only).
    fn pth_power_threshold(&self) -> CResult<Ratio<i64>> {
        let vp = self.v_of_p().ok_or_else(|| {
            Error::WrongCharacteristic(
                "the p-th power threshold needs residual characteristic 0".into(),
            )
        })?;
        let p = self.p() as i64;
        Ok(Ratio::new(p * vp, p - 1))
    }
}

impl LocalField for ValuedField {
    type Elem = VElem;

    fn p(&self) -> u64 {
        ValuedField::p(self)
    }
    fn char_zero(&self) -> bool {
        ValuedField::char_zero(self)
    }
    fn v_of_p(&self) -> Option<i64> {
        ValuedField::v_of_p(self)
    }
    fn residue_field(&self) -> ResidueField {
        ValuedField::residue_field(self)
    }
    fn default_prec(&self) -> i64 {
        ValuedField::default_prec(self)
    }
    fn zero(&self) -> VElem {
        ValuedField::zero(self)
    }
    fn one(&self) -> VElem {
        ValuedField::one(self)
    }
    fn from_int(&self, n: i64) -> VElem {
        ValuedField::from_int(self, n)
    }
    fn uniformizer(&self) -> VElem {
        ValuedField::uniformizer(self)
    }
    fn lift(&self, r: &ResidueElement) -> CResult<VElem> {
        ValuedField::lift(self, r)
    }
    fn add(&self, a: &VElem, b: &VElem) -> VElem {
        VElem::add(a, b)
    }
    fn sub(&self, a: &VElem, b: &VElem) -> VElem {
        VElem::sub(a, b)
    }
    fn mul(&self, a: &VElem, b: &VElem) -> VElem {
        VElem::mul(a, b)
    }
    fn neg(&self, a: &VElem) -> VElem {
        VElem::neg(a)
    }
    fn inv(&self, a: &VElem) -> CResult<VElem> {
        VElem::inv(a)
    }
    fn val_view(&self, a: &VElem) -> ValView {
        VElem::val_view(a)
    }
    fn residue(&self, a: &VElem) -> CResult<ResidueElement> {
        VElem::residue(a)
    }
    fn is_exact_zero(&self, a: &VElem) -> bool {
        VElem::is_exact_zero(a)
    }
    fn as_model(&self) -> Option<&ValuedField> {
        Some(self)
    }
    fn model_elem(&self, x: &VElem) -> Option<VElem> {
        Some(x.clone())
    }
    fn from_model_elem(&self, x: VElem) -> Option<VElem> {
        Some(x)
    }
}

/// Compare a valuation view against an exact rational threshold:
/// Some(true/false) when decidable, None when precision blocks the call.
pub fn view_gt(view: ValView, threshold: Ratio<i64>) -> Option<bool> {
    match view {
        ValView::Infinite => Some(true),
        ValView::Exact(v) => Some(Ratio::from_integer(v) > threshold),
        ValView::AtLeast(b) => {
            if Ratio::from_integer(b) > threshold {
                Some(true)
            } else {
                None
            }
        }
    }
}

/// As `view_gt` but for >=.
pub fn view_ge(view: ValView, threshold: Ratio<i64>) -> Option<bool> {
    match view {
        ValView::Infinite => Some(true),
        ValView::Exact(v) => Some(Ratio::from_integer(v) >= threshold),
        ValView::AtLeast(b) => {
            if Ratio::from_integer(b) >= threshold {
                Some(true)
            } else {
                None
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trait_delegation_matches_inherent_methods() {
        let k = ValuedField::padic(2, 32).unwrap();
        let a = LocalField::from_int(&k, 12);
        assert_eq!(LocalField::val(&k, &a).unwrap(), 2);
        let t = LocalField::pth_power_threshold(&k).unwrap();
        assert_eq!(t, Ratio::new(2, 1));
        let e = ValuedField::eisenstein_int(&k, &[-2, 0]).unwrap();
        assert_eq!(LocalField::pth_power_threshold(&e).unwrap(), Ratio::new(4, 1));
    }

    #[test]
    fn threshold_comparisons() {
        assert_eq!(view_gt(ValView::Exact(3), Ratio::new(5, 2)), Some(true));
        assert_eq!(view_gt(ValView::Exact(2), Ratio::new(2, 1)), Some(false));
        assert_eq!(view_gt(ValView::AtLeast(5), Ratio::new(2, 1)), Some(true));
        assert_eq!(view_gt(ValView::AtLeast(1), Ratio::new(2, 1)), None);
        assert_eq!(view_ge(ValView::Exact(2), Ratio::new(2, 1)), Some(true));
        assert_eq!(view_ge(ValView::Infinite, Ratio::new(99, 1)), Some(true));
    }
}
