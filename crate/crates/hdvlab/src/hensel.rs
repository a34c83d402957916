//! Newton refinement of approximate polynomial roots.
//!
//! `hensel_root` implements the quadratic-convergence lift: given f and a
//! start point a with v(f(a)) > 2 v(f'(a)), it produces the unique root c
//! with v(c - a) = v(f(a)) - v(f'(a)), to working precision. The landing
//! valuation is verified before returning.

use crate::error::{CResult, Error};
use crate::local::LocalField;
use crate::valued::ValView;

/// Evaluate a polynomial given by ascending coefficients, by Horner's rule.
pub fn poly_eval<F: LocalField>(k: &F, f: &[F::Elem], x: &F::Elem) -> F::Elem {
    let mut acc = k.zero();
    for c in f.iter().rev() {
        acc = k.add(&k.mul(&acc, x), c);
    }
    acc
}

/// Formal derivative, ascending coefficients.
pub fn poly_derivative<F: LocalField>(k: &F, f: &[F::Elem]) -> Vec<F::Elem> {
    f.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| k.mul(&k.from_int(i as i64), c))
        .collect()
}

/// Refine `a` to a root of `f`.
///
/// Preconditions: v(f(a)) > 2 v(f'(a)) (the Newton contraction condition);
/// violations raise `PreconditionViolated`, and inputs too fuzzy to decide
/// the condition raise `InsufficientPrecision`.
///
/// Postconditions: f(c) vanishes at working precision, and
/// v(c - a) = v(f(a)) - v(f'(a)) exactly (checked before returning).
pub fn hensel_root<F: LocalField>(k: &F, f: &[F::Elem], a: &F::Elem) -> CResult<F::Elem> {
    if f.len() < 2 {
        return Err(Error::PreconditionViolated(
            "root refinement needs a polynomial of degree >= 1".into(),
        ));
    }
    let fa = poly_eval(k, f, a);
    if matches!(k.val_view(&fa), ValView::Infinite) {
        return Ok(a.clone());
    }
    let df = poly_derivative(k, f);
    let fpa = poly_eval(k, &df, a);
    let vfpa = match k.val_view(&fpa) {
        ValView::Exact(v) => v,
        ValView::AtLeast(b) => {
            return Err(Error::prec("derivative valuation at the start point", b));
        }
        ValView::Infinite => {
            return Err(Error::PreconditionViolated(
                "derivative vanishes exactly at the start point".into(),
            ));
        }
    };
    let v0 = match k.val_view(&fa) {
        ValView::Infinite => unreachable!("handled above"),
        ValView::AtLeast(b) => {
            if b > 2 * vfpa {
                // f(a) already vanishes at the available precision; there are
                // no further digits to refine against.
                return Ok(a.clone());
            }
            return Err(Error::prec("value of f at the start point", b));
        }
        ValView::Exact(v) => {
            if v <= 2 * vfpa {
                return Err(Error::PreconditionViolated(format!(
                    "Newton condition fails: v(f(a)) = {v} <= 2 v(f'(a)) = {}",
                    2 * vfpa
                )));
            }
            v
        }
    };
    let expected_gap = v0 - vfpa;
    // Exact arithmetic (polynomial coefficients, monomial inverses) never
    // meets truncation fuzz, so bound the refinement explicitly: stop once
    // the next correction would only move digits default_prec past the
    // landing valuation.
    let target = expected_gap
        .saturating_add(vfpa)
        .saturating_add(k.default_prec());

    let mut c = a.clone();
    let mut fc = fa;
    let mut last_v = v0;
    for iter in 0..64 {
        let fpc = poly_eval(k, &df, &c);
        let step = k.div(&fc, &fpc)?;
        c = k.sub(&c, &step);
        fc = poly_eval(k, f, &c);
        match k.val_view(&fc) {
            ValView::Infinite | ValView::AtLeast(_) => {
                check_landing(k, &c, a, expected_gap)?;
                return Ok(c);
            }
            ValView::Exact(v) => {
                if v >= target {
                    check_landing(k, &c, a, expected_gap)?;
                    return Ok(c);
                }
                if iter > 0 && v <= last_v {
                    return Err(Error::IterationBudgetExceeded(format!(
                        "Newton stalled at v(f(c)) = {v}"
                    )));
                }
                last_v = v;
            }
        }
    }
    Err(Error::IterationBudgetExceeded("Newton root refinement".into()))
}

/// Verify the Newton landing valuation v(c - a) = v(f(a)) - v(f'(a)).
fn check_landing<F: LocalField>(
    k: &F,
    c: &F::Elem,
    a: &F::Elem,
    expected_gap: i64,
) -> CResult<()> {
    if let ValView::Exact(v) = k.val_view(&k.sub(c, a)) {
        if v != expected_gap {
            return Err(Error::CheckFailed(format!(
                "Newton landed at v(c - a) = {v}, expected {expected_gap}"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::valued::ValuedField;

    fn int_poly(k: &ValuedField, cs: &[i64]) -> Vec<crate::valued::VElem> {
        cs.iter().map(|&c| k.from_int(c)).collect()
    }

    #[test]
    fn square_root_of_17_in_q2() {
        // Oracle: 17 = 1 mod 16 is a square in Z_2; from a = 1 the refinement
        // lands at v(c - 1) = v(16) - v(2) = 3, and the root is 9 mod 32.
        let k = ValuedField::padic(2, 48).unwrap();
        let f = int_poly(&k, &[-17, 0, 1]);
        let a = k.from_int(1);
        let c = hensel_root(&k, &f, &a).unwrap();
        let diff = c.sub(&a);
        assert_eq!(diff.val().unwrap(), 3);
        let fc = poly_eval(&k, &f, &c);
        assert!(!matches!(fc.val_view(), ValView::Exact(_)));
        let d9 = c.sub(&k.from_int(9));
        assert!(matches!(d9.val_view(), ValView::Exact(v) if v >= 5));
    }

    #[test]
    fn nonsquare_start_rejected() {
        // v(f(1)) = v(-2) = 1 is not above 2 v(f'(1)) = 2, so 3 offers no
        // Newton handle at 1 (indeed 3 is not a square in Q_2).
        let k = ValuedField::padic(2, 32).unwrap();
        let f = int_poly(&k, &[-3, 0, 1]);
        let err = hensel_root(&k, &f, &k.from_int(1)).unwrap_err();
        assert!(matches!(err, Error::PreconditionViolated(_)));
    }

    #[test]
    fn cube_root_of_28_in_q3() {
        // Oracle: f(1) = -27 has valuation 3 > 2 = 2 v(f'(1)); the cube root
        // of 28 satisfies c = 10 mod 81, with v(c - 1) = 2.
        let k = ValuedField::padic(3, 40).unwrap();
        let f = int_poly(&k, &[-28, 0, 0, 1]);
        let a = k.from_int(1);
        let c = hensel_root(&k, &f, &a).unwrap();
        assert_eq!(c.sub(&a).val().unwrap(), 2);
        assert!(matches!(c.sub(&k.from_int(10)).val_view(), ValView::Exact(v) if v >= 4));
    }

    #[test]
    fn artin_schreier_solve_in_laurent_series() {
        // X^2 + X + (t + t^3) over F_2(x)((t)): derivative is 1, so any start
        // with positive value of f works; from 0 the root has v(c) = 1 and
        // residue of c/t equal to 1.
        let rf = crate::residue::ResidueField::rational(2, 1, &["x"]).unwrap();
        let k = ValuedField::laurent(rf.clone(), 24).unwrap();
        let t = k.uniformizer();
        let t3 = t.mul(&t).mul(&t);
        let f = vec![t.add(&t3), k.one(), k.one()];
        let c = hensel_root(&k, &f, &k.zero()).unwrap();
        assert_eq!(c.val().unwrap(), 1);
        let lead = c.mul(&t.inv().unwrap()).residue().unwrap();
        assert!(lead.is_one());
        // Exact series arithmetic: the residual is exactly known but pushed
        // past the working-precision target v >= gap + v(f') + default_prec.
        let fc = poly_eval(&k, &f, &c);
        match fc.val_view() {
            ValView::Exact(v) => assert!(v >= 25, "residual valuation {v}"),
            _ => {}
        }
    }

    #[test]
    fn vanishing_derivative_rejected() {
        // X^2 + t in characteristic 2 has identically zero derivative and no
        // root, so there is no Newton handle anywhere.
        let rf = crate::residue::ResidueField::finite(2, 1).unwrap();
        let k = ValuedField::laurent(rf, 16).unwrap();
        let f = vec![k.uniformizer(), k.zero(), k.one()];
        let err = hensel_root(&k, &f, &k.zero()).unwrap_err();
        assert!(matches!(err, Error::PreconditionViolated(_)));
    }

    #[test]
    fn exact_root_short_circuits() {
        let k = ValuedField::padic(5, 20).unwrap();
        let f = int_poly(&k, &[-4, 0, 1]);
        let a = k.from_int(2);
        let c = hensel_root(&k, &f, &a).unwrap();
        assert!(c.sub(&a).is_exact_zero());
    }
}
