//! Truncated p-adic numbers: p^shift * unit with the unit kept modulo
//! p^rel (relative precision). Addition works at the weaker of the two
//! absolute precisions, multiplication at the weaker relative precision.
//! Cancellation below the known precision degrades an element to a
//! "fuzz" that only records a lower bound on the valuation.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{CResult, Error};

/// One p-adic number at some precision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Padic {
    /// Exactly zero.
    Zero,
    /// Valuation known to be at least `abs`; nothing else known.
    Fuzz { abs: i64 },
    /// p^shift * unit, with gcd(unit, p) = 1, unit reduced mod p^rel, rel >= 1.
    Unit { shift: i64, unit: BigUint, rel: i64 },
}

pub(crate) fn ppow(p: u64, e: i64) -> BigUint {
    debug_assert!(e >= 0);
    BigUint::from(p).pow(e as u32)
}

impl Padic {
    /// Build from p^shift * mag where mag is known modulo p^rel
    /// (mag need not be a unit; zeros and p-divisibility are normalized out).
    pub fn make(p: u64, shift: i64, mag: BigUint, rel: i64) -> Padic {
        if rel <= 0 {
            return Padic::Fuzz { abs: shift + rel };
        }
        let modulus = ppow(p, rel);
        let mut mag = mag % &modulus;
        if mag.is_zero() {
            return Padic::Fuzz { abs: shift + rel };
        }
        let bp = BigUint::from(p);
        let mut k = 0i64;
        while (&mag % &bp).is_zero() {
            mag /= &bp;
            k += 1;
        }
        if k >= rel {
            return Padic::Fuzz { abs: shift + rel };
        }
        Padic::Unit { shift: shift + k, unit: mag % ppow(p, rel - k), rel: rel - k }
    }

    /// An exact integer: p-factors are stripped first, so the unit part
    /// enjoys the full relative precision.
    pub fn from_int(p: u64, n: i64, rel: i64) -> Padic {
        if n == 0 {
            return Padic::Zero;
        }
        let mut mag = BigUint::from(n.unsigned_abs());
        let bp = BigUint::from(p);
        let mut shift = 0i64;
        while (&mag % &bp).is_zero() {
            mag /= &bp;
            shift += 1;
        }
        let m = ppow(p, rel);
        let mut unit = mag % &m;
        if n < 0 {
            unit = &m - unit;
        }
        Padic::Unit { shift, unit, rel }
    }

    /// Lower bound of the valuation: None means the element is exactly zero.
    pub fn val_lower(&self) -> Option<i64> {
        match self {
            Padic::Zero => None,
            Padic::Fuzz { abs } => Some(*abs),
            Padic::Unit { shift, .. } => Some(*shift),
        }
    }

    /// Absolute precision: the element is pinned down modulo p^(this).
    pub fn abs_prec(&self) -> Option<i64> {
        match self {
            Padic::Zero => None,
            Padic::Fuzz { abs } => Some(*abs),
            Padic::Unit { shift, rel, .. } => Some(shift + rel),
        }
    }

    pub fn neg(&self, p: u64) -> Padic {
        match self {
            Padic::Zero | Padic::Fuzz { .. } => self.clone(),
            Padic::Unit { shift, unit, rel } => {
                Padic::Unit { shift: *shift, unit: ppow(p, *rel) - unit, rel: *rel }
            }
        }
    }

    pub fn add(&self, p: u64, other: &Padic) -> Padic {
        match (self, other) {
            (Padic::Zero, x) | (x, Padic::Zero) => x.clone(),
            (Padic::Fuzz { abs }, x) | (x, Padic::Fuzz { abs }) => {
                // x + (something of val >= abs)
                match x {
                    Padic::Zero => unreachable!(),
                    Padic::Fuzz { abs: b } => Padic::Fuzz { abs: (*abs).min(*b) },
                    Padic::Unit { shift, unit, rel } => {
                        if *shift >= *abs {
                            Padic::Fuzz { abs: *abs }
                        } else {
                            let new_rel = (*abs - *shift).min(*rel);
                            Padic::Unit {
                                shift: *shift,
                                unit: unit % ppow(p, new_rel),
                                rel: new_rel,
                            }
                        }
                    }
                }
            }
            (
                Padic::Unit { shift: s1, unit: u1, rel: r1 },
                Padic::Unit { shift: s2, unit: u2, rel: r2 },
            ) => {
                let s = (*s1).min(*s2);
                let abs = (s1 + r1).min(s2 + r2);
                let rel = abs - s;
                let m = ppow(p, rel);
                let a = u1 * ppow(p, s1 - s) % &m;
                let b = u2 * ppow(p, s2 - s) % &m;
                Padic::make(p, s, (a + b) % &m, rel)
            }
        }
    }

    pub fn sub(&self, p: u64, other: &Padic) -> Padic {
        // Structurally identical known values cancel exactly. (Two fuzzes
        // with the same bound are NOT known equal and must stay fuzzy.)
        match (self, other) {
            (Padic::Zero, Padic::Zero) => return Padic::Zero,
            (Padic::Unit { .. }, Padic::Unit { .. }) if self == other => return Padic::Zero,
            _ => {}
        }
        self.add(p, &other.neg(p))
    }

    pub fn mul(&self, p: u64, other: &Padic) -> Padic {
        match (self, other) {
            (Padic::Zero, _) | (_, Padic::Zero) => Padic::Zero,
            (Padic::Fuzz { abs }, x) | (x, Padic::Fuzz { abs }) => {
                let lb = x.val_lower().expect("zero handled");
                Padic::Fuzz { abs: abs + lb }
            }
            (
                Padic::Unit { shift: s1, unit: u1, rel: r1 },
                Padic::Unit { shift: s2, unit: u2, rel: r2 },
            ) => {
                let rel = (*r1).min(*r2);
                Padic::Unit { shift: s1 + s2, unit: u1 * u2 % ppow(p, rel), rel }
            }
        }
    }

    pub fn inv(&self, p: u64) -> CResult<Padic> {
        match self {
            Padic::Zero => Err(Error::DivisionByZero),
            Padic::Fuzz { abs } => Err(Error::prec("inverse of an element lost to cancellation", *abs)),
            Padic::Unit { shift, unit, rel } => {
                let m = ppow(p, *rel);
                let inv = modinv(unit, &m).expect("unit is coprime to p");
                Ok(Padic::Unit { shift: -shift, unit: inv, rel: *rel })
            }
        }
    }

    /// The residue class mod p of a valuation-zero element, or of p^k * this.
    pub fn residue_scalar(&self, p: u64) -> CResult<u64> {
        match self {
            Padic::Zero => Ok(0),
            Padic::Fuzz { abs } => {
                if *abs >= 1 {
                    Ok(0)
                } else {
                    Err(Error::prec("residue of an element lost to cancellation", *abs))
                }
            }
            Padic::Unit { shift, unit, .. } => {
                if *shift > 0 {
                    Ok(0)
                } else if *shift == 0 {
                    let r = unit % BigUint::from(p);
                    Ok(r.to_u64_digits().first().copied().unwrap_or(0))
                } else {
                    Err(Error::PreconditionViolated(
                        "residue of an element of negative valuation".into(),
                    ))
                }
            }
        }
    }
}

pub(crate) fn modinv(a: &BigUint, m: &BigUint) -> Option<BigUint> {
    use num_bigint::BigInt;
    let a = BigInt::from(a.clone());
    let m = BigInt::from(m.clone());
    let ext = a.extended_gcd(&m);
    if !ext.gcd.is_one() {
        return None;
    }
    let mut x = ext.x % &m;
    if x.sign() == num_bigint::Sign::Minus {
        x += &m;
    }
    x.to_biguint()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_strips_p_factors() {
        let a = Padic::from_int(2, 12, 20);
        assert_eq!(a, Padic::Unit { shift: 2, unit: BigUint::from(3u32), rel: 20 });
        assert_eq!(a.val_lower(), Some(2));
    }

    #[test]
    fn subtraction_of_identical_values_is_exact_zero() {
        let a = Padic::from_int(2, 7, 30);
        assert_eq!(a.sub(2, &a), Padic::Zero);
    }

    #[test]
    fn cancellation_leaves_fuzz_at_joint_precision() {
        // (1 + 2^5) - 1 has valuation exactly 5
        let a = Padic::from_int(2, 33, 10);
        let b = Padic::from_int(2, 1, 10);
        let d = a.add(2, &b.neg(2));
        assert_eq!(d, Padic::Unit { shift: 5, unit: BigUint::from(1u32), rel: 5 });
        // 3 - 3 via different precisions cancels to fuzz when not structural
        let x = Padic::from_int(3, 4, 10);
        let y = Padic::from_int(3, 4, 7);
        let d = x.sub(3, &y);
        assert_eq!(d, Padic::Fuzz { abs: 7 });
    }

    #[test]
    fn inverse_is_correct_to_precision() {
        // Oracle: 1/3 in Q_2 mod 2^10: inverse of 3 mod 1024 = 683
        let three = Padic::from_int(2, 3, 10);
        let inv = three.inv(2).unwrap();
        assert_eq!(inv, Padic::Unit { shift: 0, unit: BigUint::from(683u32), rel: 10 });
        let prod = three.mul(2, &inv);
        assert_eq!(prod, Padic::Unit { shift: 0, unit: BigUint::one(), rel: 10 });
    }

    #[test]
    fn negative_integers_wrap() {
        // -1 in Q_2 at rel 4: 15 mod 16
        let m = Padic::from_int(2, -1, 4);
        assert_eq!(m, Padic::Unit { shift: 0, unit: BigUint::from(15u32), rel: 4 });
        assert_eq!(m.residue_scalar(2).unwrap(), 1);
        // -6 in Q_3: shift 1, unit -2 = 3^r - 2
        let m = Padic::from_int(3, -6, 4);
        match m {
            Padic::Unit { shift, unit, rel } => {
                assert_eq!(shift, 1);
                assert_eq!(rel, 4);
                assert_eq!(unit, BigUint::from(79u32)); // 81 - 2
            }
            _ => panic!("expected unit"),
        }
    }

    #[test]
    fn residue_scalars() {
        assert_eq!(Padic::from_int(3, 10, 8).residue_scalar(3).unwrap(), 1);
        assert_eq!(Padic::from_int(3, 6, 8).residue_scalar(3).unwrap(), 0);
        assert!(Padic::from_int(3, 1, 8).inv(3).unwrap().residue_scalar(3).is_ok());
        // negative valuation has no residue
        let x = Padic::from_int(2, 3, 8).inv(2).unwrap().mul(2, &Padic::from_int(2, 1, 8));
        assert_eq!(x.val_lower(), Some(0));
        let bad = Padic::from_int(2, 6, 8).inv(2).unwrap();
        assert!(bad.residue_scalar(2).is_err());
    }
}
