//! Laurent series over a residue field: sparse coefficient maps with an
//! optional truncation order. `prec: None` means the element is an exact
//! Laurent polynomial; `prec: Some(n)` means coefficients are known for
//! exponents strictly below n.

use std::collections::BTreeMap;

use crate::error::{CResult, Error};
use crate::residue::{ResidueElement, ResidueField};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Series {
    pub map: BTreeMap<i64, ResidueElement>,
    pub prec: Option<i64>,
}

impl Series {
    pub fn normalize(mut self) -> Series {
        self.map.retain(|_, c| !c.is_zero());
        if let Some(n) = self.prec {
            self.map.retain(|k, _| *k < n);
        }
        self
    }

    pub fn zero() -> Series {
        Series { map: BTreeMap::new(), prec: None }
    }

    pub fn from_coeff(r: ResidueElement, exp: i64) -> Series {
        let mut map = BTreeMap::new();
        if !r.is_zero() {
            map.insert(exp, r);
        }
        Series { map, prec: None }
    }

    pub fn is_exact_zero(&self) -> bool {
        self.map.is_empty() && self.prec.is_none()
    }

    /// Smallest exponent with a nonzero coefficient (None if there is none
    /// within the known range).
    pub fn lead(&self) -> Option<(i64, &ResidueElement)> {
        self.map.iter().next().map(|(k, v)| (*k, v))
    }

    pub fn add(&self, other: &Series) -> Series {
        let mut map = self.map.clone();
        for (k, v) in &other.map {
            let entry = map.entry(*k).or_insert_with(|| v.field().zero());
            *entry = entry.add(v);
        }
        let prec = match (self.prec, other.prec) {
            (None, x) | (x, None) => x,
            (Some(a), Some(b)) => Some(a.min(b)),
        };
        Series { map, prec }.normalize()
    }

    pub fn neg(&self) -> Series {
        Series {
            map: self.map.iter().map(|(k, v)| (*k, v.neg())).collect(),
            prec: self.prec,
        }
    }

    pub fn sub(&self, other: &Series) -> Series {
        if self == other {
            // structurally identical known parts; exact when both exact
            if self.prec.is_none() {
                return Series::zero();
            }
        }
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Series) -> Series {
        if self.is_exact_zero() || other.is_exact_zero() {
            return Series::zero();
        }
        let mut map: BTreeMap<i64, ResidueElement> = BTreeMap::new();
        for (i, a) in &self.map {
            for (j, b) in &other.map {
                let c = a.mul(b);
                let entry = map.entry(i + j).or_insert_with(|| c.field().zero());
                *entry = entry.add(&c);
            }
        }
        // truncation order: v(a) + prec(b) and v(b) + prec(a)
        let lead_or = |s: &Series| s.lead().map(|(k, _)| k).or(s.prec);
        let mut prec: Option<i64> = None;
        if let Some(pb) = other.prec {
            let va = lead_or(self).expect("nonzero");
            prec = Some(va + pb);
        }
        if let Some(pa) = self.prec {
            let vb = lead_or(other).expect("nonzero");
            let cand = vb + pa;
            prec = Some(prec.map_or(cand, |x| x.min(cand)));
        }
        Series { map, prec }.normalize()
    }

    /// Inverse, truncated to `digits` relative precision when the input is
    /// exact but has more than one term (geometric tail).
    pub fn inv(&self, digits: i64) -> CResult<Series> {
        let Some((v, lc)) = self.lead() else {
            return Err(match self.prec {
                None => Error::DivisionByZero,
                Some(a) => Error::prec("inverse of a series lost to truncation", a),
            });
        };
        let lci = lc.inv()?;
        // monomial: exact inverse
        if self.map.len() == 1 && self.prec.is_none() {
            return Ok(Series::from_coeff(lci, -v));
        }
        // self = lc t^v (1 + w), w = tail with positive relative exponents
        let rel = match self.prec {
            Some(p) => p - v,
            None => digits,
        };
        let mut w = Series {
            map: self
                .map
                .iter()
                .skip(1)
                .map(|(k, c)| (k - v, c.mul(&lci)))
                .collect(),
            prec: self.prec.map(|p| p - v),
        };
        w.prec = Some(rel.min(w.prec.unwrap_or(i64::MAX)));
        w = w.normalize();
        // sum_{k} (-w)^k, truncated at relative order `rel`
        let one = Series::from_coeff(lc.field().one(), 0);
        let mut acc = one.clone();
        let mut pw = one.clone();
        let nw = w.neg();
        let wval = nw.lead().map(|(k, _)| k).unwrap_or(rel).max(1);
        let mut k = wval;
        while k < rel {
            pw = pw.mul(&nw);
            pw.map.retain(|e, _| *e < rel);
            if pw.map.is_empty() {
                break;
            }
            acc = acc.add(&pw);
            k += wval;
        }
        acc.prec = Some(rel);
        let acc = acc.normalize();
        // result = lc^-1 t^-v * acc
        Ok(Series::from_coeff(lci, -v).mul(&acc))
    }

    pub fn residue(&self, field: &ResidueField) -> CResult<ResidueElement> {
        match self.lead() {
            Some((0, c)) => Ok(c.clone()),
            Some((v, _)) if v > 0 => Ok(field.zero()),
            Some(_) => Err(Error::PreconditionViolated(
                "residue of an element of negative valuation".into(),
            )),
            None => match self.prec {
                None => Ok(field.zero()),
                Some(a) if a >= 1 => Ok(field.zero()),
                Some(a) => Err(Error::prec("residue of a series lost to truncation", a)),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2x() -> ResidueField {
        ResidueField::rational(2, 1, &["x"]).unwrap()
    }

    #[test]
    fn exact_polynomial_arithmetic_stays_exact() {
        let f = f2x();
        let t = Series::from_coeff(f.one(), 1);
        let a = t.add(&Series::from_coeff(f.one(), 0)); // 1 + t
        let sq = a.mul(&a); // 1 + t^2 in char 2
        assert_eq!(sq.prec, None);
        assert_eq!(sq.map.len(), 2);
        assert!(sq.map.contains_key(&0) && sq.map.contains_key(&2));
    }

    #[test]
    fn geometric_inverse() {
        // Oracle: 1/(1 - t) = 1 + t + t^2 + ... over F_2(x) ((1-t) = (1+t))
        let f = f2x();
        let one = Series::from_coeff(f.one(), 0);
        let a = one.add(&Series::from_coeff(f.one(), 1));
        let inv = a.inv(8).unwrap();
        assert_eq!(inv.prec, Some(8));
        for k in 0..8 {
            assert_eq!(inv.map.get(&k), Some(&f.one()), "coefficient of t^{k}");
        }
        // check a * inv = 1 to precision
        let prod = a.mul(&inv);
        assert_eq!(prod.lead().map(|(k, _)| k), Some(0));
        let diff = prod.sub(&Series::from_coeff(f.one(), 0));
        assert!(diff.map.is_empty());
        assert_eq!(diff.prec, Some(8));
    }

    #[test]
    fn monomial_inverse_is_exact() {
        let f = f2x();
        let x = f.var("x").unwrap();
        let m = Series::from_coeff(x.clone(), 3);
        let inv = m.inv(8).unwrap();
        assert_eq!(inv.prec, None);
        assert_eq!(inv.map.get(&-3), Some(&x.inv().unwrap()));
    }

    #[test]
    fn residues() {
        let f = f2x();
        let x = f.var("x").unwrap();
        let s = Series::from_coeff(x.clone(), 0).add(&Series::from_coeff(f.one(), 2));
        assert_eq!(s.residue(&f).unwrap(), x);
        let t = Series::from_coeff(f.one(), 1);
        assert!(t.residue(&f).unwrap().is_zero());
        let neg = Series::from_coeff(f.one(), -1);
        assert!(neg.residue(&f).is_err());
    }
}
