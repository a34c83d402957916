//! Arithmetic in the finite coefficient fields F_{p^d}.
//!
//! Elements are coefficient vectors of length `d` over F_p, ascending powers
//! of a fixed generator. The modulus is the lexicographically smallest monic
//! irreducible of degree `d` over F_p, found by deterministic search, so a
//! field built twice is the same field.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{CResult, Error};

pub(crate) type FFElem = Vec<u64>;

/// Candidate budget for exhaustive sweeps over a finite field.
pub(crate) const ENUM_BUDGET: u64 = 1 << 20;

// ---------------------------------------------------------------------------
// scalars mod p
// ---------------------------------------------------------------------------

#[inline]
pub(crate) fn sadd(p: u64, a: u64, b: u64) -> u64 {
    (a + b) % p
}

#[inline]
pub(crate) fn ssub(p: u64, a: u64, b: u64) -> u64 {
    (a + p - b % p) % p
}

#[inline]
pub(crate) fn smul(p: u64, a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub(crate) fn spow(p: u64, mut a: u64, mut e: u64) -> u64 {
    let mut acc = 1u64;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = smul(p, acc, a);
        }
        a = smul(p, a, a);
        e >>= 1;
    }
    acc
}

pub(crate) fn sinv(p: u64, a: u64) -> u64 {
    debug_assert!(a % p != 0, "inverse of zero mod p");
    spow(p, a, p - 2)
}

// ---------------------------------------------------------------------------
// univariate polynomials over F_p (modulus search)
// ---------------------------------------------------------------------------

fn pnorm(mut v: Vec<u64>) -> Vec<u64> {
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

fn padd(p: u64, a: &[u64], b: &[u64]) -> Vec<u64> {
    let n = a.len().max(b.len());
    let mut out = vec![0u64; n];
    for (i, o) in out.iter_mut().enumerate() {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        *o = sadd(p, x, y);
    }
    pnorm(out)
}

fn psub(p: u64, a: &[u64], b: &[u64]) -> Vec<u64> {
    let n = a.len().max(b.len());
    let mut out = vec![0u64; n];
    for (i, o) in out.iter_mut().enumerate() {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        *o = ssub(p, x, y);
    }
    pnorm(out)
}

fn pmul(p: u64, a: &[u64], b: &[u64]) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = sadd(p, out[i + j], smul(p, x, y));
        }
    }
    pnorm(out)
}

/// Remainder of `a` modulo `b` (any nonzero `b`).
fn prem(p: u64, a: &[u64], b: &[u64]) -> Vec<u64> {
    let b = pnorm(b.to_vec());
    assert!(!b.is_empty(), "remainder by zero polynomial");
    let mut r = pnorm(a.to_vec());
    let lb = sinv(p, *b.last().unwrap());
    while r.len() >= b.len() {
        let c = smul(p, *r.last().unwrap(), lb);
        let shift = r.len() - b.len();
        let mut t = vec![0u64; shift];
        t.extend(b.iter().map(|&x| smul(p, x, c)));
        r = psub(p, &r, &t);
    }
    r
}

fn pgcd(p: u64, a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut a = pnorm(a.to_vec());
    let mut b = pnorm(b.to_vec());
    while !b.is_empty() {
        let r = prem(p, &a, &b);
        a = b;
        b = r;
    }
    if let Some(&l) = a.last() {
        let li = sinv(p, l);
        a = a.iter().map(|&x| smul(p, x, li)).collect();
    }
    a
}

fn ppowmod_big(p: u64, base: &[u64], e: &BigUint, m: &[u64]) -> Vec<u64> {
    let mut acc = vec![1u64];
    let mut b = prem(p, base, m);
    let mut e = e.clone();
    let two = BigUint::from(2u32);
    while !e.is_zero() {
        if (&e % &two).is_one() {
            acc = prem(p, &pmul(p, &acc, &b), m);
        }
        b = prem(p, &pmul(p, &b, &b), m);
        e >>= 1;
    }
    acc
}

fn small_prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = vec![];
    let mut f = 2;
    while f * f <= n {
        if n % f == 0 {
            out.push(f);
            while n % f == 0 {
                n /= f;
            }
        }
        f += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Rabin irreducibility test over F_p.
fn irreducible_mod_p(p: u64, h: &[u64]) -> bool {
    let h = pnorm(h.to_vec());
    if h.len() < 2 {
        return false;
    }
    let n = (h.len() - 1) as u64;
    if n == 1 {
        return true;
    }
    let x = vec![0u64, 1];
    // x^(p^n) == x mod h
    let q_n = BigUint::from(p).pow(n as u32);
    let lhs = ppowmod_big(p, &x, &q_n, &h);
    if pnorm(psub(p, &lhs, &x)) != Vec::<u64>::new() {
        return false;
    }
    // gcd(x^(p^(n/l)) - x, h) == 1 for each prime l | n
    for l in small_prime_factors(n) {
        let q_nl = BigUint::from(p).pow((n / l) as u32);
        let xq = ppowmod_big(p, &x, &q_nl, &h);
        let g = pgcd(p, &psub(p, &xq, &x), &h);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

// ---------------------------------------------------------------------------
// the field context
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct FFCtx {
    pub p: u64,
    pub d: usize,
    /// Monic irreducible of degree d, ascending, length d+1. For d = 1 the
    /// generator is 0 and the modulus is just `y`.
    pub modulus: Vec<u64>,
}

impl FFCtx {
    pub fn new(p: u64, d: usize) -> CResult<FFCtx> {
        if p < 2 || small_prime_factors(p) != vec![p] {
            return Err(Error::UnsupportedField(format!("{p} is not prime")));
        }
        if d == 0 {
            return Err(Error::UnsupportedField("extension degree 0".into()));
        }
        let size = (p as f64).powi(d as i32);
        if size > ENUM_BUDGET as f64 {
            return Err(Error::UnsupportedField(format!(
                "residue field F_{p}^{d} exceeds the enumeration budget"
            )));
        }
        if d == 1 {
            return Ok(FFCtx { p, d, modulus: vec![0, 1] });
        }
        // lexicographically smallest monic irreducible of degree d
        let total = (p as u128).pow(d as u32);
        let mut idx = 0u128;
        while idx < total {
            let mut coeffs = Vec::with_capacity(d + 1);
            let mut k = idx;
            for _ in 0..d {
                coeffs.push((k % p as u128) as u64);
                k /= p as u128;
            }
            coeffs.push(1);
            if irreducible_mod_p(p, &coeffs) {
                return Ok(FFCtx { p, d, modulus: coeffs });
            }
            idx += 1;
        }
        unreachable!("an irreducible of every degree exists over F_p")
    }

    pub fn q(&self) -> u64 {
        (self.p as u128).pow(self.d as u32) as u64
    }

    pub fn zero(&self) -> FFElem {
        vec![0; self.d]
    }

    pub fn one(&self) -> FFElem {
        let mut v = vec![0; self.d];
        v[0] = 1;
        v
    }

    pub fn from_int(&self, n: i64) -> FFElem {
        let p = self.p as i64;
        let mut v = vec![0; self.d];
        v[0] = (((n % p) + p) % p) as u64;
        v
    }

    /// The generator of F_{p^d} over F_p (zero when d = 1).
    pub fn gen(&self) -> FFElem {
        let mut v = vec![0; self.d];
        if self.d > 1 {
            v[1] = 1;
        }
        v
    }

    pub fn is_zero(&self, a: &FFElem) -> bool {
        a.iter().all(|&c| c == 0)
    }

    pub fn add(&self, a: &FFElem, b: &FFElem) -> FFElem {
        a.iter().zip(b).map(|(&x, &y)| sadd(self.p, x, y)).collect()
    }

    pub fn sub(&self, a: &FFElem, b: &FFElem) -> FFElem {
        a.iter().zip(b).map(|(&x, &y)| ssub(self.p, x, y)).collect()
    }

    pub fn neg(&self, a: &FFElem) -> FFElem {
        a.iter().map(|&x| ssub(self.p, 0, x)).collect()
    }

    pub fn scale(&self, a: &FFElem, c: u64) -> FFElem {
        a.iter().map(|&x| smul(self.p, x, c)).collect()
    }

    fn pad(&self, v: Vec<u64>) -> FFElem {
        let mut v = v;
        v.resize(self.d, 0);
        v
    }

    pub fn mul(&self, a: &FFElem, b: &FFElem) -> FFElem {
        let prod = pmul(self.p, a, b);
        self.pad(prem(self.p, &prod, &self.modulus))
    }

    pub fn inv(&self, a: &FFElem) -> CResult<FFElem> {
        if self.is_zero(a) {
            return Err(Error::DivisionByZero);
        }
        if self.d == 1 {
            let mut v = self.zero();
            v[0] = sinv(self.p, a[0]);
            return Ok(v);
        }
        // extended Euclid in F_p[y] against the modulus
        let p = self.p;
        let (mut r0, mut r1) = (self.modulus.clone(), pnorm(a.clone()));
        let (mut s0, mut s1) = (Vec::<u64>::new(), vec![1u64]);
        while !r1.is_empty() {
            // r0 = q r1 + r2
            let mut q = vec![0u64; r0.len().saturating_sub(r1.len()) + 1];
            let mut r = r0.clone();
            let lb = sinv(p, *r1.last().unwrap());
            while r.len() >= r1.len() && !r.is_empty() {
                let c = smul(p, *r.last().unwrap(), lb);
                let shift = r.len() - r1.len();
                q[shift] = sadd(p, q[shift], c);
                let mut t = vec![0u64; shift];
                t.extend(r1.iter().map(|&x| smul(p, x, c)));
                r = psub(p, &r, &t);
            }
            let s2 = psub(p, &s0, &pmul(p, &q, &s1));
            r0 = std::mem::replace(&mut r1, r);
            s0 = std::mem::replace(&mut s1, s2);
        }
        // r0 = gcd (a unit, since the modulus is irreducible and a != 0)
        debug_assert_eq!(r0.len(), 1);
        let c = sinv(p, r0[0]);
        Ok(self.pad(s0.iter().map(|&x| smul(p, x, c)).collect()))
    }

    pub fn pow(&self, a: &FFElem, mut e: u128) -> FFElem {
        let mut acc = self.one();
        let mut b = a.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &b);
            }
            b = self.mul(&b, &b);
            e >>= 1;
        }
        acc
    }

    /// The inverse of Frobenius: the unique p-th root.
    pub fn pth_root(&self, a: &FFElem) -> FFElem {
        // a^(p^(d-1)) since Frobenius has order d on F_{p^d}
        let e = (self.p as u128).pow((self.d - 1) as u32);
        self.pow(a, e)
    }

    /// Square root, if one exists. Exhaustive over the field (budget-guarded
    /// at construction), which keeps p = 2 and p odd uniform.
    pub fn sqrt(&self, a: &FFElem) -> Option<FFElem> {
        if self.is_zero(a) {
            return Some(self.zero());
        }
        if self.p == 2 {
            // Frobenius is bijective: x -> x^2, so the root is a^(2^(d-1)).
            return Some(self.pth_root(a));
        }
        let leg = self.pow(a, ((self.q() - 1) / 2) as u128);
        if leg != self.one() {
            return None;
        }
        for cand in self.enumerate() {
            if self.mul(&cand, &cand) == *a {
                return Some(cand);
            }
        }
        unreachable!("legendre symbol said square")
    }

    /// All q field elements, odometer order.
    pub fn enumerate(&self) -> Vec<FFElem> {
        let q = self.q();
        let mut out = Vec::with_capacity(q as usize);
        for idx in 0..q {
            let mut v = vec![0u64; self.d];
            let mut k = idx;
            for slot in v.iter_mut() {
                *slot = k % self.p;
                k /= self.p;
            }
            out.push(v);
        }
        out
    }

    /// Render an element as a polynomial in the generator `g`.
    pub fn display(&self, a: &FFElem) -> String {
        if self.d == 1 {
            return a[0].to_string();
        }
        let mut parts = vec![];
        for (i, &c) in a.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let m = match i {
                0 => c.to_string(),
                1 if c == 1 => "g".into(),
                1 => format!("{c}*g"),
                _ if c == 1 => format!("g^{i}"),
                _ => format!("{c}*g^{i}"),
            };
            parts.push(m);
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

// ---------------------------------------------------------------------------
// univariate polynomials over F_q (irreducibility for general p over finite
// residue fields)
// ---------------------------------------------------------------------------

pub(crate) type UPoly = Vec<FFElem>;

pub(crate) fn upnorm(ctx: &FFCtx, mut v: UPoly) -> UPoly {
    while v.last().map(|c| ctx.is_zero(c)) == Some(true) {
        v.pop();
    }
    v
}

pub(crate) fn upadd(ctx: &FFCtx, a: &UPoly, b: &UPoly) -> UPoly {
    let n = a.len().max(b.len());
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let x = a.get(i).cloned().unwrap_or_else(|| ctx.zero());
        let y = b.get(i).cloned().unwrap_or_else(|| ctx.zero());
        out.push(ctx.add(&x, &y));
    }
    upnorm(ctx, out)
}

pub(crate) fn upsub(ctx: &FFCtx, a: &UPoly, b: &UPoly) -> UPoly {
    let n = a.len().max(b.len());
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let x = a.get(i).cloned().unwrap_or_else(|| ctx.zero());
        let y = b.get(i).cloned().unwrap_or_else(|| ctx.zero());
        out.push(ctx.sub(&x, &y));
    }
    upnorm(ctx, out)
}

pub(crate) fn upmul(ctx: &FFCtx, a: &UPoly, b: &UPoly) -> UPoly {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![ctx.zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if ctx.is_zero(x) {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = ctx.add(&out[i + j], &ctx.mul(x, y));
        }
    }
    upnorm(ctx, out)
}

pub(crate) fn uprem(ctx: &FFCtx, a: &UPoly, b: &UPoly) -> CResult<UPoly> {
    let b = upnorm(ctx, b.clone());
    if b.is_empty() {
        return Err(Error::DivisionByZero);
    }
    let lb = ctx.inv(b.last().unwrap())?;
    let mut r = upnorm(ctx, a.clone());
    while r.len() >= b.len() {
        let c = ctx.mul(r.last().unwrap(), &lb);
        let shift = r.len() - b.len();
        let mut t = vec![ctx.zero(); shift];
        t.extend(b.iter().map(|x| ctx.mul(x, &c)));
        r = upsub(ctx, &r, &t);
    }
    Ok(r)
}

pub(crate) fn upgcd(ctx: &FFCtx, a: &UPoly, b: &UPoly) -> CResult<UPoly> {
    let mut a = upnorm(ctx, a.clone());
    let mut b = upnorm(ctx, b.clone());
    while !b.is_empty() {
        let r = uprem(ctx, &a, &b)?;
        a = b;
        b = r;
    }
    if let Some(l) = a.last().cloned() {
        let li = ctx.inv(&l)?;
        a = a.iter().map(|x| ctx.mul(x, &li)).collect();
    }
    Ok(a)
}

fn uppowmod(ctx: &FFCtx, base: &UPoly, e: &BigUint, m: &UPoly) -> CResult<UPoly> {
    let mut acc = vec![ctx.one()];
    let mut b = uprem(ctx, base, m)?;
    let mut e = e.clone();
    let two = BigUint::from(2u32);
    while !e.is_zero() {
        if (&e % &two).is_one() {
            acc = uprem(ctx, &upmul(ctx, &acc, &b), m)?;
        }
        b = uprem(ctx, &upmul(ctx, &b, &b), m)?;
        e >>= 1;
    }
    Ok(acc)
}

/// Rabin irreducibility over F_q for monic f (any degree).
pub(crate) fn up_irreducible(ctx: &FFCtx, f: &UPoly) -> CResult<bool> {
    let f = upnorm(ctx, f.clone());
    if f.len() < 2 {
        return Ok(false);
    }
    let n = (f.len() - 1) as u64;
    if n == 1 {
        return Ok(true);
    }
    let x = vec![ctx.zero(), ctx.one()];
    let q = BigUint::from(ctx.q());
    let lhs = uppowmod(ctx, &x, &q.pow(n as u32), &f)?;
    if !upsub(ctx, &lhs, &x).is_empty() {
        return Ok(false);
    }
    for l in small_prime_factors(n) {
        let xq = uppowmod(ctx, &x, &q.pow((n / l) as u32), &f)?;
        let g = upgcd(ctx, &upsub(ctx, &xq, &x), &f)?;
        if g.len() != 1 {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modulus_search_is_deterministic_and_irreducible() {
        // F_4: y^2 + y + 1 is the only monic irreducible quadratic over F_2.
        let f4 = FFCtx::new(2, 2).unwrap();
        assert_eq!(f4.modulus, vec![1, 1, 1]);
        // F_9: y^2 + 1 is the lexicographically smallest (y^2, y^2+y, y^2+2y
        // and the searched order starts at constant 0).
        let f9 = FFCtx::new(3, 2).unwrap();
        assert!(irreducible_mod_p(3, &f9.modulus));
        assert_eq!(f9.modulus.len(), 3);
        let again = FFCtx::new(3, 2).unwrap();
        assert_eq!(f9.modulus, again.modulus);
    }

    #[test]
    fn field_axioms_f8() {
        let f8 = FFCtx::new(2, 3).unwrap();
        let elems = f8.enumerate();
        assert_eq!(elems.len(), 8);
        for a in &elems {
            for b in &elems {
                // commutativity and distributivity spot checks
                assert_eq!(f8.mul(a, b), f8.mul(b, a));
                let c = f8.gen();
                let lhs = f8.mul(a, &f8.add(b, &c));
                let rhs = f8.add(&f8.mul(a, b), &f8.mul(a, &c));
                assert_eq!(lhs, rhs);
            }
            if !f8.is_zero(a) {
                let ai = f8.inv(a).unwrap();
                assert_eq!(f8.mul(a, &ai), f8.one());
            }
        }
    }

    #[test]
    fn frobenius_root_inverts_pth_power() {
        for (p, d) in [(2, 1), (2, 3), (3, 2), (5, 2)] {
            let f = FFCtx::new(p, d).unwrap();
            for a in f.enumerate() {
                let r = f.pth_root(&a);
                assert_eq!(f.pow(&r, p as u128), a);
            }
        }
    }

    #[test]
    fn sqrt_agrees_with_squaring() {
        let f9 = FFCtx::new(3, 2).unwrap();
        let mut squares = 0;
        for a in f9.enumerate() {
            if let Some(r) = f9.sqrt(&a) {
                assert_eq!(f9.mul(&r, &r), a);
                squares += 1;
            }
        }
        // (q-1)/2 nonzero squares plus zero
        assert_eq!(squares, 5);
    }

    #[test]
    fn rabin_over_f2_knows_the_classics() {
        let f2 = FFCtx::new(2, 1).unwrap();
        let one = f2.one();
        // X^2 + X + 1 irreducible
        let f = vec![one.clone(), one.clone(), one.clone()];
        assert!(up_irreducible(&f2, &f).unwrap());
        // X^2 + 1 = (X+1)^2 reducible
        let g = vec![one.clone(), f2.zero(), one.clone()];
        assert!(!up_irreducible(&f2, &g).unwrap());
        // X^5 + X^2 + 1 irreducible over F_2
        let mut h = vec![f2.zero(); 6];
        h[0] = one.clone();
        h[2] = one.clone();
        h[5] = one;
        assert!(up_irreducible(&f2, &h).unwrap());
    }
}
