//! Multivariate polynomials and reduced fractions over F_{p^d}.
//!
//! Everything here is exact. Fractions are kept in canonical form (numerator
//! and denominator coprime, denominator monic under the graded-lex term
//! order), so structural equality is field equality — the residue layer's
//! serialization and hashing rely on that.

use super::ff::{FFCtx, FFElem};
use crate::error::{CResult, Error};

pub(crate) type Mono = Vec<u32>;

/// Graded lexicographic order: total degree first, then lex left to right.
pub(crate) fn cmp_mono(a: &Mono, b: &Mono) -> std::cmp::Ordering {
    let da: u64 = a.iter().map(|&e| e as u64).sum();
    let db: u64 = b.iter().map(|&e| e as u64).sum();
    da.cmp(&db).then_with(|| a.cmp(b))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct MPoly {
    pub nvars: usize,
    /// Sorted descending by `cmp_mono`, coefficients nonzero.
    pub terms: Vec<(Mono, FFElem)>,
}

impl MPoly {
    pub fn zero(nvars: usize) -> MPoly {
        MPoly { nvars, terms: vec![] }
    }

    pub fn constant(ctx: &FFCtx, nvars: usize, c: FFElem) -> MPoly {
        if ctx.is_zero(&c) {
            return MPoly::zero(nvars);
        }
        MPoly { nvars, terms: vec![(vec![0; nvars], c)] }
    }

    pub fn one(ctx: &FFCtx, nvars: usize) -> MPoly {
        MPoly::constant(ctx, nvars, ctx.one())
    }

    pub fn var(ctx: &FFCtx, nvars: usize, idx: usize) -> MPoly {
        assert!(idx < nvars);
        let mut m = vec![0; nvars];
        m[idx] = 1;
        MPoly { nvars, terms: vec![(m, ctx.one())] }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.len() <= 1 && self.terms.iter().all(|(m, _)| m.iter().all(|&e| e == 0))
    }

    /// The constant coefficient (the whole value when `is_constant`).
    pub fn constant_coeff(&self, ctx: &FFCtx) -> FFElem {
        self.terms
            .iter()
            .find(|(m, _)| m.iter().all(|&e| e == 0))
            .map(|(_, c)| c.clone())
            .unwrap_or_else(|| ctx.zero())
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .iter()
            .map(|(m, _)| m.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn degree_in(&self, v: usize) -> u32 {
        self.terms.iter().map(|(m, _)| m[v]).max().unwrap_or(0)
    }

    /// Leading coefficient under the term order.
    pub fn lead_coeff(&self) -> Option<&FFElem> {
        self.terms.first().map(|(_, c)| c)
    }

    fn normalize(ctx: &FFCtx, nvars: usize, mut terms: Vec<(Mono, FFElem)>) -> MPoly {
        terms.sort_by(|a, b| cmp_mono(&b.0, &a.0));
        let mut out: Vec<(Mono, FFElem)> = Vec::with_capacity(terms.len());
        for (m, c) in terms {
            if let Some(last) = out.last_mut() {
                if last.0 == m {
                    last.1 = ctx.add(&last.1, &c);
                    continue;
                }
            }
            out.push((m, c));
        }
        out.retain(|(_, c)| !ctx.is_zero(c));
        MPoly { nvars, terms: out }
    }

    pub fn add(&self, ctx: &FFCtx, other: &MPoly) -> MPoly {
        debug_assert_eq!(self.nvars, other.nvars);
        let mut t = self.terms.clone();
        t.extend(other.terms.iter().cloned());
        MPoly::normalize(ctx, self.nvars, t)
    }

    pub fn sub(&self, ctx: &FFCtx, other: &MPoly) -> MPoly {
        self.add(ctx, &other.neg(ctx))
    }

    pub fn neg(&self, ctx: &FFCtx) -> MPoly {
        MPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), ctx.neg(c))).collect(),
        }
    }

    pub fn scale(&self, ctx: &FFCtx, c: &FFElem) -> MPoly {
        if ctx.is_zero(c) {
            return MPoly::zero(self.nvars);
        }
        MPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, k)| (m.clone(), ctx.mul(k, c))).collect(),
        }
    }

    pub fn mul(&self, ctx: &FFCtx, other: &MPoly) -> MPoly {
        debug_assert_eq!(self.nvars, other.nvars);
        let mut t = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m: Mono = ma.iter().zip(mb).map(|(&x, &y)| x + y).collect();
                t.push((m, ctx.mul(ca, cb)));
            }
        }
        MPoly::normalize(ctx, self.nvars, t)
    }

    pub fn pow(&self, ctx: &FFCtx, mut e: u32) -> MPoly {
        let mut acc = MPoly::one(ctx, self.nvars);
        let mut b = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(ctx, &b);
            }
            b = b.mul(ctx, &b);
            e >>= 1;
        }
        acc
    }

    pub fn eval(&self, ctx: &FFCtx, point: &[FFElem]) -> FFElem {
        let mut acc = ctx.zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (v, &e) in m.iter().enumerate() {
                if e > 0 {
                    t = ctx.mul(&t, &ctx.pow(&point[v], e as u128));
                }
            }
            acc = ctx.add(&acc, &t);
        }
        acc
    }

    pub fn derivative(&self, ctx: &FFCtx, v: usize) -> MPoly {
        let mut t = vec![];
        for (m, c) in &self.terms {
            if m[v] == 0 {
                continue;
            }
            let k = ctx.scale(c, (m[v] as u64) % ctx.p);
            if ctx.is_zero(&k) {
                continue;
            }
            let mut m2 = m.clone();
            m2[v] -= 1;
            t.push((m2, k));
        }
        MPoly::normalize(ctx, self.nvars, t)
    }

    /// Coefficients of `self` viewed as a univariate polynomial in variable
    /// `v`, ascending; each coefficient has exponent 0 in `v`.
    pub fn as_univar(&self, v: usize) -> Vec<MPoly> {
        let d = self.degree_in(v) as usize;
        let mut coeffs = vec![MPoly::zero(self.nvars); d + 1];
        for (m, c) in &self.terms {
            let e = m[v] as usize;
            let mut m2 = m.clone();
            m2[v] = 0;
            coeffs[e].terms.push((m2, c.clone()));
        }
        for cf in coeffs.iter_mut() {
            cf.terms.sort_by(|a, b| cmp_mono(&b.0, &a.0));
        }
        coeffs
    }

    pub fn from_univar(nvars: usize, v: usize, coeffs: &[MPoly]) -> MPoly {
        let mut t = vec![];
        for (e, cf) in coeffs.iter().enumerate() {
            for (m, c) in &cf.terms {
                let mut m2 = m.clone();
                m2[v] = e as u32;
                t.push((m2, c.clone()));
            }
        }
        let mut out = MPoly { nvars, terms: t };
        out.terms.sort_by(|a, b| cmp_mono(&b.0, &a.0));
        out
    }

    /// Exact division; `None` if `d` does not divide `self`.
    pub fn exact_div(&self, ctx: &FFCtx, d: &MPoly) -> Option<MPoly> {
        if d.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(MPoly::zero(self.nvars));
        }
        if d.is_constant() {
            let inv = ctx.inv(&d.constant_coeff(ctx)).ok()?;
            return Some(self.scale(ctx, &inv));
        }
        let v = (0..self.nvars).rev().find(|&v| d.degree_in(v) > 0).unwrap();
        let dc = d.as_univar(v);
        let mut rc = self.as_univar(v);
        let dd = dc.len() - 1;
        if rc.len() < dc.len() {
            return None;
        }
        let qn = rc.len() - dc.len() + 1;
        let mut q = vec![MPoly::zero(self.nvars); qn];
        let dlead = dc.last().unwrap();
        for k in (0..qn).rev() {
            let top = rc[k + dd].clone();
            if top.is_zero() {
                continue;
            }
            let qk = top.exact_div(ctx, dlead)?;
            for (i, dci) in dc.iter().enumerate() {
                rc[k + i] = rc[k + i].sub(ctx, &qk.mul(ctx, dci));
            }
            q[k] = qk;
        }
        if rc.iter().all(|c| c.is_zero()) {
            Some(MPoly::from_univar(self.nvars, v, &q))
        } else {
            None
        }
    }

    pub fn divides(&self, ctx: &FFCtx, other: &MPoly) -> bool {
        other.exact_div(ctx, self).is_some()
    }

    /// Content with respect to variable `v`: gcd of the `v`-coefficients.
    fn content_wrt(&self, ctx: &FFCtx, v: usize) -> MPoly {
        let mut g = MPoly::zero(self.nvars);
        for c in self.as_univar(v) {
            if c.is_zero() {
                continue;
            }
            g = mpoly_gcd(ctx, &g, &c);
            if g.is_constant() && !g.is_zero() {
                break;
            }
        }
        g
    }

    /// Scale so the leading coefficient under the term order is 1.
    pub fn monic(&self, ctx: &FFCtx) -> MPoly {
        match self.lead_coeff() {
            None => self.clone(),
            Some(l) => {
                let li = ctx.inv(l).expect("nonzero leading coefficient");
                self.scale(ctx, &li)
            }
        }
    }
}

/// Pseudo-remainder of `a` by `b` in variable `v` (both with deg_v(b) >= 1).
fn prem_wrt(ctx: &FFCtx, a: &MPoly, b: &MPoly, v: usize) -> MPoly {
    let bc = b.as_univar(v);
    let db = bc.len() - 1;
    let blead = bc.last().unwrap().clone();
    let mut r = a.clone();
    while !r.is_zero() && r.degree_in(v) as usize >= db {
        let rc = r.as_univar(v);
        let dr = rc.len() - 1;
        let rlead = rc.last().unwrap().clone();
        // r := blead * r - rlead * v^(dr-db) * b
        let mut shift_b = vec![MPoly::zero(a.nvars); dr - db];
        shift_b.extend(bc.iter().cloned());
        let shifted = MPoly::from_univar(a.nvars, v, &shift_b);
        r = r.mul(ctx, &blead).sub(ctx, &shifted.mul(ctx, &rlead));
    }
    r
}

/// Gcd over F_q[x_1..x_k], normalized monic under the term order.
pub(crate) fn mpoly_gcd(ctx: &FFCtx, a: &MPoly, b: &MPoly) -> MPoly {
    if a.is_zero() {
        return b.monic(ctx);
    }
    if b.is_zero() {
        return a.monic(ctx);
    }
    if a.is_constant() || b.is_constant() {
        // nonzero constants are units
        return MPoly::one(ctx, a.nvars);
    }
    let v = (0..a.nvars)
        .rev()
        .find(|&v| a.degree_in(v) > 0 || b.degree_in(v) > 0)
        .expect("non-constant polynomial has an active variable");
    if a.degree_in(v) == 0 {
        return mpoly_gcd(ctx, a, &b.content_wrt(ctx, v));
    }
    if b.degree_in(v) == 0 {
        return mpoly_gcd(ctx, &a.content_wrt(ctx, v), b);
    }
    let ca = a.content_wrt(ctx, v);
    let cb = b.content_wrt(ctx, v);
    let g0 = mpoly_gcd(ctx, &ca, &cb);
    let mut big = a.exact_div(ctx, &ca).expect("content divides");
    let mut small = b.exact_div(ctx, &cb).expect("content divides");
    if big.degree_in(v) < small.degree_in(v) {
        std::mem::swap(&mut big, &mut small);
    }
    let gpp = loop {
        let r = prem_wrt(ctx, &big, &small, v);
        if r.is_zero() {
            break small.exact_div(ctx, &small.content_wrt(ctx, v)).expect("content divides");
        }
        if r.degree_in(v) == 0 {
            // common divisors of two v-primitive polynomials that also divide
            // an r free of v must divide both contents, hence are units
            break MPoly::one(ctx, a.nvars);
        }
        big = small;
        small = r.exact_div(ctx, &r.content_wrt(ctx, v)).expect("content divides");
    };
    g0.mul(ctx, &gpp).monic(ctx)
}

/// Square root of a polynomial in odd characteristic, if one exists.
pub(crate) fn mpoly_sqrt(ctx: &FFCtx, a: &MPoly) -> Option<MPoly> {
    assert!(ctx.p != 2, "polynomial sqrt by undetermined coefficients needs odd characteristic");
    if a.is_zero() {
        return Some(MPoly::zero(a.nvars));
    }
    if a.is_constant() {
        let c = ctx.sqrt(&a.constant_coeff(ctx))?;
        return Some(MPoly::constant(ctx, a.nvars, c));
    }
    let v = (0..a.nvars).rev().find(|&v| a.degree_in(v) > 0).unwrap();
    let coeffs = a.as_univar(v);
    let n = coeffs.len() - 1;
    if n % 2 != 0 {
        return None;
    }
    let h = n / 2;
    let qlead = mpoly_sqrt(ctx, &coeffs[n])?;
    let two_qlead = qlead.scale(ctx, &ctx.from_int(2));
    let mut q = vec![MPoly::zero(a.nvars); h + 1];
    q[h] = qlead;
    for k in (0..h).rev() {
        // coefficient of v^(k+h): 2 q_h q_k + sum over pairs strictly inside
        let mut cross = MPoly::zero(a.nvars);
        for j1 in (k + 1)..=h {
            let j2 = k + h - j1;
            if j2 <= k || j2 > h || j2 >= j1 {
                continue;
            }
            cross = cross.add(ctx, &q[j1].mul(ctx, &q[j2]).scale(ctx, &ctx.from_int(2)));
        }
        // middle square when k+h is even and (k+h)/2 strictly between k and h
        if (k + h) % 2 == 0 {
            let mid = (k + h) / 2;
            if mid > k && mid < h {
                cross = cross.add(ctx, &q[mid].mul(ctx, &q[mid]));
            }
        }
        let target = coeffs[k + h].sub(ctx, &cross);
        q[k] = target.exact_div(ctx, &two_qlead)?;
    }
    let root = MPoly::from_univar(a.nvars, v, &q);
    if root.mul(ctx, &root) == *a {
        Some(root)
    } else {
        None
    }
}

/// Render with the given variable names.
pub(crate) fn mpoly_display(ctx: &FFCtx, a: &MPoly, vars: &[String]) -> String {
    if a.is_zero() {
        return "0".into();
    }
    let mut parts = vec![];
    for (m, c) in &a.terms {
        let mut factors = vec![];
        let cs = ctx.display(c);
        let is_one = cs == "1";
        let monomial_empty = m.iter().all(|&e| e == 0);
        if !is_one || monomial_empty {
            if cs.contains('+') {
                factors.push(format!("({cs})"));
            } else {
                factors.push(cs);
            }
        }
        for (v, &e) in m.iter().enumerate() {
            match e {
                0 => {}
                1 => factors.push(vars[v].clone()),
                _ => factors.push(format!("{}^{}", vars[v], e)),
            }
        }
        parts.push(factors.join("*"));
    }
    parts.join(" + ")
}

// ---------------------------------------------------------------------------
// reduced fractions
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct MFrac {
    pub num: MPoly,
    pub den: MPoly,
}

impl MFrac {
    pub fn reduced(ctx: &FFCtx, num: MPoly, den: MPoly) -> CResult<MFrac> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(MFrac { num, den: MPoly::one(ctx, den.nvars) });
        }
        let g = mpoly_gcd(ctx, &num, &den);
        let mut n = num.exact_div(ctx, &g).expect("gcd divides");
        let mut d = den.exact_div(ctx, &g).expect("gcd divides");
        let l = d.lead_coeff().cloned().expect("nonzero denominator");
        let li = ctx.inv(&l)?;
        n = n.scale(ctx, &li);
        d = d.scale(ctx, &li);
        Ok(MFrac { num: n, den: d })
    }

    pub fn from_poly(ctx: &FFCtx, p: MPoly) -> MFrac {
        let nv = p.nvars;
        MFrac { num: p, den: MPoly::one(ctx, nv) }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn add2(&self, ctx: &FFCtx, b: &MFrac) -> CResult<MFrac> {
        let n = self.num.mul(ctx, &b.den).add(ctx, &b.num.mul(ctx, &self.den));
        let d = self.den.mul(ctx, &b.den);
        MFrac::reduced(ctx, n, d)
    }

    pub fn sub2(&self, ctx: &FFCtx, b: &MFrac) -> CResult<MFrac> {
        self.add2(ctx, &b.neg(ctx))
    }

    pub fn neg(&self, ctx: &FFCtx) -> MFrac {
        MFrac { num: self.num.neg(ctx), den: self.den.clone() }
    }

    pub fn mul2(&self, ctx: &FFCtx, b: &MFrac) -> CResult<MFrac> {
        MFrac::reduced(ctx, self.num.mul(ctx, &b.num), self.den.mul(ctx, &b.den))
    }

    pub fn div2(&self, ctx: &FFCtx, b: &MFrac) -> CResult<MFrac> {
        if b.is_zero() {
            return Err(Error::DivisionByZero);
        }
        MFrac::reduced(ctx, self.num.mul(ctx, &b.den), self.den.mul(ctx, &b.num))
    }

    pub fn inv(&self, ctx: &FFCtx) -> CResult<MFrac> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        MFrac::reduced(ctx, self.den.clone(), self.num.clone())
    }

    pub fn pow(&self, ctx: &FFCtx, e: i64) -> CResult<MFrac> {
        let base = if e < 0 { self.inv(ctx)? } else { self.clone() };
        let mut acc = MFrac::from_poly(ctx, MPoly::one(ctx, self.num.nvars));
        let mut b = base;
        let mut k = e.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul2(ctx, &b)?;
            }
            b = b.mul2(ctx, &b)?;
            k >>= 1;
        }
        Ok(acc)
    }

    /// Is this fraction a p-th power? In canonical reduced form this holds
    /// exactly when every exponent in numerator and denominator is divisible
    /// by p (F_q is perfect, so coefficients never obstruct). Returns the
    /// p-th root when it exists.
    pub fn pth_root(&self, ctx: &FFCtx) -> Option<MFrac> {
        if self.is_zero() {
            return Some(self.clone());
        }
        let root_poly = |poly: &MPoly| -> Option<MPoly> {
            let p = ctx.p as u32;
            let mut t = Vec::with_capacity(poly.terms.len());
            for (m, c) in &poly.terms {
                if m.iter().any(|&e| e % p != 0) {
                    return None;
                }
                let m2: Mono = m.iter().map(|&e| e / p).collect();
                t.push((m2, ctx.pth_root(c)));
            }
            Some(MPoly { nvars: poly.nvars, terms: t })
        };
        let n = root_poly(&self.num)?;
        let d = root_poly(&self.den)?;
        Some(MFrac { num: n, den: d })
    }

    /// Coordinates of this fraction with respect to the monomial basis
    /// { x^e : 0 <= e_i < p } of F_q(x) over F_q(x^p), *after* applying the
    /// p-th root isomorphism F_q(x^p) -> F_q(x). Index order: odometer over
    /// exponent vectors, first variable fastest.
    pub fn pth_coordinates(&self, ctx: &FFCtx) -> CResult<Vec<MFrac>> {
        let k = self.num.nvars;
        let p = ctx.p as u32;
        let count = (ctx.p as usize).pow(k as u32);
        // g = A / B = A B^(p-1) / B^p with A B^(p-1) split by exponent class
        let bp1 = self.den.pow(ctx, p - 1);
        let big = self.num.mul(ctx, &bp1);
        let mut buckets: Vec<Vec<(Mono, FFElem)>> = vec![vec![]; count];
        for (m, c) in &big.terms {
            let mut idx = 0usize;
            let mut stride = 1usize;
            let mut m2 = Vec::with_capacity(k);
            for (v, &e) in m.iter().enumerate() {
                idx += (e % p) as usize * stride;
                stride *= ctx.p as usize;
                m2.push(e / p);
                let _ = v;
            }
            buckets[idx].push((m2, ctx.pth_root(c)));
        }
        let mut out = Vec::with_capacity(count);
        for b in buckets {
            let poly = MPoly::normalize(ctx, k, b);
            out.push(MFrac::reduced(ctx, poly, self.den.clone())?);
        }
        Ok(out)
    }
}
