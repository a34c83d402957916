//! Bounded root finding for polynomials of degree <= 3 over a local field.
//!
//! The strategy is the classical one: normalize to a monic integral
//! polynomial, read residue roots, lift simple ones by Newton refinement,
//! and chase multiple residue roots down integer slopes of the value
//! polygon. Degree is capped at 3 because every internal consumer (root
//! detection for X^2 + X + 1, square classes, low-degree irreducibility
//! tests) lives within that bound.

use crate::error::{CResult, Error};
use crate::hensel::{hensel_root, poly_derivative};
use crate::local::LocalField;
use crate::valued::ValView;

const DESCENT_BUDGET: u32 = 48;

/// All roots of `f` (ascending coefficients, degree <= 3) in the field.
pub fn field_roots<F: LocalField>(k: &F, f: &[F::Elem]) -> CResult<Vec<F::Elem>> {
    let mut cs: Vec<F::Elem> = f.to_vec();
    while let Some(top) = cs.last() {
        if k.is_exact_zero(top) {
            cs.pop();
        } else {
            break;
        }
    }
    if cs.is_empty() {
        return Err(Error::PreconditionViolated(
            "root finding needs a nonzero polynomial".into(),
        ));
    }
    if cs.len() == 1 {
        return Ok(Vec::new());
    }
    if cs.len() > 4 {
        return Err(Error::UnsupportedField(format!(
            "root finding is capped at degree 3, got degree {}",
            cs.len() - 1
        )));
    }

    let mut roots: Vec<F::Elem> = Vec::new();

    // Exact zero constant term: split off the root 0.
    if k.is_exact_zero(&cs[0]) {
        roots.push(k.zero());
        let rest: Vec<F::Elem> = cs[1..].to_vec();
        for r in field_roots(k, &rest)? {
            push_unique(k, &mut roots, r);
        }
        return Ok(roots);
    }

    // Monic.
    let lead_inv = k.inv(cs.last().unwrap())?;
    let monic: Vec<F::Elem> = cs.iter().map(|c| k.mul(c, &lead_inv)).collect();
    let n = monic.len() - 1;

    // Integralize: substitute y = x * pi^shift so that all coefficients of
    // the polynomial in y have value >= 0.
    let mut shift: i64 = 0;
    for (i, c) in monic.iter().enumerate().take(n) {
        match k.val_view(c) {
            ValView::Infinite => {}
            ValView::Exact(v) | ValView::AtLeast(v) => {
                if v < 0 {
                    let gap = n as i64 - i as i64;
                    shift = shift.max((-v + gap - 1) / gap);
                }
            }
        }
    }
    let pi = k.uniformizer();
    let g: Vec<F::Elem> = monic
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let e = (n as i64 - i as i64) * shift;
            k.mul(c, &k.pow(&pi, e).expect("nonnegative power of the uniformizer"))
        })
        .collect();

    let mut found = Vec::new();
    integral_roots(k, &g, DESCENT_BUDGET, &mut found)?;
    let unshift = k.pow(&pi, -shift)?;
    for y in found {
        push_unique(k, &mut roots, k.mul(&y, &unshift));
    }
    if roots.len() > n {
        return Err(Error::CheckFailed(format!(
            "found {} roots for a degree-{n} polynomial",
            roots.len()
        )));
    }
    Ok(roots)
}

/// Roots of a monic integral polynomial, accumulated into `out`.
fn integral_roots<F: LocalField>(
    k: &F,
    g: &[F::Elem],
    budget: u32,
    out: &mut Vec<F::Elem>,
) -> CResult<()> {
    if budget == 0 {
        return Err(Error::IterationBudgetExceeded("value-polygon root descent".into()));
    }
    let rfield = k.residue_field();
    let ghat: CResult<Vec<_>> = g.iter().map(|c| k.residue(c)).collect();
    let ghat = ghat?;
    let res_roots = crate::residue::poly_roots(&ghat)?;
    let dg = poly_derivative(k, g);
    for rhat in res_roots {
        let a = k.lift(&rhat)?;
        let simple = {
            let mut acc = rfield.zero();
            for c in dg.iter().rev() {
                acc = acc.mul(&rhat).add(&k.residue(c)?);
            }
            !acc.is_zero()
        };
        if simple {
            out.push(hensel_root(k, g, &a)?);
            continue;
        }
        // Multiple residue root: shift to z = y - a and walk integer slopes.
        let h = poly_shift(k, g, &a);
        match k.val_view(&h[0]) {
            ValView::Infinite | ValView::AtLeast(_) => {
                // g(a) vanishes at working precision: a is a root as far as
                // the available digits can tell.
                out.push(a);
                continue;
            }
            ValView::Exact(_) => {
                let pi = k.uniformizer();
                // Candidate valuations of roots: integer slopes between any
                // two coefficient points. Chords that are not actual lower
                // hull segments only cost a fruitless (or duplicate-finding)
                // recursion; duplicates are merged by the caller.
                let vh: Vec<Option<i64>> = h
                    .iter()
                    .map(|c| match k.val_view(c) {
                        ValView::Exact(v) => Some(v),
                        _ => None,
                    })
                    .collect();
                let mut slopes: Vec<i64> = Vec::new();
                for i in 0..h.len() {
                    let Some(vi) = vh[i] else { continue };
                    for j in i + 1..h.len() {
                        let Some(vj) = vh[j] else { continue };
                        let num = vi - vj;
                        let den = (j - i) as i64;
                        if num > 0 && num % den == 0 && !slopes.contains(&(num / den)) {
                            slopes.push(num / den);
                        }
                    }
                }
                for s in slopes {
                    // Substitute z = pi^s w and strip the minimal value.
                    let mut vals = Vec::new();
                    for (j, c) in h.iter().enumerate() {
                        let w = match k.val_view(c) {
                            ValView::Exact(v) => Some(v + s * j as i64),
                            _ => None,
                        };
                        vals.push(w);
                    }
                    let m = vals.iter().flatten().copied().min().unwrap();
                    let hw: Vec<F::Elem> = h
                        .iter()
                        .enumerate()
                        .map(|(j, c)| {
                            let e = s * j as i64 - m;
                            k.mul(c, &k.pow(&pi, e).expect("uniformizer power"))
                        })
                        .collect();
                    let mut sub = Vec::new();
                    integral_roots(k, &hw, budget - 1, &mut sub)?;
                    for w in sub {
                        let z = k.mul(&w, &k.pow(&pi, s)?);
                        out.push(k.add(&z, &a));
                    }
                }
            }
        }
    }
    Ok(())
}

/// g(z + a) by repeated Horner-style synthetic shifts.
fn poly_shift<F: LocalField>(k: &F, g: &[F::Elem], a: &F::Elem) -> Vec<F::Elem> {
    let mut c = g.to_vec();
    let n = c.len();
    for i in 0..n {
        for j in (i..n - 1).rev() {
            let t = k.mul(&c[j + 1], a);
            c[j] = k.add(&c[j], &t);
        }
    }
    c
}

fn push_unique<F: LocalField>(k: &F, roots: &mut Vec<F::Elem>, r: F::Elem) {
    if !roots.iter().any(|q| k.agrees(q, &r)) {
        roots.push(r);
    }
}

/// Is `x` a square? Only valid in odd residual characteristic, where the
/// square question is tame: even valuation plus a square residue decide it.
pub fn is_square_tame<F: LocalField>(k: &F, x: &F::Elem) -> CResult<bool> {
    if k.p() == 2 {
        return Err(Error::UnsupportedField(
            "tame square test needs odd residual characteristic".into(),
        ));
    }
    let v = k.val(x)?;
    if v % 2 != 0 {
        return Ok(false);
    }
    let u = k.mul(x, &k.pow(&k.uniformizer(), -v)?);
    Ok(k.residue(&u)?.sqrt().is_some())
}

/// Irreducibility over the field for degree 2 or 3: equivalent to having no
/// root. Degree 1 is trivially irreducible.
pub fn irreducible_low_degree<F: LocalField>(k: &F, f: &[F::Elem]) -> CResult<bool> {
    let mut deg = f.len();
    while deg > 0 && k.is_exact_zero(&f[deg - 1]) {
        deg -= 1;
    }
    match deg {
        0 | 1 => Err(Error::PreconditionViolated(
            "irreducibility test needs degree >= 1".into(),
        )),
        2 => Ok(true),
        3 | 4 => Ok(field_roots(k, f)?.is_empty()),
        _ => Err(Error::UnsupportedField(
            "irreducibility test is capped at degree 3".into(),
        )),
    }
}
