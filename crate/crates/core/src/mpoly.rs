//! Internal sparse multivariate polynomials over the integers.
//!
//! This is the arithmetic core behind rational-function scalars: exact
//! add/mul, exact division, partial derivatives, and a primitive-PRS gcd used
//! to keep fractions in lowest terms.  Monomials reuse [`MultiIndex`] with its
//! graded order, so printing and leading-term selection are deterministic.

use crate::mindex::MultiIndex;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;

/// Sparse polynomial in `nvars` variables with integer coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) struct MPoly {
    nvars: usize,
    terms: BTreeMap<MultiIndex, BigInt>,
}

impl MPoly {
    pub fn zero(nvars: usize) -> Self {
        MPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: BigInt) -> Self {
        let mut p = MPoly::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(MultiIndex::zero(nvars), c);
        }
        p
    }

    pub fn one(nvars: usize) -> Self {
        MPoly::constant(nvars, BigInt::one())
    }

    /// The generator `u_j` (1-based).
    pub fn var(nvars: usize, j: usize) -> Self {
        let mut p = MPoly::zero(nvars);
        p.terms.insert(MultiIndex::unit(nvars, j), BigInt::one());
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.len() <= 1 && self.terms.keys().all(MultiIndex::is_zero)
    }

    /// The constant value, if the polynomial is constant.
    pub fn as_constant(&self) -> Option<BigInt> {
        if self.is_zero() {
            Some(BigInt::zero())
        } else if self.is_constant() {
            self.terms.values().next().cloned()
        } else {
            None
        }
    }

    /// Terms in ascending graded order.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &BigInt)> {
        self.terms.iter()
    }

    /// Largest monomial in the graded order, with its coefficient.
    pub fn leading_term(&self) -> Option<(&MultiIndex, &BigInt)> {
        self.terms.iter().next_back()
    }

    pub fn insert_term(&mut self, mono: MultiIndex, coeff: BigInt) {
        assert_eq!(mono.width(), self.nvars);
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(mono);
        use std::collections::btree_map::Entry;
        match entry {
            Entry::Vacant(v) => {
                v.insert(coeff);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &MPoly) -> MPoly {
        assert_eq!(self.nvars, other.nvars);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert_term(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> MPoly {
        MPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &MPoly) -> MPoly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &MPoly) -> MPoly {
        assert_eq!(self.nvars, other.nvars);
        let mut out = MPoly::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.insert_term(ma.add(mb), ca * cb);
            }
        }
        out
    }

    pub fn mul_scalar(&self, c: &BigInt) -> MPoly {
        if c.is_zero() {
            return MPoly::zero(self.nvars);
        }
        MPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    /// Formal partial derivative with respect to `u_j` (1-based).
    pub fn derivative(&self, j: usize) -> MPoly {
        let mut out = MPoly::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.get(j);
            if e > 0 {
                let lowered = m
                    .checked_sub(&MultiIndex::unit(self.nvars, j))
                    .expect("positive exponent");
                out.insert_term(lowered, c * BigInt::from(e));
            }
        }
        out
    }

    /// Degree in variable `j` (1-based); zero polynomial reports 0.
    pub fn degree_in(&self, j: usize) -> u32 {
        self.terms.keys().map(|m| m.get(j)).max().unwrap_or(0)
    }

    /// Coefficient of `u_j^d` as a polynomial with the `j` slot zeroed.
    pub fn coeff_in(&self, j: usize, d: u32) -> MPoly {
        let mut out = MPoly::zero(self.nvars);
        for (m, c) in &self.terms {
            if m.get(j) == d {
                let mut e = m.entries().to_vec();
                e[j - 1] = 0;
                out.insert_term(MultiIndex::new(e), c.clone());
            }
        }
        out
    }

    /// True when `u_j` occurs.
    pub fn uses_var(&self, j: usize) -> bool {
        self.terms.keys().any(|m| m.get(j) > 0)
    }

    /// Nonnegative gcd of all integer coefficients (0 for the zero polynomial).
    pub fn int_content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for c in self.terms.values() {
            g = g.gcd(c);
            if g.is_one() {
                break;
            }
        }
        g
    }

    /// Divides every coefficient by `d`; panics if not exact.
    fn div_int_exact(&self, d: &BigInt) -> MPoly {
        assert!(!d.is_zero());
        MPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let (q, r) = c.div_rem(d);
                    assert!(r.is_zero(), "inexact integer division in polynomial");
                    (m.clone(), q)
                })
                .collect(),
        }
    }

    /// Exact polynomial division: `Some(q)` with `self = q * other`, else `None`.
    pub fn exact_div(&self, other: &MPoly) -> Option<MPoly> {
        assert_eq!(self.nvars, other.nvars);
        assert!(!other.is_zero(), "division by the zero polynomial");
        let mut rem = self.clone();
        let mut quo = MPoly::zero(self.nvars);
        let (lm, lc) = other.leading_term().map(|(m, c)| (m.clone(), c.clone()))?;
        while !rem.is_zero() {
            let (rm, rc) = rem.leading_term().map(|(m, c)| (m.clone(), c.clone()))?;
            let dm = rm.checked_sub(&lm)?;
            let (q, r) = rc.div_rem(&lc);
            if !r.is_zero() {
                return None;
            }
            let mut t = MPoly::zero(self.nvars);
            t.insert_term(dm, q);
            rem = rem.sub(&t.mul(other));
            quo = quo.add(&t);
        }
        Some(quo)
    }

    /// Flips the sign if the leading coefficient is negative.
    pub fn normalize_sign(&self) -> MPoly {
        match self.leading_term() {
            Some((_, c)) if c.is_negative() => self.neg(),
            _ => self.clone(),
        }
    }

    /// Pseudo-remainder of `self` by `other` in variable `j`: repeatedly
    /// multiplies by the leading `j`-coefficient of `other` and subtracts.
    fn prem(&self, other: &MPoly, j: usize) -> MPoly {
        let db = other.degree_in(j);
        let lb = other.coeff_in(j, db);
        let mut r = self.clone();
        while !r.is_zero() {
            let dr = r.degree_in(j);
            if dr < db {
                break;
            }
            let lr = r.coeff_in(j, dr);
            let mut shift = MPoly::zero(self.nvars);
            let mut e = vec![0u32; self.nvars];
            e[j - 1] = dr - db;
            shift.insert_term(MultiIndex::new(e), BigInt::one());
            r = r.mul(&lb).sub(&lr.mul(&shift).mul(other));
        }
        r
    }

    /// Gcd of all `j`-coefficients (the content with respect to `u_j`).
    fn content_in(&self, j: usize) -> MPoly {
        let mut g = MPoly::zero(self.nvars);
        for d in 0..=self.degree_in(j) {
            let c = self.coeff_in(j, d);
            if !c.is_zero() {
                g = gcd(&g, &c);
            }
        }
        g
    }

    /// Canonical display with generator names; terms in descending graded
    /// order, integer coefficients, `*` and `^` spelled out.
    pub fn display_with(&self, names: &dyn Fn(usize) -> String) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if k == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mut factors = Vec::new();
            if !mag.is_one() || m.is_zero() {
                factors.push(mag.to_string());
            }
            for j in 1..=self.nvars {
                let e = m.get(j);
                if e == 1 {
                    factors.push(names(j));
                } else if e > 1 {
                    factors.push(format!("{}^{}", names(j), e));
                }
            }
            out.push_str(&factors.join("*"));
        }
        out
    }
}

impl fmt::Display for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_with(&|j| format!("u{j}")))
    }
}

/// Gcd with positive leading coefficient; `gcd(0, p) = ±p` normalized.
pub(crate) fn gcd(a: &MPoly, b: &MPoly) -> MPoly {
    assert_eq!(a.nvars(), b.nvars());
    if a.is_zero() {
        return b.normalize_sign();
    }
    if b.is_zero() {
        return a.normalize_sign();
    }
    let ca = a.int_content();
    let cb = b.int_content();
    let c = ca.gcd(&cb);
    let a1 = a.div_int_exact(&ca);
    let b1 = b.div_int_exact(&cb);
    primitive_gcd(&a1, &b1).mul_scalar(&c).normalize_sign()
}

/// Gcd of two integer-primitive polynomials, via a primitive polynomial
/// remainder sequence in the lowest shared variable.
fn primitive_gcd(a: &MPoly, b: &MPoly) -> MPoly {
    let nvars = a.nvars();
    if a.is_constant() || b.is_constant() {
        return MPoly::one(nvars);
    }
    let shared = (1..=nvars).find(|&j| a.uses_var(j) && b.uses_var(j));
    let j = match shared {
        Some(j) => j,
        // Disjoint variable sets: only constants divide both, and the inputs
        // are integer-primitive.
        None => return MPoly::one(nvars),
    };
    let conta = a.content_in(j);
    let contb = b.content_in(j);
    let g0 = gcd(&conta, &contb);
    let mut big = a.exact_div(&conta).expect("content divides");
    let mut small = b.exact_div(&contb).expect("content divides");
    if big.degree_in(j) < small.degree_in(j) {
        std::mem::swap(&mut big, &mut small);
    }
    loop {
        let r = big.prem(&small, j);
        if r.is_zero() {
            // `small` is j-primitive; strip any leftover integer factor
            // introduced by pseudo-division bookkeeping.
            let cs = small.content_in(j);
            let part = small.exact_div(&cs).expect("content divides");
            return g0.mul(&part).normalize_sign();
        }
        if r.degree_in(j) == 0 {
            return g0.normalize_sign();
        }
        let cr = r.content_in(j);
        big = small;
        small = r.exact_div(&cr).expect("content divides");
    }
}
