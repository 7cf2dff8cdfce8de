//! Differential polynomials in `n` unknowns under `m` commuting derivations.
//!
//! A [`DiffPoly`] is a sparse polynomial in the ranked variables `D[xi](x_i)`
//! with scalar coefficients.  The module provides the derivation action, the
//! ranking anatomy (leader, degree, separant, initial), reducedness tests,
//! certificate-producing differential division against an autoreduced set
//! ([`CharSet`]), order-bounded prolongation, and the split of the
//! higher-order variables into a free part and a derived part.

use crate::error::{DiffError, Result};
use crate::mindex::{MultiIndex, RankedVar};
use crate::scalars::{DiffFieldCtx, DiffScalar};
use crate::series::TruncSeries;
use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Power product of ranked variables, sorted ascending with positive exponents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffMono(Vec<(RankedVar, u32)>);

impl DiffMono {
    /// The empty product.
    pub fn one() -> Self {
        DiffMono(Vec::new())
    }

    /// A single variable.
    pub fn var(v: RankedVar) -> Self {
        DiffMono(vec![(v, 1)])
    }

    /// A single power.
    pub fn power(v: RankedVar, e: u32) -> Self {
        if e == 0 {
            DiffMono::one()
        } else {
            DiffMono(vec![(v, e)])
        }
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> &[(RankedVar, u32)] {
        &self.0
    }

    pub fn degree_of(&self, v: &RankedVar) -> u32 {
        self.0
            .iter()
            .find(|(w, _)| w == v)
            .map(|(_, e)| *e)
            .unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    /// Merges two power products.
    pub fn mul(&self, other: &DiffMono) -> DiffMono {
        let mut out: Vec<(RankedVar, u32)> = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].0.cmp(&other.0[j].0) {
                Ordering::Less => {
                    out.push(self.0[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(other.0[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((self.0[i].0.clone(), self.0[i].1 + other.0[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        DiffMono(out)
    }

    /// Removes one factor `v^e` (requires `e <= degree_of(v)`).
    fn without_power(&self, v: &RankedVar, e: u32) -> DiffMono {
        let mut out = Vec::with_capacity(self.0.len());
        for (w, d) in &self.0 {
            if w == v {
                assert!(*d >= e, "removing more than present");
                if *d > e {
                    out.push((w.clone(), d - e));
                }
            } else {
                out.push((w.clone(), *d));
            }
        }
        DiffMono(out)
    }

    /// Highest variable in the orderly ranking.
    pub fn top_var(&self) -> Option<&RankedVar> {
        self.0.last().map(|(v, _)| v)
    }
}

impl PartialOrd for DiffMono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Lexicographic order with respect to the descending orderly ranking of the
/// variables: the monomial with the higher exponent on the highest differing
/// variable is larger.  Deterministic and multiplication-compatible, which is
/// all canonical printing and leading-term bookkeeping need.
impl Ord for DiffMono {
    fn cmp(&self, other: &Self) -> Ordering {
        let mut i = self.0.len();
        let mut j = other.0.len();
        while i > 0 && j > 0 {
            let (va, ea) = &self.0[i - 1];
            let (vb, eb) = &other.0[j - 1];
            match va.cmp(vb) {
                Ordering::Greater => return Ordering::Greater,
                Ordering::Less => return Ordering::Less,
                Ordering::Equal => match ea.cmp(eb) {
                    Ordering::Equal => {
                        i -= 1;
                        j -= 1;
                    }
                    ord => return ord,
                },
            }
        }
        i.cmp(&j)
    }
}

/// Sparse differential polynomial over a coefficient context.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffPoly {
    ctx: DiffFieldCtx,
    n: usize,
    terms: BTreeMap<DiffMono, DiffScalar>,
}

impl DiffPoly {
    pub fn zero(ctx: &DiffFieldCtx, n: usize) -> Self {
        DiffPoly {
            ctx: ctx.clone(),
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(ctx: &DiffFieldCtx, n: usize, c: DiffScalar) -> Self {
        let mut p = Self::zero(ctx, n);
        p.insert_term(DiffMono::one(), c);
        p
    }

    pub fn one(ctx: &DiffFieldCtx, n: usize) -> Self {
        Self::constant(ctx, n, ctx.one())
    }

    /// The ranked variable `v` as a polynomial.
    pub fn var(ctx: &DiffFieldCtx, n: usize, v: RankedVar) -> Self {
        assert!(v.var <= n, "unknown x{} out of 1..={n}", v.var);
        assert_eq!(v.index.width(), ctx.m(), "derivation arity mismatch");
        let mut p = Self::zero(ctx, n);
        p.insert_term(DiffMono::var(v), ctx.one());
        p
    }

    pub fn ctx(&self) -> &DiffFieldCtx {
        &self.ctx
    }

    pub fn num_unknowns(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when no ranked variable occurs.
    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(DiffMono::is_one)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&DiffMono, &DiffScalar)> {
        self.terms.iter()
    }

    pub fn insert_term(&mut self, mono: DiffMono, coeff: DiffScalar) {
        if coeff.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(mono) {
            Entry::Vacant(v) => {
                v.insert(coeff);
            }
            Entry::Occupied(mut o) => {
                let next = o.get().add(&coeff);
                if next.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = next;
                }
            }
        }
    }

    fn same_shape(&self, other: &DiffPoly) {
        assert!(self.ctx == other.ctx, "coefficient context mismatch");
        assert_eq!(self.n, other.n, "unknown count mismatch");
    }

    pub fn add(&self, other: &DiffPoly) -> DiffPoly {
        self.same_shape(other);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert_term(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> DiffPoly {
        DiffPoly {
            ctx: self.ctx.clone(),
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c.neg()))
                .collect(),
        }
    }

    pub fn sub(&self, other: &DiffPoly) -> DiffPoly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &DiffPoly) -> DiffPoly {
        self.same_shape(other);
        let mut out = Self::zero(&self.ctx, self.n);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.insert_term(ma.mul(mb), ca.mul(cb));
            }
        }
        out
    }

    pub fn scale(&self, c: &DiffScalar) -> DiffPoly {
        let mut out = Self::zero(&self.ctx, self.n);
        for (m, k) in &self.terms {
            out.insert_term(m.clone(), k.mul(c));
        }
        out
    }

    pub fn pow(&self, e: u32) -> DiffPoly {
        let mut acc = Self::one(&self.ctx, self.n);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Every ranked variable that occurs, ascending in the orderly ranking.
    pub fn vars(&self) -> BTreeSet<RankedVar> {
        let mut out = BTreeSet::new();
        for m in self.terms.keys() {
            for (v, _) in m.factors() {
                out.insert(v.clone());
            }
        }
        out
    }

    /// Maximal total order of a derivative occurring; `None` for constants.
    pub fn order(&self) -> Option<u32> {
        self.vars().iter().map(RankedVar::order).max()
    }

    /// The orderly-largest ranked variable; `None` for constants.
    pub fn leader(&self) -> Option<RankedVar> {
        self.vars().into_iter().next_back()
    }

    pub fn degree_in(&self, v: &RankedVar) -> u32 {
        self.terms.keys().map(|m| m.degree_of(v)).max().unwrap_or(0)
    }

    /// Coefficient of `v^d` (with `v` struck out of each term).
    pub fn coeff_of_power(&self, v: &RankedVar, d: u32) -> DiffPoly {
        let mut out = Self::zero(&self.ctx, self.n);
        for (m, c) in &self.terms {
            if m.degree_of(v) == d {
                out.insert_term(m.without_power(v, d), c.clone());
            }
        }
        out
    }

    /// Formal partial derivative with respect to one ranked variable.
    pub fn partial(&self, v: &RankedVar) -> DiffPoly {
        let mut out = Self::zero(&self.ctx, self.n);
        for (m, c) in &self.terms {
            let e = m.degree_of(v);
            if e > 0 {
                out.insert_term(
                    m.without_power(v, 1),
                    c.mul(&self.ctx.from_int(i64::from(e))),
                );
            }
        }
        out
    }

    /// Applies derivation `d_k`: coefficients through the context, variables
    /// by shifting the multi-index, products by the Leibniz rule.
    pub fn delta_apply(&self, k: usize) -> DiffPoly {
        let mut out = Self::zero(&self.ctx, self.n);
        for (m, c) in &self.terms {
            out.insert_term(m.clone(), c.derive(k));
            for (v, e) in m.factors() {
                let shifted = DiffMono::var(v.derive(k)).mul(&m.without_power(v, 1));
                out.insert_term(shifted, c.mul(&self.ctx.from_int(i64::from(*e))));
            }
        }
        out
    }

    /// Applies the composite derivation `D[theta]`.
    pub fn delta_by(&self, theta: &MultiIndex) -> DiffPoly {
        let mut acc = self.clone();
        for k in 1..=theta.width() {
            for _ in 0..theta.get(k) {
                acc = acc.delta_apply(k);
            }
        }
        acc
    }

    /// Leader, degree, separant, and initial; errors on constants.
    pub fn anatomy(&self) -> Result<Anatomy> {
        let leader = self
            .leader()
            .ok_or_else(|| DiffError::ConstantPolynomial(self.to_string()))?;
        let degree = self.degree_in(&leader);
        let separant = self.partial(&leader);
        let initial = self.coeff_of_power(&leader, degree);
        Ok(Anatomy {
            leader,
            degree,
            separant,
            initial,
        })
    }

    /// Rank comparison: constants rank below everything; otherwise compare
    /// `(leader, degree)` lexicographically.
    pub fn cmp_rank(&self, other: &DiffPoly) -> Ordering {
        match (self.leader(), other.leader()) {
            (None, None) => Ordering::Equal,
            (None, Some(_)) => Ordering::Less,
            (Some(_), None) => Ordering::Greater,
            (Some(a), Some(b)) => a
                .cmp(&b)
                .then_with(|| self.degree_in(&a).cmp(&other.degree_in(&b))),
        }
    }

    /// No proper derivative of `f`'s leader occurs in `self`.
    pub fn is_weakly_reduced_wrt(&self, f: &DiffPoly) -> Result<bool> {
        let leader = f
            .leader()
            .ok_or_else(|| DiffError::ConstantPolynomial(f.to_string()))?;
        Ok(self
            .vars()
            .iter()
            .all(|v| !v.is_proper_derivative_of(&leader)))
    }

    /// Weakly reduced, and the leader of `f` occurs only below its degree.
    pub fn is_reduced_wrt(&self, f: &DiffPoly) -> Result<bool> {
        let leader = f
            .leader()
            .ok_or_else(|| DiffError::ConstantPolynomial(f.to_string()))?;
        Ok(self.is_weakly_reduced_wrt(f)? && self.degree_in(&leader) < f.degree_in(&leader))
    }

    /// Evaluates with caller-supplied images for coefficients and variables.
    pub fn eval_map(
        &self,
        target: &DiffFieldCtx,
        mut coeff_image: impl FnMut(&DiffScalar) -> Result<DiffScalar>,
        mut var_image: impl FnMut(&RankedVar) -> Result<DiffScalar>,
    ) -> Result<DiffScalar> {
        let mut acc = target.zero();
        for (m, c) in &self.terms {
            let mut term = coeff_image(c)?;
            for (v, e) in m.factors() {
                term = term.mul(&var_image(v)?.pow(i64::from(*e)).expect("positive power"));
            }
            acc = acc.add(&term);
        }
        Ok(acc)
    }

    /// Evaluates at scalar values for the ranked variables (coefficients map
    /// through unchanged); used for K-points of the polynomial ring.
    pub fn eval_vars(&self, values: &BTreeMap<RankedVar, DiffScalar>) -> Result<DiffScalar> {
        self.eval_map(
            &self.ctx.clone(),
            |c| Ok(c.clone()),
            |v| {
                values
                    .get(v)
                    .cloned()
                    .ok_or_else(|| DiffError::UndefinedGenerator(v.to_string()))
            },
        )
    }

    /// Evaluates at truncated-series values for the ranked variables,
    /// embedding the coefficients as constants.
    pub fn eval_series(
        &self,
        trunc: usize,
        values: &BTreeMap<RankedVar, TruncSeries>,
    ) -> Result<TruncSeries> {
        let mut acc = TruncSeries::zero(&self.ctx, trunc);
        for (m, c) in &self.terms {
            let mut term = TruncSeries::constant(&self.ctx, trunc, c.clone());
            for (v, e) in m.factors() {
                let base = values
                    .get(v)
                    .ok_or_else(|| DiffError::UndefinedGenerator(v.to_string()))?;
                term = term.mul(&base.pow(*e));
            }
            acc = acc.add(&term);
        }
        Ok(acc)
    }
}

impl fmt::Display for DiffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.display_negative();
            let mag = if neg { c.neg() } else { c.clone() };
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            let mut factors = Vec::new();
            if m.is_one() || !mag.is_one() {
                factors.push(mag.display_atom());
            }
            for (v, e) in m.factors().iter().rev() {
                if *e == 1 {
                    factors.push(v.to_string());
                } else {
                    factors.push(format!("{v}^{e}"));
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

/// Leader variable, its degree, and the two distinguished coefficients.
#[derive(Debug, Clone)]
pub struct Anatomy {
    pub leader: RankedVar,
    pub degree: u32,
    pub separant: DiffPoly,
    pub initial: DiffPoly,
}

/// Which distinguished coefficient a premultiplier factor came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorKind {
    Initial,
    Separant,
}

/// One recorded factor of a division premultiplier.
#[derive(Debug, Clone)]
pub struct PremultFactor {
    pub kind: FactorKind,
    /// Index into the dividing set's elements.
    pub element: usize,
    pub power: u32,
}

/// One certificate line: `multiplier * D[theta](element)`.
#[derive(Debug, Clone)]
pub struct CertTerm {
    pub multiplier: DiffPoly,
    pub theta: MultiIndex,
    pub element: usize,
}

/// Result of differential division: the identity
/// `premultiplier * g = sum of multiplier * D[theta](element) + remainder`
/// holds exactly and can be re-expanded for verification.
#[derive(Debug, Clone)]
pub struct DivisionResult {
    pub premultiplier: DiffPoly,
    pub factors: Vec<PremultFactor>,
    pub remainder: DiffPoly,
    pub certificate: Vec<CertTerm>,
}

/// An autoreduced set of nonconstant differential polynomials, sorted
/// nondecreasing by rank, with cached anatomies and the product of all
/// initials and separants.
#[derive(Debug, Clone)]
pub struct CharSet {
    elems: Vec<DiffPoly>,
    anatomies: Vec<Anatomy>,
    h: DiffPoly,
}

impl CharSet {
    /// Validates autoreducedness (pairwise) and nonconstancy, sorts by rank.
    pub fn new(mut elems: Vec<DiffPoly>) -> Result<CharSet> {
        assert!(!elems.is_empty(), "empty sets carry no reduction data");
        for f in &elems {
            if f.leader().is_none() {
                return Err(DiffError::ConstantPolynomial(f.to_string()));
            }
        }
        elems.sort_by(|a, b| a.cmp_rank(b).then_with(|| a.to_string().cmp(&b.to_string())));
        for i in 0..elems.len() {
            for j in 0..elems.len() {
                if i != j && !elems[i].is_reduced_wrt(&elems[j])? {
                    return Err(DiffError::NotAutoreduced {
                        offender: elems[i].to_string(),
                        against: elems[j].to_string(),
                    });
                }
            }
        }
        let anatomies: Vec<Anatomy> = elems
            .iter()
            .map(|f| f.anatomy().expect("nonconstant"))
            .collect();
        let ctx = elems[0].ctx().clone();
        let n = elems[0].num_unknowns();
        let mut h = DiffPoly::one(&ctx, n);
        for a in &anatomies {
            h = h.mul(&a.initial).mul(&a.separant);
        }
        Ok(CharSet { elems, anatomies, h })
    }

    pub fn elements(&self) -> &[DiffPoly] {
        &self.elems
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn anatomy(&self, i: usize) -> &Anatomy {
        &self.anatomies[i]
    }

    pub fn leaders(&self) -> Vec<RankedVar> {
        self.anatomies.iter().map(|a| a.leader.clone()).collect()
    }

    /// The product of every initial and separant.
    pub fn h_product(&self) -> &DiffPoly {
        &self.h
    }

    /// Maximal order over the elements.
    pub fn order(&self) -> u32 {
        self.elems
            .iter()
            .filter_map(DiffPoly::order)
            .max()
            .unwrap_or(0)
    }

    /// Differential division of `g` by this set, with certificate.
    ///
    /// Derivative occurrences of leaders are eliminated before degrees are
    /// lowered, and the highest-rank applicable element is always used first;
    /// both passes strictly descend in rank, so the loop terminates.
    pub fn diff_divide(&self, g: &DiffPoly) -> DivisionResult {
        let ctx = g.ctx().clone();
        let n = g.num_unknowns();
        let mut premultiplier = DiffPoly::one(&ctx, n);
        let mut factors: Vec<PremultFactor> = Vec::new();
        let mut certificate: Vec<CertTerm> = Vec::new();
        let mut remainder = g.clone();

        // Applies one pseudo-division pass: scales the running identity by
        // `scale` and records a certificate line.
        let apply_step = |remainder: &mut DiffPoly,
                              premultiplier: &mut DiffPoly,
                              certificate: &mut Vec<CertTerm>,
                              factors: &mut Vec<PremultFactor>,
                              scale: &DiffPoly,
                              kind: FactorKind,
                              element: usize,
                              quotient: DiffPoly,
                              theta: &MultiIndex,
                              divisor: &DiffPoly| {
            *remainder = remainder.mul(scale).sub(&quotient.mul(divisor));
            *premultiplier = premultiplier.mul(scale);
            for line in certificate.iter_mut() {
                line.multiplier = line.multiplier.mul(scale);
            }
            if let Some(last) = factors.last_mut() {
                if last.kind == kind && last.element == element {
                    last.power += 1;
                } else {
                    factors.push(PremultFactor {
                        kind,
                        element,
                        power: 1,
                    });
                }
            } else {
                factors.push(PremultFactor {
                    kind,
                    element,
                    power: 1,
                });
            }
            certificate.push(CertTerm {
                multiplier: quotient,
                theta: theta.clone(),
                element,
            });
        };

        loop {
            // Pass 1: the orderly-highest occurring proper derivative of a
            // leader, reduced against the highest-rank element that applies.
            let mut target: Option<(RankedVar, usize)> = None;
            for w in remainder.vars().into_iter().rev() {
                let mut best: Option<usize> = None;
                for (idx, a) in self.anatomies.iter().enumerate() {
                    if w.is_proper_derivative_of(&a.leader) {
                        best = match best {
                            None => Some(idx),
                            Some(b) => {
                                if self.elems[idx].cmp_rank(&self.elems[b]) == Ordering::Greater {
                                    Some(idx)
                                } else {
                                    Some(b)
                                }
                            }
                        };
                    }
                }
                if let Some(idx) = best {
                    target = Some((w, idx));
                    break;
                }
            }
            if let Some((w, idx)) = target {
                let theta = w
                    .index
                    .checked_sub(&self.anatomies[idx].leader.index)
                    .expect("proper derivative");
                let h = self.elems[idx].delta_by(&theta);
                // D[theta] f = S_f * w + lower, so w pseudo-divides out with
                // the separant as the scale.
                let sep = self.anatomies[idx].separant.clone();
                while remainder.degree_in(&w) >= 1 {
                    let e = remainder.degree_in(&w);
                    let c = remainder.coeff_of_power(&w, e);
                    let quotient = c.mul(&DiffPoly {
                        ctx: ctx.clone(),
                        n,
                        terms: BTreeMap::from([(DiffMono::power(w.clone(), e - 1), ctx.one())]),
                    });
                    apply_step(
                        &mut remainder,
                        &mut premultiplier,
                        &mut certificate,
                        &mut factors,
                        &sep,
                        FactorKind::Separant,
                        idx,
                        quotient,
                        &theta,
                        &h,
                    );
                }
                continue;
            }

            // Pass 2: algebraic degree reduction, highest-rank element first.
            let mut pick: Option<usize> = None;
            for (idx, a) in self.anatomies.iter().enumerate() {
                if remainder.degree_in(&a.leader) >= a.degree {
                    pick = match pick {
                        None => Some(idx),
                        Some(b) => {
                            if self.elems[idx].cmp_rank(&self.elems[b]) == Ordering::Greater {
                                Some(idx)
                            } else {
                                Some(b)
                            }
                        }
                    };
                }
            }
            let Some(idx) = pick else { break };
            let a = &self.anatomies[idx];
            let (v, d) = (a.leader.clone(), a.degree);
            let init = a.initial.clone();
            let theta = MultiIndex::zero(v.index.width());
            let f = self.elems[idx].clone();
            while remainder.degree_in(&v) >= d {
                let e = remainder.degree_in(&v);
                let c = remainder.coeff_of_power(&v, e);
                let quotient = c.mul(&DiffPoly {
                    ctx: ctx.clone(),
                    n,
                    terms: BTreeMap::from([(DiffMono::power(v.clone(), e - d), ctx.one())]),
                });
                apply_step(
                    &mut remainder,
                    &mut premultiplier,
                    &mut certificate,
                    &mut factors,
                    &init,
                    FactorKind::Initial,
                    idx,
                    quotient,
                    &theta,
                    &f,
                );
            }
        }

        DivisionResult {
            premultiplier,
            factors,
            remainder,
            certificate,
        }
    }

    /// Re-expands a division certificate and checks the identity
    /// `premultiplier * g = sum + remainder` exactly.
    pub fn verify_certificate(&self, g: &DiffPoly, result: &DivisionResult) -> bool {
        let mut rhs = result.remainder.clone();
        for line in &result.certificate {
            rhs = rhs.add(
                &line
                    .multiplier
                    .mul(&self.elems[line.element].delta_by(&line.theta)),
            );
        }
        result.premultiplier.mul(g) == rhs
    }

    /// All derivatives `D[xi](f)` of elements with total order at most `r`,
    /// deduplicated and sorted by rank.
    pub fn prolong_set(&self, r: u32) -> Result<Vec<DiffPoly>> {
        let m = self.elems[0].ctx().m();
        let mut out: Vec<DiffPoly> = Vec::new();
        for f in &self.elems {
            let ord = f.order().expect("nonconstant");
            if ord > r {
                return Err(DiffError::OrderExceeded {
                    what: f.to_string(),
                    bound: r,
                    actual: ord,
                });
            }
            for xi in MultiIndex::up_to_order(m, r - ord) {
                let d = f.delta_by(&xi);
                if d.order().map(|o| o <= r).unwrap_or(true) && !out.contains(&d) {
                    out.push(d);
                }
            }
        }
        out.sort_by(|a, b| a.cmp_rank(b).then_with(|| a.to_string().cmp(&b.to_string())));
        Ok(out)
    }

    /// Splits the ranked variables of order in `(r, s]` into those that are
    /// not derivatives of any leader (free part) and the rest.
    pub fn structure_split(
        &self,
        n: usize,
        r: u32,
        s: u32,
    ) -> Result<(Vec<RankedVar>, Vec<RankedVar>)> {
        let ord = self.order();
        if ord > r {
            return Err(DiffError::OrderExceeded {
                what: "the set".to_string(),
                bound: r,
                actual: ord,
            });
        }
        assert!(s >= r, "upper order below lower order");
        let m = self.elems[0].ctx().m();
        let leaders = self.leaders();
        let mut theta1 = Vec::new();
        let mut theta2 = Vec::new();
        for w in crate::mindex::gamma_set(n, s, m) {
            if w.order() <= r {
                continue;
            }
            if leaders.iter().any(|v| v.product_leq(&w)) {
                theta2.push(w);
            } else {
                theta1.push(w);
            }
        }
        Ok((theta1, theta2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qctx() -> DiffFieldCtx {
        DiffFieldCtx::rationals(1)
    }

    /// `D[k](x1)` in the ordinary (m=1) setting.
    fn dx(ctx: &DiffFieldCtx, k: u32) -> DiffPoly {
        DiffPoly::var(ctx, 1, RankedVar::new(MultiIndex::new(vec![k]), 1))
    }

    #[test]
    fn delta_apply_examples() {
        let ctx = qctx();
        let x = dx(&ctx, 0);
        // d(x^2) = 2 x dx
        assert_eq!(
            x.mul(&x).delta_apply(1),
            ctx_int(&ctx, 2).mul(&x).mul(&dx(&ctx, 1))
        );
        // Over Q(u) with d(u) = 1: d(u * x) = x + u * dx.
        let fctx = DiffFieldCtx::partial_field(1);
        let u = fctx.generator(1).unwrap();
        let xf = DiffPoly::var(&fctx, 1, RankedVar::new(MultiIndex::new(vec![0]), 1));
        let prod = xf.scale(&u).delta_apply(1);
        let expect = xf.add(
            &DiffPoly::var(&fctx, 1, RankedVar::new(MultiIndex::new(vec![1]), 1)).scale(&u),
        );
        assert_eq!(prod, expect);
        // A constant coefficient derives into a degree-0 polynomial.
        let c = DiffPoly::constant(&fctx, 1, u.mul(&u));
        assert_eq!(
            c.delta_apply(1),
            DiffPoly::constant(&fctx, 1, fctx.from_int(2).mul(&u))
        );
    }

    fn ctx_int(ctx: &DiffFieldCtx, k: i64) -> DiffPoly {
        DiffPoly::constant(ctx, 1, ctx.from_int(k))
    }

    #[test]
    fn anatomy_examples() {
        let ctx = qctx();
        // f = dx - x
        let f = dx(&ctx, 1).sub(&dx(&ctx, 0));
        let a = f.anatomy().unwrap();
        assert_eq!(a.leader, RankedVar::new(MultiIndex::new(vec![1]), 1));
        assert_eq!(a.degree, 1);
        assert!(a.separant.is_constant() && a.separant == DiffPoly::one(&ctx, 1));
        assert_eq!(a.initial, DiffPoly::one(&ctx, 1));
        // f = x*dx - 1
        let g = dx(&ctx, 0).mul(&dx(&ctx, 1)).sub(&ctx_int(&ctx, 1));
        let b = g.anatomy().unwrap();
        assert_eq!(b.leader, RankedVar::new(MultiIndex::new(vec![1]), 1));
        assert_eq!(b.separant, dx(&ctx, 0));
        assert_eq!(b.initial, dx(&ctx, 0));
        // f = (dx)^3 + x
        let h = dx(&ctx, 1).pow(3).add(&dx(&ctx, 0));
        let c = h.anatomy().unwrap();
        assert_eq!(c.degree, 3);
        assert_eq!(c.separant, dx(&ctx, 1).pow(2).scale(&ctx.from_int(3)));
        assert_eq!(c.initial, DiffPoly::one(&ctx, 1));
        // Constants have no anatomy.
        assert!(matches!(
            ctx_int(&ctx, 5).anatomy(),
            Err(DiffError::ConstantPolynomial(_))
        ));
    }

    #[test]
    fn rank_of_separant_and_initial_is_lower() {
        let ctx = qctx();
        for f in [
            dx(&ctx, 1).pow(3).add(&dx(&ctx, 0)),
            dx(&ctx, 0).mul(&dx(&ctx, 1)).sub(&ctx_int(&ctx, 1)),
            dx(&ctx, 2).pow(2).mul(&dx(&ctx, 1)).add(&dx(&ctx, 0).pow(5)),
        ] {
            let a = f.anatomy().unwrap();
            assert_eq!(a.separant.cmp_rank(&f), Ordering::Less);
            assert_eq!(a.initial.cmp_rank(&f), Ordering::Less);
        }
    }

    #[test]
    fn reducedness_examples() {
        let ctx = qctx();
        let f = dx(&ctx, 1).sub(&dx(&ctx, 0)); // dx - x
        let g = dx(&ctx, 0); // x
        assert!(g.is_reduced_wrt(&f).unwrap());
        // (dx)^2 against x*dx - 1: weakly reduced, not reduced.
        let h = dx(&ctx, 0).mul(&dx(&ctx, 1)).sub(&ctx_int(&ctx, 1));
        let sq = dx(&ctx, 1).pow(2);
        assert!(sq.is_weakly_reduced_wrt(&h).unwrap());
        assert!(!sq.is_reduced_wrt(&h).unwrap());
        // d2x against dx - x: not even weakly reduced.
        assert!(!dx(&ctx, 2).is_weakly_reduced_wrt(&f).unwrap());
    }

    #[test]
    fn division_by_linear_equation() {
        // Dividing d2x by {dx - x} leaves remainder x with premultiplier 1.
        let ctx = qctx();
        let f = dx(&ctx, 1).sub(&dx(&ctx, 0));
        let cs = CharSet::new(vec![f]).unwrap();
        let g = dx(&ctx, 2);
        let r = cs.diff_divide(&g);
        assert_eq!(r.premultiplier, DiffPoly::one(&ctx, 1));
        assert_eq!(r.remainder, dx(&ctx, 0));
        assert!(cs.verify_certificate(&g, &r));
        for f in cs.elements() {
            assert!(r.remainder.is_reduced_wrt(f).unwrap());
        }
    }

    #[test]
    fn division_with_nontrivial_premultiplier() {
        // Dividing d2x by {x*dx - 1} costs a premultiplier x^3, remainder -1.
        let ctx = qctx();
        let f = dx(&ctx, 0).mul(&dx(&ctx, 1)).sub(&ctx_int(&ctx, 1));
        let cs = CharSet::new(vec![f]).unwrap();
        let g = dx(&ctx, 2);
        let r = cs.diff_divide(&g);
        assert_eq!(r.premultiplier, dx(&ctx, 0).pow(3));
        assert_eq!(r.remainder, ctx_int(&ctx, -1));
        assert!(cs.verify_certificate(&g, &r));
        // One separant pass and two initial passes were recorded.
        let seps: u32 = r
            .factors
            .iter()
            .filter(|f| f.kind == FactorKind::Separant)
            .map(|f| f.power)
            .sum();
        let inits: u32 = r
            .factors
            .iter()
            .filter(|f| f.kind == FactorKind::Initial)
            .map(|f| f.power)
            .sum();
        assert_eq!((seps, inits), (1, 2));
    }

    #[test]
    fn division_leaves_reduced_input_alone() {
        let ctx = qctx();
        let f = dx(&ctx, 1).sub(&dx(&ctx, 0));
        let cs = CharSet::new(vec![f]).unwrap();
        let g = dx(&ctx, 0).pow(2);
        let r = cs.diff_divide(&g);
        assert_eq!(r.premultiplier, DiffPoly::one(&ctx, 1));
        assert_eq!(r.remainder, g);
        assert!(r.certificate.is_empty());
        // Idempotence on the remainder of a nontrivial division.
        let d = cs.diff_divide(&dx(&ctx, 3));
        let again = cs.diff_divide(&d.remainder);
        assert_eq!(again.remainder, d.remainder);
        assert_eq!(again.premultiplier, DiffPoly::one(&ctx, 1));
    }

    #[test]
    fn charset_rejects_non_autoreduced_and_constants() {
        let ctx = qctx();
        let f = dx(&ctx, 1).sub(&dx(&ctx, 0));
        let g = dx(&ctx, 2);
        assert!(matches!(
            CharSet::new(vec![f.clone(), g]),
            Err(DiffError::NotAutoreduced { .. })
        ));
        assert!(matches!(
            CharSet::new(vec![ctx_int(&ctx, 3)]),
            Err(DiffError::ConstantPolynomial(_))
        ));
        assert!(CharSet::new(vec![f]).is_ok());
    }

    #[test]
    fn prolongation_of_linear_equation() {
        let ctx = qctx();
        let f = dx(&ctx, 1).sub(&dx(&ctx, 0));
        let cs = CharSet::new(vec![f.clone()]).unwrap();
        // Up to order 2: the equation and its derivative.
        let p = cs.prolong_set(2).unwrap();
        assert_eq!(p, vec![f.clone(), dx(&ctx, 2).sub(&dx(&ctx, 1))]);
        // r = order leaves the set unchanged.
        assert_eq!(cs.prolong_set(1).unwrap(), vec![f]);
        // r below the order errors.
        assert!(matches!(
            cs.prolong_set(0),
            Err(DiffError::OrderExceeded { .. })
        ));
    }

    #[test]
    fn prolongation_with_two_derivations() {
        let ctx = DiffFieldCtx::rationals(2);
        let x = DiffPoly::var(&ctx, 1, RankedVar::new(MultiIndex::new(vec![0, 0]), 1));
        let d1x = DiffPoly::var(&ctx, 1, RankedVar::new(MultiIndex::new(vec![1, 0]), 1));
        let f = d1x.sub(&x);
        let cs = CharSet::new(vec![f.clone()]).unwrap();
        let p = cs.prolong_set(2).unwrap();
        // f, d1 f, d2 f.
        assert_eq!(p.len(), 3);
        assert!(p.contains(&f));
        assert!(p.contains(&f.delta_apply(1)));
        assert!(p.contains(&f.delta_apply(2)));
    }

    #[test]
    fn structure_split_examples() {
        let ctx = qctx();
        let f = dx(&ctx, 1).sub(&dx(&ctx, 0));
        let cs = CharSet::new(vec![f]).unwrap();
        let (t1, t2) = cs.structure_split(1, 1, 3).unwrap();
        assert!(t1.is_empty());
        assert_eq!(
            t2,
            vec![
                RankedVar::new(MultiIndex::new(vec![2]), 1),
                RankedVar::new(MultiIndex::new(vec![3]), 1),
            ]
        );

        // m=2: d2^2 x is not a derivative of the leader d1 x.
        let ctx2 = DiffFieldCtx::rationals(2);
        let x = DiffPoly::var(&ctx2, 1, RankedVar::new(MultiIndex::new(vec![0, 0]), 1));
        let d1x = DiffPoly::var(&ctx2, 1, RankedVar::new(MultiIndex::new(vec![1, 0]), 1));
        let cs2 = CharSet::new(vec![d1x.sub(&x)]).unwrap();
        let (t1, t2) = cs2.structure_split(1, 1, 2).unwrap();
        assert_eq!(t1, vec![RankedVar::new(MultiIndex::new(vec![0, 2]), 1)]);
        assert_eq!(
            t2,
            vec![
                RankedVar::new(MultiIndex::new(vec![1, 1]), 1),
                RankedVar::new(MultiIndex::new(vec![2, 0]), 1),
            ]
        );

        // A second unknown untouched by the set lands entirely in the free part.
        let cs3 = CharSet::new(vec![DiffPoly::var(&ctx, 2, RankedVar::new(MultiIndex::new(vec![1]), 1))
            .sub(&DiffPoly::var(&ctx, 2, RankedVar::new(MultiIndex::new(vec![0]), 1)))])
        .unwrap();
        let (t1, _) = cs3.structure_split(2, 1, 2).unwrap();
        assert_eq!(t1, vec![RankedVar::new(MultiIndex::new(vec![2]), 2)]);
    }

    #[test]
    fn derivations_commute_on_polynomials() {
        let fctx = DiffFieldCtx::partial_field(2);
        let u = fctx.generator(1).unwrap();
        let x = DiffPoly::var(&fctx, 1, RankedVar::new(MultiIndex::new(vec![0, 0]), 1));
        let d2x = DiffPoly::var(&fctx, 1, RankedVar::new(MultiIndex::new(vec![0, 1]), 1));
        let f = x.pow(2).scale(&u).add(&d2x.mul(&x)).sub(&DiffPoly::one(&fctx, 1));
        assert_eq!(f.delta_apply(1).delta_apply(2), f.delta_apply(2).delta_apply(1));
    }

    #[test]
    fn display_is_deterministic_and_readable() {
        let ctx = qctx();
        let f = dx(&ctx, 0).mul(&dx(&ctx, 1)).sub(&ctx_int(&ctx, 1));
        assert_eq!(f.to_string(), "D[1](x1)*x1 - 1");
        let g = dx(&ctx, 1).pow(2).scale(&ctx.from_int(-3)).add(&dx(&ctx, 0));
        assert_eq!(g.to_string(), "-3*D[1](x1)^2 + x1");
    }
}
