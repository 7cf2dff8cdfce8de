//! Desk-scale Gröbner engine over exact coefficient fields.
//!
//! Polynomials live in a [`JetRing`]: a plain commutative ring whose
//! variables are jet coordinates `x_i[xi]` (a ranked variable stripped of its
//! differential meaning) plus internal auxiliary variables.  The engine
//! provides Buchberger's algorithm with the Gebauer–Möller pair criteria and
//! sugar selection, reduced bases, ideal and radical membership, elimination
//! via block orders, and saturation — enough for jets, division-certificate
//! checks, and the geometric axiom checker.

use crate::diffpoly::DiffPoly;
use crate::error::{DiffError, Result};
use crate::mindex::{MultiIndex, RankedVar};
use crate::scalars::{DiffFieldCtx, DiffScalar};
use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

/// A variable of a jet ring.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum JetVar {
    /// A jet coordinate standing for a former ranked variable.
    Jet(RankedVar),
    /// A prolongation coordinate: a base jet coordinate tagged with the
    /// dual-number direction it expands along.
    Pro(RankedVar, MultiIndex),
    /// Internal auxiliary variable (radical membership, saturation).
    Aux(u32),
}

fn bracketed(index: &MultiIndex) -> String {
    let parts: Vec<String> = index.entries().iter().map(u32::to_string).collect();
    format!("[{}]", parts.join(","))
}

impl fmt::Display for JetVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JetVar::Jet(v) => write!(f, "x{}{}", v.var, bracketed(&v.index)),
            JetVar::Pro(v, eps) => {
                write!(f, "x{}{}@{}", v.var, bracketed(&v.index), bracketed(eps))
            }
            JetVar::Aux(k) => write!(f, "z{k}"),
        }
    }
}

/// Monomial order on exponent vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
enum MonomialOrder {
    /// Graded reverse lexicographic; later listed variables take precedence.
    GrevLex,
    /// Block order: the flagged positions dominate (and get eliminated).
    Block(Vec<bool>),
}

#[derive(Debug)]
struct JetRingInner {
    ctx: DiffFieldCtx,
    vars: Vec<JetVar>,
    order: MonomialOrder,
}

/// An ordered polynomial ring over an exact scalar context.
#[derive(Debug, Clone)]
pub struct JetRing(Arc<JetRingInner>);

impl PartialEq for JetRing {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.ctx == other.0.ctx
                && self.0.vars == other.0.vars
                && self.0.order == other.0.order)
    }
}
impl Eq for JetRing {}

impl JetRing {
    /// Ring on the given jet coordinates (must be strictly ascending in the
    /// orderly ranking) with the graded-reverse-lex order.
    pub fn new(ctx: &DiffFieldCtx, vars: Vec<RankedVar>) -> JetRing {
        Self::with_vars(ctx, vars.into_iter().map(JetVar::Jet).collect())
    }

    /// Ring on arbitrary named coordinates, strictly ascending, grevlex.
    pub fn with_vars(ctx: &DiffFieldCtx, vars: Vec<JetVar>) -> JetRing {
        assert!(ctx.is_exact(), "jet rings need exact coefficient contexts");
        assert!(
            vars.windows(2).all(|w| w[0] < w[1]),
            "ring variables must be strictly ascending"
        );
        assert!(
            !vars.iter().any(|v| matches!(v, JetVar::Aux(_))),
            "auxiliary variables are managed internally"
        );
        JetRing(Arc::new(JetRingInner {
            ctx: ctx.clone(),
            vars,
            order: MonomialOrder::GrevLex,
        }))
    }

    /// The full jet frame on `n` unknowns up to order `r`.
    pub fn jet_frame(ctx: &DiffFieldCtx, n: usize, r: u32) -> JetRing {
        JetRing::new(ctx, crate::mindex::gamma_set(n, r, ctx.m()))
    }

    pub fn ctx(&self) -> &DiffFieldCtx {
        &self.0.ctx
    }

    pub fn vars(&self) -> &[JetVar] {
        &self.0.vars
    }

    pub fn num_vars(&self) -> usize {
        self.0.vars.len()
    }

    /// The jet coordinates, in ring position order.
    pub fn jet_vars(&self) -> Vec<RankedVar> {
        self.0
            .vars
            .iter()
            .filter_map(|v| match v {
                JetVar::Jet(rv) => Some(rv.clone()),
                _ => None,
            })
            .collect()
    }

    pub fn position_of(&self, v: &JetVar) -> Option<usize> {
        self.0.vars.iter().position(|w| w == v)
    }

    /// Same variables, block order eliminating the flagged positions.
    fn with_elimination(&self, eliminate: &BTreeSet<usize>) -> JetRing {
        let flags: Vec<bool> = (0..self.num_vars()).map(|k| eliminate.contains(&k)).collect();
        JetRing(Arc::new(JetRingInner {
            ctx: self.0.ctx.clone(),
            vars: self.0.vars.clone(),
            order: MonomialOrder::Block(flags),
        }))
    }

    /// Appends a fresh auxiliary variable, dominant in a block order.
    fn with_aux(&self) -> (JetRing, usize) {
        let next = self
            .0
            .vars
            .iter()
            .filter_map(|v| match v {
                JetVar::Aux(k) => Some(k + 1),
                _ => None,
            })
            .max()
            .unwrap_or(1);
        let mut vars = self.0.vars.clone();
        vars.push(JetVar::Aux(next));
        let pos = vars.len() - 1;
        let mut flags = vec![false; vars.len()];
        flags[pos] = true;
        (
            JetRing(Arc::new(JetRingInner {
                ctx: self.0.ctx.clone(),
                vars,
                order: MonomialOrder::Block(flags),
            })),
            pos,
        )
    }

    /// Subring on the kept positions, graded-reverse-lex.
    fn restrict(&self, keep: &[usize]) -> JetRing {
        JetRing(Arc::new(JetRingInner {
            ctx: self.0.ctx.clone(),
            vars: keep.iter().map(|&k| self.0.vars[k].clone()).collect(),
            order: MonomialOrder::GrevLex,
        }))
    }

    /// Compares exponent vectors in this ring's monomial order.
    pub fn cmp_mono(&self, a: &MultiIndex, b: &MultiIndex) -> Ordering {
        match &self.0.order {
            MonomialOrder::GrevLex => cmp_grevlex(a.entries(), b.entries(), None, false),
            MonomialOrder::Block(flags) => {
                cmp_grevlex(a.entries(), b.entries(), Some(flags), true)
                    .then_with(|| cmp_grevlex(a.entries(), b.entries(), Some(flags), false))
            }
        }
    }

    /// Translates a differential polynomial into this ring, variable by
    /// variable; fails if a ranked variable is not a coordinate here.
    pub fn polynomialize(&self, f: &DiffPoly) -> Result<AlgPoly> {
        assert!(self.ctx() == f.ctx(), "coefficient context mismatch");
        let mut terms = Vec::new();
        for (mono, c) in f.terms() {
            let mut exp = vec![0u32; self.num_vars()];
            for (v, e) in mono.factors() {
                let pos = self
                    .position_of(&JetVar::Jet(v.clone()))
                    .ok_or_else(|| DiffError::UndefinedGenerator(v.to_string()))?;
                exp[pos] += e;
            }
            terms.push((MultiIndex::new(exp), c.clone()));
        }
        Ok(AlgPoly::from_terms(self, terms))
    }
}

/// Graded-reverse-lex on the positions selected by `flags == want`
/// (all positions when `flags` is `None`): higher total degree wins, ties
/// break at the first selected position that differs, smaller entry winning.
fn cmp_grevlex(a: &[u32], b: &[u32], flags: Option<&[bool]>, want: bool) -> Ordering {
    let sel = |k: usize| flags.map(|f| f[k] == want).unwrap_or(true);
    let deg = |v: &[u32]| -> u64 {
        v.iter()
            .enumerate()
            .filter(|(k, _)| sel(*k))
            .map(|(_, e)| u64::from(*e))
            .sum()
    };
    deg(a).cmp(&deg(b)).then_with(|| {
        for k in 0..a.len() {
            if sel(k) && a[k] != b[k] {
                return b[k].cmp(&a[k]);
            }
        }
        Ordering::Equal
    })
}

fn mono_lcm(a: &MultiIndex, b: &MultiIndex) -> MultiIndex {
    MultiIndex::new(
        a.entries()
            .iter()
            .zip(b.entries())
            .map(|(x, y)| *x.max(y))
            .collect(),
    )
}

fn mono_coprime(a: &MultiIndex, b: &MultiIndex) -> bool {
    a.entries().iter().zip(b.entries()).all(|(x, y)| *x == 0 || *y == 0)
}

/// Sparse polynomial in a [`JetRing`]; terms strictly descending in the
/// ring's monomial order.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgPoly {
    ring: JetRing,
    terms: Vec<(MultiIndex, DiffScalar)>,
}

impl AlgPoly {
    pub fn zero(ring: &JetRing) -> AlgPoly {
        AlgPoly {
            ring: ring.clone(),
            terms: Vec::new(),
        }
    }

    pub fn constant(ring: &JetRing, c: DiffScalar) -> AlgPoly {
        Self::from_terms(ring, vec![(MultiIndex::zero(ring.num_vars()), c)])
    }

    pub fn one(ring: &JetRing) -> AlgPoly {
        Self::constant(ring, ring.ctx().one())
    }

    /// The coordinate at ring position `pos`.
    pub fn var(ring: &JetRing, pos: usize) -> AlgPoly {
        let mut exp = vec![0u32; ring.num_vars()];
        exp[pos] = 1;
        Self::from_terms(ring, vec![(MultiIndex::new(exp), ring.ctx().one())])
    }

    /// The jet coordinate named by a ranked variable.
    pub fn jet_var(ring: &JetRing, v: &RankedVar) -> Result<AlgPoly> {
        let pos = ring
            .position_of(&JetVar::Jet(v.clone()))
            .ok_or_else(|| DiffError::UndefinedGenerator(v.to_string()))?;
        Ok(Self::var(ring, pos))
    }

    /// Sorts, merges, and prunes a raw term list.
    pub fn from_terms(ring: &JetRing, mut terms: Vec<(MultiIndex, DiffScalar)>) -> AlgPoly {
        terms.sort_by(|a, b| ring.cmp_mono(&b.0, &a.0));
        let mut merged: Vec<(MultiIndex, DiffScalar)> = Vec::with_capacity(terms.len());
        for (m, c) in terms {
            match merged.last_mut() {
                Some((lm, lc)) if *lm == m => *lc = lc.add(&c),
                _ => merged.push((m, c)),
            }
        }
        merged.retain(|(_, c)| !c.is_zero());
        AlgPoly {
            ring: ring.clone(),
            terms: merged,
        }
    }

    pub fn ring(&self) -> &JetRing {
        &self.ring
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[(MultiIndex, DiffScalar)] {
        &self.terms
    }

    /// Leading (monomial, coefficient) in the ring order.
    pub fn leading(&self) -> Option<(&MultiIndex, &DiffScalar)> {
        self.terms.first().map(|(m, c)| (m, c))
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.iter().map(|(m, _)| m.order()).max().unwrap_or(0)
    }

    fn same_ring(&self, other: &AlgPoly) {
        assert!(self.ring == other.ring, "jet ring mismatch");
    }

    pub fn add(&self, other: &AlgPoly) -> AlgPoly {
        self.same_ring(other);
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        Self::from_terms(&self.ring, terms)
    }

    pub fn neg(&self) -> AlgPoly {
        AlgPoly {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.neg())).collect(),
        }
    }

    pub fn sub(&self, other: &AlgPoly) -> AlgPoly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &AlgPoly) -> AlgPoly {
        self.same_ring(other);
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                terms.push((ma.add(mb), ca.mul(cb)));
            }
        }
        Self::from_terms(&self.ring, terms)
    }

    pub fn scale(&self, c: &DiffScalar) -> AlgPoly {
        if c.is_zero() {
            return Self::zero(&self.ring);
        }
        AlgPoly {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k.mul(c))).collect(),
        }
    }

    pub fn mul_term(&self, mono: &MultiIndex, c: &DiffScalar) -> AlgPoly {
        if c.is_zero() {
            return Self::zero(&self.ring);
        }
        AlgPoly {
            ring: self.ring.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, k)| (m.add(mono), k.mul(c)))
                .collect(),
        }
    }

    pub fn pow(&self, e: u32) -> AlgPoly {
        let mut acc = Self::one(&self.ring);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Leading coefficient scaled to 1.
    pub fn monic(&self) -> AlgPoly {
        match self.leading() {
            None => self.clone(),
            Some((_, c)) => self.scale(&c.invert().expect("nonzero leading coefficient")),
        }
    }

    /// Ring positions of the variables that occur.
    pub fn support(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for (m, _) in &self.terms {
            for (k, e) in m.entries().iter().enumerate() {
                if *e > 0 {
                    out.insert(k);
                }
            }
        }
        out
    }

    /// Carries the polynomial into another ring with the same variable list
    /// (used to change monomial order) — terms are re-sorted.
    fn reorder_into(&self, ring: &JetRing) -> AlgPoly {
        assert_eq!(self.ring.0.vars, ring.0.vars, "variable list mismatch");
        AlgPoly::from_terms(ring, self.terms.clone())
    }

    /// Widens into a ring that contains this ring's variables as a prefix.
    fn widen_into(&self, ring: &JetRing) -> AlgPoly {
        assert!(ring.num_vars() >= self.ring.num_vars());
        assert_eq!(
            &ring.0.vars[..self.ring.num_vars()],
            &self.ring.0.vars[..],
            "not a prefix extension"
        );
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mut e = m.entries().to_vec();
                e.resize(ring.num_vars(), 0);
                (MultiIndex::new(e), c.clone())
            })
            .collect();
        AlgPoly::from_terms(ring, terms)
    }

    /// Projects onto a subring; every occurring variable must be kept.
    fn restrict_into(&self, ring: &JetRing, keep: &[usize]) -> AlgPoly {
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| {
                let e: Vec<u32> = keep.iter().map(|&k| m.get(k + 1)).collect();
                assert_eq!(
                    e.iter().map(|x| u64::from(*x)).sum::<u64>(),
                    u64::from(m.order()),
                    "restriction would drop variables"
                );
                (MultiIndex::new(e), c.clone())
            })
            .collect();
        AlgPoly::from_terms(ring, terms)
    }

    /// Substitutes an image polynomial for every variable position.
    pub fn map_vars(
        &self,
        target: &JetRing,
        mut image: impl FnMut(&JetVar) -> Result<AlgPoly>,
    ) -> Result<AlgPoly> {
        let mut acc = AlgPoly::zero(target);
        for (m, c) in &self.terms {
            let mut term = AlgPoly::constant(target, c.clone());
            for (k, e) in m.entries().iter().enumerate() {
                if *e > 0 {
                    term = term.mul(&image(&self.ring.0.vars[k])?.pow(*e));
                }
            }
            acc = acc.add(&term);
        }
        Ok(acc)
    }

    /// Evaluates at scalar values per variable position.
    pub fn eval(&self, mut value: impl FnMut(&JetVar) -> Result<DiffScalar>) -> Result<DiffScalar> {
        let ctx = self.ring.ctx().clone();
        let mut acc = ctx.zero();
        for (m, c) in &self.terms {
            let mut term = c.clone();
            for (k, e) in m.entries().iter().enumerate() {
                if *e > 0 {
                    term = term.mul(&value(&self.ring.0.vars[k])?.pow(i64::from(*e))?);
                }
            }
            acc = acc.add(&term);
        }
        Ok(acc)
    }
}

impl fmt::Display for AlgPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.display_negative();
            let mag = if neg { c.neg() } else { c.clone() };
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            let mut parts = Vec::new();
            if m.is_zero() || !mag.is_one() {
                parts.push(mag.display_atom());
            }
            for (pos, e) in m.entries().iter().enumerate() {
                match e {
                    0 => {}
                    1 => parts.push(self.ring.0.vars[pos].to_string()),
                    _ => parts.push(format!("{}^{e}", self.ring.0.vars[pos])),
                }
            }
            write!(f, "{}", parts.join("*"))?;
        }
        Ok(())
    }
}

/// Hard resource bounds for basis computations.
#[derive(Debug, Clone)]
pub struct Limits {
    pub max_basis: usize,
    pub max_degree: u32,
    pub max_pairs: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_basis: 2000,
            max_degree: 128,
            max_pairs: 200_000,
        }
    }
}

/// Full normal form of `f` against `basis` (top term first, then deeper).
pub fn normal_form(f: &AlgPoly, basis: &[AlgPoly], limits: &Limits) -> Result<AlgPoly> {
    let ring = f.ring().clone();
    let mut rest = f.clone();
    let mut out: Vec<(MultiIndex, DiffScalar)> = Vec::new();
    while let Some((lm, lc)) = rest.leading().map(|(m, c)| (m.clone(), c.clone())) {
        if rest.total_degree() > limits.max_degree {
            return Err(DiffError::ResourceLimit(format!(
                "normal form degree exceeded {}",
                limits.max_degree
            )));
        }
        let mut reduced = false;
        for g in basis {
            let (gm, gc) = g.leading().expect("basis elements are nonzero");
            if let Some(q) = lm.checked_sub(gm) {
                let scale = lc.div(gc).expect("field coefficient");
                rest = rest.sub(&g.mul_term(&q, &scale));
                reduced = true;
                break;
            }
        }
        if !reduced {
            let lead = AlgPoly {
                ring: ring.clone(),
                terms: vec![(lm.clone(), lc.clone())],
            };
            out.push((lm, lc));
            rest = rest.sub(&lead);
        }
    }
    Ok(AlgPoly::from_terms(&ring, out))
}

/// S-polynomial of two nonzero polynomials.
fn s_poly(f: &AlgPoly, g: &AlgPoly) -> AlgPoly {
    let (fm, fc) = f.leading().expect("nonzero");
    let (gm, gc) = g.leading().expect("nonzero");
    let lcm = mono_lcm(fm, gm);
    let qa = lcm.checked_sub(fm).expect("lcm divisible");
    let qb = lcm.checked_sub(gm).expect("lcm divisible");
    f.mul_term(&qa, &fc.invert().expect("nonzero lead"))
        .sub(&g.mul_term(&qb, &gc.invert().expect("nonzero lead")))
}

#[derive(Debug, Clone)]
struct Pair {
    i: usize,
    j: usize,
    lcm: MultiIndex,
    sugar: u32,
}

/// Buchberger's algorithm with Gebauer–Möller pair pruning and sugar
/// selection; returns the reduced Gröbner basis, monic, sorted descending by
/// leading monomial.
pub fn buchberger(gens: &[AlgPoly], ring: &JetRing, limits: &Limits) -> Result<Vec<AlgPoly>> {
    let mut basis: Vec<AlgPoly> = Vec::new();
    let mut sugars: Vec<u32> = Vec::new();
    let mut pairs: Vec<Pair> = Vec::new();

    let add_elem = |h: AlgPoly,
                        sugar: u32,
                        basis: &mut Vec<AlgPoly>,
                        sugars: &mut Vec<u32>,
                        pairs: &mut Vec<Pair>|
     -> Result<()> {
        let t = basis.len();
        let ht = h.leading().expect("nonzero").0.clone();
        // New pairs (i, t), pruned by the Gebauer–Möller criteria.
        let mut cand: Vec<Pair> = (0..t)
            .map(|i| {
                let im = basis[i].leading().expect("nonzero").0;
                let lcm = mono_lcm(im, &ht);
                let sug = (sugars[i] + lcm.order() - im.order())
                    .max(sugar + lcm.order() - ht.order());
                Pair {
                    i,
                    j: t,
                    lcm,
                    sugar: sug,
                }
            })
            .collect();
        // Drop a candidate when another candidate's lcm strictly divides it.
        let lcms: Vec<MultiIndex> = cand.iter().map(|p| p.lcm.clone()).collect();
        let mut keep: Vec<bool> = vec![true; cand.len()];
        for a in 0..cand.len() {
            for b in 0..cand.len() {
                if a != b
                    && keep[a]
                    && lcms[b].leq(&lcms[a])
                    && lcms[b] != lcms[a]
                {
                    keep[a] = false;
                }
            }
        }
        // Among equal lcms: a coprime-lead pair kills the whole group
        // (its S-polynomial reduces to zero), otherwise one survives.
        let mut a = 0;
        while a < cand.len() {
            if !keep[a] {
                a += 1;
                continue;
            }
            let group: Vec<usize> = (0..cand.len())
                .filter(|&b| keep[b] && lcms[b] == lcms[a])
                .collect();
            let coprime = group.iter().any(|&b| {
                mono_coprime(basis[cand[b].i].leading().expect("nonzero").0, &ht)
            });
            for (pos, &b) in group.iter().enumerate() {
                keep[b] = coprime.then_some(false).unwrap_or(pos == 0);
            }
            a += 1;
        }
        let mut fresh: Vec<Pair> = Vec::new();
        for (b, p) in cand.drain(..).enumerate() {
            if keep[b] {
                fresh.push(p);
            }
        }
        // Old pairs whose lcm the new leading term supersedes are dropped.
        pairs.retain(|p| {
            let im = basis[p.i].leading().expect("nonzero").0;
            let jm = basis[p.j].leading().expect("nonzero").0;
            !(ht.leq(&p.lcm) && mono_lcm(im, &ht) != p.lcm && mono_lcm(jm, &ht) != p.lcm)
        });
        pairs.extend(fresh);
        basis.push(h);
        sugars.push(sugar);
        if basis.len() > limits.max_basis {
            return Err(DiffError::ResourceLimit(format!(
                "basis size exceeded {}",
                limits.max_basis
            )));
        }
        if pairs.len() > limits.max_pairs {
            return Err(DiffError::ResourceLimit(format!(
                "pair queue exceeded {}",
                limits.max_pairs
            )));
        }
        Ok(())
    };

    for g in gens {
        if g.is_zero() {
            continue;
        }
        assert!(g.ring() == ring, "generator outside the ring");
        let red = normal_form(g, &basis, limits)?;
        if !red.is_zero() {
            let sugar = red.total_degree();
            add_elem(red.monic(), sugar, &mut basis, &mut sugars, &mut pairs)?;
        }
    }

    while !pairs.is_empty() {
        // Sugar selection: smallest (sugar, lcm degree, lcm, indices).
        let best = pairs
            .iter()
            .enumerate()
            .min_by(|(_, p), (_, q)| {
                p.sugar
                    .cmp(&q.sugar)
                    .then(p.lcm.order().cmp(&q.lcm.order()))
                    .then_with(|| ring.cmp_mono(&p.lcm, &q.lcm))
                    .then(p.i.cmp(&q.i))
                    .then(p.j.cmp(&q.j))
            })
            .map(|(k, _)| k)
            .expect("nonempty");
        let pair = pairs.swap_remove(best);
        let s = s_poly(&basis[pair.i], &basis[pair.j]);
        let red = normal_form(&s, &basis, limits)?;
        if !red.is_zero() {
            if red.total_degree() > limits.max_degree {
                return Err(DiffError::ResourceLimit(format!(
                    "basis degree exceeded {}",
                    limits.max_degree
                )));
            }
            add_elem(
                red.monic(),
                pair.sugar,
                &mut basis,
                &mut sugars,
                &mut pairs,
            )?;
        }
    }

    // Reduce: drop elements with redundant leading terms, then fully reduce
    // each survivor against the others.
    let mut keep: Vec<bool> = vec![true; basis.len()];
    for a in 0..basis.len() {
        let am = basis[a].leading().expect("nonzero").0;
        for b in 0..basis.len() {
            if a == b || !keep[b] {
                continue;
            }
            let bm = basis[b].leading().expect("nonzero").0;
            if bm.leq(am) && (bm != am || b < a) {
                keep[a] = false;
                break;
            }
        }
    }
    let survivors: Vec<AlgPoly> = basis
        .into_iter()
        .zip(&keep)
        .filter(|(_, k)| **k)
        .map(|(g, _)| g)
        .collect();
    let mut reduced: Vec<AlgPoly> = Vec::with_capacity(survivors.len());
    for a in 0..survivors.len() {
        let others: Vec<AlgPoly> = survivors
            .iter()
            .enumerate()
            .filter(|(b, _)| *b != a)
            .map(|(_, g)| g.clone())
            .collect();
        let red = normal_form(&survivors[a], &others, limits)?;
        if !red.is_zero() {
            reduced.push(red.monic());
        }
    }
    reduced.sort_by(|f, g| {
        ring.cmp_mono(
            g.leading().expect("nonzero").0,
            f.leading().expect("nonzero").0,
        )
    });
    Ok(reduced)
}

/// A finitely generated ideal in a jet ring.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgIdeal {
    ring: JetRing,
    gens: Vec<AlgPoly>,
}

impl AlgIdeal {
    /// Normalizes generators: zeros dropped, each monic, sorted, deduplicated.
    pub fn new(ring: &JetRing, gens: Vec<AlgPoly>) -> AlgIdeal {
        let mut gens: Vec<AlgPoly> = gens
            .into_iter()
            .filter(|g| !g.is_zero())
            .map(|g| {
                assert!(g.ring() == ring, "generator outside the ring");
                g.monic()
            })
            .collect();
        gens.sort_by(|f, g| {
            ring.cmp_mono(
                g.leading().expect("nonzero").0,
                f.leading().expect("nonzero").0,
            )
            .then_with(|| f.to_string().cmp(&g.to_string()))
        });
        gens.dedup();
        AlgIdeal {
            ring: ring.clone(),
            gens,
        }
    }

    pub fn ring(&self) -> &JetRing {
        &self.ring
    }

    pub fn generators(&self) -> &[AlgPoly] {
        &self.gens
    }

    pub fn is_zero_ideal(&self) -> bool {
        self.gens.is_empty()
    }

    /// The reduced Gröbner basis as a new ideal presentation.
    pub fn buchberger(&self, limits: &Limits) -> Result<AlgIdeal> {
        Ok(AlgIdeal::new(
            &self.ring,
            buchberger(&self.gens, &self.ring, limits)?,
        ))
    }

    /// Normal form of `f` is zero against a Gröbner basis.
    pub fn ideal_member(&self, f: &AlgPoly, limits: &Limits) -> Result<bool> {
        let gb = buchberger(&self.gens, &self.ring, limits)?;
        Ok(normal_form(f, &gb, limits)?.is_zero())
    }

    /// Rabinowitsch: `f` vanishes on the zero locus iff
    /// `1 ∈ I + (1 − z·f)` in one extra variable.
    pub fn radical_member(&self, f: &AlgPoly, limits: &Limits) -> Result<bool> {
        if f.is_zero() {
            return Ok(true);
        }
        let (ext, pos) = self.ring.with_aux();
        let mut gens: Vec<AlgPoly> = self.gens.iter().map(|g| g.widen_into(&ext)).collect();
        let z = AlgPoly::var(&ext, pos);
        gens.push(AlgPoly::one(&ext).sub(&z.mul(&f.widen_into(&ext))));
        let gb = buchberger(&gens, &ext, limits)?;
        Ok(gb.len() == 1 && gb[0] == AlgPoly::one(&ext))
    }

    /// Generators of the intersection with the subring on `keep` positions,
    /// returned in that subring (block-order elimination).
    pub fn eliminate(&self, keep: &BTreeSet<usize>, limits: &Limits) -> Result<AlgIdeal> {
        let eliminate: BTreeSet<usize> =
            (0..self.ring.num_vars()).filter(|k| !keep.contains(k)).collect();
        let keep_list: Vec<usize> = keep.iter().copied().collect();
        let sub = self.ring.restrict(&keep_list);
        if eliminate.is_empty() {
            return Ok(AlgIdeal::new(
                &sub,
                self.gens.iter().map(|g| g.restrict_into(&sub, &keep_list)).collect(),
            ));
        }
        let block = self.ring.with_elimination(&eliminate);
        let gens: Vec<AlgPoly> = self.gens.iter().map(|g| g.reorder_into(&block)).collect();
        let gb = buchberger(&gens, &block, limits)?;
        let kept: Vec<AlgPoly> = gb
            .into_iter()
            .filter(|g| g.support().iter().all(|k| keep.contains(k)))
            .map(|g| g.restrict_into(&sub, &keep_list))
            .collect();
        Ok(AlgIdeal::new(&sub, kept))
    }

    /// Keeps the first `count` ring positions.
    pub fn eliminate_to_prefix(&self, count: usize, limits: &Limits) -> Result<AlgIdeal> {
        self.eliminate(&(0..count).collect(), limits)
    }

    /// Saturation `I : h^∞` by the extra-variable construction.
    pub fn saturate(&self, h: &AlgPoly, limits: &Limits) -> Result<AlgIdeal> {
        if h.is_zero() {
            return Ok(self.clone());
        }
        let (ext, pos) = self.ring.with_aux();
        let mut gens: Vec<AlgPoly> = self.gens.iter().map(|g| g.widen_into(&ext)).collect();
        let z = AlgPoly::var(&ext, pos);
        gens.push(AlgPoly::one(&ext).sub(&z.mul(&h.widen_into(&ext))));
        let gb = buchberger(&gens, &ext, limits)?;
        let keep_list: Vec<usize> = (0..self.ring.num_vars()).collect();
        let kept: Vec<AlgPoly> = gb
            .into_iter()
            .filter(|g| !g.support().contains(&pos))
            .map(|g| g.restrict_into(&self.ring, &keep_list))
            .collect();
        Ok(AlgIdeal::new(&self.ring, kept))
    }
}
