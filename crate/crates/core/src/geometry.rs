//! Differential-geometric constructions over jet coordinates: prolongations
//! of affine varieties through truncated dual numbers, jet ideals of
//! characteristic sets, the Ackermann-style recursion bounds, and the
//! geometric axiom checker.

use crate::diffpoly::CharSet;
use crate::error::{DiffError, Result};
use crate::groebner::{AlgIdeal, AlgPoly, JetRing, JetVar, Limits};
use crate::mindex::{MultiIndex, RankedVar};
use crate::scalars::DiffScalar;
use num_bigint::BigUint;
use num_traits::{One, Zero};
use std::collections::BTreeMap;

/// Polynomial with dual-number coefficients: a map from epsilon-exponents of
/// order at most `r` to polynomials in the prolonged ring.
struct EpsExpansion {
    r: u32,
    terms: BTreeMap<MultiIndex, AlgPoly>,
}

impl EpsExpansion {
    fn constant(r: u32, p: AlgPoly) -> EpsExpansion {
        let m = p.ring().ctx().m();
        EpsExpansion {
            r,
            terms: BTreeMap::from([(MultiIndex::zero(m), p)]),
        }
    }

    fn insert(&mut self, eta: MultiIndex, p: AlgPoly) {
        if i64::from(eta.order()) > i64::from(self.r) || p.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(eta) {
            Entry::Vacant(v) => {
                v.insert(p);
            }
            Entry::Occupied(mut o) => {
                let next = o.get().add(&p);
                if next.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = next;
                }
            }
        }
    }

    fn mul(&self, other: &EpsExpansion) -> EpsExpansion {
        assert_eq!(self.r, other.r);
        let mut out = EpsExpansion {
            r: self.r,
            terms: BTreeMap::new(),
        };
        for (ea, pa) in &self.terms {
            for (eb, pb) in &other.terms {
                out.insert(ea.add(eb), pa.mul(pb));
            }
        }
        out
    }

    fn pow(&self, e: u32, ring: &JetRing) -> EpsExpansion {
        let mut acc = EpsExpansion::constant(self.r, AlgPoly::one(ring));
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }
}

/// The prolonged name of an input coordinate expanded along `eta`.  When the
/// input frame is plain (all order zero), the prolongation coordinates are
/// ordinary jet coordinates; otherwise they stay tagged with their direction.
fn tau_var(base: &RankedVar, eta: &MultiIndex, plain_input: bool) -> JetVar {
    if plain_input {
        JetVar::Jet(RankedVar::new(eta.clone(), base.var))
    } else {
        JetVar::Pro(base.clone(), eta.clone())
    }
}

/// The prolongation of a variety through exponential truncated dual numbers:
/// each coordinate expands to `sum_eta (coordinate along eta)/eta! * eps^eta`
/// and each scalar coefficient to `sum_eta d^eta(c)/eta! * eps^eta`; every
/// epsilon-coefficient of every expanded generator is emitted.  The scaling
/// is the one that puts the plain derivative tuple of any solution on the
/// prolongation.
pub fn prolongation_tau(x: &AlgIdeal, r: u32) -> AlgIdeal {
    let ctx = x.ring().ctx().clone();
    let m = ctx.m();
    let input_vars: Vec<RankedVar> = x
        .ring()
        .vars()
        .iter()
        .map(|v| match v {
            JetVar::Jet(rv) => rv.clone(),
            other => panic!("cannot prolong ring containing {other}"),
        })
        .collect();
    let plain_input = input_vars.iter().all(|v| v.index.is_zero());
    let directions = MultiIndex::up_to_order(m, r);
    let mut out_vars: Vec<JetVar> = Vec::new();
    for b in &input_vars {
        for eta in &directions {
            out_vars.push(tau_var(b, eta, plain_input));
        }
    }
    out_vars.sort();
    out_vars.dedup();
    assert_eq!(
        out_vars.len(),
        input_vars.len() * directions.len(),
        "prolonged coordinates must be distinct"
    );
    let ring = JetRing::with_vars(&ctx, out_vars);

    let expand_var = |b: &RankedVar| -> EpsExpansion {
        let mut e = EpsExpansion {
            r,
            terms: BTreeMap::new(),
        };
        for eta in &directions {
            let pos = ring
                .position_of(&tau_var(b, eta, plain_input))
                .expect("constructed above");
            let inv_fact = ctx
                .from_natural(&eta.factorial())
                .invert()
                .expect("factorial is nonzero");
            e.insert(eta.clone(), AlgPoly::var(&ring, pos).scale(&inv_fact));
        }
        e
    };
    let expand_scalar = |c: &DiffScalar| -> EpsExpansion {
        let mut e = EpsExpansion {
            r,
            terms: BTreeMap::new(),
        };
        for eta in &directions {
            let inv_fact = ctx
                .from_natural(&eta.factorial())
                .invert()
                .expect("factorial is nonzero");
            let coeff = c.derive_by(eta).mul(&inv_fact);
            e.insert(eta.clone(), AlgPoly::constant(&ring, coeff));
        }
        e
    };

    let mut gens = Vec::new();
    for f in x.generators() {
        let mut expansion = EpsExpansion {
            r,
            terms: BTreeMap::new(),
        };
        for (mono, c) in f.terms() {
            let mut term = expand_scalar(c);
            for (pos, e) in mono.entries().iter().enumerate() {
                if *e > 0 {
                    term = term.mul(&expand_var(&input_vars[pos]).pow(*e, &ring));
                }
            }
            for (eta, p) in term.terms {
                expansion.insert(eta, p);
            }
        }
        gens.extend(expansion.terms.into_values());
    }
    AlgIdeal::new(&ring, gens)
}

/// The first prolongation by the explicit formula: the original generators
/// plus, for each derivation `d_k`, the generators
/// `sum_i df/dx_i * x_i^{e_k} + f^{d_k}` (the superscript applying `d_k` to
/// coefficients only).  Input must be a plain frame.
pub fn first_prolongation_explicit(x: &AlgIdeal) -> AlgIdeal {
    let ctx = x.ring().ctx().clone();
    let m = ctx.m();
    let input_vars: Vec<RankedVar> = x
        .ring()
        .vars()
        .iter()
        .map(|v| match v {
            JetVar::Jet(rv) if rv.index.is_zero() => rv.clone(),
            other => panic!("explicit formula needs a plain frame, got {other}"),
        })
        .collect();
    let mut out_vars: Vec<JetVar> = Vec::new();
    for b in &input_vars {
        for eta in MultiIndex::up_to_order(m, 1) {
            out_vars.push(JetVar::Jet(RankedVar::new(eta, b.var)));
        }
    }
    out_vars.sort();
    let ring = JetRing::with_vars(&ctx, out_vars);

    let embed = |f: &AlgPoly| -> AlgPoly {
        f.map_vars(&ring, |v| {
            let pos = ring.position_of(v).expect("plain variable kept");
            Ok(AlgPoly::var(&ring, pos))
        })
        .expect("total mapping")
    };
    let mut gens: Vec<AlgPoly> = x.generators().iter().map(embed).collect();
    for f in x.generators() {
        for k in 1..=m {
            // d/dx_i of f, embedded, times the order-one coordinate.
            let mut g = AlgPoly::zero(&ring);
            for (pos, b) in input_vars.iter().enumerate() {
                let partial = poly_partial(f, pos);
                let jet_pos = ring
                    .position_of(&JetVar::Jet(b.derive(k)))
                    .expect("order-one coordinate");
                g = g.add(&embed(&partial).mul(&AlgPoly::var(&ring, jet_pos)));
            }
            // Coefficient-wise derivation of f.
            let coeff_derived = AlgPoly::from_terms(
                x.ring(),
                f.terms()
                    .iter()
                    .map(|(mono, c)| (mono.clone(), c.derive(k)))
                    .collect(),
            );
            gens.push(g.add(&embed(&coeff_derived)));
        }
    }
    AlgIdeal::new(&ring, gens)
}

/// Formal partial derivative of an algebraic polynomial in one ring position.
fn poly_partial(f: &AlgPoly, pos: usize) -> AlgPoly {
    let ctx = f.ring().ctx().clone();
    let terms = f
        .terms()
        .iter()
        .filter(|(mono, _)| mono.get(pos + 1) > 0)
        .map(|(mono, c)| {
            let e = mono.get(pos + 1);
            let lowered = mono
                .checked_sub(&MultiIndex::unit(mono.width(), pos + 1))
                .expect("positive exponent");
            (lowered, c.mul(&ctx.from_int(i64::from(e))))
        })
        .collect();
    AlgPoly::from_terms(f.ring(), terms)
}

/// Checks that the full derivative tuple of a claimed solution lies on the
/// prolongation: substitutes `d^eta(witness_i)` for the prolonged
/// coordinates and requires every generator to vanish.  The witness must
/// satisfy the variety itself.
pub fn nabla_check(x: &AlgIdeal, witness: &[DiffScalar], r: u32) -> Result<bool> {
    assert_eq!(
        witness.len(),
        x.ring().num_vars(),
        "one witness value per coordinate"
    );
    let by_var: BTreeMap<usize, DiffScalar> = x
        .ring()
        .vars()
        .iter()
        .zip(witness)
        .map(|(v, a)| {
            assert!(a.ctx() == x.ring().ctx(), "witness context mismatch");
            match v {
                JetVar::Jet(rv) if rv.index.is_zero() => (rv.var, a.clone()),
                other => panic!("witness checking needs a plain frame, got {other}"),
            }
        })
        .collect();
    for f in x.generators() {
        let value = f.eval(|v| match v {
            JetVar::Jet(rv) => Ok(by_var[&rv.var].clone()),
            _ => unreachable!("plain frame"),
        })?;
        if !value.is_zero() {
            return Err(DiffError::WitnessNotOnX(f.to_string()));
        }
    }
    let tau = prolongation_tau(x, r);
    for g in tau.generators() {
        let value = g.eval(|v| match v {
            JetVar::Jet(rv) => Ok(by_var[&rv.var].derive_by(&rv.index)),
            _ => unreachable!("plain input prolongs to jet names"),
        })?;
        if !value.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The defining ideal of the order-`r` jet locus of a characteristic set:
/// all derivatives of the elements up to order `r`, read as plain
/// polynomials in the jet frame, saturated by the product of initials and
/// separants.
pub fn jet_ideal(system: &CharSet, r: u32, limits: &Limits) -> Result<AlgIdeal> {
    let first = &system.elements()[0];
    let ctx = first.ctx().clone();
    let ring = JetRing::jet_frame(&ctx, first.num_unknowns(), r);
    let mut gens = Vec::new();
    for f in system.prolong_set(r)? {
        gens.push(ring.polynomialize(&f)?);
    }
    let h = ring.polynomialize(system.h_product())?;
    AlgIdeal::new(&ring, gens).saturate(&h, limits)
}

/// Guards for the explosive recursions.
#[derive(Debug, Clone)]
pub struct AckGuard {
    /// Largest allowed exponent in a power of two.
    pub max_shift: u64,
    /// Largest allowed iteration count for levels without closed forms.
    pub max_iterations: u64,
}

impl Default for AckGuard {
    fn default() -> Self {
        AckGuard {
            max_shift: 1 << 20,
            max_iterations: 1 << 16,
        }
    }
}

fn shift_guarded(y: &BigUint, guard: &AckGuard) -> Result<u64> {
    let sh = u64::try_from(y).map_err(|_| {
        DiffError::ResourceLimit(format!("exponent {y} does not fit a machine word"))
    })?;
    if sh > guard.max_shift {
        return Err(DiffError::ResourceLimit(format!(
            "exponent {sh} exceeds the shift guard {}",
            guard.max_shift
        )));
    }
    Ok(sh)
}

/// The two-argument Ackermann function with closed forms through level 3 and
/// guarded recursion above.
pub fn ackermann(x: u32, y: &BigUint, guard: &AckGuard) -> Result<BigUint> {
    match x {
        0 => Ok(y + 1u32),
        1 => Ok(y + 2u32),
        2 => Ok(y * 2u32 + 3u32),
        3 => {
            let sh = shift_guarded(&(y + 3u32), guard)?;
            Ok((BigUint::one() << sh) - 3u32)
        }
        _ => {
            // A(x, y) is the (y+1)-fold iterate of A(x-1, _) on 1.
            let reps = u64::try_from(y).map_err(|_| {
                DiffError::ResourceLimit(format!("iteration count {y} does not fit"))
            })?;
            if reps + 1 > guard.max_iterations {
                return Err(DiffError::ResourceLimit(format!(
                    "iteration count {} exceeds the guard {}",
                    reps + 1,
                    guard.max_iterations
                )));
            }
            let mut acc = BigUint::one();
            for _ in 0..=reps {
                acc = ackermann(x - 1, &acc, guard)?;
            }
            Ok(acc)
        }
    }
}

/// One level of the kernel bound: the recursion
/// `C(0) = 0, C(r) = A(m-1, C(r-1))`, evaluated by closed form where one
/// exists (m at most 3) and by guarded iteration otherwise.
fn kernel_bound_single(r: &BigUint, m: u32, guard: &AckGuard) -> Result<BigUint> {
    assert!(m >= 1, "at least one derivation");
    match m {
        1 => Ok(r.clone()),
        2 => Ok(r * 2u32),
        3 => {
            if r.is_zero() {
                return Ok(BigUint::zero());
            }
            let sh = shift_guarded(r, guard)?;
            Ok(((BigUint::one() << sh) - 1u32) * 3u32)
        }
        _ => {
            let reps = u64::try_from(r).map_err(|_| {
                DiffError::ResourceLimit(format!("recursion depth {r} does not fit"))
            })?;
            if reps > guard.max_iterations {
                return Err(DiffError::ResourceLimit(format!(
                    "recursion depth {reps} exceeds the guard {}",
                    guard.max_iterations
                )));
            }
            let mut c = BigUint::zero();
            for _ in 0..reps {
                c = ackermann(m - 1, &c, guard)?;
            }
            Ok(c)
        }
    }
}

/// The prolongation-length bound `C(r, m, n)`: the single-unknown bound
/// applied once for `n = 1` and then re-applied to its own output for each
/// further unknown.
pub fn kernel_bound(r: &BigUint, m: u32, n: u32, guard: &AckGuard) -> Result<BigUint> {
    assert!(n >= 1, "at least one unknown");
    let mut c = kernel_bound_single(r, m, guard)?;
    for _ in 1..n {
        c = kernel_bound_single(&c, m, guard)?;
    }
    Ok(c)
}

fn binom_big(top: &BigUint, m: u32) -> BigUint {
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for j in 1..=m {
        // top could be below m; binom(top, m) = 0 then.
        let factor = top + 1u32;
        if factor <= BigUint::from(j) {
            return BigUint::zero();
        }
        num *= factor - j;
        den *= BigUint::from(j);
    }
    num / den
}

/// The ambient-frame sizes for the axiom checker: with `C = C(1, m, n)`,
/// alpha counts the jet coordinates up to order `C` and beta those up to
/// order `C - 1`.
pub fn alpha_beta(n: u32, m: u32, guard: &AckGuard) -> Result<(BigUint, BigUint)> {
    let c = kernel_bound(&BigUint::one(), m, n, guard)?;
    let alpha = binom_big(&(&c + m), m) * n;
    let beta = binom_big(&(&c - 1u32 + m), m) * n;
    Ok((alpha, beta))
}

/// Outcome of the geometric axiom condition on a candidate variety.
#[derive(Debug, Clone)]
pub struct AxiomReport {
    /// Whether every prolongation constraint pulls back into the radical.
    pub holds: bool,
    /// First pulled-back generator failing radical membership.
    pub failing_generator: Option<AlgPoly>,
    /// Projection of the variety to the lower jet frame.
    pub pi: AlgIdeal,
    /// First prolongation of that projection.
    pub tau: AlgIdeal,
    /// Projection to the order-one frame (the output locus).
    pub psi: AlgIdeal,
    /// Smooth-point hypothesis: semantic, never evaluated here.
    pub smooth_point_checked: Option<bool>,
    /// Density conclusion: semantic, never evaluated here.
    pub density_checked: Option<bool>,
}

/// Checks the prolongation-containment condition on a variety presented in
/// the full jet frame of order `C(1, m, n)`: projects to the order-`C-1`
/// frame, prolongs once treating those jet coordinates as plain unknowns,
/// and tests that each resulting generator, re-read in the original frame by
/// merging the prolongation direction into the jet index, vanishes on the
/// variety (radical membership).  The smoothness and density sides of the
/// story are semantic and reported as unevaluated.
pub fn axiom_check(w: &AlgIdeal, limits: &Limits) -> Result<AxiomReport> {
    let ctx = w.ring().ctx().clone();
    let m = u32::try_from(ctx.m()).expect("small arity");
    let guard = AckGuard::default();

    // Infer the number of unknowns from the frame shape.
    let mut frame_info: Option<(usize, u32)> = None;
    for n in 1..=64usize {
        let c_big = match kernel_bound(&BigUint::one(), m, n as u32, &guard) {
            Ok(c) => c,
            // Larger frames only get bigger; no match is possible.
            Err(DiffError::ResourceLimit(_)) => break,
            Err(e) => return Err(e),
        };
        let Ok(c) = u32::try_from(&c_big) else { break };
        let frame = crate::mindex::gamma_set(n, c, ctx.m());
        let named: Vec<JetVar> = frame.into_iter().map(JetVar::Jet).collect();
        if named.len() > w.ring().num_vars() {
            break;
        }
        if named == w.ring().vars() {
            frame_info = Some((n, c));
            break;
        }
    }
    let Some((n, c)) = frame_info else {
        return Err(DiffError::DimensionMismatch(format!(
            "{} variables do not form a full jet frame of the bound order",
            w.ring().num_vars()
        )));
    };

    let beta = usize::try_from(&crate::mindex::gamma_size(n, c - 1, ctx.m()))
        .expect("smaller than the frame already in hand");
    let pi = w.eliminate_to_prefix(beta, limits)?;
    let tau = prolongation_tau(&pi, 1);

    // Pull each tau-generator back along the coordinate identification
    // (base jet index, direction) -> base jet index + direction.
    let mut holds = true;
    let mut failing = None;
    for g in tau.generators() {
        let pulled = g.map_vars(w.ring(), |v| {
            let target = match v {
                JetVar::Jet(rv) => rv.clone(),
                JetVar::Pro(base, eta) => RankedVar::new(base.index.add(eta), base.var),
                JetVar::Aux(_) => unreachable!("no auxiliaries in a prolongation"),
            };
            AlgPoly::jet_var(w.ring(), &target)
        })?;
        if !w.radical_member(&pulled, limits)? {
            holds = false;
            failing = Some(pulled);
            break;
        }
    }

    let psi_count = usize::try_from(&crate::mindex::gamma_size(n, 1, ctx.m()))
        .expect("smaller than the frame already in hand");
    let psi = w.eliminate_to_prefix(psi_count.min(w.ring().num_vars()), limits)?;
    Ok(AxiomReport {
        holds,
        failing_generator: failing,
        pi,
        tau,
        psi,
        smooth_point_checked: None,
        density_checked: None,
    })
}
