//! Taylor expansion machinery: the plain and twisted Taylor maps attached to
//! a point, the evaluation-Taylor endomorphisms of the truncated series ring,
//! and series solving of explicit differential systems.

use crate::diffpoly::{CharSet, DiffPoly};
use crate::error::{DiffError, Result};
use crate::mindex::{MultiIndex, RankedVar};
use crate::scalars::{DiffFieldCtx, DiffScalar};
use crate::series::TruncSeries;
use num_bigint::BigUint;
use std::collections::BTreeMap;

fn from_nat(ctx: &DiffFieldCtx, n: &BigUint) -> DiffScalar {
    ctx.from_natural(n)
}

/// A ring homomorphism out of the coefficient field, given by generator
/// images; not required to respect the derivations.
#[derive(Debug, Clone)]
pub struct PointMap {
    source: DiffFieldCtx,
    target: DiffFieldCtx,
    gen_images: Vec<DiffScalar>,
}

impl PointMap {
    /// A map determined by images of the source generators `u1..up`.
    pub fn new(
        source: &DiffFieldCtx,
        target: &DiffFieldCtx,
        gen_images: Vec<DiffScalar>,
    ) -> PointMap {
        assert_eq!(source.m(), target.m(), "derivation arity mismatch");
        assert_eq!(
            gen_images.len(),
            source.num_generators(),
            "one image per generator"
        );
        for img in &gen_images {
            assert!(img.ctx() == target, "image outside the target context");
        }
        PointMap {
            source: source.clone(),
            target: target.clone(),
            gen_images,
        }
    }

    /// The identity point of a context.
    pub fn identity(ctx: &DiffFieldCtx) -> PointMap {
        let gens: Vec<DiffScalar> = (1..=ctx.num_generators())
            .map(|j| ctx.generator(j).expect("generator in range"))
            .collect();
        PointMap::new(ctx, ctx, gens)
    }

    pub fn source(&self) -> &DiffFieldCtx {
        &self.source
    }

    pub fn target(&self) -> &DiffFieldCtx {
        &self.target
    }

    /// Checks that each relation maps to zero (the lazy well-definedness
    /// contract: only supplied relations are verified).
    pub fn respecting(self, relations: &[DiffScalar]) -> Result<PointMap> {
        for rel in relations {
            let image = self.apply(rel)?;
            if !image.is_zero() {
                return Err(DiffError::RelationNotRespected {
                    relation: rel.to_string(),
                    image: image.to_string(),
                });
            }
        }
        Ok(self)
    }

    /// Image of a scalar.
    pub fn apply(&self, a: &DiffScalar) -> Result<DiffScalar> {
        a.eval_generators(&self.gen_images, &self.target)
    }

    /// Image of the `beta`-th derivative of a scalar.
    pub fn apply_derived(&self, a: &DiffScalar, beta: &MultiIndex) -> Result<DiffScalar> {
        self.apply(&a.derive_by(beta))
    }
}

/// The Taylor map at a point: `a` goes to the series with coefficient
/// `phi(d^alpha a)/alpha!` at `t^alpha`.  The result intertwines the source
/// derivations with `d/dt`.
pub fn taylor(phi: &PointMap, a: &DiffScalar, n: usize) -> Result<TruncSeries> {
    let ctx = phi.target().clone();
    let mut coeffs = Vec::new();
    for alpha in MultiIndex::up_to_order(ctx.m(), n as u32) {
        let image = phi.apply_derived(a, &alpha)?;
        let fact = from_nat(&ctx, &alpha.factorial());
        coeffs.push((alpha, image.div(&fact)?));
    }
    Ok(TruncSeries::from_coeffs(&ctx, n, coeffs))
}

/// Twisted Taylor coefficients from a jet of point values: given
/// `jet(beta) = phi(d^beta a)`, the series with
/// `b_alpha = (1/alpha!) sum_{beta <= alpha} (-1)^{|alpha|-|beta|}
/// binom(alpha,beta) del^{alpha-beta}(jet(beta))`
/// where `del` runs over the target derivations.
fn twisted_from_jet(
    ctx: &DiffFieldCtx,
    n: usize,
    jet: &BTreeMap<MultiIndex, DiffScalar>,
) -> TruncSeries {
    let mut coeffs = Vec::new();
    for alpha in MultiIndex::up_to_order(ctx.m(), n as u32) {
        let mut sum = ctx.zero();
        for beta in alpha.divisors() {
            let diff = alpha.checked_sub(&beta).expect("beta <= alpha");
            let term = jet[&beta]
                .derive_by(&diff)
                .mul(&from_nat(ctx, &alpha.binom(&beta)));
            sum = if (alpha.order() - beta.order()) % 2 == 1 {
                sum.sub(&term)
            } else {
                sum.add(&term)
            };
        }
        let fact = from_nat(ctx, &alpha.factorial());
        coeffs.push((alpha, sum.div(&fact).expect("factorial is nonzero")));
    }
    TruncSeries::from_coeffs(ctx, n, coeffs)
}

/// The twisted Taylor map at a point: like [`taylor`], but corrected so the
/// result intertwines the source derivations with (target derivations +
/// `d/dt`) and restricts to `phi` at `t = 0`.
pub fn twisted_taylor(phi: &PointMap, a: &DiffScalar, n: usize) -> Result<TruncSeries> {
    let ctx = phi.target().clone();
    let mut jet = BTreeMap::new();
    for beta in MultiIndex::up_to_order(ctx.m(), n as u32) {
        jet.insert(beta.clone(), phi.apply_derived(a, &beta)?);
    }
    Ok(twisted_from_jet(&ctx, n, &jet))
}

/// The evaluation-Taylor endomorphism with per-direction weights: sends `f`
/// to the series whose `alpha`-coefficient is
/// `(1/alpha!) * ev0((w_1*d_1 + d/dt_1)^{alpha_1} ... f)`.
/// Weights `+1/-1/0` give the maps for the sum, difference, or absence of
/// the coefficient derivations.
pub fn taylor_ev_weighted(weights: &[i64], f: &TruncSeries) -> TruncSeries {
    let ctx = f.ctx().clone();
    let m = ctx.m();
    assert_eq!(weights.len(), m, "one weight per derivation");
    let trunc = f.trunc();
    // Memoized operator powers along a canonical path: extend at the first
    // nonzero coordinate (the operators for different directions commute).
    let mut powers: BTreeMap<MultiIndex, TruncSeries> = BTreeMap::new();
    powers.insert(MultiIndex::zero(m), f.clone());
    let mut coeffs = Vec::new();
    for alpha in MultiIndex::up_to_order(m, trunc as u32) {
        if !powers.contains_key(&alpha) {
            let k = (1..=m).find(|&k| alpha.get(k) > 0).expect("nonzero index");
            let prev = &powers[&alpha
                .checked_sub(&MultiIndex::unit(m, k))
                .expect("positive coordinate")];
            let next = if weights[k - 1] == 0 {
                prev.ddt(k)
            } else {
                let coefficient_part = prev
                    .coeff_delta(k)
                    .scale(&ctx.from_int(weights[k - 1]))
                    .with_prec(prev.prec() - 1);
                coefficient_part.add(&prev.ddt(k))
            };
            powers.insert(alpha.clone(), next);
        }
        let p = &powers[&alpha];
        if p.prec() < 0 {
            continue;
        }
        let fact = from_nat(&ctx, &alpha.factorial());
        coeffs.push((
            alpha.clone(),
            p.ev0().div(&fact).expect("factorial is nonzero"),
        ));
    }
    TruncSeries::from_coeffs(&ctx, trunc, coeffs).with_prec(f.prec())
}

/// The evaluation-Taylor endomorphism for `sign*Delta + d/dt` with a uniform
/// sign; `+1` and `-1` are compositional inverses of each other.
pub fn taylor_ev(sign: i64, f: &TruncSeries) -> TruncSeries {
    assert!(sign == 1 || sign == -1, "sign must be +1 or -1");
    taylor_ev_weighted(&vec![sign; f.ctx().m()], f)
}

/// Explicit presentation of one equation: leader = right-hand side.
struct ExplicitEq {
    leader: RankedVar,
    rhs: DiffPoly,
}

/// Validates that every element has the shape `v - g` with unit initial and
/// separant, returning the rewrite table.
fn explicit_table(system: &CharSet) -> Result<Vec<ExplicitEq>> {
    let mut table = Vec::new();
    for (k, f) in system.elements().iter().enumerate() {
        let a = system.anatomy(k);
        let one = DiffPoly::one(f.ctx(), f.num_unknowns());
        if a.degree != 1 || a.initial != one || a.separant != one {
            return Err(DiffError::NotExplicit(f.to_string()));
        }
        let leader_poly = DiffPoly::var(f.ctx(), f.num_unknowns(), a.leader.clone());
        table.push(ExplicitEq {
            leader: a.leader.clone(),
            rhs: leader_poly.sub(f),
        });
    }
    Ok(table)
}

/// Solves an explicit system as truncated series in the coefficient field.
///
/// Initial data must cover exactly the derivatives of order at most `n` that
/// are not derivatives of any leader.  Every determined derivative is
/// evaluated along every equation that reaches it, and disagreements surface
/// as [`DiffError::InconsistentSystem`] with the offending derivative.  The
/// output is one twisted Taylor series per unknown, so each series satisfies
/// its equations in the target ring with derivations (coefficient + `d/dt`).
pub fn series_solve(
    system: &CharSet,
    init: &BTreeMap<RankedVar, DiffScalar>,
    n: usize,
) -> Result<Vec<TruncSeries>> {
    let table = explicit_table(system)?;
    let first = &system.elements()[0];
    let ctx = first.ctx().clone();
    let m = ctx.m();
    let unknowns = first.num_unknowns();

    // Ranked variables up to order n, ascending, so every right-hand side is
    // evaluated after its (lower-ranked) inputs.
    let frame = crate::mindex::gamma_set(unknowns, n as u32, m);
    let mut values: BTreeMap<RankedVar, DiffScalar> = BTreeMap::new();
    for w in &frame {
        let mut determined: Option<DiffScalar> = None;
        for eq in &table {
            if !eq.leader.product_leq(w) {
                continue;
            }
            let theta = w
                .index
                .checked_sub(&eq.leader.index)
                .expect("product order divisibility");
            let candidate = eq.rhs.delta_by(&theta).eval_vars(&values)?;
            match &determined {
                None => determined = Some(candidate),
                Some(prev) => {
                    if !prev.compare(&candidate).holds() {
                        return Err(DiffError::InconsistentSystem {
                            var: w.clone(),
                            left: prev.to_string(),
                            right: candidate.to_string(),
                        });
                    }
                }
            }
        }
        match determined {
            Some(v) => {
                if init.contains_key(w) {
                    return Err(DiffError::UnexpectedInitial(w.clone()));
                }
                values.insert(w.clone(), v);
            }
            None => {
                let v = init
                    .get(w)
                    .ok_or_else(|| DiffError::MissingInitial(w.clone()))?;
                values.insert(w.clone(), v.clone());
            }
        }
    }
    for key in init.keys() {
        if !values.contains_key(key) {
            return Err(DiffError::UnexpectedInitial(key.clone()));
        }
    }

    let mut out = Vec::with_capacity(unknowns);
    for i in 1..=unknowns {
        let jet: BTreeMap<MultiIndex, DiffScalar> = MultiIndex::up_to_order(m, n as u32)
            .into_iter()
            .map(|alpha| {
                let v = values[&RankedVar::new(alpha.clone(), i)].clone();
                (alpha, v)
            })
            .collect();
        out.push(twisted_from_jet(&ctx, n, &jet));
    }
    Ok(out)
}
