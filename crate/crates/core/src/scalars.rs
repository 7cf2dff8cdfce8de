//! Differential coefficient fields and their elements.
//!
//! A [`DiffFieldCtx`] fixes the number `m` of commuting derivations and the
//! kind of field: plain rationals, a rational-function field `Q(u1..up)` with
//! a user-supplied (and validated) derivation table, or a truncated
//! Laurent-series tower over another context.  A [`DiffScalar`] is one element
//! of such a field, carrying its context handle.
//!
//! Arithmetic on the first two kinds is exact with canonical representations;
//! tower elements are fractions of truncated series, and their comparisons are
//! decidable only to the available precision.

use crate::error::{DiffError, Result};
use crate::mindex::MultiIndex;
use crate::mpoly::{self, MPoly};
use crate::series::TruncSeries;
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::sync::Arc;

/// Outcome of comparing two scalars.
///
/// Exact kinds answer `Equal` or `Unequal`; series-fraction kinds can never
/// certify exact equality and answer `EqualToPrecision` instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    Equal,
    EqualToPrecision,
    Unequal,
}

impl Comparison {
    /// True unless the scalars are known to differ.
    pub fn holds(self) -> bool {
        self != Comparison::Unequal
    }
}

#[derive(Debug, PartialEq)]
enum CtxKind {
    Rationals {
        m: usize,
    },
    /// `Q(u1..up)` with `table[j][i] = d_{i+1}(u_{j+1})`.
    RationalFunctions {
        m: usize,
        p: usize,
        table: Vec<Vec<RatFn>>,
    },
    /// Fractions of truncated power series over `base`, exact through total
    /// degree `trunc` in the `m` named level variables.
    Tower {
        base: DiffFieldCtx,
        names: Vec<String>,
        trunc: usize,
    },
}

#[derive(Debug)]
pub struct DiffFieldCtxInner {
    kind: CtxKind,
}

/// Handle to a differential coefficient field; cheap to clone.
#[derive(Debug, Clone)]
pub struct DiffFieldCtx(Arc<DiffFieldCtxInner>);

impl PartialEq for DiffFieldCtx {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.kind == other.0.kind
    }
}
impl Eq for DiffFieldCtx {}

impl DiffFieldCtx {
    /// The rationals with `m` (trivial) derivations.
    pub fn rationals(m: usize) -> Self {
        assert!(m >= 1, "at least one derivation");
        DiffFieldCtx(Arc::new(DiffFieldCtxInner {
            kind: CtxKind::Rationals { m },
        }))
    }

    /// `Q(u1..up)` where every derivation kills every generator.
    pub fn constants_field(m: usize, p: usize) -> Self {
        let zero_row = vec![DiffFieldCtx::rationals(m).zero(); m];
        let table: Vec<Vec<DiffScalar>> = (0..p).map(|_| zero_row.clone()).collect();
        Self::rational_functions(m, p, &table).expect("zero table commutes")
    }

    /// `Q(u1..um)` with `d_i = ∂/∂u_i` (as many generators as derivations).
    pub fn partial_field(m: usize) -> Self {
        assert!(m >= 1);
        let bootstrap = Self::constants_field(m, m);
        let table: Vec<Vec<DiffScalar>> = (1..=m)
            .map(|j| {
                (1..=m)
                    .map(|i| {
                        if i == j {
                            bootstrap.one()
                        } else {
                            bootstrap.zero()
                        }
                    })
                    .collect()
            })
            .collect();
        Self::rational_functions(m, m, &table).expect("partial derivatives commute")
    }

    /// `Q(u1..up)` with the given derivation table; `table[j][i]` is the image
    /// of generator `u_{j+1}` under derivation `d_{i+1}`.
    ///
    /// Entries may come from any rational or rational-function context with
    /// the same number of generators.  Fails with
    /// [`DiffError::NonCommutingDerivations`] (carrying a witness) when the
    /// table does not define commuting derivations.
    pub fn rational_functions(m: usize, p: usize, table: &[Vec<DiffScalar>]) -> Result<Self> {
        assert!(m >= 1, "at least one derivation");
        assert_eq!(table.len(), p, "one table row per generator");
        let mut rows: Vec<Vec<RatFn>> = Vec::with_capacity(p);
        for row in table {
            assert_eq!(row.len(), m, "one table column per derivation");
            rows.push(row.iter().map(|s| s.to_ratfn(p)).collect());
        }
        let ctx = DiffFieldCtx(Arc::new(DiffFieldCtxInner {
            kind: CtxKind::RationalFunctions {
                m,
                p,
                table: rows.clone(),
            },
        }));
        // Commutation: [d_i, d_j](u_k) must vanish for all i < j and all k.
        for k in 0..p {
            for i in 1..=m {
                for j in (i + 1)..=m {
                    let dj_uk = &rows[k][j - 1];
                    let di_uk = &rows[k][i - 1];
                    let witness = derive_ratfn(dj_uk, i, &rows).sub(&derive_ratfn(di_uk, j, &rows));
                    if !witness.is_zero() {
                        return Err(DiffError::NonCommutingDerivations {
                            i,
                            j,
                            k: k + 1,
                            witness: DiffScalar {
                                ctx: ctx.clone(),
                                repr: Repr::RatFn(witness),
                            }
                            .to_string(),
                        });
                    }
                }
            }
        }
        Ok(ctx)
    }

    /// One more Laurent-tower level over `base`: fractions of power series in
    /// `m` fresh variables, exact through total degree `trunc`.  Derivation
    /// `d_i` acts coefficientwise on the base plus as `d/dt_i` on the level
    /// variables.  Variables are named `t1, t2, ..` numbered across levels.
    pub fn tower(base: &DiffFieldCtx, trunc: usize) -> Self {
        let m = base.m();
        let offset = base.depth() * m;
        let names = (1..=m).map(|k| format!("t{}", offset + k)).collect();
        Self::tower_named(base, names, trunc)
    }

    /// A tower level with caller-chosen variable names (one per derivation).
    pub fn tower_named(base: &DiffFieldCtx, names: Vec<String>, trunc: usize) -> Self {
        assert_eq!(names.len(), base.m(), "one level variable per derivation");
        DiffFieldCtx(Arc::new(DiffFieldCtxInner {
            kind: CtxKind::Tower {
                base: base.clone(),
                names,
                trunc,
            },
        }))
    }

    /// Number of derivations.
    pub fn m(&self) -> usize {
        match &self.0.kind {
            CtxKind::Rationals { m } => *m,
            CtxKind::RationalFunctions { m, .. } => *m,
            CtxKind::Tower { base, .. } => base.m(),
        }
    }

    /// Number of field generators (`p` for rational functions, otherwise 0).
    pub fn num_generators(&self) -> usize {
        match &self.0.kind {
            CtxKind::RationalFunctions { p, .. } => *p,
            _ => 0,
        }
    }

    /// Number of tower levels stacked on an exact base.
    pub fn depth(&self) -> usize {
        match &self.0.kind {
            CtxKind::Tower { base, .. } => base.depth() + 1,
            _ => 0,
        }
    }

    /// True for kinds with exact zero tests (rationals, rational functions).
    pub fn is_exact(&self) -> bool {
        !matches!(self.0.kind, CtxKind::Tower { .. })
    }

    /// The base context of a tower level.
    pub fn tower_base(&self) -> Option<&DiffFieldCtx> {
        match &self.0.kind {
            CtxKind::Tower { base, .. } => Some(base),
            _ => None,
        }
    }

    /// Truncation order of a tower level.
    pub fn tower_trunc(&self) -> Option<usize> {
        match &self.0.kind {
            CtxKind::Tower { trunc, .. } => Some(*trunc),
            _ => None,
        }
    }

    /// Names of this level's series variables.
    pub fn level_var_names(&self) -> Vec<String> {
        match &self.0.kind {
            CtxKind::Tower { names, .. } => names.clone(),
            _ => Vec::new(),
        }
    }

    /// Re-checks that the derivations pairwise commute, returning the witness
    /// on failure.  Rational-function tables are checked on their generators;
    /// towers are checked on the level variables and recursively on the base.
    pub fn validate_commutation(&self) -> Result<()> {
        match &self.0.kind {
            CtxKind::Rationals { .. } => Ok(()),
            CtxKind::RationalFunctions { m, p, table } => {
                for k in 0..*p {
                    for i in 1..=*m {
                        for j in (i + 1)..=*m {
                            let witness = derive_ratfn(&table[k][j - 1], i, table)
                                .sub(&derive_ratfn(&table[k][i - 1], j, table));
                            if !witness.is_zero() {
                                return Err(DiffError::NonCommutingDerivations {
                                    i,
                                    j,
                                    k: k + 1,
                                    witness: DiffScalar::from_ratfn(self, witness).to_string(),
                                });
                            }
                        }
                    }
                }
                Ok(())
            }
            CtxKind::Tower { base, .. } => {
                let m = self.m();
                for k in 1..=m {
                    let t = self.level_var(k).expect("level variable exists");
                    for i in 1..=m {
                        for j in (i + 1)..=m {
                            let witness = t.derive(j).derive(i).sub(&t.derive(i).derive(j));
                            if !witness.is_zero() {
                                return Err(DiffError::NonCommutingDerivations {
                                    i,
                                    j,
                                    k,
                                    witness: witness.to_string(),
                                });
                            }
                        }
                    }
                }
                base.validate_commutation()
            }
        }
    }

    fn table(&self) -> Option<&Vec<Vec<RatFn>>> {
        match &self.0.kind {
            CtxKind::RationalFunctions { table, .. } => Some(table),
            _ => None,
        }
    }

    /// The additive identity.
    pub fn zero(&self) -> DiffScalar {
        self.from_rational(BigRational::zero())
    }

    /// The multiplicative identity.
    pub fn one(&self) -> DiffScalar {
        self.from_rational(BigRational::one())
    }

    /// Embeds an integer.
    pub fn from_int(&self, n: i64) -> DiffScalar {
        self.from_rational(BigRational::from(BigInt::from(n)))
    }

    /// Embeds a natural number of any size.
    pub fn from_natural(&self, n: &BigUint) -> DiffScalar {
        self.from_rational(BigRational::from(BigInt::from(n.clone())))
    }

    /// Embeds an exact rational.
    pub fn from_rational(&self, q: BigRational) -> DiffScalar {
        let repr = match &self.0.kind {
            CtxKind::Rationals { .. } => Repr::Rat(q),
            CtxKind::RationalFunctions { p, .. } => Repr::RatFn(RatFn::from_rational(*p, &q)),
            CtxKind::Tower { base, trunc, .. } => {
                let inner = base.from_rational(q);
                Repr::Tower(Box::new(SeriesFrac::from_scalar(base, *trunc, inner)))
            }
        };
        DiffScalar {
            ctx: self.clone(),
            repr,
        }
    }

    /// The field generator `u_j` (1-based); an error for non-function fields.
    pub fn generator(&self, j: usize) -> Result<DiffScalar> {
        match &self.0.kind {
            CtxKind::RationalFunctions { p, .. } if j >= 1 && j <= *p => Ok(DiffScalar {
                ctx: self.clone(),
                repr: Repr::RatFn(RatFn::from_poly(MPoly::var(*p, j))),
            }),
            CtxKind::RationalFunctions { p, .. } => Err(DiffError::ArityError(format!(
                "generator u{j} out of range 1..={p}"
            ))),
            _ => Err(DiffError::ArityError(format!(
                "context has no generator u{j}"
            ))),
        }
    }

    /// This level's series variable `t_k` (`k` 1-based within the level).
    pub fn level_var(&self, k: usize) -> Result<DiffScalar> {
        match &self.0.kind {
            CtxKind::Tower { base, trunc, .. } => {
                let m = self.m();
                if k < 1 || k > m {
                    return Err(DiffError::ArityError(format!(
                        "level variable t index {k} out of 1..={m}"
                    )));
                }
                let num = TruncSeries::monomial(
                    base,
                    *trunc,
                    MultiIndex::unit(m, k),
                    base.one(),
                );
                Ok(DiffScalar {
                    ctx: self.clone(),
                    repr: Repr::Tower(Box::new(SeriesFrac {
                        num,
                        den: TruncSeries::one(base, *trunc),
                    })),
                })
            }
            _ => Err(DiffError::ArityError(
                "context is not a series tower".to_string(),
            )),
        }
    }

    /// The tower variable with flat index `k` (level `(k-1)/m + 1`), embedded
    /// up to this context.
    pub fn t_var(&self, k: usize) -> Result<DiffScalar> {
        let m = self.m();
        let depth = self.depth();
        if depth == 0 {
            return Err(DiffError::ArityError(format!(
                "context has no series variable t{k}"
            )));
        }
        let level = (k - 1) / m + 1;
        if k < 1 || level > depth {
            return Err(DiffError::ArityError(format!(
                "series variable t{k} exceeds tower depth {depth}"
            )));
        }
        if level == depth {
            self.level_var((k - 1) % m + 1)
        } else {
            let base = self.tower_base().expect("depth > 0");
            let inner = base.t_var(k)?;
            self.embed(&inner)
        }
    }

    /// Embeds a scalar from this context's base chain (or the rationals) into
    /// this context.
    pub fn embed(&self, s: &DiffScalar) -> Result<DiffScalar> {
        if s.ctx == *self {
            return Ok(s.clone());
        }
        match &self.0.kind {
            CtxKind::Tower { base, trunc, .. } => {
                let inner = base.embed(s)?;
                Ok(DiffScalar {
                    ctx: self.clone(),
                    repr: Repr::Tower(Box::new(SeriesFrac::from_scalar(base, *trunc, inner))),
                })
            }
            CtxKind::RationalFunctions { .. } | CtxKind::Rationals { .. } => {
                if let Some(q) = s.as_rational() {
                    Ok(self.from_rational(q))
                } else {
                    Err(DiffError::ArityError(format!(
                        "cannot embed {s} into this context"
                    )))
                }
            }
        }
    }
}

impl fmt::Display for DiffFieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0.kind {
            CtxKind::Rationals { m } => write!(f, "Q with {m} derivations"),
            CtxKind::RationalFunctions { m, p, .. } => {
                write!(f, "Q(u1..u{p}) with {m} derivations")
            }
            CtxKind::Tower { base, trunc, .. } => {
                write!(f, "series tower (trunc {trunc}) over {base}")
            }
        }
    }
}

/// Reduced fraction of integer polynomials: canonical representation of an
/// element of `Q(u1..up)`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct RatFn {
    num: MPoly,
    den: MPoly,
}

impl RatFn {
    pub fn from_poly(num: MPoly) -> RatFn {
        let den = MPoly::one(num.nvars());
        RatFn { num, den }
    }

    pub fn from_rational(p: usize, q: &BigRational) -> RatFn {
        RatFn {
            num: MPoly::constant(p, q.numer().clone()),
            den: MPoly::constant(p, q.denom().clone()),
        }
    }

    /// Builds `num/den` in lowest terms with a positive-leading denominator.
    pub fn new(num: MPoly, den: MPoly) -> Result<RatFn> {
        if den.is_zero() {
            return Err(DiffError::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(RatFn {
                den: MPoly::one(num.nvars()),
                num,
            });
        }
        let g = mpoly::gcd(&num, &den);
        let mut num = num.exact_div(&g).expect("gcd divides");
        let mut den = den.exact_div(&g).expect("gcd divides");
        if den
            .leading_term()
            .map(|(_, c)| c.is_negative())
            .unwrap_or(false)
        {
            num = num.neg();
            den = den.neg();
        }
        Ok(RatFn { num, den })
    }

    pub fn nvars(&self) -> usize {
        self.num.nvars()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num == self.den
    }

    pub fn num(&self) -> &MPoly {
        &self.num
    }

    pub fn den(&self) -> &MPoly {
        &self.den
    }

    pub fn add(&self, other: &RatFn) -> RatFn {
        let num = self.num.mul(&other.den).add(&other.num.mul(&self.den));
        let den = self.den.mul(&other.den);
        RatFn::new(num, den).expect("denominator product is nonzero")
    }

    pub fn neg(&self) -> RatFn {
        RatFn {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, other: &RatFn) -> RatFn {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &RatFn) -> RatFn {
        RatFn::new(self.num.mul(&other.num), self.den.mul(&other.den))
            .expect("denominator product is nonzero")
    }

    pub fn div(&self, other: &RatFn) -> Result<RatFn> {
        if other.is_zero() {
            return Err(DiffError::DivisionByZero);
        }
        RatFn::new(self.num.mul(&other.den), self.den.mul(&other.num))
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        match (self.num.as_constant(), self.den.as_constant()) {
            (Some(n), Some(d)) => Some(BigRational::new(n, d)),
            _ => None,
        }
    }

    fn display_negative(&self) -> bool {
        self.num
            .leading_term()
            .map(|(_, c)| c.is_negative())
            .unwrap_or(false)
    }
}

impl fmt::Display for RatFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.as_constant().map(|c| c.is_one()).unwrap_or(false) {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

/// Derivation of a polynomial by the chain rule through the table.
fn derive_poly(p: &MPoly, i: usize, table: &[Vec<RatFn>]) -> RatFn {
    let nvars = p.nvars();
    let mut acc = RatFn::from_poly(MPoly::zero(nvars));
    for (j, row) in table.iter().enumerate() {
        let partial = p.derivative(j + 1);
        if partial.is_zero() {
            continue;
        }
        acc = acc.add(&RatFn::from_poly(partial).mul(&row[i - 1]));
    }
    acc
}

/// Quotient rule for reduced fractions.
pub(crate) fn derive_ratfn(f: &RatFn, i: usize, table: &[Vec<RatFn>]) -> RatFn {
    let dn = derive_poly(&f.num, i, table);
    let dd = derive_poly(&f.den, i, table);
    let den = RatFn::from_poly(f.den.clone());
    let num = RatFn::from_poly(f.num.clone());
    // (n/d)' = (n' d - n d') / d^2
    dn.mul(&den)
        .sub(&num.mul(&dd))
        .div(&den.mul(&den))
        .expect("denominator square is nonzero")
}

/// Fraction of truncated series: one tower-level element.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct SeriesFrac {
    pub num: TruncSeries,
    pub den: TruncSeries,
}

impl SeriesFrac {
    fn from_scalar(base: &DiffFieldCtx, trunc: usize, value: DiffScalar) -> SeriesFrac {
        SeriesFrac {
            num: TruncSeries::constant(base, trunc, value),
            den: TruncSeries::one(base, trunc),
        }
    }

    fn add(&self, other: &SeriesFrac) -> SeriesFrac {
        if self.den == other.den {
            return SeriesFrac {
                num: self.num.add(&other.num),
                den: self.den.clone(),
            };
        }
        SeriesFrac {
            num: self.num.mul(&other.den).add(&other.num.mul(&self.den)),
            den: self.den.mul(&other.den),
        }
    }

    fn neg(&self) -> SeriesFrac {
        SeriesFrac {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    fn mul(&self, other: &SeriesFrac) -> SeriesFrac {
        SeriesFrac {
            num: self.num.mul(&other.num),
            den: self.den.mul(&other.den),
        }
    }

    /// `d_i` on the level: coefficientwise plus `d/dt_i`, by the quotient rule.
    fn derive(&self, i: usize) -> SeriesFrac {
        let dn = self.num.combined_delta(i);
        let dd = self.den.combined_delta(i);
        SeriesFrac {
            num: dn.mul(&self.den).sub(&self.num.mul(&dd)),
            den: self.den.mul(&self.den),
        }
    }

    fn is_zero_to_prec(&self) -> bool {
        self.num.is_zero_to_prec()
    }

    /// Difference `self - other`, cross-multiplied, is zero to precision.
    fn eq_to_prec(&self, other: &SeriesFrac) -> bool {
        self.num
            .mul(&other.den)
            .sub(&other.num.mul(&self.den))
            .is_zero_to_prec()
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Rat(BigRational),
    RatFn(RatFn),
    Tower(Box<SeriesFrac>),
}

/// One element of a differential coefficient field.
#[derive(Debug, Clone)]
pub struct DiffScalar {
    ctx: DiffFieldCtx,
    repr: Repr,
}

impl DiffScalar {
    pub(crate) fn from_ratfn(ctx: &DiffFieldCtx, f: RatFn) -> DiffScalar {
        assert_eq!(ctx.num_generators(), f.nvars());
        DiffScalar {
            ctx: ctx.clone(),
            repr: Repr::RatFn(f),
        }
    }

    /// The owning context.
    pub fn ctx(&self) -> &DiffFieldCtx {
        &self.ctx
    }

    /// Rebinds rational-function payloads for table construction.
    fn to_ratfn(&self, p: usize) -> RatFn {
        match &self.repr {
            Repr::Rat(q) => RatFn::from_rational(p, q),
            Repr::RatFn(f) => {
                assert_eq!(f.nvars(), p, "table entry generator count mismatch");
                f.clone()
            }
            Repr::Tower(_) => panic!("series scalars cannot appear in derivation tables"),
        }
    }

    fn same_ctx(&self, other: &DiffScalar) {
        assert!(
            self.ctx == other.ctx,
            "scalar context mismatch: {} vs {}",
            self.ctx,
            other.ctx
        );
    }

    /// True when the element is zero; for series fractions this means zero to
    /// the available precision (see [`DiffScalar::zero_is_exact`]).
    pub fn is_zero(&self) -> bool {
        match &self.repr {
            Repr::Rat(q) => q.is_zero(),
            Repr::RatFn(f) => f.is_zero(),
            Repr::Tower(f) => f.is_zero_to_prec(),
        }
    }

    /// True when `is_zero` answers exactly rather than to precision.
    pub fn zero_is_exact(&self) -> bool {
        self.ctx.is_exact()
    }

    pub fn is_one(&self) -> bool {
        match &self.repr {
            Repr::Rat(q) => q.is_one(),
            Repr::RatFn(f) => f.is_one(),
            Repr::Tower(f) => f.eq_to_prec(&SeriesFrac::from_scalar(
                self.ctx.tower_base().expect("tower"),
                self.ctx.tower_trunc().expect("tower"),
                self.ctx.tower_base().expect("tower").one(),
            )),
        }
    }

    /// Three-valued comparison; exact kinds never answer `EqualToPrecision`.
    pub fn compare(&self, other: &DiffScalar) -> Comparison {
        self.same_ctx(other);
        match (&self.repr, &other.repr) {
            (Repr::Rat(a), Repr::Rat(b)) => {
                if a == b {
                    Comparison::Equal
                } else {
                    Comparison::Unequal
                }
            }
            (Repr::RatFn(a), Repr::RatFn(b)) => {
                if a == b {
                    Comparison::Equal
                } else {
                    Comparison::Unequal
                }
            }
            (Repr::Tower(a), Repr::Tower(b)) => {
                if a.eq_to_prec(b) {
                    Comparison::EqualToPrecision
                } else {
                    Comparison::Unequal
                }
            }
            _ => unreachable!("same context implies same representation kind"),
        }
    }

    pub fn add(&self, other: &DiffScalar) -> DiffScalar {
        self.same_ctx(other);
        let repr = match (&self.repr, &other.repr) {
            (Repr::Rat(a), Repr::Rat(b)) => Repr::Rat(a + b),
            (Repr::RatFn(a), Repr::RatFn(b)) => Repr::RatFn(a.add(b)),
            (Repr::Tower(a), Repr::Tower(b)) => Repr::Tower(Box::new(a.add(b))),
            _ => unreachable!("same context implies same representation kind"),
        };
        DiffScalar {
            ctx: self.ctx.clone(),
            repr,
        }
    }

    pub fn neg(&self) -> DiffScalar {
        let repr = match &self.repr {
            Repr::Rat(a) => Repr::Rat(-a),
            Repr::RatFn(a) => Repr::RatFn(a.neg()),
            Repr::Tower(a) => Repr::Tower(Box::new(a.neg())),
        };
        DiffScalar {
            ctx: self.ctx.clone(),
            repr,
        }
    }

    pub fn sub(&self, other: &DiffScalar) -> DiffScalar {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &DiffScalar) -> DiffScalar {
        self.same_ctx(other);
        let repr = match (&self.repr, &other.repr) {
            (Repr::Rat(a), Repr::Rat(b)) => Repr::Rat(a * b),
            (Repr::RatFn(a), Repr::RatFn(b)) => Repr::RatFn(a.mul(b)),
            (Repr::Tower(a), Repr::Tower(b)) => Repr::Tower(Box::new(a.mul(b))),
            _ => unreachable!("same context implies same representation kind"),
        };
        DiffScalar {
            ctx: self.ctx.clone(),
            repr,
        }
    }

    /// Exact division.  Exact kinds reject a zero divisor; series fractions
    /// additionally reject divisors whose known part is all zero, since no
    /// digit of the quotient would be trustworthy.
    pub fn div(&self, other: &DiffScalar) -> Result<DiffScalar> {
        self.same_ctx(other);
        let repr = match (&self.repr, &other.repr) {
            (Repr::Rat(a), Repr::Rat(b)) => {
                if b.is_zero() {
                    return Err(DiffError::DivisionByZero);
                }
                Repr::Rat(a / b)
            }
            (Repr::RatFn(a), Repr::RatFn(b)) => Repr::RatFn(a.div(b)?),
            (Repr::Tower(a), Repr::Tower(b)) => {
                if b.num.is_zero_to_prec() {
                    // A known part of all zeros leaves no trustworthy digit in
                    // the quotient, whether or not the divisor is exactly zero.
                    return Err(DiffError::PrecisionLoss(
                        "divisor is zero to available precision".to_string(),
                    ));
                }
                Repr::Tower(Box::new(a.mul(&SeriesFrac {
                    num: b.den.clone(),
                    den: b.num.clone(),
                })))
            }
            _ => unreachable!("same context implies same representation kind"),
        };
        Ok(DiffScalar {
            ctx: self.ctx.clone(),
            repr,
        })
    }

    /// Multiplicative inverse.
    pub fn invert(&self) -> Result<DiffScalar> {
        self.ctx.one().div(self)
    }

    /// Integer power; negative exponents invert first.
    pub fn pow(&self, e: i64) -> Result<DiffScalar> {
        let base = if e < 0 { self.invert()? } else { self.clone() };
        let mut acc = self.ctx.one();
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul(&base);
        }
        Ok(acc)
    }

    /// Applies derivation `d_i` (1-based).
    pub fn derive(&self, i: usize) -> DiffScalar {
        let m = self.ctx.m();
        assert!(i >= 1 && i <= m, "derivation index {i} out of 1..={m}");
        let repr = match &self.repr {
            Repr::Rat(_) => Repr::Rat(BigRational::zero()),
            Repr::RatFn(f) => {
                Repr::RatFn(derive_ratfn(f, i, self.ctx.table().expect("ratfn ctx")))
            }
            Repr::Tower(f) => Repr::Tower(Box::new(f.derive(i))),
        };
        DiffScalar {
            ctx: self.ctx.clone(),
            repr,
        }
    }

    /// Applies the composite derivation `D[theta]`.
    pub fn derive_by(&self, theta: &MultiIndex) -> DiffScalar {
        assert_eq!(theta.width(), self.ctx.m());
        let mut acc = self.clone();
        for i in 1..=theta.width() {
            for _ in 0..theta.get(i) {
                acc = acc.derive(i);
            }
        }
        acc
    }

    /// The exact rational value, when the element is a constant.
    pub fn as_rational(&self) -> Option<BigRational> {
        match &self.repr {
            Repr::Rat(q) => Some(q.clone()),
            Repr::RatFn(f) => f.as_rational(),
            Repr::Tower(_) => None,
        }
    }

    /// Evaluates a rational-function element at generator images living in
    /// `target`; rational constants embed directly.  Fails with
    /// [`DiffError::PoleError`] when the denominator vanishes.
    pub fn eval_generators(
        &self,
        images: &[DiffScalar],
        target: &DiffFieldCtx,
    ) -> Result<DiffScalar> {
        match &self.repr {
            Repr::Rat(q) => Ok(target.from_rational(q.clone())),
            Repr::RatFn(f) => {
                assert_eq!(
                    images.len(),
                    f.nvars(),
                    "one image per generator is required"
                );
                let n = eval_mpoly(f.num(), images, target);
                let d = eval_mpoly(f.den(), images, target);
                if d.is_zero() {
                    return Err(DiffError::PoleError(self.to_string()));
                }
                n.div(&d)
            }
            Repr::Tower(_) => Err(DiffError::ArityError(
                "series-tower scalars cannot be evaluated along a point map".to_string(),
            )),
        }
    }

    /// Sign used only for display purposes (series fractions read as positive).
    pub(crate) fn display_negative(&self) -> bool {
        match &self.repr {
            Repr::Rat(q) => q.is_negative(),
            Repr::RatFn(f) => f.display_negative(),
            Repr::Tower(_) => false,
        }
    }

    /// Printed form wrapped in parentheses whenever the bare form would not
    /// bind as a single factor inside a product.
    pub(crate) fn display_atom(&self) -> String {
        let s = self.to_string();
        if s.contains(" + ") || s.contains(" - ") {
            format!("({s})")
        } else {
            s
        }
    }

}

/// Evaluates an integer polynomial at scalar arguments.
fn eval_mpoly(p: &MPoly, images: &[DiffScalar], target: &DiffFieldCtx) -> DiffScalar {
    let mut acc = target.zero();
    for (mono, coeff) in p.terms() {
        let mut term = target.from_rational(BigRational::from(coeff.clone()));
        for (j, img) in images.iter().enumerate() {
            let e = mono.get(j + 1);
            if e > 0 {
                term = term.mul(&img.pow(e as i64).expect("nonnegative power"));
            }
        }
        acc = acc.add(&term);
    }
    acc
}

/// Structural equality for exact kinds; equality to available precision for
/// series fractions (see [`DiffScalar::compare`] for the three-valued form).
impl PartialEq for DiffScalar {
    fn eq(&self, other: &Self) -> bool {
        self.compare(other).holds()
    }
}

impl fmt::Display for DiffScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Rat(q) => write!(f, "{q}"),
            Repr::RatFn(r) => write!(f, "{r}"),
            Repr::Tower(t) => {
                let names = self.ctx.level_var_names();
                if t.den.is_one() {
                    write!(f, "{}", t.num.display_with_names(&names))
                } else {
                    write!(
                        f,
                        "({})/({})",
                        t.num.display_with_names(&names),
                        t.den.display_with_names(&names)
                    )
                }
            }
        }
    }
}
