//! Truncated multivariate power series with explicit precision tracking.
//!
//! A [`TruncSeries`] over a coefficient context with `m` derivations lives in
//! `m` series variables.  Three derivation families act on it: the
//! coefficientwise ones `d_i` (precision preserving), the variable ones
//! `d/dt_i` (each application costs one order of precision), and their sums,
//! which is how a series tower level or a Taylor image carries its
//! differential structure.

use crate::error::{DiffError, Result};
use crate::mindex::MultiIndex;
use crate::scalars::{DiffFieldCtx, DiffScalar};
use std::collections::BTreeMap;
use std::fmt;

/// Power series truncated at a total degree, with the effective precision
/// recorded separately (derivatives in the series variables lower it).
///
/// Coefficients of total degree beyond the precision are meaningless and are
/// never stored; a negative precision means no coefficient is known at all.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncSeries {
    ctx: DiffFieldCtx,
    trunc: usize,
    prec: i64,
    coeffs: BTreeMap<MultiIndex, DiffScalar>,
}

impl TruncSeries {
    /// The zero series, exact through total degree `trunc`.
    pub fn zero(ctx: &DiffFieldCtx, trunc: usize) -> Self {
        TruncSeries {
            ctx: ctx.clone(),
            trunc,
            prec: trunc as i64,
            coeffs: BTreeMap::new(),
        }
    }

    /// The constant series `1`.
    pub fn one(ctx: &DiffFieldCtx, trunc: usize) -> Self {
        Self::constant(ctx, trunc, ctx.one())
    }

    /// A constant series.
    pub fn constant(ctx: &DiffFieldCtx, trunc: usize, value: DiffScalar) -> Self {
        Self::monomial(ctx, trunc, MultiIndex::zero(ctx.m()), value)
    }

    /// The single term `value * t^alpha`.
    pub fn monomial(ctx: &DiffFieldCtx, trunc: usize, alpha: MultiIndex, value: DiffScalar) -> Self {
        let mut s = Self::zero(ctx, trunc);
        s.set_coeff(alpha, value);
        s
    }

    /// The series variable `t_k` (1-based).
    pub fn var(ctx: &DiffFieldCtx, trunc: usize, k: usize) -> Self {
        Self::monomial(ctx, trunc, MultiIndex::unit(ctx.m(), k), ctx.one())
    }

    /// Builds a series from explicit coefficients, pruning zeros and anything
    /// beyond the truncation order.
    pub fn from_coeffs(
        ctx: &DiffFieldCtx,
        trunc: usize,
        coeffs: impl IntoIterator<Item = (MultiIndex, DiffScalar)>,
    ) -> Self {
        let mut s = Self::zero(ctx, trunc);
        for (alpha, v) in coeffs {
            s.set_coeff(alpha, v);
        }
        s
    }

    /// Coefficient context.
    pub fn ctx(&self) -> &DiffFieldCtx {
        &self.ctx
    }

    /// Number of series variables (= number of derivations of the context).
    pub fn nvars(&self) -> usize {
        self.ctx.m()
    }

    /// Nominal truncation order.
    pub fn trunc(&self) -> usize {
        self.trunc
    }

    /// Effective precision: coefficients are known through this total degree.
    /// Negative when derivative-taking has exhausted every known order.
    pub fn prec(&self) -> i64 {
        self.prec
    }

    /// Stored (nonzero) coefficients in ascending graded order.
    pub fn coeffs(&self) -> impl Iterator<Item = (&MultiIndex, &DiffScalar)> {
        self.coeffs.iter()
    }

    /// The coefficient of `t^alpha` (zero when absent).
    pub fn coeff(&self, alpha: &MultiIndex) -> DiffScalar {
        self.coeffs
            .get(alpha)
            .cloned()
            .unwrap_or_else(|| self.ctx.zero())
    }

    fn set_coeff(&mut self, alpha: MultiIndex, value: DiffScalar) {
        assert_eq!(alpha.width(), self.ctx.m(), "series variable count mismatch");
        if i64::from(alpha.order()) > self.prec || value.is_zero() {
            return;
        }
        self.coeffs.insert(alpha, value);
    }

    fn add_to_coeff(&mut self, alpha: MultiIndex, value: &DiffScalar) {
        if i64::from(alpha.order()) > self.prec || value.is_zero() {
            return;
        }
        let cur = self.coeff(&alpha);
        let next = cur.add(value);
        if next.is_zero() {
            self.coeffs.remove(&alpha);
        } else {
            self.coeffs.insert(alpha, next);
        }
    }

    /// Caps the claimed precision, discarding coefficients beyond it.
    pub fn with_prec(&self, prec: i64) -> TruncSeries {
        let mut out = self.clone();
        out.prec = prec;
        out.coeffs.retain(|a, _| i64::from(a.order()) <= prec);
        out
    }

    /// True when every known coefficient vanishes.
    pub fn is_zero_to_prec(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// True when the known part is exactly the constant 1.
    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1
            && self
                .coeffs
                .iter()
                .all(|(a, c)| a.is_zero() && c.is_one())
    }

    fn same_ctx(&self, other: &TruncSeries) {
        assert!(self.ctx == other.ctx, "series context mismatch");
    }

    pub fn add(&self, other: &TruncSeries) -> TruncSeries {
        self.same_ctx(other);
        let mut out = TruncSeries {
            ctx: self.ctx.clone(),
            trunc: self.trunc.min(other.trunc),
            prec: self.prec.min(other.prec),
            coeffs: BTreeMap::new(),
        };
        for (a, c) in &self.coeffs {
            out.add_to_coeff(a.clone(), c);
        }
        for (a, c) in &other.coeffs {
            out.add_to_coeff(a.clone(), c);
        }
        out
    }

    pub fn neg(&self) -> TruncSeries {
        TruncSeries {
            ctx: self.ctx.clone(),
            trunc: self.trunc,
            prec: self.prec,
            coeffs: self
                .coeffs
                .iter()
                .map(|(a, c)| (a.clone(), c.neg()))
                .collect(),
        }
    }

    pub fn sub(&self, other: &TruncSeries) -> TruncSeries {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &TruncSeries) -> TruncSeries {
        self.same_ctx(other);
        let mut out = TruncSeries {
            ctx: self.ctx.clone(),
            trunc: self.trunc.min(other.trunc),
            prec: self.prec.min(other.prec),
            coeffs: BTreeMap::new(),
        };
        for (a, ca) in &self.coeffs {
            if i64::from(a.order()) > out.prec {
                continue;
            }
            for (b, cb) in &other.coeffs {
                if i64::from(a.order() + b.order()) > out.prec {
                    continue;
                }
                out.add_to_coeff(a.add(b), &ca.mul(cb));
            }
        }
        out
    }

    pub fn scale(&self, c: &DiffScalar) -> TruncSeries {
        let mut out = TruncSeries {
            ctx: self.ctx.clone(),
            trunc: self.trunc,
            prec: self.prec,
            coeffs: BTreeMap::new(),
        };
        for (a, v) in &self.coeffs {
            out.set_coeff(a.clone(), v.mul(c));
        }
        out
    }

    pub fn pow(&self, e: u32) -> TruncSeries {
        let mut acc = TruncSeries::one(&self.ctx, self.trunc).with_prec(self.prec);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Derivative in the series variable `t_i`; costs one order of precision.
    pub fn ddt(&self, i: usize) -> TruncSeries {
        let m = self.ctx.m();
        assert!(i >= 1 && i <= m, "series variable index {i} out of 1..={m}");
        let mut out = TruncSeries {
            ctx: self.ctx.clone(),
            trunc: self.trunc,
            prec: self.prec - 1,
            coeffs: BTreeMap::new(),
        };
        let unit = MultiIndex::unit(m, i);
        for (a, c) in &self.coeffs {
            if let Some(lowered) = a.checked_sub(&unit) {
                let factor = self.ctx.from_int(i64::from(a.get(i)));
                out.set_coeff(lowered, c.mul(&factor));
            }
        }
        out
    }

    /// Coefficientwise derivation `d_i`; precision preserving.
    pub fn coeff_delta(&self, i: usize) -> TruncSeries {
        let mut out = TruncSeries {
            ctx: self.ctx.clone(),
            trunc: self.trunc,
            prec: self.prec,
            coeffs: BTreeMap::new(),
        };
        for (a, c) in &self.coeffs {
            out.set_coeff(a.clone(), c.derive(i));
        }
        out
    }

    /// The combined action `d_i + d/dt_i` that makes the series ring a
    /// differential extension of the coefficient field.
    pub fn combined_delta(&self, i: usize) -> TruncSeries {
        self.coeff_delta(i).with_prec(self.prec - 1).add(&self.ddt(i))
    }

    /// Evaluation at `t = 0`.
    pub fn ev0(&self) -> DiffScalar {
        self.coeff(&MultiIndex::zero(self.ctx.m()))
    }

    /// Multiplicative inverse, defined when the constant term is a unit;
    /// computed order by order to the same precision.
    pub fn invert(&self) -> Result<TruncSeries> {
        let c0 = self.ev0();
        if c0.is_zero() {
            return Err(DiffError::NotAUnit(c0.to_string()));
        }
        let c0_inv = c0.invert()?;
        let mut out = TruncSeries::zero(&self.ctx, self.trunc).with_prec(self.prec);
        if out.prec < 0 {
            return Ok(out);
        }
        out.set_coeff(MultiIndex::zero(self.ctx.m()), c0_inv.clone());
        for d in 1..=(out.prec as u32) {
            for alpha in MultiIndex::of_order(self.ctx.m(), d) {
                // c0 * g_alpha = - sum over 0 < beta <= alpha of f_beta * g_(alpha-beta)
                let mut acc = self.ctx.zero();
                for beta in alpha.divisors() {
                    if beta.is_zero() {
                        continue;
                    }
                    let f_beta = self.coeff(&beta);
                    if f_beta.is_zero() {
                        continue;
                    }
                    let g_rest = out.coeff(&alpha.checked_sub(&beta).expect("beta <= alpha"));
                    acc = acc.add(&f_beta.mul(&g_rest));
                }
                let value = acc.neg().mul(&c0_inv);
                out.set_coeff(alpha, value);
            }
        }
        Ok(out)
    }

    /// Equality of every coefficient through the shared precision.
    pub fn eq_to_prec(&self, other: &TruncSeries) -> bool {
        self.same_ctx(other);
        self.sub(other).is_zero_to_prec()
    }

    /// Canonical rendering with explicit coefficients, terms in ascending
    /// graded order: `1 + 1*t1 + 1/2*t1^2`.
    pub fn display_with_names(&self, names: &[String]) -> String {
        assert_eq!(names.len(), self.ctx.m());
        if self.coeffs.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (k, (alpha, c)) in self.coeffs.iter().enumerate() {
            let neg = c.display_negative();
            let mag = if neg { c.neg() } else { c.clone() };
            if k == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            if alpha.is_zero() {
                out.push_str(&mag.display_atom());
            } else {
                let mut factors = vec![mag.display_atom()];
                for (idx, name) in names.iter().enumerate() {
                    let e = alpha.get(idx + 1);
                    if e == 1 {
                        factors.push(name.clone());
                    } else if e > 1 {
                        factors.push(format!("{name}^{e}"));
                    }
                }
                out.push_str(&factors.join("*"));
            }
        }
        out
    }
}

impl fmt::Display for TruncSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (1..=self.ctx.m()).map(|k| format!("t{k}")).collect();
        write!(f, "{}", self.display_with_names(&names))
    }
}
