//! Multi-index bookkeeping for `m` commuting derivations and `n` unknowns.
//!
//! A [`MultiIndex`] records how often each derivation `d1..dm` is applied; a
//! [`RankedVar`] names the derivative `D[xi](x_i)` of one unknown.  The `Ord`
//! implementations give the canonical orderly ranking used everywhere in the
//! crate: first by total order, then by unknown, then lexicographically by
//! exponent.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use std::cmp::Ordering;
use std::fmt;

/// Exponent vector `(xi_1, .., xi_m)` over the derivation alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    /// The zero index of the given width.
    pub fn zero(m: usize) -> Self {
        MultiIndex(vec![0; m])
    }

    /// The unit index `e_k` (1-based `k`).
    pub fn unit(m: usize, k: usize) -> Self {
        assert!(k >= 1 && k <= m, "derivation index {k} out of 1..={m}");
        let mut v = vec![0; m];
        v[k - 1] = 1;
        MultiIndex(v)
    }

    /// Wraps an explicit exponent vector.
    pub fn new(entries: Vec<u32>) -> Self {
        MultiIndex(entries)
    }

    /// Number of derivations the index ranges over.
    pub fn width(&self) -> usize {
        self.0.len()
    }

    /// Total order `|xi| = xi_1 + .. + xi_m`.
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Entry for derivation `k` (1-based).
    pub fn get(&self, k: usize) -> u32 {
        self.0[k - 1]
    }

    /// The raw exponent slice.
    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    /// True if every entry is zero.
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// Componentwise sum.
    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        assert_eq!(self.width(), other.width(), "multi-index width mismatch");
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Componentwise difference, or `None` when `other` does not divide `self`.
    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        assert_eq!(self.width(), other.width(), "multi-index width mismatch");
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<u32>>>()
            .map(MultiIndex)
    }

    /// Product (componentwise) order: `self <= other` in every coordinate.
    pub fn leq(&self, other: &MultiIndex) -> bool {
        assert_eq!(self.width(), other.width(), "multi-index width mismatch");
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `xi! = xi_1! * .. * xi_m!` as an exact integer.
    pub fn factorial(&self) -> BigUint {
        let mut acc = BigUint::one();
        for &e in &self.0 {
            for k in 2..=u64::from(e) {
                acc *= k;
            }
        }
        acc
    }

    /// Product of componentwise binomials `prod_k C(self_k, beta_k)`.
    ///
    /// Zero when `beta` exceeds `self` in some coordinate, so the value can be
    /// used in binomial-theorem sums without an explicit divisibility guard.
    pub fn binom(&self, beta: &MultiIndex) -> BigUint {
        assert_eq!(self.width(), beta.width(), "multi-index width mismatch");
        if !beta.leq(self) {
            return BigUint::zero();
        }
        let mut acc = BigUint::one();
        for (&a, &b) in self.0.iter().zip(&beta.0) {
            acc *= num_integer::binomial(BigUint::from(a), BigUint::from(b));
        }
        acc
    }

    /// All indices of width `m` with total order exactly `d`, lexicographically
    /// ascending.
    pub fn of_order(m: usize, d: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut cur = vec![0u32; m];
        fill_compositions(&mut cur, 0, d, &mut out);
        out
    }

    /// All indices of width `m` with total order at most `r`, sorted by the
    /// graded order (total order first, then lexicographic).
    pub fn up_to_order(m: usize, r: u32) -> Vec<MultiIndex> {
        (0..=r).flat_map(|d| Self::of_order(m, d)).collect()
    }

    /// Iterates over `beta <= self` in the product order (graded order).
    pub fn divisors(&self) -> Vec<MultiIndex> {
        let mut out = vec![MultiIndex::zero(self.width())];
        for (k, &e) in self.0.iter().enumerate() {
            let mut next = Vec::with_capacity(out.len() * (e as usize + 1));
            for b in &out {
                for v in 0..=e {
                    let mut w = b.0.clone();
                    w[k] = v;
                    next.push(MultiIndex(w));
                }
            }
            out = next;
        }
        out.sort();
        out
    }
}

/// Emits, into `out`, all completions of `cur[..pos]` summing to `rem`.
fn fill_compositions(cur: &mut Vec<u32>, pos: usize, rem: u32, out: &mut Vec<MultiIndex>) {
    if pos + 1 == cur.len() {
        cur[pos] = rem;
        out.push(MultiIndex(cur.clone()));
        return;
    }
    for v in 0..=rem {
        cur[pos] = v;
        fill_compositions(cur, pos + 1, rem - v, out);
    }
    cur[pos] = 0;
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Graded order: total order first, then lexicographic on the entries.
impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        assert_eq!(self.width(), other.width(), "multi-index width mismatch");
        self.order()
            .cmp(&other.order())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, e) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "]")
    }
}

/// The derivative `D[index](x_var)` of unknown `x_var` (1-based `var`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RankedVar {
    pub index: MultiIndex,
    pub var: usize,
}

impl RankedVar {
    /// The underived unknown `x_var`.
    pub fn base(m: usize, var: usize) -> Self {
        RankedVar {
            index: MultiIndex::zero(m),
            var,
        }
    }

    /// Builds `D[index](x_var)`.
    pub fn new(index: MultiIndex, var: usize) -> Self {
        assert!(var >= 1, "unknowns are numbered from 1");
        RankedVar { index, var }
    }

    /// Total order of the derivative.
    pub fn order(&self) -> u32 {
        self.index.order()
    }

    /// Applies derivation `k` (1-based) once.
    pub fn derive(&self, k: usize) -> RankedVar {
        RankedVar {
            index: self.index.add(&MultiIndex::unit(self.index.width(), k)),
            var: self.var,
        }
    }

    /// Applies the composite derivation `D[theta]`.
    pub fn derive_by(&self, theta: &MultiIndex) -> RankedVar {
        RankedVar {
            index: self.index.add(theta),
            var: self.var,
        }
    }

    /// Product order: same unknown and componentwise `<=` on the indices.
    /// `self <= other` means `other` is a (possibly improper) derivative of
    /// `self`.
    pub fn product_leq(&self, other: &RankedVar) -> bool {
        self.var == other.var && self.index.leq(&other.index)
    }

    /// True when `self` is a proper derivative of `other`.
    pub fn is_proper_derivative_of(&self, other: &RankedVar) -> bool {
        other.product_leq(self) && self != other
    }
}

impl PartialOrd for RankedVar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Orderly ranking: compare `(order, unknown, index lexicographically)`.
///
/// This is a total order extending the product order, and it is the canonical
/// coordinate convention: every coordinate tuple in the crate lists ranked
/// variables in this order.
impl Ord for RankedVar {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order()
            .cmp(&other.order())
            .then_with(|| self.var.cmp(&other.var))
            .then_with(|| self.index.entries().cmp(other.index.entries()))
    }
}

impl fmt::Display for RankedVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.index.is_zero() {
            write!(f, "x{}", self.var)
        } else {
            write!(f, "D{}(x{})", self.index, self.var)
        }
    }
}

/// Compares two ranked variables in the orderly ranking.
///
/// Provided as a named function for callers that want the ranking without
/// going through `Ord`; both variables must have the same index width.
pub fn orderly_cmp(a: &RankedVar, b: &RankedVar) -> Ordering {
    assert_eq!(
        a.index.width(),
        b.index.width(),
        "multi-index width mismatch"
    );
    a.cmp(b)
}

/// The frame `Gamma_n(r)`: every derivative of `x_1..x_n` of total order at
/// most `r`, sorted ascending in the orderly ranking.
///
/// Its length is `n * C(r + m, m)`.
pub fn gamma_set(n: usize, r: u32, m: usize) -> Vec<RankedVar> {
    let mut out = Vec::new();
    for d in 0..=r {
        for var in 1..=n {
            for xi in MultiIndex::of_order(m, d) {
                out.push(RankedVar::new(xi, var));
            }
        }
    }
    out
}

/// `n * C(r + m, m)`, the size of `Gamma_n(r)`, as an exact integer.
pub fn gamma_size(n: usize, r: u32, m: usize) -> BigUint {
    BigUint::from(n) * num_integer::binomial(BigUint::from(r as usize + m), BigUint::from(m))
}
