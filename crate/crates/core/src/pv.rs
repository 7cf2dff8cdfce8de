//! Linear systems `d_i Z = A_i Z`: the pairwise integrability condition and
//! truncated fundamental solutions with `Z(0) = I`, living in the series
//! extension where each `d_i` is joined with `d/dt_i`.

use crate::error::{DiffError, Result};
use crate::mindex::MultiIndex;
use crate::scalars::{DiffFieldCtx, DiffScalar};
use crate::series::TruncSeries;
use std::collections::BTreeMap;
use std::fmt;

/// A square matrix of exact scalars over a differential field context.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixK {
    ctx: DiffFieldCtx,
    entries: Vec<Vec<DiffScalar>>,
}

impl MatrixK {
    pub fn new(ctx: &DiffFieldCtx, entries: Vec<Vec<DiffScalar>>) -> MatrixK {
        assert!(!entries.is_empty(), "matrix must have at least one row");
        let n = entries.len();
        for row in &entries {
            assert_eq!(row.len(), n, "matrix must be square");
            for e in row {
                assert!(e.ctx() == ctx, "entry context mismatch");
            }
        }
        MatrixK {
            ctx: ctx.clone(),
            entries,
        }
    }

    pub fn identity(ctx: &DiffFieldCtx, n: usize) -> MatrixK {
        MatrixK::new(
            ctx,
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| if i == j { ctx.one() } else { ctx.zero() })
                        .collect()
                })
                .collect(),
        )
    }

    pub fn zero(ctx: &DiffFieldCtx, n: usize) -> MatrixK {
        MatrixK::new(ctx, vec![vec![ctx.zero(); n]; n])
    }

    pub fn n(&self) -> usize {
        self.entries.len()
    }

    pub fn ctx(&self) -> &DiffFieldCtx {
        &self.ctx
    }

    /// Zero-based entry access.
    pub fn entry(&self, i: usize, j: usize) -> &DiffScalar {
        &self.entries[i][j]
    }

    pub fn add(&self, other: &MatrixK) -> MatrixK {
        self.zip(other, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &MatrixK) -> MatrixK {
        self.zip(other, |a, b| a.sub(b))
    }

    fn zip(&self, other: &MatrixK, f: impl Fn(&DiffScalar, &DiffScalar) -> DiffScalar) -> MatrixK {
        assert_eq!(self.n(), other.n(), "matrix size mismatch");
        MatrixK {
            ctx: self.ctx.clone(),
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(r, s)| r.iter().zip(s).map(|(a, b)| f(a, b)).collect())
                .collect(),
        }
    }

    pub fn mul(&self, other: &MatrixK) -> MatrixK {
        assert_eq!(self.n(), other.n(), "matrix size mismatch");
        let n = self.n();
        let entries = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let mut acc = self.ctx.zero();
                        for k in 0..n {
                            acc = acc.add(&self.entries[i][k].mul(&other.entries[k][j]));
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        MatrixK {
            ctx: self.ctx.clone(),
            entries,
        }
    }

    pub fn scale(&self, c: &DiffScalar) -> MatrixK {
        MatrixK {
            ctx: self.ctx.clone(),
            entries: self
                .entries
                .iter()
                .map(|r| r.iter().map(|a| a.mul(c)).collect())
                .collect(),
        }
    }

    /// Entrywise application of the `i`-th derivation (1-based).
    pub fn derive(&self, i: usize) -> MatrixK {
        MatrixK {
            ctx: self.ctx.clone(),
            entries: self
                .entries
                .iter()
                .map(|r| r.iter().map(|a| a.derive(i)).collect())
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().flatten().all(|e| e.is_zero())
    }
}

impl fmt::Display for MatrixK {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, row) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for (j, e) in row.iter().enumerate() {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{e}")?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

fn validate_family(a: &[MatrixK]) -> (DiffFieldCtx, usize) {
    assert!(!a.is_empty(), "at least one coefficient matrix");
    let ctx = a[0].ctx().clone();
    assert_eq!(a.len(), ctx.m(), "one coefficient matrix per derivation");
    let n = a[0].n();
    for mat in a {
        assert!(mat.ctx() == &ctx, "matrix context mismatch");
        assert_eq!(mat.n(), n, "matrix size mismatch");
    }
    (ctx, n)
}

/// Checks the mixed-partials condition `d_i A_j - d_j A_i = [A_i, A_j]` for
/// every pair; the first nonzero residual is reported.
pub fn integrability_check(a: &[MatrixK]) -> Result<()> {
    validate_family(a);
    let m = a.len();
    for i in 1..=m {
        for j in (i + 1)..=m {
            let ai = &a[i - 1];
            let aj = &a[j - 1];
            let commutator = ai.mul(aj).sub(&aj.mul(ai));
            let residual = aj.derive(i).sub(&ai.derive(j)).sub(&commutator);
            if !residual.is_zero() {
                return Err(DiffError::Violation {
                    i,
                    j,
                    residual: residual.to_string(),
                });
            }
        }
    }
    Ok(())
}

/// The truncated fundamental solution of `d_i Z = A_i Z` with `Z(0) = I`,
/// under the joined derivations `d_i + d/dt_i`: coefficients follow
/// `Z_(u+e_i) = ((A_i Z)_u - d_i(Z_u)) / (u_i + 1)`, every coefficient
/// reachable along several directions is recomputed along each and compared.
pub fn pv_fundamental_solution(a: &[MatrixK], prec: u32) -> Result<Vec<Vec<TruncSeries>>> {
    let (ctx, n) = validate_family(a);
    let m = ctx.m();
    let mut coeffs: BTreeMap<MultiIndex, MatrixK> = BTreeMap::new();
    coeffs.insert(MultiIndex::zero(m), MatrixK::identity(&ctx, n));

    for alpha in MultiIndex::up_to_order(m, prec) {
        if alpha.is_zero() {
            continue;
        }
        let mut settled: Option<MatrixK> = None;
        for i in 1..=m {
            let Some(prev_idx) = alpha.checked_sub(&MultiIndex::unit(m, i)) else {
                continue;
            };
            let prev = &coeffs[&prev_idx];
            let step = ctx.from_int(i64::from(alpha.get(i)));
            let candidate = a[i - 1]
                .mul(prev)
                .sub(&prev.derive(i))
                .scale(&step.invert().expect("positive step"));
            match &settled {
                None => settled = Some(candidate),
                Some(first) => {
                    if first != &candidate {
                        return Err(DiffError::IntegrabilityError {
                            alpha,
                            left: first.to_string(),
                            right: candidate.to_string(),
                        });
                    }
                }
            }
        }
        coeffs.insert(alpha, settled.expect("every nonzero index has a predecessor"));
    }

    let trunc = prec as usize;
    Ok((0..n)
        .map(|r| {
            (0..n)
                .map(|c| {
                    TruncSeries::from_coeffs(
                        &ctx,
                        trunc,
                        coeffs.iter().map(|(al, z)| (al.clone(), z.entry(r, c).clone())),
                    )
                })
                .collect()
        })
        .collect())
}
