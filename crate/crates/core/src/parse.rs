//! Recursive-descent parsing of the printed expression syntax: unknowns
//! `x<i>`, generators `u<j>`, derivations `d<k>(expr)` and
//! `D[e1,..,em](x<i>)`, integer and rational constants, and the operators
//! `+ - * / ^ ( )`.  Division demands a scalar-valued divisor, so parsed
//! polynomials always live in the polynomial ring itself.

use crate::diffpoly::DiffPoly;
use crate::error::{DiffError, Result};
use crate::mindex::{MultiIndex, RankedVar};
use crate::scalars::{DiffFieldCtx, DiffScalar};
use num_bigint::BigInt;
use num_rational::BigRational;
use std::collections::BTreeMap;

/// Parses a differential polynomial in unknowns `x1..xn`.
pub fn parse_diffpoly(ctx: &DiffFieldCtx, n: usize, text: &str) -> Result<DiffPoly> {
    let mut p = Parser {
        ctx,
        n,
        bytes: text.as_bytes(),
        pos: 0,
    };
    let out = p.parse_sum()?;
    p.skip_ws();
    if p.pos < p.bytes.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(out)
}

/// Parses a scalar: an expression that mentions no unknowns.
pub fn parse_scalar(ctx: &DiffFieldCtx, text: &str) -> Result<DiffScalar> {
    let poly = parse_diffpoly(ctx, 0, text)?;
    as_scalar(&poly).ok_or(DiffError::SyntaxError {
        pos: 1,
        msg: "expected a scalar expression".to_string(),
    })
}

fn as_scalar(p: &DiffPoly) -> Option<DiffScalar> {
    if p.is_constant() {
        p.eval_vars(&BTreeMap::new()).ok()
    } else {
        None
    }
}

struct Parser<'a> {
    ctx: &'a DiffFieldCtx,
    n: usize,
    bytes: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> DiffError {
        DiffError::SyntaxError {
            pos: self.pos + 1,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.bytes.get(self.pos).is_some_and(|b| b.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, b: u8) -> Result<()> {
        if self.eat(b) {
            Ok(())
        } else {
            Err(self.err(&format!("expected '{}'", b as char)))
        }
    }

    fn digits(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected a number"));
        }
        Ok(std::str::from_utf8(&self.bytes[start..self.pos])
            .expect("digits are ascii")
            .to_string())
    }

    fn small_nat(&mut self, what: &str) -> Result<u32> {
        let at = self.pos;
        let text = self.digits()?;
        text.parse().map_err(|_| DiffError::SyntaxError {
            pos: at + 1,
            msg: format!("{what} is too large"),
        })
    }

    fn parse_sum(&mut self) -> Result<DiffPoly> {
        let mut acc = self.parse_product()?;
        loop {
            if self.eat(b'+') {
                acc = acc.add(&self.parse_product()?);
            } else if self.eat(b'-') {
                acc = acc.sub(&self.parse_product()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn parse_product(&mut self) -> Result<DiffPoly> {
        let mut acc = self.parse_unary()?;
        loop {
            if self.eat(b'*') {
                acc = acc.mul(&self.parse_unary()?);
            } else if self.eat(b'/') {
                let at = self.pos;
                let divisor = self.parse_unary()?;
                let Some(c) = as_scalar(&divisor) else {
                    return Err(DiffError::SyntaxError {
                        pos: at + 1,
                        msg: "division requires a scalar divisor".to_string(),
                    });
                };
                acc = acc.scale(&c.invert()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn parse_unary(&mut self) -> Result<DiffPoly> {
        if self.eat(b'-') {
            Ok(self.parse_unary()?.neg())
        } else {
            self.parse_power()
        }
    }

    fn parse_power(&mut self) -> Result<DiffPoly> {
        let base = self.parse_atom()?;
        if self.eat(b'^') {
            let e = self.small_nat("exponent")?;
            Ok(base.pow(e))
        } else {
            Ok(base)
        }
    }

    fn unknown(&mut self) -> Result<usize> {
        let at = self.pos;
        let i = self.small_nat("unknown index")? as usize;
        if i == 0 {
            return Err(DiffError::SyntaxError {
                pos: at + 1,
                msg: "unknown indices start at 1".to_string(),
            });
        }
        if i > self.n {
            return Err(DiffError::ArityError(format!(
                "unknown x{i} exceeds the declared count {}",
                self.n
            )));
        }
        Ok(i)
    }

    fn parse_atom(&mut self) -> Result<DiffPoly> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.parse_sum()?;
                self.expect(b')')?;
                Ok(inner)
            }
            Some(b'x') => {
                self.pos += 1;
                let i = self.unknown()?;
                let v = RankedVar::new(MultiIndex::zero(self.ctx.m()), i);
                Ok(DiffPoly::var(self.ctx, self.n, v))
            }
            Some(b'u') => {
                self.pos += 1;
                let j = self.small_nat("generator index")? as usize;
                let g = self.ctx.generator(j)?;
                Ok(DiffPoly::constant(self.ctx, self.n, g))
            }
            Some(b'd') => {
                self.pos += 1;
                let at = self.pos;
                let k = self.small_nat("derivation index")? as usize;
                if k == 0 || k > self.ctx.m() {
                    return Err(DiffError::ArityError(format!(
                        "derivation d{k} outside 1..={}",
                        self.ctx.m()
                    )));
                }
                let _ = at;
                self.expect(b'(')?;
                let inner = self.parse_sum()?;
                self.expect(b')')?;
                Ok(inner.delta_apply(k))
            }
            Some(b'D') => {
                self.pos += 1;
                self.expect(b'[')?;
                let mut entries = vec![self.small_nat("derivative order")?];
                while self.eat(b',') {
                    entries.push(self.small_nat("derivative order")?);
                }
                self.expect(b']')?;
                if entries.len() != self.ctx.m() {
                    return Err(DiffError::ArityError(format!(
                        "multi-index has {} entries for {} derivations",
                        entries.len(),
                        self.ctx.m()
                    )));
                }
                self.expect(b'(')?;
                self.skip_ws();
                self.expect(b'x')?;
                let i = self.unknown()?;
                self.expect(b')')?;
                let v = RankedVar::new(MultiIndex::new(entries), i);
                Ok(DiffPoly::var(self.ctx, self.n, v))
            }
            Some(b) if b.is_ascii_digit() => {
                let text = self.digits()?;
                let value = text.parse::<BigInt>().expect("digits parse");
                Ok(DiffPoly::constant(
                    self.ctx,
                    self.n,
                    self.ctx.from_rational(BigRational::from(value)),
                ))
            }
            Some(b) => Err(self.err(&format!("unexpected character '{}'", b as char))),
            None => Err(self.err("unexpected end of input")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q1() -> DiffFieldCtx {
        DiffFieldCtx::rationals(1)
    }

    fn x(ctx: &DiffFieldCtx, n: usize, entries: Vec<u32>, i: usize) -> DiffPoly {
        DiffPoly::var(ctx, n, RankedVar::new(MultiIndex::new(entries), i))
    }

    #[test]
    fn first_order_equation() {
        let ctx = q1();
        let got = parse_diffpoly(&ctx, 1, "d1(x1) - x1").unwrap();
        let want = x(&ctx, 1, vec![1], 1).sub(&x(&ctx, 1, vec![0], 1));
        assert_eq!(got, want);
        assert_eq!(got.to_string(), "D[1](x1) - x1");
    }

    #[test]
    fn derivation_applies_leibniz() {
        let ctx = q1();
        let got = parse_diffpoly(&ctx, 1, "d1(x1^2)").unwrap();
        let want = x(&ctx, 1, vec![0], 1)
            .mul(&x(&ctx, 1, vec![1], 1))
            .scale(&ctx.from_int(2));
        assert_eq!(got, want);
    }

    #[test]
    fn multi_index_form_with_coefficients() {
        let ctx = DiffFieldCtx::partial_field(2);
        let got = parse_diffpoly(&ctx, 2, "D[2,1](x2)^3 + u1*x1").unwrap();
        let cubic = x(&ctx, 2, vec![2, 1], 2).pow(3);
        let rest = x(&ctx, 2, vec![0, 0], 1).scale(&ctx.generator(1).unwrap());
        assert_eq!(got, cubic.add(&rest));
        assert_eq!(got.leader(), Some(RankedVar::new(MultiIndex::new(vec![2, 1]), 2)));
    }

    #[test]
    fn arity_violations() {
        let two = DiffFieldCtx::rationals(2);
        assert!(matches!(
            parse_diffpoly(&two, 1, "d3(x1)"),
            Err(DiffError::ArityError(_))
        ));
        assert!(matches!(
            parse_diffpoly(&two, 1, "D[1](x1)"),
            Err(DiffError::ArityError(_))
        ));
        assert!(matches!(
            parse_diffpoly(&q1(), 2, "x3"),
            Err(DiffError::ArityError(_))
        ));
        assert!(matches!(
            parse_diffpoly(&q1(), 1, "u1"),
            Err(DiffError::ArityError(_))
        ));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let ctx = q1();
        match parse_diffpoly(&ctx, 1, "x1 + ") {
            Err(DiffError::SyntaxError { pos, .. }) => assert_eq!(pos, 6),
            other => panic!("expected a syntax error, got {other:?}"),
        }
        match parse_diffpoly(&ctx, 1, "x1 x1") {
            Err(DiffError::SyntaxError { pos, msg }) => {
                assert_eq!(pos, 4);
                assert!(msg.contains("trailing"));
            }
            other => panic!("expected a syntax error, got {other:?}"),
        }
        assert!(matches!(
            parse_diffpoly(&ctx, 1, ""),
            Err(DiffError::SyntaxError { .. })
        ));
        assert!(matches!(
            parse_diffpoly(&ctx, 1, "x0"),
            Err(DiffError::SyntaxError { .. })
        ));
    }

    #[test]
    fn rational_constants_and_precedence() {
        let ctx = q1();
        let got = parse_diffpoly(&ctx, 1, "3/2*x1^2 - 1/6").unwrap();
        let half3 = ctx.from_int(3).div(&ctx.from_int(2)).unwrap();
        let sixth = ctx.from_int(1).div(&ctx.from_int(6)).unwrap();
        let want = x(&ctx, 1, vec![0], 1)
            .pow(2)
            .scale(&half3)
            .sub(&DiffPoly::constant(&ctx, 1, sixth));
        assert_eq!(got, want);
        // Unary minus binds outside the power.
        let neg = parse_diffpoly(&ctx, 1, "-x1^2").unwrap();
        assert_eq!(neg, x(&ctx, 1, vec![0], 1).pow(2).neg());
        // Product of sums.
        let diff = parse_diffpoly(&ctx, 1, "(x1 + 1)*(x1 - 1)").unwrap();
        assert_eq!(
            diff,
            x(&ctx, 1, vec![0], 1).pow(2).sub(&DiffPoly::one(&ctx, 1))
        );
    }

    #[test]
    fn division_is_scalar_only() {
        let ctx = q1();
        let got = parse_diffpoly(&ctx, 1, "x1/2").unwrap();
        let half = ctx.from_int(1).div(&ctx.from_int(2)).unwrap();
        assert_eq!(got, x(&ctx, 1, vec![0], 1).scale(&half));
        assert!(matches!(
            parse_diffpoly(&ctx, 1, "1/x1"),
            Err(DiffError::SyntaxError { .. })
        ));
        assert!(matches!(
            parse_diffpoly(&ctx, 1, "x1/0"),
            Err(DiffError::DivisionByZero)
        ));
    }

    #[test]
    fn scalar_parsing() {
        let ctx = DiffFieldCtx::partial_field(1);
        let u = ctx.generator(1).unwrap();
        assert_eq!(parse_scalar(&ctx, "u1 + 1").unwrap(), u.add(&ctx.one()));
        assert_eq!(
            parse_scalar(&ctx, "(u1^2 - 1)/(u1 + 1)").unwrap(),
            u.sub(&ctx.one())
        );
        assert_eq!(parse_scalar(&ctx, "d1(u1^2)").unwrap(), u.mul(&ctx.from_int(2)));
        assert!(matches!(
            parse_scalar(&ctx, "x1"),
            Err(DiffError::ArityError(_))
        ));
    }

    #[test]
    fn print_parse_fixpoint() {
        let ctx2 = DiffFieldCtx::partial_field(2);
        let q = q1();
        let cases: Vec<(&DiffFieldCtx, usize, &str)> = vec![
            (&q, 1, "d1(x1) - x1"),
            (&q, 1, "x1*d1(x1) - 1"),
            (&q, 2, "d1(x2)^2 + x1*x2 - 5"),
            (&q, 1, "-3*d1(d1(x1)) + x1^4"),
            (&q, 1, "7/3"),
            (&ctx2, 2, "D[2,1](x2)^3 + u1*x1"),
            (&ctx2, 1, "d2(x1) - u2*x1"),
            (&ctx2, 1, "x1/u1 + u2^2"),
            (&ctx2, 2, "(x1 + x2)^2 - D[0,1](x1)*D[1,0](x2)"),
        ];
        for (ctx, n, text) in cases {
            let once = parse_diffpoly(ctx, n, text).unwrap();
            let printed = once.to_string();
            let twice = parse_diffpoly(ctx, n, &printed).unwrap();
            assert_eq!(once, twice, "fixpoint failed for {text}");
            assert_eq!(printed, twice.to_string());
        }
    }

    #[test]
    fn whitespace_is_free() {
        let ctx = q1();
        let a = parse_diffpoly(&ctx, 1, " d1( x1 )  -   x1 ").unwrap();
        let b = parse_diffpoly(&ctx, 1, "d1(x1)-x1").unwrap();
        assert_eq!(a, b);
    }
}
