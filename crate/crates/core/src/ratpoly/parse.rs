//! Text syntax for rationals and polynomials.
//!
//! ```text
//! poly  := ('+'|'-')? term (('+'|'-') term)*
//! term  := coeff ('*'? monom)* | monom ('*'? monom)*
//! monom := ('x'|'y') ('^' nat)?
//! coeff := int ('/' posint)?
//! ```
//!
//! Whitespace is insignificant. Error positions are 1-based columns.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::poly::BivarPoly;
use crate::error::{Error, Result};
use crate::Rat;

/// Largest exponent accepted on a single variable.
pub const MAX_EXPONENT: u32 = 1 << 16;

/// Parse `int` or `num/den` (optional sign, positive denominator).
pub fn parse_rat(text: &str) -> Result<Rat> {
    let mut lx = Lexer::new(text);
    lx.skip_ws();
    let neg = match lx.peek() {
        Some('-') => {
            lx.bump();
            true
        }
        Some('+') => {
            lx.bump();
            false
        }
        _ => false,
    };
    lx.skip_ws();
    let value = lx.coeff()?.ok_or_else(|| lx.error("expected a rational number"))?;
    lx.skip_ws();
    if lx.peek().is_some() {
        return Err(lx.error("unexpected trailing input"));
    }
    Ok(if neg { -value } else { value })
}

/// Parse a polynomial in `x` and `y` with rational coefficients.
pub fn parse_poly(text: &str) -> Result<BivarPoly<Rat>> {
    let mut lx = Lexer::new(text);
    let mut out = BivarPoly::zero();
    lx.skip_ws();
    if lx.peek().is_none() {
        return Err(lx.error("empty polynomial"));
    }
    let mut sign = match lx.peek() {
        Some('-') => {
            lx.bump();
            -1
        }
        Some('+') => {
            lx.bump();
            1
        }
        _ => 1,
    };
    loop {
        lx.skip_ws();
        let (coeff, i, j) = lx.term()?;
        let c = if sign < 0 { -coeff } else { coeff };
        out = &out + &BivarPoly::term(c, i, j);
        lx.skip_ws();
        match lx.peek() {
            None => break,
            Some('+') => {
                lx.bump();
                sign = 1;
            }
            Some('-') => {
                lx.bump();
                sign = -1;
            }
            Some(_) => return Err(lx.error("expected '+', '-' or end of input")),
        }
    }
    Ok(out)
}

struct Lexer {
    chars: Vec<char>,
    pos: usize,
}

impl Lexer {
    fn new(src: &str) -> Self {
        Lexer {
            chars: src.chars().collect(),
            pos: 0,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) {
        self.pos += 1;
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn error(&self, msg: &str) -> Error {
        Error::Syntax {
            pos: self.pos + 1,
            msg: msg.to_string(),
        }
    }

    fn digits(&mut self) -> Option<(usize, String)> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        (self.pos > start).then(|| (start, self.chars[start..self.pos].iter().collect()))
    }

    fn coeff(&mut self) -> Result<Option<Rat>> {
        let Some((_, num)) = self.digits() else {
            return Ok(None);
        };
        let num: BigInt = num.parse().expect("ascii digits");
        self.skip_ws();
        if self.peek() != Some('/') {
            return Ok(Some(Rat::from_integer(num)));
        }
        self.bump();
        self.skip_ws();
        let Some((_, den)) = self.digits() else {
            return Err(self.error("expected a positive denominator"));
        };
        let den: BigInt = den.parse().expect("ascii digits");
        if den.is_zero() {
            return Err(self.error("zero denominator"));
        }
        Ok(Some(Rat::new(num, den)))
    }

    fn monom(&mut self) -> Result<Option<(u32, u32)>> {
        let var = match self.peek() {
            Some('x') => (1, 0),
            Some('y') => (0, 1),
            _ => return Ok(None),
        };
        self.bump();
        self.skip_ws();
        if self.peek() != Some('^') {
            return Ok(Some(var));
        }
        self.bump();
        self.skip_ws();
        let Some((start, text)) = self.digits() else {
            return Err(self.error("expected an exponent"));
        };
        let e: u32 = match text.parse::<u32>() {
            Ok(e) if e <= MAX_EXPONENT => e,
            _ => return Err(Error::ExponentOverflow { pos: start + 1 }),
        };
        Ok(Some((var.0 * e, var.1 * e)))
    }

    fn term(&mut self) -> Result<(Rat, u32, u32)> {
        let mut coeff = Rat::one();
        let mut seen = false;
        if let Some(c) = self.coeff()? {
            coeff = c;
            seen = true;
        }
        let (mut i, mut j) = (0u32, 0u32);
        loop {
            self.skip_ws();
            let save = self.pos;
            let star = self.peek() == Some('*');
            if star {
                if !seen {
                    return Err(self.error("'*' before any factor"));
                }
                self.bump();
                self.skip_ws();
            }
            match self.monom()? {
                Some((a, b)) => {
                    i = i
                        .checked_add(a)
                        .filter(|v| *v <= MAX_EXPONENT)
                        .ok_or(Error::ExponentOverflow { pos: save + 1 })?;
                    j = j
                        .checked_add(b)
                        .filter(|v| *v <= MAX_EXPONENT)
                        .ok_or(Error::ExponentOverflow { pos: save + 1 })?;
                    seen = true;
                }
                None if star => return Err(self.error("expected 'x' or 'y' after '*'")),
                None => {
                    self.pos = save;
                    break;
                }
            }
        }
        if !seen {
            return Err(self.error("expected a coefficient or a monomial"));
        }
        Ok((coeff, i, j))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Rat {
        Rat::new(n.into(), d.into())
    }

    #[test]
    fn transcribes_simple_terms() {
        let q = parse_poly("x^2 - y").unwrap();
        assert_eq!(q, BivarPoly::from_terms([((2, 0), r(1, 1)), ((0, 1), r(-1, 1))]));
        assert!(parse_poly("0").unwrap().is_zero());
        let q = parse_poly("3/2*x*y + x").unwrap();
        assert_eq!(q, BivarPoly::from_terms([((1, 1), r(3, 2)), ((1, 0), r(1, 1))]));
    }

    #[test]
    fn accepts_juxtaposition_and_whitespace() {
        let a = parse_poly(" 2 x y^2 -  x ^ 3 ").unwrap();
        let b = parse_poly("2*x*y^2 - x^3").unwrap();
        assert_eq!(a, b);
        assert_eq!(parse_poly("-x + 4/6").unwrap(), parse_poly("2/3 - x").unwrap());
        assert_eq!(parse_poly("xy").unwrap(), parse_poly("x*y").unwrap());
    }

    #[test]
    fn reports_error_positions() {
        assert_eq!(
            parse_poly("x + * y"),
            Err(Error::Syntax {
                pos: 5,
                msg: "'*' before any factor".into()
            })
        );
        assert!(matches!(parse_poly("x^"), Err(Error::Syntax { pos: 3, .. })));
        assert!(matches!(parse_poly("x z"), Err(Error::Syntax { pos: 3, .. })));
        assert!(matches!(parse_poly("1/0"), Err(Error::Syntax { .. })));
        assert!(matches!(parse_poly(""), Err(Error::Syntax { pos: 1, .. })));
    }

    #[test]
    fn exponent_overflow() {
        assert_eq!(parse_poly("x^99999999999"), Err(Error::ExponentOverflow { pos: 3 }));
        assert!(matches!(parse_poly("x^65536*x^65536"), Err(Error::ExponentOverflow { .. })));
    }

    #[test]
    fn rationals() {
        assert_eq!(parse_rat("3/2").unwrap(), r(3, 2));
        assert_eq!(parse_rat("-4/6").unwrap(), r(-2, 3));
        assert_eq!(parse_rat(" 7 ").unwrap(), r(7, 1));
        assert!(parse_rat("3/").is_err());
        assert!(parse_rat("abc").is_err());
        assert!(parse_rat("1/2/3").is_err());
    }

    fn small_poly() -> impl Strategy<Value = BivarPoly<Rat>> {
        proptest::collection::vec(((0u32..4, 0u32..4), -9i64..10, 1i64..5), 0..6).prop_map(|ts| {
            BivarPoly::from_terms(ts.into_iter().map(|((i, j), n, d)| ((i, j), r(n, d))))
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(q in small_poly()) {
            let printed = q.to_string();
            let back = parse_poly(&printed).unwrap();
            prop_assert_eq!(&back, &q);
            prop_assert_eq!(back.to_string(), printed);
        }
    }
}
