//! Outward-rounded dyadic intervals `[lo, hi] * 2^exp` over big integers.
//!
//! Used to continue integral orbits after exact coordinates become too
//! large: the interval always contains the exact value, and heights are
//! bracketed from the interval endpoints.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::heights::log_abs;

/// Working precision in bits for interval endpoints.
pub const PRECISION_BITS: u64 = 512;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BigInterval {
    lo: BigInt,
    hi: BigInt,
    exp: i64,
}

fn floor_shift(v: &BigInt, s: u64) -> BigInt {
    // `>>` on BigInt rounds toward negative infinity.
    v >> s
}

fn ceil_shift(v: &BigInt, s: u64) -> BigInt {
    -((-v) >> s)
}

impl BigInterval {
    pub fn exact(v: BigInt) -> Self {
        BigInterval {
            lo: v.clone(),
            hi: v,
            exp: 0,
        }
        .rounded()
    }

    fn rounded(mut self) -> Self {
        let bits = self.lo.bits().max(self.hi.bits());
        if bits > PRECISION_BITS {
            let s = bits - PRECISION_BITS;
            self.lo = floor_shift(&self.lo, s);
            self.hi = ceil_shift(&self.hi, s);
            self.exp += s as i64;
        }
        self
    }

    /// Both intervals on a common exponent. Exact when the exponents are
    /// close; otherwise the finer operand is rounded outward to a grid a few
    /// bits below the working precision of the larger one.
    fn aligned(&self, other: &Self) -> (BigInt, BigInt, BigInt, BigInt, i64) {
        let top = |v: &Self| v.exp + v.lo.bits().max(v.hi.bits()) as i64;
        let floor_exp = top(self).max(top(other)) - PRECISION_BITS as i64 - 8;
        let e = self.exp.min(other.exp).max(floor_exp);
        let to = |v: &Self| -> (BigInt, BigInt) {
            if v.exp >= e {
                let s = (v.exp - e) as u64;
                (&v.lo << s, &v.hi << s)
            } else {
                let s = (e - v.exp) as u64;
                (floor_shift(&v.lo, s), ceil_shift(&v.hi, s))
            }
        };
        let (alo, ahi) = to(self);
        let (blo, bhi) = to(other);
        (alo, ahi, blo, bhi, e)
    }

    pub fn add(&self, other: &Self) -> Self {
        let (alo, ahi, blo, bhi, exp) = self.aligned(other);
        BigInterval {
            lo: alo + blo,
            hi: ahi + bhi,
            exp,
        }
        .rounded()
    }

    pub fn mul(&self, other: &Self) -> Self {
        let cands = [
            &self.lo * &other.lo,
            &self.lo * &other.hi,
            &self.hi * &other.lo,
            &self.hi * &other.hi,
        ];
        let lo = cands.iter().min().expect("four products").clone();
        let hi = cands.iter().max().expect("four products").clone();
        BigInterval {
            lo,
            hi,
            exp: self.exp + other.exp,
        }
        .rounded()
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        self.mul(&BigInterval::exact(c.clone()))
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    /// Bracket of `log |v|` over the interval; the lower end is `-inf` when
    /// the interval contains zero.
    pub fn log_abs_bounds(&self) -> (f64, f64) {
        let shift = self.exp as f64 * std::f64::consts::LN_2;
        let (alo, ahi) = (self.lo.abs(), self.hi.abs());
        let big = if alo > ahi { &alo } else { &ahi };
        let small = if alo > ahi { &ahi } else { &alo };
        let upper = log_abs(big) + shift;
        let lower = if self.contains_zero() || small.is_zero() {
            f64::NEG_INFINITY
        } else {
            log_abs(small) + shift
        };
        // Pad for the rounding of the double-precision logarithms.
        let pad = 1e-12 * (1.0 + upper.abs());
        (lower - pad, upper + pad)
    }
}

/// Integer polynomial `sum c * x^i * y^j` evaluated on intervals.
pub fn eval_terms(terms: &[(u32, u32, BigInt)], x: &BigInterval, y: &BigInterval) -> BigInterval {
    let dx = terms.iter().map(|t| t.0).max().unwrap_or(0) as usize;
    let dy = terms.iter().map(|t| t.1).max().unwrap_or(0) as usize;
    let one = BigInterval::exact(BigInt::from(1));
    let powers = |v: &BigInterval, n: usize| {
        let mut out = vec![one.clone()];
        for k in 1..=n {
            let next = out[k - 1].mul(v);
            out.push(next);
        }
        out
    };
    let xs = powers(x, dx);
    let ys = powers(y, dy);
    let mut acc = BigInterval::exact(BigInt::zero());
    for (i, j, c) in terms {
        let mono = xs[*i as usize].mul(&ys[*j as usize]);
        acc = acc.add(&mono.scale(c));
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shifts_round_outward() {
        let v = BigInt::from(-5);
        assert_eq!(floor_shift(&v, 1), BigInt::from(-3));
        assert_eq!(ceil_shift(&v, 1), BigInt::from(-2));
        assert_eq!(floor_shift(&BigInt::from(5), 1), BigInt::from(2));
        assert_eq!(ceil_shift(&BigInt::from(5), 1), BigInt::from(3));
    }

    #[test]
    fn encloses_exact_squares() {
        // Iterate x -> x^2 - 1 exactly and in intervals; compare logs.
        let mut exact = BigInt::from(3);
        let mut iv = BigInterval::exact(exact.clone());
        let minus_one = BigInterval::exact(BigInt::from(-1));
        for _ in 0..14 {
            exact = &exact * &exact - 1;
            iv = iv.mul(&iv).add(&minus_one);
        }
        let h = log_abs(&exact);
        let (lo, hi) = iv.log_abs_bounds();
        assert!(lo <= h && h <= hi);
        assert!(hi - lo < 1e-6);
    }

    #[test]
    fn evaluation_matches_exact_polynomial() {
        let terms = vec![(2, 0, BigInt::from(1)), (0, 1, BigInt::from(-3)), (1, 1, BigInt::from(2))];
        let (x, y) = (BigInt::from(10).pow(200), BigInt::from(-7).pow(150));
        let exact = &x * &x - &y * 3 + &x * &y * 2;
        let v = eval_terms(&terms, &BigInterval::exact(x), &BigInterval::exact(y));
        let (lo, hi) = v.log_abs_bounds();
        let h = log_abs(&exact);
        assert!(lo <= h && h <= hi);
    }

    #[test]
    fn distant_exponents_add_cheaply() {
        let big = BigInterval {
            lo: BigInt::from(3) << 600u32,
            hi: BigInt::from(3) << 600u32,
            exp: 1_000_000_000,
        }
        .rounded();
        let s = big
            .add(&BigInterval::exact(BigInt::from(1)))
            .add(&BigInterval::exact(BigInt::from(-1)));
        assert!(s.exp > 999_000_000);
        assert!(s.lo <= s.hi);
        let (lo, hi) = s.log_abs_bounds();
        let (blo, bhi) = big.log_abs_bounds();
        assert!(lo <= blo && bhi <= hi);
        assert!(hi - lo < 1e-11 * hi);
    }
}
